#include "urbanpulse/baseline.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "urbanpulse/errors.hpp"

namespace urbanpulse {

double ArmaModel::process_mean() const {
    double s = 0.0;
    for (double v : phi) s += v;
    return c / (1.0 - s);
}

namespace {

// Least squares with rank check; columns of A are used as given.
Eigen::VectorXd least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b, const char* stage) {
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < A.cols()) {
        throw NumericalError(std::string("fit_arma: ") + stage + " regression is rank-deficient");
    }
    return qr.solve(b);
}

// Moves every root of z^k + a_1 z^(k-1) + ... + a_k with modulus >= limit to
// its reflection 1/conj(root), then shrinks onto the circle of radius limit
// when the root sits on the unit circle. Returns true when anything changed.
bool reflect_roots(std::vector<double>& a, double limit) {
    const auto k = static_cast<Eigen::Index>(a.size());
    if (k == 0) return false;
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) companion(0, j) = -a[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 1; i < k; ++i) companion(i, i - 1) = 1.0;
    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, false);
    Eigen::VectorXcd roots = solver.eigenvalues();
    bool changed = false;
    for (auto& r : roots) {
        const double mod = std::abs(r);
        if (mod < limit) continue;
        changed = true;
        r = mod > 1.0 ? 1.0 / std::conj(r) : r;
        if (std::abs(r) >= limit) r *= limit / std::abs(r);
    }
    if (!changed) return false;
    Eigen::VectorXcd poly = Eigen::VectorXcd::Zero(k + 1);
    poly(0) = 1.0;
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j >= 1; --j) poly(j) -= roots(i) * poly(j - 1);
    }
    for (Eigen::Index j = 0; j < k; ++j) a[static_cast<std::size_t>(j)] = poly(j + 1).real();
    return true;
}

constexpr double kRootLimit = 1.0 - 1e-6;

}  // namespace

ArmaModel fit_arma(std::span<const double> y, int p, int q) {
    if (p < 0 || q < 0 || p + q < 1) throw ConfigError("fit_arma: need p >= 0, q >= 0, p + q >= 1");
    const auto n = static_cast<Eigen::Index>(y.size());
    if (n < 3 * (p + q) + 1) {
        throw DataError("fit_arma: series of length " + std::to_string(n) + " is too short for ARMA(" +
                        std::to_string(p) + "," + std::to_string(q) + ")");
    }
    double mean = 0.0;
    for (double v : y) {
        if (!std::isfinite(v)) throw DataError("fit_arma: non-finite value in series");
        mean += v;
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    if (!(var > 1e-12 * std::max(1.0, mean * mean) * static_cast<double>(n))) {
        throw DataError("fit_arma: zero variance after demeaning");
    }

    // Stage 1: long AR for innovation estimates.
    std::vector<double> resid(static_cast<std::size_t>(n), 0.0);
    Eigen::Index m = 0;
    if (q > 0) {
        m = std::max<Eigen::Index>(std::min<Eigen::Index>(20, n / 4), p);
        const Eigen::Index rows = n - m;
        Eigen::MatrixXd A(rows, m + 1);
        Eigen::VectorXd b(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const Eigen::Index t = m + r;
            A(r, 0) = 1.0;
            for (Eigen::Index i = 1; i <= m; ++i) A(r, i) = y[static_cast<std::size_t>(t - i)];
            b(r) = y[static_cast<std::size_t>(t)];
        }
        const Eigen::VectorXd beta = least_squares(A, b, "long autoregression");
        const Eigen::VectorXd e = b - A * beta;
        for (Eigen::Index r = 0; r < rows; ++r) resid[static_cast<std::size_t>(m + r)] = e(r);
    }

    // Stage 2: regress on lagged values and lagged innovation estimates.
    const Eigen::Index start = std::max<Eigen::Index>(p, m + q);
    const Eigen::Index rows = n - start;
    const Eigen::Index cols = 1 + p + q;
    if (rows < cols) throw DataError("fit_arma: not enough observations after lagging");
    Eigen::MatrixXd A(rows, cols);
    Eigen::VectorXd b(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const Eigen::Index t = start + r;
        A(r, 0) = 1.0;
        for (Eigen::Index i = 1; i <= p; ++i) A(r, i) = y[static_cast<std::size_t>(t - i)];
        for (Eigen::Index j = 1; j <= q; ++j) A(r, p + j) = resid[static_cast<std::size_t>(t - j)];
        b(r) = y[static_cast<std::size_t>(t)];
    }
    const Eigen::VectorXd beta = least_squares(A, b, "lagged-innovation");
    const Eigen::VectorXd e = b - A * beta;

    ArmaModel model;
    model.p = p;
    model.q = q;
    model.c = beta(0);
    model.phi.assign(beta.data() + 1, beta.data() + 1 + p);
    model.theta.assign(beta.data() + 1 + p, beta.data() + 1 + p + q);
    model.sigma2 = e.squaredNorm() / static_cast<double>(rows);

    // Keep the fitted process stationary and invertible. Reflected AR roots
    // change the implied level, so the intercept is reset to the sample mean.
    std::vector<double> ar(model.phi.size());
    for (std::size_t i = 0; i < ar.size(); ++i) ar[i] = -model.phi[i];
    if (reflect_roots(ar, kRootLimit)) {
        double s = 0.0;
        for (std::size_t i = 0; i < ar.size(); ++i) {
            model.phi[i] = -ar[i];
            s += model.phi[i];
        }
        model.c = mean * (1.0 - s);
    }
    reflect_roots(model.theta, kRootLimit);
    return model;
}

std::vector<double> forecast_arma(const ArmaModel& model, std::span<const double> history,
                                  int horizon) {
    if (horizon <= 0) throw InputError("forecast_arma: horizon must be > 0");
    if (history.size() < static_cast<std::size_t>(model.p) || history.empty()) {
        throw InputError("forecast_arma: history shorter than the AR order");
    }
    const std::size_t p = static_cast<std::size_t>(model.p);
    const std::size_t q = static_cast<std::size_t>(model.q);
    const std::size_t h0 = history.size();
    std::vector<double> y(history.begin(), history.end());
    std::vector<double> e(h0, 0.0);
    auto one_step = [&](std::size_t t) {
        double v = model.c;
        for (std::size_t i = 1; i <= p; ++i) v += model.phi[i - 1] * y[t - i];
        for (std::size_t j = 1; j <= q && j <= t; ++j) v += model.theta[j - 1] * e[t - j];
        return v;
    };
    for (std::size_t t = p; t < h0; ++t) e[t] = y[t] - one_step(t);

    y.resize(h0 + static_cast<std::size_t>(horizon));
    e.resize(y.size(), 0.0);
    for (std::size_t t = h0; t < y.size(); ++t) y[t] = one_step(t);
    return {y.begin() + static_cast<std::ptrdiff_t>(h0), y.end()};
}

}  // namespace urbanpulse
