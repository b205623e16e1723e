#include "urbanpulse/model.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include "urbanpulse/errors.hpp"

namespace urbanpulse {

namespace {

bool is_constant_column(double mean, double sd) { return sd <= 1e-12 * std::max(1.0, std::abs(mean)); }

}  // namespace

Eigen::VectorXd StandardizeStats::divisor() const {
    Eigen::VectorXd d(stddev.size());
    for (Eigen::Index j = 0; j < stddev.size(); ++j) {
        d(j) = is_constant_column(mean(j), stddev(j)) ? 1.0 : stddev(j);
    }
    return d;
}

Eigen::Index StandardizeStats::active_columns() const {
    Eigen::Index n = 0;
    for (Eigen::Index j = 0; j < stddev.size(); ++j) n += is_constant_column(mean(j), stddev(j)) ? 0 : 1;
    return n;
}

StandardizeStats standardize_fit(const Eigen::MatrixXd& X) {
    if (X.rows() == 0 || X.cols() == 0) throw InputError("standardize_fit: empty matrix");
    StandardizeStats s;
    s.mean = X.colwise().mean().transpose();
    const Eigen::MatrixXd centered = X.rowwise() - s.mean.transpose();
    s.stddev = (centered.array().square().colwise().sum() / static_cast<double>(X.rows())).sqrt().transpose();
    return s;
}

Eigen::MatrixXd standardize_apply(const StandardizeStats& stats, const Eigen::MatrixXd& X) {
    if (X.cols() != stats.mean.size()) throw InputError("standardize_apply: dimension mismatch");
    const Eigen::VectorXd div = stats.divisor();
    Eigen::MatrixXd out = X.rowwise() - stats.mean.transpose();
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        if (is_constant_column(stats.mean(j), stats.stddev(j))) {
            // Training-constant columns carry no information; pin them to 0.
            out.col(j).setZero();
        } else {
            out.col(j) /= div(j);
        }
    }
    return out;
}

// ---------------------------------------------------------------- linear

Eigen::VectorXd LinearModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != w.size()) throw InputError("LinearModel::predict: dimension mismatch");
    return (X * w).array() + w0;
}

LinearModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    if (X.rows() != y.size()) throw InputError("fit_ols: row count mismatch");
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    if (n < d + 1) throw InputError("fit_ols: need at least D+1 rows");
    Eigen::MatrixXd A(n, d + 1);
    A.leftCols(d) = X;
    A.col(d).setOnes();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
    qr.setThreshold(1e-10);
    if (qr.rank() < d + 1) {
        throw SingularSystemError("fit_ols: design matrix is rank-deficient (rank " +
                                  std::to_string(qr.rank()) + " of " + std::to_string(d + 1) +
                                  "); use ridge regression with lambda > 0");
    }
    const Eigen::VectorXd beta = qr.solve(y);
    return {beta.head(d), beta(d), std::nullopt};
}

LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ConfigError("fit_ridge: lambda must be >= 0");
    if (X.rows() != y.size()) throw InputError("fit_ridge: row count mismatch");
    if (X.rows() == 0) throw InputError("fit_ridge: empty matrix");
    const Eigen::RowVectorXd xm = X.colwise().mean();
    const double ym = y.mean();
    const Eigen::MatrixXd Xc = X.rowwise() - xm;
    const Eigen::VectorXd yc = y.array() - ym;
    Eigen::MatrixXd G = Xc.transpose() * Xc;
    G.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    if (llt.info() != Eigen::Success) {
        throw SingularSystemError("fit_ridge: normal equations not positive definite; increase lambda");
    }
    LinearModel m;
    m.w = llt.solve(Xc.transpose() * yc);
    m.w0 = ym - xm.dot(m.w);
    m.lambda = lambda;
    return m;
}

double squared_error_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y) {
    const Eigen::VectorXd r = y - m.predict(X);
    return r.squaredNorm() / static_cast<double>(y.size());
}

// ---------------------------------------------------------------- kernel

void KernelParams::validate() const {
    if (degree < 1) throw ConfigError("model.degree must be >= 1");
    if (gamma && (!(*gamma > 0.0) || !std::isfinite(*gamma))) throw ConfigError("model.gamma must be > 0");
    if (!(coef0 >= 0.0) || !std::isfinite(coef0)) throw ConfigError("model.coef0 must be >= 0");
}

double poly_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const KernelParams& params) {
    if (x.size() != z.size()) throw InputError("poly_kernel: dimension mismatch");
    params.validate();
    const double gamma = params.gamma.value_or(x.size() > 0 ? 1.0 / static_cast<double>(x.size()) : 1.0);
    return std::pow(gamma * x.dot(z) + params.coef0, params.degree);
}

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const KernelParams& params) {
    if (A.cols() != B.cols()) throw InputError("kernel_matrix: dimension mismatch");
    if (!params.gamma) throw InputError("kernel_matrix: gamma must be resolved");
    Eigen::MatrixXd K = ((*params.gamma) * (A * B.transpose())).array() + params.coef0;
    if (params.degree > 1) {
        const Eigen::ArrayXXd base = K.array();
        Eigen::ArrayXXd acc = base;
        for (int p = 1; p < params.degree; ++p) acc *= base;
        K = acc.matrix();
    }
    return K;
}

Eigen::VectorXd KrrModel::predict(const Eigen::MatrixXd& X) const {
    if (X.cols() != dim()) throw InputError("KrrModel::predict: dimension mismatch");
    const Eigen::MatrixXd Xs = standardize_apply(stats, X);
    return (kernel_matrix(Xs, X_train, params) * dual_alpha).array() + y_mean;
}

Eigen::VectorXd predict(const KrrModel& model, const Eigen::MatrixXd& X) { return model.predict(X); }

KrrModel fit_krr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                 const KernelParams& params) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ConfigError("fit_krr: lambda must be > 0");
    if (X.rows() != y.size()) throw InputError("fit_krr: row count mismatch");
    params.validate();
    KrrModel m;
    m.stats = standardize_fit(X);
    m.params = params;
    if (!m.params.gamma) {
        m.params.gamma = 1.0 / static_cast<double>(std::max<Eigen::Index>(1, m.stats.active_columns()));
    }
    m.lambda = lambda;
    m.y_mean = y.mean();
    m.X_train = standardize_apply(m.stats, X);
    const Eigen::VectorXd yc = y.array() - m.y_mean;
    const Eigen::Index n = X.rows();

    Eigen::MatrixXd A = kernel_matrix(m.X_train, m.X_train, m.params);
    const double trace = A.trace();
    A.diagonal().array() += lambda;
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success) {
        A.diagonal().array() += 1e-8 * trace / static_cast<double>(n);
        llt.compute(A);
    }
    if (llt.info() != Eigen::Success) {
        Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
        const double pivot = ldlt.vectorD().minCoeff();
        throw NumericalError("fit_krr: kernel system is not positive definite (smallest pivot " +
                             std::to_string(pivot) + ")");
    }
    m.dual_alpha = llt.solve(yc);
    return m;
}

// ---------------------------------------------------------------- I/O

namespace {

constexpr const char* kMagic = "urbanpulse-krr";
constexpr int kVersion = 1;

std::string hex(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%a", v);
    return buf;
}

double read_hex(std::istream& in, const char* what) {
    std::string tok;
    if (!(in >> tok)) throw FormatError(std::string("model file: missing ") + what);
    char* end = nullptr;
    const double v = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') throw FormatError(std::string("model file: bad ") + what);
    return v;
}

void expect(std::istream& in, const std::string& key) {
    std::string tok;
    if (!(in >> tok) || tok != key) throw FormatError("model file: expected '" + key + "'");
}

}  // namespace

void save_model(std::ostream& out, const KrrModel& m) {
    out << kMagic << " v" << kVersion << '\n';
    out << "dim " << m.dim() << '\n';
    out << "rows " << m.X_train.rows() << '\n';
    out << "degree " << m.params.degree << '\n';
    out << "gamma " << hex(m.params.gamma.value_or(0.0)) << '\n';
    out << "coef0 " << hex(m.params.coef0) << '\n';
    out << "lambda " << hex(m.lambda) << '\n';
    out << "y_mean " << hex(m.y_mean) << '\n';
    auto vec = [&out](const char* key, const Eigen::VectorXd& v) {
        out << key;
        for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << hex(v(i));
        out << '\n';
    };
    vec("mean", m.stats.mean);
    vec("stddev", m.stats.stddev);
    vec("alpha", m.dual_alpha);
    for (Eigen::Index r = 0; r < m.X_train.rows(); ++r) {
        out << 'x';
        for (Eigen::Index j = 0; j < m.X_train.cols(); ++j) out << ' ' << hex(m.X_train(r, j));
        out << '\n';
    }
}

KrrModel load_model(std::istream& in) {
    std::string magic, version;
    if (!(in >> magic >> version) || magic != kMagic) throw FormatError("model file: bad magic");
    if (version != "v" + std::to_string(kVersion)) throw FormatError("model file: unsupported version " + version);
    KrrModel m;
    Eigen::Index dim = 0, rows = 0;
    expect(in, "dim");
    if (!(in >> dim) || dim < 0) throw FormatError("model file: bad dim");
    expect(in, "rows");
    if (!(in >> rows) || rows < 0) throw FormatError("model file: bad rows");
    expect(in, "degree");
    if (!(in >> m.params.degree)) throw FormatError("model file: bad degree");
    expect(in, "gamma");
    m.params.gamma = read_hex(in, "gamma");
    expect(in, "coef0");
    m.params.coef0 = read_hex(in, "coef0");
    expect(in, "lambda");
    m.lambda = read_hex(in, "lambda");
    expect(in, "y_mean");
    m.y_mean = read_hex(in, "y_mean");
    auto vec = [&in](const char* key, Eigen::Index n) {
        expect(in, key);
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) v(i) = read_hex(in, key);
        return v;
    };
    m.stats.mean = vec("mean", dim);
    m.stats.stddev = vec("stddev", dim);
    m.dual_alpha = vec("alpha", rows);
    m.X_train.resize(rows, dim);
    for (Eigen::Index r = 0; r < rows; ++r) {
        expect(in, "x");
        for (Eigen::Index j = 0; j < dim; ++j) m.X_train(r, j) = read_hex(in, "x");
    }
    m.params.validate();
    return m;
}

}  // namespace urbanpulse
