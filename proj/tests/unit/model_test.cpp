#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <sstream>

#include "urbanpulse/errors.hpp"
#include "urbanpulse/model.hpp"

using namespace urbanpulse;

namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& gen, Eigen::Index r, Eigen::Index c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j) m(i, j) = n(gen);
    return m;
}

Eigen::VectorXd random_vector(std::mt19937_64& gen, Eigen::Index n) { return random_matrix(gen, n, 1).col(0); }

double max_abs(const Eigen::VectorXd& a, const Eigen::VectorXd& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("standardization") {
    Eigen::MatrixXd X(3, 2);
    X << 2, 0, 2, 2, 2, 1;
    const auto stats = standardize_fit(X);
    const auto Z = standardize_apply(stats, X);
    CHECK(Z.col(0).isZero(0));
    CHECK(stats.active_columns() == 1);

    Eigen::MatrixXd Y(2, 1);
    Y << 0, 2;
    const auto s2 = standardize_fit(Y);
    CHECK(s2.mean(0) == 1.0);
    CHECK(s2.stddev(0) == 1.0);
    const auto Y2 = standardize_apply(s2, Y);
    CHECK(Y2(0, 0) == -1.0);
    CHECK(Y2(1, 0) == 1.0);

    std::mt19937_64 gen(1);
    const Eigen::MatrixXd R = random_matrix(gen, 40, 6) * 7.0;
    const auto Rs = standardize_apply(standardize_fit(R), R);
    CHECK(Rs.colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    CHECK_THROWS_AS(standardize_fit(Eigen::MatrixXd(0, 3)), InputError);
    CHECK_THROWS_AS(standardize_apply(stats, Eigen::MatrixXd(2, 3)), InputError);
}

TEST_CASE("ordinary least squares") {
    Eigen::MatrixXd X(3, 1);
    X << 1, 2, 3;
    Eigen::VectorXd y(3);
    y << 2, 4, 6;
    const auto m = fit_ols(X, y);
    CHECK(std::abs(m.w(0) - 2.0) < 1e-9);
    CHECK(std::abs(m.w0) < 1e-9);

    std::mt19937_64 gen(2);
    const Eigen::MatrixXd A = random_matrix(gen, 30, 4);
    const Eigen::VectorXd w = random_vector(gen, 4);
    const Eigen::VectorXd exact = A * w + Eigen::VectorXd::Constant(30, 0.7);
    const auto fit = fit_ols(A, exact);
    CHECK(max_abs(fit.predict(A), exact) < 1e-9);

    const Eigen::VectorXd noisy = exact + 0.3 * random_vector(gen, 30);
    const auto nfit = fit_ols(A, noisy);
    const Eigen::VectorXd r = noisy - nfit.predict(A);
    CHECK(std::abs(r.sum()) < 1e-9);
    CHECK((A.transpose() * r).cwiseAbs().maxCoeff() < 1e-9);

    Eigen::MatrixXd dup(10, 2);
    dup.col(0) = random_vector(gen, 10);
    dup.col(1) = dup.col(0);
    CHECK_THROWS_AS(fit_ols(dup, random_vector(gen, 10)), SingularSystemError);
    CHECK_THROWS_AS(fit_ols(A.topRows(4), exact.head(4)), InputError);
}

TEST_CASE("ridge regression") {
    std::mt19937_64 gen(3);
    const Eigen::MatrixXd A = random_matrix(gen, 40, 5);
    const Eigen::VectorXd y = A * random_vector(gen, 5) + random_vector(gen, 40);
    const auto ols = fit_ols(A, y);
    const auto r0 = fit_ridge(A, y, 0.0);
    CHECK(max_abs(ols.w, r0.w) < 1e-8);
    CHECK(std::abs(ols.w0 - r0.w0) < 1e-8);

    const auto big = fit_ridge(A, y, 1e12);
    CHECK(big.w.norm() < 1e-6);
    CHECK(max_abs(big.predict(A), Eigen::VectorXd::Constant(40, y.mean())) < 1e-5);

    // 5x2 system against Cramer's rule on the centered normal equations.
    const Eigen::MatrixXd B = random_matrix(gen, 5, 2);
    const Eigen::VectorXd yb = random_vector(gen, 5);
    const double lambda = 0.4;
    const Eigen::RowVectorXd mu = B.colwise().mean();
    double s11 = 0, s12 = 0, s22 = 0, t1 = 0, t2 = 0;
    for (int i = 0; i < 5; ++i) {
        const double a = B(i, 0) - mu(0), b = B(i, 1) - mu(1), c = yb(i) - yb.mean();
        s11 += a * a;
        s12 += a * b;
        s22 += b * b;
        t1 += a * c;
        t2 += b * c;
    }
    s11 += lambda;
    s22 += lambda;
    const double det = s11 * s22 - s12 * s12;
    const double w1 = (t1 * s22 - s12 * t2) / det, w2 = (s11 * t2 - s12 * t1) / det;
    const auto rb = fit_ridge(B, yb, lambda);
    CHECK(std::abs(rb.w(0) - w1) < 1e-10);
    CHECK(std::abs(rb.w(1) - w2) < 1e-10);
    CHECK(std::abs(rb.w0 - (yb.mean() - w1 * mu(0) - w2 * mu(1))) < 1e-10);

    double prev = -1.0;
    for (double l : {0.0, 0.01, 0.1, 1.0, 10.0, 100.0}) {
        const double mse = squared_error_objective(fit_ridge(A, y, l), A, y);
        CHECK(mse >= prev - 1e-12);
        prev = mse;
    }
    CHECK_THROWS_AS(fit_ridge(A, y, -1.0), ConfigError);
}

TEST_CASE("polynomial kernel") {
    Eigen::VectorXd x(3), z(3);
    x << 1, 2, 3;
    z << -1, 0.5, 2;
    CHECK(poly_kernel(x, z, {1, 1.0, 0.0}) == doctest::Approx(x.dot(z)).epsilon(1e-15));
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(2);
    CHECK(poly_kernel(ones, ones, {2, 1.0, 1.0}) == 9.0);
    CHECK(poly_kernel(ones, ones, KernelParams{}) == 4.0);
    CHECK_THROWS_AS(poly_kernel(x, ones, KernelParams{}), InputError);

    std::mt19937_64 gen(4);
    const Eigen::MatrixXd P = random_matrix(gen, 20, 4);
    const Eigen::MatrixXd K = kernel_matrix(P, P, {2, 0.25, 1.0});
    CHECK((K - K.transpose()).cwiseAbs().maxCoeff() == 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(K);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-9);
    for (int i = 0; i < 20; ++i)
        for (int j = 0; j < 20; ++j) {
            const Eigen::VectorXd a = P.row(i).transpose(), b = P.row(j).transpose();
            CHECK(K(i, j) == doctest::Approx(poly_kernel(a, b, {2, 0.25, 1.0})).epsilon(1e-14));
        }
    CHECK_THROWS_AS((KernelParams{0, 1.0, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((KernelParams{2, -1.0, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((KernelParams{2, 1.0, -1.0}.validate()), ConfigError);
}

TEST_CASE("kernel ridge regression") {
    std::mt19937_64 gen(5);
    const Eigen::MatrixXd X = random_matrix(gen, 50, 15);
    const Eigen::VectorXd y = X * random_vector(gen, 15) + random_vector(gen, 50);
    const Eigen::MatrixXd Xn = random_matrix(gen, 12, 15);

    const auto krr = fit_krr(X, y, 2.0, {1, 1.0, 0.0});
    const auto stats = standardize_fit(X);
    const auto ridge = fit_ridge(standardize_apply(stats, X), y, 2.0);
    CHECK(max_abs(krr.predict(Xn), ridge.predict(standardize_apply(stats, Xn))) < 1e-8);
    CHECK(krr.dual_alpha.size() == 50);

    const auto flat = fit_krr(X, y, 1e12, KernelParams{});
    CHECK(max_abs(flat.predict(Xn), Eigen::VectorXd::Constant(12, y.mean())) < 1e-6);

    const Eigen::MatrixXd P = random_matrix(gen, 10, 3);
    const Eigen::VectorXd py = random_vector(gen, 10);
    const auto interp = fit_krr(P, py, 1e-10, KernelParams{});
    CHECK(max_abs(interp.predict(P), py) < 1e-4);

    const auto constant = fit_krr(X, Eigen::VectorXd::Constant(50, 3.5), 1.0, KernelParams{});
    CHECK(max_abs(constant.predict(Xn), Eigen::VectorXd::Constant(12, 3.5)) < 1e-12);

    const auto model = fit_krr(X, y, 1.0, KernelParams{});
    CHECK(*model.params.gamma == 1.0 / 15.0);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(12);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 12, gen);
    CHECK(max_abs(model.predict(perm * Xn), perm * model.predict(Xn)) == 0.0);
    CHECK(predict(model, Xn) == model.predict(Xn));

    CHECK_THROWS_AS(fit_krr(X, y, 0.0, KernelParams{}), ConfigError);
    CHECK_THROWS_AS(model.predict(Eigen::MatrixXd(2, 3)), InputError);
}

TEST_CASE("constant columns do not dilute gamma") {
    std::mt19937_64 gen(6);
    Eigen::MatrixXd X = random_matrix(gen, 30, 6);
    X.col(2).setZero();
    X.col(4).setConstant(3.0);
    const auto m = fit_krr(X, random_vector(gen, 30), 1.0, KernelParams{});
    CHECK(*m.params.gamma == 0.25);
}

TEST_CASE("model files reproduce predictions exactly") {
    std::mt19937_64 gen(7);
    const Eigen::MatrixXd X = random_matrix(gen, 25, 5);
    const auto m = fit_krr(X, random_vector(gen, 25), 0.7, {3, std::nullopt, 0.5});
    std::stringstream io;
    save_model(io, m);
    const auto back = load_model(io);
    const Eigen::MatrixXd Xn = random_matrix(gen, 9, 5);
    CHECK(back.predict(Xn) == m.predict(Xn));
    CHECK(back.params.degree == 3);
    CHECK(back.lambda == 0.7);
    std::istringstream junk("not a model");
    CHECK_THROWS_AS(load_model(junk), FormatError);
}
