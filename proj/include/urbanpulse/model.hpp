#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>

namespace urbanpulse {

/// Per-column training mean and population standard deviation.
struct StandardizeStats {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;

    /// Columns whose spread is zero (to ~1e-12 relative) divide by 1.
    Eigen::VectorXd divisor() const;
    /// Number of columns with non-zero spread.
    Eigen::Index active_columns() const;
};

/// Throws InputError on an empty matrix.
StandardizeStats standardize_fit(const Eigen::MatrixXd& X);
Eigen::MatrixXd standardize_apply(const StandardizeStats& stats, const Eigen::MatrixXd& X);

/// y = w^T x + w0.
struct LinearModel {
    Eigen::VectorXd w;
    double w0{0.0};
    std::optional<double> lambda;

    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

/// Least squares with an intercept. Throws SingularSystemError when [X 1]
/// is rank-deficient and InputError when there are too few rows.
LinearModel fit_ols(const Eigen::MatrixXd& X, const Eigen::VectorXd& y);

/// Ridge with an unpenalized intercept (features and target centered).
LinearModel fit_ridge(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda);

/// Mean squared error objective J(w) over (X, y) for the given model.
double squared_error_objective(const LinearModel& m, const Eigen::MatrixXd& X,
                               const Eigen::VectorXd& y);

/// Polynomial kernel (gamma <x, x'> + coef0)^degree.
struct KernelParams {
    int degree{2};
    std::optional<double> gamma;  // unset: 1 / (number of non-constant columns)
    double coef0{1.0};

    void validate() const;
};

/// Uses gamma = 1 / dim when params.gamma is unset.
double poly_kernel(const Eigen::VectorXd& x, const Eigen::VectorXd& z, const KernelParams& params);

/// Gram matrix K(i, j) = k(A.row(i), B.row(j)); params.gamma must be set.
Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B,
                              const KernelParams& params);

/// Kernel ridge regression in the dual on standardized inputs.
struct KrrModel {
    StandardizeStats stats;
    KernelParams params;  // gamma always resolved
    double lambda{1.0};
    double y_mean{0.0};
    Eigen::MatrixXd X_train;  // standardized rows
    Eigen::VectorXd dual_alpha;

    Eigen::Index dim() const { return stats.mean.size(); }
    Eigen::VectorXd predict(const Eigen::MatrixXd& X) const;
};

/// Solves (K + lambda I) alpha = y - mean(y) by Cholesky, retrying once with
/// diagonal jitter 1e-8 * trace(K) / n. Throws ConfigError for lambda <= 0
/// and NumericalError (naming the smallest pivot) when both attempts fail.
KrrModel fit_krr(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, double lambda,
                 const KernelParams& params);

Eigen::VectorXd predict(const KrrModel& model, const Eigen::MatrixXd& X);

/// Versioned text format; doubles are written as hex floats so a reload
/// reproduces predictions bit for bit.
void save_model(std::ostream& out, const KrrModel& model);
KrrModel load_model(std::istream& in);

}  // namespace urbanpulse
