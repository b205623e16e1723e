#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urbanpulse/features.hpp"
#include "urbanpulse/model.hpp"

namespace urbanpulse {

struct MetricsReport {
    double rmse{0.0};
    std::optional<double> mre;  // unset when every target is zero
    std::optional<double> r2;   // unset when the target is constant
    std::size_t n_used{0};
    std::size_t n_skipped_mre{0};
};

/// RMSE = sqrt(mean (y - yhat)^2); MRE = mean |(y - yhat) / y| over y != 0;
/// R^2 = 1 - Var(Y - Yhat) / Var(Y). Throws InputError on length mismatch or
/// fewer than two samples.
MetricsReport metrics(std::span<const double> y, std::span<const double> yhat);
MetricsReport metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat);

/// Contiguous split: the first train_hours rows train, the next test_hours test.
struct SplitSpec {
    std::int64_t train_hours{14 * 24};
    std::int64_t test_hours{7 * 24};

    static SplitSpec from_days(int train_days, int test_days) {
        return {train_days * std::int64_t{24}, test_days * std::int64_t{24}};
    }
};

struct ModelConfig {
    double lambda{1.0};
    KernelParams kernel{};
};

struct AblationRow {
    std::string label;
    std::vector<FeatureGroup> groups;
    MetricsReport train;
    MetricsReport test;
};

/// Rows in fixed order: all, T+W+C, P+T+C, P+W+C, P+W+T.
struct AblationReport {
    std::vector<AblationRow> rows;
};

struct FeatureSubset {
    const char* label;
    std::array<FeatureGroup, 4> groups;
    std::size_t n_groups;
};

/// The five leave-one-group-out feature sets.
std::span<const FeatureSubset> ablation_subsets();

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, std::span<const Eigen::Index> cols);

/// Refits KRR on each subset's training rows and scores train and test rows.
/// Throws InputError when a subset has no columns or the matrix is shorter
/// than the split.
AblationReport ablation(const FeatureMatrix& m, Target target, const SplitSpec& split,
                        const ModelConfig& config);

/// Per-row average over cells of each metric (unset values skipped).
AblationReport mean_report(std::span<const AblationReport> reports);

/// Averages metrics, skipping unset values; n_used and n_skipped_mre are summed.
MetricsReport mean_metrics(std::span<const MetricsReport> reports);

/// CSV `label,r2_train,rmse_test,mre_test,r2_test,rmse_train,mre_train`.
void write_ablation_csv(std::ostream& out, const AblationReport& report);

/// Aligned table with one column per feature set and rows R^2/RMSE/MRE.
void write_ablation_table(std::ostream& out, const AblationReport& report);

/// Formats an optional metric; "NA" when unset.
std::string format_metric(const std::optional<double>& v);

}  // namespace urbanpulse
