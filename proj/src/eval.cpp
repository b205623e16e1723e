#include "urbanpulse/eval.hpp"

#include <cmath>
#include <cstdio>
#include <iomanip>
#include <ostream>

#include "urbanpulse/csv.hpp"
#include "urbanpulse/errors.hpp"

namespace urbanpulse {

namespace {

double population_variance(std::span<const double> v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return acc / static_cast<double>(v.size());
}

bool all_equal(std::span<const double> v) {
    for (double x : v) {
        if (x != v.front()) return false;
    }
    return true;
}

constexpr FeatureSubset kSubsets[] = {
    {"all", {FeatureGroup::P, FeatureGroup::T, FeatureGroup::W, FeatureGroup::C}, 4},
    {"T+W+C", {FeatureGroup::T, FeatureGroup::W, FeatureGroup::C, FeatureGroup::C}, 3},
    {"P+T+C", {FeatureGroup::P, FeatureGroup::T, FeatureGroup::C, FeatureGroup::C}, 3},
    {"P+W+C", {FeatureGroup::P, FeatureGroup::W, FeatureGroup::C, FeatureGroup::C}, 3},
    {"P+W+T", {FeatureGroup::P, FeatureGroup::W, FeatureGroup::T, FeatureGroup::T}, 3},
};

}  // namespace

MetricsReport metrics(std::span<const double> y, std::span<const double> yhat) {
    if (y.size() != yhat.size()) throw InputError("metrics: length mismatch");
    if (y.size() < 2) throw InputError("metrics: need at least two samples");
    const std::size_t n = y.size();
    MetricsReport r;
    r.n_used = n;

    std::vector<double> diff(n);
    double sq = 0.0;
    double rel = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        diff[i] = y[i] - yhat[i];
        sq += diff[i] * diff[i];
        if (y[i] == 0.0) {
            ++r.n_skipped_mre;
        } else {
            rel += std::abs(diff[i] / y[i]);
        }
    }
    r.rmse = std::sqrt(sq / static_cast<double>(n));
    if (r.n_skipped_mre < n) r.mre = rel / static_cast<double>(n - r.n_skipped_mre);

    const double var_y = population_variance(y);
    if (all_equal(y) || !(var_y > 0.0)) return r;
    double var_resid = 0.0;
    if (all_equal(diff)) {
        var_resid = 0.0;
    } else if (all_equal(yhat)) {
        // Variance is shift invariant: Var(Y - c) is Var(Y).
        var_resid = var_y;
    } else {
        var_resid = population_variance(diff);
    }
    r.r2 = 1.0 - var_resid / var_y;
    return r;
}

MetricsReport metrics(const Eigen::VectorXd& y, const Eigen::VectorXd& yhat) {
    return metrics(std::span<const double>(y.data(), static_cast<std::size_t>(y.size())),
                   std::span<const double>(yhat.data(), static_cast<std::size_t>(yhat.size())));
}

std::span<const FeatureSubset> ablation_subsets() { return kSubsets; }

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& X, std::span<const Eigen::Index> cols) {
    Eigen::MatrixXd out(X.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) out.col(static_cast<Eigen::Index>(j)) = X.col(cols[j]);
    return out;
}

AblationReport ablation(const FeatureMatrix& m, Target target, const SplitSpec& split,
                        const ModelConfig& config) {
    if (split.train_hours < 2 || split.test_hours < 2) throw InputError("ablation: split too small");
    if (m.X.rows() < split.train_hours + split.test_hours) {
        throw InputError("ablation: feature matrix shorter than train + test split");
    }
    const Eigen::VectorXd& y = m.y(target);
    const Eigen::Index ntr = split.train_hours;
    const Eigen::Index nte = split.test_hours;
    AblationReport report;
    for (const auto& subset : kSubsets) {
        const std::span<const FeatureGroup> groups(subset.groups.data(), subset.n_groups);
        const auto cols = m.columns_in(groups);
        if (cols.empty()) {
            throw InputError(std::string("ablation: feature set ") + subset.label + " has no columns");
        }
        const Eigen::MatrixXd X = select_columns(m.X, cols);
        const Eigen::MatrixXd Xtr = X.topRows(ntr);
        const Eigen::MatrixXd Xte = X.middleRows(ntr, nte);
        const Eigen::VectorXd ytr = y.head(ntr);
        const Eigen::VectorXd yte = y.segment(ntr, nte);
        const KrrModel model = fit_krr(Xtr, ytr, config.lambda, config.kernel);
        AblationRow row;
        row.label = subset.label;
        row.groups.assign(groups.begin(), groups.end());
        row.train = metrics(ytr, model.predict(Xtr));
        row.test = metrics(yte, model.predict(Xte));
        report.rows.push_back(std::move(row));
    }
    return report;
}

MetricsReport mean_metrics(std::span<const MetricsReport> reports) {
    MetricsReport out;
    double rmse = 0.0, mre = 0.0, r2 = 0.0;
    std::size_t n_mre = 0, n_r2 = 0;
    for (const auto& r : reports) {
        rmse += r.rmse;
        if (r.mre) {
            mre += *r.mre;
            ++n_mre;
        }
        if (r.r2) {
            r2 += *r.r2;
            ++n_r2;
        }
        out.n_used += r.n_used;
        out.n_skipped_mre += r.n_skipped_mre;
    }
    if (!reports.empty()) out.rmse = rmse / static_cast<double>(reports.size());
    if (n_mre > 0) out.mre = mre / static_cast<double>(n_mre);
    if (n_r2 > 0) out.r2 = r2 / static_cast<double>(n_r2);
    return out;
}

AblationReport mean_report(std::span<const AblationReport> reports) {
    AblationReport out;
    if (reports.empty()) return out;
    const std::size_t n_rows = reports.front().rows.size();
    for (std::size_t i = 0; i < n_rows; ++i) {
        std::vector<MetricsReport> train, test;
        for (const auto& rep : reports) {
            train.push_back(rep.rows.at(i).train);
            test.push_back(rep.rows.at(i).test);
        }
        AblationRow row;
        row.label = reports.front().rows[i].label;
        row.groups = reports.front().rows[i].groups;
        row.train = mean_metrics(train);
        row.test = mean_metrics(test);
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string format_metric(const std::optional<double>& v) {
    if (!v) return "NA";
    return csv::format_double(*v);
}

void write_ablation_csv(std::ostream& out, const AblationReport& report) {
    out << "label,r2_train,rmse_test,mre_test,r2_test,rmse_train,mre_train\n";
    for (const auto& row : report.rows) {
        out << row.label << ',' << format_metric(row.train.r2) << ','
            << csv::format_double(row.test.rmse) << ',' << format_metric(row.test.mre) << ','
            << format_metric(row.test.r2) << ',' << csv::format_double(row.train.rmse) << ','
            << format_metric(row.train.mre) << '\n';
    }
}

void write_ablation_table(std::ostream& out, const AblationReport& report) {
    auto cell = [](const std::optional<double>& v) {
        if (!v) return std::string("NA");
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.3f", *v);
        return std::string(buf);
    };
    constexpr int kLabelWidth = 16;
    constexpr int kWidth = 10;
    out << std::left << std::setw(kLabelWidth) << "";
    for (const auto& row : report.rows) out << std::right << std::setw(kWidth) << row.label;
    out << '\n';
    auto line = [&](const char* name, auto get) {
        out << std::left << std::setw(kLabelWidth) << name;
        for (const auto& row : report.rows) out << std::right << std::setw(kWidth) << cell(get(row));
        out << '\n';
    };
    line("R2 (train)", [](const AblationRow& r) { return r.train.r2; });
    line("RMSE (test)", [](const AblationRow& r) { return std::optional<double>(r.test.rmse); });
    line("MRE (test)", [](const AblationRow& r) { return r.test.mre; });
    line("R2 (test)", [](const AblationRow& r) { return r.test.r2; });
    line("RMSE (train)", [](const AblationRow& r) { return std::optional<double>(r.train.rmse); });
    line("MRE (train)", [](const AblationRow& r) { return r.train.mre; });
}

}  // namespace urbanpulse
