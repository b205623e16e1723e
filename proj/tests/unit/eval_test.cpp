#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "urbanpulse/errors.hpp"
#include "urbanpulse/eval.hpp"

using namespace urbanpulse;

TEST_CASE("metric identities") {
    const std::vector<double> y{3, 7, 1, 9, 4};
    const auto perfect = metrics(y, y);
    CHECK(perfect.rmse == 0.0);
    CHECK(perfect.mre == 0.0);
    CHECK(perfect.r2 == 1.0);

    const double mean = (3 + 7 + 1 + 9 + 4) / 5.0;
    const auto flat = metrics(y, std::vector<double>(5, mean));
    CHECK(flat.r2 == 0.0);
    const auto other = metrics(y, std::vector<double>(5, 42.0));
    CHECK(other.r2 == 0.0);

    const auto hand = metrics(std::vector<double>{1, 2, 3}, std::vector<double>{2, 2, 2});
    CHECK(std::abs(hand.rmse - std::sqrt(2.0 / 3.0)) < 1e-9);
    CHECK(std::abs(hand.rmse - 0.8165) < 1e-4);
    CHECK(std::abs(*hand.mre - (1.0 + 0.0 + 1.0 / 3.0) / 3.0) < 1e-9);
    CHECK(std::abs(*hand.r2) < 1e-9);
    CHECK(hand.n_used == 3);
}

TEST_CASE("variance form of r2") {
    // A constant bias leaves Var(Y - Yhat) untouched, unlike the sum-of-squares form.
    const std::vector<double> y{1, 2, 3, 4};
    const std::vector<double> yhat{11, 12, 13, 14};
    CHECK(metrics(y, yhat).r2 == 1.0);
    const std::vector<double> half{1.5, 2, 3, 3.5};
    const double var_y = 1.25;
    const double var_r = (0.25 + 0 + 0 + 0.25) / 4.0;
    CHECK(*metrics(y, half).r2 == doctest::Approx(1 - var_r / var_y).epsilon(1e-15));
}

TEST_CASE("zero targets and degenerate cases") {
    const auto r = metrics(std::vector<double>{0, 2, 0, 4}, std::vector<double>{1, 1, 1, 1});
    CHECK(r.n_skipped_mre == 2);
    CHECK(*r.mre == doctest::Approx((0.5 + 0.75) / 2).epsilon(1e-15));
    const auto zeros = metrics(std::vector<double>{0, 0, 0}, std::vector<double>{1, 0, 0});
    CHECK_FALSE(zeros.mre.has_value());
    CHECK_FALSE(zeros.r2.has_value());
    CHECK(format_metric(zeros.r2) == "NA");
    CHECK_THROWS_AS(metrics(std::vector<double>{1, 2}, std::vector<double>{1}), InputError);
    CHECK_THROWS_AS(metrics(std::vector<double>{1}, std::vector<double>{1}), InputError);
}

TEST_CASE("metrics are permutation invariant") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> u(0.5, 20);
    std::vector<double> y(60), yhat(60);
    for (std::size_t i = 0; i < y.size(); ++i) {
        y[i] = u(gen);
        yhat[i] = y[i] + u(gen) - 10;
    }
    const auto a = metrics(y, yhat);
    std::vector<std::size_t> idx(60);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::shuffle(idx.begin(), idx.end(), gen);
    std::vector<double> py, pyhat;
    for (auto i : idx) {
        py.push_back(y[i]);
        pyhat.push_back(yhat[i]);
    }
    const auto b = metrics(py, pyhat);
    CHECK(b.rmse == doctest::Approx(a.rmse).epsilon(1e-12));
    CHECK(*b.mre == doctest::Approx(*a.mre).epsilon(1e-12));
    CHECK(*b.r2 == doctest::Approx(*a.r2).epsilon(1e-12));
    CHECK(a.rmse > 0.0);
}

namespace {

FeatureMatrix toy_matrix(std::mt19937_64& gen, Eigen::Index rows) {
    FeatureOptions options;
    FeatureMatrix m;
    for (const auto& [name, group] : feature_columns(options)) {
        m.column_names.push_back(name);
        m.groups.push_back(group);
    }
    std::normal_distribution<double> n(0.0, 1.0);
    m.X = Eigen::MatrixXd::Zero(rows, 15);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const double phase = 2 * M_PI * static_cast<double>(r % 24) / 24.0;
        for (Eigen::Index c = 0; c < 10; ++c) m.X(r, c) = (c + 1) * (1.2 + std::sin(phase + c));
        m.X(r, 14) = std::abs(n(gen));
    }
    m.y_drop = 3.0 * m.X.col(3) + m.X.col(7) + Eigen::VectorXd::NullaryExpr(rows, [&] { return n(gen); });
    m.y_pick = m.y_drop;
    for (Eigen::Index r = 0; r < rows; ++r) m.times.push_back(r * 3600);
    return m;
}

}  // namespace

TEST_CASE("ablation schema and inert groups") {
    std::mt19937_64 gen(9);
    const auto m = toy_matrix(gen, 21 * 24);
    const auto report = ablation(m, Target::dropoffs, SplitSpec{}, ModelConfig{});
    REQUIRE(report.rows.size() == 5);
    const char* labels[] = {"all", "T+W+C", "P+T+C", "P+W+C", "P+W+T"};
    for (std::size_t i = 0; i < 5; ++i) CHECK(report.rows[i].label == labels[i]);
    // Tweets and weather are all zero here: removing them changes nothing.
    for (std::size_t i : {2u, 3u}) {
        CHECK(std::abs(*report.rows[i].test.r2 - *report.rows[0].test.r2) < 1e-9);
        CHECK(std::abs(report.rows[i].test.rmse - report.rows[0].test.rmse) < 1e-9);
        CHECK(std::abs(*report.rows[i].train.r2 - *report.rows[0].train.r2) < 1e-9);
    }
    CHECK(*report.rows[1].test.r2 < *report.rows[0].test.r2 - 0.3);

    std::ostringstream csv, table;
    write_ablation_csv(csv, report);
    write_ablation_table(table, report);
    std::istringstream lines(csv.str());
    std::string line;
    std::getline(lines, line);
    CHECK(line == "label,r2_train,rmse_test,mre_test,r2_test,rmse_train,mre_train");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 5);
    CHECK(table.str().find("P+W+T") != std::string::npos);

    CHECK_THROWS_AS(ablation(m, Target::dropoffs, SplitSpec{400, 200}, ModelConfig{}), InputError);
}

TEST_CASE("report averaging skips undefined values") {
    MetricsReport a{1.0, 0.5, 0.2, 10, 1}, b{3.0, std::nullopt, 0.6, 10, 10};
    const auto m = mean_metrics(std::vector<MetricsReport>{a, b});
    CHECK(m.rmse == 2.0);
    CHECK(*m.mre == 0.5);
    CHECK(*m.r2 == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(m.n_used == 20);
    CHECK(m.n_skipped_mre == 11);
}
