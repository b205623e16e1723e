#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "urbanpulse/errors.hpp"
#include "urbanpulse/features.hpp"
#include "urbanpulse/synth.hpp"

using namespace urbanpulse;
namespace fs = std::filesystem;

namespace {

SynthConfig small_city() {
    SynthConfig cfg;
    cfg.grid = GridSpec({40.70, -74.02}, 500.0, 3, 3);
    cfg.n_days = 7;
    cfg.checkins = 800;
    return cfg;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("rng basics") {
    Rng a(1), b(1), c(2);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        CHECK(x == b.next());
        CHECK(x != c.next());
    }
    Rng r(3);
    double sum = 0.0;
    long psum = 0;
    for (int i = 0; i < 20000; ++i) {
        const double u = r.uniform();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        sum += u;
        psum += r.poisson(4.0);
        CHECK(r.below(7) < 7);
    }
    CHECK(sum / 20000 == doctest::Approx(0.5).epsilon(0.02));
    CHECK(psum / 20000.0 == doctest::Approx(4.0).epsilon(0.03));
    const double w[] = {0.0, 1.0, 0.0};
    CHECK(r.weighted(w) == 1);
}

TEST_CASE("config validation") {
    auto cfg = small_city();
    cfg.n_days = 6;
    CHECK_THROWS_AS(generate_city(cfg), ConfigError);
    cfg = small_city();
    cfg.noise_sd = -1;
    CHECK_THROWS_AS(generate_city(cfg), ConfigError);
    cfg = small_city();
    cfg.event_days = {{2, {5, 5}}};
    CHECK_THROWS_AS(generate_city(cfg), ConfigError);
    cfg = small_city();
    cfg.category_mix.resize(2);
    CHECK_THROWS_AS(generate_city(cfg), ConfigError);
}

TEST_CASE("synthetic popularity profiles") {
    const auto g = synthetic_popularity();
    for (const auto& row : g.g) {
        double s = 0.0;
        for (double v : row) {
            CHECK(v > 0.0);
            s += v;
        }
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    const auto& food = g.g[static_cast<std::size_t>(PoiCategory::food)];
    CHECK(food[12] > food[4]);
    CHECK(food[19] > food[4]);
    const auto& night = g.g[static_cast<std::size_t>(PoiCategory::nightlife)];
    CHECK(night[23] > night[12]);
}

TEST_CASE("noiseless traffic equals the rounded rate") {
    auto cfg = small_city();
    cfg.noise_sd = 0.0;
    const auto b = generate_city(cfg);
    const auto traffic = aggregate_traffic(b.data.trips, cfg.grid, b.range);
    for (std::size_t i = 0; i < cfg.grid.cell_count(); ++i) {
        const CellId cell = cfg.grid.cell_at(i);
        for (std::int64_t h = 0; h < b.range.n_hours; ++h) {
            const auto want = std::llround(b.rate_at(cell, h));
            CHECK(traffic.count(Target::pickups, cell, h) == want);
            CHECK(traffic.count(Target::dropoffs, cell, h) == want);
        }
    }
}

TEST_CASE("rates follow the generating process") {
    auto cfg = small_city();
    cfg.event_days = {{3, {1, 1}}};
    cfg.storm = SynthStorm{1, WeatherAttribute::WSF2, 17.0, 0.5};
    const auto b = generate_city(cfg);
    const auto plain = [&] {
        auto c = cfg;
        c.event_days.clear();
        c.storm.reset();
        return generate_city(c);
    }();
    for (std::int64_t h = 0; h < b.range.n_hours; ++h) {
        const UtcSeconds t = b.range.hour_start(h);
        const auto day = b.tz.local_day(t) - cfg.start_day;
        const int hour = b.tz.local_hour(t);
        for (std::size_t i = 0; i < cfg.grid.cell_count(); ++i) {
            const CellId cell = cfg.grid.cell_at(i);
            double want = plain.rate_at(cell, h);
            if (day >= 1 && day < 4) want *= 1.0 - 0.5 * (1.0 - std::pow((day - 1) / 3.0, 2.0));
            if (day == 3 && cell == CellId{1, 1} && hour >= 18 && hour <= 22) want += cfg.event_rate;
            CHECK(b.rate_at(cell, h) == doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("determinism and seed sensitivity") {
    const auto a = generate_city(small_city());
    const auto b = generate_city(small_city());
    CHECK(a.data == b.data);
    CHECK(a.rate == b.rate);
    auto other = small_city();
    other.seed += 1;
    CHECK_FALSE(generate_city(other).data == a.data);

    const fs::path root = fs::temp_directory_path() / "urbanpulse_synth_test";
    fs::remove_all(root);
    const auto first = write_bundle(a, root / "a");
    const auto second = write_bundle(b, root / "b");
    REQUIRE(first.size() == 6);
    for (std::size_t i = 0; i < first.size(); ++i) CHECK(slurp(first[i]) == slurp(second[i]));
    fs::remove_all(root);
}

TEST_CASE("bundle files round trip through ingest") {
    const auto b = generate_city(small_city());
    Datasets back;
    std::size_t errors = 0;
    auto round = [&](auto write, auto parse, const auto& records, auto& out) {
        std::stringstream io;
        write(io, records);
        auto r = parse(io);
        errors += r.errors.size();
        out = std::move(r.records);
    };
    round(write_trips, parse_trips, b.data.trips, back.trips);
    round(write_pois, parse_pois, b.data.pois, back.pois);
    round(write_tweets, parse_tweets, b.data.tweets, back.tweets);
    round(write_weather, parse_weather, b.data.weather, back.weather);
    round(write_collisions, parse_collisions, b.data.collisions, back.collisions);
    CHECK(errors == 0);
    CHECK(back == b.data);
    CHECK(b.data.trips.size() > 1000);
    CHECK(b.data.pois.size() >= 9);
}

TEST_CASE("storm day is the only extreme day") {
    SynthConfig cfg;
    cfg.grid = GridSpec({40.70, -74.02}, 500.0, 2, 2);
    cfg.storm = SynthStorm{10, WeatherAttribute::WSF2, 17.0, 0.6};
    const auto b = generate_city(cfg);
    const auto ev = detect_extreme_events(b.data.weather, WeatherAttribute::WSF2, EventThresholds{});
    REQUIRE(ev.size() == 1);
    CHECK(ev[0].day == cfg.start_day + 10);
    CHECK(ev[0].magnitude == 17.0);
}

TEST_CASE("check-ins follow the category profiles") {
    SynthConfig cfg;
    cfg.grid = GridSpec({40.70, -74.02}, 500.0, 4, 4);
    cfg.checkins = 20000;
    const auto b = generate_city(cfg);
    const auto m = match_checkins(b.data.tweets, b.data.pois);
    CHECK(m.size() > 19000);
    const auto g = temporal_popularity(b.data.tweets, b.data.pois, m, b.tz);
    std::array<int, kCategoryCount> n{};
    for (const auto& x : m) ++n[static_cast<std::size_t>(b.data.pois[x.poi_index].category)];
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        if (n[c] < 1000) continue;
        double l1 = 0.0;
        for (std::size_t h = 0; h < 24; ++h) l1 += std::abs(g.g[c][h] - b.true_popularity.g[c][h]);
        CHECK(l1 < 0.2);
    }
}

TEST_CASE("oracle edge cases") {
    const TimeZone tz = TimeZone::load("America/New_York");
    const GridSpec grid({40.70, -74.02}, 500.0, 2, 2);
    Datasets empty;
    for (int d = 0; d < 3; ++d) {
        WeatherDay w;
        w.date = days_from_civil(2012, 10, 1) + d;
        w.values = {5.0, 6.0, 0.0, 0.0};
        empty.weather.push_back(w);
    }
    const HourRange range{tz.local_midnight(days_from_civil(2012, 10, 1)), 48};
    const FeatureOracle oracle(empty, grid, tz, range, FeatureOptions{});
    for (double v : oracle.features({1, 1}, range.hour_start(20))) CHECK(v == 0.0);

    const auto b = generate_city(small_city());
    auto doubled = b;
    for (auto& p : doubled.data.pois) p.popularity_z *= 2;
    for (std::size_t i = 0; i < b.config.grid.cell_count(); ++i) {
        const CellId cell = b.config.grid.cell_at(i);
        const UtcSeconds t = b.range.hour_start(40 + static_cast<std::int64_t>(i));
        const auto x = oracle_features(b, cell, t);
        const auto y = oracle_features(doubled, cell, t);
        REQUIRE(x.size() == 15);
        for (std::size_t c = 0; c < 10; ++c) CHECK(y[c] == 2 * x[c]);
        for (std::size_t c = 10; c < 15; ++c) CHECK(y[c] == x[c]);
    }
}
