#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "urbanpulse/errors.hpp"
#include "urbanpulse/geogrid.hpp"

using namespace urbanpulse;

namespace {

constexpr double kR = 6371000.0;

GeoPoint offset(GeoPoint origin, double east_m, double north_m) {
    const double deg = 180.0 / std::numbers::pi;
    return {origin.lat + north_m / kR * deg,
            origin.lon + east_m / (kR * std::cos(origin.lat / deg)) * deg};
}

}  // namespace

TEST_CASE("haversine reference distances") {
    CHECK(haversine({40.758, -73.985}, {40.758, -73.985}) == 0.0);
    CHECK(std::abs(haversine({0, 0}, {1, 0}) - 2 * std::numbers::pi * kR / 360) < 1e-6);
    CHECK(std::abs(haversine({0, 0}, {1, 0}) - 111194.93) < 0.01);
    CHECK(std::abs(haversine({0, 0}, {0, 180}) - 20015086.8) < 0.1);
    CHECK(std::abs(haversine({0, 0}, {0, 180}) - std::numbers::pi * kR) < 1e-6);
}

TEST_CASE("haversine rejects bad coordinates") {
    CHECK_THROWS_AS(haversine({NAN, 0}, {0, 0}), InputError);
    CHECK_THROWS_AS(haversine({0, 0}, {91, 0}), InputError);
    CHECK_THROWS_AS(haversine({0, 181}, {0, 0}), InputError);
}

TEST_CASE("haversine metric properties on random triples") {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> lat(-90, 90), lon(-180, 180);
    for (int i = 0; i < 2000; ++i) {
        const GeoPoint a{lat(gen), lon(gen)}, b{lat(gen), lon(gen)}, c{lat(gen), lon(gen)};
        const double ab = haversine(a, b), ba = haversine(b, a);
        CHECK(ab >= 0.0);
        CHECK(ab == ba);
        CHECK(haversine(a, c) <= ab + haversine(b, c) + 1e-6);
    }
}

TEST_CASE("locate follows the projection") {
    const GeoPoint origin{40.70, -74.02};
    const GridSpec grid(origin, 500.0, 10, 10);
    CHECK(locate(origin, grid) == CellId{0, 0});

    const GeoPoint p = offset(origin, 600, 300);
    CHECK(locate(p, grid) == CellId{0, 1});
    const double d = haversine(origin, p);
    CHECK(std::abs(d - std::hypot(600.0, 300.0)) / std::hypot(600.0, 300.0) < 0.002);

    CHECK_FALSE(locate(offset(origin, 0, -100), grid).has_value());
    CHECK_FALSE(locate(offset(origin, -100, 0), grid).has_value());
    CHECK_FALSE(locate(offset(origin, 5001, 10), grid).has_value());
    CHECK(locate(offset(origin, 4999, 4999), grid) == CellId{9, 9});
}

TEST_CASE("shared edges belong to the larger index") {
    const GridSpec grid({40.70, -74.02}, 500.0, 4, 4);
    const GeoPoint edge = unproject({1000.0, 500.0}, grid);
    CHECK(locate(edge, grid) == CellId{1, 2});
}

TEST_CASE("cell bounds round trip") {
    const GridSpec grid({40.70, -74.02}, 500.0, 4, 4);
    CHECK(cell_bounds({0, 0}, grid).sw == grid.origin());
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            const auto b = cell_bounds({r, c}, grid);
            CHECK(locate(b.center(), grid) == CellId{r, c});
            CHECK(locate(b.sw, grid) == CellId{r, c});
        }
    }
    const auto b = cell_bounds({0, 0}, grid);
    const GeoPoint se{b.sw.lat, b.ne.lon};
    CHECK(std::abs(haversine(b.sw, se) - 500.0) < 1.0);
    CHECK_THROWS_AS(cell_bounds({4, 0}, grid), BoundsError);
    CHECK_THROWS_AS(cell_bounds({0, -1}, grid), BoundsError);
}

TEST_CASE("locate is total on random points") {
    const GridSpec grid({40.70, -74.02}, 500.0, 6, 8);
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> lat(40.68, 40.76), lon(-74.04, -73.95);
    for (int i = 0; i < 5000; ++i) {
        const GeoPoint p{lat(gen), lon(gen)};
        const auto cell = locate(p, grid);
        if (!cell) continue;
        REQUIRE(grid.contains(*cell));
        const auto b = cell_bounds(*cell, grid);
        CHECK(p.lat >= b.sw.lat - 1e-12);
        CHECK(p.lat <= b.ne.lat + 1e-12);
        CHECK(p.lon >= b.sw.lon - 1e-12);
        CHECK(p.lon <= b.ne.lon + 1e-12);
    }
}

TEST_CASE("grid spec validation") {
    CHECK_THROWS_AS(GridSpec({40.7, -74.0}, 0.0, 1, 1), ConfigError);
    CHECK_THROWS_AS(GridSpec({40.7, -74.0}, 500.0, 0, 1), ConfigError);
    CHECK_THROWS_AS(GridSpec({89.99, 0.0}, 500.0, 1, 1), ConfigError);
    const GridSpec g({40.7, -74.0}, 500.0, 3, 5);
    CHECK(g.cell_count() == 15);
    for (std::size_t i = 0; i < g.cell_count(); ++i) CHECK(g.index(g.cell_at(i)) == i);
}
