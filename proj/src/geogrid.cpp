#include "urbanpulse/geogrid.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "urbanpulse/errors.hpp"

namespace urbanpulse {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

// Relative slack applied before flooring so that corners produced by
// unproject() land back in their own cell despite rounding.
constexpr double kEdgeSlack = 1e-9;

}  // namespace

bool is_valid(const GeoPoint& p) {
    return std::isfinite(p.lat) && std::isfinite(p.lon) && p.lat >= -90.0 && p.lat <= 90.0 &&
           p.lon >= -180.0 && p.lon <= 180.0;
}

void validate(const GeoPoint& p) {
    if (!std::isfinite(p.lat) || !std::isfinite(p.lon)) {
        throw InputError("non-finite coordinate");
    }
    if (p.lat < -90.0 || p.lat > 90.0) throw InputError("lat out of range");
    if (p.lon < -180.0 || p.lon > 180.0) throw InputError("lon out of range");
}

double haversine(const GeoPoint& a, const GeoPoint& b) {
    validate(a);
    validate(b);
    const double phi1 = a.lat * kDegToRad;
    const double phi2 = b.lat * kDegToRad;
    const double dphi = (b.lat - a.lat) * kDegToRad;
    const double dlambda = (b.lon - a.lon) * kDegToRad;
    const double s1 = std::sin(dphi / 2.0);
    const double s2 = std::sin(dlambda / 2.0);
    double h = s1 * s1 + std::cos(phi1) * std::cos(phi2) * s2 * s2;
    h = std::min(1.0, std::max(0.0, h));
    return 2.0 * kEarthRadiusM * std::asin(std::sqrt(h));
}

GridSpec::GridSpec(GeoPoint origin, double cell_size_m, int n_rows, int n_cols)
    : origin_(origin), cell_size_m_(cell_size_m), n_rows_(n_rows), n_cols_(n_cols) {
    validate(origin_);
    if (!(cell_size_m_ > 0.0) || !std::isfinite(cell_size_m_)) {
        throw ConfigError("grid.cell_size_m must be > 0");
    }
    if (n_rows_ < 1 || n_cols_ < 1) throw ConfigError("grid.n_rows and grid.n_cols must be >= 1");
    if (std::abs(origin_.lat) >= 89.0) throw ConfigError("grid origin too close to a pole");
    const GeoPoint ne = unproject({cell_size_m_ * n_cols_, cell_size_m_ * n_rows_}, *this);
    if (!is_valid(ne)) throw ConfigError("grid extends beyond valid lat/lon");
}

LocalXY project(const GeoPoint& p, const GridSpec& grid) {
    const GeoPoint& o = grid.origin();
    return {kEarthRadiusM * (p.lon - o.lon) * kDegToRad * std::cos(o.lat * kDegToRad),
            kEarthRadiusM * (p.lat - o.lat) * kDegToRad};
}

GeoPoint unproject(const LocalXY& xy, const GridSpec& grid) {
    const GeoPoint& o = grid.origin();
    return {o.lat + xy.north_m / kEarthRadiusM / kDegToRad,
            o.lon + xy.east_m / (kEarthRadiusM * std::cos(o.lat * kDegToRad)) / kDegToRad};
}

std::optional<CellId> locate(const GeoPoint& p, const GridSpec& grid) {
    validate(p);
    const LocalXY xy = project(p, grid);
    const double cx = xy.east_m / grid.cell_size_m();
    const double cy = xy.north_m / grid.cell_size_m();
    const double col = std::floor(cx + kEdgeSlack * std::max(1.0, std::abs(cx)));
    const double row = std::floor(cy + kEdgeSlack * std::max(1.0, std::abs(cy)));
    if (col < 0.0 || row < 0.0 || col >= grid.n_cols() || row >= grid.n_rows()) {
        return std::nullopt;
    }
    return CellId{static_cast<int>(row), static_cast<int>(col)};
}

CellBounds cell_bounds(CellId c, const GridSpec& grid) {
    if (!grid.contains(c)) {
        throw BoundsError("cell (" + std::to_string(c.row) + "," + std::to_string(c.col) +
                          ") outside grid");
    }
    const double s = grid.cell_size_m();
    return {unproject({c.col * s, c.row * s}, grid),
            unproject({(c.col + 1) * s, (c.row + 1) * s}, grid)};
}

}  // namespace urbanpulse
