#pragma once

#include <compare>
#include <cstddef>
#include <optional>

namespace urbanpulse {

inline constexpr double kEarthRadiusM = 6'371'000.0;

struct GeoPoint {
    double lat{0.0};  // degrees, [-90, 90]
    double lon{0.0};  // degrees, [-180, 180]

    friend bool operator==(const GeoPoint&, const GeoPoint&) = default;
};

bool is_valid(const GeoPoint& p);

/// Throws InputError for non-finite or out-of-range coordinates.
void validate(const GeoPoint& p);

/// Great-circle distance in meters on a sphere of radius kEarthRadiusM.
double haversine(const GeoPoint& a, const GeoPoint& b);

struct CellId {
    int row{0};
    int col{0};

    friend auto operator<=>(const CellId&, const CellId&) = default;
};

/// Metric grid anchored at its south-west corner. Cells are square,
/// `cell_size_m` on a side, laid out on a local equirectangular projection.
class GridSpec {
public:
    GridSpec(GeoPoint origin, double cell_size_m, int n_rows, int n_cols);

    const GeoPoint& origin() const { return origin_; }
    double cell_size_m() const { return cell_size_m_; }
    int n_rows() const { return n_rows_; }
    int n_cols() const { return n_cols_; }
    std::size_t cell_count() const { return static_cast<std::size_t>(n_rows_) * n_cols_; }

    bool contains(CellId c) const {
        return c.row >= 0 && c.col >= 0 && c.row < n_rows_ && c.col < n_cols_;
    }

    /// Row-major dense index.
    std::size_t index(CellId c) const { return static_cast<std::size_t>(c.row) * n_cols_ + c.col; }
    CellId cell_at(std::size_t index) const {
        return {static_cast<int>(index / n_cols_), static_cast<int>(index % n_cols_)};
    }

    friend bool operator==(const GridSpec&, const GridSpec&) = default;

private:
    GeoPoint origin_;
    double cell_size_m_;
    int n_rows_;
    int n_cols_;
};

/// Local planar coordinates relative to the grid origin.
struct LocalXY {
    double east_m{0.0};
    double north_m{0.0};
};

LocalXY project(const GeoPoint& p, const GridSpec& grid);
GeoPoint unproject(const LocalXY& xy, const GridSpec& grid);

/// Cell containing p, or nullopt when p is outside the grid. A point on a
/// shared edge belongs to the cell with the larger index.
std::optional<CellId> locate(const GeoPoint& p, const GridSpec& grid);

struct CellBounds {
    GeoPoint sw;
    GeoPoint ne;

    GeoPoint center() const { return {(sw.lat + ne.lat) / 2.0, (sw.lon + ne.lon) / 2.0}; }
};

/// Throws BoundsError when c is not in the grid.
CellBounds cell_bounds(CellId c, const GridSpec& grid);

}  // namespace urbanpulse
