#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "urbanpulse/geogrid.hpp"
#include "urbanpulse/ingest.hpp"
#include "urbanpulse/timeutil.hpp"

namespace urbanpulse {

/// Half-open range of clock hours [t0, t0 + n_hours * 3600).
struct HourRange {
    UtcSeconds t0{0};
    std::int64_t n_hours{0};

    UtcSeconds hour_start(std::int64_t h) const { return t0 + h * kSecondsPerHour; }

    /// Index of the hour containing t (floor semantics), or nullopt outside.
    std::optional<std::int64_t> index_of(UtcSeconds t) const;

    friend bool operator==(const HourRange&, const HourRange&) = default;
};

enum class Target : std::uint8_t { pickups, dropoffs };

std::string_view target_label(Target t);
std::optional<Target> parse_target(std::string_view text);

// ---------------------------------------------------------------- traffic

/// Hourly pick-up and drop-off counts per cell, stored cell-major.
struct TrafficSeries {
    GridSpec grid;
    HourRange range;
    std::vector<std::int32_t> pickups;
    std::vector<std::int32_t> dropoffs;

    std::int32_t count(Target target, CellId cell, std::int64_t hour) const;
};

/// Throws ConfigError when n_hours <= 0. Endpoints outside the grid or the
/// window are dropped independently.
TrafficSeries aggregate_traffic(std::span<const TripRecord> trips, const GridSpec& grid,
                                HourRange range);

// ---------------------------------------------------------------- POIs

/// |LCS(a, b)| / max(|a|, |b|), byte-wise; two empty strings give 1.
double lcs_similarity(std::string_view a, std::string_view b);

/// Lowercases and collapses runs of whitespace to one space, trimmed.
std::string normalize_name(std::string_view name);

/// Venue name of an "I'm at <venue>" check-in post, without a trailing
/// "(city, state)" locality or URL; nullopt for any other post.
std::optional<std::string> checkin_venue(std::string_view text);

inline constexpr double kCheckinRadiusM = 100.0;
inline constexpr double kCheckinNameSimilarity = 0.8;

struct CheckinMatch {
    std::size_t tweet_index{0};
    std::size_t poi_index{0};

    friend bool operator==(const CheckinMatch&, const CheckinMatch&) = default;
};

/// Matches check-in posts to venues within 100 m whose normalized names have
/// similarity strictly above 0.8. The nearest qualifying venue wins, ties go
/// to the lexicographically smaller id. Output is in tweet order.
std::vector<CheckinMatch> match_checkins(std::span<const TweetRecord> tweets,
                                         std::span<const PoiRecord> pois);

/// Per-category share of check-ins by local hour of day.
struct PopularityTable {
    std::array<std::array<double, 24>, kCategoryCount> g{};

    double at(PoiCategory c, int hour) const { return g[static_cast<std::size_t>(c)][hour]; }
};

PopularityTable temporal_popularity(std::span<const TweetRecord> tweets,
                                    std::span<const PoiRecord> pois,
                                    std::span<const CheckinMatch> matches, const TimeZone& tz);

using CategoryVector = std::array<double, kCategoryCount>;

/// Sum of popularity z per (cell, category).
std::vector<CategoryVector> poi_mass(std::span<const PoiRecord> pois, const GridSpec& grid);

/// f_POI(c, d, t) = sum over POIs p in d with category c of p.z * g(c, hour(t)).
std::vector<CategoryVector> poi_feature(std::span<const CategoryVector> mass,
                                        const PopularityTable& g, const TimeZone& tz,
                                        UtcSeconds t);
std::vector<CategoryVector> poi_feature(std::span<const PoiRecord> pois, const PopularityTable& g,
                                        const GridSpec& grid, const TimeZone& tz, UtcSeconds t);

// ---------------------------------------------------------------- tweets

/// Distinct users per (cell, hour), stored cell-major.
struct TweetCounts {
    HourRange range;
    std::size_t n_cells{0};
    std::vector<std::int32_t> counts;

    std::int32_t at(std::size_t cell, std::int64_t hour) const {
        return counts[cell * static_cast<std::size_t>(range.n_hours) + static_cast<std::size_t>(hour)];
    }
};

TweetCounts tweet_counts(std::span<const TweetRecord> tweets, const GridSpec& grid, HourRange range,
                         bool hashtag_only);

/// Distinct users posting in each cell during the hour starting at t.
std::vector<std::int32_t> tweet_feature(std::span<const TweetRecord> tweets, const GridSpec& grid,
                                        UtcSeconds hour_start, bool hashtag_only);

// ---------------------------------------------------------------- weather

struct ExtremeEvent {
    WeatherAttribute attribute{WeatherAttribute::WSF2};
    DayNumber day{0};
    double magnitude{0.0};

    friend bool operator==(const ExtremeEvent&, const ExtremeEvent&) = default;
};

/// Absolute per-attribute event thresholds; a missing entry disables the
/// absolute rule for that attribute.
struct EventThresholds {
    std::array<std::optional<double>, kWeatherAttributeCount> absolute{};

    /// 33 m/s (hurricane category 1 onset) on both wind attributes.
    static EventThresholds standard();
};

/// Inclusive range of calendar days.
struct DayRange {
    DayNumber first{0};
    DayNumber last{0};

    std::int64_t size() const { return last - first + 1; }
    bool contains(DayNumber d) const { return d >= first && d <= last; }
};

/// Days whose value exceeds mean + 3 sd (population sd over present values
/// in `window`), or reaches the absolute threshold. Each such day is its own
/// event. Throws DataError with fewer than two present values.
std::vector<ExtremeEvent> detect_extreme_events(std::span<const WeatherDay> weather,
                                                WeatherAttribute attribute,
                                                const EventThresholds& thresholds,
                                                std::optional<DayRange> window = std::nullopt);

struct DecayParams {
    double alpha{2.0};
    double horizon_days{3.0};

    /// Throws ConfigError unless alpha > 1 and horizon_days > 0.
    void validate() const;
};

/// max{m - lambda (t - t_e)^alpha, 0} with lambda = m / horizon^alpha; zero
/// before the event and from the horizon on.
double decay_impact(const ExtremeEvent& event, double day, const DecayParams& params);

/// Sum of decay impacts of the attribute's events on the given day.
double weather_feature(std::span<const ExtremeEvent> events, WeatherAttribute attribute,
                       DayNumber day, const DecayParams& params);

/// Daily values of one attribute over `days`, missing days carried forward
/// from the most recent earlier observation (0 when none).
std::vector<double> forward_filled(std::span<const WeatherDay> weather, WeatherAttribute attribute,
                                   DayRange days);

// ---------------------------------------------------------------- collisions

/// Per-cell daily table, stored cell-major.
struct DailyCellTable {
    DayRange days;
    std::size_t n_cells{0};
    std::vector<double> values;

    double at(std::size_t cell, DayNumber day) const {
        return values[cell * static_cast<std::size_t>(days.size()) +
                      static_cast<std::size_t>(day - days.first)];
    }
};

/// f(d, day) = sum over collisions in d on that local day of (severity + 1).
DailyCellTable collision_table(std::span<const CollisionRecord> collisions, const GridSpec& grid,
                               const TimeZone& tz, DayRange days);
std::vector<double> collision_feature(std::span<const CollisionRecord> collisions,
                                      const GridSpec& grid, const TimeZone& tz, DayNumber day);

// ---------------------------------------------------------------- assembly

enum class FeatureGroup : std::uint8_t { P, T, W, C };

char group_code(FeatureGroup g);
std::optional<FeatureGroup> parse_group(char code);

struct FeatureOptions {
    bool hashtag_only{false};
    bool include_raw_weather{false};
    std::vector<WeatherAttribute> weather_attributes{WeatherAttribute::WSF2, WeatherAttribute::PRCP,
                                                     WeatherAttribute::SNOW};
    EventThresholds thresholds{EventThresholds::standard()};
    DecayParams decay{};
};

/// Daily weather columns for one attribute over the builder day range.
struct WeatherColumn {
    WeatherAttribute attribute{WeatherAttribute::WSF2};
    DayRange days;
    std::vector<double> values;
    bool raw{false};

    double at(DayNumber day) const { return values[static_cast<std::size_t>(day - days.first)]; }
};

/// Every per-grid table needed to assemble feature matrices for one window.
struct FeatureTables {
    GridSpec grid;
    TimeZone tz;
    HourRange range;
    DayRange days;
    TrafficSeries traffic;
    std::vector<CheckinMatch> matches;
    PopularityTable popularity;
    std::vector<CategoryVector> mass;
    TweetCounts tweets;
    std::vector<ExtremeEvent> events;
    std::vector<WeatherColumn> weather;
    DailyCellTable collisions;
};

/// Local calendar days touched by the hours of `range`.
DayRange days_of(HourRange range, const TimeZone& tz);

FeatureTables build_feature_tables(const Datasets& data, const GridSpec& grid, const TimeZone& tz,
                                   HourRange range, const FeatureOptions& options);

struct FeatureMatrix {
    CellId cell;
    std::vector<UtcSeconds> times;
    Eigen::MatrixXd X;
    std::vector<std::string> column_names;
    std::vector<FeatureGroup> groups;
    Eigen::VectorXd y_pick;
    Eigen::VectorXd y_drop;

    const Eigen::VectorXd& y(Target t) const { return t == Target::pickups ? y_pick : y_drop; }

    /// Column indices whose group is in `keep`.
    std::vector<Eigen::Index> columns_in(std::span<const FeatureGroup> keep) const;
};

/// Column names in fixed order: 10 POI categories, tweet, weather attributes
/// (then raw weather when enabled), collision.
std::vector<std::pair<std::string, FeatureGroup>> feature_columns(const FeatureOptions& options);

/// One row per hour of `rows` (must lie inside the tables' range; InputError
/// otherwise), columns as in feature_columns().
FeatureMatrix assemble_matrix(CellId cell, const FeatureTables& tables, HourRange rows);

/// `cell_row,cell_col,hour_utc,<name:group>...,y`.
void write_feature_csv(std::ostream& out, const FeatureMatrix& m, Target target);

/// Inverse of write_feature_csv; the stored y fills both y_pick and y_drop.
/// Throws FormatError on malformed input.
FeatureMatrix read_feature_csv(std::istream& in);

}  // namespace urbanpulse
