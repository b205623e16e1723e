#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "urbanpulse/features.hpp"
#include "urbanpulse/geogrid.hpp"
#include "urbanpulse/ingest.hpp"
#include "urbanpulse/timeutil.hpp"

namespace urbanpulse {

/// 64-bit counter-free generator (splitmix64 seeding, xoshiro256**) with
/// samplers defined here so bundles are identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    double uniform();  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n);  // [0, n)
    double normal();
    std::int64_t poisson(double mean);
    /// Index drawn with probability proportional to weights (not all zero).
    std::size_t weighted(std::span<const double> weights);

private:
    std::uint64_t s_[4];
};

struct SynthEvent {
    int day_offset{0};  // days after the start day
    CellId cell;
};

struct SynthStorm {
    int day_offset{0};
    WeatherAttribute attribute{WeatherAttribute::WSF2};
    double magnitude{17.0};
    double depth{0.6};  // fractional traffic loss on the storm day
};

struct SynthConfig {
    std::uint64_t seed{20121001};
    GridSpec grid{GeoPoint{40.700, -74.020}, 500.0, 10, 10};
    DayNumber start_day{days_from_civil(2012, 10, 1)};
    int n_days{21};
    std::string timezone{"America/New_York"};

    double pois_per_cell{8.0};
    /// Per-cell category weights; generated from the seed when empty.
    std::vector<CategoryVector> category_mix;
    double mean_rate{10.0};  // average trips per cell-hour
    int checkins{6000};
    int users{4000};
    double background_tweets_per_cell_hour{0.05};
    double hashtag_share{0.3};
    double collisions_per_cell_day{0.2};
    double noise_sd{1.0};

    std::vector<SynthEvent> event_days;
    double event_rate{40.0};   // extra trips per event hour
    int event_users{25};       // distinct #event posters per event hour
    std::optional<SynthStorm> storm;
    DecayParams storm_decay{};

    /// Throws ConfigError on an invalid configuration.
    void validate() const;

    HourRange hours(const TimeZone& tz) const;
};

struct SyntheticBundle {
    SynthConfig config;
    TimeZone tz;
    HourRange range;
    Datasets data;
    /// Generating hourly rate per (cell, hour), cell-major.
    std::vector<double> rate;
    /// Generating hour-of-day profile per category.
    PopularityTable true_popularity;

    double rate_at(CellId cell, std::int64_t hour) const {
        return rate[config.grid.index(cell) * static_cast<std::size_t>(range.n_hours) +
                    static_cast<std::size_t>(hour)];
    }
};

/// Hour-of-day profile family used by the generator (normalized per category).
PopularityTable synthetic_popularity();

SyntheticBundle generate_city(const SynthConfig& config);

/// Writes trips.csv, pois.csv, tweets.csv, weather.csv, collisions.csv and
/// ground_truth.csv (`cell_row,cell_col,hour_utc,rate`) into dir; returns the
/// paths written.
std::vector<std::filesystem::path> write_bundle(const SyntheticBundle& bundle,
                                                const std::filesystem::path& dir);

/// Reference feature computation by exhaustive loops over the raw records.
///
/// Shares no aggregation code with the features module: matching scans every
/// venue, popularity and event statistics are recounted from scratch, and
/// each cell-hour value is a fresh pass over the record lists. Only the
/// scalar primitives (haversine, locate, lcs_similarity, name normalization,
/// the check-in prefix rule, and time-zone arithmetic) are reused. Each
/// record's cell is located once up front; every cell-hour still scans all
/// records.
class FeatureOracle {
public:
    FeatureOracle(const Datasets& data, const GridSpec& grid, const TimeZone& tz, HourRange range,
                  const FeatureOptions& options);

    /// Feature vector for the hour starting at hour_start, in
    /// feature_columns(options) order.
    std::vector<double> features(CellId cell, UtcSeconds hour_start) const;

    const PopularityTable& popularity() const { return g_; }

private:
    const Datasets& data_;
    GridSpec grid_;
    TimeZone tz_;
    FeatureOptions options_;
    PopularityTable g_;
    // Per configured attribute: (day, magnitude) of each extreme day.
    std::vector<std::vector<std::pair<DayNumber, double>>> events_;
    // Per-record cell (nullopt outside) and collision local day, computed once.
    std::vector<std::optional<CellId>> poi_cell_, tweet_cell_, collision_cell_;
    std::vector<DayNumber> collision_day_;
};

/// Convenience single-shot oracle over the bundle's own window and default options.
std::vector<double> oracle_features(const SyntheticBundle& bundle, CellId cell,
                                    UtcSeconds hour_start,
                                    const FeatureOptions& options = FeatureOptions{});

}  // namespace urbanpulse
