#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "urbanpulse/eval.hpp"
#include "urbanpulse/features.hpp"
#include "urbanpulse/geogrid.hpp"
#include "urbanpulse/timeutil.hpp"

namespace urbanpulse {

/// Looks up an environment variable; the default reads the process environment.
using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

EnvLookup process_env();

/// Fully resolved pipeline settings.
///
/// The file format is UTF-8 text with one `section.key = value` per line and
/// `#` comments. Every key can be overridden by an environment variable
/// named `URBANPULSE_` followed by the key upper-cased with `.` replaced by
/// `_` (e.g. `URBANPULSE_MODEL_LAMBDA`).
struct PipelineConfig {
    /// Effective key/value pairs after defaults and overrides.
    std::map<std::string, std::string> values;

    std::filesystem::path trips, pois, tweets, weather, collisions;
    GridSpec grid{GeoPoint{0.0, 0.0}, 500.0, 1, 1};
    DayNumber start{0};
    DayNumber end{0};  // exclusive
    std::string timezone{"America/New_York"};
    FeatureOptions features;
    Target target{Target::dropoffs};
    ModelConfig model;
    int train_days{14};
    int test_days{7};
    int arma_p{24};
    int arma_q{1};
    std::filesystem::path output_dir;
    int threads{0};  // 0: hardware concurrency

    int window_days() const { return static_cast<int>(end - start); }
    SplitSpec split() const { return SplitSpec::from_days(train_days, test_days); }
    HourRange hours(const TimeZone& tz) const;

    /// FNV-1a 64 over the sorted effective `key=value` lines, as 16 hex digits.
    std::string hash() const;
};

/// Parses config text. Relative data and output paths resolve against
/// base_dir. Throws ConfigError naming the offending key or line.
PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir,
                            const EnvLookup& env = process_env());

/// Reads and parses a config file; relative paths resolve against its directory.
PipelineConfig load_config(const std::filesystem::path& file, const EnvLookup& env = process_env());

/// Path of each dataset by config key (`data.trips`, ...).
std::vector<std::pair<std::string, std::filesystem::path>> dataset_paths(const PipelineConfig& cfg);

}  // namespace urbanpulse
