#include "urbanpulse/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "urbanpulse/csv.hpp"
#include "urbanpulse/errors.hpp"

namespace urbanpulse {

namespace {

struct KeySpec {
    const char* key;
    const char* fallback;  // nullptr: required
};

constexpr KeySpec kKeys[] = {
    {"data.trips", nullptr},
    {"data.pois", nullptr},
    {"data.tweets", nullptr},
    {"data.weather", nullptr},
    {"data.collisions", nullptr},
    {"grid.origin_lat", nullptr},
    {"grid.origin_lon", nullptr},
    {"grid.cell_size_m", "500"},
    {"grid.n_rows", nullptr},
    {"grid.n_cols", nullptr},
    {"window.start", nullptr},
    {"window.end", nullptr},
    {"window.timezone", "America/New_York"},
    {"features.hashtag_only", "false"},
    {"features.include_raw_weather", "false"},
    {"features.weather_attributes", "WSF2,PRCP,SNOW"},
    {"features.target", "dropoffs"},
    {"model.lambda", "1"},
    {"model.degree", "2"},
    {"model.gamma", "auto"},
    {"model.coef0", "1"},
    {"split.train_days", "14"},
    {"split.test_days", "7"},
    {"thresholds.WSF2", "33"},
    {"thresholds.WSF5", "33"},
    {"thresholds.PRCP", "none"},
    {"thresholds.SNOW", "none"},
    {"decay.alpha", "2"},
    {"decay.horizon_days", "3"},
    {"baseline.p", "24"},
    {"baseline.q", "1"},
    {"output.dir", "out"},
    {"run.threads", "0"},
};

std::string env_name(std::string_view key) {
    std::string out = "URBANPULSE_";
    for (char c : key) {
        out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    }
    return out;
}

double get_double(const std::map<std::string, std::string>& v, const std::string& key) {
    const auto d = csv::parse_double(v.at(key));
    if (!d) throw ConfigError(key + ": expected a number, got '" + v.at(key) + "'");
    return *d;
}

int get_int(const std::map<std::string, std::string>& v, const std::string& key) {
    const auto i = csv::parse_int(v.at(key));
    if (!i || *i < -1000000000 || *i > 1000000000) {
        throw ConfigError(key + ": expected an integer, got '" + v.at(key) + "'");
    }
    return static_cast<int>(*i);
}

bool get_bool(const std::map<std::string, std::string>& v, const std::string& key) {
    std::string s = v.at(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(key + ": expected true or false, got '" + v.at(key) + "'");
}

DayNumber get_date(const std::map<std::string, std::string>& v, const std::string& key) {
    const auto d = parse_date(v.at(key));
    if (!d) throw ConfigError(key + ": expected YYYY-MM-DD, got '" + v.at(key) + "'");
    return *d;
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    const std::filesystem::path path(p);
    return path.is_absolute() ? path : base / path;
}

}  // namespace

EnvLookup process_env() {
    return [](const std::string& name) -> std::optional<std::string> {
        if (const char* v = std::getenv(name.c_str())) return std::string(v);
        return std::nullopt;
    };
}

HourRange PipelineConfig::hours(const TimeZone& tz) const {
    const UtcSeconds t0 = tz.local_midnight(start);
    return {t0, (tz.local_midnight(end) - t0) / kSecondsPerHour};
}

std::string PipelineConfig::hash() const {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [k, v] : values) {
        for (char c : k + "=" + v + "\n") {
            h ^= static_cast<unsigned char>(c);
            h *= 0x100000001b3ULL;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineConfig parse_config(std::istream& in, const std::filesystem::path& base_dir, const EnvLookup& env) {
    std::map<std::string, std::string> raw;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string_view body = csv::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'section.key = value'");
        }
        const std::string key(csv::trim(body.substr(0, eq)));
        const std::string value(csv::trim(body.substr(eq + 1)));
        const bool known = std::any_of(std::begin(kKeys), std::end(kKeys),
                                       [&](const KeySpec& k) { return key == k.key; });
        if (!known) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        raw[key] = value;
    }

    PipelineConfig cfg;
    for (const auto& spec : kKeys) {
        std::optional<std::string> value;
        if (auto it = raw.find(spec.key); it != raw.end()) value = it->second;
        if (auto e = env(env_name(spec.key))) value = *e;
        if (!value && spec.fallback) value = spec.fallback;
        if (!value) throw ConfigError(std::string("missing required key ") + spec.key);
        cfg.values[spec.key] = *value;
    }
    const auto& v = cfg.values;

    cfg.trips = resolve(base_dir, v.at("data.trips"));
    cfg.pois = resolve(base_dir, v.at("data.pois"));
    cfg.tweets = resolve(base_dir, v.at("data.tweets"));
    cfg.weather = resolve(base_dir, v.at("data.weather"));
    cfg.collisions = resolve(base_dir, v.at("data.collisions"));
    cfg.output_dir = resolve(base_dir, v.at("output.dir"));

    cfg.grid = GridSpec(GeoPoint{get_double(v, "grid.origin_lat"), get_double(v, "grid.origin_lon")},
                        get_double(v, "grid.cell_size_m"), get_int(v, "grid.n_rows"), get_int(v, "grid.n_cols"));
    cfg.start = get_date(v, "window.start");
    cfg.end = get_date(v, "window.end");
    if (cfg.end <= cfg.start) throw ConfigError("window.end must be after window.start");
    cfg.timezone = v.at("window.timezone");

    cfg.features.hashtag_only = get_bool(v, "features.hashtag_only");
    cfg.features.include_raw_weather = get_bool(v, "features.include_raw_weather");
    cfg.features.weather_attributes.clear();
    {
        std::stringstream list(v.at("features.weather_attributes"));
        std::string item;
        while (std::getline(list, item, ',')) {
            const auto a = parse_attribute(csv::trim(item));
            if (!a) throw ConfigError("features.weather_attributes: unknown attribute '" + item + "'");
            if (std::find(cfg.features.weather_attributes.begin(), cfg.features.weather_attributes.end(), *a) !=
                cfg.features.weather_attributes.end()) {
                throw ConfigError("features.weather_attributes: duplicate attribute '" + item + "'");
            }
            cfg.features.weather_attributes.push_back(*a);
        }
    }
    const auto target = parse_target(v.at("features.target"));
    if (!target) throw ConfigError("features.target: expected pickups or dropoffs");
    cfg.target = *target;

    cfg.model.lambda = get_double(v, "model.lambda");
    if (!(cfg.model.lambda > 0.0)) throw ConfigError("model.lambda must be > 0");
    cfg.model.kernel.degree = get_int(v, "model.degree");
    if (v.at("model.gamma") != "auto") cfg.model.kernel.gamma = get_double(v, "model.gamma");
    cfg.model.kernel.coef0 = get_double(v, "model.coef0");
    cfg.model.kernel.validate();

    cfg.train_days = get_int(v, "split.train_days");
    cfg.test_days = get_int(v, "split.test_days");
    if (cfg.train_days < 1 || cfg.test_days < 1) throw ConfigError("split.train_days and split.test_days must be >= 1");
    if (cfg.train_days + cfg.test_days > cfg.window_days()) {
        throw ConfigError("split.train_days + split.test_days exceeds the window length");
    }

    for (std::size_t a = 0; a < kWeatherAttributeCount; ++a) {
        const std::string key = "thresholds." + std::string(attribute_label(static_cast<WeatherAttribute>(a)));
        if (v.at(key) == "none") {
            cfg.features.thresholds.absolute[a].reset();
        } else {
            cfg.features.thresholds.absolute[a] = get_double(v, key);
        }
    }
    cfg.features.decay.alpha = get_double(v, "decay.alpha");
    cfg.features.decay.horizon_days = get_double(v, "decay.horizon_days");
    cfg.features.decay.validate();

    cfg.arma_p = get_int(v, "baseline.p");
    cfg.arma_q = get_int(v, "baseline.q");
    if (cfg.arma_p < 0 || cfg.arma_q < 0 || cfg.arma_p + cfg.arma_q == 0) {
        throw ConfigError("baseline.p and baseline.q must be >= 0 and not both 0");
    }
    cfg.threads = get_int(v, "run.threads");
    if (cfg.threads < 0) throw ConfigError("run.threads must be >= 0");
    return cfg;
}

PipelineConfig load_config(const std::filesystem::path& file, const EnvLookup& env) {
    std::ifstream in(file);
    if (!in) throw ConfigError("cannot open config file " + file.string());
    return parse_config(in, file.parent_path(), env);
}

std::vector<std::pair<std::string, std::filesystem::path>> dataset_paths(const PipelineConfig& cfg) {
    return {{"data.trips", cfg.trips},
            {"data.pois", cfg.pois},
            {"data.tweets", cfg.tweets},
            {"data.weather", cfg.weather},
            {"data.collisions", cfg.collisions}};
}

}  // namespace urbanpulse
