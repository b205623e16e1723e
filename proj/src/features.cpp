#include "urbanpulse/features.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <unordered_map>

#include "urbanpulse/csv.hpp"
#include "urbanpulse/errors.hpp"

namespace urbanpulse {

std::optional<std::int64_t> HourRange::index_of(UtcSeconds t) const {
    if (t < t0) return std::nullopt;
    const std::int64_t h = (t - t0) / kSecondsPerHour;
    if (h >= n_hours) return std::nullopt;
    return h;
}

std::string_view target_label(Target t) { return t == Target::pickups ? "pickups" : "dropoffs"; }

std::optional<Target> parse_target(std::string_view text) {
    const auto s = csv::trim(text);
    if (s == "pickups" || s == "pickup") return Target::pickups;
    if (s == "dropoffs" || s == "dropoff") return Target::dropoffs;
    return std::nullopt;
}

// ---------------------------------------------------------------- traffic

std::int32_t TrafficSeries::count(Target target, CellId cell, std::int64_t hour) const {
    const auto& v = target == Target::pickups ? pickups : dropoffs;
    return v[grid.index(cell) * static_cast<std::size_t>(range.n_hours) +
             static_cast<std::size_t>(hour)];
}

TrafficSeries aggregate_traffic(std::span<const TripRecord> trips, const GridSpec& grid,
                                HourRange range) {
    if (range.n_hours <= 0) throw ConfigError("n_hours must be > 0");
    const auto n_hours = static_cast<std::size_t>(range.n_hours);
    TrafficSeries series{grid, range, std::vector<std::int32_t>(grid.cell_count() * n_hours, 0),
                         std::vector<std::int32_t>(grid.cell_count() * n_hours, 0)};
    auto bump = [&](std::vector<std::int32_t>& counts, const GeoPoint& p, UtcSeconds t) {
        const auto h = range.index_of(t);
        if (!h) return;
        const auto cell = locate(p, grid);
        if (!cell) return;
        ++counts[grid.index(*cell) * n_hours + static_cast<std::size_t>(*h)];
    };
    for (const auto& trip : trips) {
        bump(series.pickups, trip.pickup, trip.pickup_time);
        bump(series.dropoffs, trip.dropoff, trip.dropoff_time);
    }
    return series;
}

// ---------------------------------------------------------------- POIs

double lcs_similarity(std::string_view a, std::string_view b) {
    if (a.empty() && b.empty()) return 1.0;
    if (a.empty() || b.empty()) return 0.0;
    // Single-row DP over the shorter string.
    if (b.size() > a.size()) std::swap(a, b);
    std::vector<std::size_t> row(b.size() + 1, 0);
    for (char ca : a) {
        std::size_t diag = 0;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t up = row[j];
            row[j] = (ca == b[j - 1]) ? diag + 1 : std::max(row[j], row[j - 1]);
            diag = up;
        }
    }
    return static_cast<double>(row[b.size()]) / static_cast<double>(a.size());
}

std::string normalize_name(std::string_view name) {
    std::string out;
    out.reserve(name.size());
    bool pending_space = false;
    for (unsigned char c : name) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += static_cast<char>(std::tolower(c));
    }
    return out;
}

std::optional<std::string> checkin_venue(std::string_view text) {
    text = csv::trim(text);
    static constexpr std::string_view kPrefixes[] = {"i'm at ", "i\xE2\x80\x99m at "};
    std::string_view rest;
    bool found = false;
    for (auto prefix : kPrefixes) {
        if (text.size() < prefix.size()) continue;
        bool same = true;
        for (std::size_t i = 0; i < prefix.size() && same; ++i) {
            same = std::tolower(static_cast<unsigned char>(text[i])) ==
                   static_cast<unsigned char>(prefix[i]);
        }
        if (same) {
            rest = text.substr(prefix.size());
            found = true;
            break;
        }
    }
    if (!found) return std::nullopt;
    for (std::string_view cut : {" http://", " https://", " w/ "}) {
        if (const auto pos = rest.find(cut); pos != std::string_view::npos) rest = rest.substr(0, pos);
    }
    rest = csv::trim(rest);
    if (!rest.empty() && rest.back() == ')') {
        if (const auto pos = rest.rfind(" ("); pos != std::string_view::npos) rest = rest.substr(0, pos);
    }
    rest = csv::trim(rest);
    if (rest.empty()) return std::nullopt;
    return std::string(rest);
}

namespace {

// Buckets points on a lat/lon lattice whose spacing is at least the search
// radius everywhere in the data, so a 3x3 neighbourhood covers every hit.
class RadiusIndex {
public:
    RadiusIndex(std::span<const PoiRecord> pois, double radius_m) {
        double max_abs_lat = 0.0;
        for (const auto& p : pois) max_abs_lat = std::max(max_abs_lat, std::abs(p.location.lat));
        max_abs_lat = std::min(max_abs_lat + 0.01, 89.9);
        dlat_ = radius_m / kEarthRadiusM * 180.0 / std::numbers::pi * 1.01;
        dlon_ = std::min(360.0, dlat_ / std::cos(max_abs_lat * std::numbers::pi / 180.0));
        for (std::size_t i = 0; i < pois.size(); ++i) buckets_[key(pois[i].location)].push_back(i);
    }

    template <class F>
    void for_each_near(const GeoPoint& p, F&& f) const {
        const auto [r, c] = cell(p);
        for (std::int64_t dr = -1; dr <= 1; ++dr) {
            for (std::int64_t dc = -1; dc <= 1; ++dc) {
                const auto it = buckets_.find(pack(r + dr, c + dc));
                if (it == buckets_.end()) continue;
                for (std::size_t i : it->second) f(i);
            }
        }
    }

private:
    std::pair<std::int64_t, std::int64_t> cell(const GeoPoint& p) const {
        return {static_cast<std::int64_t>(std::floor(p.lat / dlat_)),
                static_cast<std::int64_t>(std::floor(p.lon / dlon_))};
    }
    static std::int64_t pack(std::int64_t r, std::int64_t c) { return (r << 32) ^ (c & 0xffffffff); }
    std::int64_t key(const GeoPoint& p) const {
        const auto [r, c] = cell(p);
        return pack(r, c);
    }

    double dlat_{1.0};
    double dlon_{1.0};
    std::unordered_map<std::int64_t, std::vector<std::size_t>> buckets_;
};

}  // namespace

std::vector<CheckinMatch> match_checkins(std::span<const TweetRecord> tweets,
                                         std::span<const PoiRecord> pois) {
    std::vector<CheckinMatch> matches;
    if (pois.empty()) return matches;
    std::vector<std::string> names;
    names.reserve(pois.size());
    for (const auto& p : pois) names.push_back(normalize_name(p.name));
    const RadiusIndex index(pois, kCheckinRadiusM);

    for (std::size_t t = 0; t < tweets.size(); ++t) {
        const auto venue = checkin_venue(tweets[t].text);
        if (!venue) continue;
        const std::string wanted = normalize_name(*venue);
        std::optional<std::size_t> best;
        double best_d = 0.0;
        index.for_each_near(tweets[t].location, [&](std::size_t i) {
            const double d = haversine(tweets[t].location, pois[i].location);
            if (d > kCheckinRadiusM) return;
            if (!(lcs_similarity(wanted, names[i]) > kCheckinNameSimilarity)) return;
            if (!best || d < best_d || (d == best_d && pois[i].id < pois[*best].id)) {
                best = i;
                best_d = d;
            }
        });
        if (best) matches.push_back({t, *best});
    }
    return matches;
}

PopularityTable temporal_popularity(std::span<const TweetRecord> tweets,
                                    std::span<const PoiRecord> pois,
                                    std::span<const CheckinMatch> matches, const TimeZone& tz) {
    std::array<std::array<std::int64_t, 24>, kCategoryCount> counts{};
    for (const auto& m : matches) {
        const auto c = static_cast<std::size_t>(pois[m.poi_index].category);
        ++counts[c][static_cast<std::size_t>(tz.local_hour(tweets[m.tweet_index].time))];
    }
    PopularityTable table;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        std::int64_t total = 0;
        for (auto n : counts[c]) total += n;
        if (total == 0) continue;
        for (std::size_t h = 0; h < 24; ++h) {
            table.g[c][h] = static_cast<double>(counts[c][h]) / static_cast<double>(total);
        }
    }
    return table;
}

std::vector<CategoryVector> poi_mass(std::span<const PoiRecord> pois, const GridSpec& grid) {
    std::vector<CategoryVector> mass(grid.cell_count(), CategoryVector{});
    for (const auto& p : pois) {
        if (const auto cell = locate(p.location, grid)) {
            mass[grid.index(*cell)][static_cast<std::size_t>(p.category)] +=
                static_cast<double>(p.popularity_z);
        }
    }
    return mass;
}

std::vector<CategoryVector> poi_feature(std::span<const CategoryVector> mass,
                                        const PopularityTable& g, const TimeZone& tz,
                                        UtcSeconds t) {
    const auto hour = static_cast<std::size_t>(tz.local_hour(t));
    std::vector<CategoryVector> out(mass.size());
    for (std::size_t d = 0; d < mass.size(); ++d) {
        for (std::size_t c = 0; c < kCategoryCount; ++c) out[d][c] = mass[d][c] * g.g[c][hour];
    }
    return out;
}

std::vector<CategoryVector> poi_feature(std::span<const PoiRecord> pois, const PopularityTable& g,
                                        const GridSpec& grid, const TimeZone& tz, UtcSeconds t) {
    const auto mass = poi_mass(pois, grid);
    return poi_feature(mass, g, tz, t);
}

// ---------------------------------------------------------------- tweets

TweetCounts tweet_counts(std::span<const TweetRecord> tweets, const GridSpec& grid, HourRange range,
                         bool hashtag_only) {
    if (range.n_hours <= 0) throw ConfigError("n_hours must be > 0");
    const auto n_hours = static_cast<std::size_t>(range.n_hours);
    TweetCounts out{range, grid.cell_count(), std::vector<std::int32_t>(grid.cell_count() * n_hours, 0)};
    std::vector<std::pair<std::size_t, std::string_view>> keyed;
    keyed.reserve(tweets.size());
    for (const auto& tw : tweets) {
        if (hashtag_only && tw.text.find('#') == std::string::npos) continue;
        const auto h = range.index_of(tw.time);
        if (!h) continue;
        const auto cell = locate(tw.location, grid);
        if (!cell) continue;
        keyed.emplace_back(grid.index(*cell) * n_hours + static_cast<std::size_t>(*h), tw.user_id);
    }
    std::sort(keyed.begin(), keyed.end());
    keyed.erase(std::unique(keyed.begin(), keyed.end()), keyed.end());
    for (const auto& [slot, user] : keyed) ++out.counts[slot];
    return out;
}

std::vector<std::int32_t> tweet_feature(std::span<const TweetRecord> tweets, const GridSpec& grid,
                                        UtcSeconds hour_start, bool hashtag_only) {
    return tweet_counts(tweets, grid, HourRange{hour_start, 1}, hashtag_only).counts;
}

// ---------------------------------------------------------------- weather

EventThresholds EventThresholds::standard() {
    EventThresholds t;
    t.absolute[static_cast<std::size_t>(WeatherAttribute::WSF2)] = 33.0;
    t.absolute[static_cast<std::size_t>(WeatherAttribute::WSF5)] = 33.0;
    return t;
}

std::vector<ExtremeEvent> detect_extreme_events(std::span<const WeatherDay> weather,
                                                WeatherAttribute attribute,
                                                const EventThresholds& thresholds,
                                                std::optional<DayRange> window) {
    std::vector<std::pair<DayNumber, double>> present;
    for (const auto& day : weather) {
        if (window && !window->contains(day.date)) continue;
        if (const auto& v = day.value(attribute)) present.emplace_back(day.date, *v);
    }
    if (present.size() < 2) {
        throw DataError("extreme-event detection for " + std::string(attribute_label(attribute)) +
                        " needs at least two observed days, got " + std::to_string(present.size()));
    }
    double mean = 0.0;
    for (const auto& [d, v] : present) mean += v;
    mean /= static_cast<double>(present.size());
    double var = 0.0;
    for (const auto& [d, v] : present) var += (v - mean) * (v - mean);
    var /= static_cast<double>(present.size());
    const double cutoff = mean + 3.0 * std::sqrt(var);
    const auto& absolute = thresholds.absolute[static_cast<std::size_t>(attribute)];

    std::vector<ExtremeEvent> events;
    for (const auto& [d, v] : present) {
        const bool extreme = v > cutoff || (absolute && v >= *absolute);
        if (extreme && v > 0.0) events.push_back({attribute, d, v});
    }
    std::sort(events.begin(), events.end(),
              [](const ExtremeEvent& a, const ExtremeEvent& b) { return a.day < b.day; });
    return events;
}

void DecayParams::validate() const {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) throw ConfigError("decay.alpha must be > 1");
    if (!(horizon_days > 0.0) || !std::isfinite(horizon_days)) {
        throw ConfigError("decay.horizon_days must be > 0");
    }
}

double decay_impact(const ExtremeEvent& event, double day, const DecayParams& params) {
    params.validate();
    const double lag = day - static_cast<double>(event.day);
    if (lag < 0.0 || lag >= params.horizon_days) return 0.0;
    const double lambda = event.magnitude / std::pow(params.horizon_days, params.alpha);
    return std::max(event.magnitude - lambda * std::pow(lag, params.alpha), 0.0);
}

double weather_feature(std::span<const ExtremeEvent> events, WeatherAttribute attribute,
                       DayNumber day, const DecayParams& params) {
    double sum = 0.0;
    for (const auto& e : events) {
        if (e.attribute == attribute) sum += decay_impact(e, static_cast<double>(day), params);
    }
    return sum;
}

std::vector<double> forward_filled(std::span<const WeatherDay> weather, WeatherAttribute attribute,
                                   DayRange days) {
    std::map<DayNumber, double> observed;
    for (const auto& d : weather) {
        if (const auto& v = d.value(attribute)) observed[d.date] = *v;
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(days.size()));
    for (DayNumber d = days.first; d <= days.last; ++d) {
        auto it = observed.upper_bound(d);
        out.push_back(it == observed.begin() ? 0.0 : std::prev(it)->second);
    }
    return out;
}

// ---------------------------------------------------------------- collisions

DailyCellTable collision_table(std::span<const CollisionRecord> collisions, const GridSpec& grid,
                               const TimeZone& tz, DayRange days) {
    const auto n_days = static_cast<std::size_t>(days.size());
    DailyCellTable table{days, grid.cell_count(), std::vector<double>(grid.cell_count() * n_days, 0.0)};
    for (const auto& r : collisions) {
        const DayNumber day = tz.local_day(r.time);
        if (!days.contains(day)) continue;
        const auto cell = locate(r.location, grid);
        if (!cell) continue;
        table.values[grid.index(*cell) * n_days + static_cast<std::size_t>(day - days.first)] +=
            static_cast<double>(r.severity() + 1);
    }
    return table;
}

std::vector<double> collision_feature(std::span<const CollisionRecord> collisions,
                                      const GridSpec& grid, const TimeZone& tz, DayNumber day) {
    return collision_table(collisions, grid, tz, DayRange{day, day}).values;
}

// ---------------------------------------------------------------- assembly

char group_code(FeatureGroup g) {
    switch (g) {
        case FeatureGroup::P: return 'P';
        case FeatureGroup::T: return 'T';
        case FeatureGroup::W: return 'W';
        case FeatureGroup::C: return 'C';
    }
    return '?';
}

std::optional<FeatureGroup> parse_group(char code) {
    switch (code) {
        case 'P': return FeatureGroup::P;
        case 'T': return FeatureGroup::T;
        case 'W': return FeatureGroup::W;
        case 'C': return FeatureGroup::C;
        default: return std::nullopt;
    }
}

std::vector<Eigen::Index> FeatureMatrix::columns_in(std::span<const FeatureGroup> keep) const {
    std::vector<Eigen::Index> cols;
    for (std::size_t j = 0; j < groups.size(); ++j) {
        if (std::find(keep.begin(), keep.end(), groups[j]) != keep.end()) {
            cols.push_back(static_cast<Eigen::Index>(j));
        }
    }
    return cols;
}

namespace {

std::vector<std::pair<std::string, FeatureGroup>> columns_for(
    std::span<const WeatherColumn> weather) {
    std::vector<std::pair<std::string, FeatureGroup>> cols;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        cols.emplace_back("poi_" + std::string(category_label(static_cast<PoiCategory>(c))),
                          FeatureGroup::P);
    }
    cols.emplace_back("tweet", FeatureGroup::T);
    for (const auto& w : weather) {
        cols.emplace_back((w.raw ? "weather_raw_" : "weather_") + std::string(attribute_label(w.attribute)),
                          FeatureGroup::W);
    }
    cols.emplace_back("collision", FeatureGroup::C);
    return cols;
}

std::vector<WeatherColumn> placeholder_columns(const FeatureOptions& options) {
    std::vector<WeatherColumn> cols;
    for (auto a : options.weather_attributes) cols.push_back({a, {}, {}, false});
    if (options.include_raw_weather) {
        for (auto a : options.weather_attributes) cols.push_back({a, {}, {}, true});
    }
    return cols;
}

}  // namespace

std::vector<std::pair<std::string, FeatureGroup>> feature_columns(const FeatureOptions& options) {
    return columns_for(placeholder_columns(options));
}

DayRange days_of(HourRange range, const TimeZone& tz) {
    if (range.n_hours <= 0) throw ConfigError("n_hours must be > 0");
    return {tz.local_day(range.t0), tz.local_day(range.hour_start(range.n_hours - 1))};
}

FeatureTables build_feature_tables(const Datasets& data, const GridSpec& grid, const TimeZone& tz,
                                   HourRange range, const FeatureOptions& options) {
    options.decay.validate();
    if (options.weather_attributes.empty()) throw ConfigError("at least one weather attribute is required");
    const DayRange days = days_of(range, tz);
    FeatureTables tables{grid,
                         tz,
                         range,
                         days,
                         aggregate_traffic(data.trips, grid, range),
                         match_checkins(data.tweets, data.pois),
                         {},
                         poi_mass(data.pois, grid),
                         tweet_counts(data.tweets, grid, range, options.hashtag_only),
                         {},
                         {},
                         collision_table(data.collisions, grid, tz, days)};
    tables.popularity = temporal_popularity(data.tweets, data.pois, tables.matches, tz);

    for (auto attribute : options.weather_attributes) {
        auto events = detect_extreme_events(data.weather, attribute, options.thresholds, days);
        WeatherColumn col{attribute, days, {}, false};
        for (DayNumber d = days.first; d <= days.last; ++d) {
            col.values.push_back(weather_feature(events, attribute, d, options.decay));
        }
        tables.weather.push_back(std::move(col));
        tables.events.insert(tables.events.end(), events.begin(), events.end());
    }
    if (options.include_raw_weather) {
        for (auto attribute : options.weather_attributes) {
            tables.weather.push_back({attribute, days, forward_filled(data.weather, attribute, days), true});
        }
    }
    return tables;
}

FeatureMatrix assemble_matrix(CellId cell, const FeatureTables& tables, HourRange rows) {
    const HourRange& full = tables.range;
    if (!tables.grid.contains(cell)) throw BoundsError("cell outside grid");
    if (tables.traffic.range != full || tables.tweets.range != full) {
        throw InputError("range mismatch between feature builders");
    }
    if (rows.n_hours <= 0 || rows.t0 < full.t0 || (rows.t0 - full.t0) % kSecondsPerHour != 0 ||
        rows.hour_start(rows.n_hours) > full.hour_start(full.n_hours)) {
        throw InputError("row range mismatch: requested hours fall outside the feature window");
    }
    const DayRange row_days = days_of(rows, tables.tz);
    auto covers = [&](const DayRange& d) {
        return d.first <= row_days.first && d.last >= row_days.last;
    };
    if (!covers(tables.collisions.days)) throw InputError("range mismatch: collision table");
    for (const auto& w : tables.weather) {
        if (!covers(w.days)) throw InputError("range mismatch: weather table");
    }

    const auto cols = columns_for(tables.weather);
    const auto n = static_cast<Eigen::Index>(rows.n_hours);
    const auto d = static_cast<Eigen::Index>(cols.size());
    FeatureMatrix m;
    m.cell = cell;
    m.X = Eigen::MatrixXd::Zero(n, d);
    m.y_pick.resize(n);
    m.y_drop.resize(n);
    for (const auto& [name, group] : cols) {
        m.column_names.push_back(name);
        m.groups.push_back(group);
    }

    const std::size_t ci = tables.grid.index(cell);
    const std::int64_t offset = (rows.t0 - full.t0) / kSecondsPerHour;
    const CategoryVector& mass = tables.mass[ci];
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::int64_t h = offset + r;
        const UtcSeconds t = full.hour_start(h);
        m.times.push_back(t);
        const auto hour = static_cast<std::size_t>(tables.tz.local_hour(t));
        const DayNumber day = tables.tz.local_day(t);
        Eigen::Index j = 0;
        for (std::size_t c = 0; c < kCategoryCount; ++c) {
            m.X(r, j++) = mass[c] * tables.popularity.g[c][hour];
        }
        m.X(r, j++) = tables.tweets.at(ci, h);
        for (const auto& w : tables.weather) m.X(r, j++) = w.at(day);
        m.X(r, j++) = tables.collisions.at(ci, day);
        m.y_pick(r) = tables.traffic.count(Target::pickups, cell, h);
        m.y_drop(r) = tables.traffic.count(Target::dropoffs, cell, h);
    }
    return m;
}

void write_feature_csv(std::ostream& out, const FeatureMatrix& m, Target target) {
    out << "cell_row,cell_col,hour_utc";
    for (std::size_t j = 0; j < m.column_names.size(); ++j) {
        out << ',' << m.column_names[j] << ':' << group_code(m.groups[j]);
    }
    out << ",y\n";
    const Eigen::VectorXd& y = m.y(target);
    for (Eigen::Index r = 0; r < m.X.rows(); ++r) {
        out << m.cell.row << ',' << m.cell.col << ',' << format_iso8601(m.times[static_cast<std::size_t>(r)]);
        for (Eigen::Index j = 0; j < m.X.cols(); ++j) out << ',' << csv::format_double(m.X(r, j));
        out << ',' << csv::format_double(y(r)) << '\n';
    }
}

FeatureMatrix read_feature_csv(std::istream& in) {
    csv::LineReader reader(in);
    std::string line, err;
    if (!reader.next(line)) throw FormatError("feature CSV: missing header");
    const auto header = csv::split_line(line, err);
    if (!header || header->size() < 5 || (*header)[0] != "cell_row" || (*header)[1] != "cell_col" ||
        (*header)[2] != "hour_utc" || header->back() != "y") {
        throw FormatError("feature CSV: bad header");
    }
    FeatureMatrix m;
    for (std::size_t j = 3; j + 1 < header->size(); ++j) {
        const std::string& h = (*header)[j];
        const auto colon = h.rfind(':');
        if (colon == std::string::npos || colon + 2 != h.size()) throw FormatError("feature CSV: bad column '" + h + "'");
        const auto g = parse_group(h.back());
        if (!g) throw FormatError("feature CSV: bad group in '" + h + "'");
        m.column_names.push_back(h.substr(0, colon));
        m.groups.push_back(*g);
    }
    const std::size_t d = m.column_names.size();
    std::vector<std::vector<double>> rows;
    std::vector<double> ys;
    while (reader.next(line)) {
        if (line.empty()) continue;
        const auto f = csv::split_line(line, err);
        const std::string where = "feature CSV line " + std::to_string(reader.line_no());
        if (!f || f->size() != header->size()) throw FormatError(where + ": wrong field count");
        const auto row = csv::parse_int((*f)[0]);
        const auto col = csv::parse_int((*f)[1]);
        const auto t = parse_iso8601((*f)[2]);
        if (!row || !col || !t) throw FormatError(where + ": bad key fields");
        const CellId cell{static_cast<int>(*row), static_cast<int>(*col)};
        if (rows.empty()) m.cell = cell;
        else if (cell != m.cell) throw FormatError(where + ": mixed cells");
        m.times.push_back(*t);
        std::vector<double> x(d);
        for (std::size_t j = 0; j < d; ++j) {
            const auto v = csv::parse_double((*f)[3 + j]);
            if (!v) throw FormatError(where + ": bad value");
            x[j] = *v;
        }
        const auto y = csv::parse_double(f->back());
        if (!y) throw FormatError(where + ": bad y");
        rows.push_back(std::move(x));
        ys.push_back(*y);
    }
    const auto n = static_cast<Eigen::Index>(rows.size());
    m.X.resize(n, static_cast<Eigen::Index>(d));
    m.y_pick.resize(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        for (std::size_t j = 0; j < d; ++j) m.X(r, static_cast<Eigen::Index>(j)) = rows[static_cast<std::size_t>(r)][j];
        m.y_pick(r) = ys[static_cast<std::size_t>(r)];
    }
    m.y_drop = m.y_pick;
    return m;
}

}  // namespace urbanpulse
