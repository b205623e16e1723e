#include "urbanpulse/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <set>
#include <variant>

#include "urbanpulse/csv.hpp"
#include "urbanpulse/errors.hpp"

namespace urbanpulse {

namespace {

constexpr std::array<std::string_view, kCategoryCount> kCategoryLabels = {
    "arts", "college", "event", "food", "nightlife",
    "outdoors", "professional", "residence", "shop", "travel"};

struct CategoryAlias {
    std::string_view text;
    PoiCategory category;
};

constexpr CategoryAlias kCategoryAliases[] = {
    {"arts & entertainment", PoiCategory::arts},
    {"art", PoiCategory::arts},
    {"college & university", PoiCategory::college},
    {"college & education", PoiCategory::college},
    {"events", PoiCategory::event},
    {"nightlife spot", PoiCategory::nightlife},
    {"outdoors & recreation", PoiCategory::outdoors},
    {"professional & other places", PoiCategory::professional},
    {"shops", PoiCategory::shop},
    {"shop & service", PoiCategory::shop},
    {"travel & transport", PoiCategory::travel},
};

constexpr std::array<std::string_view, kWeatherAttributeCount> kAttributeLabels = {
    "WSF2", "WSF5", "PRCP", "SNOW"};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

using FieldList = std::vector<std::string>;

template <class Record>
using LineParser = std::function<std::variant<Record, std::string>(const FieldList&)>;

template <class Record>
ParseResult<Record> parse_stream(std::istream& in, std::string_view header,
                                 const LineParser<Record>& parse_line) {
    ParseResult<Record> result;
    csv::LineReader reader(in);
    std::string line;
    if (!reader.next(line)) throw FormatError("missing header: expected '" + std::string(header) + "'");

    std::string err;
    const auto header_fields = csv::split_line(line, err);
    std::string_view expected_rest = header;
    bool ok = header_fields.has_value();
    if (ok) {
        std::size_t i = 0;
        for (; i < header_fields->size() && ok; ++i) {
            const auto comma = expected_rest.find(',');
            const std::string_view want = expected_rest.substr(0, comma);
            ok = csv::trim((*header_fields)[i]) == want;
            expected_rest = comma == std::string_view::npos ? std::string_view{}
                                                            : expected_rest.substr(comma + 1);
            if (comma == std::string_view::npos && i + 1 < header_fields->size()) ok = false;
        }
        ok = ok && expected_rest.empty() && i == header_fields->size();
    }
    if (!ok) {
        throw FormatError("missing header: expected '" + std::string(header) + "', got '" + line +
                          "'");
    }
    const auto n_fields = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);

    while (reader.next(line)) {
        const std::size_t no = reader.line_no();
        if (csv::trim(line).empty()) {
            result.errors.push_back({no, "empty line"});
            continue;
        }
        auto fields = csv::split_line(line, err);
        if (!fields) {
            result.errors.push_back({no, err});
            continue;
        }
        if (fields->size() != n_fields) {
            result.errors.push_back({no, "expected " + std::to_string(n_fields) + " fields, got " +
                                             std::to_string(fields->size())});
            continue;
        }
        auto parsed = parse_line(*fields);
        if (auto* rec = std::get_if<Record>(&parsed)) {
            result.records.push_back(std::move(*rec));
        } else {
            result.errors.push_back({no, std::get<std::string>(parsed)});
        }
    }
    result.lines_read = reader.line_no();
    return result;
}

// Returns an error reason, or empty on success.
std::string read_point(std::string_view lat_s, std::string_view lon_s, GeoPoint& out,
                       std::string_view what) {
    const auto lat = csv::parse_double(lat_s);
    const auto lon = csv::parse_double(lon_s);
    if (!lat) return "bad " + std::string(what) + "lat";
    if (!lon) return "bad " + std::string(what) + "lon";
    if (*lat < -90.0 || *lat > 90.0) return "lat out of range";
    if (*lon < -180.0 || *lon > 180.0) return "lon out of range";
    out = {*lat, *lon};
    return {};
}

std::string write_point(const GeoPoint& p) {
    return csv::format_double(p.lat) + "," + csv::format_double(p.lon);
}

}  // namespace

std::string_view category_label(PoiCategory c) { return kCategoryLabels[static_cast<std::size_t>(c)]; }

std::optional<PoiCategory> parse_category(std::string_view text) {
    const std::string key = lower(csv::trim(text));
    for (std::size_t i = 0; i < kCategoryCount; ++i) {
        if (key == kCategoryLabels[i]) return static_cast<PoiCategory>(i);
    }
    for (const auto& alias : kCategoryAliases) {
        if (key == alias.text) return alias.category;
    }
    return std::nullopt;
}

std::string_view attribute_label(WeatherAttribute a) {
    return kAttributeLabels[static_cast<std::size_t>(a)];
}

std::optional<WeatherAttribute> parse_attribute(std::string_view text) {
    std::string key(csv::trim(text));
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    for (std::size_t i = 0; i < kWeatherAttributeCount; ++i) {
        if (key == kAttributeLabels[i]) return static_cast<WeatherAttribute>(i);
    }
    return std::nullopt;
}

ParseResult<TripRecord> parse_trips(std::istream& in) {
    return parse_stream<TripRecord>(
        in, kTripHeader, [](const FieldList& f) -> std::variant<TripRecord, std::string> {
            TripRecord r;
            const auto pt = parse_iso8601(csv::trim(f[0]));
            if (!pt) return std::string("bad pickup_datetime");
            const auto dt = parse_iso8601(csv::trim(f[1]));
            if (!dt) return std::string("bad dropoff_datetime");
            r.pickup_time = *pt;
            r.dropoff_time = *dt;
            if (auto e = read_point(f[2], f[3], r.pickup, "pickup_"); !e.empty()) return e;
            if (auto e = read_point(f[4], f[5], r.dropoff, "dropoff_"); !e.empty()) return e;
            if (r.dropoff_time < r.pickup_time) return std::string("negative duration");
            return r;
        });
}

ParseResult<PoiRecord> parse_pois(std::istream& in) {
    return parse_stream<PoiRecord>(
        in, kPoiHeader, [](const FieldList& f) -> std::variant<PoiRecord, std::string> {
            PoiRecord r;
            r.id = std::string(csv::trim(f[0]));
            if (r.id.empty()) return std::string("empty id");
            r.name = std::string(csv::trim(f[1]));
            if (r.name.empty()) return std::string("empty name");
            const auto cat = parse_category(f[2]);
            if (!cat) return std::string("unknown category");
            r.category = *cat;
            if (auto e = read_point(f[3], f[4], r.location, ""); !e.empty()) return e;
            const auto z = csv::parse_int(f[5]);
            if (!z) return std::string("non-integer checkins");
            if (*z < 0) return std::string("negative checkins");
            r.popularity_z = *z;
            return r;
        });
}

ParseResult<TweetRecord> parse_tweets(std::istream& in) {
    return parse_stream<TweetRecord>(
        in, kTweetHeader, [](const FieldList& f) -> std::variant<TweetRecord, std::string> {
            TweetRecord r;
            const auto t = parse_iso8601(csv::trim(f[0]));
            if (!t) return std::string("bad timestamp");
            r.time = *t;
            r.user_id = std::string(csv::trim(f[1]));
            if (r.user_id.empty()) return std::string("empty user_id");
            if (auto e = read_point(f[2], f[3], r.location, ""); !e.empty()) return e;
            r.text = f[4];
            return r;
        });
}

ParseResult<WeatherDay> parse_weather(std::istream& in) {
    std::set<DayNumber> seen;
    return parse_stream<WeatherDay>(
        in, kWeatherHeader, [&seen](const FieldList& f) -> std::variant<WeatherDay, std::string> {
            WeatherDay day;
            const auto date = parse_date(csv::trim(f[0]));
            if (!date) return std::string("bad date");
            day.date = *date;
            for (std::size_t i = 0; i < kWeatherAttributeCount; ++i) {
                const std::string_view raw = csv::trim(f[i + 1]);
                if (raw.empty()) continue;
                const auto v = csv::parse_double(raw);
                const std::string label(kAttributeLabels[i]);
                if (!v) return "bad " + label;
                if (*v < 0.0) return "negative " + label;
                day.values[i] = *v;
            }
            if (!seen.insert(day.date).second) return std::string("duplicate date");
            return day;
        });
}

ParseResult<CollisionRecord> parse_collisions(std::istream& in) {
    return parse_stream<CollisionRecord>(
        in, kCollisionHeader, [](const FieldList& f) -> std::variant<CollisionRecord, std::string> {
            CollisionRecord r;
            const auto t = parse_iso8601(csv::trim(f[0]));
            if (!t) return std::string("bad datetime");
            r.time = *t;
            if (auto e = read_point(f[1], f[2], r.location, ""); !e.empty()) return e;
            const auto injured = csv::parse_int(f[3]);
            if (!injured) return std::string("non-integer injured");
            const auto killed = csv::parse_int(f[4]);
            if (!killed) return std::string("non-integer killed");
            if (*injured < 0) return std::string("negative injured");
            if (*killed < 0) return std::string("negative killed");
            r.injured = *injured;
            r.killed = *killed;
            return r;
        });
}

void write_trips(std::ostream& out, std::span<const TripRecord> records) {
    out << kTripHeader << '\n';
    for (const auto& r : records) {
        out << format_iso8601(r.pickup_time) << ',' << format_iso8601(r.dropoff_time) << ','
            << write_point(r.pickup) << ',' << write_point(r.dropoff) << '\n';
    }
}

void write_pois(std::ostream& out, std::span<const PoiRecord> records) {
    out << kPoiHeader << '\n';
    for (const auto& r : records) {
        out << csv::quote(r.id) << ',' << csv::quote(r.name) << ',' << category_label(r.category)
            << ',' << write_point(r.location) << ',' << r.popularity_z << '\n';
    }
}

void write_tweets(std::ostream& out, std::span<const TweetRecord> records) {
    out << kTweetHeader << '\n';
    for (const auto& r : records) {
        // Text is always quoted so leading/trailing blanks survive.
        std::string text = "\"";
        for (char c : r.text) {
            if (c == '"') text += '"';
            text += c;
        }
        text += '"';
        out << format_iso8601(r.time) << ',' << csv::quote(r.user_id) << ','
            << write_point(r.location) << ',' << text << '\n';
    }
}

void write_weather(std::ostream& out, std::span<const WeatherDay> records) {
    out << kWeatherHeader << '\n';
    for (const auto& d : records) {
        out << format_date(d.date);
        for (const auto& v : d.values) {
            out << ',';
            if (v) out << csv::format_double(*v);
        }
        out << '\n';
    }
}

void write_collisions(std::ostream& out, std::span<const CollisionRecord> records) {
    out << kCollisionHeader << '\n';
    for (const auto& r : records) {
        out << format_iso8601(r.time) << ',' << write_point(r.location) << ',' << r.injured << ','
            << r.killed << '\n';
    }
}

}  // namespace urbanpulse
