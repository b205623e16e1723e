#pragma once

#include <array>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "urbanpulse/geogrid.hpp"
#include "urbanpulse/timeutil.hpp"

namespace urbanpulse {

/// First-level venue categories, in alphabetical (column) order.
enum class PoiCategory : std::uint8_t {
    arts,
    college,
    event,
    food,
    nightlife,
    outdoors,
    professional,
    residence,
    shop,
    travel,
};
inline constexpr std::size_t kCategoryCount = 10;

std::string_view category_label(PoiCategory c);

/// Case-insensitive, whitespace-trimmed; also accepts the long venue-API
/// names ("Arts & Entertainment", "Shop & Service", ...).
std::optional<PoiCategory> parse_category(std::string_view text);

enum class WeatherAttribute : std::uint8_t { WSF2, WSF5, PRCP, SNOW };
inline constexpr std::size_t kWeatherAttributeCount = 4;

std::string_view attribute_label(WeatherAttribute a);
std::optional<WeatherAttribute> parse_attribute(std::string_view text);

struct TripRecord {
    UtcSeconds pickup_time{0};
    UtcSeconds dropoff_time{0};
    GeoPoint pickup;
    GeoPoint dropoff;

    friend bool operator==(const TripRecord&, const TripRecord&) = default;
};

struct PoiRecord {
    std::string id;
    std::string name;
    PoiCategory category{PoiCategory::arts};
    GeoPoint location;
    std::int64_t popularity_z{0};  // total check-ins

    friend bool operator==(const PoiRecord&, const PoiRecord&) = default;
};

struct TweetRecord {
    UtcSeconds time{0};
    std::string user_id;
    GeoPoint location;
    std::string text;

    friend bool operator==(const TweetRecord&, const TweetRecord&) = default;
};

struct WeatherDay {
    DayNumber date{0};
    std::array<std::optional<double>, kWeatherAttributeCount> values{};

    const std::optional<double>& value(WeatherAttribute a) const {
        return values[static_cast<std::size_t>(a)];
    }

    friend bool operator==(const WeatherDay&, const WeatherDay&) = default;
};

struct CollisionRecord {
    UtcSeconds time{0};
    GeoPoint location;
    std::int64_t injured{0};
    std::int64_t killed{0};

    std::int64_t severity() const { return injured + killed; }

    friend bool operator==(const CollisionRecord&, const CollisionRecord&) = default;
};

struct LineError {
    std::size_t line_no{0};
    std::string reason;
};

template <class Record>
struct ParseResult {
    std::vector<Record> records;
    std::vector<LineError> errors;
    std::size_t lines_read{0};  // including the header
};

// Each parser requires its exact header on line 1 (FormatError otherwise)
// and reports every bad data line as a LineError without stopping.
ParseResult<TripRecord> parse_trips(std::istream& in);
ParseResult<PoiRecord> parse_pois(std::istream& in);
ParseResult<TweetRecord> parse_tweets(std::istream& in);
ParseResult<WeatherDay> parse_weather(std::istream& in);
ParseResult<CollisionRecord> parse_collisions(std::istream& in);

void write_trips(std::ostream& out, std::span<const TripRecord> records);
void write_pois(std::ostream& out, std::span<const PoiRecord> records);
void write_tweets(std::ostream& out, std::span<const TweetRecord> records);
void write_weather(std::ostream& out, std::span<const WeatherDay> records);
void write_collisions(std::ostream& out, std::span<const CollisionRecord> records);

inline constexpr std::string_view kTripHeader =
    "pickup_datetime,dropoff_datetime,pickup_lat,pickup_lon,dropoff_lat,dropoff_lon";
inline constexpr std::string_view kPoiHeader = "id,name,category,lat,lon,checkins";
inline constexpr std::string_view kTweetHeader = "timestamp,user_id,lat,lon,text";
inline constexpr std::string_view kWeatherHeader = "date,WSF2,WSF5,PRCP,SNOW";
inline constexpr std::string_view kCollisionHeader = "datetime,lat,lon,injured,killed";

}  // namespace urbanpulse

namespace urbanpulse {

/// The five parsed input datasets.
struct Datasets {
    std::vector<TripRecord> trips;
    std::vector<PoiRecord> pois;
    std::vector<TweetRecord> tweets;
    std::vector<WeatherDay> weather;
    std::vector<CollisionRecord> collisions;

    friend bool operator==(const Datasets&, const Datasets&) = default;
};

}  // namespace urbanpulse
