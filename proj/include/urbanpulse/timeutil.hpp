#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace urbanpulse {

/// Seconds since 1970-01-01T00:00:00Z.
using UtcSeconds = std::int64_t;

/// Civil day number: days since 1970-01-01 in some calendar frame.
using DayNumber = std::int64_t;

inline constexpr std::int64_t kSecondsPerHour = 3600;
inline constexpr std::int64_t kSecondsPerDay = 86400;

/// floor(a / b) for b > 0.
constexpr std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && (a < 0)) --q;
    return q;
}

DayNumber days_from_civil(int year, unsigned month, unsigned day);

struct CivilDate {
    int year;
    unsigned month;
    unsigned day;
};
CivilDate civil_from_days(DayNumber days);

/// Parses `YYYY-MM-DD`; nullopt on malformed or impossible dates.
std::optional<DayNumber> parse_date(std::string_view text);
std::string format_date(DayNumber day);

/// Parses ISO-8601 date-times: `YYYY-MM-DD[T| ]HH:MM[:SS[.fff]][Z|+HH:MM|-HH:MM|+HHMM]`.
/// Times without an offset are taken as UTC. Fractional seconds are truncated.
std::optional<UtcSeconds> parse_iso8601(std::string_view text);

/// `YYYY-MM-DDTHH:MM:SSZ`.
std::string format_iso8601(UtcSeconds t);

/// Fixed-rule time zone built from a POSIX TZ string (e.g. `EST5EDT,M3.2.0,M11.1.0`).
///
/// Named zones are resolved through the system zoneinfo database by reading
/// the POSIX rule footer of the TZif file, so historical rule changes before
/// the current rule took effect are not modelled.
class TimeZone {
public:
    TimeZone();  // UTC

    /// `UTC`, an IANA name found under the zoneinfo directory, or a POSIX TZ string.
    static TimeZone load(std::string_view name);
    static TimeZone from_posix(std::string_view rule);

    const std::string& name() const { return name_; }

    /// Offset local - UTC in seconds at the given instant.
    std::int64_t utc_offset(UtcSeconds t) const;

    UtcSeconds to_local(UtcSeconds t) const { return t + utc_offset(t); }

    /// Hour of day in [0, 24) in local time.
    int local_hour(UtcSeconds t) const;

    /// Local calendar day containing t.
    DayNumber local_day(UtcSeconds t) const;

    /// First instant of the local calendar day.
    UtcSeconds local_midnight(DayNumber day) const;

private:
    struct Rule {
        enum class Kind { julian_no_leap, julian_zero, month_week_day } kind{Kind::month_week_day};
        int a{0};  // day (Jn / n) or month (M)
        int week{0};
        int weekday{0};
        std::int64_t time_of_day{7200};
    };

    // Local standard-time seconds at which the rule fires in `year`.
    static std::int64_t rule_local_seconds(const Rule& rule, int year);

    std::string name_;
    std::int64_t std_offset_{0};  // local - UTC
    std::int64_t dst_offset_{0};
    bool has_dst_{false};
    Rule dst_start_{};
    Rule dst_end_{};
};

}  // namespace urbanpulse
