#include "urbanpulse/timeutil.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "urbanpulse/errors.hpp"

namespace urbanpulse {

// Howard Hinnant's civil calendar algorithms (proleptic Gregorian).
DayNumber days_from_civil(int year, unsigned month, unsigned day) {
    const int y = year - (month <= 2 ? 1 : 0);
    const int era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (month + (month > 2 ? -3 : 9)) + 2) / 5 + day - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return static_cast<DayNumber>(era) * 146097 + static_cast<DayNumber>(doe) - 719468;
}

CivilDate civil_from_days(DayNumber days) {
    days += 719468;
    const DayNumber era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const DayNumber y = static_cast<DayNumber>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return {static_cast<int>(y + (m <= 2 ? 1 : 0)), m, d};
}

namespace {

bool is_leap(int y) { return (y % 4 == 0 && y % 100 != 0) || y % 400 == 0; }

unsigned days_in_month(int y, unsigned m) {
    static constexpr unsigned kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    return (m == 2 && is_leap(y)) ? 29 : kDays[m - 1];
}

// Reads exactly `width` digits starting at pos.
bool read_fixed(std::string_view s, std::size_t pos, std::size_t width, int& out) {
    if (pos + width > s.size()) return false;
    int v = 0;
    for (std::size_t i = pos; i < pos + width; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        v = v * 10 + (s[i] - '0');
    }
    out = v;
    return true;
}

std::optional<DayNumber> parse_date_prefix(std::string_view s) {
    int y = 0, m = 0, d = 0;
    if (s.size() < 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    if (!read_fixed(s, 0, 4, y) || !read_fixed(s, 5, 2, m) || !read_fixed(s, 8, 2, d)) {
        return std::nullopt;
    }
    if (m < 1 || m > 12 || d < 1 || static_cast<unsigned>(d) > days_in_month(y, m)) {
        return std::nullopt;
    }
    return days_from_civil(y, static_cast<unsigned>(m), static_cast<unsigned>(d));
}

}  // namespace

std::optional<DayNumber> parse_date(std::string_view text) {
    if (text.size() != 10) return std::nullopt;
    return parse_date_prefix(text);
}

std::string format_date(DayNumber day) {
    const CivilDate c = civil_from_days(day);
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", c.year, c.month, c.day);
    return buf;
}

std::optional<UtcSeconds> parse_iso8601(std::string_view s) {
    const auto day = parse_date_prefix(s);
    if (!day) return std::nullopt;
    if (s.size() == 10) return *day * kSecondsPerDay;
    if (s[10] != 'T' && s[10] != ' ') return std::nullopt;
    int hh = 0, mm = 0, ss = 0;
    if (!read_fixed(s, 11, 2, hh) || s.size() < 16 || s[13] != ':' || !read_fixed(s, 14, 2, mm)) {
        return std::nullopt;
    }
    std::size_t pos = 16;
    if (pos < s.size() && s[pos] == ':') {
        if (!read_fixed(s, pos + 1, 2, ss)) return std::nullopt;
        pos += 3;
        if (pos < s.size() && (s[pos] == '.' || s[pos] == ',')) {
            ++pos;
            const std::size_t start = pos;
            while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
            if (pos == start) return std::nullopt;
        }
    }
    if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
    std::int64_t offset = 0;
    if (pos < s.size()) {
        const char sign = s[pos];
        if (sign == 'Z' || sign == 'z') {
            if (pos + 1 != s.size()) return std::nullopt;
        } else if (sign == '+' || sign == '-') {
            int oh = 0, om = 0;
            if (!read_fixed(s, pos + 1, 2, oh)) return std::nullopt;
            std::size_t q = pos + 3;
            if (q < s.size() && s[q] == ':') ++q;
            if (q < s.size()) {
                if (!read_fixed(s, q, 2, om)) return std::nullopt;
                q += 2;
            }
            if (q != s.size() || oh > 23 || om > 59) return std::nullopt;
            offset = (sign == '+' ? 1 : -1) * (oh * 3600 + om * 60);
        } else {
            return std::nullopt;
        }
    }
    return *day * kSecondsPerDay + hh * 3600 + mm * 60 + ss - offset;
}

std::string format_iso8601(UtcSeconds t) {
    const DayNumber day = floor_div(t, kSecondsPerDay);
    const std::int64_t sod = t - day * kSecondsPerDay;
    const CivilDate c = civil_from_days(day);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", c.year, c.month, c.day,
                  static_cast<int>(sod / 3600), static_cast<int>(sod / 60 % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

// ---------------------------------------------------------------- TimeZone

namespace {

class RuleCursor {
public:
    explicit RuleCursor(std::string_view s) : s_(s) {}

    bool done() const { return pos_ >= s_.size(); }
    char peek() const { return done() ? '\0' : s_[pos_]; }
    bool consume(char c) {
        if (peek() != c) return false;
        ++pos_;
        return true;
    }

    std::string zone_name() {
        std::string out;
        if (consume('<')) {
            while (!done() && peek() != '>') out += s_[pos_++];
            if (!consume('>')) fail();
        } else {
            while (!done() && std::isalpha(static_cast<unsigned char>(peek()))) out += s_[pos_++];
        }
        if (out.size() < 3) fail();
        return out;
    }

    int number() {
        const char* first = s_.data() + pos_;
        int v = 0;
        auto [ptr, ec] = std::from_chars(first, s_.data() + s_.size(), v);
        if (ec != std::errc{} || v < 0) fail();
        pos_ += static_cast<std::size_t>(ptr - first);
        return v;
    }

    // [+|-]hh[:mm[:ss]] in seconds.
    std::int64_t hms() {
        int sign = 1;
        if (consume('-')) sign = -1;
        else consume('+');
        std::int64_t v = number() * 3600LL;
        if (consume(':')) {
            v += number() * 60LL;
            if (consume(':')) v += number();
        }
        return sign * v;
    }

    bool starts_offset() const {
        const char c = peek();
        return c == '+' || c == '-' || std::isdigit(static_cast<unsigned char>(c));
    }

    [[noreturn]] void fail() const {
        throw ConfigError("invalid POSIX time zone rule: '" + std::string(s_) + "'");
    }

private:
    std::string_view s_;
    std::size_t pos_{0};
};

std::optional<std::string> read_tzif_footer(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string data = buf.str();
    if (data.size() < 5 || data.compare(0, 4, "TZif") != 0) return std::nullopt;
    if (data.back() != '\n') return std::nullopt;
    const auto start = data.rfind('\n', data.size() - 2);
    if (start == std::string::npos) return std::nullopt;
    std::string footer = data.substr(start + 1, data.size() - start - 2);
    if (footer.empty()) return std::nullopt;
    return footer;
}

}  // namespace

TimeZone::TimeZone() : name_("UTC") {}

TimeZone TimeZone::from_posix(std::string_view rule) {
    RuleCursor cur(rule);
    TimeZone tz;
    tz.name_ = std::string(rule);
    cur.zone_name();
    if (!cur.starts_offset()) cur.fail();
    tz.std_offset_ = -cur.hms();
    if (cur.done()) return tz;
    cur.zone_name();
    tz.has_dst_ = true;
    tz.dst_offset_ = tz.std_offset_ + 3600;
    if (cur.starts_offset()) tz.dst_offset_ = -cur.hms();

    auto parse_rule = [&cur]() {
        Rule r;
        if (cur.consume('M')) {
            r.kind = Rule::Kind::month_week_day;
            r.a = cur.number();
            if (!cur.consume('.')) cur.fail();
            r.week = cur.number();
            if (!cur.consume('.')) cur.fail();
            r.weekday = cur.number();
            if (r.a < 1 || r.a > 12 || r.week < 1 || r.week > 5 || r.weekday > 6) cur.fail();
        } else if (cur.consume('J')) {
            r.kind = Rule::Kind::julian_no_leap;
            r.a = cur.number();
            if (r.a < 1 || r.a > 365) cur.fail();
        } else {
            r.kind = Rule::Kind::julian_zero;
            r.a = cur.number();
            if (r.a > 365) cur.fail();
        }
        if (cur.consume('/')) r.time_of_day = cur.hms();
        return r;
    };

    if (cur.done()) {
        // POSIX leaves the default implementation-defined; use the US rule.
        tz.dst_start_ = Rule{Rule::Kind::month_week_day, 3, 2, 0, 7200};
        tz.dst_end_ = Rule{Rule::Kind::month_week_day, 11, 1, 0, 7200};
        return tz;
    }
    if (!cur.consume(',')) cur.fail();
    tz.dst_start_ = parse_rule();
    if (!cur.consume(',')) cur.fail();
    tz.dst_end_ = parse_rule();
    if (!cur.done()) cur.fail();
    return tz;
}

TimeZone TimeZone::load(std::string_view name) {
    if (name.empty() || name == "UTC" || name == "Z" || name == "Etc/UTC" || name == "GMT") {
        return TimeZone{};
    }
    std::filesystem::path dir = "/usr/share/zoneinfo";
    if (const char* env = std::getenv("TZDIR"); env != nullptr && *env != '\0') dir = env;
    const std::string key(name);
    if (key.find("..") == std::string::npos) {
        if (auto footer = read_tzif_footer(dir / key)) {
            TimeZone tz = from_posix(*footer);
            tz.name_ = key;
            return tz;
        }
    }
    try {
        return from_posix(name);
    } catch (const ConfigError&) {
        throw ConfigError("unknown time zone '" + key + "'");
    }
}

std::int64_t TimeZone::rule_local_seconds(const Rule& rule, int year) {
    DayNumber day = 0;
    switch (rule.kind) {
        case Rule::Kind::julian_no_leap: {
            int doy = rule.a - 1;
            if (is_leap(year) && rule.a >= 60) ++doy;
            day = days_from_civil(year, 1, 1) + doy;
            break;
        }
        case Rule::Kind::julian_zero:
            day = days_from_civil(year, 1, 1) + rule.a;
            break;
        case Rule::Kind::month_week_day: {
            const auto month = static_cast<unsigned>(rule.a);
            const DayNumber first = days_from_civil(year, month, 1);
            const int first_wd = static_cast<int>(((first % 7) + 7 + 4) % 7);  // 1970-01-01 is Thursday
            day = first + (rule.weekday - first_wd + 7) % 7 + 7 * (rule.week - 1);
            const DayNumber last = first + days_in_month(year, month) - 1;
            while (day > last) day -= 7;
            break;
        }
    }
    return day * kSecondsPerDay + rule.time_of_day;
}

std::int64_t TimeZone::utc_offset(UtcSeconds t) const {
    if (!has_dst_) return std_offset_;
    const int year = civil_from_days(floor_div(t + std_offset_, kSecondsPerDay)).year;
    const std::int64_t start = rule_local_seconds(dst_start_, year) - std_offset_;
    const std::int64_t end = rule_local_seconds(dst_end_, year) - dst_offset_;
    const bool dst = start < end ? (t >= start && t < end) : (t >= start || t < end);
    return dst ? dst_offset_ : std_offset_;
}

int TimeZone::local_hour(UtcSeconds t) const {
    const std::int64_t local = to_local(t);
    return static_cast<int>((local - floor_div(local, kSecondsPerDay) * kSecondsPerDay) / 3600);
}

DayNumber TimeZone::local_day(UtcSeconds t) const {
    return floor_div(to_local(t), kSecondsPerDay);
}

UtcSeconds TimeZone::local_midnight(DayNumber day) const {
    const std::int64_t local = day * kSecondsPerDay;
    // Two-pass fixed point: offset at the guessed instant, then re-evaluate.
    UtcSeconds guess = local - std_offset_;
    guess = local - utc_offset(guess);
    guess = local - utc_offset(guess);
    return guess;
}

}  // namespace urbanpulse
