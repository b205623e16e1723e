#include <doctest.h>

#include "urbanpulse/errors.hpp"
#include "urbanpulse/timeutil.hpp"

using namespace urbanpulse;

TEST_CASE("civil day round trip") {
    CHECK(days_from_civil(1970, 1, 1) == 0);
    CHECK(days_from_civil(2012, 10, 29) == 15642);
    for (DayNumber d = -1000; d < 30000; d += 7) {
        const auto c = civil_from_days(d);
        CHECK(days_from_civil(c.year, c.month, c.day) == d);
    }
    CHECK(parse_date("2012-02-29") == days_from_civil(2012, 2, 29));
    CHECK_FALSE(parse_date("2013-02-29"));
    CHECK_FALSE(parse_date("2012-13-01"));
    CHECK(format_date(days_from_civil(2012, 11, 1)) == "2012-11-01");
}

TEST_CASE("iso-8601 variants") {
    const UtcSeconds t = days_from_civil(2012, 10, 29) * 86400 + 13 * 3600 + 5 * 60 + 7;
    CHECK(parse_iso8601("2012-10-29T13:05:07Z") == t);
    CHECK(parse_iso8601("2012-10-29 13:05:07") == t);
    CHECK(parse_iso8601("2012-10-29T13:05:07.999Z") == t);
    CHECK(parse_iso8601("2012-10-29T09:05:07-04:00") == t);
    CHECK(parse_iso8601("2012-10-29T15:05:07+0200") == t);
    CHECK(parse_iso8601("2012-10-29T13:05") == t - 7);
    CHECK_FALSE(parse_iso8601("2012-10-29T25:00:00Z"));
    CHECK_FALSE(parse_iso8601("yesterday"));
    CHECK(format_iso8601(t) == "2012-10-29T13:05:07Z");
}

TEST_CASE("new york offsets and local days") {
    const TimeZone ny = TimeZone::load("America/New_York");
    const UtcSeconds summer = *parse_iso8601("2012-07-01T12:00:00Z");
    const UtcSeconds winter = *parse_iso8601("2012-12-01T12:00:00Z");
    CHECK(ny.utc_offset(summer) == -4 * 3600);
    CHECK(ny.utc_offset(winter) == -5 * 3600);
    CHECK(ny.local_hour(summer) == 8);
    // DST ended 2012-11-04 at 06:00 UTC.
    CHECK(ny.utc_offset(*parse_iso8601("2012-11-04T05:59:59Z")) == -4 * 3600);
    CHECK(ny.utc_offset(*parse_iso8601("2012-11-04T06:00:00Z")) == -5 * 3600);
    // DST began 2012-03-11 at 07:00 UTC.
    CHECK(ny.utc_offset(*parse_iso8601("2012-03-11T06:59:59Z")) == -5 * 3600);
    CHECK(ny.utc_offset(*parse_iso8601("2012-03-11T07:00:00Z")) == -4 * 3600);

    const DayNumber d = days_from_civil(2012, 11, 4);
    CHECK(ny.local_midnight(d) == *parse_iso8601("2012-11-04T04:00:00Z"));
    CHECK(ny.local_midnight(d + 1) - ny.local_midnight(d) == 25 * 3600);
    CHECK(ny.local_day(ny.local_midnight(d)) == d);
    CHECK(ny.local_day(ny.local_midnight(d) - 1) == d - 1);
}

TEST_CASE("zone parsing") {
    CHECK(TimeZone::load("UTC").utc_offset(0) == 0);
    const TimeZone posix = TimeZone::from_posix("EST5EDT,M3.2.0,M11.1.0");
    const TimeZone ny = TimeZone::load("America/New_York");
    for (UtcSeconds t = *parse_iso8601("2012-01-01T00:00:00Z"); t < *parse_iso8601("2014-01-01T00:00:00Z");
         t += 3600 * 7) {
        CHECK(posix.utc_offset(t) == ny.utc_offset(t));
    }
    CHECK(TimeZone::from_posix("JST-9").utc_offset(0) == 9 * 3600);
    CHECK_THROWS_AS(TimeZone::load("Nowhere/Atlantis"), ConfigError);
}
