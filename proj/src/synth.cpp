#include "urbanpulse/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>

#include "urbanpulse/csv.hpp"
#include "urbanpulse/errors.hpp"

namespace urbanpulse {

// ---------------------------------------------------------------- Rng

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Rng::Rng(std::uint64_t seed) {
    for (auto& s : s_) s = splitmix64(seed);
}

std::uint64_t Rng::next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Rng::uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

std::uint64_t Rng::below(std::uint64_t n) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(next()) * n) >> 64);
}

double Rng::normal() {
    // Box-Muller; one variate per call keeps the stream position simple.
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::int64_t Rng::poisson(double mean) {
    if (!(mean > 0.0)) return 0;
    if (mean < 30.0) {
        const double limit = std::exp(-mean);
        std::int64_t k = 0;
        double prod = uniform();
        while (prod > limit) {
            ++k;
            prod *= uniform();
        }
        return k;
    }
    return std::max<std::int64_t>(0, std::llround(mean + std::sqrt(mean) * normal()));
}

std::size_t Rng::weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) total += w;
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    for (std::size_t i = weights.size(); i-- > 0;) {
        if (weights[i] > 0.0) return i;
    }
    throw InputError("Rng::weighted: all weights are zero");
}

// ---------------------------------------------------------------- config

void SynthConfig::validate() const {
    if (n_days < 7) throw ConfigError("synth: n_days must be >= 7");
    if (!(noise_sd >= 0.0)) throw ConfigError("synth: noise_sd must be >= 0");
    if (!(pois_per_cell > 0.0)) throw ConfigError("synth: pois_per_cell must be > 0");
    if (!(mean_rate >= 0.0)) throw ConfigError("synth: mean_rate must be >= 0");
    if (checkins < 0 || users < 1 || event_users < 0) throw ConfigError("synth: bad tweet counts");
    if (!(background_tweets_per_cell_hour >= 0.0) || !(collisions_per_cell_day >= 0.0)) {
        throw ConfigError("synth: rates must be >= 0");
    }
    if (hashtag_share < 0.0 || hashtag_share > 1.0) throw ConfigError("synth: hashtag_share must be in [0,1]");
    if (!category_mix.empty() && category_mix.size() != grid.cell_count()) {
        throw ConfigError("synth: category_mix must have one entry per cell");
    }
    for (const auto& mix : category_mix) {
        double s = 0.0;
        for (double w : mix) {
            if (w < 0.0) throw ConfigError("synth: negative category weight");
            s += w;
        }
        if (!(s > 0.0)) throw ConfigError("synth: category weights sum to zero");
    }
    for (const auto& e : event_days) {
        if (e.day_offset < 0 || e.day_offset >= n_days || !grid.contains(e.cell)) {
            throw ConfigError("synth: event outside the city or window");
        }
    }
    if (storm) {
        if (storm->day_offset < 0 || storm->day_offset >= n_days) throw ConfigError("synth: storm day outside window");
        if (!(storm->magnitude > 0.0)) throw ConfigError("synth: storm magnitude must be > 0");
        if (storm->depth < 0.0 || storm->depth > 1.0) throw ConfigError("synth: storm depth must be in [0,1]");
        storm_decay.validate();
    }
}

HourRange SynthConfig::hours(const TimeZone& tz) const {
    const UtcSeconds t0 = tz.local_midnight(start_day);
    const UtcSeconds t1 = tz.local_midnight(start_day + n_days);
    return {t0, (t1 - t0) / kSecondsPerHour};
}

// ---------------------------------------------------------------- profile

PopularityTable synthetic_popularity() {
    struct Bump {
        double center, width, weight;
    };
    // Hour-of-day shape per category: food at lunch and dinner, nightlife
    // late, commute peaks for travel and professional venues.
    const std::vector<std::vector<Bump>> shapes = {
        {{20.0, 2.0, 1.0}, {14.0, 2.5, 0.4}},   // arts
        {{10.0, 2.0, 1.0}, {15.0, 2.0, 0.8}},   // college
        {{19.5, 1.5, 1.0}},                     // event
        {{12.5, 1.5, 1.0}, {19.0, 2.0, 0.9}},   // food
        {{23.0, 2.5, 1.0}, {1.5, 1.5, 0.6}},    // nightlife
        {{15.0, 3.0, 1.0}},                     // outdoors
        {{9.0, 1.5, 1.0}, {17.5, 1.5, 0.9}},    // professional
        {{7.5, 1.5, 0.7}, {21.0, 2.5, 1.0}},    // residence
        {{15.0, 3.5, 1.0}},                     // shop
        {{8.0, 1.5, 1.0}, {18.0, 2.0, 1.0}},    // travel
    };
    PopularityTable table;
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        double total = 0.0;
        for (int h = 0; h < 24; ++h) {
            double v = 0.02;
            for (const auto& b : shapes[c]) {
                double d = std::abs(h + 0.5 - b.center);
                d = std::min(d, 24.0 - d);
                v += b.weight * std::exp(-0.5 * (d / b.width) * (d / b.width));
            }
            table.g[c][static_cast<std::size_t>(h)] = v;
            total += v;
        }
        for (auto& v : table.g[c]) v /= total;
    }
    return table;
}

// ---------------------------------------------------------------- generator

namespace {

constexpr const char* kAdjectives[] = {
    "Blue",   "Golden", "Silver", "Crimson", "Hidden", "Urban",  "Lucky",  "Quiet",
    "Grand",  "Little", "Royal",  "Rusty",   "Velvet", "Copper", "Amber",  "Wild",
    "Misty",  "Sunny",  "Iron",   "Jade",    "Noble",  "Polar",  "Scarlet", "Twin",
    "Bright", "Hollow", "Maple",  "Cedar",   "Harbor", "Olive"};
constexpr const char* kNouns[] = {
    "Lantern", "Anchor", "Falcon", "Garden",  "Bridge", "Comet",  "Harvest", "Meadow",
    "Pioneer", "Quarry", "Raven",  "Summit",  "Tavern", "Violet", "Willow",  "Beacon",
    "Canyon",  "Dragon", "Ember",  "Fountain", "Glacier", "Horizon", "Island", "Juniper",
    "Kettle",  "Lotus",  "Mariner", "Nimbus", "Orchard", "Pepper"};
constexpr const char* kCategoryWords[kCategoryCount] = {
    "Theater", "College", "Hall", "Cafe", "Lounge", "Park", "Offices", "Residences", "Market",
    "Station"};
constexpr const char* kChatter[] = {
    "nice day out", "stuck in traffic again", "coffee time", "love this city",
    "heading home", "great view from here", "lunch break", "so tired today",
    "weekend plans", "walking around downtown"};

GeoPoint point_in_cell(Rng& rng, CellId cell, const GridSpec& grid, double inset) {
    const double s = grid.cell_size_m();
    const LocalXY xy{(cell.col + rng.uniform(inset, 1.0 - inset)) * s,
                     (cell.row + rng.uniform(inset, 1.0 - inset)) * s};
    return unproject(xy, grid);
}

GeoPoint outside_grid(Rng& rng, const GridSpec& grid) {
    // South of the grid origin by 2-3 km.
    return unproject({rng.uniform(0.0, grid.cell_size_m() * grid.n_cols()), -rng.uniform(2000.0, 3000.0)},
                     grid);
}

std::int64_t noisy_count(Rng& rng, double rate, double noise_sd) {
    if (noise_sd == 0.0) return std::llround(rate);
    const double draw = rate + noise_sd * std::sqrt(std::max(rate, 0.0)) * rng.normal();
    return std::max<std::int64_t>(0, std::llround(draw));
}

double round1(double v) { return std::round(v * 10.0) / 10.0; }

}  // namespace

SyntheticBundle generate_city(const SynthConfig& config) {
    config.validate();
    SyntheticBundle b;
    b.config = config;
    b.tz = TimeZone::load(config.timezone);
    b.range = config.hours(b.tz);
    b.true_popularity = synthetic_popularity();
    const GridSpec& grid = config.grid;
    const std::size_t n_cells = grid.cell_count();
    const auto n_hours = static_cast<std::size_t>(b.range.n_hours);
    Rng rng(config.seed);

    // Category mix.
    std::vector<CategoryVector> mix = config.category_mix;
    if (mix.empty()) {
        mix.resize(n_cells);
        for (auto& m : mix) {
            for (auto& w : m) {
                const double e = -std::log(1.0 - rng.uniform());
                w = e * e + 0.01;
            }
        }
    }

    // POIs.
    std::vector<CategoryVector> mass(n_cells, CategoryVector{});
    for (std::size_t ci = 0; ci < n_cells; ++ci) {
        const CellId cell = grid.cell_at(ci);
        const std::int64_t n = std::max<std::int64_t>(1, rng.poisson(config.pois_per_cell));
        for (std::int64_t k = 0; k < n; ++k) {
            PoiRecord p;
            const auto cat = rng.weighted(mix[ci]);
            p.category = static_cast<PoiCategory>(cat);
            char id[16];
            std::snprintf(id, sizeof id, "p%06zu", b.data.pois.size());
            p.id = id;
            p.name = std::string(kAdjectives[rng.below(std::size(kAdjectives))]) + " " +
                     kNouns[rng.below(std::size(kNouns))] + " " + kCategoryWords[cat];
            p.location = point_in_cell(rng, cell, grid, 0.1);
            p.popularity_z = 1 + std::llround(std::exp(3.5 + 0.8 * rng.normal()));
            mass[ci][cat] += static_cast<double>(p.popularity_z);
            b.data.pois.push_back(std::move(p));
        }
    }

    // Rates.
    double total_mass = 0.0;
    for (const auto& m : mass) {
        for (double v : m) total_mass += v;
    }
    const double kappa = total_mass > 0.0 ? config.mean_rate * 24.0 * static_cast<double>(n_cells) / total_mass : 0.0;
    b.rate.assign(n_cells * n_hours, 0.0);
    for (std::size_t h = 0; h < n_hours; ++h) {
        const UtcSeconds t = b.range.hour_start(static_cast<std::int64_t>(h));
        const auto hh = static_cast<std::size_t>(b.tz.local_hour(t));
        const auto day = static_cast<int>(b.tz.local_day(t) - config.start_day);
        double damp = 1.0;
        if (config.storm) {
            const double lag = day - config.storm->day_offset;
            const double horizon = config.storm_decay.horizon_days;
            if (lag >= 0.0 && lag < horizon) {
                damp = 1.0 - config.storm->depth * (1.0 - std::pow(lag / horizon, config.storm_decay.alpha));
            }
        }
        for (std::size_t ci = 0; ci < n_cells; ++ci) {
            double base = 0.0;
            for (std::size_t c = 0; c < kCategoryCount; ++c) base += mass[ci][c] * b.true_popularity.g[c][hh];
            double r = kappa * base * damp;
            for (const auto& e : config.event_days) {
                if (e.day_offset == day && grid.index(e.cell) == ci && hh >= 18 && hh <= 22) {
                    r += config.event_rate;
                }
            }
            b.rate[ci * n_hours + h] = r;
        }
    }

    // Trips: pair pick-up and drop-off slots within each hour.
    std::vector<std::size_t> pick_slots, drop_slots;
    for (std::size_t h = 0; h < n_hours; ++h) {
        const UtcSeconds t = b.range.hour_start(static_cast<std::int64_t>(h));
        pick_slots.clear();
        drop_slots.clear();
        for (std::size_t ci = 0; ci < n_cells; ++ci) {
            const double r = b.rate[ci * n_hours + h];
            pick_slots.insert(pick_slots.end(), static_cast<std::size_t>(noisy_count(rng, r, config.noise_sd)), ci);
            drop_slots.insert(drop_slots.end(), static_cast<std::size_t>(noisy_count(rng, r, config.noise_sd)), ci);
        }
        for (auto* slots : {&pick_slots, &drop_slots}) {
            for (std::size_t i = slots->size(); i > 1; --i) std::swap((*slots)[i - 1], (*slots)[rng.below(i)]);
        }
        const std::size_t n_trips = std::max(pick_slots.size(), drop_slots.size());
        for (std::size_t i = 0; i < n_trips; ++i) {
            TripRecord trip;
            trip.pickup_time = t + static_cast<UtcSeconds>(rng.below(1800));
            trip.dropoff_time = trip.pickup_time + 1 +
                                static_cast<UtcSeconds>(rng.below(static_cast<std::uint64_t>(t + 3599 - trip.pickup_time)));
            trip.pickup = i < pick_slots.size() ? point_in_cell(rng, grid.cell_at(pick_slots[i]), grid, 0.0)
                                                : outside_grid(rng, grid);
            trip.dropoff = i < drop_slots.size() ? point_in_cell(rng, grid.cell_at(drop_slots[i]), grid, 0.0)
                                                 : outside_grid(rng, grid);
            b.data.trips.push_back(trip);
        }
    }

    // Check-in posts, drawn by venue popularity and the category's hour profile.
    std::vector<double> cumulative_z;
    double zsum = 0.0;
    for (const auto& p : b.data.pois) cumulative_z.push_back(zsum += static_cast<double>(p.popularity_z));
    auto user = [&rng, &config]() { return "u" + std::to_string(rng.below(static_cast<std::uint64_t>(config.users))); };
    for (int k = 0; k < config.checkins && zsum > 0.0; ++k) {
        const double u = rng.uniform() * zsum;
        const auto idx = static_cast<std::size_t>(
            std::upper_bound(cumulative_z.begin(), cumulative_z.end(), u) - cumulative_z.begin());
        const PoiRecord& poi = b.data.pois[std::min(idx, b.data.pois.size() - 1)];
        const auto c = static_cast<std::size_t>(poi.category);
        const auto day = static_cast<DayNumber>(rng.below(static_cast<std::uint64_t>(config.n_days)));
        const auto hh = static_cast<std::int64_t>(rng.weighted(b.true_popularity.g[c]));
        TweetRecord tw;
        tw.time = b.tz.local_midnight(config.start_day + day) + hh * kSecondsPerHour +
                  static_cast<UtcSeconds>(rng.below(3600));
        const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double radius = rng.uniform(0.0, 30.0);
        const LocalXY at = project(poi.location, grid);
        tw.location = unproject({at.east_m + radius * std::cos(angle), at.north_m + radius * std::sin(angle)}, grid);
        tw.user_id = user();
        char tail[16];
        std::snprintf(tail, sizeof tail, "%06llx", static_cast<unsigned long long>(rng.next() & 0xffffff));
        tw.text = "I'm at " + poi.name + " (New York, NY) http://4sq.com/" + tail;
        b.data.tweets.push_back(std::move(tw));
    }

    // Background chatter.
    for (std::size_t h = 0; h < n_hours; ++h) {
        const UtcSeconds t = b.range.hour_start(static_cast<std::int64_t>(h));
        for (std::size_t ci = 0; ci < n_cells; ++ci) {
            const std::int64_t n = rng.poisson(config.background_tweets_per_cell_hour);
            for (std::int64_t k = 0; k < n; ++k) {
                TweetRecord tw;
                tw.time = t + static_cast<UtcSeconds>(rng.below(3600));
                tw.location = point_in_cell(rng, grid.cell_at(ci), grid, 0.0);
                tw.user_id = user();
                tw.text = kChatter[rng.below(std::size(kChatter))];
                if (rng.uniform() < config.hashtag_share) tw.text += ", #nyc";
                b.data.tweets.push_back(std::move(tw));
            }
        }
    }

    // Event crowds.
    int event_no = 0;
    for (const auto& e : config.event_days) {
        for (std::int64_t hh = 18; hh <= 22; ++hh) {
            const UtcSeconds t = b.tz.local_midnight(config.start_day + e.day_offset) + hh * kSecondsPerHour;
            for (int k = 0; k < config.event_users; ++k) {
                TweetRecord tw;
                tw.time = t + static_cast<UtcSeconds>(rng.below(3600));
                tw.location = point_in_cell(rng, e.cell, grid, 0.0);
                tw.user_id = "e" + std::to_string(event_no) + "_" + std::to_string(hh) + "_" + std::to_string(k);
                tw.text = "big night at the show #event";
                b.data.tweets.push_back(std::move(tw));
            }
        }
        ++event_no;
    }
    std::stable_sort(b.data.tweets.begin(), b.data.tweets.end(),
                     [](const TweetRecord& a, const TweetRecord& c) { return a.time < c.time; });

    // Weather.
    for (int d = 0; d < config.n_days; ++d) {
        WeatherDay w;
        w.date = config.start_day + d;
        const double wsf2 = round1(rng.uniform(4.0, 8.4));
        w.values[static_cast<std::size_t>(WeatherAttribute::WSF2)] = wsf2;
        w.values[static_cast<std::size_t>(WeatherAttribute::WSF5)] = round1(wsf2 * 1.3 + rng.uniform(0.0, 1.0));
        w.values[static_cast<std::size_t>(WeatherAttribute::PRCP)] = round1(rng.uniform(0.0, 2.0));
        w.values[static_cast<std::size_t>(WeatherAttribute::SNOW)] = 0.0;
        if (config.storm && config.storm->day_offset == d) {
            w.values[static_cast<std::size_t>(config.storm->attribute)] = config.storm->magnitude;
        }
        b.data.weather.push_back(w);
    }

    // Collisions.
    for (int d = 0; d < config.n_days; ++d) {
        const UtcSeconds day_start = b.tz.local_midnight(config.start_day + d);
        const UtcSeconds day_len = b.tz.local_midnight(config.start_day + d + 1) - day_start;
        for (std::size_t ci = 0; ci < n_cells; ++ci) {
            const std::int64_t n = rng.poisson(config.collisions_per_cell_day);
            for (std::int64_t k = 0; k < n; ++k) {
                CollisionRecord r;
                r.time = day_start + static_cast<UtcSeconds>(rng.below(static_cast<std::uint64_t>(day_len)));
                r.location = point_in_cell(rng, grid.cell_at(ci), grid, 0.0);
                const double u = rng.uniform();
                r.injured = u < 0.7 ? 0 : (u < 0.9 ? 1 : 2);
                r.killed = rng.uniform() < 0.02 ? 1 : 0;
                b.data.collisions.push_back(r);
            }
        }
    }
    std::stable_sort(b.data.collisions.begin(), b.data.collisions.end(),
                     [](const CollisionRecord& a, const CollisionRecord& c) { return a.time < c.time; });
    return b;
}

std::vector<std::filesystem::path> write_bundle(const SyntheticBundle& bundle,
                                                const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;
    auto open = [&](const char* name) {
        const auto path = dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw DataError("cannot write " + path.string());
        written.push_back(path);
        return out;
    };
    {
        auto out = open("trips.csv");
        write_trips(out, bundle.data.trips);
    }
    {
        auto out = open("pois.csv");
        write_pois(out, bundle.data.pois);
    }
    {
        auto out = open("tweets.csv");
        write_tweets(out, bundle.data.tweets);
    }
    {
        auto out = open("weather.csv");
        write_weather(out, bundle.data.weather);
    }
    {
        auto out = open("collisions.csv");
        write_collisions(out, bundle.data.collisions);
    }
    {
        auto out = open("ground_truth.csv");
        out << "cell_row,cell_col,hour_utc,rate\n";
        const GridSpec& grid = bundle.config.grid;
        for (std::size_t ci = 0; ci < grid.cell_count(); ++ci) {
            const CellId cell = grid.cell_at(ci);
            for (std::int64_t h = 0; h < bundle.range.n_hours; ++h) {
                out << cell.row << ',' << cell.col << ',' << format_iso8601(bundle.range.hour_start(h)) << ','
                    << csv::format_double(bundle.rate_at(cell, h)) << '\n';
            }
        }
    }
    return written;
}

// ---------------------------------------------------------------- oracle

FeatureOracle::FeatureOracle(const Datasets& data, const GridSpec& grid, const TimeZone& tz,
                             HourRange range, const FeatureOptions& options)
    : data_(data), grid_(grid), tz_(tz), options_(options) {
    for (const auto& p : data.pois) poi_cell_.push_back(locate(p.location, grid));
    for (const auto& tw : data.tweets) tweet_cell_.push_back(locate(tw.location, grid));
    for (const auto& r : data.collisions) {
        collision_cell_.push_back(locate(r.location, grid));
        collision_day_.push_back(tz.local_day(r.time));
    }
    // Temporal popularity: scan every venue for every check-in post.
    std::array<std::array<double, 24>, kCategoryCount> counts{};
    for (const auto& tw : data.tweets) {
        const auto venue = checkin_venue(tw.text);
        if (!venue) continue;
        const std::string wanted = normalize_name(*venue);
        const PoiRecord* best = nullptr;
        double best_d = 0.0;
        for (const auto& p : data.pois) {
            const double d = haversine(tw.location, p.location);
            if (d > 100.0) continue;
            if (lcs_similarity(wanted, normalize_name(p.name)) <= 0.8) continue;
            if (best == nullptr || d < best_d || (d == best_d && p.id < best->id)) {
                best = &p;
                best_d = d;
            }
        }
        if (best != nullptr) counts[static_cast<std::size_t>(best->category)][static_cast<std::size_t>(tz.local_hour(tw.time))] += 1.0;
    }
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        double total = 0.0;
        for (double v : counts[c]) total += v;
        for (std::size_t h = 0; h < 24; ++h) g_.g[c][h] = total > 0.0 ? counts[c][h] / total : 0.0;
    }

    // Extreme days per attribute over the window's local days.
    const DayNumber first = tz.local_day(range.t0);
    const DayNumber last = tz.local_day(range.t0 + (range.n_hours - 1) * kSecondsPerHour);
    for (auto attribute : options.weather_attributes) {
        std::vector<std::pair<DayNumber, double>> vals;
        for (const auto& w : data.weather) {
            if (w.date < first || w.date > last) continue;
            if (const auto& v = w.value(attribute)) vals.emplace_back(w.date, *v);
        }
        double sum = 0.0;
        for (const auto& dv : vals) sum += dv.second;
        const double mu = sum / static_cast<double>(vals.size());
        double ss = 0.0;
        for (const auto& dv : vals) ss += (dv.second - mu) * (dv.second - mu);
        const double sigma = std::sqrt(ss / static_cast<double>(vals.size()));
        const auto& absolute = options.thresholds.absolute[static_cast<std::size_t>(attribute)];
        std::vector<std::pair<DayNumber, double>> ev;
        for (const auto& [d, v] : vals) {
            if ((v > mu + 3.0 * sigma || (absolute && v >= *absolute)) && v > 0.0) ev.emplace_back(d, v);
        }
        events_.push_back(std::move(ev));
    }
}

std::vector<double> FeatureOracle::features(CellId cell, UtcSeconds hour_start) const {
    std::vector<double> out;
    const auto hour = static_cast<std::size_t>(tz_.local_hour(hour_start));
    const DayNumber day = tz_.local_day(hour_start);
    auto in_cell = [&](const std::optional<CellId>& c) { return c && *c == cell; };

    std::array<double, kCategoryCount> poi{};
    for (std::size_t i = 0; i < data_.pois.size(); ++i) {
        const auto& p = data_.pois[i];
        if (in_cell(poi_cell_[i])) {
            const auto c = static_cast<std::size_t>(p.category);
            poi[c] += static_cast<double>(p.popularity_z) * g_.g[c][hour];
        }
    }
    out.insert(out.end(), poi.begin(), poi.end());

    std::vector<std::string> users;
    for (std::size_t i = 0; i < data_.tweets.size(); ++i) {
        const auto& tw = data_.tweets[i];
        if (tw.time < hour_start || tw.time >= hour_start + 3600) continue;
        if (options_.hashtag_only && tw.text.find('#') == std::string::npos) continue;
        if (!in_cell(tweet_cell_[i])) continue;
        if (std::find(users.begin(), users.end(), tw.user_id) == users.end()) users.push_back(tw.user_id);
    }
    out.push_back(static_cast<double>(users.size()));

    const double alpha = options_.decay.alpha;
    const double horizon = options_.decay.horizon_days;
    for (const auto& ev : events_) {
        double f = 0.0;
        for (const auto& [d, m] : ev) {
            const double lag = static_cast<double>(day - d);
            if (lag < 0.0 || lag >= horizon) continue;
            f += std::max(0.0, m - m / std::pow(horizon, alpha) * std::pow(lag, alpha));
        }
        out.push_back(f);
    }
    if (options_.include_raw_weather) {
        for (auto attribute : options_.weather_attributes) {
            double value = 0.0;
            DayNumber best = 0;
            bool found = false;
            for (const auto& w : data_.weather) {
                const auto& v = w.value(attribute);
                if (!v || w.date > day) continue;
                if (!found || w.date > best) {
                    best = w.date;
                    value = *v;
                    found = true;
                }
            }
            out.push_back(value);
        }
    }

    double collision = 0.0;
    for (std::size_t i = 0; i < data_.collisions.size(); ++i) {
        if (collision_day_[i] == day && in_cell(collision_cell_[i])) {
            const auto& r = data_.collisions[i];
            collision += static_cast<double>(r.injured + r.killed + 1);
        }
    }
    out.push_back(collision);
    return out;
}

std::vector<double> oracle_features(const SyntheticBundle& bundle, CellId cell,
                                    UtcSeconds hour_start, const FeatureOptions& options) {
    const FeatureOracle oracle(bundle.data, bundle.config.grid, bundle.tz, bundle.range, options);
    return oracle.features(cell, hour_start);
}

}  // namespace urbanpulse
