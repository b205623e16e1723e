#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "urbanpulse/config.hpp"
#include "urbanpulse/errors.hpp"
#include "urbanpulse/pipeline.hpp"

using namespace urbanpulse;
namespace fs = std::filesystem;

namespace {

const char* kBase =
    "# test city\n"
    "data.trips = trips.csv\n"
    "data.pois = pois.csv\n"
    "data.tweets = tweets.csv\n"
    "data.weather = weather.csv\n"
    "data.collisions = collisions.csv\n"
    "grid.origin_lat = 40.7\n"
    "grid.origin_lon = -74.02   # SW corner\n"
    "grid.n_rows = 3\n"
    "grid.n_cols = 4\n"
    "window.start = 2012-10-01\n"
    "window.end = 2012-10-22\n";

EnvLookup env_of(std::map<std::string, std::string> vars) {
    return [vars](const std::string& k) -> std::optional<std::string> {
        if (auto it = vars.find(k); it != vars.end()) return it->second;
        return std::nullopt;
    };
}

PipelineConfig parse(const std::string& text, const EnvLookup& env = env_of({})) {
    std::istringstream in(text);
    return parse_config(in, "/data/city", env);
}

struct Run {
    int code;
    std::string out, err;
};

Run run_cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run(args, out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("config defaults and paths") {
    const auto cfg = parse(kBase);
    CHECK(cfg.trips == fs::path("/data/city/trips.csv"));
    CHECK(cfg.output_dir == fs::path("/data/city/out"));
    CHECK(cfg.grid.cell_size_m() == 500.0);
    CHECK(cfg.grid.n_cols() == 4);
    CHECK(cfg.window_days() == 21);
    CHECK(cfg.timezone == "America/New_York");
    CHECK(cfg.train_days == 14);
    CHECK(cfg.test_days == 7);
    CHECK(cfg.model.lambda == 1.0);
    CHECK(cfg.model.kernel.degree == 2);
    CHECK_FALSE(cfg.model.kernel.gamma.has_value());
    CHECK(cfg.model.kernel.coef0 == 1.0);
    CHECK(cfg.features.decay.alpha == 2.0);
    CHECK(cfg.features.decay.horizon_days == 3.0);
    CHECK(cfg.features.thresholds.absolute[0] == 33.0);
    CHECK_FALSE(cfg.features.thresholds.absolute[2].has_value());
    CHECK_FALSE(cfg.features.hashtag_only);
    CHECK(cfg.features.weather_attributes.size() == 3);
    CHECK(cfg.target == Target::dropoffs);
    CHECK(cfg.arma_p == 24);
    CHECK(cfg.arma_q == 1);
}

TEST_CASE("config overrides") {
    const auto file = parse(std::string(kBase) + "model.lambda = 0.5\nthresholds.PRCP = 50\nfeatures.target = pickups\n");
    CHECK(file.model.lambda == 0.5);
    CHECK(file.features.thresholds.absolute[2] == 50.0);
    CHECK(file.target == Target::pickups);

    const auto env = parse(kBase, env_of({{"URBANPULSE_MODEL_LAMBDA", "3"}, {"URBANPULSE_THRESHOLDS_WSF2", "none"}}));
    CHECK(env.model.lambda == 3.0);
    CHECK_FALSE(env.features.thresholds.absolute[0].has_value());
    CHECK(env.hash() != parse(kBase).hash());
    CHECK(parse(kBase).hash() == parse(kBase).hash());
    CHECK(parse(kBase).hash().size() == 16);
}

TEST_CASE("config errors name the key") {
    auto message = [](const std::string& text) {
        try {
            parse(text);
        } catch (const ConfigError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("grid.origin_lat = 1\n").find("data.trips") != std::string::npos);
    CHECK(message(std::string(kBase) + "model.bogus = 1\n").find("model.bogus") != std::string::npos);
    CHECK(message(std::string(kBase) + "model.lambda = abc\n").find("model.lambda") != std::string::npos);
    CHECK(message(std::string(kBase) + "split.train_days = 20\n").find("split") != std::string::npos);
    CHECK(message(std::string(kBase) + "no equals sign\n").find("line") != std::string::npos);
    CHECK(message(std::string(kBase) + "decay.alpha = 1\n").find("decay.alpha") != std::string::npos);
}

TEST_CASE("parallel_for covers every index once") {
    std::vector<int> hits(1000, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) CHECK(h == 1);
    CHECK_THROWS_AS(parallel_for(10, 3, [](std::size_t i) {
                        if (i == 5) throw DataError("boom");
                    }),
                    DataError);
}

TEST_CASE("usage errors exit 2") {
    CHECK(run_cli({}).code == 2);
    const auto bad = run_cli({"frobnicate"});
    CHECK(bad.code == 2);
    CHECK(bad.err.find("ingest") != std::string::npos);
    CHECK(run_cli({"fit"}).code == 2);
    CHECK(run_cli({"--help"}).code == 0);
}

TEST_CASE("small pipeline run") {
    const fs::path dir = fs::temp_directory_path() / "urbanpulse_cli_test";
    fs::remove_all(dir);
    const auto synth = run_cli({"synth", "--out", dir.string(), "--days", "9", "--rows", "2", "--cols", "3"});
    REQUIRE(synth.code == 0);
    CHECK(fs::exists(dir / "ground_truth.csv"));
    const std::string conf = (dir / "pipeline.conf").string();

    for (const char* cmd : {"ingest", "build-features", "fit", "evaluate", "ablate", "forecast"}) {
        const auto r = run_cli({cmd, "--config", conf, "--threads", "2"});
        INFO(cmd << ": " << r.err);
        REQUIRE(r.code == 0);
        CHECK(r.out.find(std::string(cmd) + ".meta") != std::string::npos);
    }
    const fs::path out = dir / "out";
    CHECK(fs::exists(out / "features" / "cell_1_2.csv"));
    CHECK(fs::exists(out / "models" / "cell_0_0.krr"));
    CHECK(fs::exists(out / "plot_forecast.csv"));
    CHECK(slurp(out / "ingest" / "line_errors.csv") == "dataset,line,reason\n");

    std::istringstream ablation(slurp(out / "ablation.csv"));
    std::string line;
    int rows = -1;
    while (std::getline(ablation, line)) ++rows;
    CHECK(rows == 5);

    const std::string before = slurp(out / "metrics_by_cell.csv");
    REQUIRE(run_cli({"evaluate", "--config", conf}).code == 0);
    CHECK(slurp(out / "metrics_by_cell.csv") == before);
    CHECK(slurp(out / "evaluate.meta").find("config_hash=") != std::string::npos);

    // Missing input file: configuration error naming the key.
    fs::remove(dir / "tweets.csv");
    const auto missing = run_cli({"ingest", "--config", conf});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("data.tweets") != std::string::npos);

    // Bad header: data error.
    {
        std::ofstream f(dir / "tweets.csv");
        f << "when,who\n";
    }
    CHECK(run_cli({"ingest", "--config", conf}).code == 1);
    fs::remove_all(out / "features");
    CHECK(run_cli({"fit", "--config", conf}).code == 1);
    fs::remove_all(dir);
}
