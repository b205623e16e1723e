#include "urbanpulse/pipeline.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include "urbanpulse/baseline.hpp"
#include "urbanpulse/config.hpp"
#include "urbanpulse/csv.hpp"
#include "urbanpulse/errors.hpp"
#include "urbanpulse/eval.hpp"
#include "urbanpulse/features.hpp"
#include "urbanpulse/ingest.hpp"
#include "urbanpulse/model.hpp"
#include "urbanpulse/synth.hpp"

namespace fs = std::filesystem;

namespace urbanpulse {

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
    std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads)
                                      : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < n; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = n;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

namespace {

class Session {
public:
    Session(std::string command, PipelineConfig cfg, int threads, std::ostream& out)
        : command_(std::move(command)), cfg_(std::move(cfg)), threads_(threads), out_(out) {}

    const PipelineConfig& cfg() const { return cfg_; }
    int threads() const { return threads_ > 0 ? threads_ : cfg_.threads; }

    void write(const fs::path& path, const std::string& content) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file) throw DataError("cannot write " + path.string());
        file << content;
        if (!file) throw DataError("write failed: " + path.string());
        out_ << path.string() << '\n';
    }

    void write_meta() {
        write(cfg_.output_dir / (command_ + ".meta"),
              "command=" + command_ + "\nconfig_hash=" + cfg_.hash() + "\n");
    }

private:
    std::string command_;
    PipelineConfig cfg_;
    int threads_;
    std::ostream& out_;
};

// ---------------------------------------------------------------- data

struct IngestSummary {
    std::string dataset;
    std::size_t lines_read{0};
    std::size_t records{0};
    std::vector<LineError> errors;
};

void check_paths(const PipelineConfig& cfg) {
    for (const auto& [key, path] : dataset_paths(cfg)) {
        if (!fs::is_regular_file(path)) throw ConfigError(key + ": file not found: " + path.string());
    }
}

template <class Parse, class Record>
void load_one(const fs::path& path, const std::string& name, Parse parse, std::vector<Record>& records,
              std::vector<IngestSummary>& summary) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    auto result = parse(in);
    summary.push_back({name, result.lines_read, result.records.size(), std::move(result.errors)});
    records = std::move(result.records);
}

Datasets load_data(const PipelineConfig& cfg, std::vector<IngestSummary>& summary) {
    check_paths(cfg);
    Datasets data;
    load_one(cfg.trips, "trips", parse_trips, data.trips, summary);
    load_one(cfg.pois, "pois", parse_pois, data.pois, summary);
    load_one(cfg.tweets, "tweets", parse_tweets, data.tweets, summary);
    load_one(cfg.weather, "weather", parse_weather, data.weather, summary);
    load_one(cfg.collisions, "collisions", parse_collisions, data.collisions, summary);
    return data;
}

std::string cell_stem(CellId c) { return "cell_" + std::to_string(c.row) + "_" + std::to_string(c.col); }

fs::path feature_path(const PipelineConfig& cfg, CellId c) {
    return cfg.output_dir / "features" / (cell_stem(c) + ".csv");
}

fs::path model_path(const PipelineConfig& cfg, CellId c) {
    return cfg.output_dir / "models" / (cell_stem(c) + ".krr");
}

FeatureMatrix read_features(const PipelineConfig& cfg, CellId c) {
    const fs::path path = feature_path(cfg, c);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing feature file " + path.string() + " (run build-features first)");
    FeatureMatrix m = read_feature_csv(in);
    const auto need = cfg.split().train_hours + cfg.split().test_hours;
    if (m.X.rows() < need) {
        throw DataError(path.string() + ": " + std::to_string(m.X.rows()) + " rows, split needs " +
                        std::to_string(need));
    }
    return m;
}

KrrModel read_model(const PipelineConfig& cfg, CellId c) {
    const fs::path path = model_path(cfg, c);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("missing model file " + path.string() + " (run fit first)");
    return load_model(in);
}

std::string metrics_fields(const MetricsReport& r) {
    return csv::format_double(r.rmse) + "," + format_metric(r.mre) + "," + format_metric(r.r2);
}

// ---------------------------------------------------------------- commands

int cmd_ingest(Session& s) {
    std::vector<IngestSummary> summary;
    load_data(s.cfg(), summary);
    std::ostringstream report, errors;
    report << "dataset,lines_read,records,errors\n";
    errors << "dataset,line,reason\n";
    std::size_t total_errors = 0;
    for (const auto& d : summary) {
        report << d.dataset << ',' << d.lines_read << ',' << d.records << ',' << d.errors.size() << '\n';
        for (const auto& e : d.errors) errors << d.dataset << ',' << e.line_no << ',' << csv::quote(e.reason) << '\n';
        total_errors += d.errors.size();
    }
    s.write(s.cfg().output_dir / "ingest" / "ingest_report.csv", report.str());
    s.write(s.cfg().output_dir / "ingest" / "line_errors.csv", errors.str());
    s.write_meta();
    return kExitOk;
}

int cmd_build_features(Session& s, std::ostream& err) {
    const auto& cfg = s.cfg();
    std::vector<IngestSummary> summary;
    const Datasets data = load_data(cfg, summary);
    std::size_t bad = 0;
    for (const auto& d : summary) bad += d.errors.size();
    if (bad > 0) err << "warning: skipped " << bad << " malformed input lines (see ingest)\n";

    const TimeZone tz = TimeZone::load(cfg.timezone);
    const HourRange range = cfg.hours(tz);
    const FeatureTables tables = build_feature_tables(data, cfg.grid, tz, range, cfg.features);
    const std::size_t n = cfg.grid.cell_count();
    std::vector<std::string> files(n);
    parallel_for(n, s.threads(), [&](std::size_t i) {
        std::ostringstream o;
        write_feature_csv(o, assemble_matrix(cfg.grid.cell_at(i), tables, range), cfg.target);
        files[i] = o.str();
    });
    for (std::size_t i = 0; i < n; ++i) s.write(feature_path(cfg, cfg.grid.cell_at(i)), files[i]);

    std::ostringstream plot;
    plot << "series,hour,value\n";
    for (std::size_t c = 0; c < kCategoryCount; ++c) {
        for (int h = 0; h < 24; ++h) {
            plot << category_label(static_cast<PoiCategory>(c)) << ',' << h << ','
                 << csv::format_double(tables.popularity.g[c][static_cast<std::size_t>(h)]) << '\n';
        }
    }
    s.write(cfg.output_dir / "plot_popularity.csv", plot.str());
    s.write_meta();
    return kExitOk;
}

int cmd_fit(Session& s) {
    const auto& cfg = s.cfg();
    const auto train = cfg.split().train_hours;
    const std::size_t n = cfg.grid.cell_count();
    std::vector<std::string> files(n);
    parallel_for(n, s.threads(), [&](std::size_t i) {
        const FeatureMatrix m = read_features(cfg, cfg.grid.cell_at(i));
        const KrrModel model = fit_krr(m.X.topRows(train), m.y(cfg.target).head(train), cfg.model.lambda,
                                       cfg.model.kernel);
        std::ostringstream o;
        save_model(o, model);
        files[i] = o.str();
    });
    for (std::size_t i = 0; i < n; ++i) s.write(model_path(cfg, cfg.grid.cell_at(i)), files[i]);
    s.write_meta();
    return kExitOk;
}

int cmd_evaluate(Session& s) {
    const auto& cfg = s.cfg();
    const auto split = cfg.split();
    const std::size_t n = cfg.grid.cell_count();
    std::vector<MetricsReport> train(n), test(n);
    std::vector<Eigen::VectorXd> actual(n), predicted(n);
    parallel_for(n, s.threads(), [&](std::size_t i) {
        const CellId cell = cfg.grid.cell_at(i);
        const FeatureMatrix m = read_features(cfg, cell);
        const KrrModel model = read_model(cfg, cell);
        const Eigen::VectorXd& y = m.y(cfg.target);
        const Eigen::VectorXd yhat = model.predict(m.X.topRows(split.train_hours + split.test_hours));
        train[i] = metrics(y.head(split.train_hours), yhat.head(split.train_hours));
        actual[i] = y.segment(split.train_hours, split.test_hours);
        predicted[i] = yhat.segment(split.train_hours, split.test_hours);
        test[i] = metrics(actual[i], predicted[i]);
    });

    std::ostringstream by_cell;
    by_cell << "cell_row,cell_col,rmse_train,mre_train,r2_train,rmse_test,mre_test,r2_test\n";
    for (std::size_t i = 0; i < n; ++i) {
        const CellId c = cfg.grid.cell_at(i);
        by_cell << c.row << ',' << c.col << ',' << metrics_fields(train[i]) << ',' << metrics_fields(test[i]) << '\n';
    }
    s.write(cfg.output_dir / "metrics_by_cell.csv", by_cell.str());

    std::ostringstream city;
    city << "split,rmse,mre,r2,cells\n";
    city << "train," << metrics_fields(mean_metrics(train)) << ',' << n << '\n';
    city << "test," << metrics_fields(mean_metrics(test)) << ',' << n << '\n';
    s.write(cfg.output_dir / "metrics_citywide.csv", city.str());

    std::ostringstream plot;
    plot << "series,hour,value\n";
    for (const auto& [label, series] : {std::pair{"actual", &actual}, std::pair{"predicted", &predicted}}) {
        for (std::int64_t h = 0; h < split.test_hours; ++h) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += (*series)[i](h);
            plot << label << ',' << h << ',' << csv::format_double(total) << '\n';
        }
    }
    s.write(cfg.output_dir / "plot_predictions.csv", plot.str());
    s.write_meta();
    return kExitOk;
}

int cmd_ablate(Session& s) {
    const auto& cfg = s.cfg();
    const std::size_t n = cfg.grid.cell_count();
    std::vector<AblationReport> reports(n);
    parallel_for(n, s.threads(), [&](std::size_t i) {
        reports[i] = ablation(read_features(cfg, cfg.grid.cell_at(i)), cfg.target, cfg.split(), cfg.model);
    });
    const AblationReport mean = mean_report(reports);
    std::ostringstream csv_out, table;
    write_ablation_csv(csv_out, mean);
    write_ablation_table(table, mean);
    s.write(cfg.output_dir / "ablation.csv", csv_out.str());
    s.write(cfg.output_dir / "ablation.txt", table.str());
    s.write_meta();
    return kExitOk;
}

int cmd_forecast(Session& s) {
    const auto& cfg = s.cfg();
    const auto split = cfg.split();
    const std::size_t n = cfg.grid.cell_count();
    const FeatureGroup poi_only[] = {FeatureGroup::P};
    struct CellForecast {
        Eigen::VectorXd actual, krr;
        std::optional<Eigen::VectorXd> arma;
        MetricsReport krr_report;
        std::optional<MetricsReport> arma_report;
    };
    std::vector<CellForecast> cells(n);
    parallel_for(n, s.threads(), [&](std::size_t i) {
        const FeatureMatrix m = read_features(cfg, cfg.grid.cell_at(i));
        const Eigen::VectorXd& y = m.y(cfg.target);
        const Eigen::MatrixXd X = select_columns(m.X, m.columns_in(poi_only));
        const KrrModel model =
            fit_krr(X.topRows(split.train_hours), y.head(split.train_hours), cfg.model.lambda, cfg.model.kernel);
        CellForecast& f = cells[i];
        f.actual = y.segment(split.train_hours, split.test_hours);
        f.krr = model.predict(X.middleRows(split.train_hours, split.test_hours));
        f.krr_report = metrics(f.actual, f.krr);
        try {
            const std::vector<double> history(y.data(), y.data() + split.train_hours);
            const ArmaModel arma = fit_arma(history, cfg.arma_p, cfg.arma_q);
            const auto fc = forecast_arma(arma, history, static_cast<int>(split.test_hours));
            f.arma = Eigen::Map<const Eigen::VectorXd>(fc.data(), static_cast<Eigen::Index>(fc.size()));
            f.arma_report = metrics(f.actual, *f.arma);
        } catch (const DataError&) {
        } catch (const NumericalError&) {
        }
    });

    std::ostringstream per_cell;
    per_cell << "cell_row,cell_col,rmse_krr,mre_krr,r2_krr,rmse_arma,mre_arma,r2_arma\n";
    std::vector<MetricsReport> krr_reports, arma_reports;
    for (std::size_t i = 0; i < n; ++i) {
        const CellId c = cfg.grid.cell_at(i);
        per_cell << c.row << ',' << c.col << ',' << metrics_fields(cells[i].krr_report) << ',';
        per_cell << (cells[i].arma_report ? metrics_fields(*cells[i].arma_report) : std::string("NA,NA,NA")) << '\n';
        krr_reports.push_back(cells[i].krr_report);
        if (cells[i].arma_report) arma_reports.push_back(*cells[i].arma_report);
    }
    s.write(cfg.output_dir / "forecast.csv", per_cell.str());

    std::ostringstream summary;
    summary << "model,rmse,mre,r2,cells\n";
    summary << "krr_poi," << metrics_fields(mean_metrics(krr_reports)) << ',' << krr_reports.size() << '\n';
    if (arma_reports.empty()) {
        summary << "arma,NA,NA,NA,0\n";
    } else {
        summary << "arma," << metrics_fields(mean_metrics(arma_reports)) << ',' << arma_reports.size() << '\n';
    }
    s.write(cfg.output_dir / "forecast_summary.csv", summary.str());

    // Citywide totals over the cells where both models produced a forecast.
    std::ostringstream plot;
    plot << "series,hour,value\n";
    for (const char* series : {"actual", "krr_poi", "arma"}) {
        for (std::int64_t h = 0; h < split.test_hours; ++h) {
            double total = 0.0;
            for (const auto& f : cells) {
                if (!f.arma) continue;
                const std::string_view name(series);
                total += name == "actual" ? f.actual(h) : name == "krr_poi" ? f.krr(h) : (*f.arma)(h);
            }
            plot << series << ',' << h << ',' << csv::format_double(total) << '\n';
        }
    }
    s.write(cfg.output_dir / "plot_forecast.csv", plot.str());
    s.write_meta();
    return kExitOk;
}

struct SynthOptions {
    std::string out;
    std::uint64_t seed{SynthConfig{}.seed};
    int days{SynthConfig{}.n_days};
    int rows{10};
    int cols{10};
    double noise_sd{SynthConfig{}.noise_sd};
};

int cmd_synth(const SynthOptions& o, std::ostream& out) {
    SynthConfig config;
    config.seed = o.seed;
    config.n_days = o.days;
    config.noise_sd = o.noise_sd;
    config.grid = GridSpec(config.grid.origin(), config.grid.cell_size_m(), o.rows, o.cols);
    const SyntheticBundle bundle = generate_city(config);
    const fs::path dir(o.out);
    for (const auto& p : write_bundle(bundle, dir)) out << p.string() << '\n';

    const int test_days = std::min(7, config.n_days / 3);
    std::ostringstream conf;
    conf << "# synthetic city, seed " << config.seed << "\n"
         << "data.trips = trips.csv\n"
         << "data.pois = pois.csv\n"
         << "data.tweets = tweets.csv\n"
         << "data.weather = weather.csv\n"
         << "data.collisions = collisions.csv\n"
         << "grid.origin_lat = " << csv::format_double(config.grid.origin().lat) << "\n"
         << "grid.origin_lon = " << csv::format_double(config.grid.origin().lon) << "\n"
         << "grid.cell_size_m = " << csv::format_double(config.grid.cell_size_m()) << "\n"
         << "grid.n_rows = " << config.grid.n_rows() << "\n"
         << "grid.n_cols = " << config.grid.n_cols() << "\n"
         << "window.start = " << format_date(config.start_day) << "\n"
         << "window.end = " << format_date(config.start_day + config.n_days) << "\n"
         << "window.timezone = " << config.timezone << "\n"
         << "split.train_days = " << config.n_days - test_days << "\n"
         << "split.test_days = " << test_days << "\n"
         << "output.dir = out\n";
    const fs::path conf_path = dir / "pipeline.conf";
    {
        std::ofstream f(conf_path, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write " + conf_path.string());
        f << conf.str();
    }
    out << conf_path.string() << '\n';
    const PipelineConfig cfg = load_config(conf_path, [](const std::string&) { return std::nullopt; });
    const fs::path meta = dir / "synth.meta";
    {
        std::ofstream f(meta, std::ios::binary | std::ios::trunc);
        f << "command=synth\nseed=" << config.seed << "\nconfig_hash=" << cfg.hash() << "\n";
    }
    out << meta.string() << '\n';
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Urban traffic prediction from POI, social, weather and collision data", "urbanpulse"};
    app.require_subcommand(1);

    std::string config_file, out_dir;
    int threads = 0;
    struct Command {
        const char* name;
        const char* help;
    };
    const Command commands[] = {
        {"ingest", "Validate the input datasets and report line errors"},
        {"build-features", "Write per-cell hourly feature CSVs"},
        {"fit", "Train per-cell kernel ridge models on the training days"},
        {"evaluate", "Score the fitted models on train and test days"},
        {"ablate", "Leave-one-group-out feature ablation"},
        {"forecast", "Compare POI-only kernel ridge with an ARMA baseline"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("-c,--config", config_file, "Pipeline config file")->required();
        sub->add_option("-o,--out", out_dir, "Output directory (overrides output.dir)");
        sub->add_option("-j,--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
        subs.push_back(sub);
    }
    SynthOptions synth;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic city bundle");
    synth_cmd->add_option("-o,--out", synth.out, "Output directory")->required();
    synth_cmd->add_option("--seed", synth.seed, "Random seed");
    synth_cmd->add_option("--days", synth.days, "Number of days (>= 7)");
    synth_cmd->add_option("--rows", synth.rows, "Grid rows");
    synth_cmd->add_option("--cols", synth.cols, "Grid columns");
    synth_cmd->add_option("--noise-sd", synth.noise_sd, "Count noise scale (0: noiseless)");

    std::vector<std::string> argv_store{"urbanpulse"};
    argv_store.insert(argv_store.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& a : argv_store) argv.push_back(a.data());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return kExitConfigError;
    }

    try {
        if (synth_cmd->parsed()) return cmd_synth(synth, out);
        std::size_t which = 0;
        while (!subs[which]->parsed()) ++which;
        PipelineConfig cfg = load_config(config_file);
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        Session s(commands[which].name, std::move(cfg), threads, out);
        switch (which) {
            case 0: return cmd_ingest(s);
            case 1: return cmd_build_features(s, err);
            case 2: return cmd_fit(s);
            case 3: return cmd_evaluate(s);
            case 4: return cmd_ablate(s);
            default: return cmd_forecast(s);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitConfigError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitDataError;
    }
}

}  // namespace urbanpulse
