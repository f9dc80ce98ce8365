#include "pairtrade/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <functional>
#include <ios>
#include <ostream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#include "pairtrade/cointegration.hpp"
#include "pairtrade/market_data.hpp"
#include "pairtrade/pair_screen.hpp"
#include "pairtrade/report_io.hpp"

namespace pairtrade::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

const char* to_string(Phase phase) {
    switch (phase) {
        case Phase::Setup: return "setup";
        case Phase::Screen: return "screen";
        case Phase::Coint: return "coint";
        case Phase::Optimize: return "optimize";
        case Phase::Backtest: return "backtest";
        case Phase::Report: return "report";
    }
    return "unknown";
}

int exit_code_for(const std::exception& e) {
    if (const auto* p = dynamic_cast<const PhaseError*>(&e)) return p->exit_code();
    if (dynamic_cast<const PitViolation*>(&e)) return 3;
    if (dynamic_cast<const DataError*>(&e)) return 2;
    if (dynamic_cast<const NumericalError*>(&e)) return 4;
    if (dynamic_cast<const ConfigError*>(&e)) return 1;
    if (dynamic_cast<const fs::filesystem_error*>(&e)) return 2;
    if (dynamic_cast<const std::ios_base::failure*>(&e)) return 2;
    return 1;
}

PhaseError::PhaseError(Phase phase, const std::exception& cause)
    : Error(std::string("[") + to_string(phase) + "] " + cause.what()),
      phase_(phase),
      exit_code_(exit_code_for(cause)) {}

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw Error("sha256: digest failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json window_json(const WindowSpec& w) {
    return json{{"start", format_date(w.start)}, {"end", format_date(w.end)}};
}

json thresholds_json(const Thresholds& t) {
    return json{{"theta_in", t.theta_in()}, {"theta_out", t.theta_out()}};
}

const char* mode_name(ReturnMode m) {
    return m == ReturnMode::Compounded ? "compounded" : "arithmetic";
}

template <typename Fn>
std::string render(Fn&& fn) {
    std::ostringstream os;
    fn(os);
    return os.str();
}

}  // namespace

RunWriter::RunWriter(fs::path dir, std::string command, std::vector<Phase> expected)
    : dir_(std::move(dir)), command_(std::move(command)), expected_(std::move(expected)) {
    fs::create_directories(dir_);
}

void RunWriter::write(const std::string& relative_path, const std::string& content) {
    const fs::path target = dir_ / relative_path;
    fs::create_directories(target.parent_path());
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + target.string());
    out << content;
    out.close();
    if (!out) throw DataError("failed writing " + target.string());
    hashes_[relative_path] = sha256_hex(content);
}

void RunWriter::phase_done(Phase phase) { done_.push_back(phase); }

void RunWriter::finish(const std::optional<PhaseError>& failure, std::uint64_t seed) {
    json m;
    m["command"] = command_;
    m["status"] = failure ? "incomplete" : "complete";
    m["seed"] = seed;
    auto names = [](const std::vector<Phase>& phases) {
        auto arr = json::array();
        for (auto p : phases) arr.push_back(to_string(p));
        return arr;
    };
    m["phases_expected"] = names(expected_);
    m["phases_completed"] = names(done_);
    if (failure) {
        m["failed_phase"] = to_string(failure->phase());
        m["error"] = failure->what();
    }
    auto files = json::array();
    for (const auto& [path, hash] : hashes_) files.push_back({{"path", path}, {"sha256", hash}});
    m["files"] = std::move(files);
    m["generated_at"] = utc_timestamp();

    std::ofstream out(dir_ / "run_manifest.json", std::ios::binary | std::ios::trunc);
    out << m.dump(2) << '\n';
}

namespace {

/// Shared state threaded through the phases of one invocation.
struct Run {
    const RunConfig& cfg;
    RunWriter& out;
    std::ostream& log;
    PricePanel panel;
    std::optional<SplitConfig> splits;
    std::vector<PairKey> screened;
    std::vector<CointResult> selected;
    std::optional<UniverseOptimization> optimization;
};

void do_setup(Run& run) {
    LoadOptions load;
    load.max_missing_fraction = run.cfg.max_missing_fraction;
    if (run.cfg.data_path.empty()) throw ConfigError("no data file given (--data or data = ...)");
    auto loaded = load_panel(run.cfg.data_path, load);
    run.panel = std::move(loaded.panel);

    SplitConfig splits = run.cfg.splits
                             ? *run.cfg.splits
                             : default_splits(run.panel.dates(), run.cfg.training_days,
                                              run.cfg.test_days);
    splits.validate();
    run.splits = splits;

    json d;
    d["data_file"] = run.cfg.data_path.filename().string();
    d["rows"] = run.panel.rows();
    d["tickers"] = run.panel.cols();
    d["first_date"] = format_date(run.panel.dates().front());
    d["last_date"] = format_date(run.panel.dates().back());
    d["dropped_tickers"] = loaded.dropped_tickers;
    d["dropped_leading_rows"] = loaded.dropped_leading_rows;
    json s;
    s["pair_selection"] = window_json(splits.pair_selection);
    s["training"] = window_json(splits.training);
    if (splits.validation) s["validation"] = window_json(*splits.validation);
    s["test"] = window_json(splits.test);
    d["splits"] = std::move(s);
    run.out.write("data_summary.json", d.dump(2) + "\n");
    run.log << "loaded " << run.panel.cols() << " tickers x " << run.panel.rows() << " days";
    if (!loaded.dropped_tickers.empty()) {
        run.log << " (dropped " << loaded.dropped_tickers.size() << " sparse tickers)";
    }
    run.log << '\n';
}

void do_screen(Run& run) {
    const auto& cfg = run.cfg;
    std::optional<std::vector<PairKey>> candidates;
    if (cfg.sample_pairs > 0) {
        const auto all = enumerate_pairs(run.panel.tickers());
        candidates = sample_pairs(all, cfg.sample_pairs, cfg.seed);
    }
    ScreenOptions opts{cfg.correlation_threshold, cfg.threads};
    std::vector<ScreenResult> results;
    if (cfg.transform) {
        results = screen_universe_transformed(run.panel, run.splits->pair_selection, opts,
                                              cfg.transform_options, candidates);
    } else {
        const ReturnPanel returns = compute_returns(run.panel);
        results = screen_universe(returns, run.splits->pair_selection, opts, candidates);
    }
    const auto hist = correlation_histogram(results, 40);
    run.out.write("screen_results.csv", render([&](std::ostream& os) {
                      io::write_screen_results(os, results);
                  }));
    run.out.write("correlation_histogram.csv",
                  render([&](std::ostream& os) { io::write_histogram(os, hist); }));
    run.screened.clear();
    for (const auto& r : results) {
        if (r.passed) run.screened.push_back(r.pair);
    }
    run.log << "screen: " << results.size() << " pairs, " << run.screened.size()
            << " above correlation " << cfg.correlation_threshold << '\n';
}

void do_coint(Run& run) {
    const auto& cfg = run.cfg;
    if (run.screened.empty()) {
        throw DataError("no pair passed the correlation screen");
    }
    CointFilterOptions opts;
    opts.test.with_intercept = cfg.with_intercept;
    opts.test.surface = cfg.surface;
    opts.use_returns = cfg.coint_on_returns;
    opts.threads = cfg.threads;
    const auto results = coint_filter(run.panel, run.splits->pair_selection, run.screened,
                                      cfg.cointegration_threshold, opts);
    run.out.write("coint_results.csv", render([&](std::ostream& os) {
                      io::write_coint_results(os, results);
                  }));
    run.selected.clear();
    for (const auto& r : results) {
        if (!r.cointegrated) continue;
        if (cfg.max_pairs > 0 && run.selected.size() >= cfg.max_pairs) break;
        run.selected.push_back(r);
    }
    run.log << "coint: " << run.selected.size() << " of " << results.size()
            << " pairs cointegrated at p < " << cfg.cointegration_threshold << '\n';
    if (run.selected.empty()) throw DataError("no cointegrated pairs");
}

void do_optimize(Run& run) {
    const auto& cfg = run.cfg;
    const auto& splits = *run.splits;
    std::vector<SpreadModel> models;
    for (const auto& c : run.selected) {
        models.push_back(fit_spread_model(run.panel, c.pair, splits.pair_selection));
    }
    auto result = optimize_universe(run.panel, models, splits, cfg.search_space,
                                    cfg.optimize_options());

    run.out.write("optimization_results.csv", render([&](std::ostream& os) {
                      io::write_optimization_results(os, result.results);
                  }));
    const auto bt = cfg.backtest_options();
    for (std::size_t i = 0; i < result.results.size(); ++i) {
        const auto& r = result.results[i];
        if (r.error) continue;
        const auto label = r.pair.label();
        run.out.write("trials/trials_" + label + ".csv",
                      render([&](std::ostream& os) { io::write_trials(os, *r.search); }));
        // In-window view of the chosen thresholds: pair-selection model
        // traded over the training window.
        const auto model = std::find_if(models.begin(), models.end(), [&](const SpreadModel& m) {
            return m.pair == r.pair;
        });
        const auto report = run_backtest(run.panel, *model, *r.selected, splits.training, bt);
        run.out.write("training/backtest_" + label + ".csv",
                      render([&](std::ostream& os) { io::write_backtest(os, report); }));
    }

    json s;
    s["method"] = to_string(cfg.method);
    s["budget"] = cfg.method == SearchMethod::Grid ? 0 : cfg.budget;
    s["seed"] = cfg.seed;
    s["objective_mode"] = cfg.objective_mode == ObjectiveMode::RefitSplit ? "refit_split" : "inherit";
    s["objective"] = cfg.objective_metric == ObjectiveMetric::Sharpe ? "sharpe" : "cumulative_return";
    s["pairs"] = result.results.size();
    s["failures"] = result.failures;
    s["degenerate"] = result.degenerate;
    s["thresholds"] = io::to_json(result.stats);
    run.out.write("optimization_summary.json", s.dump(2) + "\n");
    run.log << "optimize: " << result.stats.count << " pairs, mean theta_in "
            << result.stats.theta_in_mean << ", mean theta_out " << result.stats.theta_out_mean
            << '\n';
    run.optimization = std::move(result);
}

void write_portfolio_files(Run& run, const std::string& dir, const PortfolioReport& report) {
    for (const auto& r : report.reports) {
        const auto label = r.pair.label();
        run.out.write(dir + "/signals_" + label + ".csv",
                      render([&](std::ostream& os) { io::write_signals(os, r.signals); }));
        run.out.write(dir + "/trades_" + label + ".csv",
                      render([&](std::ostream& os) { io::write_trades(os, r.signals); }));
        run.out.write(dir + "/backtest_" + label + ".csv",
                      render([&](std::ostream& os) { io::write_backtest(os, r); }));
    }
}

json portfolio_block(const PortfolioReport& report, ReturnMode mode) {
    json j;
    j["headline"] = io::to_json(mode == ReturnMode::Compounded ? report.compounded
                                                                : report.arithmetic);
    const json body = io::to_json(report);
    for (const auto& [k, v] : body.items()) j[k] = v;
    return j;
}

void do_backtest(Run& run) {
    const auto& cfg = run.cfg;
    const auto& splits = *run.splits;
    const WindowSpec& fit_window = splits.validation ? *splits.validation : splits.training;

    std::map<PairKey, Thresholds> optimized;
    if (run.optimization) {
        for (const auto& r : run.optimization->results) {
            if (r.selected) optimized.emplace(r.pair, *r.selected);
        }
    }

    std::vector<PortfolioSelection> baseline;
    std::vector<PortfolioSelection> tuned;
    auto excluded = json::array();
    for (const auto& c : run.selected) {
        if (run.optimization && !optimized.contains(c.pair)) {
            excluded.push_back({{"pair", c.pair.label()}, {"reason", "optimization failed"}});
            continue;
        }
        std::optional<SpreadModel> model;
        try {
            model = fit_spread_model(run.panel, c.pair, fit_window);
        } catch (const NumericalError& e) {
            excluded.push_back({{"pair", c.pair.label()}, {"reason", e.what()}});
            continue;
        }
        baseline.push_back({*model, cfg.baseline_thresholds});
        if (run.optimization) tuned.push_back({*model, optimized.at(c.pair)});
    }
    if (baseline.empty()) throw DataError("no pair could be fitted for the test phase");

    const auto bt = cfg.backtest_options();
    const auto base_report = run_portfolio(run.panel, baseline, splits.test, bt, cfg.threads);
    write_portfolio_files(run, "test_baseline", base_report);

    json summary;
    summary["test_window"] = window_json(splits.test);
    summary["model_fit_window"] = window_json(fit_window);
    summary["return_mode"] = mode_name(cfg.return_mode);
    summary["seed"] = cfg.seed;
    summary["excluded_pairs"] = std::move(excluded);
    json b = portfolio_block(base_report, cfg.return_mode);
    b["thresholds"] = thresholds_json(cfg.baseline_thresholds);
    summary["baseline"] = std::move(b);

    if (run.optimization) {
        const auto opt_report = run_portfolio(run.panel, tuned, splits.test, bt, cfg.threads);
        write_portfolio_files(run, "test_optimized", opt_report);
        json o = portfolio_block(opt_report, cfg.return_mode);
        o["method"] = to_string(cfg.method);
        o["thresholds"] = io::to_json(run.optimization->stats);
        summary["optimized"] = std::move(o);
        run.log << "backtest: optimized mean " << opt_report.compounded.mean << " over "
                << opt_report.reports.size() << " pairs\n";
    }
    run.out.write("portfolio_summary.json", summary.dump(2) + "\n");
    run.log << "backtest: baseline mean " << base_report.compounded.mean << " over "
            << base_report.reports.size() << " pairs\n";
}

void execute(const RunConfig& cfg, const std::string& command, const std::vector<Phase>& phases,
             std::ostream& log) {
    cfg.validate();
    RunWriter writer(cfg.output_dir, command, phases);
    Run run{cfg, writer, log, {}, {}, {}, {}, {}};

    const std::map<Phase, std::function<void(Run&)>> steps{
        {Phase::Setup, do_setup},       {Phase::Screen, do_screen},
        {Phase::Coint, do_coint},       {Phase::Optimize, do_optimize},
        {Phase::Backtest, do_backtest},
    };
    std::optional<PhaseError> failure;
    for (const auto phase : phases) {
        try {
            steps.at(phase)(run);
            writer.phase_done(phase);
        } catch (const std::exception& e) {
            failure.emplace(phase, e);
            break;
        }
    }
    writer.finish(failure, cfg.seed);
    if (failure) throw *failure;
}

}  // namespace

void cmd_screen(const RunConfig& cfg, std::ostream& log) {
    execute(cfg, "screen", {Phase::Setup, Phase::Screen}, log);
}

void cmd_coint(const RunConfig& cfg, std::ostream& log) {
    execute(cfg, "coint", {Phase::Setup, Phase::Screen, Phase::Coint}, log);
}

void cmd_optimize(const RunConfig& cfg, std::ostream& log) {
    execute(cfg, "optimize", {Phase::Setup, Phase::Screen, Phase::Coint, Phase::Optimize}, log);
}

void cmd_backtest(const RunConfig& cfg, std::ostream& log) {
    execute(cfg, "backtest", {Phase::Setup, Phase::Screen, Phase::Coint, Phase::Backtest}, log);
}

void cmd_pipeline(const RunConfig& cfg, std::ostream& log) {
    execute(cfg, "pipeline",
            {Phase::Setup, Phase::Screen, Phase::Coint, Phase::Optimize, Phase::Backtest}, log);
}

namespace {

std::vector<std::vector<std::string>> read_rows(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("run directory is missing " + path.filename().string());
    auto rows = io::read_csv_rows(in);
    if (rows.empty()) throw DataError(path.string() + " is empty");
    return rows;
}

}  // namespace

void cmd_report(const fs::path& run_dir, std::ostream& log) {
    if (!fs::is_directory(run_dir)) {
        throw DataError("run directory " + run_dir.string() + " does not exist");
    }
    const fs::path manifest_path = run_dir / "run_manifest.json";
    if (!fs::exists(manifest_path)) {
        throw DataError("run directory " + run_dir.string() +
                        " has no run_manifest.json; run the pipeline first");
    }
    json manifest;
    try {
        std::ifstream in(manifest_path);
        manifest = json::parse(in);
    } catch (const json::exception& e) {
        throw DataError(std::string("unreadable run manifest: ") + e.what());
    }
    std::set<std::string> done;
    for (const auto& p : manifest.value("phases_completed", json::array())) {
        done.insert(p.get<std::string>());
    }
    for (const auto phase : {Phase::Screen, Phase::Coint, Phase::Optimize, Phase::Backtest}) {
        if (!done.contains(to_string(phase))) {
            throw DataError(std::string("run is incomplete: missing phase '") + to_string(phase) +
                            "'");
        }
    }
    if (manifest.value("status", "") != "complete") {
        throw DataError("run is incomplete: status is " + manifest.value("status", "unknown"));
    }

    json summary;
    {
        std::ifstream in(run_dir / "portfolio_summary.json");
        if (!in) throw DataError("run directory is missing portfolio_summary.json");
        summary = json::parse(in);
    }
    const double base_in = summary["baseline"]["thresholds"]["theta_in"].get<double>();
    const double base_out = summary["baseline"]["thresholds"]["theta_out"].get<double>();

    std::map<std::string, std::pair<std::string, std::string>> chosen;
    const auto opt_rows = read_rows(run_dir / "optimization_results.csv");
    for (std::size_t i = 1; i < opt_rows.size(); ++i) {
        const auto& r = opt_rows[i];
        if (r.size() >= 5) chosen[r[0] + "_" + r[1]] = {r[3], r[4]};
    }

    fs::create_directories(run_dir / "report");
    std::size_t n = 0;
    for (const auto& pair : summary["optimized"]["pairs"]) {
        const std::string label =
            pair["ticker_x"].get<std::string>() + "_" + pair["ticker_y"].get<std::string>();
        const auto signals = read_rows(run_dir / "test_optimized" / ("signals_" + label + ".csv"));
        const auto trades = read_rows(run_dir / "test_optimized" / ("trades_" + label + ".csv"));
        const auto eq_opt = read_rows(run_dir / "test_optimized" / ("backtest_" + label + ".csv"));
        const auto eq_base = read_rows(run_dir / "test_baseline" / ("backtest_" + label + ".csv"));
        const auto& [opt_in, opt_out] = chosen.at(label);

        std::map<std::string, std::string> entries;
        std::map<std::string, std::string> exits;
        for (std::size_t i = 1; i < trades.size(); ++i) {
            entries[trades[i][0]] = trades[i][3];
            exits[trades[i][1]] = trades[i][4];
        }
        std::ostringstream z;
        z << "date,z_score,position,theta_in,theta_out,neg_theta_in,neg_theta_out,"
             "entry_marker,exit_marker\n";
        for (std::size_t i = 1; i < signals.size(); ++i) {
            const auto& row = signals[i];
            z << row[0] << ',' << row[1] << ',' << row[2] << ',' << opt_in << ',' << opt_out
              << ",-" << opt_in << ",-" << opt_out << ',';
            if (auto it = entries.find(row[0]); it != entries.end()) z << it->second;
            z << ',';
            if (auto it = exits.find(row[0]); it != exits.end()) z << it->second;
            z << '\n';
        }

        std::map<std::string, std::string> base_equity;
        for (std::size_t i = 1; i < eq_base.size(); ++i) base_equity[eq_base[i][0]] = eq_base[i][2];
        std::ostringstream e;
        e << "date,equity_optimized,equity_baseline\n";
        for (std::size_t i = 1; i < eq_opt.size(); ++i) {
            const auto it = base_equity.find(eq_opt[i][0]);
            e << eq_opt[i][0] << ',' << eq_opt[i][2] << ','
              << (it == base_equity.end() ? "" : it->second) << '\n';
        }

        std::ofstream(run_dir / "report" / ("zscore_" + label + ".csv"), std::ios::binary) << z.str();
        std::ofstream(run_dir / "report" / ("equity_" + label + ".csv"), std::ios::binary) << e.str();
        ++n;
    }

    std::ofstream(run_dir / "report" / "baseline_thresholds.csv", std::ios::binary)
        << "theta_in,theta_out\n"
        << io::format_number(base_in) << ',' << io::format_number(base_out) << '\n';
    log << "report: wrote plot data for " << n << " pairs to " << (run_dir / "report").string()
        << '\n';
}

}  // namespace pairtrade::cli
