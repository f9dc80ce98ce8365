#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pairtrade/pipeline.hpp"

namespace pairtrade::cli {

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Pairs-trading research pipeline: screen, coint, optimize, backtest, report"};
    app.name("pairtrade");

    std::string verb;
    std::string run_dir_arg;
    std::string config_path;
    std::string data_path;
    std::string out_dir;
    std::string method;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> trials;
    std::optional<std::size_t> threads;

    app.add_option("verb", verb, "screen | coint | optimize | backtest | pipeline | report")
        ->required()
        ->check(CLI::IsMember({"screen", "coint", "optimize", "backtest", "pipeline", "report"}));
    app.add_option("run_dir", run_dir_arg, "run directory for 'report' (defaults to --out)");
    app.add_option("--config", config_path, "INI configuration file");
    app.add_option("--data", data_path, "price CSV (overrides the config)");
    app.add_option("--seed", seed, "random seed (overrides the config)");
    app.add_option("--method", method, "threshold search method")
        ->check(CLI::IsMember({"grid", "tpe"}));
    app.add_option("--trials", trials, "TPE trial budget")->check(CLI::PositiveNumber);
    app.add_option("--out", out_dir, "output directory (overrides the config)");
    app.add_option("--threads", threads, "worker threads, 0 = all cores");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 1;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (!data_path.empty()) cfg.data_path = data_path;
        if (!out_dir.empty()) cfg.output_dir = out_dir;
        if (seed) cfg.seed = *seed;
        if (!method.empty()) cfg.method = parse_method(method);
        if (trials) cfg.budget = *trials;
        if (threads) cfg.threads = *threads;

        if (verb == "report") {
            cmd_report(run_dir_arg.empty() ? cfg.output_dir : std::filesystem::path(run_dir_arg),
                       out);
        } else if (!run_dir_arg.empty()) {
            err << "error: unexpected argument '" << run_dir_arg << "'\n";
            return 1;
        } else if (verb == "screen") {
            cmd_screen(cfg, out);
        } else if (verb == "coint") {
            cmd_coint(cfg, out);
        } else if (verb == "optimize") {
            cmd_optimize(cfg, out);
        } else if (verb == "backtest") {
            cmd_backtest(cfg, out);
        } else {
            cmd_pipeline(cfg, out);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 0;
}

}  // namespace pairtrade::cli
