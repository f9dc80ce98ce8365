#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pairtrade/config.hpp"
#include "pairtrade/error.hpp"

using namespace pairtrade;

namespace {

RunConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

}  // namespace

TEST_CASE("defaults", "[config]") {
    const auto cfg = parse("");
    CHECK(cfg.correlation_threshold == 0.8);
    CHECK(cfg.cointegration_threshold == 0.05);
    CHECK(cfg.budget == 100);
    CHECK(cfg.method == SearchMethod::Grid);
    CHECK(cfg.baseline_thresholds.theta_in() == 2.0);
    CHECK(cfg.baseline_thresholds.theta_out() == 1.0);
    CHECK(cfg.return_mode == ReturnMode::Compounded);
    CHECK(!cfg.splits);
    CHECK_NOTHROW(cfg.validate());
}

TEST_CASE("full file", "[config]") {
    const auto cfg = parse(R"(data = prices.csv
output_dir = out
seed = 17

[splits]
pair_selection_start = 2015-01-01
pair_selection_end = 2018-12-31
training_start = 2019-01-01
training_end = 2019-12-31
validation_start = 2020-01-01
validation_end = 2020-03-31
test_start = 2020-04-01
test_end = 2020-06-30

[screen]
correlation_threshold = 0.7
transform = true

[coint]
threshold = 0.01
surface = unit_root
max_pairs = 12

[optimize]
method = TPE
trials = 50
objective_mode = inherit
objective = sharpe
theta_in_step = 0

[backtest]
baseline_theta_in = 1.8
return_mode = arithmetic
legs = beta
exit_rule = zero_cross
cost_per_turnover = 0.0005
)");
    CHECK(cfg.data_path == "prices.csv");
    CHECK(cfg.output_dir == "out");
    CHECK(cfg.seed == 17);
    REQUIRE(cfg.splits);
    REQUIRE(cfg.splits->validation);
    CHECK(cfg.splits->test.start == parse_date("2020-04-01"));
    CHECK(cfg.correlation_threshold == 0.7);
    CHECK(cfg.transform);
    CHECK(cfg.cointegration_threshold == 0.01);
    CHECK(cfg.surface == PValueSurface::UnitRoot);
    CHECK(cfg.max_pairs == 12);
    CHECK(cfg.method == SearchMethod::Tpe);
    CHECK(cfg.budget == 50);
    CHECK(cfg.objective_mode == ObjectiveMode::Inherit);
    CHECK(cfg.objective_metric == ObjectiveMetric::Sharpe);
    CHECK(!cfg.search_space.theta_in.step);
    CHECK(cfg.baseline_thresholds.theta_in() == 1.8);
    CHECK(cfg.baseline_thresholds.theta_out() == 1.0);
    CHECK(cfg.return_mode == ReturnMode::Arithmetic);
    CHECK(cfg.legs == LegWeighting::BetaWeighted);
    CHECK(cfg.exit_rule == ExitRule::ZeroCross);
    CHECK_NOTHROW(cfg.validate());

    const auto opt = cfg.optimize_options();
    CHECK(opt.backtest.mode == ReturnMode::Compounded);
    CHECK(opt.backtest.legs == LegWeighting::BetaWeighted);
    CHECK(cfg.backtest_options().mode == ReturnMode::Arithmetic);
}

TEST_CASE("rejects bad input", "[config]") {
    CHECK_THROWS_AS(parse("colour = blue\n"), ConfigError);
    CHECK_THROWS_AS(parse("[screen]\nthreshold = 0.8\n"), ConfigError);
    CHECK_THROWS_AS(parse("[screen]\ncorrelation_threshold = high\n"), ConfigError);
    CHECK_THROWS_AS(parse("[splits]\ntraining_days = many\n"), ConfigError);
    CHECK_THROWS_AS(parse("[splits]\ntest_start = 2020-13-01\n"), ConfigError);
    CHECK_THROWS_AS(parse("[splits]\ntest_start = 2020-01-01\n"), ConfigError);
    CHECK_THROWS_AS(parse("[optimize]\nmethod = anneal\n"), ConfigError);
    CHECK_THROWS_AS(parse("[backtest]\nbaseline_theta_in = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse("[coint]\nwith_intercept = maybe\n"), ConfigError);
    CHECK_THROWS_AS(parse("[screen\n"), ConfigError);

    CHECK_THROWS_AS(parse("[screen]\ncorrelation_threshold = 1.5\n").validate(), ConfigError);
    CHECK_THROWS_AS(parse("[optimize]\ntrials = 0\n").validate(), ConfigError);
    CHECK_THROWS_AS(parse("[splits]\ntraining_days = 10\n").validate(), ConfigError);
}

TEST_CASE("overlapping windows are a point-in-time violation", "[config]") {
    const auto cfg = parse(R"([splits]
pair_selection_start = 2015-01-01
pair_selection_end = 2018-12-31
training_start = 2019-01-01
training_end = 2019-12-31
test_start = 2019-12-01
test_end = 2020-03-31
)");
    CHECK_THROWS_AS(cfg.validate(), PitViolation);
}

TEST_CASE("relative data path follows the config file", "[config]") {
    const auto dir = std::filesystem::temp_directory_path() / "pairtrade_config_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "run.ini");
        out << "data = prices.csv\n";
    }
    CHECK(load_config(dir / "run.ini").data_path == dir / "prices.csv");
    CHECK_THROWS_AS(load_config(dir / "absent.ini"), ConfigError);
    std::filesystem::remove_all(dir);
}
