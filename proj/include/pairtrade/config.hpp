#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pairtrade/backtest.hpp"
#include "pairtrade/optimizer.hpp"
#include "pairtrade/pvalue.hpp"

namespace pairtrade {

/// Every knob of a pipeline run. Loaded from an INI file, then overridden by
/// command-line flags.
///
/// Example file:
///
///     data = prices.csv
///     output_dir = run
///     seed = 7
///
///     [splits]
///     pair_selection_start = 2015-01-01
///     pair_selection_end = 2018-12-31
///     training_start = 2019-01-01
///     training_end = 2019-12-31
///     test_start = 2020-01-01
///     test_end = 2020-03-31
///
///     [optimize]
///     method = tpe
///     trials = 100
struct RunConfig {
    std::filesystem::path data_path;
    std::filesystem::path output_dir = "pairtrade_run";

    /// Explicit windows. When absent the default contiguous layout over the
    /// panel dates is used (training_days / test_days).
    std::optional<SplitConfig> splits;
    std::size_t training_days = 252;
    std::size_t test_days = 63;

    double max_missing_fraction = 0.05;

    // screen
    double correlation_threshold = 0.8;
    std::size_t sample_pairs = 0;  ///< 0 screens every pair
    bool transform = false;
    TransformOptions transform_options;

    // coint
    double cointegration_threshold = 0.05;
    bool with_intercept = true;
    PValueSurface surface = PValueSurface::EngleGranger;
    bool coint_on_returns = false;
    std::size_t max_pairs = 0;  ///< 0 keeps every cointegrated pair

    // optimize
    SearchSpace search_space;
    SearchMethod method = SearchMethod::Grid;
    std::size_t budget = 100;
    std::uint64_t seed = 0;
    ObjectiveMode objective_mode = ObjectiveMode::RefitSplit;
    ObjectiveMetric objective_metric = ObjectiveMetric::CumulativeReturn;
    std::size_t validation_top_k = 5;

    // backtest
    Thresholds baseline_thresholds{2.0, 1.0};
    ReturnMode return_mode = ReturnMode::Compounded;
    LegWeighting legs = LegWeighting::EqualNotional;
    ExitRule exit_rule = ExitRule::Band;
    double cost_per_turnover = 0.0;
    std::optional<std::size_t> rolling_lookback;

    std::size_t threads = 0;

    /// Throws ConfigError for out-of-range values and PitViolation for
    /// overlapping explicit splits.
    void validate() const;

    [[nodiscard]] BacktestOptions backtest_options() const;
    [[nodiscard]] OptimizeOptions optimize_options() const;
};

/// Parses an INI file into a config. Unknown keys are rejected so typos do
/// not silently fall back to defaults.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in);

SearchMethod parse_method(const std::string& text);

}  // namespace pairtrade
