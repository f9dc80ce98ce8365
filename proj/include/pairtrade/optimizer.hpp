#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pairtrade/backtest.hpp"
#include "pairtrade/market_data.hpp"
#include "pairtrade/pair_screen.hpp"
#include "pairtrade/signal_engine.hpp"

namespace pairtrade {

struct ParamRange {
    double low = 0.0;
    double high = 1.0;
    std::optional<double> step;  ///< gridded when set

    /// Grid values low, low + step, ..., <= high (rounded to 1e-9).
    [[nodiscard]] std::vector<double> grid() const;
};

/// Box over (theta_in, theta_out) with the constraint theta_out < theta_in.
struct SearchSpace {
    ParamRange theta_in{1.0, 2.5, 0.1};
    ParamRange theta_out{0.0, 1.0, 0.1};

    void validate() const;
    [[nodiscard]] bool gridded() const { return theta_in.step && theta_out.step; }
    [[nodiscard]] bool feasible(double theta_in_value, double theta_out_value) const;
    /// Same bounds with the steps removed.
    [[nodiscard]] SearchSpace continuous() const;
};

struct Trial {
    Thresholds thresholds;
    double objective = 0.0;
    std::size_t index = 0;
};

enum class SearchMethod { Grid, Tpe };

const char* to_string(SearchMethod method);

struct SearchResult {
    Thresholds best;
    double best_objective = 0.0;
    std::vector<Trial> history;
    SearchMethod method = SearchMethod::Grid;
    /// Every trial scored exactly zero (no threshold ever crossed).
    bool degenerate = false;
};

using ObjectiveFn = std::function<double(const Thresholds&)>;

/// Evaluates every feasible grid point once. Ties go to the smaller
/// theta_in, then the smaller theta_out.
SearchResult grid_search(const SearchSpace& space, const ObjectiveFn& eval);

struct TpeOptions {
    std::size_t n_trials = 100;
    std::size_t n_startup = 10;
    double gamma = 0.25;
    std::size_t n_candidates = 24;
    std::uint64_t seed = 0;
};

/**
 * Tree-structured Parzen estimator over the continuous box.
 *
 * The first n_startup trials are uniform over the feasible region. Afterwards
 * the trials are split into the best ceil(gamma * n) ("good") and the rest;
 * each split gets a product-Gaussian kernel density with Scott bandwidths,
 * truncated to the box. n_candidates points drawn from the good density are
 * scored by log l(x) - log g(x) and the best one is evaluated. Infeasible
 * draws are rejected and redrawn. Identical seeds give identical histories.
 */
SearchResult tpe_search(const SearchSpace& space, const ObjectiveFn& eval,
                        const TpeOptions& options);

enum class ObjectiveMetric {
    CumulativeReturn,  ///< in the backtest's return mode
    Sharpe,            ///< annualized mean / sd of daily returns, 0 when flat
};

/// Training-window score of `thresholds` under a frozen model.
double objective(const PricePanel& panel, const SpreadModel& model, const Thresholds& thresholds,
                 const WindowSpec& training, const BacktestOptions& options = {},
                 ObjectiveMetric metric = ObjectiveMetric::CumulativeReturn);

enum class ObjectiveMode {
    /// Refit the spread model on the first half of the training window and
    /// score thresholds on the second half.
    RefitSplit,
    /// Keep the pair-selection model and score on the whole training window.
    Inherit,
};

struct OptimizeOptions {
    SearchMethod method = SearchMethod::Grid;
    std::size_t budget = 100;  ///< TPE trials
    std::uint64_t seed = 0;
    ObjectiveMode mode = ObjectiveMode::RefitSplit;
    ObjectiveMetric metric = ObjectiveMetric::CumulativeReturn;
    BacktestOptions backtest;
    std::size_t validation_top_k = 5;
    std::size_t threads = 0;
};

struct OptimizationResult {
    PairKey pair;
    std::optional<SearchResult> search;
    /// Thresholds chosen for the test phase (validation pick when a
    /// validation window is configured, otherwise the training best).
    std::optional<Thresholds> selected;
    std::optional<double> validation_objective;
    std::optional<std::string> error;
};

struct ThresholdStats {
    std::size_t count = 0;
    double theta_in_mean = 0.0;
    double theta_in_std = 0.0;
    double theta_out_mean = 0.0;
    double theta_out_std = 0.0;
};

struct UniverseOptimization {
    std::vector<OptimizationResult> results;  ///< sorted by PairKey
    ThresholdStats stats;  ///< over successful, non-degenerate pairs
    std::size_t failures = 0;
    std::size_t degenerate = 0;
};

/// Per-pair seed derived from the run seed and the pair, so results do not
/// depend on pair order or on how work is split across threads.
std::uint64_t pair_seed(std::uint64_t run_seed, const PairKey& pair);

/// Optimizes each pair independently on the training window. Never reads
/// rows at or after splits.test.start.
UniverseOptimization optimize_universe(const PricePanel& panel,
                                       const std::vector<SpreadModel>& selections,
                                       const SplitConfig& splits, const SearchSpace& space,
                                       const OptimizeOptions& options);

}  // namespace pairtrade
