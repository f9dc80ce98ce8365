#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairtrade/market_data.hpp"
#include "pairtrade/pair_screen.hpp"
#include "pairtrade/signal_engine.hpp"

namespace pairtrade {

/// Pair-selection, training, optional validation and test windows. Each must
/// end strictly before the next one starts.
struct SplitConfig {
    WindowSpec pair_selection;
    WindowSpec training;
    std::optional<WindowSpec> validation;
    WindowSpec test;

    /// Throws PitViolation when the windows overlap or are out of order.
    void validate() const;
};

/// Contiguous default layout over the panel dates: the last `test_days` rows
/// are the test window, the `training_days` before them the training window,
/// and everything earlier the pair-selection window.
SplitConfig default_splits(std::span<const Date> dates, std::size_t training_days = 252,
                           std::size_t test_days = 63);

enum class ReturnMode { Compounded, Arithmetic };

enum class LegWeighting {
    EqualNotional,  ///< 0.5 per leg, gross exposure 1
    BetaWeighted,   ///< x : beta*y notional at the prior close, gross exposure 1
};

struct BacktestOptions {
    ReturnMode mode = ReturnMode::Compounded;
    LegWeighting legs = LegWeighting::EqualNotional;
    /// Charged on each day the position changes, per unit of position change.
    double cost_per_turnover = 0.0;
    SignalOptions signal;
};

struct BacktestReport {
    PairKey pair;
    std::vector<Date> dates;
    std::vector<double> daily_returns;
    std::vector<double> equity;  ///< compounded equity curve, starts from 1
    double cumulative_return = 0.0;      ///< in the configured mode
    double cumulative_compounded = 0.0;
    double cumulative_arithmetic = 0.0;
    std::size_t n_trades = 0;
    double return_std = 0.0;
    double max_drawdown = 0.0;
    SignalSeries signals;
};

/// r_t = position_t * 0.5 * (R_y,t - R_x,t).
std::vector<double> pair_daily_returns(const SignalSeries& signals,
                                       std::span<const double> x_returns,
                                       std::span<const double> y_returns);

/// Compounded: prod(1 + r_t) - 1. Arithmetic: sum r_t.
double cumulative_return(std::span<const double> daily, ReturnMode mode);

/// Worst peak-to-trough decline of the compounded equity curve, in [-1, 0].
double max_drawdown(std::span<const double> daily);

/// Backtest on raw, already-windowed price vectors. Returns on the first day
/// are taken as zero because the previous close lies outside the window.
BacktestReport backtest_series(const SpreadModel& model, std::span<const double> x,
                               std::span<const double> y, std::span<const Date> dates,
                               const Thresholds& thresholds,
                               const BacktestOptions& options = {});

/// Evaluates a frozen model on `window`. The model's fit window must end
/// strictly before `window` starts (PitViolation otherwise).
BacktestReport run_backtest(const PricePanel& panel, const SpreadModel& model,
                            const Thresholds& thresholds, const WindowSpec& window,
                            const BacktestOptions& options = {});

struct PortfolioSelection {
    SpreadModel model;
    Thresholds thresholds;
};

struct CrossPairStats {
    std::size_t count = 0;
    double mean = 0.0;
    double std = 0.0;  ///< sample standard deviation, 0 for fewer than 2 pairs
    double min = 0.0;
    double max = 0.0;
};

CrossPairStats summarize(std::span<const double> values);

struct PortfolioFailure {
    PairKey pair;
    std::string error;
};

struct PortfolioReport {
    std::vector<BacktestReport> reports;  ///< sorted by PairKey
    CrossPairStats compounded;
    CrossPairStats arithmetic;
    std::vector<PortfolioFailure> failures;
};

/// Per-pair backtests plus cross-pair statistics of cumulative returns.
/// A PIT violation in any selection is fatal; other per-pair errors are
/// recorded and excluded from the aggregates.
PortfolioReport run_portfolio(const PricePanel& panel,
                              const std::vector<PortfolioSelection>& selections,
                              const WindowSpec& window, const BacktestOptions& options = {},
                              std::size_t threads = 0);

}  // namespace pairtrade
