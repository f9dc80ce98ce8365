#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pairtrade/market_data.hpp"
#include "pairtrade/pair_screen.hpp"

namespace pairtrade {

/// Spread z_t = x_t - alpha - beta * y_t with its mean and standard deviation
/// frozen from the fit window.
struct SpreadModel {
    PairKey pair;
    double beta = 0.0;
    double alpha = 0.0;
    double mu_z = 0.0;
    double sigma_z = 1.0;
    WindowSpec fit_window;
};

/// Entry/exit band in z-score units. Invariant: 0 <= theta_out < theta_in.
class Thresholds {
public:
    Thresholds(double theta_in, double theta_out);

    [[nodiscard]] double theta_in() const { return in_; }
    [[nodiscard]] double theta_out() const { return out_; }
    friend bool operator==(const Thresholds&, const Thresholds&) = default;

private:
    double in_;
    double out_;
};

enum class ExitRule {
    Band,       ///< exit once |z| <= theta_out
    ZeroCross,  ///< exit once z crosses zero against the trade
};

struct SignalOptions {
    ExitRule exit = ExitRule::Band;
    /// When set, mu/sigma are re-estimated from the trailing `lookback`
    /// spread values (inclusive of the current day) instead of staying frozen.
    std::optional<std::size_t> rolling_lookback;
};

/// Round trip. The position is opened at the close of entry_date and closed at
/// the close of exit_date; it is held over the days in between.
struct Trade {
    Date entry_date;
    Date exit_date;
    int direction = 0;  ///< +1: short x / long y, -1: long x / short y
    double entry_z = 0.0;
    double exit_z = 0.0;
    std::size_t entry_index = 0;
    std::size_t exit_index = 0;
    bool forced = false;  ///< closed because the series ended
};

struct SignalSeries {
    std::vector<Date> dates;
    std::vector<double> z_scores;
    std::vector<int> positions;  ///< position held over each day
    std::vector<Trade> trades;
};

/// Fits alpha and beta by OLS on the given (already windowed) prices and
/// freezes the residual mean and sample standard deviation.
/// Throws NumericalError when the spread is degenerate.
SpreadModel fit_spread_model(std::span<const double> x, std::span<const double> y,
                             const PairKey& pair, const WindowSpec& window,
                             bool with_intercept = true);

/// Slices the panel to `window` (at least 15 rows) and fits there.
SpreadModel fit_spread_model(const PricePanel& panel, const PairKey& pair,
                             const WindowSpec& window, bool with_intercept = true);

double spread(const SpreadModel& model, double x_t, double y_t);
double z_score(const SpreadModel& model, double x_t, double y_t);

/// The entry/exit state machine on a z-score series. Day t's position is
/// decided from z_{t-1}, so positions[0] is always 0.
SignalSeries signals_from_z(std::span<const double> z, std::span<const Date> dates,
                            const Thresholds& thresholds, ExitRule exit = ExitRule::Band);

SignalSeries generate_signals(const SpreadModel& model, std::span<const double> x,
                              std::span<const double> y, std::span<const Date> dates,
                              const Thresholds& thresholds, const SignalOptions& options = {});

}  // namespace pairtrade
