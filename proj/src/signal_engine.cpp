#include "pairtrade/signal_engine.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pairtrade/cointegration.hpp"
#include "pairtrade/error.hpp"

namespace pairtrade {

namespace {

constexpr std::size_t kMinFitRows = 15;

std::pair<double, double> mean_and_sd(std::span<const double> v) {
    const double n = static_cast<double>(v.size());
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

Thresholds::Thresholds(double theta_in, double theta_out) : in_(theta_in), out_(theta_out) {
    if (!(theta_in > 0.0) || !(theta_out >= 0.0) || !(theta_out < theta_in) ||
        !std::isfinite(theta_in)) {
        throw std::invalid_argument("thresholds must satisfy 0 <= theta_out < theta_in");
    }
}

SpreadModel fit_spread_model(std::span<const double> x, std::span<const double> y,
                             const PairKey& pair, const WindowSpec& window,
                             bool with_intercept) {
    const auto ols = fit_ols(x, y, with_intercept);
    const auto [mu, sigma] = mean_and_sd(ols.residuals);
    double scale = 0.0;
    for (const double v : x) scale = std::max(scale, std::abs(v));
    if (!(sigma > 1e-12 * (1.0 + scale))) {
        throw NumericalError("fit_spread_model: degenerate spread (sigma_z = 0) for " +
                             pair.label());
    }
    return SpreadModel{pair, ols.beta, ols.alpha, mu, sigma, window};
}

SpreadModel fit_spread_model(const PricePanel& panel, const PairKey& pair,
                             const WindowSpec& window, bool with_intercept) {
    const auto [first, last] = window_rows(panel.dates(), window);
    if (last - first < kMinFitRows) {
        throw std::invalid_argument("fit_spread_model: window has " +
                                    std::to_string(last - first) + " rows, need at least " +
                                    std::to_string(kMinFitRows));
    }
    const auto x = panel.column(pair.x()).subspan(first, last - first);
    const auto y = panel.column(pair.y()).subspan(first, last - first);
    return fit_spread_model(x, y, pair, window, with_intercept);
}

double spread(const SpreadModel& model, double x_t, double y_t) {
    return x_t - model.alpha - model.beta * y_t;
}

double z_score(const SpreadModel& model, double x_t, double y_t) {
    if (!(model.sigma_z > 0.0)) {
        throw std::invalid_argument("z_score: model has non-positive sigma_z");
    }
    return (spread(model, x_t, y_t) - model.mu_z) / model.sigma_z;
}

SignalSeries signals_from_z(std::span<const double> z, std::span<const Date> dates,
                            const Thresholds& thresholds, ExitRule exit) {
    if (z.size() != dates.size()) {
        throw std::invalid_argument("signals: z-score and date lengths differ");
    }
    const std::size_t n = z.size();
    SignalSeries s;
    s.dates.assign(dates.begin(), dates.end());
    s.z_scores.assign(z.begin(), z.end());
    s.positions.assign(n, 0);

    const double in = thresholds.theta_in();
    const double out = thresholds.theta_out();
    auto leave = [&](int held, double zt) {
        return exit == ExitRule::Band ? std::abs(zt) <= out : static_cast<double>(held) * zt <= 0.0;
    };
    for (std::size_t t = 1; t < n; ++t) {
        const int held = s.positions[t - 1];
        const double prev = z[t - 1];
        if (held == 0) {
            s.positions[t] = prev > in ? 1 : (prev < -in ? -1 : 0);
        } else {
            s.positions[t] = leave(held, prev) ? 0 : held;
        }
    }

    // Each nonzero run [first, last] is one trade opened at the close of
    // first - 1 and closed at the close of last.
    for (std::size_t t = 1; t < n; ++t) {
        if (s.positions[t] == 0 || s.positions[t - 1] != 0) continue;
        std::size_t last = t;
        while (last + 1 < n && s.positions[last + 1] == s.positions[t]) ++last;
        Trade trade;
        trade.direction = s.positions[t];
        trade.entry_index = t - 1;
        trade.exit_index = last;
        trade.entry_date = dates[t - 1];
        trade.exit_date = dates[last];
        trade.entry_z = z[t - 1];
        trade.exit_z = z[last];
        // Closed by the end of the data rather than by an exit signal.
        trade.forced = last == n - 1 && !leave(trade.direction, z[last]);
        s.trades.push_back(trade);
    }
    return s;
}

SignalSeries generate_signals(const SpreadModel& model, std::span<const double> x,
                              std::span<const double> y, std::span<const Date> dates,
                              const Thresholds& thresholds, const SignalOptions& options) {
    if (x.size() != y.size() || x.size() != dates.size()) {
        throw std::invalid_argument("generate_signals: length mismatch");
    }
    const std::size_t n = x.size();
    std::vector<double> z(n);
    if (!options.rolling_lookback) {
        for (std::size_t t = 0; t < n; ++t) z[t] = z_score(model, x[t], y[t]);
    } else {
        const std::size_t lookback = *options.rolling_lookback;
        if (lookback < 2) throw std::invalid_argument("rolling lookback must be at least 2");
        std::vector<double> s(n);
        for (std::size_t t = 0; t < n; ++t) s[t] = spread(model, x[t], y[t]);
        for (std::size_t t = 0; t < n; ++t) {
            if (t + 1 < lookback) {
                z[t] = (s[t] - model.mu_z) / model.sigma_z;
                continue;
            }
            const auto [mu, sd] =
                mean_and_sd(std::span<const double>(s).subspan(t + 1 - lookback, lookback));
            z[t] = sd > 0.0 ? (s[t] - mu) / sd : 0.0;
        }
    }
    return signals_from_z(z, dates, thresholds, options.exit);
}

}  // namespace pairtrade
