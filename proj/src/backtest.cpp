#include "pairtrade/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pairtrade/error.hpp"
#include "pairtrade/parallel.hpp"

namespace pairtrade {

namespace {

void require_before(const WindowSpec& earlier, const WindowSpec& later, const char* a,
                    const char* b) {
    if (!(earlier.end < later.start)) {
        throw PitViolation(std::string(a) + " window [" + format_date(earlier.start) + ", " +
                           format_date(earlier.end) + "] must end before " + b + " window [" +
                           format_date(later.start) + ", " + format_date(later.end) + "]");
    }
}

std::vector<double> leg_returns(std::span<const double> prices) {
    std::vector<double> r(prices.size(), 0.0);
    for (std::size_t t = 1; t < prices.size(); ++t) {
        r[t] = (prices[t] - prices[t - 1]) / prices[t - 1];
    }
    return r;
}

double sample_std(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

void SplitConfig::validate() const {
    require_before(pair_selection, training, "pair-selection", "training");
    if (validation) {
        require_before(training, *validation, "training", "validation");
        require_before(*validation, test, "validation", "test");
    } else {
        require_before(training, test, "training", "test");
    }
}

SplitConfig default_splits(std::span<const Date> dates, std::size_t training_days,
                           std::size_t test_days) {
    if (training_days < 30 || test_days < 2) {
        throw std::invalid_argument("default_splits: training must span >= 30 and test >= 2 rows");
    }
    const std::size_t needed = training_days + test_days + 30;
    if (dates.size() < needed) {
        throw DataError("panel has " + std::to_string(dates.size()) +
                        " dates; default splits need at least " + std::to_string(needed));
    }
    const std::size_t n = dates.size();
    const std::size_t test_first = n - test_days;
    const std::size_t train_first = test_first - training_days;
    return SplitConfig{WindowSpec(dates[0], dates[train_first - 1]),
                       WindowSpec(dates[train_first], dates[test_first - 1]), std::nullopt,
                       WindowSpec(dates[test_first], dates[n - 1])};
}

std::vector<double> pair_daily_returns(const SignalSeries& signals,
                                       std::span<const double> x_returns,
                                       std::span<const double> y_returns) {
    const std::size_t n = signals.positions.size();
    if (x_returns.size() != n || y_returns.size() != n) {
        throw std::invalid_argument("pair_daily_returns: length mismatch");
    }
    std::vector<double> out(n);
    for (std::size_t t = 0; t < n; ++t) {
        out[t] = static_cast<double>(signals.positions[t]) * 0.5 * (y_returns[t] - x_returns[t]);
    }
    return out;
}

double cumulative_return(std::span<const double> daily, ReturnMode mode) {
    if (mode == ReturnMode::Arithmetic) {
        return std::accumulate(daily.begin(), daily.end(), 0.0);
    }
    double growth = 1.0;
    for (const double r : daily) {
        if (!(r > -1.0)) {
            throw std::invalid_argument("cumulative_return: daily return <= -1 in compounded mode");
        }
        growth *= 1.0 + r;
    }
    return growth - 1.0;
}

double max_drawdown(std::span<const double> daily) {
    double equity = 1.0;
    double peak = 1.0;
    double worst = 0.0;
    for (const double r : daily) {
        equity *= 1.0 + r;
        peak = std::max(peak, equity);
        worst = std::min(worst, equity / peak - 1.0);
    }
    return std::max(worst, -1.0);
}

BacktestReport backtest_series(const SpreadModel& model, std::span<const double> x,
                               std::span<const double> y, std::span<const Date> dates,
                               const Thresholds& thresholds, const BacktestOptions& options) {
    BacktestReport report{model.pair};
    report.signals = generate_signals(model, x, y, dates, thresholds, options.signal);
    report.dates.assign(dates.begin(), dates.end());

    const auto rx = leg_returns(x);
    const auto ry = leg_returns(y);
    const auto& pos = report.signals.positions;
    const std::size_t n = pos.size();
    if (options.legs == LegWeighting::EqualNotional) {
        report.daily_returns = pair_daily_returns(report.signals, rx, ry);
    } else {
        report.daily_returns.assign(n, 0.0);
        const double sign = model.beta < 0.0 ? -1.0 : 1.0;
        for (std::size_t t = 1; t < n; ++t) {
            const double nx = x[t - 1];
            const double ny = std::abs(model.beta) * y[t - 1];
            const double gross = nx + ny;
            report.daily_returns[t] = static_cast<double>(pos[t]) *
                                      (sign * ny / gross * ry[t] - nx / gross * rx[t]);
        }
    }
    if (options.cost_per_turnover != 0.0) {
        for (std::size_t t = 0; t < n; ++t) {
            const int prev = t == 0 ? 0 : pos[t - 1];
            double turnover = std::abs(pos[t] - prev);
            if (t + 1 == n) turnover += std::abs(pos[t]);  // forced close
            report.daily_returns[t] -= options.cost_per_turnover * turnover;
        }
    }

    report.equity.resize(n);
    double equity = 1.0;
    for (std::size_t t = 0; t < n; ++t) {
        equity *= 1.0 + report.daily_returns[t];
        report.equity[t] = equity;
    }
    report.cumulative_arithmetic = cumulative_return(report.daily_returns, ReturnMode::Arithmetic);
    report.cumulative_compounded = cumulative_return(report.daily_returns, ReturnMode::Compounded);
    report.cumulative_return = options.mode == ReturnMode::Compounded
                                   ? report.cumulative_compounded
                                   : report.cumulative_arithmetic;
    report.n_trades = report.signals.trades.size();
    report.return_std = sample_std(report.daily_returns);
    report.max_drawdown = max_drawdown(report.daily_returns);
    return report;
}

BacktestReport run_backtest(const PricePanel& panel, const SpreadModel& model,
                            const Thresholds& thresholds, const WindowSpec& window,
                            const BacktestOptions& options) {
    require_before(model.fit_window, window, "model fit", "evaluation");
    const auto [first, last] = window_rows(panel.dates(), window);
    const std::size_t len = last - first;
    const auto x = panel.column(model.pair.x()).subspan(first, len);
    const auto y = panel.column(model.pair.y()).subspan(first, len);
    const auto dates = std::span<const Date>(panel.dates()).subspan(first, len);
    return backtest_series(model, x, y, dates, thresholds, options);
}

CrossPairStats summarize(std::span<const double> values) {
    CrossPairStats s;
    s.count = values.size();
    if (values.empty()) return s;
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.count);
    s.std = sample_std(values);
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    s.min = *lo;
    s.max = *hi;
    return s;
}

PortfolioReport run_portfolio(const PricePanel& panel,
                              const std::vector<PortfolioSelection>& selections,
                              const WindowSpec& window, const BacktestOptions& options,
                              std::size_t threads) {
    if (selections.empty()) {
        throw std::invalid_argument("run_portfolio: no selections");
    }
    for (const auto& s : selections) {
        require_before(s.model.fit_window, window, "model fit", "evaluation");
    }

    std::vector<std::optional<BacktestReport>> reports(selections.size());
    std::vector<std::string> errors(selections.size());
    parallel_for(selections.size(), threads, [&](std::size_t i) {
        try {
            reports[i] = run_backtest(panel, selections[i].model, selections[i].thresholds,
                                      window, options);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    PortfolioReport out;
    for (std::size_t i = 0; i < selections.size(); ++i) {
        if (reports[i]) {
            out.reports.push_back(std::move(*reports[i]));
        } else {
            out.failures.push_back({selections[i].model.pair, errors[i]});
        }
    }
    std::stable_sort(out.reports.begin(), out.reports.end(),
                     [](const BacktestReport& a, const BacktestReport& b) {
                         return a.pair < b.pair;
                     });
    std::vector<double> comp;
    std::vector<double> arith;
    for (const auto& r : out.reports) {
        comp.push_back(r.cumulative_compounded);
        arith.push_back(r.cumulative_arithmetic);
    }
    out.compounded = summarize(comp);
    out.arithmetic = summarize(arith);
    return out;
}

}  // namespace pairtrade
