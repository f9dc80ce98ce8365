#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <numeric>

#include "pairtrade/backtest.hpp"
#include "pairtrade/error.hpp"
#include "pairtrade/synthetic.hpp"

using namespace pairtrade;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

Date d(const char* s) { return parse_date(s); }

SignalSeries positions_only(std::vector<int> pos) {
    SignalSeries s;
    s.positions = std::move(pos);
    return s;
}

/// 500-day OU pair panel; the first 250 rows are the fit window.
struct Fixture {
    PricePanel panel;
    WindowSpec fit;
    WindowSpec test;
    SpreadModel model;

    explicit Fixture(std::uint64_t seed, std::size_t n_pairs = 1)
        : panel(synthetic::ou_universe(n_pairs, {}, seed)),
          fit(panel.dates().front(), panel.dates()[249]),
          test(panel.dates()[250], panel.dates().back()),
          model(fit_spread_model(panel, PairKey("P000A", "P000B"), fit)) {}
};

}  // namespace

TEST_CASE("pair_daily_returns sign convention", "[backtest]") {
    const std::vector<double> rx{0.01};
    const std::vector<double> ry{0.02};
    CHECK_THAT(pair_daily_returns(positions_only({1}), rx, ry)[0], WithinAbs(0.005, 1e-15));
    CHECK_THAT(pair_daily_returns(positions_only({-1}), rx, ry)[0], WithinAbs(-0.005, 1e-15));
    CHECK(pair_daily_returns(positions_only({0, 0, 0}), std::vector<double>{0.1, -0.2, 0.3},
                             std::vector<double>{-0.1, 0.4, 0.0}) ==
          std::vector<double>{0.0, 0.0, 0.0});
    CHECK_THROWS_AS(pair_daily_returns(positions_only({1, 1}), rx, ry), std::invalid_argument);
}

TEST_CASE("cumulative_return modes", "[backtest]") {
    const std::vector<double> r{0.01, -0.005};
    CHECK_THAT(cumulative_return(r, ReturnMode::Compounded), WithinAbs(0.00495, 1e-15));
    CHECK_THAT(cumulative_return(r, ReturnMode::Arithmetic), WithinAbs(0.005, 1e-15));
    CHECK(cumulative_return(std::vector<double>{}, ReturnMode::Compounded) == 0.0);
    CHECK(cumulative_return(std::vector<double>{}, ReturnMode::Arithmetic) == 0.0);
    CHECK_THROWS_AS(cumulative_return(std::vector<double>{-1.0}, ReturnMode::Compounded),
                    std::invalid_argument);
}

TEST_CASE("compounded vs arithmetic second-order bound", "[backtest]") {
    const auto noise = synthetic::ar1(500, 0.0, 9, 0.02);
    std::vector<double> r;
    for (double v : noise) r.push_back(std::clamp(v, -0.05, 0.05));
    const double sum = cumulative_return(r, ReturnMode::Arithmetic);
    const double comp = cumulative_return(r, ReturnMode::Compounded);
    double sq = 0.0, cube = 0.0;
    for (double v : r) {
        sq += v * v;
        cube += std::abs(v * v * v);
    }
    // log(1 + C) = sum log(1 + r) >= sum r - 0.5 sum r^2 - sum |r|^3 for |r| <= 0.05,
    // and C >= log(1 + C).
    CHECK(comp >= sum - 0.5 * sq - cube);
}

TEST_CASE("max_drawdown", "[backtest]") {
    CHECK(max_drawdown(std::vector<double>{0.1, 0.1}) == 0.0);
    CHECK_THAT(max_drawdown(std::vector<double>{0.1, -0.5, 0.2}), WithinAbs(-0.5, 1e-15));
    CHECK_THAT(max_drawdown(std::vector<double>{-0.1, -0.1}), WithinAbs(-0.19, 1e-15));
}

TEST_CASE("run_backtest basics", "[backtest]") {
    Fixture f(3);
    const auto never = run_backtest(f.panel, f.model, Thresholds(50.0, 1.0), f.test);
    CHECK(never.cumulative_return == 0.0);
    CHECK(never.n_trades == 0);
    for (double r : never.daily_returns) CHECK(r == 0.0);

    const auto rep = run_backtest(f.panel, f.model, Thresholds(2.0, 0.5), f.test);
    CHECK(rep.dates.size() == 250);
    CHECK(rep.daily_returns.front() == 0.0);
    CHECK(rep.equity.size() == 250);
    CHECK_THAT(rep.equity.back() - 1.0, WithinAbs(rep.cumulative_compounded, 1e-12));
    CHECK(rep.n_trades == rep.signals.trades.size());

    BacktestOptions arith;
    arith.mode = ReturnMode::Arithmetic;
    const auto a = run_backtest(f.panel, f.model, Thresholds(2.0, 0.5), f.test, arith);
    CHECK(a.cumulative_return == rep.cumulative_arithmetic);
    CHECK(a.cumulative_compounded == rep.cumulative_compounded);
}

TEST_CASE("run_backtest enforces point-in-time order", "[backtest]") {
    Fixture f(4);
    CHECK_THROWS_AS(run_backtest(f.panel, f.model, Thresholds(2.0, 1.0), f.fit), PitViolation);
    const WindowSpec overlap(f.fit.end, f.test.end);
    CHECK_THROWS_AS(run_backtest(f.panel, f.model, Thresholds(2.0, 1.0), overlap), PitViolation);
}

TEST_CASE("truncating after the window leaves the report unchanged", "[backtest]") {
    Fixture f(5);
    const auto& dates = f.panel.dates();
    const WindowSpec eval(dates[250], dates[379]);
    const auto full = run_backtest(f.panel, f.model, Thresholds(1.5, 0.3), eval);
    const auto cut = slice(f.panel, WindowSpec(dates.front(), dates[379]));
    const auto trunc = run_backtest(cut, f.model, Thresholds(1.5, 0.3), eval);
    CHECK(full.daily_returns == trunc.daily_returns);
    CHECK(full.signals.z_scores == trunc.signals.z_scores);
    CHECK(full.signals.positions == trunc.signals.positions);
    CHECK(std::memcmp(&full.cumulative_return, &trunc.cumulative_return, sizeof(double)) == 0);
}

TEST_CASE("mean reversion pays on OU spreads", "[backtest]") {
    int positive = 0;
    for (int s = 0; s < 200; ++s) {
        Fixture f(1000 + s);
        positive += run_backtest(f.panel, f.model, Thresholds(2.0, 0.5), f.test).cumulative_return > 0.0;
    }
    CHECK(positive >= 180);
}

TEST_CASE("convergence trades stay profitable when the pair is flipped", "[backtest]") {
    const auto dates = synthetic::business_days(d("2021-01-04"), 80);
    std::vector<double> y(80), x(80);
    for (std::size_t t = 0; t < 80; ++t) {
        y[t] = 100.0 + 0.1 * static_cast<double>(t);
        double s = 2.0 * std::sin(0.7 * static_cast<double>(t));
        if (t >= 60) {
            // Spread jumps wide, then converges linearly back to zero.
            s = t == 60 ? 0.0 : std::max(0.0, 8.0 - 0.8 * static_cast<double>(t - 61));
        }
        x[t] = y[t] + s;
    }
    const std::span<const double> xf(x.data(), 60), yf(y.data(), 60);
    const std::span<const double> xt(x.data() + 60, 20), yt(y.data() + 60, 20);
    const std::span<const Date> dt(dates.data() + 60, 20);
    const WindowSpec fit(dates.front(), dates[59]);

    const auto forward = fit_spread_model(xf, yf, PairKey("A", "B"), fit);
    const auto flipped = fit_spread_model(yf, xf, PairKey("A", "B"), fit);
    const auto r1 = backtest_series(forward, xt, yt, dt, Thresholds(2.0, 0.5));
    const auto r2 = backtest_series(flipped, yt, xt, dt, Thresholds(2.0, 0.5));
    CHECK(r1.n_trades >= 1);
    CHECK(r2.n_trades >= 1);
    CHECK(r1.cumulative_return > 0.0);
    CHECK(r2.cumulative_return > 0.0);
}

TEST_CASE("cost hook and beta-weighted legs", "[backtest]") {
    Fixture f(6);
    const auto base = run_backtest(f.panel, f.model, Thresholds(1.5, 0.3), f.test);
    REQUIRE(base.n_trades > 0);
    BacktestOptions costly;
    costly.cost_per_turnover = 0.001;
    const auto with_cost = run_backtest(f.panel, f.model, Thresholds(1.5, 0.3), f.test, costly);
    CHECK(with_cost.cumulative_arithmetic < base.cumulative_arithmetic);
    BacktestOptions beta;
    beta.legs = LegWeighting::BetaWeighted;
    const auto bw = run_backtest(f.panel, f.model, Thresholds(1.5, 0.3), f.test, beta);
    CHECK(bw.signals.positions == base.signals.positions);
    CHECK(std::isfinite(bw.cumulative_return));
}

TEST_CASE("split validation and defaults", "[backtest]") {
    const auto dates = synthetic::business_days(d("2020-01-01"), 400);
    const auto s = default_splits(dates, 252, 63);
    CHECK(s.test.end == dates.back());
    CHECK(s.test.start == dates[400 - 63]);
    CHECK(s.training.start == dates[400 - 63 - 252]);
    CHECK_NOTHROW(s.validate());
    CHECK_THROWS_AS(default_splits(std::span<const Date>(dates).first(300), 252, 63), DataError);

    SplitConfig bad{WindowSpec(d("2020-01-01"), d("2020-06-30")),
                    WindowSpec(d("2020-07-01"), d("2020-12-31")), std::nullopt,
                    WindowSpec(d("2020-12-01"), d("2021-03-31"))};
    CHECK_THROWS_AS(bad.validate(), PitViolation);
    bad.test = WindowSpec(d("2021-01-01"), d("2021-03-31"));
    CHECK_NOTHROW(bad.validate());
    bad.validation = WindowSpec(d("2020-12-15"), d("2021-01-15"));
    CHECK_THROWS_AS(bad.validate(), PitViolation);
}

TEST_CASE("run_portfolio aggregates", "[backtest]") {
    Fixture f(7, 3);
    const Thresholds th(2.0, 0.5);
    const auto single = run_portfolio(f.panel, {{f.model, th}}, f.test, {}, 1);
    REQUIRE(single.reports.size() == 1);
    CHECK(single.compounded.mean == single.reports[0].cumulative_return);
    CHECK(single.compounded.std == 0.0);

    const auto copies = run_portfolio(f.panel, {{f.model, th}, {f.model, th}, {f.model, th}},
                                      f.test, {}, 2);
    CHECK(copies.compounded.count == 3);
    CHECK(copies.compounded.mean == single.compounded.mean);
    CHECK(copies.compounded.std == 0.0);
    CHECK(copies.compounded.min == copies.compounded.max);

    auto bad_model = f.model;
    bad_model.pair = PairKey("P000A", "ZZZ");
    const auto partial = run_portfolio(f.panel, {{f.model, th}, {bad_model, th}}, f.test, {}, 1);
    CHECK(partial.reports.size() == 1);
    CHECK(partial.failures.size() == 1);

    auto leaky = f.model;
    leaky.fit_window = f.test;
    CHECK_THROWS_AS(run_portfolio(f.panel, {{f.model, th}, {leaky, th}}, f.test), PitViolation);
    CHECK_THROWS_AS(run_portfolio(f.panel, {}, f.test), std::invalid_argument);
}

TEST_CASE("portfolio mean agrees with per-pair simulation", "[backtest]") {
    Fixture f(8, 100);
    std::vector<PortfolioSelection> sel;
    std::vector<double> per_pair;
    for (int k = 0; k < 100; ++k) {
        char x[8], y[8];
        std::snprintf(x, sizeof(x), "P%03dA", k);
        std::snprintf(y, sizeof(y), "P%03dB", k);
        const auto m = fit_spread_model(f.panel, PairKey(x, y), f.fit);
        sel.push_back({m, Thresholds(2.0, 0.5)});
        per_pair.push_back(run_backtest(f.panel, m, Thresholds(2.0, 0.5), f.test).cumulative_return);
    }
    const auto report = run_portfolio(f.panel, sel, f.test, {}, 4);
    const double mean = std::accumulate(per_pair.begin(), per_pair.end(), 0.0) / 100.0;
    CHECK_THAT(report.compounded.mean, WithinAbs(mean, 1e-12));
    CHECK(report.compounded.count == 100);
}
