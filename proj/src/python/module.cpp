// Python bindings. Dates cross the boundary as "YYYY-MM-DD" strings and
// series as lists (or anything convertible to a list of floats).

#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "pairtrade/backtest.hpp"
#include "pairtrade/cointegration.hpp"
#include "pairtrade/error.hpp"
#include "pairtrade/market_data.hpp"
#include "pairtrade/optimizer.hpp"
#include "pairtrade/pair_screen.hpp"
#include "pairtrade/pvalue.hpp"
#include "pairtrade/signal_engine.hpp"
#include "pairtrade/synthetic.hpp"

namespace py = pybind11;
using namespace pairtrade;

namespace {

std::vector<Date> to_dates(const std::vector<std::string>& text) {
    std::vector<Date> out;
    out.reserve(text.size());
    for (const auto& s : text) out.push_back(parse_date(s));
    return out;
}

std::vector<std::string> from_dates(const std::vector<Date>& dates) {
    std::vector<std::string> out;
    out.reserve(dates.size());
    for (const auto& d : dates) out.push_back(format_date(d));
    return out;
}

PValueSurface surface_from(const std::string& name) {
    if (name == "unit_root") return PValueSurface::UnitRoot;
    if (name == "engle_granger") return PValueSurface::EngleGranger;
    throw std::invalid_argument("surface must be 'unit_root' or 'engle_granger'");
}

ExitRule exit_from(const std::string& name) {
    if (name == "band") return ExitRule::Band;
    if (name == "zero_cross") return ExitRule::ZeroCross;
    throw std::invalid_argument("exit must be 'band' or 'zero_cross'");
}

ReturnMode mode_from(const std::string& name) {
    if (name == "compounded") return ReturnMode::Compounded;
    if (name == "arithmetic") return ReturnMode::Arithmetic;
    throw std::invalid_argument("mode must be 'compounded' or 'arithmetic'");
}

py::dict trade_dict(const Trade& t) {
    py::dict d;
    d["entry_date"] = format_date(t.entry_date);
    d["exit_date"] = format_date(t.exit_date);
    d["direction"] = t.direction;
    d["entry_z"] = t.entry_z;
    d["exit_z"] = t.exit_z;
    d["entry_index"] = t.entry_index;
    d["exit_index"] = t.exit_index;
    d["forced"] = t.forced;
    return d;
}

py::dict signals_dict(const SignalSeries& s) {
    py::dict d;
    d["dates"] = from_dates(s.dates);
    d["z_scores"] = s.z_scores;
    d["positions"] = s.positions;
    py::list trades;
    for (const auto& t : s.trades) trades.append(trade_dict(t));
    d["trades"] = trades;
    return d;
}

py::dict search_dict(const SearchResult& r) {
    py::dict d;
    d["theta_in"] = r.best.theta_in();
    d["theta_out"] = r.best.theta_out();
    d["objective"] = r.best_objective;
    d["method"] = to_string(r.method);
    d["degenerate"] = r.degenerate;
    py::list history;
    for (const auto& t : r.history) {
        history.append(py::make_tuple(t.thresholds.theta_in(), t.thresholds.theta_out(),
                                      t.objective));
    }
    d["history"] = history;
    return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Pairs-trading research core";

    auto& base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<DataError>(m, "DataError", base.ptr());
    py::register_exception<PitViolation>(m, "PitViolation", base.ptr());
    py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
    py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

    // market_data
    py::class_<PricePanel>(m, "PricePanel")
        .def(py::init([](const std::vector<std::string>& dates, std::vector<std::string> tickers,
                         std::vector<double> column_major) {
                 return PricePanel(to_dates(dates), std::move(tickers), std::move(column_major));
             }),
             py::arg("dates"), py::arg("tickers"), py::arg("column_major"))
        .def_property_readonly("dates", [](const PricePanel& p) { return from_dates(p.dates()); })
        .def_property_readonly("tickers", &PricePanel::tickers)
        .def_property_readonly("shape", [](const PricePanel& p) {
            return py::make_tuple(p.rows(), p.cols());
        })
        .def("column", [](const PricePanel& p, const std::string& ticker) {
            const auto c = p.column(ticker);
            return std::vector<double>(c.begin(), c.end());
        });

    m.def("load_panel", [](const std::string& path, double max_missing_fraction) {
        LoadOptions opts;
        opts.max_missing_fraction = max_missing_fraction;
        auto r = load_panel(path, opts);
        return py::make_tuple(std::move(r.panel), r.dropped_tickers);
    }, py::arg("path"), py::arg("max_missing_fraction") = 0.05,
       "Load a wide price CSV; returns (panel, dropped_tickers).");
    m.def("simple_returns", [](const std::vector<double>& p) { return simple_returns(p); });
    m.def("log_shift_transform", [](const std::vector<double>& v, double shift, double eps) {
        return log_shift_transform(v, shift, eps);
    }, py::arg("normalized"), py::arg("shift") = 0.5, py::arg("epsilon") = 1e-6);

    // pair_screen
    m.def("pair_count", &pair_count);
    m.def("enumerate_pairs", [](std::vector<std::string> tickers) {
        std::vector<std::pair<std::string, std::string>> out;
        for (const auto& p : enumerate_pairs(std::move(tickers))) out.emplace_back(p.x(), p.y());
        return out;
    });
    m.def("correlation", [](const std::vector<double>& x, const std::vector<double>& y) {
        return correlation(x, y);
    });
    m.def("screen", [](const PricePanel& panel, const std::string& start, const std::string& end,
                       double threshold, std::size_t threads) {
        const auto results = screen_universe(compute_returns(panel),
                                             WindowSpec(parse_date(start), parse_date(end)),
                                             ScreenOptions{threshold, threads});
        py::list out;
        for (const auto& r : results) {
            out.append(py::make_tuple(r.pair.x(), r.pair.y(), r.correlation, r.passed));
        }
        return out;
    }, py::arg("panel"), py::arg("start"), py::arg("end"), py::arg("threshold") = 0.8,
       py::arg("threads") = 0,
       "Correlation screen of every pair; list of (x, y, correlation, passed).");

    // cointegration
    m.def("fit_ols", [](const std::vector<double>& x, const std::vector<double>& y,
                        bool with_intercept) {
        const auto f = fit_ols(x, y, with_intercept);
        py::dict d;
        d["beta"] = f.beta;
        d["alpha"] = f.alpha;
        d["residuals"] = f.residuals;
        d["r_squared"] = f.r_squared;
        return d;
    }, py::arg("x"), py::arg("y"), py::arg("with_intercept") = true);
    m.def("adf_test", [](const std::vector<double>& series, std::optional<std::size_t> max_lags,
                         const std::string& surface) {
        const auto r = adf_test(series, max_lags, surface_from(surface));
        py::dict d;
        d["t_stat"] = r.t_stat;
        d["p_value"] = r.p_value;
        d["lags_used"] = r.lags_used;
        d["n_obs"] = r.n_obs;
        return d;
    }, py::arg("series"), py::arg("max_lags") = py::none(), py::arg("surface") = "unit_root");
    m.def("dickey_fuller_pvalue", [](double t, const std::string& surface) {
        return dickey_fuller_pvalue(t, surface_from(surface));
    }, py::arg("t_stat"), py::arg("surface") = "unit_root");
    m.def("engle_granger", [](const std::vector<double>& x, const std::vector<double>& y,
                              double p_threshold) {
        const auto r = engle_granger(PairKey("X", "Y"), x, y, p_threshold);
        py::dict d;
        d["beta"] = r.ols.beta;
        d["alpha"] = r.ols.alpha;
        d["t_stat"] = r.adf.t_stat;
        d["p_value"] = r.adf.p_value;
        d["lags_used"] = r.adf.lags_used;
        d["cointegrated"] = r.cointegrated;
        return d;
    }, py::arg("x"), py::arg("y"), py::arg("p_threshold") = 0.05);

    // signal_engine
    py::class_<SpreadModel>(m, "SpreadModel")
        .def_readonly("beta", &SpreadModel::beta)
        .def_readonly("alpha", &SpreadModel::alpha)
        .def_readonly("mu_z", &SpreadModel::mu_z)
        .def_readonly("sigma_z", &SpreadModel::sigma_z)
        .def("z_score", [](const SpreadModel& s, double x, double y) { return z_score(s, x, y); });
    m.def("fit_spread_model", [](const std::vector<double>& x, const std::vector<double>& y,
                                 const std::string& fit_start, const std::string& fit_end) {
        return fit_spread_model(x, y, PairKey("X", "Y"),
                                WindowSpec(parse_date(fit_start), parse_date(fit_end)));
    }, py::arg("x"), py::arg("y"), py::arg("fit_start"), py::arg("fit_end"));
    m.def("signals_from_z", [](const std::vector<double>& z, const std::vector<std::string>& dates,
                               double theta_in, double theta_out, const std::string& exit) {
        return signals_dict(
            signals_from_z(z, to_dates(dates), Thresholds(theta_in, theta_out), exit_from(exit)));
    }, py::arg("z"), py::arg("dates"), py::arg("theta_in") = 2.0, py::arg("theta_out") = 1.0,
       py::arg("exit") = "band");

    // backtest
    m.def("cumulative_return", [](const std::vector<double>& r, const std::string& mode) {
        return cumulative_return(r, mode_from(mode));
    }, py::arg("daily"), py::arg("mode") = "compounded");
    m.def("backtest", [](const SpreadModel& model, const std::vector<double>& x,
                         const std::vector<double>& y, const std::vector<std::string>& dates,
                         double theta_in, double theta_out, const std::string& mode) {
        BacktestOptions opts;
        opts.mode = mode_from(mode);
        const auto r = backtest_series(model, x, y, to_dates(dates),
                                       Thresholds(theta_in, theta_out), opts);
        py::dict d;
        d["daily_returns"] = r.daily_returns;
        d["equity"] = r.equity;
        d["cumulative_return"] = r.cumulative_return;
        d["n_trades"] = r.n_trades;
        d["max_drawdown"] = r.max_drawdown;
        d["signals"] = signals_dict(r.signals);
        return d;
    }, py::arg("model"), py::arg("x"), py::arg("y"), py::arg("dates"), py::arg("theta_in") = 2.0,
       py::arg("theta_out") = 1.0, py::arg("mode") = "compounded");

    // optimizer
    m.def("grid_search", [](const std::function<double(double, double)>& objective) {
        return search_dict(grid_search(SearchSpace{}, [&](const Thresholds& t) {
            return objective(t.theta_in(), t.theta_out());
        }));
    }, py::arg("objective"),
       "Exhaustive search of the default 175-point grid; objective(theta_in, theta_out).");
    m.def("tpe_search", [](const std::function<double(double, double)>& objective,
                           std::size_t n_trials, std::uint64_t seed) {
        TpeOptions opts;
        opts.n_trials = n_trials;
        opts.seed = seed;
        return search_dict(tpe_search(SearchSpace{}.continuous(), [&](const Thresholds& t) {
            return objective(t.theta_in(), t.theta_out());
        }, opts));
    }, py::arg("objective"), py::arg("n_trials") = 100, py::arg("seed") = 0);

    // synthetic data
    m.def("ou_pair", [](std::size_t n_days, double half_life, double beta, std::uint64_t seed) {
        synthetic::OuPairParams p;
        p.n_days = n_days;
        p.half_life = half_life;
        p.beta = beta;
        const auto pair = synthetic::ou_pair(p, seed);
        return py::make_tuple(pair.x, pair.y, pair.spread);
    }, py::arg("n_days") = 500, py::arg("half_life") = 10.0, py::arg("beta") = 1.0,
       py::arg("seed") = 0, "Synthetic cointegrated pair; returns (x, y, spread).");
    m.def("business_days", [](const std::string& start, std::size_t count) {
        return from_dates(synthetic::business_days(parse_date(start), count));
    });
}
