#include "pairtrade/report_io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace pairtrade::io {

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

void write_screen_results(std::ostream& out, std::span<const ScreenResult> results) {
    out << "ticker_x,ticker_y,correlation,passed\n";
    for (const auto& r : results) {
        out << r.pair.x() << ',' << r.pair.y() << ',' << format_number(r.correlation) << ','
            << (r.passed ? "true" : "false") << '\n';
    }
}

void write_histogram(std::ostream& out, std::span<const std::size_t> counts) {
    out << "bin_low,bin_high,count\n";
    const double width = 2.0 / static_cast<double>(counts.size());
    for (std::size_t b = 0; b < counts.size(); ++b) {
        const double lo = -1.0 + width * static_cast<double>(b);
        out << format_number(lo) << ',' << format_number(lo + width) << ',' << counts[b] << '\n';
    }
}

void write_coint_results(std::ostream& out, std::span<const CointResult> results) {
    out << "ticker_x,ticker_y,beta,alpha,adf_t,p_value,lags,cointegrated\n";
    for (const auto& r : results) {
        out << r.pair.x() << ',' << r.pair.y() << ',';
        if (r.error) {
            out << "nan,nan,nan,nan,,false\n";
            continue;
        }
        out << format_number(r.ols.beta) << ',' << format_number(r.ols.alpha) << ','
            << format_number(r.adf.t_stat) << ',' << format_number(r.adf.p_value) << ','
            << r.adf.lags_used << ',' << (r.cointegrated ? "true" : "false") << '\n';
    }
}

void write_signals(std::ostream& out, const SignalSeries& signals) {
    out << "date,z_score,position\n";
    for (std::size_t t = 0; t < signals.dates.size(); ++t) {
        out << format_date(signals.dates[t]) << ',' << format_number(signals.z_scores[t]) << ','
            << signals.positions[t] << '\n';
    }
}

void write_trades(std::ostream& out, const SignalSeries& signals) {
    out << "entry_date,exit_date,direction,entry_z,exit_z\n";
    for (const auto& tr : signals.trades) {
        out << format_date(tr.entry_date) << ',' << format_date(tr.exit_date) << ','
            << tr.direction << ',' << format_number(tr.entry_z) << ','
            << format_number(tr.exit_z) << '\n';
    }
}

void write_backtest(std::ostream& out, const BacktestReport& report) {
    out << "date,daily_return,equity\n";
    for (std::size_t t = 0; t < report.dates.size(); ++t) {
        out << format_date(report.dates[t]) << ',' << format_number(report.daily_returns[t])
            << ',' << format_number(report.equity[t]) << '\n';
    }
}

void write_optimization_results(std::ostream& out, std::span<const OptimizationResult> results) {
    out << "ticker_x,ticker_y,method,theta_in,theta_out,objective,n_trials\n";
    for (const auto& r : results) {
        out << r.pair.x() << ',' << r.pair.y() << ',';
        if (r.error) {
            out << ",nan,nan,nan,0\n";
            continue;
        }
        out << to_string(r.search->method) << ',' << format_number(r.selected->theta_in()) << ','
            << format_number(r.selected->theta_out()) << ','
            << format_number(r.search->best_objective) << ',' << r.search->history.size()
            << '\n';
    }
}

void write_trials(std::ostream& out, const SearchResult& search) {
    out << "index,theta_in,theta_out,objective\n";
    for (const auto& t : search.history) {
        out << t.index << ',' << format_number(t.thresholds.theta_in()) << ','
            << format_number(t.thresholds.theta_out()) << ',' << format_number(t.objective)
            << '\n';
    }
}

nlohmann::ordered_json to_json(const CrossPairStats& s) {
    nlohmann::ordered_json j;
    j["count"] = s.count;
    j["mean"] = s.mean;
    j["std"] = s.std;
    j["min"] = s.min;
    j["max"] = s.max;
    return j;
}

nlohmann::ordered_json to_json(const PortfolioReport& report) {
    nlohmann::ordered_json j;
    j["compounded"] = to_json(report.compounded);
    j["arithmetic"] = to_json(report.arithmetic);
    j["failures"] = report.failures.size();
    auto pairs = nlohmann::ordered_json::array();
    for (const auto& r : report.reports) {
        nlohmann::ordered_json p;
        p["ticker_x"] = r.pair.x();
        p["ticker_y"] = r.pair.y();
        p["cumulative_return"] = r.cumulative_return;
        p["cumulative_compounded"] = r.cumulative_compounded;
        p["cumulative_arithmetic"] = r.cumulative_arithmetic;
        p["n_trades"] = r.n_trades;
        p["return_std"] = r.return_std;
        p["max_drawdown"] = r.max_drawdown;
        pairs.push_back(std::move(p));
    }
    j["pairs"] = std::move(pairs);
    auto failures = nlohmann::ordered_json::array();
    for (const auto& f : report.failures) {
        failures.push_back({{"ticker_x", f.pair.x()}, {"ticker_y", f.pair.y()}, {"error", f.error}});
    }
    j["failed_pairs"] = std::move(failures);
    return j;
}

nlohmann::ordered_json to_json(const ThresholdStats& s) {
    nlohmann::ordered_json j;
    j["count"] = s.count;
    j["theta_in_mean"] = s.theta_in_mean;
    j["theta_in_std"] = s.theta_in_std;
    j["theta_out_mean"] = s.theta_out_mean;
    j["theta_out_std"] = s.theta_out_std;
    return j;
}

std::vector<std::vector<std::string>> read_csv_rows(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) fields.push_back(cell);
        if (!line.empty() && line.back() == ',') fields.emplace_back();
        rows.push_back(std::move(fields));
    }
    return rows;
}

}  // namespace pairtrade::io
