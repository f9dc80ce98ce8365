#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pairtrade/backtest.hpp"
#include "pairtrade/cointegration.hpp"
#include "pairtrade/optimizer.hpp"
#include "pairtrade/pair_screen.hpp"
#include "pairtrade/signal_engine.hpp"

// CSV/JSON emitters for every artifact the pipeline writes. Numbers use
// "%.12g" so that equal doubles always render to equal bytes.
namespace pairtrade::io {

std::string format_number(double v);

void write_screen_results(std::ostream& out, std::span<const ScreenResult> results);
void write_histogram(std::ostream& out, std::span<const std::size_t> counts);
void write_coint_results(std::ostream& out, std::span<const CointResult> results);
void write_signals(std::ostream& out, const SignalSeries& signals);
void write_trades(std::ostream& out, const SignalSeries& signals);
void write_backtest(std::ostream& out, const BacktestReport& report);
void write_optimization_results(std::ostream& out, std::span<const OptimizationResult> results);
void write_trials(std::ostream& out, const SearchResult& search);

nlohmann::ordered_json to_json(const CrossPairStats& stats);
nlohmann::ordered_json to_json(const PortfolioReport& report);
nlohmann::ordered_json to_json(const ThresholdStats& stats);

/// Splits a simple CSV (no quoting) into rows of fields, header included.
std::vector<std::vector<std::string>> read_csv_rows(std::istream& in);

}  // namespace pairtrade::io
