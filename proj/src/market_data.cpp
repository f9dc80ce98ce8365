#include "pairtrade/market_data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "pairtrade/error.hpp"

namespace pairtrade {

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string_view> split_line(std::string_view line, char delim) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return fields;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) {
        s.remove_prefix(1);
    }
    while (!s.empty() &&
           (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

double parse_cell(std::string_view cell, std::size_t line_no) {
    cell = trim(cell);
    if (cell.empty() || cell == "NA" || cell == "NaN" || cell == "nan" || cell == "null") {
        return kMissing;
    }
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
        throw DataError("line " + std::to_string(line_no) + ": unparsable price '" +
                        std::string(cell) + "'");
    }
    return value;
}

void check_dates(const std::vector<Date>& dates) {
    for (std::size_t i = 1; i < dates.size(); ++i) {
        if (!(dates[i - 1] < dates[i])) {
            throw DataError("dates must be strictly increasing (at " + format_date(dates[i]) +
                            ")");
        }
    }
}

template <class Panel>
Panel slice_impl(const Panel& panel, const WindowSpec& window) {
    const auto [first, last] = window_rows(panel.dates(), window);
    const std::size_t n = last - first;
    std::vector<Date> dates(panel.dates().begin() + static_cast<std::ptrdiff_t>(first),
                            panel.dates().begin() + static_cast<std::ptrdiff_t>(last));
    std::vector<double> values;
    values.reserve(n * panel.cols());
    for (std::size_t c = 0; c < panel.cols(); ++c) {
        const auto col = panel.column(c).subspan(first, n);
        values.insert(values.end(), col.begin(), col.end());
    }
    return Panel(std::move(dates), panel.tickers(), std::move(values));
}

}  // namespace

WindowSpec::WindowSpec(Date start_date, Date end_date) : start(start_date), end(end_date) {
    if (end < start) {
        throw std::invalid_argument("window start " + format_date(start) + " is after end " +
                                    format_date(end));
    }
}

std::pair<std::size_t, std::size_t> window_rows(std::span<const Date> dates,
                                                const WindowSpec& window) {
    const auto first = std::lower_bound(dates.begin(), dates.end(), window.start);
    const auto last = std::upper_bound(dates.begin(), dates.end(), window.end);
    if (first >= last) {
        throw DataError("window [" + format_date(window.start) + ", " + format_date(window.end) +
                        "] does not intersect the panel dates");
    }
    return {static_cast<std::size_t>(first - dates.begin()),
            static_cast<std::size_t>(last - dates.begin())};
}

DatedMatrix::DatedMatrix(std::vector<Date> dates, std::vector<std::string> tickers,
                         std::vector<double> column_major)
    : dates_(std::move(dates)), tickers_(std::move(tickers)), values_(std::move(column_major)) {
    if (values_.size() != dates_.size() * tickers_.size()) {
        throw std::invalid_argument("matrix size does not match dates x tickers");
    }
    check_dates(dates_);
}

std::optional<std::size_t> DatedMatrix::ticker_index(const std::string& ticker) const {
    const auto it = std::find(tickers_.begin(), tickers_.end(), ticker);
    if (it == tickers_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - tickers_.begin());
}

std::span<const double> DatedMatrix::column(const std::string& ticker) const {
    const auto idx = ticker_index(ticker);
    if (!idx) throw DataError("ticker '" + ticker + "' not in panel");
    return column(*idx);
}

PricePanel::PricePanel(std::vector<Date> dates, std::vector<std::string> tickers,
                       std::vector<double> column_major)
    : DatedMatrix(std::move(dates), std::move(tickers), std::move(column_major)) {
    for (std::size_t c = 0; c < cols(); ++c) {
        for (std::size_t r = 0; r < rows(); ++r) {
            const double v = at(r, c);
            if (!std::isfinite(v) || v <= 0.0) {
                throw DataError("non-positive or non-finite price for " + tickers_[c] + " on " +
                                format_date(dates_[r]));
            }
        }
    }
}

ReturnPanel::ReturnPanel(std::vector<Date> dates, std::vector<std::string> tickers,
                         std::vector<double> column_major)
    : DatedMatrix(std::move(dates), std::move(tickers), std::move(column_major)) {
    for (const double v : values_) {
        if (!std::isfinite(v) || v <= -1.0) {
            throw DataError("return panel contains a value <= -1 or non-finite");
        }
    }
}

LoadResult load_panel(const std::filesystem::path& path, const LoadOptions& options) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open '" + path.string() + "'");
    }
    return load_panel(in, options);
}

LoadResult load_panel(std::istream& in, const LoadOptions& options) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("empty price file");
    }
    const auto header = split_line(line, options.delimiter);
    if (header.size() < 2) {
        throw DataError("header must be date followed by at least one ticker");
    }
    std::vector<std::string> tickers;
    for (std::size_t i = 1; i < header.size(); ++i) {
        tickers.emplace_back(trim(header[i]));
    }

    // Rows keyed by date so that unsorted files are accepted.
    std::map<Date, std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_line(line, options.delimiter);
        if (fields.size() != header.size()) {
            throw DataError("line " + std::to_string(line_no) + ": expected " +
                            std::to_string(header.size()) + " fields, got " +
                            std::to_string(fields.size()));
        }
        const Date d = parse_date(fields[0]);
        std::vector<double> values(tickers.size());
        for (std::size_t i = 0; i < tickers.size(); ++i) {
            values[i] = parse_cell(fields[i + 1], line_no);
        }
        if (!rows.emplace(d, std::move(values)).second) {
            throw DataError("duplicate date " + format_date(d));
        }
    }
    if (rows.empty()) {
        throw DataError("price file has no data rows");
    }

    const std::size_t n_rows = rows.size();
    LoadResult result;
    std::vector<std::size_t> kept;
    for (std::size_t c = 0; c < tickers.size(); ++c) {
        std::size_t missing = 0;
        for (const auto& [d, values] : rows) {
            if (std::isnan(values[c])) ++missing;
        }
        const double fraction = static_cast<double>(missing) / static_cast<double>(n_rows);
        if (fraction > options.max_missing_fraction) {
            result.dropped_tickers.push_back(tickers[c]);
        } else {
            kept.push_back(c);
        }
    }

    // Forward fill, then find the first row where every kept ticker is known.
    std::vector<Date> dates;
    dates.reserve(n_rows);
    for (const auto& [d, values] : rows) dates.push_back(d);
    std::vector<std::vector<double>> columns(kept.size(), std::vector<double>(n_rows));
    std::size_t first_full = 0;
    for (std::size_t k = 0; k < kept.size(); ++k) {
        double last = kMissing;
        std::size_t r = 0;
        std::size_t first_known = n_rows;
        for (const auto& [d, values] : rows) {
            const double v = values[kept[k]];
            if (!std::isnan(v)) {
                last = v;
                if (first_known == n_rows) first_known = r;
            }
            columns[k][r] = last;
            ++r;
        }
        first_full = std::max(first_full, first_known);
    }
    if (kept.size() < 2) {
        throw DataError("fewer than 2 tickers survive cleaning");
    }
    if (first_full >= n_rows) {
        throw DataError("no row has every surviving ticker filled");
    }
    result.dropped_leading_rows = first_full;

    std::vector<std::string> kept_tickers;
    std::vector<double> values;
    values.reserve(kept.size() * (n_rows - first_full));
    for (std::size_t k = 0; k < kept.size(); ++k) {
        kept_tickers.push_back(tickers[kept[k]]);
        values.insert(values.end(), columns[k].begin() + static_cast<std::ptrdiff_t>(first_full),
                      columns[k].end());
    }
    dates.erase(dates.begin(), dates.begin() + static_cast<std::ptrdiff_t>(first_full));
    result.panel = PricePanel(std::move(dates), std::move(kept_tickers), std::move(values));
    return result;
}

void write_panel(std::ostream& out, const DatedMatrix& panel) {
    out << "date";
    for (const auto& t : panel.tickers()) out << ',' << t;
    out << '\n';
    char buf[32];
    for (std::size_t r = 0; r < panel.rows(); ++r) {
        out << format_date(panel.dates()[r]);
        for (std::size_t c = 0; c < panel.cols(); ++c) {
            std::snprintf(buf, sizeof(buf), "%.10g", panel.at(r, c));
            out << ',' << buf;
        }
        out << '\n';
    }
}

void write_panel(const std::filesystem::path& path, const DatedMatrix& panel) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_panel(out, panel);
}

std::vector<double> simple_returns(std::span<const double> prices) {
    if (prices.size() < 2) {
        throw std::invalid_argument("returns need at least 2 prices");
    }
    std::vector<double> out(prices.size() - 1);
    for (std::size_t t = 1; t < prices.size(); ++t) {
        out[t - 1] = (prices[t] - prices[t - 1]) / prices[t - 1];
    }
    return out;
}

ReturnPanel compute_returns(const PricePanel& panel) {
    if (panel.rows() < 2) {
        throw std::invalid_argument("compute_returns needs a panel with at least 2 dates");
    }
    std::vector<Date> dates(panel.dates().begin() + 1, panel.dates().end());
    std::vector<double> values;
    values.reserve((panel.rows() - 1) * panel.cols());
    for (std::size_t c = 0; c < panel.cols(); ++c) {
        const auto r = simple_returns(panel.column(c));
        values.insert(values.end(), r.begin(), r.end());
    }
    return ReturnPanel(std::move(dates), panel.tickers(), std::move(values));
}

std::vector<double> normalize_minmax(std::span<const double> series) {
    if (series.size() < 2) {
        throw std::invalid_argument("normalize_minmax needs at least 2 values");
    }
    const auto [lo_it, hi_it] = std::minmax_element(series.begin(), series.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) {
        throw NumericalError("normalize_minmax: degenerate (constant) series");
    }
    std::vector<double> out(series.size());
    const double range = hi - lo;
    for (std::size_t i = 0; i < series.size(); ++i) {
        out[i] = (series[i] - lo) / range;
    }
    return out;
}

std::vector<double> log_shift_transform(std::span<const double> normalized, double shift,
                                        double epsilon) {
    if (!(shift >= 0.0 && shift < 1.0)) {
        throw std::invalid_argument("log_shift_transform: shift must lie in [0, 1)");
    }
    if (!(epsilon > 0.0)) {
        throw std::invalid_argument("log_shift_transform: epsilon must be positive");
    }
    std::vector<double> out(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        out[i] = (1.0 - shift) * std::log(std::max(normalized[i], epsilon));
    }
    return out;
}

std::vector<double> transformed_returns(std::span<const double> prices, double shift,
                                        double epsilon) {
    const auto d2 = log_shift_transform(normalize_minmax(prices), shift, epsilon);
    std::vector<double> out(d2.size() - 1);
    for (std::size_t t = 1; t < d2.size(); ++t) {
        out[t - 1] = (d2[t] - d2[t - 1]) / std::max(std::abs(d2[t - 1]), epsilon);
    }
    return out;
}

PricePanel slice(const PricePanel& panel, const WindowSpec& window) {
    return slice_impl(panel, window);
}

ReturnPanel slice(const ReturnPanel& panel, const WindowSpec& window) {
    return slice_impl(panel, window);
}

}  // namespace pairtrade
