#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pairtrade/date.hpp"

namespace pairtrade {

/// Inclusive calendar window. Dates outside the panel's range are clamped:
/// slicing keeps exactly the panel dates d with start <= d <= end.
struct WindowSpec {
    Date start;
    Date end;

    WindowSpec(Date start_date, Date end_date);

    [[nodiscard]] bool contains(const Date& d) const { return start <= d && d <= end; }
    friend bool operator==(const WindowSpec&, const WindowSpec&) = default;
};

/// Half-open row range [first, last) of `dates` falling inside `window`.
/// Throws DataError when the intersection is empty.
std::pair<std::size_t, std::size_t> window_rows(std::span<const Date> dates,
                                                const WindowSpec& window);

/// Date x ticker matrix, column-major so each ticker's series is contiguous.
class DatedMatrix {
public:
    DatedMatrix() = default;
    DatedMatrix(std::vector<Date> dates, std::vector<std::string> tickers,
                std::vector<double> column_major);

    [[nodiscard]] std::size_t rows() const { return dates_.size(); }
    [[nodiscard]] std::size_t cols() const { return tickers_.size(); }
    [[nodiscard]] const std::vector<Date>& dates() const { return dates_; }
    [[nodiscard]] const std::vector<std::string>& tickers() const { return tickers_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }

    [[nodiscard]] double at(std::size_t row, std::size_t col) const {
        return values_[col * dates_.size() + row];
    }
    [[nodiscard]] std::span<const double> column(std::size_t col) const {
        return {values_.data() + col * dates_.size(), dates_.size()};
    }
    [[nodiscard]] std::optional<std::size_t> ticker_index(const std::string& ticker) const;
    /// Column by ticker; throws DataError if the ticker is absent.
    [[nodiscard]] std::span<const double> column(const std::string& ticker) const;

    friend bool operator==(const DatedMatrix&, const DatedMatrix&) = default;

protected:
    std::vector<Date> dates_;
    std::vector<std::string> tickers_;
    std::vector<double> values_;
};

/// Aligned adjusted-close prices. Dates strictly increasing, every cell
/// strictly positive and finite.
class PricePanel : public DatedMatrix {
public:
    PricePanel() = default;
    PricePanel(std::vector<Date> dates, std::vector<std::string> tickers,
               std::vector<double> column_major);
};

/// Simple returns, one row fewer than the source panel. Each row is stamped
/// with the later date of its price pair.
class ReturnPanel : public DatedMatrix {
public:
    ReturnPanel() = default;
    ReturnPanel(std::vector<Date> dates, std::vector<std::string> tickers,
                std::vector<double> column_major);
};

struct LoadOptions {
    /// Tickers missing on a larger fraction of rows are dropped.
    double max_missing_fraction = 0.05;
    char delimiter = ',';
};

struct LoadResult {
    PricePanel panel;
    std::vector<std::string> dropped_tickers;
    std::size_t dropped_leading_rows = 0;
};

/// Reads a wide CSV (`date,T1,T2,...`). Empty, `NA` and `NaN` cells count as
/// missing. Interior gaps are forward-filled; leading rows that cannot be
/// filled are removed.
LoadResult load_panel(const std::filesystem::path& path, const LoadOptions& options = {});
LoadResult load_panel(std::istream& in, const LoadOptions& options = {});

/// Writes the wide CSV format with 10 significant digits.
void write_panel(std::ostream& out, const DatedMatrix& panel);
void write_panel(const std::filesystem::path& path, const DatedMatrix& panel);

/// R_t = (P_t - P_{t-1}) / P_{t-1} for every ticker.
ReturnPanel compute_returns(const PricePanel& panel);

/// Same formula on a single series; result has size() - 1 entries.
std::vector<double> simple_returns(std::span<const double> prices);

/// Maps the series linearly onto [0, 1]. Throws NumericalError if constant.
std::vector<double> normalize_minmax(std::span<const double> series);

/// (1 - shift) * log(max(v, epsilon)) elementwise.
std::vector<double> log_shift_transform(std::span<const double> normalized, double shift,
                                        double epsilon = 1e-6);

/// Min-max, log-shift, then returns on the transformed values. The return
/// denominator is |D''_{t-1}| floored at epsilon, so the transformed returns
/// keep the sign of the underlying price move.
std::vector<double> transformed_returns(std::span<const double> prices, double shift,
                                        double epsilon = 1e-6);

PricePanel slice(const PricePanel& panel, const WindowSpec& window);
ReturnPanel slice(const ReturnPanel& panel, const WindowSpec& window);

}  // namespace pairtrade
