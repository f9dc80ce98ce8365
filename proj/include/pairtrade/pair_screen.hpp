#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairtrade/market_data.hpp"

namespace pairtrade {

/// Unordered ticker pair stored in canonical order (x < y lexicographically).
/// The first-named ticker is always the regressand in the cointegrating
/// regression.
class PairKey {
public:
    /// Requires x < y; throws std::invalid_argument otherwise.
    PairKey(std::string x, std::string y);

    /// Orders the two tickers canonically.
    static PairKey canonical(const std::string& a, const std::string& b);

    [[nodiscard]] const std::string& x() const { return x_; }
    [[nodiscard]] const std::string& y() const { return y_; }
    /// "X_Y", used in per-pair file names.
    [[nodiscard]] std::string label() const { return x_ + "_" + y_; }

    friend auto operator<=>(const PairKey&, const PairKey&) = default;
    friend bool operator==(const PairKey&, const PairKey&) = default;

private:
    std::string x_;
    std::string y_;
};

struct ScreenResult {
    PairKey pair;
    double correlation;  ///< NaN when the pair failed
    bool passed;
    std::optional<std::string> error;
};

/// All n(n-1)/2 canonical pairs in lexicographic order. Duplicate tickers are
/// collapsed.
std::vector<PairKey> enumerate_pairs(std::vector<std::string> tickers);

/// Number of unordered pairs of n items.
constexpr std::uint64_t pair_count(std::uint64_t n) { return n < 2 ? 0 : n * (n - 1) / 2; }

/// k distinct pairs drawn uniformly without replacement, reproducible from seed.
std::vector<PairKey> sample_pairs(std::span<const PairKey> pairs, std::size_t k,
                                  std::uint64_t seed);

/// Pearson correlation with sample moments, clamped to [-1, 1].
double correlation(std::span<const double> x, std::span<const double> y);

/// Optional preprocessing: screen on min-max / log-shift transformed returns.
struct TransformOptions {
    double shift = 0.5;
    double epsilon = 1e-6;
};

struct ScreenOptions {
    double threshold = 0.8;
    std::size_t threads = 0;
};

/// Correlates each candidate pair over the return rows whose dates fall in
/// `window`. When `pairs` is empty every pair of the panel is screened.
/// Output is sorted by descending correlation, then PairKey; failed pairs
/// (degenerate series, unknown tickers) come last.
std::vector<ScreenResult> screen_universe(const ReturnPanel& returns, const WindowSpec& window,
                                          const ScreenOptions& options,
                                          std::optional<std::vector<PairKey>> pairs = {});

/// Same, but each ticker's price series inside the window is first passed
/// through transformed_returns().
std::vector<ScreenResult> screen_universe_transformed(
    const PricePanel& prices, const WindowSpec& window, const ScreenOptions& options,
    const TransformOptions& transform, std::optional<std::vector<PairKey>> pairs = {});

/// Equal-width histogram of the successful correlations over [-1, 1].
std::vector<std::size_t> correlation_histogram(std::span<const ScreenResult> results,
                                               std::size_t bins = 40);

}  // namespace pairtrade
