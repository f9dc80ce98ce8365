#include "pairtrade/pair_screen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pairtrade/error.hpp"
#include "pairtrade/parallel.hpp"

namespace pairtrade {

namespace {

struct Centered {
    std::vector<double> values;
    double sum_squares = 0.0;
    bool degenerate = true;
};

Centered center(std::span<const double> x) {
    Centered c;
    if (x.empty()) return c;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (!(*hi > *lo) || !std::isfinite(*lo) || !std::isfinite(*hi)) return c;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    c.values.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        c.values[i] = x[i] - mean;
        c.sum_squares += c.values[i] * c.values[i];
    }
    c.degenerate = !(c.sum_squares > 0.0);
    return c;
}

double combine(const Centered& a, const Centered& b) {
    double sxy = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i) sxy += a.values[i] * b.values[i];
    const double r = sxy / std::sqrt(a.sum_squares * b.sum_squares);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<ScreenResult> screen_columns(const std::vector<std::string>& tickers,
                                         const std::vector<std::vector<double>>& series,
                                         const ScreenOptions& options,
                                         std::optional<std::vector<PairKey>> pairs) {
    if (options.threshold < -1.0 || options.threshold > 1.0) {
        throw std::invalid_argument("correlation threshold must lie in [-1, 1]");
    }
    const std::vector<PairKey> candidates = pairs ? std::move(*pairs) : enumerate_pairs(tickers);

    std::vector<Centered> centered(series.size());
    parallel_for(series.size(), options.threads,
                 [&](std::size_t i) { centered[i] = center(series[i]); });

    auto index_of = [&](const std::string& t) -> std::optional<std::size_t> {
        const auto it = std::find(tickers.begin(), tickers.end(), t);
        if (it == tickers.end()) return std::nullopt;
        return static_cast<std::size_t>(it - tickers.begin());
    };

    std::vector<ScreenResult> results(candidates.size(),
                                      ScreenResult{PairKey("a", "b"), 0.0, false, std::nullopt});
    parallel_for(candidates.size(), options.threads, [&](std::size_t k) {
        const auto& pair = candidates[k];
        ScreenResult r{pair, std::numeric_limits<double>::quiet_NaN(), false, std::nullopt};
        const auto ix = index_of(pair.x());
        const auto iy = index_of(pair.y());
        if (!ix || !iy) {
            r.error = "ticker not in panel";
        } else if (centered[*ix].degenerate || centered[*iy].degenerate) {
            r.error = "degenerate series (zero variance)";
        } else {
            r.correlation = combine(centered[*ix], centered[*iy]);
            r.passed = r.correlation >= options.threshold;
        }
        results[k] = std::move(r);
    });

    std::sort(results.begin(), results.end(), [](const ScreenResult& a, const ScreenResult& b) {
        const bool fa = a.error.has_value();
        const bool fb = b.error.has_value();
        if (fa != fb) return !fa;
        if (!fa && a.correlation != b.correlation) return a.correlation > b.correlation;
        return a.pair < b.pair;
    });
    return results;
}

}  // namespace

PairKey::PairKey(std::string x, std::string y) : x_(std::move(x)), y_(std::move(y)) {
    if (!(x_ < y_)) {
        throw std::invalid_argument("PairKey requires x < y (got '" + x_ + "', '" + y_ + "')");
    }
}

PairKey PairKey::canonical(const std::string& a, const std::string& b) {
    return a < b ? PairKey(a, b) : PairKey(b, a);
}

std::vector<PairKey> enumerate_pairs(std::vector<std::string> tickers) {
    std::sort(tickers.begin(), tickers.end());
    tickers.erase(std::unique(tickers.begin(), tickers.end()), tickers.end());
    if (tickers.size() < 2) {
        throw std::invalid_argument("enumerate_pairs needs at least 2 distinct tickers");
    }
    std::vector<PairKey> out;
    out.reserve(pair_count(tickers.size()));
    for (std::size_t i = 0; i < tickers.size(); ++i) {
        for (std::size_t j = i + 1; j < tickers.size(); ++j) {
            out.emplace_back(tickers[i], tickers[j]);
        }
    }
    return out;
}

std::vector<PairKey> sample_pairs(std::span<const PairKey> pairs, std::size_t k,
                                  std::uint64_t seed) {
    if (k == 0 || k > pairs.size()) {
        throw std::invalid_argument("sample_pairs: k must lie in [1, " +
                                    std::to_string(pairs.size()) + "]");
    }
    std::vector<std::size_t> idx(pairs.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, idx.size() - 1);
        std::swap(idx[i], idx[pick(rng)]);
    }
    std::vector<PairKey> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) out.push_back(pairs[idx[i]]);
    return out;
}

double correlation(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("correlation: length mismatch");
    }
    if (x.size() < 3) {
        throw std::invalid_argument("correlation: need at least 3 observations");
    }
    const auto cx = center(x);
    const auto cy = center(y);
    if (cx.degenerate || cy.degenerate) {
        throw NumericalError("correlation: zero-variance input");
    }
    return combine(cx, cy);
}

std::vector<ScreenResult> screen_universe(const ReturnPanel& returns, const WindowSpec& window,
                                          const ScreenOptions& options,
                                          std::optional<std::vector<PairKey>> pairs) {
    const auto [first, last] = window_rows(returns.dates(), window);
    if (last - first < 3) {
        throw std::invalid_argument("screen window must contain at least 3 return rows");
    }
    std::vector<std::vector<double>> series(returns.cols());
    for (std::size_t c = 0; c < returns.cols(); ++c) {
        const auto col = returns.column(c).subspan(first, last - first);
        series[c].assign(col.begin(), col.end());
    }
    return screen_columns(returns.tickers(), series, options, std::move(pairs));
}

std::vector<ScreenResult> screen_universe_transformed(const PricePanel& prices,
                                                      const WindowSpec& window,
                                                      const ScreenOptions& options,
                                                      const TransformOptions& transform,
                                                      std::optional<std::vector<PairKey>> pairs) {
    const auto [first, last] = window_rows(prices.dates(), window);
    if (last - first < 4) {
        throw std::invalid_argument("screen window must contain at least 4 price rows");
    }
    std::vector<std::vector<double>> series(prices.cols());
    for (std::size_t c = 0; c < prices.cols(); ++c) {
        const auto col = prices.column(c).subspan(first, last - first);
        try {
            series[c] = transformed_returns(col, transform.shift, transform.epsilon);
        } catch (const NumericalError&) {
            // constant price: left empty, reported per pair as degenerate
        }
    }
    return screen_columns(prices.tickers(), series, options, std::move(pairs));
}

std::vector<std::size_t> correlation_histogram(std::span<const ScreenResult> results,
                                               std::size_t bins) {
    if (bins == 0) throw std::invalid_argument("histogram needs at least one bin");
    std::vector<std::size_t> counts(bins, 0);
    const double width = 2.0 / static_cast<double>(bins);
    for (const auto& r : results) {
        if (r.error) continue;
        auto b = static_cast<std::size_t>(std::floor((r.correlation + 1.0) / width));
        counts[std::min(b, bins - 1)] += 1;
    }
    return counts;
}

}  // namespace pairtrade
