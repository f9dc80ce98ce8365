#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pairtrade/market_data.hpp"
#include "pairtrade/pair_screen.hpp"
#include "pairtrade/pvalue.hpp"

namespace pairtrade {

/// Least-squares fit of x_t = alpha + beta * y_t + z_t.
struct OlsFit {
    double beta = 0.0;   ///< hedge ratio
    double alpha = 0.0;  ///< intercept, 0 when fitted without one
    std::vector<double> residuals;
    double r_squared = 0.0;
};

/// Regresses x on y via the closed-form normal equations.
/// Throws NumericalError for a zero-variance regressor.
OlsFit fit_ols(std::span<const double> x, std::span<const double> y, bool with_intercept = true);

struct AdfResult {
    double t_stat = 0.0;
    double p_value = 1.0;
    std::size_t lags_used = 0;
    std::size_t n_obs = 0;  ///< rows in the final test regression
};

/// Schwert's rule floor(12 * (T / 100)^(1/4)), capped so the common-sample
/// regression keeps enough degrees of freedom.
std::size_t default_adf_max_lags(std::size_t n);

/**
 * Augmented Dickey-Fuller test with a constant and no trend:
 *
 *     dz_t = c + gamma * z_{t-1} + sum_{i=1..p} phi_i * dz_{t-i} + e_t
 *
 * p is chosen by minimum AIC over 0..max_lags, every candidate being fitted
 * on the same sample (the one left after max_lags lags). The chosen model is
 * then refitted on all available observations and t_stat = gamma / se(gamma).
 *
 * Throws std::invalid_argument for series shorter than 15 points and
 * NumericalError for a singular design (e.g. a constant series).
 */
AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> max_lags = {},
                   PValueSurface surface = PValueSurface::UnitRoot);

struct EngleGrangerOptions {
    bool with_intercept = true;
    /// EngleGranger accounts for the estimated hedge ratio; UnitRoot is the
    /// plain ADF surface.
    PValueSurface surface = PValueSurface::EngleGranger;
    std::optional<std::size_t> max_lags;
};

struct CointResult {
    PairKey pair;
    OlsFit ols;
    AdfResult adf;
    bool cointegrated = false;
    std::optional<std::string> error;
};

/// Two-step test: OLS of x (first-named) on y, then ADF on the residuals.
/// Throws NumericalError when the residuals are degenerate (e.g. x == y).
CointResult engle_granger(const PairKey& pair, std::span<const double> x,
                          std::span<const double> y, double p_threshold,
                          const EngleGrangerOptions& options = {});

struct CointFilterOptions {
    EngleGrangerOptions test;
    /// Test the simple-return series instead of price levels.
    bool use_returns = false;
    std::size_t threads = 0;
};

/// Runs engle_granger for every survivor on the prices inside `window`.
/// Per-pair failures are recorded in CointResult::error. Output is sorted by
/// ascending p-value, then PairKey, with failures last.
std::vector<CointResult> coint_filter(const PricePanel& panel, const WindowSpec& window,
                                      const std::vector<PairKey>& survivors, double p_threshold,
                                      const CointFilterOptions& options = {});

}  // namespace pairtrade
