#include "pairtrade/cointegration.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "pairtrade/error.hpp"
#include "pairtrade/parallel.hpp"

namespace pairtrade {

namespace {

constexpr std::size_t kMinAdfLength = 15;

struct DesignFit {
    double ssr = 0.0;
    double t_level = 0.0;
};

// Builds the ADF design for lag order p over the rows t in [first_t, n).
// Column 0 is the constant, column 1 the lagged level.
void build_design(std::span<const double> z, std::size_t p, std::size_t first_t,
                  Eigen::MatrixXd& X, Eigen::VectorXd& y) {
    const std::size_t n = z.size();
    const auto rows = static_cast<Eigen::Index>(n - first_t);
    X.resize(rows, static_cast<Eigen::Index>(p + 2));
    y.resize(rows);
    for (std::size_t t = first_t; t < n; ++t) {
        const auto r = static_cast<Eigen::Index>(t - first_t);
        y(r) = z[t] - z[t - 1];
        X(r, 0) = 1.0;
        X(r, 1) = z[t - 1];
        for (std::size_t i = 1; i <= p; ++i) {
            X(r, static_cast<Eigen::Index>(i + 1)) = z[t - i] - z[t - i - 1];
        }
    }
}

DesignFit fit_design(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    const Eigen::Index k = X.cols();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) {
        throw NumericalError("ADF regression: singular design matrix");
    }
    const Eigen::VectorXd coef = qr.solve(y);
    const Eigen::VectorXd resid = y - X * coef;
    DesignFit fit;
    fit.ssr = resid.squaredNorm();

    const Eigen::MatrixXd r =
        qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    const Eigen::MatrixXd r_inv = r.template triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(k, k));
    const Eigen::MatrixXd xtx_inv =
        qr.colsPermutation() * (r_inv * r_inv.transpose()) * qr.colsPermutation().transpose();
    const double dof = static_cast<double>(X.rows() - k);
    const double sigma2 = fit.ssr / dof;
    const double se = std::sqrt(sigma2 * xtx_inv(1, 1));
    fit.t_level = coef(1) / se;
    if (!(sigma2 > 0.0) || !std::isfinite(fit.t_level)) {
        throw NumericalError("ADF regression: perfect fit, t statistic undefined");
    }
    return fit;
}

double mean_of(std::span<const double> v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

OlsFit fit_ols(std::span<const double> x, std::span<const double> y, bool with_intercept) {
    if (x.size() != y.size()) {
        throw std::invalid_argument("fit_ols: length mismatch");
    }
    const std::size_t n = x.size();
    if (n < 3) {
        throw std::invalid_argument("fit_ols: need at least 3 observations");
    }
    OlsFit fit;
    if (with_intercept) {
        const double mx = mean_of(x);
        const double my = mean_of(y);
        double syy = 0.0;
        double sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            syy += (y[i] - my) * (y[i] - my);
            sxy += (x[i] - mx) * (y[i] - my);
        }
        const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
        if (!(*hi > *lo) || !(syy > 0.0)) {
            throw NumericalError("fit_ols: zero-variance regressor");
        }
        fit.beta = sxy / syy;
        fit.alpha = mx - fit.beta * my;
    } else {
        double syy = 0.0;
        double sxy = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            syy += y[i] * y[i];
            sxy += x[i] * y[i];
        }
        if (!(syy > 0.0)) {
            throw NumericalError("fit_ols: zero regressor");
        }
        fit.beta = sxy / syy;
        fit.alpha = 0.0;
    }

    fit.residuals.resize(n);
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        fit.residuals[i] = x[i] - fit.alpha - fit.beta * y[i];
        ssr += fit.residuals[i] * fit.residuals[i];
    }
    const double mx = with_intercept ? mean_of(x) : 0.0;
    double sst = 0.0;
    for (std::size_t i = 0; i < n; ++i) sst += (x[i] - mx) * (x[i] - mx);
    fit.r_squared = sst > 0.0 ? std::clamp(1.0 - ssr / sst, 0.0, 1.0) : 1.0;
    return fit;
}

std::size_t default_adf_max_lags(std::size_t n) {
    const auto schwert =
        static_cast<std::size_t>(std::floor(12.0 * std::pow(static_cast<double>(n) / 100.0, 0.25)));
    const std::size_t cap = n / 2 >= 2 ? n / 2 - 2 : 0;
    return std::min(schwert, cap);
}

AdfResult adf_test(std::span<const double> series, std::optional<std::size_t> max_lags,
                   PValueSurface surface) {
    const std::size_t n = series.size();
    if (n < kMinAdfLength) {
        throw std::invalid_argument("adf_test: series needs at least " +
                                    std::to_string(kMinAdfLength) + " points");
    }
    for (const double v : series) {
        if (!std::isfinite(v)) throw NumericalError("adf_test: non-finite value in series");
    }
    const std::size_t cap = n / 2 - 2;
    const std::size_t max_p = std::min(max_lags.value_or(default_adf_max_lags(n)), cap);

    Eigen::MatrixXd X;
    Eigen::VectorXd y;

    // Lag order by AIC on the common sample t = max_p + 1 .. n - 1.
    std::size_t best_p = 0;
    if (max_p > 0) {
        const double n_common = static_cast<double>(n - 1 - max_p);
        double best_aic = std::numeric_limits<double>::infinity();
        for (std::size_t p = 0; p <= max_p; ++p) {
            build_design(series, p, max_p + 1, X, y);
            const auto fit = fit_design(X, y);
            const double aic =
                n_common * std::log(fit.ssr / n_common) + 2.0 * static_cast<double>(p + 2);
            if (aic < best_aic) {
                best_aic = aic;
                best_p = p;
            }
        }
    }

    build_design(series, best_p, best_p + 1, X, y);
    const auto fit = fit_design(X, y);
    AdfResult result;
    result.t_stat = fit.t_level;
    result.p_value = dickey_fuller_pvalue(fit.t_level, surface);
    result.lags_used = best_p;
    result.n_obs = static_cast<std::size_t>(X.rows());
    return result;
}

CointResult engle_granger(const PairKey& pair, std::span<const double> x,
                          std::span<const double> y, double p_threshold,
                          const EngleGrangerOptions& options) {
    if (!(p_threshold >= 0.0 && p_threshold <= 1.0)) {
        throw std::invalid_argument("cointegration threshold must lie in [0, 1]");
    }
    CointResult result{pair, fit_ols(x, y, options.with_intercept), {}, false, std::nullopt};

    double scale = 0.0;
    for (const double v : x) scale = std::max(scale, std::abs(v));
    double resid_max = 0.0;
    for (const double v : result.ols.residuals) resid_max = std::max(resid_max, std::abs(v));
    if (resid_max <= 1e-12 * (1.0 + scale)) {
        throw NumericalError("engle_granger: degenerate residuals (exact linear relation)");
    }

    result.adf = adf_test(result.ols.residuals, options.max_lags, options.surface);
    result.cointegrated = result.adf.p_value < p_threshold;
    return result;
}

std::vector<CointResult> coint_filter(const PricePanel& panel, const WindowSpec& window,
                                      const std::vector<PairKey>& survivors, double p_threshold,
                                      const CointFilterOptions& options) {
    if (survivors.empty()) {
        throw std::invalid_argument("coint_filter: no surviving pairs to test");
    }
    if (!(p_threshold >= 0.0 && p_threshold <= 1.0)) {
        throw std::invalid_argument("cointegration threshold must lie in [0, 1]");
    }
    const auto [first, last] = window_rows(panel.dates(), window);
    const std::size_t len = last - first;

    std::vector<CointResult> results(survivors.size(), CointResult{survivors.front()});
    parallel_for(survivors.size(), options.threads, [&](std::size_t i) {
        const auto& pair = survivors[i];
        try {
            auto x = panel.column(pair.x()).subspan(first, len);
            auto y = panel.column(pair.y()).subspan(first, len);
            if (options.use_returns) {
                const auto rx = simple_returns(x);
                const auto ry = simple_returns(y);
                results[i] = engle_granger(pair, rx, ry, p_threshold, options.test);
            } else {
                results[i] = engle_granger(pair, x, y, p_threshold, options.test);
            }
        } catch (const std::exception& e) {
            CointResult failed{pair};
            failed.adf.t_stat = std::numeric_limits<double>::quiet_NaN();
            failed.adf.p_value = std::numeric_limits<double>::quiet_NaN();
            failed.error = e.what();
            results[i] = std::move(failed);
        }
    });

    std::sort(results.begin(), results.end(), [](const CointResult& a, const CointResult& b) {
        const bool fa = a.error.has_value();
        const bool fb = b.error.has_value();
        if (fa != fb) return !fa;
        if (!fa && a.adf.p_value != b.adf.p_value) return a.adf.p_value < b.adf.p_value;
        return a.pair < b.pair;
    });
    return results;
}

}  // namespace pairtrade
