#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace pairtrade {

/// Which null distribution a Dickey-Fuller t statistic is referred to.
enum class PValueSurface {
    UnitRoot,      ///< plain ADF, constant only
    EngleGranger,  ///< residuals of a two-variable cointegrating regression
};

/// One row of the response-surface table shipped in data/pvalue_surfaces.csv.
///
/// The p-value is Phi(poly(t)) with a quadratic below tau_star and a cubic
/// above it; 0 below tau_min and 1 above tau_max.
struct ResponseSurface {
    std::string name;
    int n_vars = 1;
    double tau_star = 0.0;
    double tau_min = 0.0;
    double tau_max = 0.0;
    std::array<double, 3> small_p{};
    std::array<double, 4> large_p{};

    [[nodiscard]] double pvalue(double t_stat) const;
};

/// Parses the CSV table format (comment lines start with '#').
std::vector<ResponseSurface> parse_surface_table(std::string_view csv);

/// Surfaces compiled in from data/pvalue_surfaces.csv.
const ResponseSurface& response_surface(PValueSurface which);

/// Convenience: response_surface(which).pvalue(t_stat).
double dickey_fuller_pvalue(double t_stat, PValueSurface which);

double normal_cdf(double x);

}  // namespace pairtrade
