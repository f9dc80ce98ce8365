#include "pairtrade/pvalue.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace pairtrade {

extern const char* const kPValueTableCsv;

namespace {

double to_double(const std::string& s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw std::runtime_error("p-value table: bad number '" + s + "'");
    }
    return v;
}

const std::vector<ResponseSurface>& compiled_table() {
    static const std::vector<ResponseSurface> table = parse_surface_table(kPValueTableCsv);
    return table;
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double ResponseSurface::pvalue(double t) const {
    if (std::isnan(t)) return t;
    if (t > tau_max) return 1.0;
    if (t < tau_min) return 0.0;
    auto small = [&](double x) { return small_p[0] + x * (small_p[1] + x * small_p[2]); };
    if (t <= tau_star) return normal_cdf(small(t));
    // The two published pieces do not join exactly at tau_star; taking the max
    // keeps p non-decreasing in t across the seam.
    const double z = large_p[0] + t * (large_p[1] + t * (large_p[2] + t * large_p[3]));
    return std::max(normal_cdf(z), normal_cdf(small(tau_star)));
}

std::vector<ResponseSurface> parse_surface_table(std::string_view csv) {
    std::istringstream in{std::string(csv)};
    std::string line;
    bool header_seen = false;
    std::vector<ResponseSurface> out;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) f.push_back(cell);
        if (f.size() != 12) {
            throw std::runtime_error("p-value table: expected 12 columns, got " +
                                     std::to_string(f.size()));
        }
        ResponseSurface s;
        s.name = f[0];
        s.n_vars = static_cast<int>(to_double(f[1]));
        s.tau_star = to_double(f[2]);
        s.tau_min = to_double(f[3]);
        s.tau_max = to_double(f[4]);
        for (int i = 0; i < 3; ++i) s.small_p[i] = to_double(f[5 + i]);
        for (int i = 0; i < 4; ++i) s.large_p[i] = to_double(f[8 + i]);
        out.push_back(std::move(s));
    }
    return out;
}

const ResponseSurface& response_surface(PValueSurface which) {
    const int n_vars = which == PValueSurface::UnitRoot ? 1 : 2;
    for (const auto& s : compiled_table()) {
        if (s.n_vars == n_vars) return s;
    }
    throw std::runtime_error("p-value table has no row for n_vars=" + std::to_string(n_vars));
}

double dickey_fuller_pvalue(double t_stat, PValueSurface which) {
    return response_surface(which).pvalue(t_stat);
}

}  // namespace pairtrade
