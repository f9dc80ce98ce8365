#include "pairtrade/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>

namespace pairtrade::synthetic {

std::vector<Date> business_days(Date start, std::size_t count) {
    std::vector<Date> out;
    out.reserve(count);
    std::chrono::sys_days day{start};
    while (out.size() < count) {
        const std::chrono::weekday wd{day};
        if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) out.emplace_back(day);
        day += std::chrono::days{1};
    }
    return out;
}

std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double sd, double start) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    std::vector<double> z(n);
    double level = start;
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) level += noise(rng);
        z[t] = level;
    }
    return z;
}

std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double sd) {
    if (!(std::abs(phi) < 1.0)) throw std::invalid_argument("ar1: |phi| must be < 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sd);
    std::vector<double> z(n);
    double level = noise(rng) / std::sqrt(1.0 - phi * phi);
    for (std::size_t t = 0; t < n; ++t) {
        if (t > 0) level = phi * level + noise(rng);
        z[t] = level;
    }
    return z;
}

OuPair ou_pair(const OuPairParams& p, std::uint64_t seed) {
    if (!(p.half_life > 0.0)) throw std::invalid_argument("ou_pair: half-life must be > 0");
    const double phi = std::pow(0.5, 1.0 / p.half_life);
    const double innovation_sd = p.spread_sd * std::sqrt(1.0 - phi * phi);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit(0.0, 1.0);
    OuPair out;
    out.x.resize(p.n_days);
    out.y.resize(p.n_days);
    out.spread.resize(p.n_days);
    double log_y = std::log(p.y0);
    double s = p.spread_sd * unit(rng);
    for (std::size_t t = 0; t < p.n_days; ++t) {
        if (t > 0) {
            log_y += p.y_daily_vol * unit(rng) - 0.5 * p.y_daily_vol * p.y_daily_vol;
            s = phi * s + innovation_sd * unit(rng);
        }
        out.y[t] = std::exp(log_y);
        out.spread[t] = s;
        out.x[t] = p.alpha + p.beta * out.y[t] + s;
    }
    return out;
}

PricePanel ou_universe(std::size_t n_pairs, const OuPairParams& params, std::uint64_t seed,
                       Date start) {
    auto dates = business_days(start, params.n_days);
    std::vector<std::string> tickers;
    std::vector<double> values;
    values.reserve(2 * n_pairs * params.n_days);
    char name[32];
    for (std::size_t k = 0; k < n_pairs; ++k) {
        const auto pair = ou_pair(params, seed + k);
        std::snprintf(name, sizeof(name), "P%03zuA", k);
        tickers.emplace_back(name);
        values.insert(values.end(), pair.x.begin(), pair.x.end());
        std::snprintf(name, sizeof(name), "P%03zuB", k);
        tickers.emplace_back(name);
        values.insert(values.end(), pair.y.begin(), pair.y.end());
    }
    return PricePanel(std::move(dates), std::move(tickers), std::move(values));
}

}  // namespace pairtrade::synthetic
