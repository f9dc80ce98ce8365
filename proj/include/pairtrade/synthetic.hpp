#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "pairtrade/date.hpp"
#include "pairtrade/market_data.hpp"

namespace pairtrade::synthetic {

/// Weekdays starting at `start` (inclusive when it is a weekday).
std::vector<Date> business_days(Date start, std::size_t count);

/// z_0 = start, z_t = z_{t-1} + N(0, sd^2).
std::vector<double> random_walk(std::size_t n, std::uint64_t seed, double sd = 1.0,
                                double start = 0.0);

/// Stationary AR(1) z_t = phi * z_{t-1} + N(0, sd^2), started from its
/// stationary distribution.
std::vector<double> ar1(std::size_t n, double phi, std::uint64_t seed, double sd = 1.0);

/// x_t = alpha + beta * y_t + s_t, where y is a geometric random walk and s an
/// Ornstein-Uhlenbeck spread (discretised as AR(1)) with the given half-life
/// and stationary standard deviation.
struct OuPairParams {
    std::size_t n_days = 500;
    double half_life = 10.0;
    double spread_sd = 1.0;
    double beta = 1.0;
    double alpha = 0.0;
    double y0 = 100.0;
    double y_daily_vol = 0.01;
};

struct OuPair {
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> spread;
};

OuPair ou_pair(const OuPairParams& params, std::uint64_t seed);

/// Panel of `n_pairs` independent OU pairs. Pair k uses tickers
/// "P###A" (x leg) and "P###B" (y leg), seeded from seed + k.
PricePanel ou_universe(std::size_t n_pairs, const OuPairParams& params, std::uint64_t seed,
                       Date start = Date{std::chrono::year{2015}, std::chrono::January,
                                         std::chrono::day{1}});

}  // namespace pairtrade::synthetic
