#include "pairtrade/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pairtrade/error.hpp"
#include "pairtrade/parallel.hpp"
#include "pairtrade/pvalue.hpp"

namespace pairtrade {

namespace {

constexpr double kPi = 3.14159265358979323846;

// a beats b: larger objective, then smaller theta_in, then smaller theta_out.
bool better(const Trial& a, const Trial& b) {
    if (a.objective != b.objective) return a.objective > b.objective;
    if (a.thresholds.theta_in() != b.thresholds.theta_in()) {
        return a.thresholds.theta_in() < b.thresholds.theta_in();
    }
    return a.thresholds.theta_out() < b.thresholds.theta_out();
}

SearchResult finish(std::vector<Trial> history, SearchMethod method) {
    const auto best = std::min_element(history.begin(), history.end(),
                                       [](const Trial& a, const Trial& b) { return better(a, b); });
    SearchResult r{best->thresholds, best->objective, {}, method, false};
    r.degenerate = std::all_of(history.begin(), history.end(),
                               [](const Trial& t) { return t.objective == 0.0; });
    r.history = std::move(history);
    return r;
}

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

using Point = std::array<double, 2>;

// Product-Gaussian Parzen estimator truncated to the search box, with one
// broad prior component centred on the box.
class Parzen {
public:
    Parzen(const std::vector<Point>& points, const Point& lo, const Point& hi) : lo_(lo), hi_(hi) {
        const double n = static_cast<double>(points.size());
        for (std::size_t d = 0; d < 2; ++d) {
            const double range = hi[d] - lo[d];
            double mean = 0.0;
            for (const auto& p : points) mean += p[d];
            mean /= n;
            double ss = 0.0;
            for (const auto& p : points) ss += (p[d] - mean) * (p[d] - mean);
            const double sd = points.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
            // Scott's rule for two dimensions: sd * n^(-1/6), floored at
            // range / min(100, n + 1) so a tight cluster of good trials
            // cannot shrink the kernels to a point.
            const double floor = range / std::min(100.0, n + 1.0);
            bw_[d] = std::clamp(sd * std::pow(n, -1.0 / 6.0), floor, range);
        }
        centers_ = points;
        widths_.assign(points.size(), bw_);
        centers_.push_back({0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])});
        widths_.push_back({hi[0] - lo[0], hi[1] - lo[1]});
        log_mass_.resize(centers_.size());
        for (std::size_t k = 0; k < centers_.size(); ++k) {
            double lm = 0.0;
            for (std::size_t d = 0; d < 2; ++d) {
                const double h = widths_[k][d];
                const double mass = normal_cdf((hi[d] - centers_[k][d]) / h) -
                                    normal_cdf((lo[d] - centers_[k][d]) / h);
                lm += std::log(std::max(mass, 1e-300)) + std::log(h);
            }
            log_mass_[k] = lm;
        }
    }

    [[nodiscard]] double log_density(const Point& x) const {
        std::vector<double> terms(centers_.size());
        for (std::size_t k = 0; k < centers_.size(); ++k) {
            double q = 0.0;
            for (std::size_t d = 0; d < 2; ++d) {
                const double u = (x[d] - centers_[k][d]) / widths_[k][d];
                q += u * u;
            }
            terms[k] = -0.5 * q - log_mass_[k] - std::log(2.0 * kPi);
        }
        const double m = *std::max_element(terms.begin(), terms.end());
        double s = 0.0;
        for (const double t : terms) s += std::exp(t - m);
        return m + std::log(s / static_cast<double>(terms.size()));
    }

    [[nodiscard]] Point sample(std::mt19937_64& rng) const {
        std::uniform_int_distribution<std::size_t> pick(0, centers_.size() - 1);
        const std::size_t k = pick(rng);
        Point x{};
        for (std::size_t d = 0; d < 2; ++d) {
            std::normal_distribution<double> noise(centers_[k][d], widths_[k][d]);
            double v = noise(rng);
            for (int tries = 0; tries < 100 && (v < lo_[d] || v > hi_[d]); ++tries) v = noise(rng);
            x[d] = std::clamp(v, lo_[d], hi_[d]);
        }
        return x;
    }

private:
    Point lo_;
    Point hi_;
    Point bw_{};
    std::vector<Point> centers_;
    std::vector<Point> widths_;
    std::vector<double> log_mass_;
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (const double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

std::vector<double> ParamRange::grid() const {
    if (!step || !(*step > 0.0)) {
        throw std::invalid_argument("grid requires a positive step");
    }
    const auto count = static_cast<std::size_t>(std::floor((high - low) / *step + 1e-9)) + 1;
    std::vector<double> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        out[i] = std::round((low + static_cast<double>(i) * *step) * 1e9) / 1e9;
    }
    return out;
}

void SearchSpace::validate() const {
    for (const auto* r : {&theta_in, &theta_out}) {
        if (!(r->low <= r->high)) throw std::invalid_argument("search range needs low <= high");
        if (r->step && !(*r->step > 0.0)) throw std::invalid_argument("grid step must be > 0");
    }
    if (!(theta_in.high > 0.0) || theta_out.low < 0.0) {
        throw std::invalid_argument("theta_in must reach above 0 and theta_out must be >= 0");
    }
}

bool SearchSpace::feasible(double in, double out) const {
    return in > 0.0 && out >= 0.0 && out < in;
}

SearchSpace SearchSpace::continuous() const {
    SearchSpace s = *this;
    s.theta_in.step.reset();
    s.theta_out.step.reset();
    return s;
}

const char* to_string(SearchMethod method) {
    return method == SearchMethod::Grid ? "grid" : "tpe";
}

SearchResult grid_search(const SearchSpace& space, const ObjectiveFn& eval) {
    space.validate();
    if (!space.gridded()) {
        throw std::invalid_argument("grid_search needs a gridded search space");
    }
    std::vector<Trial> history;
    for (const double in : space.theta_in.grid()) {
        for (const double out : space.theta_out.grid()) {
            if (!space.feasible(in, out)) continue;
            const Thresholds th(in, out);
            history.push_back(Trial{th, eval(th), history.size()});
        }
    }
    if (history.empty()) {
        throw std::invalid_argument("grid_search: no feasible grid point");
    }
    return finish(std::move(history), SearchMethod::Grid);
}

SearchResult tpe_search(const SearchSpace& space, const ObjectiveFn& eval,
                        const TpeOptions& options) {
    space.validate();
    if (!(space.theta_in.low < space.theta_in.high && space.theta_out.low < space.theta_out.high)) {
        throw std::invalid_argument("tpe_search: each range needs low < high");
    }
    if (options.n_trials < 10) {
        throw std::invalid_argument("tpe_search: n_trials must be at least 10");
    }
    if (!(options.gamma > 0.0 && options.gamma < 1.0) || options.n_candidates == 0) {
        throw std::invalid_argument("tpe_search: gamma must lie in (0, 1), candidates >= 1");
    }
    const Point lo{space.theta_in.low, space.theta_out.low};
    const Point hi{space.theta_in.high, space.theta_out.high};
    std::mt19937_64 rng(options.seed);

    auto uniform_feasible = [&]() -> Point {
        for (int tries = 0; tries < 100000; ++tries) {
            const Point p{lo[0] + (hi[0] - lo[0]) * uniform01(rng),
                          lo[1] + (hi[1] - lo[1]) * uniform01(rng)};
            if (space.feasible(p[0], p[1])) return p;
        }
        throw std::invalid_argument("tpe_search: search space has no feasible region");
    };

    std::vector<Trial> history;
    history.reserve(options.n_trials);
    for (std::size_t i = 0; i < options.n_trials; ++i) {
        Point next{};
        if (i < std::max<std::size_t>(options.n_startup, 2)) {
            next = uniform_feasible();
        } else {
            std::vector<std::size_t> order(history.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
                return better(history[a], history[b]);
            });
            const auto n_good = std::clamp<std::size_t>(
                static_cast<std::size_t>(
                    std::ceil(options.gamma * static_cast<double>(history.size()))),
                1, history.size() - 1);
            std::vector<Point> good;
            std::vector<Point> bad;
            for (std::size_t r = 0; r < order.size(); ++r) {
                const auto& th = history[order[r]].thresholds;
                (r < n_good ? good : bad).push_back({th.theta_in(), th.theta_out()});
            }
            const Parzen l(good, lo, hi);
            const Parzen g(bad, lo, hi);

            double best_score = -std::numeric_limits<double>::infinity();
            bool found = false;
            for (std::size_t c = 0; c < options.n_candidates; ++c) {
                Point cand{};
                bool ok = false;
                for (int tries = 0; tries < 100 && !ok; ++tries) {
                    cand = l.sample(rng);
                    ok = space.feasible(cand[0], cand[1]);
                }
                if (!ok) continue;
                const double score = l.log_density(cand) - g.log_density(cand);
                if (score > best_score) {
                    best_score = score;
                    next = cand;
                    found = true;
                }
            }
            if (!found) next = uniform_feasible();
        }
        const Thresholds th(next[0], next[1]);
        history.push_back(Trial{th, eval(th), i});
    }
    return finish(std::move(history), SearchMethod::Tpe);
}

double objective(const PricePanel& panel, const SpreadModel& model, const Thresholds& thresholds,
                 const WindowSpec& training, const BacktestOptions& options,
                 ObjectiveMetric metric) {
    const auto report = run_backtest(panel, model, thresholds, training, options);
    if (metric == ObjectiveMetric::CumulativeReturn) return report.cumulative_return;
    if (report.return_std == 0.0) return 0.0;
    const double mean = std::accumulate(report.daily_returns.begin(), report.daily_returns.end(), 0.0) /
                        static_cast<double>(report.daily_returns.size());
    return mean / report.return_std * std::sqrt(252.0);
}

std::uint64_t pair_seed(std::uint64_t run_seed, const PairKey& pair) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto mix = [&](const std::string& s) {
        for (const unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        h ^= 0xff;
        h *= 0x100000001b3ULL;
    };
    mix(pair.x());
    mix(pair.y());
    return splitmix64(run_seed ^ splitmix64(h));
}

UniverseOptimization optimize_universe(const PricePanel& panel,
                                       const std::vector<SpreadModel>& selections,
                                       const SplitConfig& splits, const SearchSpace& space,
                                       const OptimizeOptions& options) {
    if (selections.empty()) {
        throw std::invalid_argument("optimize_universe: no selections");
    }
    splits.validate();
    space.validate();
    if (options.mode == ObjectiveMode::Inherit) {
        for (const auto& m : selections) {
            if (!(m.fit_window.end < splits.training.start)) {
                throw PitViolation("inherited model for " + m.pair.label() +
                                   " was fitted on data overlapping the training window");
            }
        }
    }

    const auto [first, last] = window_rows(panel.dates(), splits.training);
    const std::size_t half = (last - first) / 2;
    const auto& dates = panel.dates();
    if (options.mode == ObjectiveMode::RefitSplit && (half < 15 || last - first - half < 2)) {
        throw std::invalid_argument("training window too short to split into fit/score halves");
    }

    std::vector<OptimizationResult> results(selections.size(),
                                            OptimizationResult{selections.front().pair});
    parallel_for(selections.size(), options.threads, [&](std::size_t i) {
        const PairKey& pair = selections[i].pair;
        OptimizationResult res{pair};
        try {
            SpreadModel model = selections[i];
            WindowSpec score_window = splits.training;
            if (options.mode == ObjectiveMode::RefitSplit) {
                const WindowSpec fit_window(dates[first], dates[first + half - 1]);
                score_window = WindowSpec(dates[first + half], dates[last - 1]);
                model = fit_spread_model(panel, pair, fit_window);
            }
            const ObjectiveFn eval = [&](const Thresholds& th) {
                return objective(panel, model, th, score_window, options.backtest, options.metric);
            };
            if (options.method == SearchMethod::Grid) {
                res.search = grid_search(space, eval);
            } else {
                TpeOptions tpe;
                tpe.n_trials = options.budget;
                tpe.seed = pair_seed(options.seed, pair);
                res.search = tpe_search(space.continuous(), eval, tpe);
            }
            res.selected = res.search->best;

            if (splits.validation) {
                const SpreadModel val_model = fit_spread_model(panel, pair, splits.training);
                std::vector<Trial> ranked = res.search->history;
                std::stable_sort(ranked.begin(), ranked.end(), better);
                const std::size_t keep =
                    std::min(ranked.size(), std::max<std::size_t>(options.validation_top_k, 1));
                ranked.erase(ranked.begin() + static_cast<std::ptrdiff_t>(keep), ranked.end());
                double best_val = -std::numeric_limits<double>::infinity();
                for (const auto& t : ranked) {
                    const double v = objective(panel, val_model, t.thresholds, *splits.validation,
                                               options.backtest, options.metric);
                    if (v > best_val) {
                        best_val = v;
                        res.selected = t.thresholds;
                    }
                }
                res.validation_objective = best_val;
            }
        } catch (const PitViolation&) {
            throw;
        } catch (const std::exception& e) {
            res.search.reset();
            res.selected.reset();
            res.error = e.what();
        }
        results[i] = std::move(res);
    });

    UniverseOptimization out;
    std::sort(results.begin(), results.end(),
              [](const OptimizationResult& a, const OptimizationResult& b) {
                  return a.pair < b.pair;
              });
    std::vector<double> ins;
    std::vector<double> outs;
    for (const auto& r : results) {
        if (r.error) {
            ++out.failures;
            continue;
        }
        if (r.search->degenerate) {
            ++out.degenerate;
            continue;
        }
        ins.push_back(r.selected->theta_in());
        outs.push_back(r.selected->theta_out());
    }
    out.stats.count = ins.size();
    if (!ins.empty()) {
        out.stats.theta_in_mean =
            std::accumulate(ins.begin(), ins.end(), 0.0) / static_cast<double>(ins.size());
        out.stats.theta_out_mean =
            std::accumulate(outs.begin(), outs.end(), 0.0) / static_cast<double>(outs.size());
        out.stats.theta_in_std = sample_std(ins);
        out.stats.theta_out_std = sample_std(outs);
    }
    out.results = std::move(results);
    return out;
}

}  // namespace pairtrade
