#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <numeric>
#include <random>

#include "pairtrade/pair_screen.hpp"
#include "pairtrade/synthetic.hpp"

using namespace pairtrade;
using Catch::Matchers::WithinAbs;

namespace {

ReturnPanel panel_of(const std::vector<std::vector<double>>& cols,
                     const std::vector<std::string>& tickers) {
    const auto dates = synthetic::business_days(parse_date("2021-01-04"), cols.front().size());
    std::vector<double> values;
    for (const auto& c : cols) values.insert(values.end(), c.begin(), c.end());
    return ReturnPanel(dates, tickers, values);
}

std::vector<double> noise(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 0.01);
    std::vector<double> v(n);
    for (auto& x : v) x = g(rng);
    return v;
}

WindowSpec everything() { return {parse_date("2000-01-01"), parse_date("2100-01-01")}; }

}  // namespace

TEST_CASE("PairKey is canonical", "[pair_screen]") {
    CHECK(PairKey::canonical("MSFT", "AAPL") == PairKey("AAPL", "MSFT"));
    CHECK(PairKey("A", "B").label() == "A_B");
    CHECK_THROWS_AS(PairKey("B", "A"), std::invalid_argument);
    CHECK_THROWS_AS(PairKey("A", "A"), std::invalid_argument);
}

TEST_CASE("enumerate_pairs lists every unordered pair", "[pair_screen]") {
    const auto pairs = enumerate_pairs({"C", "A", "B"});
    REQUIRE(pairs.size() == 3);
    CHECK(pairs[0] == PairKey("A", "B"));
    CHECK(pairs[1] == PairKey("A", "C"));
    CHECK(pairs[2] == PairKey("B", "C"));
    CHECK(pair_count(3) == 3);
    CHECK(pair_count(500) == 124750);
    std::vector<std::string> many;
    for (int i = 0; i < 500; ++i) many.push_back("T" + std::to_string(1000 + i));
    CHECK(enumerate_pairs(many).size() == 124750);
    CHECK_THROWS_AS(enumerate_pairs({"A"}), std::invalid_argument);
}

TEST_CASE("sample_pairs is a reproducible uniform draw", "[pair_screen]") {
    const auto all = enumerate_pairs({"A", "B", "C", "D", "E"});
    auto perm = sample_pairs(all, all.size(), 11);
    CHECK(perm.size() == all.size());
    std::sort(perm.begin(), perm.end());
    CHECK(perm == all);
    CHECK(sample_pairs(all, 4, 99) == sample_pairs(all, 4, 99));
    CHECK_THROWS_AS(sample_pairs(all, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(sample_pairs(all, all.size() + 1, 1), std::invalid_argument);

    const auto three = enumerate_pairs({"A", "B", "C"});
    std::map<std::string, int> counts;
    const int seeds = 30000;
    for (int s = 0; s < seeds; ++s) ++counts[sample_pairs(three, 1, s).front().label()];
    for (const auto& [label, c] : counts) {
        CHECK_THAT(static_cast<double>(c) / seeds, WithinAbs(1.0 / 3.0, 0.02));
    }
}

TEST_CASE("correlation worked examples and invariants", "[pair_screen]") {
    const std::vector<double> x{1, 2, 3, 4};
    const std::vector<double> y{1, 2, 3, 5};
    // sxy = 5.5, sxx = 5, syy = 8.75 -> 5.5 / sqrt(43.75) = 0.98270...
    CHECK_THAT(correlation(x, y), WithinAbs(0.9827, 1e-4));
    CHECK(correlation(x, x) == 1.0);
    std::vector<double> neg{-1, -2, -3, -4};
    CHECK(correlation(x, neg) == -1.0);

    const auto a = noise(300, 1);
    const auto b = noise(300, 2);
    CHECK(correlation(a, b) == correlation(b, a));
    std::vector<double> scaled;
    for (double v : a) scaled.push_back(4.0 * v + 7.0);
    CHECK_THAT(correlation(scaled, b), WithinAbs(correlation(a, b), 1e-10));
    CHECK(std::abs(correlation(a, b)) <= 1.0);

    CHECK_THROWS(correlation(std::vector<double>{1, 2}, std::vector<double>{1, 2}));
    CHECK_THROWS(correlation(std::vector<double>{1, 1, 1}, std::vector<double>{1, 2, 3}));
    CHECK_THROWS(correlation(std::vector<double>{1, 2, 3}, std::vector<double>{1, 2}));
}

TEST_CASE("screen_universe flags identical tickers and sorts output", "[pair_screen]") {
    const auto a = noise(250, 3);
    const auto c = noise(250, 4);
    const auto panel = panel_of({a, a, c}, {"A", "B", "C"});
    const auto results = screen_universe(panel, everything(), ScreenOptions{0.8, 1});
    REQUIRE(results.size() == 3);
    CHECK(results[0].pair == PairKey("A", "B"));
    CHECK(results[0].correlation == 1.0);
    CHECK(results[0].passed);
    CHECK_FALSE(results[1].passed);
    CHECK(results[1].correlation >= results[2].correlation);

    // Three co-moving tickers: every pair is positively correlated.
    std::vector<double> a2 = a;
    std::vector<double> a3 = a;
    const auto wiggle = noise(250, 9);
    for (std::size_t i = 0; i < a.size(); ++i) {
        a2[i] += 0.5 * wiggle[i];
        a3[i] -= 0.5 * wiggle[i];
    }
    const auto co = panel_of({a, a2, a3}, {"A", "B", "C"});
    for (const auto& r : screen_universe(co, everything(), ScreenOptions{0.0, 1})) {
        CHECK(r.passed);
    }
}

TEST_CASE("screen_universe rarely passes independent noise", "[pair_screen]") {
    int passed = 0;
    for (int s = 0; s < 200; ++s) {
        const auto panel = panel_of({noise(250, 100 + 2 * s), noise(250, 101 + 2 * s)}, {"A", "B"});
        passed += screen_universe(panel, everything(), ScreenOptions{0.8, 1}).front().passed;
    }
    CHECK(passed == 0);
}

TEST_CASE("screen_universe records degenerate pairs as failures", "[pair_screen]") {
    const std::vector<double> flat(30, 0.0);
    const auto panel = panel_of({noise(30, 5), flat, noise(30, 6)}, {"A", "B", "C"});
    const auto results = screen_universe(panel, everything(), ScreenOptions{0.8, 1});
    REQUIRE(results.size() == 3);
    CHECK_FALSE(results[0].error.has_value());
    CHECK(results[1].error.has_value());
    CHECK(results[2].error.has_value());
    CHECK(std::isnan(results[2].correlation));

    const auto explicit_pairs =
        screen_universe(panel, everything(), ScreenOptions{0.8, 1},
                        std::vector<PairKey>{PairKey("A", "C"), PairKey("A", "ZZZ")});
    REQUIRE(explicit_pairs.size() == 2);
    CHECK(explicit_pairs[1].error.has_value());
}

TEST_CASE("screen_universe is identical across thread counts", "[pair_screen]") {
    std::vector<std::vector<double>> cols;
    std::vector<std::string> names;
    for (int k = 0; k < 30; ++k) {
        cols.push_back(noise(120, 500 + k));
        names.push_back("T" + std::to_string(10 + k));
    }
    const auto panel = panel_of(cols, names);
    const auto one = screen_universe(panel, everything(), ScreenOptions{0.1, 1});
    const auto many = screen_universe(panel, everything(), ScreenOptions{0.1, 8});
    REQUIRE(one.size() == many.size());
    for (std::size_t i = 0; i < one.size(); ++i) {
        CHECK(one[i].pair == many[i].pair);
        CHECK(std::memcmp(&one[i].correlation, &many[i].correlation, sizeof(double)) == 0);
    }
}

TEST_CASE("correlation_histogram conserves the pair count", "[pair_screen]") {
    std::vector<std::vector<double>> cols;
    std::vector<std::string> names;
    for (int k = 0; k < 12; ++k) {
        cols.push_back(noise(60, 900 + k));
        names.push_back("H" + std::to_string(10 + k));
    }
    const auto results = screen_universe(panel_of(cols, names), everything(), ScreenOptions{});
    const auto hist = correlation_histogram(results, 40);
    CHECK(hist.size() == 40);
    CHECK(std::accumulate(hist.begin(), hist.end(), std::size_t{0}) == 66);
}

TEST_CASE("transformed screening runs on price levels", "[pair_screen]") {
    const auto pair = synthetic::ou_pair({}, 21);
    const auto dates = synthetic::business_days(parse_date("2021-01-04"), pair.x.size());
    std::vector<double> values = pair.x;
    values.insert(values.end(), pair.y.begin(), pair.y.end());
    const PricePanel prices(dates, {"X", "Y"}, values);
    const auto results =
        screen_universe_transformed(prices, everything(), ScreenOptions{0.8, 1}, TransformOptions{});
    REQUIRE(results.size() == 1);
    CHECK(std::isfinite(results[0].correlation));
}
