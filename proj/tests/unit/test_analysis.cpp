#include <cmath>
#include <vector>

#include "doctest.h"
#include "ecosim/analysis.hpp"
#include "ecosim/rng.hpp"

using namespace ecosim;

namespace {

double gini_oracle(const std::vector<double>& x) {
    const double n = double(x.size());
    double sum = 0, pairs = 0;
    for (double a : x) sum += a;
    if (sum == 0) return 0;
    for (double a : x)
        for (double b : x) pairs += std::abs(a - b);
    return pairs / (2 * n * n * (sum / n));
}

/// Slope via the textbook normal equations, divided by the window mean.
double slope_oracle(const std::vector<double>& y, std::size_t window) {
    const std::size_t off = y.size() - window;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < window; ++i) {
        const double x = double(i), v = y[off + i];
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
    }
    const double n = double(window);
    const double b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return b / (sy / n);
}

std::vector<double> linear(double start, double per_tick, int n) {
    std::vector<double> v;
    for (int t = 0; t < n; ++t) v.push_back(start + per_tick * t);
    return v;
}

}  // namespace

TEST_SUITE("analysis") {

TEST_CASE("value ratio") {
    CHECK(value_ratio(200, 100) == 2.0);
    CHECK(value_ratio(100, 100) == 1.0);
    CHECK(value_ratio(0, 50) == 0.0);
    CHECK_THROWS_AS(value_ratio(1, 0), DomainError);
    CHECK_THROWS_AS(value_ratio(1, -3), DomainError);
    Rng rng(1);
    for (int i = 0; i < 100; ++i) {
        const double o = rng.uniform(0, 1e4), k = rng.uniform(0.1, 1e4), c = rng.uniform(0.01, 100);
        CHECK(value_ratio(c * o, c * k) == doctest::Approx(value_ratio(o, k)).epsilon(1e-14));
    }
}

TEST_CASE("value state threshold is closed") {
    CHECK(classify_value_state(3.0) == ValueState::ValueExplosion);
    CHECK(classify_value_state(1.1) == ValueState::ValueCapturing);
    CHECK(classify_value_state(1.5) == ValueState::ValueExplosion);
    CHECK(classify_value_state(1.2, 1.2) == ValueState::ValueExplosion);
}

TEST_CASE("gini examples") {
    CHECK(gini(std::vector<double>{5, 5, 5, 5}) == 0.0);
    CHECK(gini(std::vector<double>{0, 0, 0, 10}) == doctest::Approx(0.75).epsilon(1e-15));
    CHECK(gini(std::vector<double>{0, 0, 0}) == 0.0);
    CHECK(gini(std::vector<double>{7}) == 0.0);
    CHECK_THROWS_AS(gini(std::vector<double>{}), DomainError);
    CHECK_THROWS_AS(gini(std::vector<double>{1, -1}), DomainError);
}

TEST_CASE("gini matches the pairwise oracle and is scale and permutation invariant") {
    Rng rng(31);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> x(std::size_t(rng.uniform_int(1, 60)));
        for (auto& v : x) v = rng.uniform01() < 0.2 ? 0.0 : rng.uniform(0, 100);
        const double g = gini(x);
        CHECK(std::abs(g - gini_oracle(x)) <= 1e-12);
        CHECK(g >= 0.0);
        CHECK(g < 1.0);
        const double c = rng.uniform(0.001, 1000);
        std::vector<double> scaled = x;
        for (auto& v : scaled) v *= c;
        CHECK(std::abs(gini(scaled) - g) <= 1e-12);
        std::vector<double> shuffled = x;
        rng.shuffle(std::span<double>(shuffled));
        CHECK(std::abs(gini(shuffled) - g) <= 1e-12);
    }
}

TEST_CASE("trend letters") {
    CHECK(trend_letter(TrendClass::FastUp) == 'A');
    CHECK(trend_letter(TrendClass::SlowUp) == 'B');
    CHECK(trend_letter(TrendClass::Steady) == 'C');
    CHECK(trend_letter(TrendClass::FastDown) == 'D');
    CHECK(trend_letter(TrendClass::SlowDown) == 'E');
}

TEST_CASE("normalized slope matches the least-squares oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> y(std::size_t(rng.uniform_int(2, 80)));
        for (auto& v : y) v = rng.uniform(1, 50);
        const auto w = std::size_t(rng.uniform_int(2, std::int64_t(y.size())));
        CHECK(normalized_slope(y, w) == doctest::Approx(slope_oracle(y, w)).epsilon(1e-10));
    }
}

TEST_CASE("canonical trend series") {
    CHECK(classify_trend(std::vector<double>(30, 42.0), 20) == TrendClass::Steady);

    std::vector<double> growth;
    for (int t = 0; t < 40; ++t) growth.push_back(100 * std::pow(1.05, t));
    const double s = slope_oracle(growth, 20);
    CHECK(s > 0.02);
    CHECK(normalized_slope(growth, 20) == doctest::Approx(s).epsilon(1e-12));
    CHECK(classify_trend(growth, 20) == TrendClass::FastUp);

    // 100 - 0.1 t: slope -0.1 over a mean near 97, inside the steady band.
    const auto gentle = linear(100, -0.1, 40);
    const double g = slope_oracle(gentle, 20);
    CHECK(g == doctest::Approx(-0.1 / 97.05).epsilon(1e-9));
    CHECK(classify_trend(gentle, 20) == TrendClass::Steady);

    CHECK(classify_trend(linear(100, 0.5, 40), 20) == TrendClass::SlowUp);
    CHECK(classify_trend(linear(100, -0.5, 40), 20) == TrendClass::SlowDown);
    CHECK(classify_trend(linear(100, 5, 40), 20) == TrendClass::FastUp);
    CHECK(classify_trend(linear(300, -5, 40), 20) == TrendClass::FastDown);
}

TEST_CASE("slope classification bands") {
    CHECK(classify_slope(0.0) == TrendClass::Steady);
    CHECK(classify_slope(0.002) == TrendClass::Steady);
    CHECK(classify_slope(-0.002) == TrendClass::Steady);
    CHECK(classify_slope(0.0021) == TrendClass::SlowUp);
    CHECK(classify_slope(0.02) == TrendClass::SlowUp);
    CHECK(classify_slope(0.0201) == TrendClass::FastUp);
    CHECK(classify_slope(-0.02) == TrendClass::SlowDown);
    CHECK(classify_slope(-0.0201) == TrendClass::FastDown);
}

TEST_CASE("trend classification is scale invariant and monotone in added slope") {
    Rng rng(9);
    const auto rank = [](TrendClass t) {
        switch (t) {
            case TrendClass::FastDown: return 0;
            case TrendClass::SlowDown: return 1;
            case TrendClass::Steady: return 2;
            case TrendClass::SlowUp: return 3;
            case TrendClass::FastUp: return 4;
        }
        return -1;
    };
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> y = linear(100, rng.uniform(-3, 3), 30);
        for (auto& v : y) v += rng.uniform(-0.5, 0.5);
        const TrendClass base = classify_trend(y, 20);
        std::vector<double> scaled = y;
        const double c = rng.uniform(0.01, 100);
        for (auto& v : scaled) v *= c;
        CHECK(classify_trend(scaled, 20) == base);

        std::vector<double> steady(30, 80.0);
        const double add = rng.uniform(0.001, 2);
        std::vector<double> tilted = steady;
        for (std::size_t t = 0; t < tilted.size(); ++t) tilted[t] += add * double(t);
        CHECK(rank(classify_trend(tilted, 20)) >= rank(classify_trend(steady, 20)));
    }
}

TEST_CASE("trend domain errors") {
    CHECK_THROWS_AS(classify_trend(std::vector<double>{1, 2, 3}, 1), DomainError);
    CHECK_THROWS_AS(classify_trend(std::vector<double>{1, 2, 3}, 4), DomainError);
    CHECK_THROWS_AS(classify_trend(std::vector<double>{-1, -2, -3}, 3), DomainError);
    CHECK_THROWS_AS(classify_trend(std::vector<double>{0, 0, 0}, 3), DomainError);
}

TEST_CASE("collaboration viability") {
    CHECK(collaboration_viable({10, 5, 8, 4}));
    CHECK_FALSE(collaboration_viable({10, 3, 8, 4}));
    CHECK(collaboration_viable({8, 4, 8, 4}));
    CHECK_FALSE(collaboration_viable({7, 9, 8, 4}));
}

TEST_CASE("fairness gap") {
    const auto equal = fairness_gap({20, 10, 40, 20}, 0.1);
    CHECK(equal.gap == 0.0);
    CHECK(equal.sustained);
    const auto half = fairness_gap({2, 1, 1, 1}, 0.1);
    CHECK(half.gap == 0.5);
    CHECK_FALSE(half.sustained);
    CHECK(fairness_gap({0, 1, 0, 1}, 0.0).gap == 0.0);
    CHECK_THROWS_AS(fairness_gap({1, 0, 1, 1}, 0.1), DomainError);
    CHECK_THROWS_AS(fairness_gap({1, 1, 1, -2}, 0.1), DomainError);
    Rng rng(3);
    for (int i = 0; i < 100; ++i) {
        const FairnessInputs f{rng.uniform(0, 50), rng.uniform(0.1, 50), rng.uniform(0, 50), rng.uniform(0.1, 50)};
        const FairnessInputs g{f.out_r, f.cost_r, f.out_m, f.cost_m};
        const double eps = rng.uniform(0, 1);
        CHECK(fairness_gap(f, eps).gap == fairness_gap(g, eps).gap);
        CHECK(fairness_gap(f, eps).sustained == fairness_gap(g, eps).sustained);
    }
}

}  // TEST_SUITE
