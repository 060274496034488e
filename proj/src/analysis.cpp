#include "ecosim/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace ecosim {

double value_ratio(double outcome, double cost) {
    if (!(cost > 0.0)) throw DomainError("value_ratio: cost must be positive");
    return outcome / cost;
}

ValueState classify_value_state(double value, double threshold) {
    return value >= threshold ? ValueState::ValueExplosion : ValueState::ValueCapturing;
}

std::string_view to_string(ValueState s) {
    return s == ValueState::ValueExplosion ? "value-explosion" : "value-capturing";
}

double gini(std::span<const double> values) {
    if (values.empty()) throw DomainError("gini: empty input");
    std::vector<double> x(values.begin(), values.end());
    for (double v : x)
        if (!(v >= 0.0) || !std::isfinite(v)) throw DomainError("gini: values must be finite and non-negative");
    std::sort(x.begin(), x.end());

    // sum_ij |x_i - x_j| = 2 * sum_i (2i - n + 1) x_(i) over the ascending order
    const double n = static_cast<double>(x.size());
    double total = 0.0, weighted = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        total += x[i];
        weighted += (2.0 * static_cast<double>(i) - n + 1.0) * x[i];
    }
    if (total == 0.0) return 0.0;
    // 2 * weighted / (2 n^2 mean) with mean = total / n
    return std::clamp(weighted / (n * total), 0.0, 1.0);
}

std::string_view to_string(TrendClass t) {
    switch (t) {
        case TrendClass::FastUp: return "fast-up";
        case TrendClass::SlowUp: return "slow-up";
        case TrendClass::Steady: return "steady";
        case TrendClass::SlowDown: return "slow-down";
        case TrendClass::FastDown: return "fast-down";
    }
    return "?";
}

char trend_letter(TrendClass t) {
    switch (t) {
        case TrendClass::FastUp: return 'A';
        case TrendClass::SlowUp: return 'B';
        case TrendClass::Steady: return 'C';
        case TrendClass::FastDown: return 'D';
        case TrendClass::SlowDown: return 'E';
    }
    return '?';
}

double normalized_slope(std::span<const double> series, std::size_t window) {
    if (window < 2 || window > series.size()) throw DomainError("classify_trend: need 2 <= window <= series length");
    const auto tail = series.subspan(series.size() - window);
    const double n = static_cast<double>(window);
    const double t_mean = (n - 1.0) / 2.0;
    double y_mean = 0.0;
    for (double y : tail) y_mean += y;
    y_mean /= n;
    if (!(y_mean > 0.0)) throw DomainError("classify_trend: window mean must be positive");

    double sty = 0.0, stt = 0.0;
    for (std::size_t i = 0; i < window; ++i) {
        const double dt = static_cast<double>(i) - t_mean;
        sty += dt * (tail[i] - y_mean);
        stt += dt * dt;
    }
    return (sty / stt) / y_mean;
}

TrendClass classify_slope(double s, const TrendThresholds& th) {
    if (s > th.fast) return TrendClass::FastUp;
    if (s > th.slow) return TrendClass::SlowUp;
    if (s >= -th.slow) return TrendClass::Steady;
    if (s >= -th.fast) return TrendClass::SlowDown;
    return TrendClass::FastDown;
}

TrendClass classify_trend(std::span<const double> series, std::size_t window, const TrendThresholds& th) {
    return classify_slope(normalized_slope(series, window), th);
}

bool collaboration_viable(const PayoffQuad& p) { return p.t_out_m >= p.t_star_m && p.t_out_r >= p.t_star_r; }

FairnessGap fairness_gap(const FairnessInputs& f, double epsilon) {
    if (!(f.cost_m > 0.0) || !(f.cost_r > 0.0)) throw DomainError("fairness_gap: costs must be positive");
    const double vm = f.out_m / f.cost_m;
    const double vr = f.out_r / f.cost_r;
    const double top = std::max(std::abs(vm), std::abs(vr));
    const double gap = top == 0.0 ? 0.0 : std::abs(vm - vr) / top;
    return {gap, gap <= epsilon};
}

}  // namespace ecosim
