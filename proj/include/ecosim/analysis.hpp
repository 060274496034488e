#pragma once

#include <span>
#include <stdexcept>
#include <string_view>

namespace ecosim {

/// Raised when a formula is evaluated outside its domain.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Value
// ---------------------------------------------------------------------------

/// Outcome / cost. Throws DomainError if cost <= 0.
double value_ratio(double outcome, double cost);

enum class ValueState { ValueExplosion, ValueCapturing };

inline constexpr double kDefaultExplosionThreshold = 1.5;

/// ValueExplosion iff value >= threshold (closed lower bound).
ValueState classify_value_state(double value, double threshold = kDefaultExplosionThreshold);

std::string_view to_string(ValueState s);

// ---------------------------------------------------------------------------
// Inequality
// ---------------------------------------------------------------------------

/// Gini coefficient: sum_ij |x_i - x_j| / (2 n^2 mean). Uses the sorted
/// O(n log n) form. All-zero input yields 0. Throws DomainError on empty
/// input or negative values.
double gini(std::span<const double> values);

// ---------------------------------------------------------------------------
// Trend
// ---------------------------------------------------------------------------

/// Value-curve shapes; letters are the conventional A-E labels.
enum class TrendClass {
    FastDown,  ///< D
    SlowDown,  ///< E
    Steady,    ///< C
    SlowUp,    ///< B
    FastUp,    ///< A
};

std::string_view to_string(TrendClass t);
char trend_letter(TrendClass t);

struct TrendThresholds {
    double slow = 0.002;  // per tick, relative to the window mean
    double fast = 0.02;
};

/// Least-squares slope of the trailing `window` points divided by their mean.
/// Throws DomainError if window < 2, window > size, or the mean is not positive.
double normalized_slope(std::span<const double> series, std::size_t window);

TrendClass classify_slope(double normalized_slope, const TrendThresholds& thresholds = {});

TrendClass classify_trend(std::span<const double> series, std::size_t window,
                          const TrendThresholds& thresholds = {});

// ---------------------------------------------------------------------------
// Collaboration
// ---------------------------------------------------------------------------

/// Cooperative payoffs (t_out_*) and the payoffs of going it alone (t_star_*).
struct PayoffQuad {
    double t_out_m = 0.0;
    double t_out_r = 0.0;
    double t_star_m = 0.0;
    double t_star_r = 0.0;
};

/// Both partners do at least as well cooperating as defecting.
bool collaboration_viable(const PayoffQuad& p);

struct FairnessInputs {
    double out_m = 0.0;
    double cost_m = 1.0;
    double out_r = 0.0;
    double cost_r = 1.0;
};

struct FairnessGap {
    double gap = 0.0;
    bool sustained = false;
};

/// gap = |v_m - v_r| / max(v_m, v_r) with v = out / cost; sustained iff
/// gap <= epsilon. Two zero ratios give gap 0. Throws DomainError on a
/// non-positive cost.
FairnessGap fairness_gap(const FairnessInputs& f, double epsilon);

}  // namespace ecosim
