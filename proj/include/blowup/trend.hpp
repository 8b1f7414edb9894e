#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace blowup {

// Numerical limits in this library converge slowly (often logarithmically),
// so every limit check reports the full residual series as evidence and a
// verdict derived from the trend, never a silent boolean.

struct TrendVerdict {
    std::vector<double> residual;   // |measured - limit| along the grid
    double final_residual = std::numeric_limits<double>::quiet_NaN();
    int trailing_decreases = 0;     // strict decreases counted from the tail
    bool decreasing = false;        // trailing_decreases >= min required
    bool below_threshold = false;   // final residual under the threshold
    bool pass = false;              // decreasing && below_threshold
};

// Assess a residual series: the verdict passes when the tail of the series
// shows at least `min_decreases` consecutive strict decreases and the final
// residual is below `threshold`.  Residuals that are uniformly below `floor`
// count as converged regardless of trend (a flat series at machine level is
// not a stalled one).
inline TrendVerdict assess_trend(const std::vector<double>& residuals,
                                 double threshold,
                                 int min_decreases = 3,
                                 double floor = 1e-12) {
    TrendVerdict v;
    v.residual.reserve(residuals.size());
    for (double r : residuals) v.residual.push_back(std::fabs(r));
    if (v.residual.empty()) return v;
    v.final_residual = v.residual.back();

    int dec = 0;
    for (std::size_t i = v.residual.size(); i-- > 1;) {
        if (v.residual[i] < v.residual[i - 1] * (1.0 - 1e-12)) ++dec;
        else break;
    }
    v.trailing_decreases = dec;

    // A tail pinned at the noise floor counts as converged even if it
    // wobbles: decreases cannot continue below machine level.
    bool tail_tiny = true;
    std::size_t need = static_cast<std::size_t>(min_decreases) + 1;
    std::size_t from = v.residual.size() > need ? v.residual.size() - need : 0;
    for (std::size_t i = from; i < v.residual.size(); ++i)
        if (v.residual[i] > floor) { tail_tiny = false; break; }

    v.decreasing = (dec >= min_decreases) || tail_tiny;
    v.below_threshold = v.final_residual <= threshold || tail_tiny;
    v.pass = v.decreasing && v.below_threshold;
    return v;
}

// True when the series is strictly decreasing end to end.
inline bool strictly_decreasing(const std::vector<double>& series) {
    for (std::size_t i = 1; i < series.size(); ++i)
        if (!(series[i] < series[i - 1])) return false;
    return true;
}

// True when the series is strictly increasing end to end.
inline bool strictly_increasing(const std::vector<double>& series) {
    for (std::size_t i = 1; i < series.size(); ++i)
        if (!(series[i] > series[i - 1])) return false;
    return true;
}

// A measured limit: grid points, measured values, the expected limit and the
// trend verdict of |measured - limit|.  `anchor` is a stable identifier of
// the mathematical claim being checked, carried into reports.
struct LimitSeries {
    std::string name;
    std::string anchor;
    double limit = 0.0;
    std::vector<double> x;
    std::vector<double> measured;
    TrendVerdict verdict;
};

inline LimitSeries make_limit_series(std::string name, std::string anchor,
                                     double limit,
                                     std::vector<double> x,
                                     std::vector<double> measured,
                                     double threshold,
                                     int min_decreases = 3) {
    LimitSeries s;
    s.name = std::move(name);
    s.anchor = std::move(anchor);
    s.limit = limit;
    s.x = std::move(x);
    s.measured = std::move(measured);
    std::vector<double> res;
    res.reserve(s.measured.size());
    for (double m : s.measured) res.push_back(std::fabs(m - limit));
    s.verdict = assess_trend(res, threshold, min_decreases);
    return s;
}

} // namespace blowup
