#ifndef KERROMIT_ANALYSIS_HPP
#define KERROMIT_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "kerromit/constants.hpp"
#include "kerromit/error.hpp"

namespace kerromit
{
// Transparency-window features of a sampled |t_p|^2 curve.
struct WindowFeatures
{
    double center = kNaN;    // location of the window maximum, rad/s
    double peak = kNaN;      // |t_p|^2 there
    double baseline = kNaN;  // higher of the two flanking minima
    double width = kNaN;     // full width at half height above baseline, rad/s
    std::size_t peak_index = 0;
};

namespace detail
{
inline void require_curve(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 3)
        throw ValidationError("curve analysis needs matching grids of at least 3 points");
}

// Vertex of the parabola through three neighbouring samples.
inline double refine_extremum(std::span<const double> x, std::span<const double> y, std::size_t i)
{
    if (i == 0 || i + 1 >= x.size()) return x[i];
    const double y0 = y[i - 1], y1 = y[i], y2 = y[i + 1];
    const double denom = y0 - 2.0 * y1 + y2;
    if (denom == 0.0) return x[i];
    const double h = x[i + 1] - x[i];
    return x[i] + 0.5 * h * (y0 - y2) / denom;
}

inline double crossing(double x0, double y0, double x1, double y1, double level)
{
    return x0 + (level - y0) * (x1 - x0) / (y1 - y0);
}
} // namespace detail

inline WindowFeatures window_features(std::span<const double> beats, std::span<const double> tp_abs2)
{
    detail::require_curve(beats, tp_abs2);
    WindowFeatures f;
    const std::size_t n = beats.size();
    const auto top = static_cast<std::size_t>(std::max_element(tp_abs2.begin(), tp_abs2.end()) - tp_abs2.begin());
    f.peak_index = top;
    f.peak = tp_abs2[top];
    f.center = detail::refine_extremum(beats, tp_abs2, top);

    std::size_t lo = top, hi = top;
    while (lo > 0 && tp_abs2[lo - 1] <= tp_abs2[lo]) --lo;
    while (hi + 1 < n && tp_abs2[hi + 1] <= tp_abs2[hi]) ++hi;
    f.baseline = std::max(tp_abs2[lo], tp_abs2[hi]);
    const double half = 0.5 * (f.peak + f.baseline);

    double left = kNaN, right = kNaN;
    for (std::size_t i = top; i > lo; --i) {
        if (tp_abs2[i - 1] < half) {
            left = detail::crossing(beats[i - 1], tp_abs2[i - 1], beats[i], tp_abs2[i], half);
            break;
        }
    }
    for (std::size_t i = top; i < hi; ++i) {
        if (tp_abs2[i + 1] < half) {
            right = detail::crossing(beats[i], tp_abs2[i], beats[i + 1], tp_abs2[i + 1], half);
            break;
        }
    }
    f.width = right - left;
    return f;
}

// Sum over the probe offsets of (T(c + d) - T(c - d))^2.
inline double asymmetry(const std::function<double(double)> &curve, double c, std::span<const double> offsets)
{
    double s = 0.0;
    for (double d : offsets) {
        const double diff = curve(c + d) - curve(c - d);
        s += diff * diff;
    }
    return s;
}

// Center minimizing the asymmetry functional: grid scan over
// [guess - span, guess + span], then golden-section refinement.
inline double symmetry_center(const std::function<double(double)> &curve, double guess, double span,
                              std::span<const double> offsets, int scan_points = 201)
{
    double best = guess, best_val = std::numeric_limits<double>::infinity();
    const double step = 2.0 * span / (scan_points - 1);
    for (int i = 0; i < scan_points; ++i) {
        const double c = guess - span + step * i;
        const double v = asymmetry(curve, c, offsets);
        if (v < best_val) {
            best_val = v;
            best = c;
        }
    }
    double a = best - step, b = best + step;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c1 = b - r * (b - a), c2 = a + r * (b - a);
    double f1 = asymmetry(curve, c1, offsets), f2 = asymmetry(curve, c2, offsets);
    for (int it = 0; it < 60 && (b - a) > 1e-12 * std::abs(best); ++it) {
        if (f1 < f2) {
            b = c2;
            c2 = c1;
            f2 = f1;
            c1 = b - r * (b - a);
            f1 = asymmetry(curve, c1, offsets);
        } else {
            a = c1;
            c1 = c2;
            f1 = f2;
            c2 = a + r * (b - a);
            f2 = asymmetry(curve, c2, offsets);
        }
    }
    return 0.5 * (a + b);
}

// max |T(c + d) - T(c - d)| / scale over the offsets.
inline double symmetry_deviation(const std::function<double(double)> &curve, double c,
                                 std::span<const double> offsets, double scale)
{
    double worst = 0.0;
    for (double d : offsets) worst = std::max(worst, std::abs(curve(c + d) - curve(c - d)));
    return worst / scale;
}

// Second-sideband efficiency features: the global peak and, if present, a
// local minimum near `resonance` flanked by a local maximum on each side.
struct EfficiencyFeatures
{
    double peak = kNaN;
    double peak_location = kNaN;
    bool has_dip = false;
    double dip_location = kNaN;
    double dip_value = kNaN;
    double left_peak = kNaN;
    double right_peak = kNaN;
};

inline EfficiencyFeatures efficiency_features(std::span<const double> beats, std::span<const double> eta,
                                              double resonance, double dip_window)
{
    detail::require_curve(beats, eta);
    EfficiencyFeatures f;
    const auto top = static_cast<std::size_t>(std::max_element(eta.begin(), eta.end()) - eta.begin());
    f.peak = eta[top];
    f.peak_location = beats[top];

    // deepest interior local minimum inside the dip window
    std::size_t dip = 0;
    for (std::size_t i = 1; i + 1 < beats.size(); ++i) {
        if (std::abs(beats[i] - resonance) > dip_window) continue;
        if (eta[i] <= eta[i - 1] && eta[i] <= eta[i + 1] && (dip == 0 || eta[i] < eta[dip])) dip = i;
    }
    if (dip == 0) return f;

    double left = kNaN, right = kNaN;
    for (std::size_t i = dip; i > 0; --i)
        if (i + 1 < beats.size() && eta[i] >= eta[i - 1] && eta[i] > eta[i + 1] && i != dip) {
            left = eta[i];
            break;
        }
    for (std::size_t i = dip + 1; i + 1 < beats.size(); ++i)
        if (eta[i] >= eta[i + 1] && eta[i] > eta[i - 1]) {
            right = eta[i];
            break;
        }
    if (std::isnan(left) || std::isnan(right)) return f;
    f.has_dip = true;
    f.dip_location = beats[dip];
    f.dip_value = eta[dip];
    f.left_peak = left;
    f.right_peak = right;
    return f;
}
} // namespace kerromit

#endif
