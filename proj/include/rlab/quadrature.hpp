#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rlab/errors.hpp"

namespace rlab {

// Gauss-Legendre rule on [-1, 1].
struct GaussLegendreRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

inline constexpr int kMaxGaussOrder = 64;

// Rules are computed once per order (Newton on P_n) and cached.
const GaussLegendreRule& gauss_legendre(int order);

struct QuadratureOptions {
    int order = 10;
    double rel_tol = 1e-10;
    double abs_tol = 1e-15;
    int max_depth = 40;
    long max_evaluations = 20'000'000;
};

template <class T>
struct BasicQuadratureResult {
    T value{};
    double error = 0.0;
    long evaluations = 0;
    bool converged = true;
};

using QuadratureResult = BasicQuadratureResult<double>;

namespace detail {

template <class T>
struct PanelSum {
    T value{};
    double abs_value = 0.0;
};

template <class T, class F>
PanelSum<T> gl_panel(F& f, double a, double b, const GaussLegendreRule& rule) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    PanelSum<T> s;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        const T v = f(mid + half * rule.nodes[i]);
        s.value += rule.weights[i] * v;
        s.abs_value += rule.weights[i] * std::abs(v);
    }
    s.value *= half;
    s.abs_value *= half;
    return s;
}

template <class T, class F>
void adapt(F& f, double a, double b, const PanelSum<T>& whole, double tol, int depth,
           const GaussLegendreRule& rule, const QuadratureOptions& opts,
           BasicQuadratureResult<T>& out) {
    const double m = 0.5 * (a + b);
    const auto left = gl_panel<T>(f, a, m, rule);
    const auto right = gl_panel<T>(f, m, b, rule);
    out.evaluations += 2 * static_cast<long>(rule.nodes.size());
    const T refined = left.value + right.value;
    const double diff = std::abs(refined - whole.value);
    if (diff <= tol || depth >= opts.max_depth || out.evaluations > opts.max_evaluations ||
        !(m > a && m < b)) {
        if (diff > tol) out.converged = false;
        out.value += refined;
        out.error += diff;
        return;
    }
    adapt(f, a, m, left, 0.5 * tol, depth + 1, rule, opts, out);
    adapt(f, m, b, right, 0.5 * tol, depth + 1, rule, opts, out);
}

}  // namespace detail

// Adaptive bisection with fixed-order Gauss-Legendre panels. A panel is
// accepted when its two halves agree with it to the local share of the
// tolerance; the tolerance is relative to the integral of |f| over the
// breakpoint pieces, so cancellation does not make the target unreachable.
template <class T = double, class F>
BasicQuadratureResult<T> integrate_pieces(F&& f, std::span<const double> breakpoints,
                                          const QuadratureOptions& opts = {}) {
    BasicQuadratureResult<T> out;
    if (breakpoints.size() < 2) return out;
    const auto& rule = gauss_legendre(opts.order);
    std::vector<detail::PanelSum<T>> pieces;
    pieces.reserve(breakpoints.size() - 1);
    double total_abs = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i], b = breakpoints[i + 1];
        if (!(b > a)) {
            pieces.push_back({});
            continue;
        }
        pieces.push_back(detail::gl_panel<T>(f, a, b, rule));
        out.evaluations += static_cast<long>(rule.nodes.size());
        total_abs += pieces.back().abs_value;
    }
    const double span = breakpoints.back() - breakpoints.front();
    const double tol = std::max(opts.abs_tol, opts.rel_tol * total_abs);
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i], b = breakpoints[i + 1];
        if (!(b > a)) continue;
        const double share = span > 0 ? tol * (b - a) / span : tol;
        detail::adapt(f, a, b, pieces[i], share, 0, rule, opts, out);
    }
    return out;
}

template <class T = double, class F>
BasicQuadratureResult<T> integrate(F&& f, double a, double b, const QuadratureOptions& opts = {}) {
    if (!(b > a)) return {};
    const double bp[2] = {a, b};
    return integrate_pieces<T>(std::forward<F>(f), std::span<const double>(bp, 2), opts);
}

// Fixed tensor Gauss-Legendre rule on each breakpoint piece; exact for
// polynomials of degree < 2*order on every piece.
template <class F>
double integrate_fixed(F&& f, std::span<const double> breakpoints, int order) {
    const auto& rule = gauss_legendre(order);
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < breakpoints.size(); ++i) {
        const double a = breakpoints[i], b = breakpoints[i + 1];
        if (b > a) s += detail::gl_panel<double>(f, a, b, rule).value;
    }
    return s;
}

// Iterated integral over a region described level by level: `limits` fills
// `cuts` with the sorted integration limits for variable `level` given the
// outer variables (cuts.front() = lower limit, cuts.back() = upper limit,
// anything between is an interior breakpoint). Fewer than two cuts, or an
// empty range, contributes zero.
using LimitsFn =
    std::function<void(std::size_t level, std::span<const double> outer, std::vector<double>& cuts)>;
using IntegrandFn = std::function<double(std::span<const double> x)>;

enum class IteratedMode { Fixed, Adaptive };

struct IteratedResult {
    double value = 0.0;
    long evaluations = 0;
    bool converged = true;
};

IteratedResult integrate_iterated(const IntegrandFn& f, std::size_t dims, const LimitsFn& limits,
                                  IteratedMode mode, const QuadratureOptions& opts = {});

IteratedResult integrate_box(const IntegrandFn& f, std::span<const double> lo,
                             std::span<const double> hi, IteratedMode mode,
                             const QuadratureOptions& opts = {});

// Sorted, deduplicated breakpoints from `pts` clipped to [lo, hi], always
// including both ends.
std::vector<double> make_cuts(double lo, double hi, std::initializer_list<double> interior = {});
void clip_cuts(double lo, double hi, std::span<const double> interior, std::vector<double>& cuts);

}  // namespace rlab
