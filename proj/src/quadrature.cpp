#include "rlab/quadrature.hpp"

#include <algorithm>
#include <array>
#include <numbers>

namespace rlab {

namespace {

GaussLegendreRule build_rule(int n) {
    GaussLegendreRule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[n - 1 - i] = x;
        r.weights[i] = w;
        r.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) r.nodes[n / 2] = 0.0;
    return r;
}

}  // namespace

const GaussLegendreRule& gauss_legendre(int order) {
    static const auto rules = [] {
        std::array<GaussLegendreRule, kMaxGaussOrder + 1> all;
        all[1] = {{0.0}, {2.0}};
        for (int n = 2; n <= kMaxGaussOrder; ++n) all[n] = build_rule(n);
        return all;
    }();
    if (order < 1 || order > kMaxGaussOrder)
        throw CapabilityError("gauss_legendre: order out of range");
    return rules[order];
}

void clip_cuts(double lo, double hi, std::span<const double> interior, std::vector<double>& cuts) {
    cuts.clear();
    if (!(hi > lo)) return;
    cuts.push_back(lo);
    for (double p : interior)
        if (p > lo && p < hi) cuts.push_back(p);
    cuts.push_back(hi);
    std::sort(cuts.begin() + 1, cuts.end() - 1);
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
}

std::vector<double> make_cuts(double lo, double hi, std::initializer_list<double> interior) {
    std::vector<double> cuts;
    clip_cuts(lo, hi, std::span<const double>(interior.begin(), interior.size()), cuts);
    return cuts;
}

namespace {

struct IteratedState {
    const IntegrandFn& f;
    const LimitsFn& limits;
    std::size_t dims;
    IteratedMode mode;
    const QuadratureOptions& opts;
    std::vector<double> x;
    std::vector<std::vector<double>> cut_buffers;
    long evaluations = 0;
    bool converged = true;
};

double level_integral(IteratedState& st, std::size_t level) {
    auto& cuts = st.cut_buffers[level];
    st.limits(level, std::span<const double>(st.x.data(), level), cuts);
    if (cuts.size() < 2 || !(cuts.back() > cuts.front())) return 0.0;
    // the inner levels reuse cut buffers, so work on a copy of this level's cuts
    const std::vector<double> local = cuts;
    auto g = [&](double xi) -> double {
        st.x[level] = xi;
        if (level + 1 == st.dims) {
            ++st.evaluations;
            return st.f(std::span<const double>(st.x.data(), st.dims));
        }
        return level_integral(st, level + 1);
    };
    if (st.mode == IteratedMode::Fixed) return integrate_fixed(g, local, st.opts.order);
    const auto r = integrate_pieces<double>(g, local, st.opts);
    if (!r.converged) st.converged = false;
    return r.value;
}

}  // namespace

IteratedResult integrate_iterated(const IntegrandFn& f, std::size_t dims, const LimitsFn& limits,
                                  IteratedMode mode, const QuadratureOptions& opts) {
    if (dims == 0) {
        return {f(std::span<const double>{}), 1, true};
    }
    IteratedState st{f, limits, dims, mode, opts, std::vector<double>(dims, 0.0),
                     std::vector<std::vector<double>>(dims)};
    const double v = level_integral(st, 0);
    return {v, st.evaluations, st.converged};
}

IteratedResult integrate_box(const IntegrandFn& f, std::span<const double> lo,
                             std::span<const double> hi, IteratedMode mode,
                             const QuadratureOptions& opts) {
    const std::vector<double> l(lo.begin(), lo.end()), h(hi.begin(), hi.end());
    LimitsFn limits = [&](std::size_t k, std::span<const double>, std::vector<double>& cuts) {
        clip_cuts(l[k], h[k], {}, cuts);
    };
    return integrate_iterated(f, l.size(), limits, mode, opts);
}

}  // namespace rlab
