#include "rlab/offspring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rlab/errors.hpp"
#include "rlab/sampling.hpp"

namespace rlab {

Vec offspring_point(const SimpleCurve& curve, double t, const GapVector& h) {
    if (h.d() != curve.d()) throw ValidationError("gap vector length must be d-1");
    Vec g(curve.d(), 0.0);
    for (double k : h.kappa()) {
        const double s = t + k;
        if (s < curve.a() || s > curve.b()) throw DomainError("offspring node leaves the curve domain");
        const Vec p = evaluate_curve(curve, s);
        for (int i = 0; i < curve.d(); ++i) g[i] += p[i];
    }
    return g;
}

double jacobian_nodes(const SimpleCurve& curve, std::span<const double> nodes, int order_shift) {
    const std::size_t k = nodes.size();
    if (k == 0) return 1.0;
    const double c = std::accumulate(nodes.begin(), nodes.end(), 0.0) / static_cast<double>(k);
    Matrix m(k, k);
    for (std::size_t j = 0; j < k; ++j) {
        const double x = nodes[j] - c;
        double p = 1.0;
        for (std::size_t i = 0; i + 1 < k; ++i) {
            m(i, j) = p;
            p *= x / static_cast<double>(i + 1);
        }
        m(k - 1, j) = curve.phi(nodes[j], 1 + order_shift);
    }
    return determinant(std::move(m));
}

double jacobian_direct(const SimpleCurve& curve, double t, const GapVector& h) {
    if (h.d() != curve.d()) throw ValidationError("gap vector length must be d-1");
    Vec s(h.kappa());
    for (double& x : s) {
        x += t;
        if (x < curve.a() || x > curve.b()) throw DomainError("jacobian node leaves the curve domain");
    }
    return jacobian_nodes(curve, s);
}

JacobianIntegral jacobian_integral(const SimpleCurve& curve, double t, const GapVector& h,
                                   const QuadratureOptions& q) {
    if (h.d() != curve.d()) throw ValidationError("gap vector length must be d-1");
    const int d = curve.d();
    Vec s(h.kappa());
    for (double& x : s) {
        x += t;
        if (x < curve.a() || x > curve.b()) throw DomainError("jacobian node leaves the curve domain");
    }
    for (int j = 0; j + 1 < d; ++j)
        if (s[j + 1] == s[j]) return {0.0, 0, true};
    const Vec lo(s.begin(), s.end() - 1), hi(s.begin() + 1, s.end());
    const auto r = integrate_box(
        [&curve](std::span<const double> sigma) { return jacobian_nodes(curve, sigma, 1); }, lo, hi,
        IteratedMode::Adaptive, q);
    if (!r.converged) throw NumericalError("jacobian_integral: nested quadrature did not converge");
    return {r.value, r.evaluations, r.converged};
}

double jacobian_psi(const SimpleCurve& curve, double t, const GapVector& h, const QuadratureOptions& q) {
    if (h.d() != curve.d()) throw ValidationError("gap vector length must be d-1");
    const int d = curve.d();
    const double s1 = t, sd = t + h.total();
    if (s1 < curve.a() || sd > curve.b()) throw DomainError("jacobian node leaves the curve domain");
    if (d == 2) {
        return integrate<double>([&](double u) { return curve.phi(u, 2); }, s1, sd, q).value;
    }
    PsiKernel kernel(h);
    Vec cuts(h.kappa());
    for (double& x : cuts) x += t;
    const auto r = integrate_pieces<double>([&](double u) { return kernel(u - s1) * curve.phi(u, d); }, cuts, q);
    return r.value;
}

Vec OffspringFrame::reconstruct(double t) const {
    const Vec g = evaluate_curve(tilde, t + hbar);
    const double d = static_cast<double>(g.size());
    Vec out = matrix * g;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = shift[i] + d * out[i];
    return out;
}

OffspringFrame offspring_decomposition(const SimpleCurve& curve, const GapVector& h) {
    if (h.d() != curve.d()) throw ValidationError("gap vector length must be d-1");
    const int d = curve.d();
    const Vec& kappa = h.kappa();
    const double hbar = h.mean_offset();
    Vec c(d);
    for (int i = 0; i < d; ++i) c[i] = kappa[i] - hbar;
    // moments[m] = sum_nu c_nu^m / m!
    Vec moments(d, 0.0);
    for (int m = 0; m < d; ++m)
        for (double x : c) moments[m] += std::pow(x, m) / factorial(m);

    Vec shift(d, 0.0);
    for (int k = 1; k < d; ++k) shift[k - 1] = moments[k];
    Matrix A = Matrix::identity(d);
    for (int i = 1; i < d; ++i)
        for (int j = 1; j < i; ++j) A(i - 1, j - 1) = moments[i - j] / d;

    const double lo = curve.a() + hbar, hi = curve.b() - h.total() + hbar;
    if (!(hi > lo)) throw DomainError("offspring domain is empty for these gaps");
    const DerivativeOracle base = curve.oracle();
    const SimpleCurve parent = curve;
    DerivativeOracle tilde_phi(
        lo, hi, base.max_order(),
        [parent, kappa, hbar, d](double s, int k) {
            double sum = 0.0;
            for (double x : kappa) sum += parent.phi(s - hbar + x, k);
            return sum / d;
        },
        base.label() + " offspring");
    return {hbar, std::move(shift), std::move(A), SimpleCurve(d, std::move(tilde_phi), curve.options())};
}

std::vector<OffspringSample> offspring_samples(const SimpleCurve& curve, const SigmaSweepOptions& opts) {
    const int d = curve.d();
    const double width = curve.b() - curve.a();
    const double hhi = opts.h_hi > 0.0 ? opts.h_hi : width / d;
    if (!(hhi > opts.h_lo)) throw ValidationError("sigma sweep: empty gap box");
    Rng rng(opts.seed);
    Vec lo(d, opts.h_lo), hi(d, hhi);
    lo[d - 1] = 0.0;
    hi[d - 1] = 1.0;
    std::vector<OffspringSample> out;
    for (auto& p : latin_hypercube(opts.samples, lo, hi, rng)) {
        Vec h(p.begin(), p.end() - 1);
        const double total = std::accumulate(h.begin(), h.end(), 0.0);
        if (total >= width) continue;
        const double t = curve.a() + p.back() * (width - total);
        out.push_back({t, std::move(h)});
    }
    return out;
}

namespace {

bool degenerate(const SimpleCurve& curve, const GapVector& h, double rel) {
    const int d = curve.d();
    const double scale = std::pow(curve.b() - curve.a(), d * (d - 1) / 2.0);
    return !(h.v() > rel * scale);
}

}  // namespace

double sigma_ratio(const SimpleCurve& curve, double t, const GapVector& h) {
    const int d = curve.d();
    double logsum = 0.0;
    for (double k : h.kappa()) {
        const double f = curve.phi(t + k, d);
        if (!(f > 0.0)) return std::numeric_limits<double>::quiet_NaN();
        logsum += std::log(f);
    }
    const double gm = std::exp(logsum / d);
    return jacobian_direct(curve, t, h) / (h.v() * gm);
}

CheckReport estimate_sigma(const SimpleCurve& curve, std::span<const OffspringSample> samples,
                           std::optional<double> A, double degenerate_rel) {
    CheckReport r;
    r.check_id = "estimate_sigma";
    r.operation = "estimate_sigma";
    r.parameters = {{"d", curve.d()}, {"curve", curve.oracle().label()}, {"samples", samples.size()}};
    std::size_t skipped = 0;
    double inf = std::numeric_limits<double>::infinity();
    const OffspringSample* arg = nullptr;
    Series s;
    s.columns = {"t", "ratio"};
    for (const auto& smp : samples) {
        GapVector h(smp.h);
        if (degenerate(curve, h, degenerate_rel)) {
            ++skipped;
            continue;
        }
        const double ratio = sigma_ratio(curve, smp.t, h);
        if (std::isnan(ratio)) {
            ++skipped;
            continue;
        }
        s.add({smp.t, ratio});
        if (ratio < inf) inf = ratio, arg = &smp;
    }
    r.parameters["degenerateSkipped"] = skipped;
    r.series["ratios"] = std::move(s);
    if (!arg) {
        r.status = CheckStatus::Inconclusive;
        r.estimate = std::numeric_limits<double>::quiet_NaN();
        r.note("all samples degenerate");
        return r;
    }
    r.estimate = inf;
    r.witnesses.push_back({{"t", arg->t}, {"h", arg->h}, {"ratio", inf}});
    if (A) {
        r.parameters["A"] = *A;
        r.witnesses.push_back({{"sigmaTimesA", inf * *A}});
    }
    r.decide(inf > 0.0, 0.0);
    return r;
}

CheckReport check_offspring_closure(const SimpleCurve& curve, const GapVector& h, const SigmaSweepOptions& opts,
                                    double tolerance) {
    const auto frame = offspring_decomposition(curve, h);
    const auto base_samples = offspring_samples(curve, opts);
    const auto base = estimate_sigma(curve, base_samples);
    SigmaSweepOptions topts = opts;
    topts.h_hi = 0.0;
    const auto tilde_samples = offspring_samples(frame.tilde, topts);
    const auto tilde = estimate_sigma(frame.tilde, tilde_samples);

    CheckReport r;
    r.check_id = "offspring_closure";
    r.operation = "check_offspring_closure";
    r.parameters = {{"d", curve.d()}, {"h", h.h()}, {"samples", opts.samples}, {"seed", opts.seed}};
    r.tolerance = tolerance;
    r.witnesses.push_back({{"sigmaPhi", base.estimate}, {"sigmaTilde", tilde.estimate}});
    if (base.status == CheckStatus::Inconclusive || tilde.status == CheckStatus::Inconclusive) {
        r.status = CheckStatus::Inconclusive;
        r.note("a sigma sweep had no usable samples");
        return r;
    }
    const double bound = base.estimate / curve.d();
    r.estimate = tilde.estimate;
    r.decide(tilde.estimate >= bound - tolerance, bound);
    return r;
}

CheckReport weight_product_bound(const SimpleCurve& curve, std::span<const OffspringSample> samples,
                                 std::optional<double> sigma, double identity_tol) {
    const int d = curve.d();
    CheckReport r;
    r.check_id = "weight_product_bound";
    r.operation = "weight_product_bound";
    r.parameters = {{"d", d}, {"curve", curve.oracle().label()}, {"samples", samples.size()}};
    r.tolerance = identity_tol;
    double sig = 0.0;
    if (sigma) {
        sig = *sigma;
    } else {
        const auto est = estimate_sigma(curve, samples);
        if (est.status == CheckStatus::Inconclusive) {
            r.status = CheckStatus::Inconclusive;
            r.note("no usable samples for sigma");
            return r;
        }
        sig = est.estimate;
    }
    r.parameters["sigma"] = sig;
    double max_identity = 0.0, min_slack = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (const auto& smp : samples) {
        GapVector h(smp.h);
        if (degenerate(curve, h, 1e-12)) continue;
        double H = 1.0, logsum = 0.0;
        bool positive = true;
        for (double k : h.kappa()) {
            H *= affine_weight(curve, smp.t + k);
            const double f = curve.phi(smp.t + k, d);
            if (!(f > 0.0)) positive = false;
            logsum += std::log(std::abs(f));
        }
        if (!positive) continue;
        const double gm = std::exp(logsum / d);
        const double hp = std::pow(H, (d + 1) / 2.0);
        const double id_err = std::abs(gm - hp) / gm;
        max_identity = std::max(max_identity, id_err);
        const double J = jacobian_direct(curve, smp.t, h);
        const double rhs = sig * h.v() * hp;
        const double slack = J / rhs;
        min_slack = std::min(min_slack, slack);
        if (id_err > identity_tol || J < rhs * (1.0 - 1e-9)) {
            ok = false;
            r.witnesses.push_back({{"t", smp.t}, {"h", smp.h}, {"J", J}, {"bound", rhs}, {"identityError", id_err}});
        }
    }
    r.estimate = min_slack;
    r.parameters["maxIdentityError"] = max_identity;
    r.decide(ok, 1.0);
    return r;
}

CheckReport check_jacobian_identity(const SimpleCurve& curve, std::span<const OffspringSample> samples,
                                    double tolerance) {
    CheckReport r;
    r.check_id = "jacobian_identity";
    r.operation = "check_jacobian_identity";
    r.parameters = {{"d", curve.d()}, {"curve", curve.oracle().label()}, {"samples", samples.size()}};
    r.tolerance = tolerance;
    Series s;
    s.columns = {"t", "direct", "integral", "error"};
    double worst = 0.0;
    for (const auto& smp : samples) {
        const GapVector h(smp.h);
        const double direct = jacobian_direct(curve, smp.t, h);
        const double integral = jacobian_integral(curve, smp.t, h).value;
        const double err = std::abs(direct - integral) / (1.0 + std::abs(direct));
        s.add({smp.t, direct, integral, err});
        if (err > worst) {
            worst = err;
            r.witnesses = Json::array({{{"t", smp.t}, {"h", smp.h}, {"direct", direct}, {"integral", integral}}});
        }
    }
    r.series["identity"] = std::move(s);
    r.estimate = worst;
    r.decide(worst <= tolerance, tolerance);
    return r;
}

CheckReport check_monomial_jacobian(int d, std::span<const OffspringSample> samples, double a, double b,
                                    double tolerance) {
    const SimpleCurve curve(d, monomial_oracle(d, a, b, 1.0 / factorial(d)));
    double norm = 1.0;
    for (int j = 1; j < d; ++j) norm *= factorial(j);
    CheckReport r;
    r.check_id = "monomial_jacobian";
    r.operation = "check_monomial_jacobian";
    r.parameters = {{"d", d}, {"samples", samples.size()}};
    r.tolerance = tolerance;
    double worst = 0.0;
    for (const auto& smp : samples) {
        const GapVector h(smp.h);
        const double lhs = jacobian_direct(curve, smp.t, h) * norm;
        const double err = std::abs(lhs - h.v()) / std::abs(h.v());
        if (err > worst) {
            worst = err;
            r.witnesses = Json::array({{{"t", smp.t}, {"h", smp.h}, {"lhs", lhs}, {"v", h.v()}}});
        }
    }
    r.estimate = worst;
    r.decide(worst <= tolerance, tolerance);
    return r;
}

}  // namespace rlab
