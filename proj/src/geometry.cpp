#include "rlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rlab/conditions.hpp"
#include "rlab/errors.hpp"
#include "rlab/offspring.hpp"
#include "rlab/sampling.hpp"

namespace rlab {

Parallelepiped::Parallelepiped(Vec base, std::vector<Vec> edges)
    : base_(std::move(base)), edges_(std::move(edges)), measure_(0.0) {
    const std::size_t n = base_.size();
    if (n == 0) throw ValidationError("parallelepiped needs a nonempty base");
    if (edges_.size() != n) throw ValidationError("parallelepiped needs exactly dim edge vectors");
    for (const auto& e : edges_)
        if (e.size() != n) throw ValidationError("parallelepiped edge has the wrong length");
    edge_matrix_ = Matrix::from_columns(edges_);
    measure_ = std::abs(determinant(edge_matrix_));
    if (!(measure_ > 0.0)) throw ValidationError("parallelepiped edges are linearly dependent");
    inverse_ = inverse(edge_matrix_);
}

Vec Parallelepiped::barycenter() const {
    Vec c = base_;
    for (const auto& e : edges_)
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += 0.5 * e[i];
    return c;
}

Vec Parallelepiped::coordinates(std::span<const double> x) const {
    Vec y(x.begin(), x.end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= base_[i];
    return inverse_ * y;
}

bool Parallelepiped::contains(std::span<const double> x, double tol) const {
    for (double c : coordinates(x))
        if (c < -tol || c > 1.0 + tol) return false;
    return true;
}

double Parallelepiped::margin(std::span<const double> x) const {
    double m = std::numeric_limits<double>::infinity();
    for (double c : coordinates(x)) m = std::min({m, c, 1.0 - c});
    return m;
}

Json Parallelepiped::to_json() const { return {{"base", base_}, {"edges", edges_}}; }

Parallelepiped Parallelepiped::from_json(const Json& j) {
    try {
        return Parallelepiped(j.at("base").get<Vec>(), j.at("edges").get<std::vector<Vec>>());
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed parallelepiped: ") + e.what());
    }
}

Parallelepiped box(std::span<const double> lo, std::span<const double> hi) {
    const std::size_t n = lo.size();
    std::vector<Vec> edges(n, Vec(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) edges[i][i] = hi[i] - lo[i];
    return Parallelepiped(Vec(lo.begin(), lo.end()), std::move(edges));
}

namespace {

Vec curve_point(const AnyCurve& curve, double t) {
    if (std::holds_alternative<HomogeneousCurve>(curve)) {
        const auto& c = std::get<HomogeneousCurve>(curve);
        t = std::max(t, c.a() + 1e-12 * (c.b() - c.a()));
        t = std::max(t, std::numeric_limits<double>::min());
    }
    return evaluate_curve(curve, t);
}

}  // namespace

double lambda_measure(const AnyCurve& curve, const Parallelepiped& E, double tol, int coarse) {
    if (static_cast<int>(E.dim()) != curve_dimension(curve))
        throw ValidationError("lambda_measure: parallelepiped dimension differs from the curve");
    if (coarse < 2) throw ValidationError("lambda_measure: coarse grid too small");
    const auto [a, b] = curve_domain(curve);
    if (!std::isfinite(a) || !std::isfinite(b)) throw CapabilityError("lambda_measure needs a bounded domain");
    const double w = (b - a) / coarse;
    std::vector<char> inside(coarse + 1);
    for (int i = 0; i <= coarse; ++i) inside[i] = E.margin(curve_point(curve, a + i * w)) >= 0.0;
    int transitions = 0;
    for (int i = 0; i < coarse; ++i) transitions += inside[i] != inside[i + 1];
    const double target = tol / std::max(1, transitions);
    double total = 0.0;
    for (int i = 0; i < coarse; ++i) {
        const double t0 = a + i * w, t1 = (i + 1 == coarse) ? b : a + (i + 1) * w;
        if (inside[i] && inside[i + 1]) {
            total += t1 - t0;
        } else if (inside[i] != inside[i + 1]) {
            double lo = t0, hi = t1;
            int guard = 0;
            while (hi - lo > target) {
                const double mid = 0.5 * (lo + hi);
                const bool in = E.margin(curve_point(curve, mid)) >= 0.0;
                (in == static_cast<bool>(inside[i]) ? lo : hi) = mid;
                if (++guard > 200) throw NumericalError("lambda_measure: bracketing did not converge");
            }
            const double c = 0.5 * (lo + hi);
            total += inside[i] ? c - t0 : t1 - c;
        }
    }
    return total;
}

CheckReport estimate_alpha_B(const AnyCurve& curve, std::span<const Parallelepiped> family, double alpha) {
    if (family.empty()) throw ValidationError("estimate_alpha_B: empty family");
    validate_alpha(curve_dimension(curve), alpha);
    CheckReport r;
    r.check_id = "alpha_B";
    r.operation = "estimate_alpha_B";
    r.parameters = {{"d", curve_dimension(curve)}, {"alpha", alpha}, {"family", family.size()}};
    Series s;
    s.columns = {"index", "measure", "lambda", "ratio"};
    double best = -1.0;
    std::size_t arg = 0;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const double lam = lambda_measure(curve, family[i]);
        const double ratio = lam / std::pow(family[i].measure(), alpha);
        s.add({static_cast<double>(i), family[i].measure(), lam, ratio});
        if (ratio > best) best = ratio, arg = i;
    }
    r.series["measure"] = std::move(s);
    r.estimate = best;
    r.witnesses.push_back({{"index", arg}, {"parallelepiped", family[arg].to_json()}});
    r.decide(std::isfinite(best), std::numeric_limits<double>::infinity());
    r.bound.reset();
    return r;
}

std::vector<Parallelepiped> adapted_frame_family(const AnyCurve& curve, double t0, std::span<const double> radii,
                                                 double c) {
    const int d = curve_dimension(curve);
    const Vec center = curve_point(curve, t0);
    std::vector<Vec> derivs;
    for (int j = 1; j <= d; ++j) derivs.push_back(evaluate_curve(curve, t0, j));
    std::vector<Parallelepiped> out;
    for (double r : radii) {
        std::vector<Vec> edges;
        Vec base = center;
        for (int j = 1; j <= d; ++j) {
            const double scale = 2.0 * c * std::pow(r, j) / factorial(j);
            Vec e(d);
            for (int i = 0; i < d; ++i) {
                e[i] = scale * derivs[j - 1][i];
                base[i] -= 0.5 * e[i];
            }
            edges.push_back(std::move(e));
        }
        out.emplace_back(std::move(base), std::move(edges));
    }
    return out;
}

std::vector<Parallelepiped> anisotropic_box_family(std::span<const double> center, std::span<const double> radii,
                                                   std::span<const double> exponents) {
    if (center.size() != exponents.size()) throw ValidationError("anisotropic boxes: exponent count mismatch");
    std::vector<Parallelepiped> out;
    for (double r : radii) {
        Vec lo(center.size()), hi(center.size());
        for (std::size_t i = 0; i < center.size(); ++i) {
            const double half = std::pow(r, exponents[i]);
            lo[i] = center[i] - half;
            hi[i] = center[i] + half;
        }
        out.push_back(box(lo, hi));
    }
    return out;
}

Lemma1Chain lemma1_chain(const SimpleCurve& curve, double t, double h, int containment_samples,
                         double containment_tol) {
    const int d = curve.d();
    if (!(h > 0.0)) throw ValidationError("lemma1_chain needs h > 0");
    if (t < curve.a() || t + h > curve.b()) throw DomainError("lemma1_chain: [t, t+h] leaves the curve domain");
    if (containment_samples < 2) throw ValidationError("lemma1_chain needs at least two containment samples");

    Lemma1Chain out;
    auto& r = out.report;
    r.check_id = "lemma1_chain";
    r.operation = "lemma1_chain";
    r.parameters = {{"d", d}, {"curve", curve.oracle().label()}, {"t", t}, {"h", h},
                    {"containmentSamples", containment_samples}};
    r.tolerance = 1e-12;

    const double f0 = curve.phi(t, d - 2), f1 = curve.phi(t + h, d - 2);
    const double g0 = curve.phi(t, d - 1), g1 = curve.phi(t + h, d - 1);
    const double delta = g1 - g0;
    out.rho = h * g1 + f0 - f1;
    // rho is a cancellation of O(|f0| + |f1| + h|g1|) terms
    const double rho_floor = 1e-14 * std::max({1.0, std::abs(h * g1), std::abs(f0), std::abs(f1)});
    bool ok = true;
    if (out.rho < -rho_floor) {
        ok = false;
        r.witnesses.push_back({{"failure", "rho negative"}, {"rho", out.rho}});
    }
    // A nonpositive rho means phi^(d-2) is affine on [t, t+h]; the band then
    // has zero width and no parallelepiped exists.
    if (!(out.rho > rho_floor)) {
        r.estimate = out.rho;
        r.status = ok ? CheckStatus::Inconclusive : CheckStatus::Fail;
        r.note("rho = 0: the parallelogram degenerates to the chord band");
        return out;
    }
    out.chain.emplace_back(Vec{t, f0 - out.rho}, std::vector<Vec>{{0.0, out.rho}, {h, h * g1}});

    for (int k = 3; k <= d; ++k) {
        const Parallelepiped& prev = out.chain.back();
        const Vec x0 = prev.barycenter();
        // E~ has base (0, B' - x0), edges (0, e'_i) and (1, x0)
        Vec base(k, 0.0);
        for (int i = 1; i < k; ++i) base[i] = prev.base()[i - 1] - x0[i - 1];
        std::vector<Vec> edges;
        for (const auto& e : prev.edges()) {
            Vec v(k, 0.0);
            for (int i = 1; i < k; ++i) v[i] = e[i - 1];
            edges.push_back(std::move(v));
        }
        Vec apex(k, 1.0);
        for (int i = 1; i < k; ++i) apex[i] = x0[i - 1];
        edges.push_back(std::move(apex));
        // E_{d-k} = p + h E~, p = last k coordinates of gamma^(d-k)(t)
        const Vec g = evaluate_curve(curve, t, d - k);
        Vec p(g.end() - k, g.end());
        for (int i = 0; i < k; ++i) base[i] = p[i] + h * base[i];
        for (auto& e : edges)
            for (double& x : e) x *= h;
        out.chain.emplace_back(std::move(base), std::move(edges));
    }

    Series s;
    s.columns = {"k", "measure", "bound", "recursionError"};
    double worst_rec = 0.0;
    for (std::size_t i = 0; i < out.chain.size(); ++i) {
        const int k = static_cast<int>(i) + 2;
        const double m = out.chain[i].measure();
        const double bound = std::pow(h, (k * k + k - 2) / 2.0) * delta;
        double rec = 0.0;
        if (i > 0) {
            const double expect = std::pow(h, k) * out.chain[i - 1].measure();
            rec = std::abs(m - expect) / expect;
            worst_rec = std::max(worst_rec, rec);
            if (rec > r.tolerance) {
                ok = false;
                r.witnesses.push_back({{"failure", "measure recursion"}, {"k", k}, {"relativeError", rec}});
            }
        }
        if (m > bound * (1.0 + 1e-12)) {
            ok = false;
            r.witnesses.push_back({{"failure", "measure bound"}, {"k", k}, {"measure", m}, {"bound", bound}});
        }
        out.measures.push_back(m);
        out.bounds.push_back(bound);
        s.add({static_cast<double>(k), m, bound, rec});
    }

    // sampled containment of gamma^(d-k)(s), s in [t, t+h]
    long violations = 0;
    for (std::size_t i = 0; i < out.chain.size(); ++i) {
        const int k = static_cast<int>(i) + 2;
        for (int n = 0; n < containment_samples; ++n) {
            const double sn = t + h * n / (containment_samples - 1.0);
            const Vec g = evaluate_curve(curve, sn, d - k);
            bool head_ok = true;
            for (int j = 0; j < d - k; ++j) head_ok &= g[j] == (j == d - k - 1 ? 1.0 : 0.0);
            const Vec tail(g.end() - k, g.end());
            if (!head_ok || !out.chain[i].contains(tail, containment_tol)) {
                if (violations++ == 0) {
                    ok = false;
                    r.witnesses.push_back({{"failure", "containment"}, {"k", k}, {"s", sn}, {"point", tail},
                                           {"coordinates", out.chain[i].coordinates(tail)}});
                }
            }
        }
    }
    r.parameters["rho"] = out.rho;
    r.parameters["containmentViolations"] = violations;
    r.parameters["maxRecursionError"] = worst_rec;
    r.series["chain"] = std::move(s);
    r.estimate = out.measures.back();
    r.decide(ok, out.bounds.back());
    return out;
}

CheckReport lemma1_conclusion(const SimpleCurve& curve, std::span<const Lemma1Sample> samples, double alpha,
                              std::optional<double> B, double tolerance) {
    const int d = curve.d();
    validate_alpha(d, alpha);
    const double rho = phicond_rho(d, alpha);
    CheckReport r;
    r.check_id = "lemma1_conclusion";
    r.operation = "lemma1_conclusion";
    r.parameters = {{"d", d}, {"curve", curve.oracle().label()}, {"alpha", alpha}, {"rho", rho},
                    {"samples", samples.size()}};
    r.tolerance = tolerance;
    struct Row {
        double h, lam, m, delta;
    };
    std::vector<Row> rows;
    bool ok = true;
    std::size_t skipped = 0;
    const AnyCurve any = curve;
    for (const auto& smp : samples) {
        const double h = smp.s - smp.t;
        auto ch = lemma1_chain(curve, smp.t, h, 200);
        if (ch.chain.size() != static_cast<std::size_t>(d - 1)) {
            ++skipped;
            continue;
        }
        if (!ch.report.pass()) {
            ok = false;
            r.witnesses.push_back({{"failure", "chain"}, {"t", smp.t}, {"s", smp.s}});
            continue;
        }
        const auto& E0 = ch.chain.back();
        const double lam = lambda_measure(any, E0, 1e-12 * (curve.b() - curve.a()));
        if (lam < h * (1.0 - 1e-9)) {
            ok = false;
            r.witnesses.push_back({{"failure", "lambda(E_0) < h"}, {"t", smp.t}, {"s", smp.s}, {"lambda", lam}});
        }
        rows.push_back({h, lam, E0.measure(), curve.phi(smp.s, d - 1) - curve.phi(smp.t, d - 1)});
    }
    if (rows.empty()) {
        r.status = CheckStatus::Inconclusive;
        r.note("no usable samples");
        return r;
    }
    double b_est = 0.0;
    for (const auto& row : rows) b_est = std::max(b_est, row.lam / std::pow(row.m, alpha));
    const double Bv = B.value_or(b_est);
    r.parameters["B"] = Bv;
    r.parameters["Bestimated"] = b_est;
    Series s;
    s.columns = {"h", "lambda", "measure", "lhs", "rhs"};
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        const double lhs = std::pow(Bv, -1.0 / alpha) * std::pow(row.h, rho);
        s.add({row.h, row.lam, row.m, lhs, row.delta});
        worst = std::min(worst, row.delta / lhs);
        if (lhs > row.delta * (1.0 + tolerance)) {
            ok = false;
            r.witnesses.push_back({{"failure", "conclusion"}, {"h", row.h}, {"lhs", lhs}, {"rhs", row.delta}});
        }
    }
    r.series["conclusion"] = std::move(s);
    if (skipped) r.note(std::to_string(skipped) + " samples with degenerate chains skipped");
    r.estimate = worst;
    r.decide(ok, 1.0);
    return r;
}

KU K_u(std::span<const double> h, double alpha) {
    Vec x(h.begin(), h.end());
    x.push_back(0.0);
    const int d = static_cast<int>(x.size());
    double u = 1.0, sup = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            const double g = std::abs(x[i] - x[j]);
            u *= g;
            sup = std::max(sup, g);
        }
    if (u == 0.0) return {0.0, 0.0};
    return {u, u * std::pow(sup, 1.0 / alpha - d * (d + 1) / 2.0)};
}

CheckReport K_u_geometry(std::span<const double> h, double alpha, std::span<const double> lambdas) {
    const int d = static_cast<int>(h.size()) + 1;
    validate_alpha(d, alpha);
    const Vec default_l{2.0, 10.0};
    if (lambdas.empty()) lambdas = default_l;
    const KU base = K_u(h, alpha);
    CheckReport r;
    r.check_id = "K_u_geometry";
    r.operation = "K_u_geometry";
    r.parameters = {{"h", Vec(h.begin(), h.end())}, {"alpha", alpha}, {"degree", 1.0 / alpha - d}};
    r.tolerance = 1e-12;
    r.witnesses.push_back({{"u", base.u}, {"K", base.K}});
    double worst = 0.0;
    for (double l : lambdas) {
        Vec hl(h.begin(), h.end());
        for (double& x : hl) x *= l;
        const KU scaled = K_u(hl, alpha);
        const double expect = std::pow(l, 1.0 / alpha - d) * base.K;
        const double err = base.K == 0.0 ? std::abs(scaled.K) : std::abs(scaled.K - expect) / std::abs(expect);
        worst = std::max(worst, err);
    }
    r.estimate = worst;
    r.decide(worst <= r.tolerance, r.tolerance);
    return r;
}

double sm_measure_d2(double alpha, int m) {
    const double kappa = 1.0 / alpha - 2.0;
    return 2.0 * (std::pow(2.0, -m / kappa) - std::pow(2.0, -(m + 1) / kappa));
}

CheckReport sm_measure(int d, double alpha, const ShellOptions& opts) {
    if (d < 2) throw ValidationError("sm_measure needs d >= 2");
    if (!(alpha > 0.0 && alpha < 1.0 / d)) throw ValidationError("sm_measure needs 0 < alpha < 1/d");
    if (opts.m_max < opts.m_min) throw ValidationError("sm_measure: empty shell range");
    const int dim = d - 1;
    const int nshell = opts.m_max - opts.m_min + 1;
    std::vector<long> counts(nshell, 0);
    Rng rng(opts.seed);
    Vec h(dim);
    for (std::size_t n = 0; n < opts.samples; ++n) {
        for (double& x : h) x = rng.uniform(-opts.half_width, opts.half_width);
        const double K = K_u(h, alpha).K;
        if (!(K > 0.0)) continue;
        const double m = std::floor(-std::log2(K));
        if (m >= opts.m_min && m <= opts.m_max) ++counts[static_cast<int>(m) - opts.m_min];
    }
    const double vol = std::pow(2.0 * opts.half_width, dim);
    const double N = static_cast<double>(opts.samples);
    const double expo = (d - 1) * alpha / (1.0 - d * alpha);
    const double expected_ratio = std::pow(2.0, -expo);

    CheckReport r;
    r.check_id = "sm_measure";
    r.operation = "sm_measure";
    r.parameters = {{"d", d},           {"alpha", alpha},       {"mMin", opts.m_min},
                    {"mMax", opts.m_max}, {"samples", opts.samples}, {"halfWidth", opts.half_width},
                    {"seed", opts.seed}};
    r.tolerance = opts.ratio_tol;
    Series s;
    s.columns = {"m", "measure", "stderr", "count", "normalized", "ratio", "expectedRatio", "analytic"};
    double worst = 0.0;
    bool thin = false;
    double prev = 0.0;
    for (int i = 0; i < nshell; ++i) {
        const int m = opts.m_min + i;
        const double p = counts[i] / N;
        const double meas = p * vol;
        const double se = vol * std::sqrt(p * (1.0 - p) / N);
        const double ratio = i > 0 && prev > 0 ? meas / prev : std::numeric_limits<double>::quiet_NaN();
        if (i > 0) worst = std::max(worst, std::abs(ratio / expected_ratio - 1.0));
        if (counts[i] < 100) thin = true;
        const double analytic = d == 2 ? sm_measure_d2(alpha, m) : std::numeric_limits<double>::quiet_NaN();
        s.add({static_cast<double>(m), meas, se, static_cast<double>(counts[i]), meas * std::pow(2.0, m * expo),
               ratio, expected_ratio, analytic});
        prev = meas;
    }
    r.series["shells"] = std::move(s);
    r.estimate = worst;
    if (thin) {
        r.note("fewer than 100 samples in some shell; confidence is wide");
        r.status = CheckStatus::Inconclusive;
        r.bound = opts.ratio_tol;
        return r;
    }
    r.decide(worst <= opts.ratio_tol, opts.ratio_tol);
    return r;
}

CheckReport check_J_geq_K(const SimpleCurve& curve, double sigma, double alpha, const JKOptions& opts) {
    const int d = curve.d();
    validate_alpha(d, alpha);
    if (!(sigma > 0.0)) throw ValidationError("check_J_geq_K needs sigma > 0");
    const double scale = std::pow(sigma, -1.0 / alpha);
    const double lo = curve.clamp(curve.a()), hi = curve.clamp(curve.b());
    const double min_gap = opts.min_gap_rel * (hi - lo);
    Rng rng(opts.seed);
    CheckReport r;
    r.check_id = "J_geq_K";
    r.operation = "check_J_geq_K";
    r.parameters = {{"d", d}, {"curve", curve.oracle().label()}, {"sigma", sigma}, {"alpha", alpha},
                    {"samples", opts.samples}, {"seed", opts.seed}};
    double inf = std::numeric_limits<double>::infinity();
    Json arg;
    std::size_t skipped = 0;
    Vec x(d), sorted(d), h(d - 1);
    for (std::size_t n = 0; n < opts.samples; ++n) {
        for (double& v : x) v = rng.uniform(lo, hi);
        sorted = x;
        std::sort(sorted.begin(), sorted.end());
        bool close = false;
        for (int j = 1; j < d; ++j) close |= sorted[j] - sorted[j - 1] < min_gap;
        if (close) {
            ++skipped;
            continue;
        }
        for (int j = 0; j < d - 1; ++j) h[j] = x[j] - x[d - 1];
        const double J = std::abs(jacobian_nodes(curve, sorted));
        const double K = K_u(h, alpha).K;
        const double ratio = J / (scale * K);
        if (ratio < inf) {
            inf = ratio;
            arg = {{"s", x[d - 1]}, {"h", h}, {"J", J}, {"K", K}};
        }
    }
    r.parameters["skipped"] = skipped;
    if (!std::isfinite(inf)) {
        r.status = CheckStatus::Inconclusive;
        r.note("no usable samples");
        return r;
    }
    r.estimate = inf;
    r.witnesses.push_back(arg);
    r.decide(inf > 0.0, 0.0);
    return r;
}

}  // namespace rlab
