#include "rlab/conditions.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <numeric>
#include <sstream>

#include "rlab/errors.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/sampling.hpp"

namespace rlab {

MeanVariant mean_variant_from_string(const std::string& s) {
    if (s == "AM") return MeanVariant::AM;
    if (s == "GM") return MeanVariant::GM;
    throw ValidationError("unknown mean variant '" + s + "' (expected AM or GM)");
}

FlattenVariant flatten_variant_from_string(const std::string& s) {
    if (s == "exp") return FlattenVariant::Exp;
    if (s == "log") return FlattenVariant::Log;
    throw ValidationError("unknown flatten variant '" + s + "' (expected exp or log)");
}

namespace {

Vec interior_grid(double a, double b, int n) {
    Vec g(n);
    for (int i = 0; i < n; ++i) g[i] = a + (b - a) * (i + 0.5) / n;
    return g;
}

// Visits every nondecreasing index tuple of length d over [0, n).
template <class F>
void for_each_ordered(int n, int d, F&& f) {
    std::vector<int> idx(d, 0);
    while (true) {
        f(idx);
        int j = d - 1;
        while (j >= 0 && idx[j] == n - 1) --j;
        if (j < 0) return;
        ++idx[j];
        for (int k = j + 1; k < d; ++k) idx[k] = idx[j];
    }
}

}  // namespace

ConditionEstimate estimate_A(const SimpleCurve& curve, MeanVariant variant, int grid_size) {
    if (grid_size < 2) throw ValidationError("estimate_A needs grid_size >= 2");
    const int d = curve.d();
    const double lo = curve.clamp(curve.a()), hi = curve.clamp(curve.b());
    // endpoints included: the sup often sits on the boundary of the simplex
    Vec grid(grid_size);
    for (int i = 0; i < grid_size; ++i) grid[i] = lo + (hi - lo) * i / (grid_size - 1);
    Vec logf(grid_size);
    for (int i = 0; i < grid_size; ++i) {
        const double f = curve.phi(grid[i], d);
        if (!(f > 0.0)) {
            std::ostringstream os;
            os << "estimate_A: phi^(d)(" << grid[i] << ") = " << f << " is not positive";
            throw ValidationError(os.str());
        }
        logf[i] = std::log(f);
    }
    auto mean_of = [variant](std::span<const double> s) {
        if (variant == MeanVariant::AM) return std::accumulate(s.begin(), s.end(), 0.0) / s.size();
        double l = 0.0;
        for (double x : s) l += std::log(x);
        return std::exp(l / s.size());
    };
    auto log_ratio = [&](std::span<const double> s) {
        double l = 0.0;
        for (double x : s) {
            const double f = curve.phi(x, d);
            if (!(f > 0.0)) return -std::numeric_limits<double>::infinity();
            l += std::log(f);
        }
        const double fm = curve.phi(mean_of(s), d);
        if (!(fm > 0.0)) return std::numeric_limits<double>::infinity();
        return l / s.size() - std::log(fm);
    };

    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_idx;
    Vec tuple(d);
    long tuples = 0;
    for_each_ordered(grid_size, d, [&](const std::vector<int>& idx) {
        double l = 0.0;
        for (int j = 0; j < d; ++j) {
            tuple[j] = grid[idx[j]];
            l += logf[idx[j]];
        }
        const double fm = curve.phi(mean_of(tuple), d);
        const double v = l / d - std::log(fm);
        ++tuples;
        if (v > best) best = v, best_idx = idx;
    });

    Vec s(d);
    for (int j = 0; j < d; ++j) s[j] = grid[best_idx[j]];
    // coordinate-wise golden section, keeping the tuple ordered
    for (int sweep = 0; sweep < 3; ++sweep) {
        for (int j = 0; j < d; ++j) {
            const double l = j == 0 ? lo : s[j - 1];
            const double r = j == d - 1 ? hi : s[j + 1];
            if (!(r > l)) continue;
            Vec trial = s;
            const auto res = golden_minimize(
                [&](double x) {
                    trial[j] = x;
                    return -log_ratio(trial);
                },
                l, r, 1e-10 * (hi - lo));
            if (-res.value > best) {
                best = -res.value;
                s[j] = res.x[0];
            }
        }
    }

    ConditionEstimate out;
    out.condition = variant == MeanVariant::AM ? "AM" : "GM";
    out.constant = std::exp(best);
    out.attained_at = s;
    out.grid_size = grid_size;
    auto& r = out.report;
    r.check_id = "estimate_A";
    r.operation = "estimate_A";
    r.parameters = {{"d", d}, {"curve", curve.oracle().label()}, {"variant", out.condition},
                    {"gridSize", grid_size}, {"tuples", tuples}};
    r.estimate = out.constant;
    r.witnesses.push_back({{"s", s}});
    // the diagonal gives ratio 1, so anything below 1 is a numerical defect
    r.decide(out.constant >= 1.0 - 1e-12, 1.0);
    return out;
}

double phicond_rho(int d, double alpha) { return 1.0 / alpha + 1.0 - d * (d + 1) / 2.0; }

void validate_alpha(int d, double alpha) {
    if (d == 2) {
        if (!(alpha > 0.0 && alpha < 1.0 / 3.0)) throw ValidationError("alpha must lie in (0, 1/3) for d = 2");
    } else if (!(alpha > 0.0 && alpha <= 2.0 / (d * (d + 1.0)) * (1.0 + 1e-15))) {
        throw ValidationError("alpha must lie in (0, 2/(d(d+1))]");
    }
}

ConditionEstimate check_phicond(const SimpleCurve& curve, double alpha, int grid_size) {
    const int d = curve.d();
    validate_alpha(d, alpha);
    if (grid_size < 2) throw ValidationError("check_phicond needs grid_size >= 2");
    const double rho = phicond_rho(d, alpha);
    const double lo = curve.clamp(curve.a()), hi = curve.clamp(curve.b());
    const Vec grid = interior_grid(curve.a(), curve.b(), grid_size);
    Vec f(grid_size);
    for (int i = 0; i < grid_size; ++i) f[i] = curve.phi(grid[i], d - 1);
    double inf = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 1;
    for (int i = 0; i < grid_size; ++i)
        for (int j = i + 1; j < grid_size; ++j) {
            const double q = (f[j] - f[i]) / std::pow(grid[j] - grid[i], rho);
            if (q < inf) inf = q, bi = i, bj = j;
        }
    // refine over (t, gap) with s = t + gap
    const double width = hi - lo;
    const Vec blo{lo, 1e-7 * width}, bhi{hi, width};
    auto quotient = [&](std::span<const double> x) {
        const double t = x[0], s = x[0] + x[1];
        if (s > hi) return std::numeric_limits<double>::infinity();
        return (curve.phi(s, d - 1) - curve.phi(t, d - 1)) / std::pow(s - t, rho);
    };
    const auto res = compass_minimize(quotient, {grid[bi], grid[bj] - grid[bi]}, blo, bhi, 0.05, 1e-9, 4000);
    Vec at{grid[bi], grid[bj]};
    if (res.value < inf) {
        inf = res.value;
        at = {res.x[0], res.x[0] + res.x[1]};
    }

    ConditionEstimate out;
    out.condition = "phicond";
    out.infimum = inf;
    out.constant = inf > 0.0 ? std::pow(inf, -alpha) : std::numeric_limits<double>::infinity();
    out.attained_at = at;
    out.grid_size = grid_size;
    auto& r = out.report;
    r.check_id = "phicond";
    r.operation = "check_phicond";
    r.parameters = {{"d", d}, {"curve", curve.oracle().label()}, {"alpha", alpha}, {"rho", rho},
                    {"gridSize", grid_size}};
    r.estimate = out.constant;
    r.witnesses.push_back({{"t", at[0]}, {"s", at[1]}, {"infimum", inf}});
    r.decide(inf > 0.0, 0.0);
    return out;
}

Vec expflat_coefficients(double beta, int k) {
    if (!(beta > 0.0)) throw ValidationError("exp-flat beta must be positive");
    if (k < 1) return {1.0};
    Vec a{1.0};  // k = 1
    for (int m = 1; m < k; ++m) {
        Vec next(m + 1, 0.0);
        for (int j = 0; j <= m; ++j) {
            const double keep = j < m ? a[j] : 0.0;
            const double lower = j >= 1 ? a[j - 1] * (m + 1 - j + m / beta) : 0.0;
            next[j] = keep - lower;
        }
        a = std::move(next);
    }
    return a;
}

double expflat_derivatives(double beta, int k, double t) {
    if (!(t > 0.0)) throw DomainError("exp-flat derivatives need t > 0");
    if (k < 0) throw CapabilityError("negative derivative order");
    const double x = std::pow(t, -beta);
    if (k == 0) return std::exp(-x);
    const Vec a = expflat_coefficients(beta, k);
    const double tb = std::pow(t, beta);
    double poly = 0.0;
    for (int j = static_cast<int>(a.size()) - 1; j >= 0; --j) poly = poly * tb + a[j];
    const double logmag = k * std::log(beta) - x - k * (beta + 1.0) * std::log(t);
    return std::exp(logmag) * poly;
}

DerivativeOracle expflat_oracle(double beta, double a, double b) {
    if (!(beta > 0.0)) throw ValidationError("exp-flat beta must be positive");
    if (!(a >= 0.0)) throw ValidationError("exp-flat domain must lie in t >= 0");
    std::ostringstream label;
    label << "exp-flat beta=" << beta;
    return DerivativeOracle(
        a, b, 12,
        [beta](double t, int k) {
            if (t <= 0.0) return 0.0;  // every derivative tends to 0 at the origin
            return expflat_derivatives(beta, k, t);
        },
        label.str());
}

namespace {

// Iterated-integral table for a curve given only by its top derivative.
class FlatTable {
public:
    FlatTable(std::function<double(double)> top, int d, double a, double b, int panels)
        : top_(std::move(top)), d_(d), a_(a), b_(b), panels_(panels), values_((panels + 1) * d, 0.0) {
        const double w = (b - a) / panels;
        for (int i = 0; i < panels; ++i) {
            const double t0 = a + i * w, t1 = (i + 1 == panels) ? b : t0 + w;
            for (int k = 0; k < d; ++k) values_[(i + 1) * d + k] = propagate(i, t0, t1, k);
        }
    }

    double eval(double t, int k) const {
        if (k == d_) return top_(t);
        const double w = (b_ - a_) / panels_;
        int i = static_cast<int>(std::floor((t - a_) / w));
        i = std::clamp(i, 0, panels_ - 1);
        return propagate(i, a_ + i * w, t, k);
    }

private:
    // psi^(k)(t) from the tabulated stack at breakpoint i
    double propagate(int i, double t0, double t, int k) const {
        double s = 0.0;
        const double dt = t - t0;
        for (int m = d_ - 1; m >= k; --m) s = s * dt / (m - k + 1) + values_[i * d_ + m];
        // Horner above builds sum_m psi^(m)(t0) dt^(m-k)/(m-k)!
        if (!(t > t0)) return s;
        const int n = d_ - 1 - k;
        const double fact = factorial(n);
        QuadratureOptions q;
        q.order = 12;
        q.rel_tol = 1e-13;
        q.abs_tol = 1e-300;
        const auto r = integrate<double>([&](double u) { return std::pow(t - u, n) * top_(u); }, t0, t, q);
        return s + r.value / fact;
    }

    std::function<double(double)> top_;
    int d_;
    double a_, b_;
    int panels_;
    Vec values_;
};

}  // namespace

SimpleCurve build_flattened(const SimpleCurve& base, FlattenVariant variant, int panels) {
    const int d = base.d();
    if (panels < 1) throw ValidationError("flatten: panels must be positive");
    const auto mono = validate_monotone(base, 64);
    if (!mono.pass()) throw ValidationError("flatten: base curve fails the monotonicity certificate");
    const double dfact = factorial(d - 1);
    std::function<double(double)> top;
    const SimpleCurve b = base;
    if (variant == FlattenVariant::Exp) {
        top = [b, d, dfact](double t) {
            const double f = b.phi(t, d);
            return f > 0.0 ? dfact * std::exp(-1.0 / f) : 0.0;
        };
    } else {
        for (int i = 0; i <= 256; ++i) {
            const double t = b.a() + (b.b() - b.a()) * i / 256.0;
            if (!(b.phi(t, d) > std::exp(1.0)))
                throw ValidationError("flatten log variant needs phi^(d) > e on the whole domain");
        }
        top = [b, d, dfact](double t) { return dfact * std::log(b.phi(t, d)); };
    }
    const double lo = base.clamp(base.a()), hi = base.clamp(base.b());
    auto table = std::make_shared<const FlatTable>(top, d, lo, hi, panels);
    std::string label = (variant == FlattenVariant::Exp ? "flatten-exp(" : "flatten-log(") +
                        base.oracle().label() + ")";
    DerivativeOracle psi(
        base.a(), base.b(), d,
        [table, lo, hi](double t, int k) { return table->eval(std::clamp(t, lo, hi), k); }, label);
    return SimpleCurve(d, std::move(psi), base.options());
}

ExponentRecord exponent_calculator(const ExponentQuery& in) {
    const int d = in.d;
    if (d < 2) throw ValidationError("exponent calculator needs d >= 2");
    ExponentRecord r;
    r.d = d;
    r.p_d = (d * d + d + 2.0) / (d * d + d);
    r.q_d = (d * d + d + 2.0) / 2.0;
    r.D0 = d * (d + 1) / 2.0;
    if (in.p) {
        const double p = *in.p;
        if (!(p > 1.0 && p < r.q_d)) throw ValidationError("p must lie in (1, (d^2+d+2)/2)");
        ThetaBlock t{};
        t.p = p;
        t.p_prime = p / (p - 1.0);
        t.q = d * (d + 1) * t.p_prime / 2.0;
        t.theta = 2.0 * (d - 1) / (t.q - 2.0);
        t.A = 1.0 / (1.0 - t.theta / 2.0);
        t.B = 1.0 / (1.0 / p + t.theta * (0.5 - 1.0 / p));
        t.s = 1.0 / ((1.0 - t.theta) / t.q + t.theta / 2.0);
        t.eta = 1.0 - (d + 1) * (1.0 - t.theta) / (2.0 * t.q);
        t.eta_residual = t.eta - (d + 1) * t.theta / 4.0 - 1.0 / p;
        // relative: s grows like p' as p -> 1
        t.s_residual = std::max(std::abs(t.s - (d + 1) * t.p_prime / 2.0), std::abs(t.s - t.q / d)) / t.s;
        r.theta = t;
    }
    if (in.P) {
        const double P = *in.P;
        if (!(P >= 1.0 && P < r.p_d)) throw ValidationError("P must lie in [1, p_d)");
        const double inv_pp = 1.0 - 1.0 / P;
        r.pair = PairBlock{P, inv_pp > 0 ? 2.0 / (d * (d + 1.0) * inv_pp) : std::numeric_limits<double>::infinity()};
    }
    if (in.alpha) {
        const double a = *in.alpha;
        validate_alpha(d, a);
        AlphaBlock b{};
        b.alpha = a;
        b.q = 1.0 + 1.0 / a;
        b.delta = (1.0 - (2 * d - 1) * a) / (1.0 - a);
        b.rho = phicond_rho(d, a);
        b.kappa = 1.0 / a - d;
        b.sm_exponent = (d - 1) * a / (1.0 - d * a);
        r.alpha = b;
    }
    if (in.lorentz_s) {
        const double s = *in.lorentz_s;
        if (!(s > 0.0)) throw ValidationError("Lorentz exponent s must be positive");
        r.lorentz = LorentzBlock{s, 1.0 / (1.0 / r.p_d + 1.0 / (s * r.p_d))};
    }
    if (in.D) {
        const double D = *in.D;
        if (!(D > 0.0)) throw ValidationError("homogeneous dimension must be positive");
        const double pdp = r.q_d;  // p_d' = (d^2+d+2)/2
        r.homogeneous = HomogeneousBlock{D, (D + 1.0) * (1.0 - 1.0 / r.p_d) - 1.0, pdp / D};
    }
    return r;
}

Json ExponentRecord::to_json() const {
    Json j;
    j["d"] = d;
    j["p_d"] = p_d;
    j["q_d"] = q_d;
    j["D0"] = D0;
    if (theta)
        j["interpolation"] = {{"p", theta->p},     {"pPrime", theta->p_prime}, {"q", theta->q},
                              {"theta", theta->theta}, {"A", theta->A},         {"B", theta->B},
                              {"s", theta->s},     {"eta", theta->eta},       {"etaResidual", theta->eta_residual},
                              {"sResidual", theta->s_residual}};
    if (pair) {
        j["pairing"] = {{"P", pair->P}};
        j["pairing"]["Q"] = std::isfinite(pair->Q) ? Json(pair->Q) : Json("inf");
    }
    if (alpha)
        j["measure"] = {{"alpha", alpha->alpha}, {"q", alpha->q},         {"delta", alpha->delta},
                        {"rho", alpha->rho},     {"kappa", alpha->kappa}, {"shellExponent", alpha->sm_exponent}};
    if (lorentz) j["lorentz"] = {{"s", lorentz->s}, {"q", lorentz->q}};
    if (homogeneous)
        j["homogeneous"] = {{"D", homogeneous->D},
                            {"scaledExponent", homogeneous->scaled_exponent},
                            {"weakQ", homogeneous->weak_q}};
    return j;
}

}  // namespace rlab
