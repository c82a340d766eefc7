#include "rlab/vandermonde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rlab/curve.hpp"
#include "rlab/errors.hpp"
#include "rlab/sampling.hpp"

namespace rlab {

double vandermonde(std::span<const double> x) {
    double p = 1.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) p *= (x[j] - x[i]);
    return p;
}

GapVector::GapVector(Vec h) : h_(std::move(h)), v_(0.0) {
    if (h_.empty()) throw ValidationError("gap vector needs at least one entry");
    for (double x : h_)
        if (!(x >= 0.0) || !std::isfinite(x)) throw ValidationError("gap entries must be finite and >= 0");
    kappa_.assign(h_.size() + 1, 0.0);
    for (std::size_t j = 0; j < h_.size(); ++j) kappa_[j + 1] = kappa_[j] + h_[j];
    v_ = vandermonde(kappa_);
}

double GapVector::mean_offset() const {
    return std::accumulate(kappa_.begin(), kappa_.end(), 0.0) / static_cast<double>(kappa_.size());
}

KappaV kappa_v(const GapVector& h) { return {h.kappa(), h.v()}; }

namespace {

double psi_rec(int d, double t, std::span<const double> h) {
    double total = 0.0;
    for (double x : h) total += x;
    if (t < 0.0 || t >= total) return 0.0;
    if (d == 2) return 1.0;
    if (d == 3) return std::min(h[0], t) * (h[0] + h[1] - std::max(h[0], t));

    // kappa_1..kappa_d
    Vec kappa(d, 0.0);
    for (int j = 1; j < d; ++j) kappa[j] = kappa[j - 1] + h[j - 1];
    const int dims = d - 1;
    // Region: sigma_1 in [0, min(h1, t)], sigma_j in [kappa_j, kappa_{j+1}],
    // sigma_{d-1} in [max(kappa_{d-1}, t), kappa_d]; each axis split at t.
    std::vector<std::vector<double>> cuts(dims);
    for (int j = 0; j < dims; ++j) {
        double lo = kappa[j], hi = kappa[j + 1];
        if (j == 0) hi = std::min(hi, t);
        if (j == dims - 1) lo = std::max(lo, t);
        clip_cuts(lo, hi, std::span<const double>(&t, 1), cuts[j]);
        if (cuts[j].size() < 2) return 0.0;
    }
    const auto& rule = gauss_legendre(d);
    const std::size_t n = rule.nodes.size();
    // Tensor product over all pieces, odometer style.
    std::vector<std::vector<double>> nodes(dims), weights(dims);
    for (int j = 0; j < dims; ++j) {
        for (std::size_t p = 0; p + 1 < cuts[j].size(); ++p) {
            const double a = cuts[j][p], b = cuts[j][p + 1];
            const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
            for (std::size_t i = 0; i < n; ++i) {
                nodes[j].push_back(mid + half * rule.nodes[i]);
                weights[j].push_back(half * rule.weights[i]);
            }
        }
    }
    std::vector<std::size_t> idx(dims, 0);
    Vec sigma(dims), gaps(dims - 1);
    double sum = 0.0;
    while (true) {
        double w = 1.0;
        for (int j = 0; j < dims; ++j) {
            sigma[j] = nodes[j][idx[j]];
            w *= weights[j][idx[j]];
        }
        for (int j = 0; j + 1 < dims; ++j) gaps[j] = sigma[j + 1] - sigma[j];
        sum += w * psi_rec(d - 1, t - sigma[0], gaps);
        int j = dims - 1;
        while (j >= 0 && ++idx[j] == nodes[j].size()) idx[j--] = 0;
        if (j < 0) break;
    }
    return sum;
}

}  // namespace

double psi(int d, double t, std::span<const double> h) {
    if (d < 2 || d > kMaxPsiOrder)
        throw CapabilityError("psi supports 2 <= d <= " + std::to_string(kMaxPsiOrder));
    if (static_cast<int>(h.size()) != d - 1) throw ValidationError("psi: gap vector must have length d-1");
    for (double x : h)
        if (!(x >= 0.0)) throw ValidationError("psi: gaps must be >= 0");
    return psi_rec(d, t, h);
}

PsiKernel::PsiKernel(GapVector h) : h_(std::move(h)) {
    if (h_.d() > kMaxPsiOrder) throw CapabilityError("psi kernel order too large");
}

double PsiKernel::operator()(double t) {
    if (t < 0.0 || t >= h_.total()) return 0.0;
    auto it = cache_.find(t);
    if (it != cache_.end()) return it->second;
    const double v = psi_rec(h_.d(), t, h_.h());
    cache_.emplace(t, v);
    return v;
}

double PsiKernel::integral(double lo, double hi) {
    lo = std::max(lo, 0.0);
    hi = std::min(hi, h_.total());
    if (!(hi > lo)) return 0.0;
    std::vector<double> cuts;
    clip_cuts(lo, hi, h_.kappa(), cuts);
    // piecewise polynomial of degree d-2 between consecutive kappa_j
    return integrate_fixed([this](double t) { return (*this)(t); }, cuts, std::max(2, h_.d()));
}

double psi_tail_ratio(const GapVector& h) {
    if (h.v() == 0.0) return std::numeric_limits<double>::quiet_NaN();
    const double g = h.mean_offset();
    if (h.d() == 2) return (h.total() - g) / h.v();
    PsiKernel k(h);
    return k.integral(g, h.total()) / h.v();
}

CheckReport check_psi_lower_bound(int d, std::span<const PsiSample> samples, double degenerate_v) {
    CheckReport r;
    r.check_id = "psi_lower_bound";
    r.operation = "check_psi_lower_bound";
    r.parameters = {{"d", d}, {"samples", samples.size()}};
    r.tolerance = 0.0;
    double inf = std::numeric_limits<double>::infinity();
    std::size_t skipped = 0, used = 0;
    const PsiSample* arg = nullptr;
    Series s;
    s.columns = {"sample", "ratio"};
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (static_cast<int>(samples[i].h.size()) != d - 1)
            throw ValidationError("psi sample gap vector must have length d-1");
        GapVector h(samples[i].h);
        if (h.v() <= degenerate_v) {
            ++skipped;
            continue;
        }
        const double ratio = psi_tail_ratio(h);
        ++used;
        s.add({static_cast<double>(i), ratio});
        if (ratio < inf) inf = ratio, arg = &samples[i];
    }
    r.series["ratios"] = std::move(s);
    r.parameters["degenerateSkipped"] = skipped;
    if (used == 0) {
        r.status = CheckStatus::Inconclusive;
        r.estimate = std::numeric_limits<double>::quiet_NaN();
        r.note("all samples degenerate");
        return r;
    }
    r.estimate = inf;
    r.witnesses.push_back({{"t", arg->t}, {"h", arg->h}, {"ratio", inf}});
    r.decide(inf > 0.0, 0.0);
    if (skipped) r.note(std::to_string(skipped) + " degenerate samples skipped");
    return r;
}

CheckReport psi_lower_bound_sweep(int d, const PsiSweepOptions& opts) {
    if (d < 2 || d > kMaxPsiOrder) throw CapabilityError("psi sweep: unsupported d");
    Rng rng(opts.seed);
    const Vec lo(d - 1, opts.h_lo), hi(d - 1, opts.h_hi);
    auto pts = latin_hypercube(opts.samples, lo, hi, rng);
    std::vector<PsiSample> samples;
    samples.reserve(pts.size() + 1);
    for (auto& p : pts) samples.push_back({0.0, std::move(p)});
    if (opts.refine && d > 2 && !samples.empty()) {
        std::size_t best = 0;
        double best_v = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < samples.size(); ++i) {
            const double v = psi_tail_ratio(GapVector(samples[i].h));
            if (v < best_v) best_v = v, best = i;
        }
        auto res = compass_minimize(
            [](std::span<const double> x) {
                GapVector g(Vec(x.begin(), x.end()));
                return g.v() > 0 ? psi_tail_ratio(g) : std::numeric_limits<double>::infinity();
            },
            samples[best].h, lo, hi, 0.05, 1e-4, 400);
        samples.push_back({0.0, res.x});
    }
    auto r = check_psi_lower_bound(d, samples);
    r.parameters["seed"] = opts.seed;
    r.parameters["box"] = {opts.h_lo, opts.h_hi};
    r.parameters["refine"] = opts.refine;
    return r;
}

CheckReport check_vandermonde_integration(int n, std::span<const double> s, const QuadratureOptions& q) {
    if (n < 2 || static_cast<int>(s.size()) != n) throw ValidationError("vandermonde integration: need n >= 2 nodes");
    for (int i = 1; i < n; ++i)
        if (!(s[i] > s[i - 1])) throw ValidationError("vandermonde integration: nodes must increase strictly");
    CheckReport r;
    r.check_id = "vandermonde_integration";
    r.operation = "check_vandermonde_integration";
    r.parameters = {{"n", n}, {"s", Vec(s.begin(), s.end())}};
    r.tolerance = std::max(q.rel_tol, 1e-7);
    const double lhs = vandermonde(s);
    const Vec lo(s.begin(), s.end() - 1), hi(s.begin() + 1, s.end());
    const auto integral = integrate_box([](std::span<const double> x) { return vandermonde(x); }, lo, hi,
                                        IteratedMode::Adaptive, q);
    const double rhs = factorial(n - 1) * integral.value;
    const double rel = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);
    r.estimate = rel;
    r.witnesses.push_back({{"lhs", lhs}, {"rhs", rhs}});
    r.decide(rel <= r.tolerance, r.tolerance);
    return r;
}

CheckReport check_tail_inequalities(int n, std::span<const double> t, double delta, double floor,
                                    const QuadratureOptions& q) {
    if (n < 3) throw ValidationError("tail inequalities need n >= 3 (n = 2 is degenerate)");
    if (static_cast<int>(t.size()) != n) throw ValidationError("tail inequalities: need n nodes");
    for (int i = 1; i < n; ++i)
        if (!(t[i] > t[i - 1])) throw ValidationError("tail inequalities: nodes must increase strictly");
    if (!(delta > 0.0)) throw ValidationError("tail inequalities: delta must be positive");
    CheckReport r;
    r.check_id = "tail_inequalities";
    r.operation = "check_tail_inequalities";
    r.parameters = {{"n", n}, {"t", Vec(t.begin(), t.end())}, {"delta", delta}, {"floor", floor}};
    r.tolerance = floor;
    const Vec lo(t.begin(), t.end() - 1), hi(t.begin() + 1, t.end());
    const double vn = vandermonde(t);
    const double spread = t[n - 1] - t[0];

    const auto lhs9 = integrate_box(
        [delta](std::span<const double> u) {
            return vandermonde(u) * std::pow(u.back() - u.front(), delta);
        },
        lo, hi, IteratedMode::Adaptive, q);
    const double ratio9 = lhs9.value / (vn * std::pow(spread, delta));

    const double tmean = std::accumulate(t.begin(), t.end(), 0.0) / n;
    const int m = n - 1;
    LimitsFn limits = [&](std::size_t level, std::span<const double> outer, std::vector<double>& cuts) {
        double a = lo[level];
        const double b = hi[level];
        if (static_cast<int>(level) == m - 1) {
            // mean(u) >= mean(t) becomes a lower limit on the last coordinate
            const double rest = std::accumulate(outer.begin(), outer.end(), 0.0);
            a = std::max(a, m * tmean - rest);
        }
        clip_cuts(a, b, {}, cuts);
    };
    const auto lhsU = integrate_iterated([](std::span<const double> u) { return vandermonde(u); },
                                         static_cast<std::size_t>(m), limits, IteratedMode::Adaptive, q);
    const double ratioU = lhsU.value / vn;

    Series s;
    s.columns = {"inequality", "ratio"};
    s.add({9.0, ratio9});
    s.add({1.0, ratioU});
    r.series["ratios"] = std::move(s);
    r.witnesses.push_back({{"tailRatio", ratio9}, {"meanRestrictedRatio", ratioU}});
    r.estimate = std::min(ratio9, ratioU);
    r.decide(ratio9 >= floor && ratioU >= floor, floor);
    if (!lhs9.converged || !lhsU.converged) r.note("quadrature did not reach its tolerance");
    return r;
}

double LinFactor::operator()(std::span<const double> t) const {
    switch (kind) {
        case Kind::Difference: return t[k] - t[j];
        case Kind::Upper: return c - t[j];
        case Kind::Lower: return t[j] - c;
    }
    return 0.0;
}

void validate(const LinInstance& inst) {
    const std::size_t n = inst.a.size();
    if (n == 0) throw ValidationError("lin lemma: no intervals");
    if (inst.b.size() != n || inst.lambda.size() != n)
        throw ValidationError("lin lemma: a, b, lambda must have equal length");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(inst.a[j] < inst.b[j])) throw ValidationError("lin lemma: need a_j < b_j");
        if (j > 0 && !(inst.b[j - 1] <= inst.a[j])) throw ValidationError("lin lemma: need b_{j-1} <= a_j");
        if (!(inst.lambda[j] > 0.0 && inst.lambda[j] < 1.0)) throw ValidationError("lin lemma: lambda_j in (0,1)");
    }
    for (const auto& f : inst.factors) {
        if (f.j < 0 || f.j >= static_cast<int>(n)) throw ValidationError("lin lemma: factor index out of range");
        switch (f.kind) {
            case LinFactor::Kind::Difference:
                if (!(f.k > f.j && f.k < static_cast<int>(n)))
                    throw ValidationError("lin lemma: difference factor needs j < k <= N");
                break;
            case LinFactor::Kind::Upper:
                if (!(f.c >= inst.b[f.j])) throw ValidationError("lin lemma: upper factor needs c >= b_j");
                break;
            case LinFactor::Kind::Lower:
                if (!(f.c <= inst.a[f.j])) throw ValidationError("lin lemma: lower factor needs c <= a_j");
                break;
        }
    }
}

LinInstance lin_instance_from_json(const Json& j) {
    LinInstance inst;
    try {
        inst.a = j.at("a").get<Vec>();
        inst.b = j.at("b").get<Vec>();
        inst.lambda = j.at("lambda").get<Vec>();
        for (const auto& f : j.value("factors", Json::array())) {
            LinFactor lf;
            const auto kind = f.at("kind").get<std::string>();
            lf.j = f.at("j").get<int>();
            if (kind == "difference") {
                lf.kind = LinFactor::Kind::Difference;
                lf.k = f.at("k").get<int>();
            } else if (kind == "upper") {
                lf.kind = LinFactor::Kind::Upper;
                lf.c = f.at("c").get<double>();
            } else if (kind == "lower") {
                lf.kind = LinFactor::Kind::Lower;
                lf.c = f.at("c").get<double>();
            } else {
                throw ValidationError("lin lemma: unknown factor kind '" + kind + "'");
            }
            inst.factors.push_back(lf);
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("lin lemma: malformed instance: ") + e.what());
    }
    validate(inst);
    return inst;
}

CheckReport check_lin_lemma(const LinInstance& inst, const QuadratureOptions& q) {
    validate(inst);
    CheckReport r;
    r.check_id = "lin_lemma";
    r.operation = "check_lin_lemma";
    r.parameters = {{"N", inst.a.size()}, {"M", inst.factors.size()}, {"a", inst.a}, {"b", inst.b},
                    {"lambda", inst.lambda}};
    const auto product = [&inst](std::span<const double> t) {
        double p = 1.0;
        for (const auto& f : inst.factors) p *= f(t);
        return p;
    };
    Vec shrunk(inst.a.size());
    for (std::size_t j = 0; j < shrunk.size(); ++j)
        shrunk[j] = (1.0 - inst.lambda[j]) * inst.a[j] + inst.lambda[j] * inst.b[j];
    const auto full = integrate_box(product, inst.a, inst.b, IteratedMode::Adaptive, q);
    const auto part = integrate_box(product, shrunk, inst.b, IteratedMode::Adaptive, q);
    const double ratio = part.value / full.value;
    r.estimate = ratio;
    r.witnesses.push_back({{"restricted", part.value}, {"full", full.value}});
    r.decide(ratio > 0.0, 0.0);
    return r;
}

}  // namespace rlab
