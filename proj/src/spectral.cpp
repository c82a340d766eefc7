#include "rlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

#include "rlab/errors.hpp"
#include "rlab/quadrature.hpp"

namespace rlab {

namespace {

constexpr double kPi = std::numbers::pi;

double sinc(double x) { return std::abs(x) < 1e-8 ? 1.0 - x * x / 6.0 : std::sin(x) / x; }

void require_square(const Matrix& m, std::size_t n, const char* what) {
    if (m.rows() != n || m.cols() != n) throw ValidationError(std::string(what) + ": matrix has the wrong shape");
}

Matrix symmetrize(const Matrix& m) {
    Matrix s = m;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j) s(i, j) = 0.5 * (m(i, j) + m(j, i));
    return s;
}

// Cholesky succeeds iff m is positive definite.
bool positive_definite(const Matrix& m) {
    const std::size_t n = m.rows();
    Matrix L(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double s = m(j, j);
        for (std::size_t k = 0; k < j; ++k) s -= L(j, k) * L(j, k);
        if (!(s > 0.0)) return false;
        L(j, j) = std::sqrt(s);
        for (std::size_t i = j + 1; i < n; ++i) {
            double t = m(i, j);
            for (std::size_t k = 0; k < j; ++k) t -= L(i, k) * L(j, k);
            L(i, j) = t / L(j, j);
        }
    }
    return true;
}

double quad_form(const Matrix& m, std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = 0; j < x.size(); ++j) s += x[i] * m(i, j) * x[j];
    return s;
}

bool is_diagonal(const Matrix& m) {
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (i != j && m(i, j) != 0.0) return false;
    return true;
}

}  // namespace

std::string to_string(TestFunction::Kind k) {
    switch (k) {
        case TestFunction::Kind::Gaussian: return "gaussian";
        case TestFunction::Kind::BoxBump: return "box-bump";
        case TestFunction::Kind::ModulatedGaussian: return "modulated-gaussian";
    }
    return "?";
}

TestFunction TestFunction::gaussian(Vec center, Matrix covariance, double amplitude) {
    const std::size_t n = center.size();
    if (n == 0) throw ValidationError("test function needs a nonempty center");
    require_square(covariance, n, "gaussian covariance");
    covariance = symmetrize(covariance);
    if (!positive_definite(covariance)) throw ValidationError("gaussian covariance must be positive definite");
    TestFunction g;
    g.kind_ = Kind::Gaussian;
    g.amplitude_ = amplitude;
    g.center_ = std::move(center);
    g.covariance_ = covariance;
    g.precision_ = inverse(covariance);
    g.sqrt_det_ = std::sqrt(determinant(covariance));
    g.omega_ = Vec(n, 0.0);
    return g;
}

TestFunction TestFunction::gaussian(Vec center, double sigma, double amplitude) {
    if (!(sigma > 0.0)) throw ValidationError("gaussian width must be positive");
    const std::size_t n = center.size();
    Matrix c = Matrix::identity(n);
    for (std::size_t i = 0; i < n; ++i) c(i, i) = sigma * sigma;
    return gaussian(std::move(center), c, amplitude);
}

TestFunction TestFunction::modulated_gaussian(Vec center, Matrix covariance, Vec omega, double amplitude) {
    if (omega.size() != center.size()) throw ValidationError("modulation has the wrong dimension");
    TestFunction g = gaussian(std::move(center), std::move(covariance), amplitude);
    g.kind_ = Kind::ModulatedGaussian;
    g.omega_ = std::move(omega);
    return g;
}

TestFunction TestFunction::box_bump(Vec center, Vec sides, double amplitude) {
    if (center.empty() || sides.size() != center.size())
        throw ValidationError("box bump needs matching center and sides");
    for (double L : sides)
        if (!(L > 0.0)) throw ValidationError("box bump sides must be positive");
    TestFunction g;
    g.kind_ = Kind::BoxBump;
    g.amplitude_ = amplitude;
    g.center_ = std::move(center);
    g.sides_ = std::move(sides);
    g.omega_ = Vec(g.center_.size(), 0.0);
    return g;
}

TestFunction TestFunction::from_json(const Json& j) {
    try {
        const std::string kind = j.at("kind").get<std::string>();
        const Vec center = j.at("center").get<Vec>();
        const double amp = j.value("amplitude", 1.0);
        const std::size_t n = center.size();
        auto covariance = [&] {
            if (j.contains("covariance")) {
                const auto rows = j.at("covariance").get<std::vector<Vec>>();
                if (rows.size() != n) throw ValidationError("covariance has the wrong number of rows");
                Matrix m(n, n);
                for (std::size_t r = 0; r < n; ++r) {
                    if (rows[r].size() != n) throw ValidationError("covariance row has the wrong length");
                    for (std::size_t c = 0; c < n; ++c) m(r, c) = rows[r][c];
                }
                return m;
            }
            const double s = j.value("sigma", 1.0);
            Matrix m = Matrix::identity(n);
            for (std::size_t i = 0; i < n; ++i) m(i, i) = s * s;
            return m;
        };
        if (kind == "gaussian") return gaussian(center, covariance(), amp);
        if (kind == "modulated-gaussian") return modulated_gaussian(center, covariance(), j.at("omega").get<Vec>(), amp);
        if (kind == "box-bump") return box_bump(center, j.at("sides").get<Vec>(), amp);
        throw ValidationError("unknown test function kind '" + kind + "'");
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("malformed test function: ") + e.what());
    }
}

Json TestFunction::to_json() const {
    Json j{{"kind", to_string(kind_)}, {"center", center_}, {"amplitude", amplitude_}};
    if (kind_ == Kind::BoxBump) {
        j["sides"] = sides_;
    } else {
        std::vector<Vec> rows(dim(), Vec(dim()));
        for (std::size_t r = 0; r < dim(); ++r)
            for (std::size_t c = 0; c < dim(); ++c) rows[r][c] = covariance_(r, c);
        j["covariance"] = rows;
        if (kind_ == Kind::ModulatedGaussian) j["omega"] = omega_;
    }
    return j;
}

cplx TestFunction::value(std::span<const double> x) const {
    if (x.size() != dim()) throw ValidationError("test function evaluated at a point of the wrong dimension");
    if (kind_ == Kind::BoxBump) {
        for (std::size_t i = 0; i < dim(); ++i)
            if (std::abs(x[i] - center_[i]) > 0.5 * sides_[i]) return 0.0;
        return amplitude_;
    }
    Vec y(x.begin(), x.end());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= center_[i];
    const double mag = amplitude_ * std::exp(-0.5 * quad_form(precision_, y));
    return mag * std::polar(1.0, 2.0 * kPi * dot(omega_, x));
}

cplx TestFunction::fourier(std::span<const double> xi) const {
    if (xi.size() != dim()) throw ValidationError("transform evaluated at a point of the wrong dimension");
    const std::size_t n = dim();
    Vec eta(xi.begin(), xi.end());
    for (std::size_t i = 0; i < n; ++i) eta[i] -= omega_[i];
    const cplx shift = std::polar(1.0, -2.0 * kPi * dot(center_, eta));
    if (kind_ == Kind::BoxBump) {
        double mag = amplitude_;
        for (std::size_t i = 0; i < n; ++i) mag *= sides_[i] * sinc(kPi * sides_[i] * eta[i]);
        return mag * shift;
    }
    const double mag = amplitude_ * std::pow(2.0 * kPi, 0.5 * n) * sqrt_det_ *
                       std::exp(-2.0 * kPi * kPi * quad_form(covariance_, eta));
    return mag * shift;
}

double TestFunction::lp_norm(double P) const {
    if (!(P > 0.0)) throw ValidationError("L^P norm needs P > 0");
    if (kind_ == Kind::BoxBump) {
        double vol = 1.0;
        for (double L : sides_) vol *= L;
        return std::abs(amplitude_) * std::pow(vol, 1.0 / P);
    }
    const double integral = std::pow(2.0 * kPi / P, 0.5 * dim()) * sqrt_det_;
    return std::abs(amplitude_) * std::pow(integral, 1.0 / P);
}

TestFunction TestFunction::linear_pullback(const Matrix& M) const {
    require_square(M, dim(), "pullback");
    const Matrix Minv = inverse(M);
    if (kind_ == Kind::BoxBump) {
        if (!is_diagonal(M)) throw CapabilityError("box bumps pull back only under diagonal maps");
        Vec c(dim()), L(dim());
        for (std::size_t i = 0; i < dim(); ++i) {
            c[i] = center_[i] / M(i, i);
            L[i] = sides_[i] / std::abs(M(i, i));
        }
        return box_bump(c, L, amplitude_);
    }
    // g(Mx): center M^-1 c, covariance M^-1 S M^-T, modulation M^T omega
    const Matrix cov = Minv * covariance_ * Minv.transpose();
    TestFunction g = gaussian(Minv * center_, cov, amplitude_);
    g.kind_ = kind_;
    g.omega_ = M.transpose() * omega_;
    return g;
}

double SampledFunction::lp_norm(double p) const {
    if (!(p > 0.0)) throw ValidationError("L^p norm needs p > 0");
    if (values.size() != t.size()) throw ValidationError("sampled function has no values");
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += weights[i] * std::pow(std::abs(values[i]), p);
    return std::pow(s, 1.0 / p);
}

SampledFunction gauss_grid(double a, double b, int panels, int order) {
    if (!(b > a) || panels < 1) throw ValidationError("gauss_grid needs a < b and panels >= 1");
    const auto& rule = gauss_legendre(order);
    SampledFunction g;
    const double w = (b - a) / panels;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * w, mid = lo + 0.5 * w;
        for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
            g.t.push_back(mid + 0.5 * w * rule.nodes[i]);
            g.weights.push_back(0.5 * w * rule.weights[i]);
        }
    }
    return g;
}

SampledFunction midpoint_grid(double a, double b, int n) {
    if (!(b > a) || n < 1) throw ValidationError("midpoint_grid needs a < b and n >= 1");
    SampledFunction g;
    const double w = (b - a) / n;
    for (int i = 0; i < n; ++i) {
        g.t.push_back(a + (i + 0.5) * w);
        g.weights.push_back(w);
    }
    return g;
}

SampledFunction with_affine_weight(SampledFunction grid, const AnyCurve& curve) {
    for (std::size_t i = 0; i < grid.t.size(); ++i) grid.weights[i] *= affine_weight(curve, grid.t[i]);
    return grid;
}

SampledFunction restrict(const TestFunction& g, const AnyCurve& curve, const SampledFunction& grid) {
    if (g.dim() != static_cast<std::size_t>(curve_dimension(curve)))
        throw ValidationError("test function and curve dimensions differ");
    SampledFunction out = grid;
    out.values.resize(grid.t.size());
    for (std::size_t i = 0; i < grid.t.size(); ++i) out.values[i] = g.fourier(evaluate_curve(curve, grid.t[i]));
    return out;
}

namespace {

bool outside_cutoff(std::span<const double> x, const ExtensionOptions& opts) {
    if (!opts.cutoff_center) return false;
    const Vec& c = *opts.cutoff_center;
    if (c.size() != x.size()) throw ValidationError("cutoff center has the wrong dimension");
    double r2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - c[i]) * (x[i] - c[i]);
    return r2 > 0.25;
}

void check_extension_args(const AnyCurve& curve, std::span<const double> x, const ExtensionOptions& opts) {
    if (x.size() != static_cast<std::size_t>(curve_dimension(curve)))
        throw ValidationError("extension point has the wrong dimension");
    if (!(opts.lambda >= 1.0)) throw ValidationError("extension needs lambda >= 1");
}

}  // namespace

cplx extension(const std::function<cplx(double)>& f, const AnyCurve& curve, std::span<const double> x,
               const ExtensionOptions& opts) {
    check_extension_args(curve, x, opts);
    if (outside_cutoff(x, opts)) return 0.0;
    const auto [a, b] = curve_domain(curve);
    const double xnorm = norm2(x);
    // phase speed bound lambda |x| sup |gamma'|, sampled
    double speed = 0.0;
    const int probes = 1024;
    for (int i = 0; i < probes; ++i) {
        const double t = a + (b - a) * (i + 0.5) / probes;
        speed = std::max(speed, norm2(evaluate_curve(curve, t, 1)));
    }
    const double variation = 1.25 * opts.lambda * xnorm * speed * (b - a);
    long panels = std::max<long>(8, static_cast<long>(std::ceil(variation / (0.5 * kPi))));
    const auto& rule = gauss_legendre(12);

    auto pass = [&](long n, double& abs_total) {
        cplx sum = 0.0;
        abs_total = 0.0;
        const double w = (b - a) / n;
        for (long p = 0; p < n; ++p) {
            const double mid = a + (p + 0.5) * w;
            for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
                const double t = mid + 0.5 * w * rule.nodes[i];
                const double wt = 0.5 * w * rule.weights[i] * (opts.weighted ? affine_weight(curve, t) : 1.0);
                const cplx ft = f(t);
                const double phase = opts.lambda * dot(x, evaluate_curve(curve, t));
                sum += wt * ft * std::polar(1.0, -phase);
                abs_total += wt * std::abs(ft);
            }
        }
        return sum;
    };

    double abs_total = 0.0;
    cplx prev = pass(panels, abs_total);
    while (true) {
        if (2 * panels > opts.max_panels)
            throw NumericalError("extension: panel budget exceeded; reduce lambda |x| (lambda |x| = " +
                                 std::to_string(opts.lambda * xnorm) + ")");
        panels *= 2;
        const cplx next = pass(panels, abs_total);
        if (std::abs(next - prev) <= opts.rel_tol * std::max(abs_total, 1e-300)) return next;
        prev = next;
    }
}

cplx extension(const SampledFunction& f, const AnyCurve& curve, std::span<const double> x,
               const ExtensionOptions& opts) {
    check_extension_args(curve, x, opts);
    if (f.values.size() != f.t.size()) throw ValidationError("sampled function has no values");
    if (outside_cutoff(x, opts)) return 0.0;
    cplx sum = 0.0;
    double last_phase = 0.0;
    for (std::size_t i = 0; i < f.t.size(); ++i) {
        const double t = f.t[i];
        const double phase = opts.lambda * dot(x, evaluate_curve(curve, t));
        if (i > 0 && std::abs(phase - last_phase) > 0.5 * kPi)
            throw NumericalError("extension: sample grid too coarse for the phase; refine it or reduce lambda |x|");
        last_phase = phase;
        const double wt = f.weights[i] * (opts.weighted ? affine_weight(curve, t) : 1.0);
        sum += wt * f.values[i] * std::polar(1.0, -phase);
    }
    return sum;
}

double lorentz_norm(const SampledFunction& fn, double q, double r) {
    if (!(q > 0.0) || !(r > 0.0)) throw ValidationError("Lorentz exponents must be positive");
    if (fn.values.size() != fn.t.size()) throw ValidationError("sampled function has no values");
    std::vector<std::size_t> idx(fn.t.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t i, std::size_t j) { return std::abs(fn.values[i]) > std::abs(fn.values[j]); });
    double W = 0.0, acc = 0.0;
    const bool weak = std::isinf(r);
    for (std::size_t i : idx) {
        if (!(fn.weights[i] > 0.0)) throw ValidationError("sampled measure has a nonpositive weight");
        const double v = std::abs(fn.values[i]);
        const double W1 = W + fn.weights[i];
        if (weak)
            acc = std::max(acc, v * std::pow(W1, 1.0 / q));
        else
            acc += std::pow(v, r) * (std::pow(W1, r / q) - std::pow(W, r / q));
        W = W1;
    }
    return weak ? acc : std::pow(acc, 1.0 / r);
}

CheckReport empirical_ratio(std::span<const NamedCurve> curves, std::span<const TestFunction> tests,
                            const RatioOptions& opts) {
    if (curves.empty() || tests.empty()) throw ValidationError("empirical_ratio needs curves and test functions");
    CheckReport r;
    r.check_id = "empirical_ratio";
    r.operation = "empirical_ratio";
    Json labels = Json::array();
    for (const auto& c : curves) labels.push_back(c.label);
    Json tj = Json::array();
    for (const auto& g : tests) tj.push_back(g.to_json());
    r.parameters = {{"P", opts.P},           {"Q", opts.Q},         {"weighted", opts.weighted},
                    {"panels", opts.panels}, {"order", opts.order}, {"curves", labels},
                    {"tests", tj}};
    r.note("exploratory: observed ratios only, not operator-norm bounds");
    Series all, family;
    all.columns = {"curve", "test", "ratio"};
    family.columns = {"curve", "maxRatio"};
    bool finite = true;
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < curves.size(); ++c) {
        const auto [a, b] = curve_domain(curves[c].curve);
        SampledFunction grid = gauss_grid(a, b, opts.panels, opts.order);
        if (opts.weighted) grid = with_affine_weight(std::move(grid), curves[c].curve);
        double best = 0.0;
        for (std::size_t k = 0; k < tests.size(); ++k) {
            const double num = restrict(tests[k], curves[c].curve, grid).lp_norm(opts.Q);
            const double ratio = num / tests[k].lp_norm(opts.P);
            finite &= std::isfinite(ratio);
            all.add({static_cast<double>(c), static_cast<double>(k), ratio});
            best = std::max(best, ratio);
        }
        family.add({static_cast<double>(c), best});
        hi = std::max(hi, best);
        lo = std::min(lo, best);
    }
    r.series["ratios"] = std::move(all);
    r.series["family"] = std::move(family);
    r.parameters["maxRatio"] = hi;
    r.parameters["minRatio"] = lo;
    r.estimate = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    r.set_pass(finite && std::isfinite(r.estimate));
    return r;
}

namespace {

double curve_lp(const std::function<double(double)>& integrand, double a, double b, double p, double abs_tol = 0.0) {
    QuadratureOptions q;
    q.rel_tol = 1e-13;
    q.abs_tol = abs_tol;
    Vec cuts(65);
    for (int i = 0; i <= 64; ++i) cuts[i] = a + (b - a) * i / 64.0;
    cuts.back() = b;
    const auto res = integrate_pieces([&](double t) { return std::pow(integrand(t), p); }, cuts, q);
    return std::pow(res.value, 1.0 / p);
}

}  // namespace

CheckReport dilation_sweep(const HomogeneousCurve& curve, const TestFunction& g, double P, double Q,
                           std::span<const double> factors, double drift_tol) {
    if (factors.empty()) throw ValidationError("dilation_sweep needs factors");
    if (g.dim() != static_cast<std::size_t>(curve.d())) throw ValidationError("test function and curve differ in dimension");
    CheckReport r;
    r.check_id = "dilation_sweep";
    r.operation = "dilation_sweep";
    r.parameters = {{"exponents", curve.exponents()}, {"P", P}, {"Q", Q}, {"factors", Vec(factors.begin(), factors.end())},
                    {"test", g.to_json()}};
    r.tolerance = drift_tol;
    r.note("exploratory: observed ratios only, not operator-norm bounds");
    r.note("numerator integrates over t > 0, where the dilation identity is exact");
    Series s;
    s.columns = {"factor", "numerator", "denominator", "ratio"};
    double hi = 0.0, lo = std::numeric_limits<double>::infinity();
    const HomogeneousCurve whole(curve.exponents(), 0.0, std::numeric_limits<double>::max(), curve.coefficients());
    for (double f : factors) {
        if (!(f > 0.0)) throw ValidationError("dilation factors must be positive");
        Matrix delta = Matrix::identity(curve.d());
        for (int i = 0; i < curve.d(); ++i) delta(i, i) = std::pow(f, curve.exponents()[i]);
        const TestFunction gf = g.linear_pullback(delta);
        auto mod = [&](double t) { return std::abs(gf.fourier(whole.gamma(t))); };
        // the identity lives on the half-line: extend by doubling until the
        // tail is negligible
        double sum = 0.0, lo_t = 0.0, hi_t = curve.b();
        for (int step = 0; step < 80; ++step) {
            const double piece = std::pow(curve_lp(mod, lo_t, hi_t, Q, 1e-14 * sum), Q);
            sum += piece;
            if (step > 0 && piece <= 1e-15 * sum) break;
            lo_t = hi_t;
            hi_t *= 2.0;
        }
        const double num = std::pow(sum, 1.0 / Q);
        const double den = gf.lp_norm(P);
        const double ratio = num / den;
        s.add({f, num, den, ratio});
        hi = std::max(hi, ratio);
        lo = std::min(lo, ratio);
    }
    r.series["dilation"] = std::move(s);
    r.estimate = hi / lo - 1.0;
    r.decide(r.estimate <= drift_tol, drift_tol);
    return r;
}

CheckReport homogeneous_rescale_check(const HomogeneousCurve& curve, int k, const TestFunction& g, double p,
                                      double tolerance) {
    if (k < 0) throw ValidationError("rescale check needs k >= 0");
    if (!(p > 0.0)) throw ValidationError("rescale check needs p > 0");
    if (g.dim() != static_cast<std::size_t>(curve.d())) throw ValidationError("test function and curve differ in dimension");
    if (curve.a() > 0.0 || curve.b() < 1.0) throw DomainError("rescale check needs the curve on [0, 1]");
    const int d = curve.d();
    Vec dk(d);
    for (int i = 0; i < d; ++i) dk[i] = std::pow(2.0, -k * curve.exponents()[i]);
    auto ghat_k = [&](double s) {
        Vec xi = curve.gamma(s);
        for (int i = 0; i < d; ++i) xi[i] *= dk[i];
        return g.fourier(xi);
    };
    const double scale = std::ldexp(1.0, -k);

    CheckReport r;
    r.check_id = "homogeneous_rescale";
    r.operation = "homogeneous_rescale_check";
    r.parameters = {{"exponents", curve.exponents()}, {"k", k}, {"p", p}, {"test", g.to_json()}};
    r.tolerance = tolerance;

    double pointwise = 0.0, peak = 0.0;
    for (int i = 0; i <= 256; ++i) {
        const double s = 0.5 + 0.5 * i / 256.0;
        const cplx lhs = g.fourier(curve.gamma(scale * s));
        pointwise = std::max(pointwise, std::abs(lhs - ghat_k(s)));
        peak = std::max(peak, std::abs(lhs));
    }
    pointwise /= std::max(peak, 1e-300);

    const double lhs = curve_lp([&](double t) { return std::abs(g.fourier(curve.gamma(t))); }, 0.5 * scale, scale, p);
    const double rhs = std::pow(scale, 1.0 / p) * curve_lp([&](double s) { return std::abs(ghat_k(s)); }, 0.5, 1.0, p);
    const double norm_err = std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300);

    r.witnesses.push_back({{"lhs", lhs}, {"rhs", rhs}, {"pointwiseResidual", pointwise}, {"normResidual", norm_err}});
    r.estimate = std::max(pointwise, norm_err);
    r.decide(r.estimate <= tolerance, tolerance);
    return r;
}

double lattice_lp_norm(const std::function<cplx(std::span<const double>)>& g, std::span<const double> lo,
                       std::span<const double> hi, int n, double P) {
    const std::size_t d = lo.size();
    if (hi.size() != d || d == 0 || n < 1) throw ValidationError("lattice needs matching bounds and n >= 1");
    Vec h(d), x(d);
    double cell = 1.0;
    for (std::size_t i = 0; i < d; ++i) {
        h[i] = (hi[i] - lo[i]) / n;
        cell *= h[i];
    }
    std::vector<int> idx(d, 0);
    double sum = 0.0;
    while (true) {
        for (std::size_t i = 0; i < d; ++i) x[i] = lo[i] + (idx[i] + 0.5) * h[i];
        sum += std::pow(std::abs(g(x)), P);
        std::size_t i = 0;
        while (i < d && ++idx[i] == n) idx[i++] = 0;
        if (i == d) break;
    }
    return std::pow(sum * cell, 1.0 / P);
}

namespace {

struct LatticeBox {
    Vec lo, hi;
    int n;
};

// Box and resolution for a Gaussian |.|^P with precision `prec` centered at c.
LatticeBox gaussian_lattice(const Matrix& prec, std::span<const double> c) {
    const std::size_t d = c.size();
    const Matrix cov = inverse(prec);
    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += prec(i, i);
    const double h = 0.8 / std::sqrt(trace);
    LatticeBox b{Vec(d), Vec(d), 1};
    double widest = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        const double half = 10.0 * std::sqrt(cov(i, i));
        b.lo[i] = c[i] - half;
        b.hi[i] = c[i] + half;
        widest = std::max(widest, 2.0 * half);
    }
    b.n = static_cast<int>(std::ceil(widest / h));
    if (std::pow(static_cast<double>(b.n), static_cast<double>(d)) > 3e7)
        throw NumericalError("converse lattice too large; the parallelepiped is too elongated");
    return b;
}

}  // namespace

CheckReport converse_scaling_check(const Parallelepiped& E, const TestFunction& f, double P, double Q,
                                   const ConverseOptions& opts) {
    const std::size_t d = E.dim();
    if (f.dim() != d) throw ValidationError("test function and parallelepiped differ in dimension");
    if (!(P > 1.0) || !(Q > 0.0)) throw ValidationError("converse check needs P > 1 and Q > 0");
    const double inv_pp = 1.0 - 1.0 / P;
    if (std::abs(inv_pp - opts.alpha / Q) > 1e-12)
        throw ValidationError("converse check requires 1/P' = alpha/Q");
    if (f.kind() == TestFunction::Kind::BoxBump)
        throw CapabilityError("converse lattice norms need a Gaussian-based f");

    const Matrix& M = E.edge_matrix();
    const double detM = std::abs(determinant(M));
    const Matrix Mt = M.transpose();
    const Vec& base = E.base();

    // g(y) = |det M| e^(2 pi i <base, y>) fhat(-M^T y)
    auto g = [&](std::span<const double> y) {
        Vec eta = Mt * y;
        for (double& v : eta) v = -v;
        return detM * std::polar(1.0, 2.0 * kPi * dot(base, y)) * f.fourier(eta);
    };
    auto fhat = [&](std::span<const double> eta) { return f.fourier(eta); };

    Matrix prec_eta = f.covariance();
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) prec_eta(i, j) *= 4.0 * kPi * kPi * P;
    const Matrix prec_y = M * prec_eta * Mt;
    Vec y0 = inverse(Mt) * f.omega();
    for (double& v : y0) v = -v;

    const LatticeBox by = gaussian_lattice(prec_y, y0);
    const LatticeBox be = gaussian_lattice(prec_eta, f.omega());
    const double lhs = lattice_lp_norm(g, by.lo, by.hi, by.n, P);
    const double fhat_norm = lattice_lp_norm(fhat, be.lo, be.hi, be.n, P);
    const double rhs = std::pow(E.measure(), inv_pp) * fhat_norm;
    const double err = std::abs(lhs - rhs) / rhs;

    CheckReport r;
    r.check_id = "converse_scaling";
    r.operation = "converse_scaling_check";
    r.parameters = {{"d", d}, {"P", P}, {"Q", Q}, {"alpha", opts.alpha}, {"E", E.to_json()}, {"f", f.to_json()},
                    {"latticeY", by.n}, {"latticeEta", be.n}};
    r.tolerance = opts.tolerance;
    r.witnesses.push_back({{"gNorm", lhs}, {"scaledFhatNorm", rhs}, {"measure", E.measure()}});
    bool ok = err <= opts.tolerance;

    if (opts.curve) {
        if (static_cast<std::size_t>(curve_dimension(*opts.curve)) != d)
            throw ValidationError("converse curve has the wrong dimension");
        // ghat = f o T^-1 is >= 1 on E iff |f| >= 1 on the cube; log|f| is
        // concave, so the cube corners decide.
        double fmin = std::numeric_limits<double>::infinity();
        for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
            Vec corner(d);
            for (std::size_t i = 0; i < d; ++i) corner[i] = (mask >> i) & 1u ? 1.0 : 0.0;
            fmin = std::min(fmin, std::abs(f.value(corner)));
        }
        if (fmin >= 1.0) {
            const Matrix Minv = inverse(M);
            const auto [a, b] = curve_domain(*opts.curve);
            auto ghat_on_curve = [&](double t) {
                Vec x = evaluate_curve(*opts.curve, t);
                for (std::size_t i = 0; i < d; ++i) x[i] -= base[i];
                return std::abs(f.value(Minv * x));
            };
            const double norm = curve_lp(ghat_on_curve, a, b, Q);
            const double lam = lambda_measure(*opts.curve, E);
            const bool mono = std::pow(lam, 1.0 / Q) <= norm * (1.0 + 1e-9);
            r.witnesses.push_back({{"lambda", lam}, {"restrictedNorm", norm}, {"monotone", mono}});
            ok &= mono;
        } else {
            r.note("ghat < 1 somewhere on E; monotonicity step skipped");
        }
    }
    r.estimate = err;
    r.decide(ok, opts.tolerance);
    return r;
}

}  // namespace rlab
