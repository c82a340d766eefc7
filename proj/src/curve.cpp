#include "rlab/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rlab/errors.hpp"

namespace rlab {

double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

double falling_factorial(double x, int k) {
    double f = 1.0;
    for (int i = 0; i < k; ++i) f *= (x - i);
    return f;
}

DerivativeOracle::DerivativeOracle(double a, double b, int max_order, Eval eval, std::string label)
    : a_(a), b_(b), max_order_(max_order), eval_(std::move(eval)), label_(std::move(label)) {
    if (!(b > a)) throw ValidationError("oracle domain must satisfy a < b");
    if (max_order < 0) throw ValidationError("oracle max order must be nonnegative");
    if (!eval_) throw ValidationError("oracle has no evaluator");
}

double DerivativeOracle::operator()(double t, int k) const {
    if (!(t >= a_ && t <= b_)) {
        std::ostringstream os;
        os << "t = " << t << " outside [" << a_ << ", " << b_ << "]";
        throw DomainError(os.str());
    }
    return unchecked(t, k);
}

double DerivativeOracle::unchecked(double t, int k) const {
    if (k < 0 || k > max_order_)
        throw CapabilityError("derivative order " + std::to_string(k) + " exceeds oracle max order " +
                              std::to_string(max_order_));
    return eval_(t, k);
}

SimpleCurve::SimpleCurve(int d, DerivativeOracle phi, CurveOptions options)
    : d_(d), phi_(std::move(phi)), options_(options) {
    if (d < 2) throw ValidationError("simple curve needs d >= 2");
    if (d > kDefaultMaxDimension && !options_.allow_large_d)
        throw CapabilityError("d = " + std::to_string(d) + " exceeds " +
                              std::to_string(kDefaultMaxDimension) + " without the large-d override");
    if (phi_.max_order() < d) throw ValidationError("oracle max order must be at least d");
    if (phi_.a() < 0.0) throw ValidationError("simple curve domain must satisfy 0 <= a");
}

double SimpleCurve::clamp(double t) const {
    const double a = phi_.a(), b = phi_.b();
    const double slack = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b));
    if (!(t >= a - slack && t <= b + slack)) {
        std::ostringstream os;
        os << "t = " << t << " outside the curve domain (" << a << ", " << b << ")";
        throw DomainError(os.str());
    }
    const double eps = options_.eps_rel * (b - a);
    return std::clamp(t, a + eps, b - eps);
}

HomogeneousCurve::HomogeneousCurve(Vec exponents, double a, double b, Vec coefficients)
    : exponents_(std::move(exponents)), coefficients_(std::move(coefficients)), a_(a), b_(b), dimension_(0.0) {
    if (exponents_.size() < 2) throw ValidationError("homogeneous curve needs at least two exponents");
    if (coefficients_.empty()) coefficients_.assign(exponents_.size(), 1.0);
    if (coefficients_.size() != exponents_.size())
        throw ValidationError("homogeneous curve coefficients and exponents differ in length");
    for (std::size_t i = 0; i < exponents_.size(); ++i) {
        if (exponents_[i] == 0.0) throw ValidationError("homogeneous exponents must be nonzero");
        if (i > 0 && !(exponents_[i] > exponents_[i - 1]))
            throw ValidationError("homogeneous exponents must be strictly increasing");
        dimension_ += exponents_[i];
    }
    if (!(a >= 0.0 && b > a)) throw ValidationError("homogeneous curve domain must satisfy 0 <= a < b");
}

Vec HomogeneousCurve::gamma(double t, int k) const {
    if (!(t > 0.0 && t >= a_ && t <= b_)) throw DomainError("homogeneous curve evaluated outside (a, b]");
    Vec g(exponents_.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double ff = falling_factorial(exponents_[i], k);
        g[i] = ff == 0.0 ? 0.0 : coefficients_[i] * ff * std::pow(t, exponents_[i] - k);
    }
    return g;
}

Vec evaluate_curve(const SimpleCurve& curve, double t, int k) {
    if (k < 0) throw CapabilityError("negative derivative order");
    if (k > curve.oracle().max_order())
        throw CapabilityError("derivative order exceeds oracle max order");
    const double s = curve.clamp(t);
    const int d = curve.d();
    Vec g(d, 0.0);
    for (int i = 1; i < d; ++i)
        if (i >= k) g[i - 1] = std::pow(s, i - k) / factorial(i - k);
    g[d - 1] = curve.oracle()(s, k);
    return g;
}

Vec evaluate_curve(const AnyCurve& curve, double t, int k) {
    return std::visit(
        [&](const auto& c) -> Vec {
            if constexpr (std::is_same_v<std::decay_t<decltype(c)>, SimpleCurve>)
                return evaluate_curve(c, t, k);
            else
                return c.gamma(t, k);
        },
        curve);
}

double affine_weight(const SimpleCurve& curve, double t) {
    const int d = curve.d();
    return std::pow(std::abs(curve.phi(t, d)), 2.0 / (d * (d + 1.0)));
}

double affine_weight(const HomogeneousCurve& curve, double t) {
    const int d = curve.d();
    std::vector<Vec> cols;
    for (int k = 1; k <= d; ++k) cols.push_back(curve.gamma(t, k));
    return std::pow(std::abs(determinant(Matrix::from_columns(cols))), 2.0 / (d * (d + 1.0)));
}

double affine_weight(const AnyCurve& curve, double t) {
    return std::visit([&](const auto& c) { return affine_weight(c, t); }, curve);
}

int curve_dimension(const AnyCurve& curve) {
    return std::visit([](const auto& c) { return c.d(); }, curve);
}

std::pair<double, double> curve_domain(const AnyCurve& curve) {
    return std::visit([](const auto& c) { return std::pair{c.a(), c.b()}; }, curve);
}

SimpleCurve normalize_domain(const SimpleCurve& curve) {
    const double b = curve.b();
    if (!std::isfinite(b)) throw CapabilityError("normalize_domain: infinite right endpoint unsupported");
    if (b == 1.0) return curve;
    const DerivativeOracle base = curve.oracle();
    DerivativeOracle scaled(
        curve.a() / b, 1.0, base.max_order(),
        [base, b](double t, int k) { return std::pow(b, k) * base.unchecked(b * t, k); },
        base.label() + " normalized");
    return SimpleCurve(curve.d(), std::move(scaled), curve.options());
}

CheckReport validate_monotone(const SimpleCurve& curve, int grid_size, double tolerance) {
    if (grid_size < 2) throw ValidationError("validate_monotone needs grid_size >= 2");
    CheckReport r;
    r.check_id = "validate_monotone";
    r.operation = "validate_monotone";
    r.parameters = {{"d", curve.d()}, {"gridSize", grid_size}, {"domain", {curve.a(), curve.b()}}};
    r.tolerance = tolerance;
    const double lo = curve.clamp(curve.a()), hi = curve.clamp(curve.b());
    Series s;
    s.columns = {"k", "minValue", "minIncrement"};
    double worst = std::numeric_limits<double>::infinity();
    bool ok = true;
    for (int k = 1; k <= curve.d(); ++k) {
        double min_v = std::numeric_limits<double>::infinity(), min_dv = min_v, scale = 0.0;
        double prev = 0.0, t_v = lo, t_dv = lo;
        for (int i = 0; i < grid_size; ++i) {
            const double t = lo + (hi - lo) * i / (grid_size - 1);
            const double v = curve.phi(t, k);
            scale = std::max(scale, std::abs(v));
            if (v < min_v) min_v = v, t_v = t;
            if (i > 0 && v - prev < min_dv) min_dv = v - prev, t_dv = t;
            prev = v;
        }
        const double allow = -tolerance * (1.0 + scale);
        if (min_v < allow) {
            ok = false;
            r.witnesses.push_back({{"k", k}, {"t", t_v}, {"kind", "negative"}, {"value", min_v}});
        }
        if (min_dv < allow) {
            ok = false;
            r.witnesses.push_back({{"k", k}, {"t", t_dv}, {"kind", "decreasing"}, {"increment", min_dv}});
        }
        worst = std::min({worst, min_v, min_dv});
        s.add({static_cast<double>(k), min_v, min_dv});
    }
    r.estimate = worst;
    r.decide(ok, 0.0);
    r.series["monotone"] = std::move(s);
    return r;
}

CheckReport validate_oracle(const DerivativeOracle& oracle, int samples, double rel_tol) {
    CheckReport r;
    r.check_id = "validate_oracle";
    r.operation = "validate_oracle";
    r.parameters = {{"label", oracle.label()}, {"samples", samples}, {"maxOrder", oracle.max_order()}};
    r.tolerance = rel_tol;
    const double a = oracle.a(), b = oracle.b(), w = b - a;
    double worst = 0.0;
    bool ok = true;
    for (int k = 1; k <= oracle.max_order(); ++k) {
        std::vector<double> exact(samples), approx(samples), ts(samples);
        double scale = 0.0;
        for (int i = 0; i < samples; ++i) {
            const double t = a + w * (i + 1.0) / (samples + 1.0);
            const double h = std::min(1e-3 * w, (std::min(t - a, b - t)) / 3.0);
            const double f2 = oracle(t + 2 * h, k - 1), f1 = oracle(t + h, k - 1);
            const double g1 = oracle(t - h, k - 1), g2 = oracle(t - 2 * h, k - 1);
            ts[i] = t;
            approx[i] = (-f2 + 8 * f1 - 8 * g1 + g2) / (12 * h);
            exact[i] = oracle(t, k);
            scale = std::max(scale, std::abs(exact[i]));
        }
        for (int i = 0; i < samples; ++i) {
            const double err = std::abs(approx[i] - exact[i]) / (std::abs(exact[i]) + 1e-6 * scale + 1e-300);
            worst = std::max(worst, err);
            if (err > rel_tol) {
                ok = false;
                r.witnesses.push_back({{"k", k}, {"t", ts[i]}, {"exact", exact[i]}, {"finiteDifference", approx[i]}});
            }
        }
    }
    r.estimate = worst;
    r.decide(ok, rel_tol);
    return r;
}

DerivativeOracle monomial_oracle(double beta, double a, double b, double coefficient) {
    std::ostringstream label;
    label << "monomial t^" << beta;
    return DerivativeOracle(
        a, b, 16,
        [beta, coefficient](double t, int k) {
            const double ff = falling_factorial(beta, k);
            if (ff == 0.0) return 0.0;
            return coefficient * ff * std::pow(t, beta - k);
        },
        label.str());
}

DerivativeOracle polynomial_oracle(Vec coeffs, double a, double b) {
    if (coeffs.empty()) coeffs = {0.0};
    return DerivativeOracle(
        a, b, 16,
        [coeffs](double t, int k) {
            double s = 0.0;
            for (int i = static_cast<int>(coeffs.size()) - 1; i >= k; --i)
                s = s * t + coeffs[i] * falling_factorial(i, k);
            return s;
        },
        "polynomial");
}

DerivativeOracle exponential_oracle(double rate, double scale, double a, double b) {
    return DerivativeOracle(
        a, b, 16,
        [rate, scale](double t, int k) { return scale * std::pow(rate, k) * std::exp(rate * t); },
        "exponential");
}

}  // namespace rlab
