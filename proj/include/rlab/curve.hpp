#pragma once

#include <functional>
#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "rlab/linalg.hpp"
#include "rlab/report.hpp"

namespace rlab {

inline constexpr int kDefaultMaxDimension = 5;

// A real function on [a, b] together with its derivatives up to max_order.
class DerivativeOracle {
public:
    using Eval = std::function<double(double t, int k)>;

    DerivativeOracle(double a, double b, int max_order, Eval eval, std::string label = {});

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    int max_order() const noexcept { return max_order_; }
    const std::string& label() const noexcept { return label_; }

    // Throws CapabilityError for k outside 0..max_order and DomainError for
    // t outside [a, b].
    double operator()(double t, int k) const;
    // Same, without the domain test; used where a family is known to extend
    // past the nominal interval.
    double unchecked(double t, int k) const;

private:
    double a_ = 0.0;
    double b_ = 1.0;
    int max_order_ = 0;
    Eval eval_;
    std::string label_;
};

struct CurveOptions {
    // evaluation clamps t into [a + eps, b - eps], eps = eps_rel * (b - a)
    double eps_rel = 1e-9;
    bool allow_large_d = false;
};

// gamma(t) = (t, t^2/2, ..., t^(d-1)/(d-1)!, phi(t)).
class SimpleCurve {
public:
    SimpleCurve(int d, DerivativeOracle phi, CurveOptions options = {});

    int d() const noexcept { return d_; }
    double a() const noexcept { return phi_.a(); }
    double b() const noexcept { return phi_.b(); }
    const DerivativeOracle& oracle() const noexcept { return phi_; }
    const CurveOptions& options() const noexcept { return options_; }

    double clamp(double t) const;
    double phi(double t, int k = 0) const { return phi_(clamp(t), k); }

private:
    int d_;
    DerivativeOracle phi_;
    CurveOptions options_;
};

// gamma(t) = (c_1 t^a_1, ..., c_d t^a_d) on (a, b), a >= 0.
class HomogeneousCurve {
public:
    HomogeneousCurve(Vec exponents, double a = 0.0, double b = 1.0, Vec coefficients = {});

    int d() const noexcept { return static_cast<int>(exponents_.size()); }
    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    const Vec& exponents() const noexcept { return exponents_; }
    const Vec& coefficients() const noexcept { return coefficients_; }
    // D = sum of the exponents
    double homogeneous_dimension() const noexcept { return dimension_; }

    Vec gamma(double t, int k = 0) const;

private:
    Vec exponents_;
    Vec coefficients_;
    double a_;
    double b_;
    double dimension_;
};

using AnyCurve = std::variant<SimpleCurve, HomogeneousCurve>;

// gamma^(k)(t). For a simple curve the first d-1 entries are the polynomial
// pattern and the last is phi^(k)(t).
Vec evaluate_curve(const SimpleCurve& curve, double t, int k = 0);
Vec evaluate_curve(const AnyCurve& curve, double t, int k = 0);

// |phi^(d)(t)|^(2/(d(d+1))).
double affine_weight(const SimpleCurve& curve, double t);
// |det(gamma', ..., gamma^(d))|^(2/(d(d+1))); agrees with the above on simple curves.
double affine_weight(const HomogeneousCurve& curve, double t);
double affine_weight(const AnyCurve& curve, double t);

int curve_dimension(const AnyCurve& curve);
std::pair<double, double> curve_domain(const AnyCurve& curve);

// phi replaced by t -> phi(b t) on (a/b, 1).
SimpleCurve normalize_domain(const SimpleCurve& curve);

// Minimum value and minimum consecutive increment of phi^(k), k = 1..d, on
// a uniform grid.
CheckReport validate_monotone(const SimpleCurve& curve, int grid_size, double tolerance = 1e-12);

// Five-point central differences of phi^(k-1) against phi^(k) at `samples`
// interior points, for k = 1..max_order.
CheckReport validate_oracle(const DerivativeOracle& oracle, int samples = 20, double rel_tol = 1e-4);

// Families with closed-form derivative stacks.
DerivativeOracle monomial_oracle(double beta, double a, double b, double coefficient = 1.0);
// phi(t) = sum_i coeffs[i] t^i
DerivativeOracle polynomial_oracle(Vec coeffs, double a, double b);
// phi(t) = scale * exp(rate * t)
DerivativeOracle exponential_oracle(double rate, double scale, double a, double b);

double falling_factorial(double x, int k);
double factorial(int n);

}  // namespace rlab
