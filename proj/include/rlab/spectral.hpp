#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rlab/curve.hpp"
#include "rlab/geometry.hpp"
#include "rlab/linalg.hpp"
#include "rlab/report.hpp"

namespace rlab {

using cplx = std::complex<double>;

// Fourier transform convention throughout: ghat(xi) = int g(x) e^(-2 pi i <x, xi>) dx.
class TestFunction {
public:
    enum class Kind { Gaussian, BoxBump, ModulatedGaussian };

    // A exp(-(x-c)^T S^-1 (x-c) / 2)
    static TestFunction gaussian(Vec center, Matrix covariance, double amplitude = 1.0);
    static TestFunction gaussian(Vec center, double sigma, double amplitude = 1.0);
    // A exp(-(x-c)^T S^-1 (x-c) / 2) e^(2 pi i <omega, x>)
    static TestFunction modulated_gaussian(Vec center, Matrix covariance, Vec omega, double amplitude = 1.0);
    // A 1{|x_i - c_i| <= L_i / 2}
    static TestFunction box_bump(Vec center, Vec sides, double amplitude = 1.0);

    static TestFunction from_json(const Json& j);
    Json to_json() const;

    Kind kind() const noexcept { return kind_; }
    std::size_t dim() const noexcept { return center_.size(); }
    double amplitude() const noexcept { return amplitude_; }
    const Vec& center() const noexcept { return center_; }
    const Matrix& covariance() const noexcept { return covariance_; }
    const Vec& sides() const noexcept { return sides_; }
    const Vec& omega() const noexcept { return omega_; }

    cplx value(std::span<const double> x) const;
    cplx fourier(std::span<const double> xi) const;
    // closed form
    double lp_norm(double P) const;

    // x -> g(M x); box bumps only for diagonal M
    TestFunction linear_pullback(const Matrix& M) const;

private:
    TestFunction() = default;

    Kind kind_ = Kind::Gaussian;
    double amplitude_ = 1.0;
    Vec center_;
    Matrix covariance_;
    Matrix precision_;
    double sqrt_det_ = 1.0;
    Vec sides_;
    Vec omega_;
};

std::string to_string(TestFunction::Kind k);

// Samples on a parameter interval with positive quadrature weights.
struct SampledFunction {
    Vec t;
    Vec weights;
    std::vector<cplx> values;

    std::size_t size() const noexcept { return t.size(); }
    // (sum w |f|^p)^(1/p)
    double lp_norm(double p) const;
};

// Composite Gauss-Legendre grid on [a, b]; values left empty.
SampledFunction gauss_grid(double a, double b, int panels, int order = 12);
// Midpoint grid with n equal cells.
SampledFunction midpoint_grid(double a, double b, int n);
// Multiplies the weights by the affine weight of the curve.
SampledFunction with_affine_weight(SampledFunction grid, const AnyCurve& curve);

// ghat(gamma(t)) at the grid points.
SampledFunction restrict(const TestFunction& g, const AnyCurve& curve, const SampledFunction& grid);

struct ExtensionOptions {
    bool weighted = false;
    double lambda = 1.0;
    // cutoff: indicator of the ball of diameter 1 around this point
    std::optional<Vec> cutoff_center;
    double rel_tol = 1e-7;
    long max_panels = 200'000;
};

// int_a^b f(t) w(t) e^(-i lambda <x, gamma(t)>) dt on panels carrying at most
// pi/2 of phase each, Gauss-Legendre order 12 per panel, panel count doubled
// until two passes agree to rel_tol * int |f| w.
cplx extension(const std::function<cplx(double)>& f, const AnyCurve& curve, std::span<const double> x,
               const ExtensionOptions& opts = {});
// Same operator with the sampled measure used as the quadrature; throws
// NumericalError when neighbouring samples are more than pi/2 apart in phase.
cplx extension(const SampledFunction& f, const AnyCurve& curve, std::span<const double> x,
               const ExtensionOptions& opts = {});

// L^{q,r} through the decreasing rearrangement against the stored measure,
// normalized so that L^{q,q} = L^q. r = infinity gives max_k v_k W_k^(1/q).
double lorentz_norm(const SampledFunction& fn, double q, double r);

struct NamedCurve {
    std::string label;
    AnyCurve curve;
};

struct RatioOptions {
    double P = 9.0 / 8.0;
    double Q = 1.5;
    bool weighted = true;
    int panels = 200;
    int order = 12;
};

// For every curve and test function, ||ghat o gamma||_{L^Q(w dt or dt)} / ||g||_{L^P};
// reports the per-curve maximum and the max/min spread across the family.
// Exploratory: the observed ratios are not operator-norm bounds.
CheckReport empirical_ratio(std::span<const NamedCurve> curves, std::span<const TestFunction> tests,
                            const RatioOptions& opts);

// Ratio under g -> g(delta_r x), delta_r = diag(r^a_i) for a homogeneous
// curve, over the given factors; reports max/min - 1. The L^Q(dt) norm runs
// over all t > 0: on a bounded interval the dilation pushes mass past the
// endpoint and the ratio drifts.
CheckReport dilation_sweep(const HomogeneousCurve& curve, const TestFunction& g, double P, double Q,
                           std::span<const double> factors, double drift_tol = 0.01);

// ghat(gamma(2^-k s)) = ghat_k(gamma(s)) with ghat_k = ghat o delta_k, and
// ||ghat o gamma||_{L^p(I_k)} = 2^(-k/p) ||ghat_k o gamma||_{L^p([1/2, 1])},
// I_k = [2^(-k-1), 2^(-k)].
CheckReport homogeneous_rescale_check(const HomogeneousCurve& curve, int k, const TestFunction& g, double p = 2.0,
                                      double tolerance = 1e-9);

struct ConverseOptions {
    double alpha = 0.0;
    double tolerance = 1e-6;
    // optional: also check lambda(E)^(1/Q) <= ||ghat o gamma||_{L^Q(dt)}
    std::optional<AnyCurve> curve;
};

// g with ghat(x) = f(T^-1 x), T the affine map of the unit cube onto E; checks
// ||g||_{L^P} = m(E)^(1/P') ||fhat||_{L^P} with both sides on lattices.
// Requires 1/P' = alpha/Q.
CheckReport converse_scaling_check(const Parallelepiped& E, const TestFunction& f, double P, double Q,
                                   const ConverseOptions& opts);

// Midpoint lattice with n cells per axis on the box [lo, hi].
double lattice_lp_norm(const std::function<cplx(std::span<const double>)>& g, std::span<const double> lo,
                       std::span<const double> hi, int n, double P);

}  // namespace rlab
