#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlab/curve.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/report.hpp"
#include "rlab/vandermonde.hpp"

namespace rlab {

// Gamma(t, h) = sum_j gamma(t + kappa_j(h)).
Vec offspring_point(const SimpleCurve& curve, double t, const GapVector& h);

// det of the d x d matrix with columns (1, s_j, ..., s_j^(d-2)/(d-2)!, phi'(s_j)).
// Nodes need not be ordered. Polynomial rows are centered at the node mean,
// which leaves the determinant unchanged and keeps entries small.
double jacobian_nodes(const SimpleCurve& curve, std::span<const double> nodes, int order_shift = 0);

// J_phi(t, h) with nodes s_j = t + kappa_j(h).
double jacobian_direct(const SimpleCurve& curve, double t, const GapVector& h);

struct JacobianIntegral {
    double value = 0.0;
    long evaluations = 0;
    bool converged = true;
};

// J_d(s; phi) as the (d-1)-fold box integral over [s_1, s_2] x ... x
// [s_{d-1}, s_d] of J_{d-1}(sigma; phi'). Throws NumericalError when the
// adaptive quadrature misses its target.
JacobianIntegral jacobian_integral(const SimpleCurve& curve, double t, const GapVector& h,
                                   const QuadratureOptions& q = {});

// Kernel route: integral of Psi_d(u - s_1; h) phi^(d)(u) over [s_1, s_d].
double jacobian_psi(const SimpleCurve& curve, double t, const GapVector& h, const QuadratureOptions& q = {});

// Gamma(t, h) = shift + d * matrix * gamma~(t + hbar) where gamma~ is the
// simple curve with last entry phi~(s) = d^-1 sum_i phi(s - hbar + kappa_i).
struct OffspringFrame {
    double hbar = 0.0;
    Vec shift;
    Matrix matrix;
    SimpleCurve tilde;

    Vec reconstruct(double t) const;
};

OffspringFrame offspring_decomposition(const SimpleCurve& curve, const GapVector& h);

struct OffspringSample {
    double t = 0.0;
    Vec h;
};

struct SigmaSweepOptions {
    std::size_t samples = 1000;
    double h_lo = 1e-3;
    double h_hi = 0.0;     // 0 means (b - a) / d
    std::uint64_t seed = 1;
    double degenerate_rel = 1e-12;
};

// Admissible (t, h): h in [h_lo, h_hi]^(d-1) by Latin hypercube, t uniform
// in [a, b - kappa_d].
std::vector<OffspringSample> offspring_samples(const SimpleCurve& curve, const SigmaSweepOptions& opts);

// J_phi / (v(h) (prod_i phi^(d)(t + kappa_i))^(1/d)) at one sample; NaN when
// degenerate.
double sigma_ratio(const SimpleCurve& curve, double t, const GapVector& h);

// Empirical infimum of sigma_ratio. When `A` is given, the report also
// carries sigma_est * A.
CheckReport estimate_sigma(const SimpleCurve& curve, std::span<const OffspringSample> samples,
                           std::optional<double> A = std::nullopt, double degenerate_rel = 1e-12);

// sigma_est of phi~(.; h) against sigma_est(phi) / d.
// Both sweeps use `opts` (the offspring sweep on the shorter domain of phi~).
CheckReport check_offspring_closure(const SimpleCurve& curve, const GapVector& h, const SigmaSweepOptions& opts,
                                    double tolerance = 1e-9);

// max over samples of |jacobian_direct - jacobian_integral| / (1 + |J|).
CheckReport check_jacobian_identity(const SimpleCurve& curve, std::span<const OffspringSample> samples,
                                    double tolerance = 1e-8);

// phi = t^d / d! on [a, b]: J(t, h) prod_{j<d} j! = v(h), max relative error.
CheckReport check_monomial_jacobian(int d, std::span<const OffspringSample> samples, double a = 0.0, double b = 1.0,
                                    double tolerance = 1e-10);

// H = prod_i w(t + kappa_i). Checks (prod phi^(d))^(1/d) = H^((d+1)/2) and
// J >= sigma_est v H^((d+1)/2).
// sigma_est defaults to the infimum over the same samples.
CheckReport weight_product_bound(const SimpleCurve& curve, std::span<const OffspringSample> samples,
                                 std::optional<double> sigma = std::nullopt, double identity_tol = 1e-12);

}  // namespace rlab
