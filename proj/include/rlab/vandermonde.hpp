#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "rlab/linalg.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/report.hpp"

namespace rlab {

inline constexpr int kMaxPsiOrder = 6;

// prod_{i<j} (x_j - x_i)
double vandermonde(std::span<const double> x);

// Gap vector h (length d-1, entries >= 0) with prefix sums
// kappa = (0, h_1, h_1 + h_2, ...) and v = V_d(kappa).
class GapVector {
public:
    explicit GapVector(Vec h);

    int d() const noexcept { return static_cast<int>(h_.size()) + 1; }
    const Vec& h() const noexcept { return h_; }
    const Vec& kappa() const noexcept { return kappa_; }
    double v() const noexcept { return v_; }
    double total() const noexcept { return kappa_.back(); }
    // mean of the kappa entries
    double mean_offset() const;

private:
    Vec h_;
    Vec kappa_;
    double v_;
};

struct KappaV {
    Vec kappa;
    double v;
};
KappaV kappa_v(const GapVector& h);

// Psi_d(t; h) by the recursive region integral. Psi_3 uses its closed form
// min(h1, t)(h1 + h2 - max(h1, t)); higher orders integrate the lower kernel
// with tensor Gauss-Legendre split at sigma_j = t, which is exact because the
// integrand is polynomial on each piece.
double psi(int d, double t, std::span<const double> h);

// Psi_d(.; h) for one gap vector, memoized by t. Not thread-safe; give each
// worker its own kernel.
class PsiKernel {
public:
    explicit PsiKernel(GapVector h);

    int d() const noexcept { return h_.d(); }
    const GapVector& gaps() const noexcept { return h_; }
    double operator()(double t);
    // integral of Psi_d over [lo, hi], exact up to rounding
    double integral(double lo, double hi);
    std::size_t cache_size() const noexcept { return cache_.size(); }

private:
    GapVector h_;
    std::unordered_map<double, double> cache_;
};

// ratio of the upper-tail Psi mass, from the mean offset to kappa_d, to v(h).
// Depends on h only; d = 2 is evaluated as an interval length.
double psi_tail_ratio(const GapVector& h);

struct PsiSample {
    double t = 0.0;
    Vec h;
};

// Empirical infimum of the tail ratio over the given samples; passes iff it
// is strictly positive. Samples with v(h) <= degenerate_v are skipped.
CheckReport check_psi_lower_bound(int d, std::span<const PsiSample> samples, double degenerate_v = 1e-14);

struct PsiSweepOptions {
    std::size_t samples = 1000;
    double h_lo = 1e-3;
    double h_hi = 1.0;
    std::uint64_t seed = 1;
    bool refine = true;
};

// Latin-hypercube samples of h in [h_lo, h_hi]^(d-1), then compass
// refinement from the running minimum.
CheckReport psi_lower_bound_sweep(int d, const PsiSweepOptions& opts);

// V_n(s) against (n-1)! times the box integral of V_{n-1}.
CheckReport check_vandermonde_integration(int n, std::span<const double> s, const QuadratureOptions& q = {});

// Lower ratios for the two Vandermonde tail inequalities:
// box integral of V_{n-1}(u)(u_{n-1}-u_1)^delta over V_n(t)(t_n-t_1)^delta,
// and box integral of V_{n-1} restricted to {mean(u) >= mean(t)} over V_n(t).
CheckReport check_tail_inequalities(int n, std::span<const double> t, double delta, double floor = 1e-6,
                                    const QuadratureOptions& q = {});

// Linear factor of the three admissible forms, indices zero based.
struct LinFactor {
    enum class Kind { Difference, Upper, Lower };
    Kind kind = Kind::Difference;
    int j = 0;
    int k = 0;         // Difference: t_k - t_j with j < k
    double c = 0.0;    // Upper: c - t_j with c >= b_j; Lower: t_j - c with c <= a_j

    double operator()(std::span<const double> t) const;
};

struct LinInstance {
    Vec a;
    Vec b;
    Vec lambda;
    std::vector<LinFactor> factors;
};

LinInstance lin_instance_from_json(const Json& j);
void validate(const LinInstance& inst);

// Integral of the factor product over the shrunken region
// (1 - lambda_j) a_j + lambda_j b_j <= t_j <= b_j, divided by the integral
// over the full box.
CheckReport check_lin_lemma(const LinInstance& inst, const QuadratureOptions& q = {});

}  // namespace rlab
