#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rlab/curve.hpp"
#include "rlab/linalg.hpp"
#include "rlab/report.hpp"

namespace rlab {

// base + {sum_j c_j edges[j] : 0 <= c_j <= 1}
class Parallelepiped {
public:
    Parallelepiped(Vec base, std::vector<Vec> edges);

    std::size_t dim() const noexcept { return base_.size(); }
    const Vec& base() const noexcept { return base_; }
    const std::vector<Vec>& edges() const noexcept { return edges_; }
    double measure() const noexcept { return measure_; }
    Vec barycenter() const;
    // edge coordinates of x - base
    Vec coordinates(std::span<const double> x) const;
    // every edge coordinate in [-tol, 1 + tol]
    bool contains(std::span<const double> x, double tol = 0.0) const;
    // min over coordinates of min(c, 1 - c); >= 0 iff inside
    double margin(std::span<const double> x) const;
    // x -> base + E x, the affine map of the unit cube onto this set
    const Matrix& edge_matrix() const noexcept { return edge_matrix_; }

    Json to_json() const;
    static Parallelepiped from_json(const Json& j);

private:
    Vec base_;
    std::vector<Vec> edges_;
    Matrix edge_matrix_;
    Matrix inverse_;
    double measure_;
};

// Axis-aligned box [lo, hi].
Parallelepiped box(std::span<const double> lo, std::span<const double> hi);

// Lebesgue measure of {t in (a, b) : gamma(t) in E}. Membership is scanned
// on a coarse grid and every transition is bisected to width
// tol / (number of transitions).
double lambda_measure(const AnyCurve& curve, const Parallelepiped& E, double tol = 1e-10, int coarse = 4096);

// sup over the family of lambda(E) / m(E)^alpha.
CheckReport estimate_alpha_B(const AnyCurve& curve, std::span<const Parallelepiped> family, double alpha);

// Centered parallelepipeds at gamma(t0) with edges 2 c r^j gamma^(j)(t0) / j!.
std::vector<Parallelepiped> adapted_frame_family(const AnyCurve& curve, double t0, std::span<const double> radii,
                                                 double c = 1.0);
// Axis-aligned boxes centered at `center` with half sides r^e_i.
std::vector<Parallelepiped> anisotropic_box_family(std::span<const double> center, std::span<const double> radii,
                                                   std::span<const double> exponents);

struct Lemma1Chain {
    double rho = 0.0;
    // chain[0] = E_{d-2} in R^2, ..., chain[d-2] = E_0 in R^d
    std::vector<Parallelepiped> chain;
    Vec measures;
    Vec bounds;
    CheckReport report;
};

// Parallelepipeds E_{d-k}, k = 2..d, containing the last k coordinates of
// gamma^(d-k)(s) for s in [t, t+h]. The shear point is the barycenter.
Lemma1Chain lemma1_chain(const SimpleCurve& curve, double t, double h, int containment_samples = 1000,
                         double containment_tol = 1e-9);

struct Lemma1Sample {
    double t = 0.0;
    double s = 0.0;
};

// B_est from the E_0 family of the samples (or the given B), lambda(E_0) >= h,
// then B^(-1/alpha) (s - t)^rho <= phi^(d-1)(s) - phi^(d-1)(t) at each sample.
CheckReport lemma1_conclusion(const SimpleCurve& curve, std::span<const Lemma1Sample> samples, double alpha,
                              std::optional<double> B = std::nullopt, double tolerance = 1e-9);

struct KU {
    double u = 0.0;
    double K = 0.0;
};

// u(h) = prod_{i<j} |h_i - h_j| over (h_1, ..., h_{d-1}, 0) and
// K = u (max |h_i - h_j|)^(1/alpha - d(d+1)/2).
KU K_u(std::span<const double> h, double alpha);
CheckReport K_u_geometry(std::span<const double> h, double alpha, std::span<const double> lambdas = {});

struct ShellOptions {
    int m_min = 0;
    int m_max = 4;
    std::size_t samples = 2'000'000;
    double half_width = 8.0;
    std::uint64_t seed = 1;
    double ratio_tol = 0.2;
};

// Monte Carlo measures of S_m = {2^(-m-1) < K <= 2^(-m)} in the box
// [-half_width, half_width]^(d-1), from one pass binned by floor(-log2 K).
CheckReport sm_measure(int d, double alpha, const ShellOptions& opts);

// Exact shell measure for d = 2.
double sm_measure_d2(double alpha, int m);

struct JKOptions {
    std::size_t samples = 2000;
    std::uint64_t seed = 1;
    double min_gap_rel = 1e-3;
};

// inf over sampled (s, h) of J(s, h) / (sigma^(-1/alpha) K(h)), J the
// Jacobian of (s, h) -> sum_j gamma(s + h_j) with h_d = 0.
CheckReport check_J_geq_K(const SimpleCurve& curve, double sigma, double alpha, const JKOptions& opts);

}  // namespace rlab
