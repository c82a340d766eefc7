#pragma once

#include <optional>
#include <string>

#include "rlab/curve.hpp"
#include "rlab/report.hpp"

namespace rlab {

enum class MeanVariant { AM, GM };

MeanVariant mean_variant_from_string(const std::string& s);

struct ConditionEstimate {
    std::string condition;  // "AM", "GM" or "phicond"
    double constant = 0.0;  // A, or sigma for phicond
    Vec attained_at;
    int grid_size = 0;
    // phicond only: the infimum of the difference quotient
    double infimum = 0.0;
    CheckReport report;
};

// sup over ordered tuples s_1 <= ... <= s_d from an interior grid of
// (prod phi^(d)(s_j))^(1/d) / phi^(d)(mean s), followed by coordinate-wise
// golden-section refinement around the best tuple. Evaluated in log space.
ConditionEstimate estimate_A(const SimpleCurve& curve, MeanVariant variant, int grid_size);

// inf over t < s of (phi^(d-1)(s) - phi^(d-1)(t)) / (s - t)^rho with
// rho = 1/alpha + 1 - d(d+1)/2; constant = inf^(-alpha).
ConditionEstimate check_phicond(const SimpleCurve& curve, double alpha, int grid_size);

double phicond_rho(int d, double alpha);
// Throws ValidationError unless 0 < alpha <= 2/(d(d+1)) (d >= 3) or
// 0 < alpha < 1/3 (d = 2).
void validate_alpha(int d, double alpha);

// k-th derivative of exp(-t^-beta):
// beta^k e^(-t^-beta) t^(-k(beta+1)) (1 + sum_{j=1}^{k-1} a_{j,k} t^(j beta)),
// a_{j,k+1} = a_{j,k} - a_{j-1,k}(k + 1 - j + k/beta).
double expflat_derivatives(double beta, int k, double t);
// a_{0,k}, ..., a_{k-1,k}
Vec expflat_coefficients(double beta, int k);

DerivativeOracle expflat_oracle(double beta, double a, double b);

enum class FlattenVariant { Exp, Log };
FlattenVariant flatten_variant_from_string(const std::string& s);

// psi^(d) = (d-1)! exp(-1/phi^(d)) or (d-1)! log(phi^(d)); lower orders are
// the iterated integrals from the left endpoint, tabulated on `panels`
// breakpoints and completed by Taylor propagation plus a quadrature
// remainder.
SimpleCurve build_flattened(const SimpleCurve& base, FlattenVariant variant, int panels = 256);

struct ThetaBlock {
    double p, p_prime, q, theta, A, B, s, eta;
    double eta_residual;  // eta - (d+1) theta / 4 - 1/p
    double s_residual;    // max(|s - (d+1) p'/2|, |s - q/d|) / s
};

struct PairBlock {
    double P, Q;
};

struct AlphaBlock {
    double alpha, q, delta, rho, kappa, sm_exponent;
};

struct LorentzBlock {
    double s, q;
};

struct HomogeneousBlock {
    double D, scaled_exponent, weak_q;
};

struct ExponentRecord {
    int d = 3;
    double p_d = 0.0;
    double q_d = 0.0;
    double D0 = 0.0;
    std::optional<ThetaBlock> theta;
    std::optional<PairBlock> pair;
    std::optional<AlphaBlock> alpha;
    std::optional<LorentzBlock> lorentz;
    std::optional<HomogeneousBlock> homogeneous;

    Json to_json() const;
};

struct ExponentQuery {
    int d = 3;
    std::optional<double> p;        // interpolation exponent, 1 < p < q_d
    std::optional<double> P;        // restriction pair L^P -> L^Q, 1 <= P < p_d
    std::optional<double> alpha;    // measure exponent
    std::optional<double> lorentz_s;  // 1/w in L^{s,inf}
    std::optional<double> D;        // homogeneous dimension
};

ExponentRecord exponent_calculator(const ExponentQuery& q);

}  // namespace rlab
