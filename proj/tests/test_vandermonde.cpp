#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "rlab/curve.hpp"
#include "rlab/errors.hpp"
#include "rlab/linalg.hpp"
#include "rlab/sampling.hpp"
#include "rlab/vandermonde.hpp"

using namespace rlab;

namespace {

double power_matrix_det(const Vec& x) {
    const std::size_t n = x.size();
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = std::pow(x[j], static_cast<double>(i));
    return determinant(m);
}

// Cox-de Boor: normalized B-spline of degree knots.size()-2 on the given knots
double bspline(const Vec& knots, double x) {
    const std::size_t n = knots.size();
    if (x < knots.front() || x >= knots.back()) return 0.0;
    Vec N(n - 1, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) N[i] = (x >= knots[i] && x < knots[i + 1]) ? 1.0 : 0.0;
    for (std::size_t p = 1; p + 1 < n; ++p) {
        for (std::size_t i = 0; i + p + 1 < n; ++i) {
            double s = 0.0;
            const double l = knots[i + p] - knots[i], r = knots[i + p + 1] - knots[i + 1];
            if (l > 0) s += (x - knots[i]) / l * N[i];
            if (r > 0) s += (knots[i + p + 1] - x) / r * N[i + 1];
            N[i] = s;
        }
    }
    return N[0];
}

// Psi_d is the Peano kernel of the divided difference on the knots kappa:
// Psi_d(u; h) = v(h) M(u) / prod_{j<d} j!, M the B-spline with unit mass.
double psi_oracle(const Vec& h, double u) {
    const GapVector g(h);
    const int d = g.d();
    double fact = 1.0;
    for (int j = 0; j < d; ++j) fact *= factorial(j);
    const double M = (d - 1) * bspline(g.kappa(), u) / g.total();
    return g.v() * M / fact;
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double dx = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * dx);
    return s * dx / 3.0;
}

}  // namespace

TEST_CASE("vandermonde product") {
    CHECK(vandermonde(Vec{0, 1, 2}) == 2.0);
    CHECK(vandermonde(Vec{0.3, 0.3, 1.7}) == 0.0);
    CHECK(vandermonde(Vec{4.0}) == 1.0);
    Rng rng(1);
    for (int rep = 0; rep < 20; ++rep) {
        Vec x(5);
        for (double& v : x) v = rng.uniform(-2, 2);
        CHECK(vandermonde(x) == doctest::Approx(power_matrix_det(x)).epsilon(1e-10));
    }
}

TEST_CASE("vandermonde is antisymmetric") {
    Rng rng(2);
    for (int rep = 0; rep < 20; ++rep) {
        Vec x(4);
        for (double& v : x) v = rng.uniform(0, 1);
        Vec y = x;
        const std::size_t i = rng.index(4), j = (i + 1 + rng.index(3)) % 4;
        std::swap(y[i], y[j]);
        CHECK(vandermonde(y) == doctest::Approx(-vandermonde(x)));
    }
}

TEST_CASE("kappa and v") {
    const auto kv = kappa_v(GapVector({1, 2}));
    CHECK(kv.kappa == Vec{0, 1, 3});
    CHECK(kv.v == 6.0);
    const auto z = kappa_v(GapVector({0, 0, 0}));
    CHECK(z.v == 0.0);
    CHECK(z.kappa == Vec{0, 0, 0, 0});

    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
        Vec h(3);
        for (double& x : h) x = rng.uniform(0.1, 1);
        const double k1 = h[0], k2 = h[0] + h[1], k3 = k2 + h[2];
        const double direct = k1 * k2 * k3 * (k2 - k1) * (k3 - k1) * (k3 - k2);
        CHECK(GapVector(h).v() == doctest::Approx(direct));
        // homogeneity v(lh) = l^(d(d-1)/2) v(h)
        Vec scaled = h;
        for (double& x : scaled) x *= 1.7;
        CHECK(GapVector(scaled).v() == doctest::Approx(std::pow(1.7, 6) * GapVector(h).v()));
    }
    CHECK_THROWS_AS(GapVector({1.0, -0.1}), ValidationError);
    CHECK_THROWS_AS(GapVector(Vec{}), ValidationError);
}

TEST_CASE("psi base cases and support") {
    const Vec h1{1.0};
    CHECK(psi(2, 0.5, h1) == 1.0);
    CHECK(psi(2, 1.5, h1) == 0.0);
    for (const Vec& h : {Vec{0.4, 1.0}, Vec{0.3, 0.2, 0.5}, Vec{0.2, 0.6, 0.1, 0.3}}) {
        const int d = static_cast<int>(h.size()) + 1;
        const double total = GapVector(h).total();
        CHECK(psi(d, total, h) == 0.0);
        CHECK(psi(d, total + 0.1, h) == 0.0);
        CHECK(psi(d, -0.01, h) == 0.0);
    }
    CHECK_THROWS_AS(psi(7, 0.1, Vec(6, 0.1)), CapabilityError);
    CHECK_THROWS_AS(psi(1, 0.1, Vec{}), CapabilityError);
    CHECK_THROWS_AS(psi(3, 0.1, Vec{0.1}), ValidationError);
}

TEST_CASE("psi matches the B-spline kernel") {
    Rng rng(4);
    for (int d = 3; d <= 5; ++d) {
        for (int rep = 0; rep < 6; ++rep) {
            Vec h(d - 1);
            for (double& x : h) x = rng.uniform(0.05, 1.0);
            const double total = GapVector(h).total();
            for (int i = 1; i < 12; ++i) {
                const double u = total * i / 12.0 + 1e-3;
                CAPTURE(d);
                CAPTURE(u);
                CHECK(psi(d, u, h) == doctest::Approx(psi_oracle(h, u)).epsilon(1e-9).scale(1e-12));
            }
        }
    }
}

TEST_CASE("psi is nonnegative and integrates to v / prod j!") {
    Rng rng(5);
    for (int d = 3; d <= 5; ++d) {
        Vec h(d - 1);
        for (double& x : h) x = rng.uniform(0.1, 1.0);
        PsiKernel k{GapVector(h)};
        const double total = k.gaps().total();
        for (int i = 0; i <= 40; ++i) CHECK(k(total * i / 40.0) >= 0.0);
        double fact = 1.0;
        for (int j = 1; j < d; ++j) fact *= factorial(j);
        CHECK(k.integral(0.0, total) == doctest::Approx(k.gaps().v() / fact).epsilon(1e-10));
    }
    // d = 3, h = (1, 1): unit mass
    PsiKernel k3{GapVector({1.0, 1.0})};
    CHECK(k3.integral(0.0, 2.0) == doctest::Approx(1.0));
}

TEST_CASE("psi lower bound") {
    SUBCASE("d = 2 is exactly one half") {
        Rng rng(6);
        std::vector<PsiSample> s;
        for (int i = 0; i < 50; ++i) s.push_back({0.0, {rng.uniform(1e-3, 5.0)}});
        const auto r = check_psi_lower_bound(2, s);
        CHECK(r.status == CheckStatus::Pass);
        CHECK(r.estimate == doctest::Approx(0.5).epsilon(1e-14));
    }
    SUBCASE("equal gaps in d = 3 against brute force") {
        for (double g : {0.2, 1.0, 3.0}) {
            const Vec h{g, g};
            const double lo = (0.0 + g + 2 * g) / 3.0, hi = 2 * g;
            const double ref = simpson([&](double u) { return psi_oracle(h, u); }, lo, hi, 4000) / GapVector(h).v();
            CHECK(psi_tail_ratio(GapVector(h)) == doctest::Approx(ref).epsilon(1e-6));
        }
    }
    SUBCASE("random sweep in d = 3 stays positive") {
        PsiSweepOptions o;
        o.samples = 1000;
        o.seed = 9;
        const auto r = psi_lower_bound_sweep(3, o);
        CHECK(r.status == CheckStatus::Pass);
        CHECK(r.estimate > 0.0);
    }
    SUBCASE("degenerate samples are skipped") {
        const std::vector<PsiSample> s{{0.0, {0.0, 1.0}}, {0.0, {0.5, 0.5}}};
        const auto r = check_psi_lower_bound(3, s);
        CHECK(r.status == CheckStatus::Pass);
        CHECK_FALSE(r.notes.empty());
        const std::vector<PsiSample> all_bad{{0.0, {0.0, 1.0}}};
        CHECK(check_psi_lower_bound(3, all_bad).status == CheckStatus::Inconclusive);
    }
}

TEST_CASE("tail ratio is scale invariant") {
    Rng rng(7);
    for (int rep = 0; rep < 5; ++rep) {
        Vec h(3);
        for (double& x : h) x = rng.uniform(0.1, 1.0);
        Vec s = h;
        for (double& x : s) x *= 4.5;
        CHECK(psi_tail_ratio(GapVector(s)) == doctest::Approx(psi_tail_ratio(GapVector(h))).epsilon(1e-9));
    }
}

TEST_CASE("vandermonde integration formula") {
    const Vec s2{0.5, 2.0};
    CHECK(check_vandermonde_integration(2, s2).estimate == doctest::Approx(0.0).scale(1.0));
    const Vec s3{0, 1, 2};
    const auto r3 = check_vandermonde_integration(3, s3);
    CHECK(r3.status == CheckStatus::Pass);
    CHECK(r3.estimate <= 1e-8);
    Rng rng(8);
    Vec s4(4);
    for (double& x : s4) x = rng.uniform(0, 3);
    std::sort(s4.begin(), s4.end());
    const auto r4 = check_vandermonde_integration(4, s4);
    CHECK(r4.status == CheckStatus::Pass);
    CHECK(r4.estimate <= 1e-6);
}

TEST_CASE("tail inequalities") {
    const Vec t{0, 1, 2};
    const auto r = check_tail_inequalities(3, t, 1.0);
    CHECK(r.status == CheckStatus::Pass);
    CHECK(r.estimate > 0.0);
    // invariant under t -> a t + b
    Vec u = t;
    for (double& x : u) x = 2.5 * x - 1.0;
    const auto ru = check_tail_inequalities(3, u, 1.0);
    CHECK(ru.estimate == doctest::Approx(r.estimate).epsilon(1e-8));
    const Vec t4{0.0, 0.3, 1.1, 1.5};
    CHECK(check_tail_inequalities(4, t4, 0.5).status == CheckStatus::Pass);
    CHECK_THROWS_AS(check_tail_inequalities(2, Vec{0, 1}, 1.0), ValidationError);
    CHECK_THROWS_AS(check_tail_inequalities(3, Vec{0, 2, 1}, 1.0), ValidationError);
}

TEST_CASE("lin lemma") {
    SUBCASE("no factors is the length ratio") {
        LinInstance inst{{0.0}, {1.0}, {0.5}, {}};
        const auto r = check_lin_lemma(inst);
        CHECK(r.estimate == doctest::Approx(0.5));
    }
    SUBCASE("one lower factor matches the closed form") {
        const double a = 1.0, b = 3.0, c = 0.5, lam = 0.7;
        LinFactor f;
        f.kind = LinFactor::Kind::Lower;
        f.j = 0;
        f.c = c;
        LinInstance inst{{a}, {b}, {lam}, {f}};
        const double lo = (1 - lam) * a + lam * b;
        auto F = [c](double x) { return 0.5 * (x - c) * (x - c); };
        const double ref = (F(b) - F(lo)) / (F(b) - F(a));
        CHECK(check_lin_lemma(inst).estimate == doctest::Approx(ref).epsilon(1e-10));
    }
    SUBCASE("two intervals, mixed factors, stable under refinement") {
        LinFactor d1{LinFactor::Kind::Difference, 0, 1, 0.0};
        LinFactor u1{LinFactor::Kind::Upper, 1, 0, 2.5};
        LinInstance inst{{0.0, 1.0}, {0.8, 2.0}, {0.3, 0.6}, {d1, u1, d1}};
        QuadratureOptions coarse;
        coarse.rel_tol = 1e-6;
        QuadratureOptions fine;
        fine.rel_tol = 1e-11;
        const auto rc = check_lin_lemma(inst, coarse);
        const auto rf = check_lin_lemma(inst, fine);
        CHECK(rf.status == CheckStatus::Pass);
        CHECK(rf.estimate > 0.0);
        CHECK(rc.estimate == doctest::Approx(rf.estimate).epsilon(1e-5));
    }
    SUBCASE("malformed instances") {
        LinFactor bad{LinFactor::Kind::Upper, 0, 0, 0.5};
        CHECK_THROWS_AS(validate(LinInstance{{0.0}, {1.0}, {0.5}, {bad}}), ValidationError);
        CHECK_THROWS_AS(validate(LinInstance{{0.0}, {1.0}, {1.0}, {}}), ValidationError);
        CHECK_THROWS_AS(validate(LinInstance{{0.0, 0.5}, {1.0, 2.0}, {0.5, 0.5}, {}}), ValidationError);
        LinFactor diff{LinFactor::Kind::Difference, 1, 0, 0.0};
        CHECK_THROWS_AS(validate(LinInstance{{0.0, 1.0}, {1.0, 2.0}, {0.5, 0.5}, {diff}}), ValidationError);
    }
    SUBCASE("json form") {
        const Json j = {{"a", {0.0, 1.0}},
                        {"b", {1.0, 2.0}},
                        {"lambda", {0.5, 0.5}},
                        {"factors", {{{"kind", "difference"}, {"j", 0}, {"k", 1}}, {{"kind", "lower"}, {"j", 0}, {"c", -1.0}}}}};
        const auto inst = lin_instance_from_json(j);
        CHECK(inst.factors.size() == 2);
        CHECK(check_lin_lemma(inst).status == CheckStatus::Pass);
    }
}
