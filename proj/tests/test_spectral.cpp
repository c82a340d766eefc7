#include <cmath>
#include <numbers>

#include "doctest.h"
#include "rlab/conditions.hpp"
#include "rlab/curve.hpp"
#include "rlab/errors.hpp"
#include "rlab/geometry.hpp"
#include "rlab/sampling.hpp"
#include "rlab/spectral.hpp"

using namespace rlab;
using std::numbers::pi;

namespace {

// midpoint sum of g(x) e^(-2 pi i <x, xi>) over [lo, hi]^2 with n^2 cells
cplx lattice_ft2(const TestFunction& g, const Vec& lo, const Vec& hi, int n, const Vec& xi) {
    const double dx = (hi[0] - lo[0]) / n, dy = (hi[1] - lo[1]) / n;
    cplx s = 0.0;
    Vec x(2);
    for (int i = 0; i < n; ++i) {
        x[0] = lo[0] + (i + 0.5) * dx;
        for (int j = 0; j < n; ++j) {
            x[1] = lo[1] + (j + 0.5) * dy;
            s += g.value(x) * std::exp(cplx(0.0, -2 * pi * (x[0] * xi[0] + x[1] * xi[1])));
        }
    }
    return s * dx * dy;
}

double lattice_lp(const TestFunction& g, double half, int n, double P) {
    const std::size_t d = g.dim();
    const double dx = 2 * half / n;
    double s = 0.0;
    std::vector<int> idx(d, 0);
    Vec x(d);
    while (true) {
        for (std::size_t k = 0; k < d; ++k) x[k] = g.center()[k] - half + (idx[k] + 0.5) * dx;
        s += std::pow(std::abs(g.value(x)), P);
        std::size_t k = 0;
        while (k < d && ++idx[k] == n) idx[k++] = 0;
        if (k == d) break;
    }
    return std::pow(s * std::pow(dx, static_cast<double>(d)), 1.0 / P);
}

double simpson(const std::function<double(double)>& f, double a, double b, int n) {
    const double dx = (b - a) / n;
    double s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += (i % 2 ? 4.0 : 2.0) * f(a + i * dx);
    return s * dx / 3.0;
}

Matrix spd2(double a, double b, double c) {
    Matrix m(2, 2);
    m(0, 0) = a, m(0, 1) = m(1, 0) = b, m(1, 1) = c;
    return m;
}

AnyCurve moment3() { return SimpleCurve(3, monomial_oracle(3.0, 0.0, 1.0, 1.0 / 6.0)); }

}  // namespace

TEST_CASE("Gaussian transforms against a lattice transform") {
    const auto g = TestFunction::gaussian({0.3, -0.2}, spd2(0.5, 0.1, 0.3), 1.7);
    const auto m = TestFunction::modulated_gaussian({0.3, -0.2}, spd2(0.5, 0.1, 0.3), {0.8, -0.4}, 1.7);
    const Vec lo{-5, -5}, hi{5, 5};
    for (const Vec& xi : {Vec{0, 0}, Vec{0.3, 0.2}, Vec{-0.5, 0.7}}) {
        for (const auto* f : {&g, &m}) {
            const cplx ref = lattice_ft2(*f, lo, hi, 300, xi);
            const cplx got = f->fourier(xi);
            CHECK(std::abs(got - ref) <= 1e-9 * (1 + std::abs(ref)));
        }
    }
    // centered Gaussian: positive real transform
    const auto c = TestFunction::gaussian({0, 0, 0}, 0.4);
    Rng rng(41);
    for (int i = 0; i < 20; ++i) {
        const Vec xi{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const cplx v = c.fourier(xi);
        CHECK(v.real() > 0.0);
        CHECK(v.imag() == 0.0);
    }
    CHECK(TestFunction::gaussian({0, 0}, 1.0, 0.0).fourier(Vec{0.1, 0.2}) == cplx(0.0));
}

TEST_CASE("box bump transform against a lattice transform") {
    const auto b = TestFunction::box_bump({0.1, -0.2}, {1.0, 0.5}, 2.0);
    for (const Vec& xi : {Vec{0, 0}, Vec{0.7, 0.0}, Vec{0.4, -1.1}}) {
        // lattice aligned with the box so the indicator has no partial cells
        const cplx ref = lattice_ft2(b, {-0.4, -0.45}, {0.6, 0.05}, 400, xi);
        const cplx got = b.fourier(xi);
        CHECK(std::abs(got - ref) <= 1e-4 * std::abs(ref));
    }
}

TEST_CASE("closed-form norms against lattices") {
    const auto g = TestFunction::gaussian({0.2, 0.1}, spd2(0.5, 0.1, 0.3), 1.3);
    for (double P : {1.0, 9.0 / 8.0, 2.0, 3.5}) CHECK(g.lp_norm(P) == doctest::Approx(lattice_lp(g, 5.0, 300, P)).epsilon(1e-8));
    const auto g3 = TestFunction::gaussian({0, 0, 0}, 0.5);
    CHECK(g3.lp_norm(1.5) == doctest::Approx(lattice_lp(g3, 4.0, 60, 1.5)).epsilon(1e-8));
    const auto b = TestFunction::box_bump({0, 0}, {2.0, 0.5}, 3.0);
    CHECK(b.lp_norm(2.0) == doctest::Approx(3.0 * std::sqrt(1.0)));
}

TEST_CASE("linear pullback") {
    Matrix M(2, 2);
    M(0, 0) = 1.2, M(0, 1) = 0.3, M(1, 0) = -0.4, M(1, 1) = 0.9;
    const auto m = TestFunction::modulated_gaussian({0.3, -0.2}, spd2(0.5, 0.1, 0.3), {0.8, -0.4}, 1.7);
    const auto pm = m.linear_pullback(M);
    Rng rng(42);
    for (int i = 0; i < 20; ++i) {
        const Vec x{rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Vec Mx = M * std::span<const double>(x);
        CHECK(std::abs(pm.value(x) - m.value(Mx)) <= 1e-12);
    }
    Matrix D(2, 2);
    D(0, 0) = 2.0, D(1, 1) = 0.5;
    const auto bb = TestFunction::box_bump({0, 0}, {1, 1}).linear_pullback(D);
    CHECK(bb.sides()[0] == doctest::Approx(0.5));
    CHECK(bb.sides()[1] == doctest::Approx(2.0));
    CHECK_THROWS(TestFunction::box_bump({0, 0}, {1, 1}).linear_pullback(M));
}

TEST_CASE("test function json") {
    const auto m = TestFunction::modulated_gaussian({0.3, -0.2}, spd2(0.5, 0.1, 0.3), {0.8, -0.4}, 1.7);
    const auto back = TestFunction::from_json(m.to_json());
    const Vec xi{0.2, 0.1};
    CHECK(std::abs(back.fourier(xi) - m.fourier(xi)) <= 1e-15);
    const auto g = TestFunction::from_json(Json{{"kind", "gaussian"}, {"center", {0, 0}}, {"sigma", 0.5}});
    CHECK(g.kind() == TestFunction::Kind::Gaussian);
    CHECK_THROWS(TestFunction::from_json(Json{{"kind", "wavelet"}, {"center", {0}}}));
}

TEST_CASE("restriction of transforms") {
    const auto curve = moment3();
    const auto grid = gauss_grid(0.0, 1.0, 8);
    const auto g = TestFunction::gaussian({0, 0, 0}, 0.3);
    const auto r = restrict(g, curve, grid);
    for (const auto& v : r.values) CHECK(v.real() > 0.0);

    // modulation by omega shifts the transform: mhat(xi) = ghat(xi - omega)
    const Vec omega{0.5, -0.3, 0.2};
    const auto m = TestFunction::modulated_gaussian({0, 0, 0}, Matrix::identity(3), omega);
    const auto base = TestFunction::gaussian({0, 0, 0}, 1.0);
    const auto rm = restrict(m, curve, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        Vec p = evaluate_curve(curve, grid.t[i]);
        for (int k = 0; k < 3; ++k) p[k] -= omega[k];
        CHECK(std::abs(rm.values[i] - base.fourier(p)) <= 1e-14);
    }
}

TEST_CASE("extension operator") {
    const auto curve = moment3();
    const Vec zero{0, 0, 0};
    auto one = [](double) { return cplx(1.0); };
    CHECK(std::abs(extension(one, curve, zero) - cplx(1.0)) <= 1e-12);

    SUBCASE("Fresnel-type integral against a fine Riemann sum") {
        const AnyCurve par = SimpleCurve(2, monomial_oracle(2.0, 0.0, 1.0, 0.5));
        for (double xi : {1.0, 10.0, 60.0}) {
            const int n = 2'000'000;
            cplx ref = 0.0;
            for (int i = 0; i < n; ++i) {
                const double t = (i + 0.5) / n;
                ref += std::exp(cplx(0.0, -xi * t * t / 2));
            }
            ref /= static_cast<double>(n);
            const cplx got = extension(one, par, Vec{0.0, xi});
            CHECK(std::abs(got - ref) <= 1e-5 * std::abs(ref));
        }
    }
    SUBCASE("conjugate symmetry, linearity, triangle bound") {
        auto f = [](double t) { return cplx(1.0 + t * t, 0.0); };
        auto g = [](double t) { return cplx(std::cos(3 * t), std::sin(t)); };
        const double a = 0.7;
        const cplx b(0.2, -1.1);
        auto h = [&](double t) { return a * f(t) + b * g(t); };
        Rng rng(43);
        for (int i = 0; i < 10; ++i) {
            const Vec x{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
            const Vec mx{-x[0], -x[1], -x[2]};
            const cplx ef = extension(f, curve, x);
            CHECK(std::abs(extension(f, curve, mx) - std::conj(ef)) <= 1e-9);
            const cplx lin = extension(h, curve, x) - (a * ef + b * extension(g, curve, x));
            CHECK(std::abs(lin) <= 1e-8);
            const double l1 = simpson([&](double t) { return std::abs(h(t)); }, 0.0, 1.0, 2000);
            CHECK(std::abs(extension(h, curve, x)) <= l1 * (1 + 1e-9));
        }
    }
    SUBCASE("cutoff and scaling") {
        ExtensionOptions o;
        o.cutoff_center = zero;
        CHECK(extension(one, curve, Vec{0.6, 0, 0}, o) == cplx(0.0));
        CHECK(extension(one, curve, Vec{0.4, 0, 0}, o) != cplx(0.0));
        ExtensionOptions l;
        l.lambda = 5.0;
        CHECK(std::abs(extension(one, curve, Vec{1, 2, 3}, l) - extension(one, curve, Vec{5, 10, 15})) <= 1e-9);
    }
    SUBCASE("sampled measure agrees with the callable form") {
        auto grid = gauss_grid(0.0, 1.0, 40);
        grid.values.resize(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) grid.values[i] = cplx(grid.t[i], 1.0);
        const Vec x{3.0, -2.0, 1.0};
        const cplx a = extension(grid, curve, x);
        const cplx b = extension([](double t) { return cplx(t, 1.0); }, curve, x);
        CHECK(std::abs(a - b) <= 1e-9);
        auto coarse = gauss_grid(0.0, 1.0, 1, 2);
        coarse.values.assign(coarse.size(), 1.0);
        CHECK_THROWS_AS(extension(coarse, curve, Vec{500, 500, 500}), NumericalError);
    }
}

TEST_CASE("Lorentz norms") {
    SUBCASE("indicator") {
        auto fn = midpoint_grid(0.0, 1.0, 1000);
        fn.values.resize(fn.size());
        for (std::size_t i = 0; i < fn.size(); ++i) fn.values[i] = fn.t[i] < 0.3 ? 1.0 : 0.0;
        for (double q : {0.5, 1.0, 2.0, 4.0}) CHECK(lorentz_norm(fn, q, INFINITY) == doctest::Approx(std::pow(0.3, 1.0 / q)));
    }
    SUBCASE("L^{q,q} is L^q") {
        Rng rng(44);
        auto fn = gauss_grid(0.0, 2.0, 20);
        fn.values.resize(fn.size());
        for (auto& v : fn.values) v = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        for (double q : {1.0, 1.5, 3.0}) CHECK(lorentz_norm(fn, q, q) == doctest::Approx(fn.lp_norm(q)).epsilon(1e-12));
    }
    SUBCASE("1/w with w = t^(1/2) is weak L^2 and no better") {
        // |{t^(-1/2) > s}| = s^-2, so the L^{2,inf} quasi-norm is 1 and larger
        // exponents blow up. On the midpoint grid the k-th value is
        // ((k - 1/2)/n)^(-1/2) on a set of measure k/n, so the discrete
        // quasi-norm is sup_k sqrt(k / (k - 1/2)) = sqrt(2) for every n.
        Vec weak2, weak3;
        for (int n : {1000, 10000, 100000}) {
            auto fn = midpoint_grid(0.0, 1.0, n);
            fn.values.resize(fn.size());
            for (std::size_t i = 0; i < fn.size(); ++i) fn.values[i] = 1.0 / std::sqrt(fn.t[i]);
            weak2.push_back(lorentz_norm(fn, 2.0, INFINITY));
            weak3.push_back(lorentz_norm(fn, 3.0, INFINITY));
        }
        for (double v : weak2) CHECK(v == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
        CHECK(weak3[1] > 1.3 * weak3[0]);
        CHECK(weak3[2] > 1.3 * weak3[1]);
    }
}

TEST_CASE("empirical ratio") {
    const std::vector<NamedCurve> curves{{"moment", moment3()}};
    const std::vector<TestFunction> tests{TestFunction::gaussian({0, 0, 0}, 0.4)};
    RatioOptions o;
    o.weighted = false;
    const auto r = empirical_ratio(curves, tests, o);
    CHECK(r.status == CheckStatus::Pass);
    const double got = r.series.at("ratios").rows.at(0).at(2);
    const auto& g = tests[0];
    const double num = std::pow(simpson([&](double t) {
                                    const Vec p = evaluate_curve(curves[0].curve, t);
                                    return std::pow(std::abs(g.fourier(p)), o.Q);
                                }, 0.0, 1.0, 4000), 1.0 / o.Q);
    const double den = lattice_lp(g, 3.2, 80, o.P);
    CHECK(got == doctest::Approx(num / den).epsilon(1e-6));
    CHECK(std::isfinite(r.estimate));
}

TEST_CASE("dilation sweep keeps the ratio") {
    const HomogeneousCurve c({1, 2, 3}, 0.0, 1.0, {1.0, 0.5, 1.0 / 6.0});
    const auto g = TestFunction::gaussian({0.1, 0.0, 0.0}, 0.5);
    const double factors[] = {1.0, 2.0, 4.0, 8.0, 16.0};
    // D = 6, 1 - 1/P = 2/(d(d+1) Q) with P = 9/8 gives Q = 3/2
    const auto r = dilation_sweep(c, g, 9.0 / 8.0, 1.5, factors);
    CHECK(r.status == CheckStatus::Pass);
    CHECK(r.estimate <= 0.01);
}

TEST_CASE("homogeneous rescaling") {
    const HomogeneousCurve c({1, 2, 3});
    const auto g = TestFunction::gaussian({0.2, -0.1, 0.3}, 0.6);
    for (int k : {0, 1, 2}) {
        const auto r = homogeneous_rescale_check(c, k, g);
        CHECK(r.status == CheckStatus::Pass);
        CHECK(r.estimate <= 1e-9);
    }
    // (D+1)(1 - 1/p_d) - 1 > 0 iff D > d(d+1)/2
    for (double D : {4.0, 5.9, 6.1, 9.0}) {
        ExponentQuery q;
        q.d = 3;
        q.D = D;
        CHECK((exponent_calculator(q).homogeneous->scaled_exponent > 0) == (D > 6.0));
    }
}

TEST_CASE("converse scaling") {
    ConverseOptions o;
    o.alpha = 1.0 / 6.0;
    const auto f2 = TestFunction::gaussian({0, 0}, spd2(0.04, 0.0, 0.04));
    SUBCASE("unit cube") {
        const double lo[] = {0, 0}, hi[] = {1, 1};
        const auto r = converse_scaling_check(box(lo, hi), f2, 9.0 / 8.0, 1.5, o);
        CHECK(r.status == CheckStatus::Pass);
        const auto& w = r.witnesses.at(0);
        CHECK(w["gNorm"].get<double>() == doctest::Approx(w["scaledFhatNorm"].get<double>()).epsilon(1e-6));
    }
    SUBCASE("random parallelepipeds") {
        Rng rng(45);
        for (int rep = 0; rep < 4; ++rep) {
            const Parallelepiped E({rng.uniform(-1, 1), rng.uniform(-1, 1)},
                                   {{rng.uniform(0.5, 2), rng.uniform(-0.3, 0.3)}, {rng.uniform(-0.3, 0.3), rng.uniform(0.5, 2)}});
            const auto r = converse_scaling_check(E, f2, 9.0 / 8.0, 1.5, o);
            CHECK(r.status == CheckStatus::Pass);
            CHECK(r.estimate <= 1e-6);
            // |fhat| is a Gaussian with covariance S^-1 / (4 pi^2) and height (2 pi) sqrt(det S)
            const double height = 2 * pi * 0.04, s2 = 1.0 / (4 * pi * pi * 0.04), P = 9.0 / 8.0;
            const double fhat = height * std::pow(2 * pi * s2 / P, 1.0 / P);
            CHECK(r.witnesses.at(0)["gNorm"].get<double>() ==
                  doctest::Approx(std::pow(E.measure(), 1.0 / 9.0) * fhat).epsilon(1e-6));
        }
    }
    SUBCASE("preconditions") {
        const double lo[] = {0, 0}, hi[] = {1, 1};
        CHECK_THROWS_AS(converse_scaling_check(box(lo, hi), f2, 9.0 / 8.0, 2.0, o), ValidationError);
        const auto bb = TestFunction::box_bump({0, 0}, {1, 1});
        CHECK_THROWS_AS(converse_scaling_check(box(lo, hi), bb, 9.0 / 8.0, 1.5, o), CapabilityError);
    }
}
