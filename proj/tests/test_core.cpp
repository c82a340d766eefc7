#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "rlab/errors.hpp"
#include "rlab/linalg.hpp"
#include "rlab/quadrature.hpp"
#include "rlab/report.hpp"
#include "rlab/sampling.hpp"

using namespace rlab;

namespace {

// cofactor expansion, independent of the elimination in determinant()
double cofactor_det(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n == 1) return m(0, 0);
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        Matrix minor(n - 1, n - 1);
        for (std::size_t i = 1; i < n; ++i)
            for (std::size_t k = 0, c = 0; k < n; ++k)
                if (k != j) minor(i - 1, c++) = m(i, k);
        s += ((j % 2) ? -1.0 : 1.0) * m(0, j) * cofactor_det(minor);
    }
    return s;
}

Matrix random_matrix(std::size_t n, Rng& rng) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = rng.uniform(-1.0, 1.0);
    return m;
}

}  // namespace

TEST_CASE("determinant matches cofactor expansion") {
    Rng rng(7);
    for (std::size_t n = 1; n <= 5; ++n) {
        for (int rep = 0; rep < 20; ++rep) {
            const Matrix m = random_matrix(n, rng);
            const double ref = cofactor_det(m);
            CHECK(determinant(m) == doctest::Approx(ref).epsilon(1e-12).scale(1.0));
        }
    }
}

TEST_CASE("determinant needs pivoting") {
    Matrix m(2, 2);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    CHECK(determinant(m) == -1.0);
}

TEST_CASE("inverse times matrix is identity") {
    Rng rng(11);
    for (int rep = 0; rep < 20; ++rep) {
        const Matrix m = random_matrix(4, rng);
        const Matrix p = m * inverse(m);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(p(i, j) == doctest::Approx(i == j ? 1.0 : 0.0).scale(1.0));
    }
    CHECK_THROWS_AS(inverse(Matrix(3, 3, 1.0)), NumericalError);
}

TEST_CASE("from_columns and transpose") {
    const Vec c0{1, 2}, c1{3, 4};
    const Vec cols[] = {c0, c1};
    const Matrix m = Matrix::from_columns(cols);
    CHECK(m(0, 1) == 3.0);
    CHECK(m(1, 0) == 2.0);
    CHECK(m.transpose()(0, 1) == 2.0);
    const Vec x{1, 1};
    const Vec y = m * std::span<const double>(x);
    CHECK(y[0] == 4.0);
    CHECK(y[1] == 6.0);
    CHECK(dot(c0, c1) == 11.0);
    CHECK(norm2(Vec{3, 4}) == 5.0);
}

TEST_CASE("Gauss-Legendre rules are exact to degree 2n-1") {
    for (int n : {1, 2, 5, 12, 40}) {
        const auto& r = gauss_legendre(n);
        REQUIRE(r.nodes.size() == static_cast<std::size_t>(n));
        for (int deg = 0; deg <= 2 * n - 1; ++deg) {
            double s = 0.0;
            for (int i = 0; i < n; ++i) s += r.weights[i] * std::pow(r.nodes[i], deg);
            const double exact = deg % 2 ? 0.0 : 2.0 / (deg + 1);
            CHECK(s == doctest::Approx(exact).epsilon(1e-13).scale(1.0));
        }
    }
}

TEST_CASE("adaptive integration") {
    const auto r = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(2.0).epsilon(1e-12));

    // a kink at 0.3 handled by a breakpoint
    const double bp[] = {0.0, 0.3, 1.0};
    const auto k = integrate_pieces([](double x) { return std::abs(x - 0.3); }, bp);
    CHECK(k.value == doctest::Approx(0.5 * (0.09 + 0.49)).epsilon(1e-14));

    CHECK(integrate([](double) { return 1.0; }, 1.0, 1.0).value == 0.0);

    const auto c = integrate<std::complex<double>>(
        [](double x) { return std::exp(std::complex<double>(0.0, x)); }, 0.0, std::numbers::pi);
    CHECK(c.value.real() == doctest::Approx(0.0).scale(1.0));
    CHECK(c.value.imag() == doctest::Approx(2.0));
}

TEST_CASE("box and iterated integrals") {
    const double lo[] = {0.0, 0.0}, hi[] = {1.0, 2.0};
    auto xy = [](std::span<const double> x) { return x[0] * x[1]; };
    for (auto mode : {IteratedMode::Fixed, IteratedMode::Adaptive})
        CHECK(integrate_box(xy, lo, hi, mode).value == doctest::Approx(1.0));

    // volume of the standard 3-simplex
    LimitsFn simplex = [](std::size_t, std::span<const double> outer, std::vector<double>& cuts) {
        double used = 0.0;
        for (double v : outer) used += v;
        cuts = {0.0, std::max(0.0, 1.0 - used)};
    };
    auto one = [](std::span<const double>) { return 1.0; };
    CHECK(integrate_iterated(one, 3, simplex, IteratedMode::Fixed).value == doctest::Approx(1.0 / 6.0));
    CHECK(integrate_iterated(one, 3, simplex, IteratedMode::Adaptive).value == doctest::Approx(1.0 / 6.0));
}

TEST_CASE("cuts are sorted, clipped and deduplicated") {
    const auto c = make_cuts(0.0, 1.0, {0.5, -1.0, 0.5, 2.0, 0.25});
    REQUIRE(c.size() == 4);
    CHECK(c[0] == 0.0);
    CHECK(c[1] == 0.25);
    CHECK(c[2] == 0.5);
    CHECK(c[3] == 1.0);
}

TEST_CASE("rng streams are reproducible and labelled") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
    CHECK(derive_seed(1, "x") == derive_seed(1, "x"));
    CHECK(derive_seed(1, "x") != derive_seed(1, "y"));
    CHECK(derive_seed(1, std::uint64_t{0}) != derive_seed(1, std::uint64_t{1}));
    Rng u(3);
    for (int i = 0; i < 1000; ++i) {
        const double x = u.uniform();
        CHECK((x >= 0.0 && x < 1.0));
        CHECK(u.index(7) < 7);
    }
}

TEST_CASE("latin hypercube puts one point in each stratum") {
    Rng rng(5);
    const double lo[] = {0.0, -1.0}, hi[] = {1.0, 1.0};
    const std::size_t n = 16;
    const auto pts = latin_hypercube(n, lo, hi, rng);
    REQUIRE(pts.size() == n);
    for (std::size_t axis = 0; axis < 2; ++axis) {
        std::vector<int> hits(n, 0);
        for (const auto& p : pts) {
            const double u = (p[axis] - lo[axis]) / (hi[axis] - lo[axis]);
            hits[std::min(n - 1, static_cast<std::size_t>(u * n))]++;
        }
        for (int h : hits) CHECK(h == 1);
    }
}

TEST_CASE("minimizers") {
    const double lo[] = {-2.0, -2.0}, hi[] = {2.0, 2.0};
    auto q = [](std::span<const double> x) { return (x[0] - 0.3) * (x[0] - 0.3) + 2 * (x[1] + 0.7) * (x[1] + 0.7); };
    const auto m = compass_minimize(q, {1.0, 1.0}, lo, hi);
    CHECK(m.x[0] == doctest::Approx(0.3).epsilon(1e-5));
    CHECK(m.x[1] == doctest::Approx(-0.7).epsilon(1e-5));
    const auto g = golden_minimize([](double x) { return std::cos(x); }, 2.0, 4.0);
    CHECK(g.x[0] == doctest::Approx(std::numbers::pi).epsilon(1e-8));
}

TEST_CASE("report json round trip") {
    CheckReport r;
    r.check_id = "c1";
    r.operation = "op";
    r.parameters = {{"d", 3}};
    r.estimate = 0.25;
    r.decide(true, 1.0);
    r.tolerance = 1e-9;
    r.note("hello");
    r.witnesses.push_back({{"t", 0.5}});
    r.series["s"].columns = {"a", "b"};
    r.series["s"].add({1.0, 2.0});
    r.timing_ms = 12.0;

    const Json j = to_json(r);
    CHECK_FALSE(j.contains("timingMs"));
    const auto back = report_from_json(j);
    CHECK(back.check_id == "c1");
    CHECK(back.status == CheckStatus::Pass);
    CHECK(back.bound.value() == 1.0);
    CHECK(back.series.at("s").rows.at(0).at(1) == 2.0);
    CHECK(to_json(back).dump() == j.dump());

    for (auto s : {CheckStatus::Pass, CheckStatus::Fail, CheckStatus::Inconclusive, CheckStatus::Error})
        CHECK(check_status_from_string(to_string(s)) == s);
}

TEST_CASE("series rows must match the header") {
    Series s;
    s.columns = {"x", "y"};
    CHECK_THROWS(s.add({1.0}));
    s.add({1.0, 0.5});
    std::ostringstream os;
    s.write_csv(os);
    CHECK(os.str().rfind("x,y\n", 0) == 0);
}

TEST_CASE("config error keeps its path") {
    const ConfigError e("checks[2].operation", "unknown");
    CHECK(e.path() == "checks[2].operation");
    CHECK(std::string(e.what()).find("unknown") != std::string::npos);
}
