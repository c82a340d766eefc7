#include "rlab/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rlab {

namespace {

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t parent, std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(parent >> (8 * i));
    h = fnv1a(h, bytes, 8);
    h = fnv1a(h, label.data(), label.size());
    return mix(h);
}

std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    return mix(mix(parent) ^ (index * 0xd1342543de82ef95ULL + 1));
}

std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::span<const double> lo,
                                                 std::span<const double> hi, Rng& rng) {
    const std::size_t dim = lo.size();
    std::vector<std::vector<double>> pts(n, std::vector<double>(dim));
    std::vector<std::size_t> perm(n);
    for (std::size_t k = 0; k < dim; ++k) {
        std::iota(perm.begin(), perm.end(), 0);
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.index(i)]);
        for (std::size_t i = 0; i < n; ++i) {
            const double u = (static_cast<double>(perm[i]) + rng.uniform()) / static_cast<double>(n);
            pts[i][k] = lo[k] + (hi[k] - lo[k]) * u;
        }
    }
    return pts;
}

MinimizeResult compass_minimize(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> x0, std::span<const double> lo,
                                std::span<const double> hi, double step, double min_step,
                                long max_evaluations) {
    MinimizeResult r;
    r.x = std::move(x0);
    r.value = f(r.x);
    r.evaluations = 1;
    std::vector<double> trial(r.x.size());
    while (step >= min_step && r.evaluations < max_evaluations) {
        bool improved = false;
        for (std::size_t k = 0; k < r.x.size() && r.evaluations < max_evaluations; ++k) {
            for (double dir : {1.0, -1.0}) {
                trial = r.x;
                trial[k] = std::clamp(r.x[k] + dir * step * (hi[k] - lo[k]), lo[k], hi[k]);
                if (trial[k] == r.x[k]) continue;
                const double v = f(trial);
                ++r.evaluations;
                if (v < r.value) {
                    r.value = v;
                    r.x = trial;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return r;
}

MinimizeResult golden_minimize(const std::function<double(double)>& f, double a, double b,
                               double tol, int max_iter) {
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - g * (b - a), d = a + g * (b - a);
    double fc = f(c), fd = f(d);
    long evals = 2;
    for (int i = 0; i < max_iter && (b - a) > tol; ++i) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
        ++evals;
    }
    MinimizeResult r;
    r.x = {fc < fd ? c : d};
    r.value = std::min(fc, fd);
    r.evaluations = evals;
    return r;
}

}  // namespace rlab
