#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace rlab {

// mt19937_64 with a fixed double conversion so sample streams are identical
// across standard libraries (std::uniform_real_distribution is not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t next() { return engine_(); }
    // index in [0, n)
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(uniform() * n) % n; }

private:
    std::mt19937_64 engine_;
};

// Seed for an independent substream, derived from a parent seed and a label.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

// n points in the box [lo, hi], one per stratum along every axis.
std::vector<std::vector<double>> latin_hypercube(std::size_t n, std::span<const double> lo,
                                                 std::span<const double> hi, Rng& rng);

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    long evaluations = 0;
};

// Compass search inside [lo, hi] started from x0 with initial step
// `step` (fraction of each box side), halved until below `min_step`.
MinimizeResult compass_minimize(const std::function<double(std::span<const double>)>& f,
                                std::vector<double> x0, std::span<const double> lo,
                                std::span<const double> hi, double step = 0.1,
                                double min_step = 1e-6, long max_evaluations = 2000);

// Golden-section search for the minimum of a unimodal f on [a, b].
MinimizeResult golden_minimize(const std::function<double(double)>& f, double a, double b,
                               double tol = 1e-10, int max_iter = 200);

}  // namespace rlab
