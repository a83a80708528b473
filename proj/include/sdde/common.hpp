#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sdde {

/// Thrown when a runtime check of a structural invariant fails (variation
/// caps, lag ranges, ignoring-window consistency).
class InvariantViolation : public std::runtime_error {
public:
    explicit InvariantViolation(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown by the time stepper when the per-step fixed point does not
/// converge within the configured iteration budget.
class StepFailure : public std::runtime_error {
public:
    StepFailure(const std::string& what, double t) : std::runtime_error(what), time(t) {}
    double time = 0.0;
};

constexpr double kPi = 3.14159265358979323846;

/// Deterministic 64-bit generator (splitmix64). The standard <random>
/// distributions are implementation-defined; this keeps every sampled
/// number reproducible from the seed alone.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller (no cached spare, stateless apart
    /// from the counter).
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    /// Derive an independent stream for a named sub-task.
    Rng fork(const std::string& tag) const {
        std::uint64_t h = 1469598103934665603ull;  // FNV-1a
        for (unsigned char c : tag) {
            h ^= c;
            h *= 1099511628211ull;
        }
        return Rng(state_ ^ h);
    }

private:
    std::uint64_t state_;
};

/// Standard ternary Cantor function ("devil's staircase") on [0, 1].
/// Nondecreasing, continuous, c(0)=0, c(1)=1, constant on the gaps.
inline double cantor_function(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double value = 0.0;
    double scale = 0.5;
    for (int i = 0; i < 64 && x > 0.0; ++i) {
        x *= 3.0;
        if (x >= 2.0) {
            value += scale;
            x -= 2.0;
        } else if (x >= 1.0) {
            return value + scale;  // landed in a removed middle third
        }
        scale *= 0.5;
    }
    return value;
}

/// Logistic sigmoid, used by the built-in lag functionals.
inline double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace sdde
