#pragma once

// Seeded pseudo-random streams.
//
// Uniform bits come from std::mt19937_64. Standard normals use the Box-Muller
// transform: each pair of uniforms (u1, u2) produces r*cos(t) then r*sin(t),
// consumed in that order. Substream seeds are a splitmix64 mix of
// (base seed, trial index, stream tag), so a trial's draws do not depend on
// which thread runs it or in what order.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>

#include <Eigen/Dense>

namespace fwdgrad {

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Roles a substream can play inside one trial.
enum class Stream : std::uint64_t {
    instance = 0,    // problem data (U, V, b0)
    start = 1,       // shared starting point
    drift = 2,       // time-variation noise
    directions = 3,  // forward-gradient directions
    sampling = 4,    // diagnostic sample points
};

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial, std::uint64_t tag) {
    return mix64(mix64(mix64(base) ^ trial) ^ tag);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t trial, Stream stream) {
    return derive_seed(base, trial, static_cast<std::uint64_t>(stream));
}

class NormalStream {
public:
    explicit NormalStream(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double normal() {
        if (spare_) {
            const double z = *spare_;
            spare_.reset();
            return z;
        }
        const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        return radius * std::cos(angle);
    }

    Eigen::VectorXd normal_vector(Eigen::Index n) {
        Eigen::VectorXd v(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            v[i] = normal();
        }
        return v;
    }

    Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols) {
        Eigen::MatrixXd a(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) {
                a(i, j) = normal();
            }
        }
        return a;
    }

private:
    std::mt19937_64 engine_;
    std::optional<double> spare_;
};

}  // namespace fwdgrad
