#pragma once

// Forward-gradient estimator v(x, u) = <grad f(x), u> u with u ~ N(0, I_m).
//
// Moment identities for Gaussian directions:
//   E v = grad f(x)
//   E |v|^2 = (m + 2) |grad f(x)|^2  <=  (m + 4) |grad f(x)|^2

#include <cstddef>
#include <cstdint>
#include <utility>

#include "fwdgrad/dual.hpp"
#include "fwdgrad/random.hpp"

namespace fwdgrad {

/// Single-owner stream of i.i.d. standard-normal directions in R^m.
class DirectionSampler {
public:
    DirectionSampler(std::size_t dimension, std::uint64_t seed) : dimension_(dimension), stream_(seed) {
        if (dimension_ == 0) {
            throw DimensionError("DirectionSampler dimension must be at least 1");
        }
    }

    std::size_t dimension() const { return dimension_; }

    Vector sample() { return stream_.normal_vector(static_cast<Eigen::Index>(dimension_)); }

private:
    std::size_t dimension_;
    NormalStream stream_;
};

inline Vector sample_direction(DirectionSampler& sampler) { return sampler.sample(); }

struct ForwardGradientSample {
    Vector direction;
    double dirderiv = 0.0;
    Vector estimate;  // dirderiv * direction, componentwise
};

inline ForwardGradientSample forward_gradient(const ScalarFunction& f, const Vector& x, Vector u) {
    const double d = directional_derivative(f, x, u).deriv;
    Vector estimate = d * u;
    return {std::move(u), d, std::move(estimate)};
}

struct MomentDiagnostics {
    Vector mean_estimate;
    double second_moment = 0.0;  // sample mean of |v|^2
    std::size_t samples = 0;
};

inline MomentDiagnostics moment_diagnostics(const ScalarFunction& f, const Vector& x, std::size_t n_samples,
                                            DirectionSampler& sampler) {
    if (n_samples == 0) {
        throw std::invalid_argument("moment_diagnostics needs at least one sample");
    }
    if (sampler.dimension() != f.dimension()) {
        throw DimensionError("sampler dimension does not match function dimension");
    }
    Vector sum = Vector::Zero(static_cast<Eigen::Index>(f.dimension()));
    double sum_sq = 0.0;
    for (std::size_t s = 0; s < n_samples; ++s) {
        const ForwardGradientSample v = forward_gradient(f, x, sampler.sample());
        sum += v.estimate;
        sum_sq += v.estimate.squaredNorm();
    }
    const double n = static_cast<double>(n_samples);
    return {sum / n, sum_sq / n, n_samples};
}

/// Monte-Carlo moments compared against an exact gradient.
struct MomentReport {
    double relative_error = 0.0;  // |mean - g| / |g|
    double second_moment_ratio = 0.0;  // E|v|^2 / |g|^2
    double gaussian_exact = 0.0;  // m + 2
    double upper_bound = 0.0;  // m + 4
    bool within_upper_bound = false;
};

inline MomentReport compare_moments(const MomentDiagnostics& diag, const Vector& exact_gradient) {
    const double g2 = exact_gradient.squaredNorm();
    if (!(g2 > 0.0)) {
        throw DomainError("moment comparison needs a nonzero gradient");
    }
    const double m = static_cast<double>(exact_gradient.size());
    MomentReport r;
    r.relative_error = (diag.mean_estimate - exact_gradient).norm() / std::sqrt(g2);
    r.second_moment_ratio = diag.second_moment / g2;
    r.gaussian_exact = m + 2.0;
    r.upper_bound = m + 4.0;
    r.within_upper_bound = r.second_moment_ratio <= r.upper_bound;
    return r;
}

}  // namespace fwdgrad
