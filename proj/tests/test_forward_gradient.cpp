#include <cmath>

#include <gtest/gtest.h>

#include "fwdgrad/forward_gradient.hpp"
#include "fwdgrad/random.hpp"

using namespace fwdgrad;

TEST(Random, DeriveSeedSeparatesStreams) {
    EXPECT_EQ(derive_seed(1, 0, Stream::directions), derive_seed(1, 0, Stream::directions));
    EXPECT_NE(derive_seed(1, 0, Stream::directions), derive_seed(1, 1, Stream::directions));
    EXPECT_NE(derive_seed(1, 0, Stream::directions), derive_seed(1, 0, Stream::drift));
    EXPECT_NE(derive_seed(1, 0, Stream::directions), derive_seed(2, 0, Stream::directions));
}

TEST(Random, UniformInUnitInterval) {
    NormalStream s(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(DirectionSampler, SameSeedSameSequence) {
    DirectionSampler a(5, 42);
    DirectionSampler b(5, 42);
    for (int i = 0; i < 10; ++i) {
        EXPECT_EQ(a.sample(), b.sample());
    }
    DirectionSampler c(5, 43);
    EXPECT_NE(DirectionSampler(5, 42).sample(), c.sample());
}

TEST(DirectionSampler, ScalarMean) {
    DirectionSampler s(1, 11);
    double sum = 0.0;
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        sum += s.sample()[0];
    }
    EXPECT_LE(std::abs(sum / n), 0.005);
}

TEST(DirectionSampler, CovarianceIsIdentity) {
    DirectionSampler s(3, 12);
    Matrix acc = Matrix::Zero(3, 3);
    Vector mean = Vector::Zero(3);
    const int n = 1'000'000;
    for (int i = 0; i < n; ++i) {
        const Vector u = s.sample();
        acc += u * u.transpose();
        mean += u;
    }
    mean /= n;
    const Matrix cov = acc / n - mean * mean.transpose();
    EXPECT_LE((cov - Matrix::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.01);
}

TEST(ForwardGradient, Examples) {
    const ScalarFunction half_sq(3, [](auto x) { return 0.5 * squared_norm(x); });
    const Vector e1 = Vector::Unit(3, 0);
    EXPECT_EQ(forward_gradient(half_sq, e1, e1).estimate, e1);

    const ScalarFunction constant(3, [](auto) { return Dual::constant(2.0); });
    EXPECT_EQ(forward_gradient(constant, Vector{{1.0, 2.0, 3.0}}, Vector{{0.3, -1.0, 2.0}}).estimate, Vector::Zero(3));

    const ScalarFunction f(2, [](auto x) { return x[0] * x[0] + 2.0 * x[1]; });
    const ForwardGradientSample v = forward_gradient(f, Vector{{1.0, 1.0}}, Vector{{1.0, -1.0}});
    EXPECT_DOUBLE_EQ(v.dirderiv, 0.0);
    EXPECT_EQ(v.estimate, Vector::Zero(2));
}

TEST(ForwardGradient, EstimateIsDerivativeTimesDirection) {
    const ScalarFunction f(2, [](auto x) { return x[0] * x[1] + sin(x[1]); });
    const Vector x{{0.4, -1.2}};
    const Vector u{{0.7, 1.9}};
    const ForwardGradientSample v = forward_gradient(f, x, u);
    const Vector grad{{x[1], x[0] + std::cos(x[1])}};
    EXPECT_NEAR(v.dirderiv, grad.dot(u), 1e-14);
    EXPECT_EQ(v.direction, u);
    EXPECT_LE((v.estimate - grad.dot(u) * u).norm(), 1e-14);
}

namespace {

ScalarFunction linear_function(const Vector& g) {
    return ScalarFunction(static_cast<std::size_t>(g.size()), [g](std::span<const Dual> x) {
        Dual acc = Dual::constant(0.0);
        for (std::size_t i = 0; i < x.size(); ++i) {
            acc += g[static_cast<Eigen::Index>(i)] * x[i];
        }
        return acc;
    });
}

}  // namespace

TEST(MomentDiagnostics, LinearFunctionMoments) {
    const std::size_t m = 60;
    NormalStream gs(77);
    const Vector g = gs.normal_vector(m);
    const ScalarFunction f = linear_function(g);
    DirectionSampler sampler(m, 78);
    const MomentDiagnostics d = moment_diagnostics(f, Vector::Zero(m), 200'000, sampler);
    const MomentReport r = compare_moments(d, g);
    EXPECT_LE(r.relative_error, 0.02);
    EXPECT_GE(r.second_moment_ratio, m + 1.5);
    EXPECT_LE(r.second_moment_ratio, m + 2.5);
    EXPECT_TRUE(r.within_upper_bound);
    EXPECT_DOUBLE_EQ(r.gaussian_exact, 62.0);
    EXPECT_DOUBLE_EQ(r.upper_bound, 64.0);
}

TEST(MomentDiagnostics, ZeroGradientIsExactlyZero) {
    const ScalarFunction f(4, [](auto x) { return 0.5 * squared_norm(x); });
    DirectionSampler sampler(4, 1);
    const MomentDiagnostics d = moment_diagnostics(f, Vector::Zero(4), 1000, sampler);
    EXPECT_EQ(d.mean_estimate, Vector::Zero(4));
    EXPECT_EQ(d.second_moment, 0.0);
    EXPECT_THROW(compare_moments(d, Vector::Zero(4)), DomainError);
}

TEST(MomentDiagnostics, RejectsBadArguments) {
    const ScalarFunction f(4, [](auto x) { return 0.5 * squared_norm(x); });
    DirectionSampler wrong(3, 1);
    EXPECT_THROW(moment_diagnostics(f, Vector::Zero(4), 10, wrong), DimensionError);
    DirectionSampler right(4, 1);
    EXPECT_THROW(moment_diagnostics(f, Vector::Zero(4), 0, right), std::invalid_argument);
}
