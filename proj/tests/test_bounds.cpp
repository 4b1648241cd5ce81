#include <cmath>

#include <gtest/gtest.h>

#include "fwdgrad/bounds.hpp"
#include "fwdgrad/problems.hpp"

using namespace fwdgrad;

TEST(GammaOfAlpha, Examples) {
    const double beta = 2.0;
    const std::size_t m = 10;
    const double alpha = 1.0 / (beta * (m + 4));
    EXPECT_DOUBLE_EQ(gamma_of_alpha(alpha, beta, m), 1.0 / (2.0 * beta * (m + 4)));
    EXPECT_DOUBLE_EQ(gamma_of_alpha(0.2, 1.0, 1), 0.1);
    double previous = gamma_of_alpha(1e-3, 1.0, 1);
    for (double a : {1e-4, 1e-6, 1e-9}) {
        const double g = gamma_of_alpha(a, 1.0, 1);
        EXPECT_GT(g, 0.0);
        EXPECT_LT(g, previous);
        EXPECT_LE(g, a);
        previous = g;
    }
    EXPECT_THROW(gamma_of_alpha(0.4, 1.0, 1), BoundDomainError);
    EXPECT_THROW(gamma_of_alpha(0.0, 1.0, 1), BoundDomainError);
}

TEST(BoundStatic, Examples) {
    EXPECT_EQ(bound_static(0, 0.5, 1.0, 3, 2.5), 2.5);
    EXPECT_DOUBLE_EQ(bound_static(1, 1.0, 1.0, 1, 1.0), 0.8);
    for (std::size_t k : {0u, 1u, 10u, 1000u}) {
        EXPECT_EQ(bound_static(k, 0.0, 1.0, 5, 3.0), 3.0);
    }
    const double q = static_rate(0.3, 1.0, 7);
    for (std::size_t k = 1; k < 50; ++k) {
        EXPECT_EQ(bound_static(k, 0.3, 1.0, 7, 2.0), bound_static(k - 1, 0.3, 1.0, 7, 2.0) * q);
    }
    EXPECT_THROW(static_rate(2.0, 1.0, 1), BoundDomainError);
}

namespace {

BoundInputs figure_inputs() {
    BoundInputs in;
    in.mu = 0.01;
    in.beta = 1.0;
    in.m = 60;
    in.alpha = 1.0 / 64.0;
    in.ell = 1;
    in.eta0 = 1e-4;
    in.eta_star = 0.0;
    in.gap0 = 1.0;
    return in;
}

}  // namespace

TEST(BoundTracking, FigureConstants) {
    const BoundInputs in = figure_inputs();
    const double gamma = 1.0 / 128.0;
    EXPECT_DOUBLE_EQ(gamma_of_alpha(in.alpha, in.beta, in.m), gamma);
    EXPECT_DOUBLE_EQ(default_gamma(in), gamma);
    EXPECT_NEAR(tracking_limsup(in, gamma), 128.0, 1e-9);
    for (std::size_t k : {0u, 1u, 100u, 2000u}) {
        EXPECT_NEAR(tracking_transient(k, in, gamma), 200.0 * std::pow(1.0 - 0.00015625, static_cast<double>(k)), 1e-9);
        EXPECT_NEAR(bound_tracking(k, in, gamma), tracking_limsup(in, gamma) + tracking_transient(k, in, gamma), 1e-12);
    }
}

TEST(BoundTracking, ZeroDriftZeroGap) {
    BoundInputs in = figure_inputs();
    in.eta0 = 0.0;
    in.gap0 = 0.0;
    for (std::size_t k : {0u, 5u, 500u}) {
        EXPECT_EQ(bound_tracking(k, in, 1.0 / 128.0), 0.0);
    }
}

TEST(BoundTracking, DoublingEllHalvesAsymptote) {
    BoundInputs in = figure_inputs();
    const double gamma = 1.0 / 128.0;
    const double one = tracking_limsup(in, gamma);
    in.ell = 2;
    EXPECT_NEAR(tracking_limsup(in, gamma), 0.5 * one, 1e-12);
}

TEST(BoundTracking, GammaRange) {
    BoundInputs in = figure_inputs();
    EXPECT_THROW(tracking_limsup(in, 0.0), BoundDomainError);
    EXPECT_THROW(tracking_limsup(in, 1.0 / 64.0), BoundDomainError);
    in.mu = 2.0;
    EXPECT_THROW(tracking_limsup(in, 1e-3), BoundDomainError);
    in = figure_inputs();
    in.alpha = 0.5;
    EXPECT_THROW(bound_tracking(0, in, 1e-3), BoundDomainError);
    in = figure_inputs();
    in.mu = 1.0;
    in.ell = 80;
    EXPECT_NEAR(gamma_tilde(in), 1.0 / 160.0, 1e-15);
    EXPECT_LT(default_gamma(in), gamma_tilde(in));
}

TEST(BoundProx, Examples) {
    BoundInputs in;
    in.mu = 0.5;
    in.beta = 1.0;
    in.ell = 1;
    in.xi = 0.5;
    in.m = 1;
    in.eta0 = 0.1;
    in.eta_star = 0.0;
    in.gap0 = 1.0;
    // G1 = 2 c1 (c1 + c2) / beta = 0.2 with c1 = 0.2, c2 = 0.3, so the asymptote is
    // 8 (0.1 + 2 * 0.2 * 2) = 7.2.
    in.c1 = 0.2;
    in.c2 = 0.3;
    EXPECT_NEAR(prox_noise_constant(in), 0.2, 1e-15);
    for (std::size_t k : {0u, 1u, 2u, 7u}) {
        EXPECT_NEAR(bound_prox_tracking(k, in), 7.2 + 4.0 * std::pow(0.5, static_cast<double>(k)), 1e-12);
    }
    // With 2 G1 = 0.2 the asymptote is 8 (0.1 + 0.2 * 2) = 4.
    BoundInputs half = in;
    half.c1 = 0.1;
    half.c2 = 0.4;
    EXPECT_NEAR(prox_noise_constant(half), 0.1, 1e-15);
    for (std::size_t k : {0u, 1u, 2u, 7u}) {
        EXPECT_NEAR(bound_prox_tracking(k, half), 4.0 + 4.0 * std::pow(0.5, static_cast<double>(k)), 1e-12);
    }
    EXPECT_NEAR(bound_prox_tracking(200, in), prox_tracking_asymptotic(in), 1e-12);

    BoundInputs quiet = in;
    quiet.eta0 = 0.0;
    quiet.c1 = 0.0;
    for (std::size_t k : {0u, 3u}) {
        EXPECT_NEAR(bound_prox_tracking(k, quiet), (2.0 / 0.5) * std::pow(0.5, static_cast<double>(k)), 1e-15);
    }
    in.xi = 0.0;
    EXPECT_THROW(bound_prox_tracking(0, in), BoundDomainError);
}

TEST(ComputeDh, Examples) {
    const Regularizer zero = Regularizer::zero();
    const Vector x{{1.0, -2.0}};
    const Vector grad{{0.3, 0.4}};
    EXPECT_NEAR(compute_Dh(grad, zero, x, 2.0), grad.squaredNorm(), 1e-15);

    const ScalarFunction g(1, [](auto y) { return 0.5 * (y[0] - 1.0) * (y[0] - 1.0); });
    const Regularizer h = Regularizer::l1(0.5);
    EXPECT_NEAR(compute_Dh(g, h, Vector::Zero(1), 1.0), 0.25, 1e-15);
    EXPECT_NEAR(compute_Dh(g, h, Vector::Constant(1, 0.5), 1.0), 0.0, 1e-15);
}

TEST(ProxPlRatio, Examples) {
    NormalStream s(3);
    const LinearLsqInstance inst{s.normal_matrix(3, 6), Vector()};
    LinearLsqInstance consistent = inst;
    consistent.b = inst.a * s.normal_vector(6);
    const LsqConstants c = lsq_constants(consistent);
    for (int rep = 0; rep < 100; ++rep) {
        const Vector x = s.normal_vector(6);
        const double ratio = prox_pl_ratio(consistent.gradient(x), Regularizer::zero(), x, c.beta, consistent.loss(x));
        EXPECT_GE(ratio, c.mu * (1.0 - 1e-10));
    }
    const double mu = 1.7;
    const Vector x{{0.8}};
    EXPECT_NEAR(prox_pl_ratio(Vector{{mu * 0.8}}, Regularizer::zero(), x, mu, 0.5 * mu * 0.64), mu, 1e-14);
    EXPECT_THROW(prox_pl_ratio(Vector{{0.0}}, Regularizer::zero(), x, 1.0, 0.0), std::exception);
}

TEST(PathRadius, Examples) {
    EXPECT_NEAR(path_radius(1.0, 1.0, 0.5), 1.0, 1e-15);
    EXPECT_NEAR(path_radius(0.75, 1.0, 0.5), 2.0, 1e-15);
    EXPECT_EQ(path_radius(0.3, 1.0, 0.0), 0.0);
    EXPECT_THROW(path_radius(2.0, 1.0, 1.0), BoundDomainError);
}
