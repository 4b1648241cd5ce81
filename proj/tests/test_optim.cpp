#include <cmath>

#include <gtest/gtest.h>

#include "fwdgrad/bounds.hpp"
#include "fwdgrad/optim.hpp"

using namespace fwdgrad;

namespace {

ScalarFunction half_squared_norm(std::size_t m) {
    return ScalarFunction(m, [](auto x) { return 0.5 * squared_norm(x); });
}

}  // namespace

TEST(FgdStep, ZeroGradientLeavesPointUnchanged) {
    const ScalarFunction f = half_squared_norm(3);
    DirectionSampler sampler(3, 1);
    EXPECT_EQ(fgd_step(f, Vector::Zero(3), 0.1, sampler), Vector::Zero(3));
}

TEST(FgdStep, ForcedDirection) {
    const ScalarFunction f = half_squared_norm(2);
    FixedDirection e1{Vector::Unit(2, 0)};
    const Vector next = fgd_step(f, Vector::Unit(2, 0), 0.5, e1);
    EXPECT_EQ(next, 0.5 * Vector::Unit(2, 0));
}

TEST(FgdStep, RejectsBadStep) {
    const ScalarFunction f = half_squared_norm(2);
    FixedDirection e1{Vector::Unit(2, 0)};
    EXPECT_THROW(fgd_step(f, Vector::Unit(2, 0), 0.0, e1), std::invalid_argument);
    EXPECT_THROW(fgd_step(f, Vector::Unit(2, 0), -1.0, e1), std::invalid_argument);
    EXPECT_THROW(fgd_step(f, Vector::Unit(2, 0), std::nan(""), e1), std::invalid_argument);
}

TEST(FgdStep, NonfiniteIterateRejected) {
    const ScalarFunction f(1, [](auto x) { return 1e300 * x[0] * x[0]; });
    FixedDirection u{Vector::Ones(1)};
    EXPECT_THROW(fgd_step(f, Vector::Constant(1, 1e10), 1.0, u), DivergenceError);
}

TEST(FgdStep, UnbiasedInMean) {
    const ScalarFunction f = half_squared_norm(2);
    DirectionSampler sampler(2, 7);
    const Vector x{{1.0, 0.0}};
    Vector mean = Vector::Zero(2);
    const int n = 100'000;
    for (int i = 0; i < n; ++i) {
        mean += fgd_step(f, x, 1.0 / 6.0, sampler);
    }
    mean /= n;
    EXPECT_NEAR(mean[0], 1.0 - 1.0 / 6.0, 0.01);
    EXPECT_NEAR(mean[1], 0.0, 0.01);
}

TEST(ProxFgdStep, ReducesToPlainStepWithZeroRegularizer) {
    const ScalarFunction f(3, [](auto x) { return sin(x[0]) + x[1] * x[2]; });
    const Vector x{{0.3, -0.2, 1.1}};
    FixedDirection u{Vector{{0.5, -1.0, 2.0}}};
    EXPECT_EQ(prox_fgd_step(f, Regularizer::zero(), x, 0.1, u), fgd_step(f, x, 0.1, u));
}

TEST(ProxFgdStep, PureShrinkage) {
    const ScalarFunction g(3, [](auto) { return Dual::constant(0.0); });
    DirectionSampler sampler(3, 2);
    const Vector x{{1.0, -0.05, 0.3}};
    const Vector next = prox_fgd_step(g, Regularizer::l1(0.5), x, 0.2, sampler);
    EXPECT_EQ(next, Regularizer::l1(0.5).prox(x, 0.2));
}

TEST(ProxFgdStep, ScalarCompositeConvergesInMean) {
    const ScalarFunction g(1, [](auto x) { return 0.5 * (x[0] - 1.0) * (x[0] - 1.0); });
    const Regularizer h = Regularizer::l1(0.5);
    FixedDirection exact{Vector::Ones(1)};
    EXPECT_DOUBLE_EQ(prox_fgd_step(g, h, Vector::Zero(1), 1.0, exact)[0], 0.5);

    DirectionSampler sampler(1, 3);
    double acc = 0.0;
    const int runs = 10'000;
    for (int r = 0; r < runs; ++r) {
        Vector x = Vector::Zero(1);
        for (int k = 0; k < 100; ++k) {
            x = prox_fgd_step(g, h, x, 0.1, sampler);
        }
        acc += x[0];
    }
    EXPECT_NEAR(acc / runs, 0.5, 0.05);
}

TEST(RunStatic, StartAtMinimizerGivesZeroGaps) {
    const ScalarFunction f = half_squared_norm(3);
    DirectionSampler sampler(3, 4);
    const TrackingTrace t = run_static(f, 0.0, Vector::Zero(3), 0.1, 10, sampler);
    ASSERT_EQ(t.size(), 11u);
    for (double g : t.gap) {
        EXPECT_EQ(g, 0.0);
    }
}

TEST(RunStatic, MeanGapFollowsStaticRate) {
    const std::size_t m = 2;
    const ScalarFunction f = half_squared_norm(m);
    const double alpha = default_alpha(1.0, m);
    const Vector x0 = Vector::Ones(m);
    const double gap0 = f.value(x0);
    double mean = 0.0;
    const int trials = 50;
    for (int t = 0; t < trials; ++t) {
        DirectionSampler sampler(m, derive_seed(1, static_cast<std::uint64_t>(t), Stream::directions));
        mean += run_static(f, 0.0, x0, alpha, 60, sampler).gap.back() / trials;
    }
    EXPECT_LE(mean, 1.5 * bound_static(60, 1.0, 1.0, m, gap0));
}

TEST(RunStatic, DivergenceDetected) {
    const ScalarFunction f = half_squared_norm(4);
    DirectionSampler sampler(4, 5);
    try {
        run_static(f, 0.0, Vector::Ones(4), 5.0, 200, sampler);
        FAIL() << "expected divergence";
    } catch (const DivergenceError& e) {
        EXPECT_GT(e.step(), 0u);
    }
}

TEST(RunOnline, StaticFamilyMatchesRunStatic) {
    const ScalarFunction f = half_squared_norm(4);
    StaticSequence seq({f, Regularizer::zero()}, 0.0);
    RunOptions opts;
    opts.step = 0.1;
    opts.steps = 30;
    DirectionSampler a(4, 6);
    DirectionSampler b(4, 6);
    const TrackingTrace online = run_online(seq, Vector::Ones(4), opts, a);
    const TrackingTrace fixed = run_static(f, 0.0, Vector::Ones(4), 0.1, 30, b);
    EXPECT_EQ(online.gap, fixed.gap);
}

TEST(RunOnline, RejectsBadOptions) {
    const ScalarFunction f = half_squared_norm(4);
    StaticSequence seq({f, Regularizer::zero()}, 0.0);
    DirectionSampler sampler(4, 6);
    RunOptions opts;
    opts.step = 0.1;
    opts.inner = 0;
    EXPECT_THROW(run_online(seq, Vector::Ones(4), opts, sampler), std::invalid_argument);
    opts.inner = 1;
    opts.smoothness = 1.0;
    opts.step = 2.0 / 8.0;
    EXPECT_THROW(run_online(seq, Vector::Ones(4), opts, sampler), std::invalid_argument);
    opts.step = 0.1;
    EXPECT_THROW(run_online(seq, Vector::Ones(3), opts, sampler), DimensionError);
    StaticSequence composite({f, Regularizer::l1(0.1)}, 0.0);
    EXPECT_THROW(run_online(composite, Vector::Ones(4), opts, sampler), std::invalid_argument);
}

TEST(RunOnline, TraceLayout) {
    DriftingLsqSequence seq(make_drifting_generator(6, 3, 3, 1));
    RunOptions opts;
    opts.step = 0.05;
    opts.steps = 12;
    opts.inner = 2;
    DirectionSampler sampler(6, 2);
    const TrackingTrace t = run_online(seq, Vector::Ones(6), opts, sampler);
    ASSERT_EQ(t.size(), 13u);
    EXPECT_EQ(t.dist_sq.size(), 13u);
    EXPECT_TRUE(std::isnan(t.drift[0]));
    EXPECT_TRUE(std::isnan(t.opt_drift[0]));
    for (std::size_t j = 1; j < t.size(); ++j) {
        EXPECT_TRUE(std::isfinite(t.drift[j]));
        EXPECT_EQ(t.opt_drift[j], 0.0);
    }
}

TEST(RunOnline, MoreInnerStepsTrackBetter) {
    auto late_gap = [](std::size_t inner) {
        double total = 0.0;
        for (std::uint64_t trial = 0; trial < 20; ++trial) {
            DriftingLsqGenerator gen = make_drifting_generator(20, 5, 5, 1);
            gen.reseed_noise(derive_seed(1, trial, Stream::drift));
            DriftingLsqSequence seq(std::move(gen));
            RunOptions opts;
            opts.step = default_alpha(1.0, 20);
            opts.steps = 400;
            opts.inner = inner;
            DirectionSampler sampler(20, derive_seed(1, trial, Stream::directions));
            const TrackingTrace t = run_online(seq, Vector::Ones(20), opts, sampler);
            for (std::size_t j = 360; j < t.size(); ++j) {
                total += t.gap[j];
            }
        }
        return total;
    };
    EXPECT_LT(late_gap(5), late_gap(1));
}

TEST(RunProxOnline, ZeroLambdaMatchesRunOnline) {
    RunOptions opts;
    opts.step = 0.05;
    opts.steps = 25;
    DriftingLsqSequence plain(make_drifting_generator(6, 3, 3, 2));
    DriftingLsqSequence prox(make_drifting_generator(6, 3, 3, 2), Regularizer::l1(0.0));
    DirectionSampler a(6, 3);
    DirectionSampler b(6, 3);
    const TrackingTrace t1 = run_online(plain, Vector::Ones(6), opts, a);
    const TrackingTrace t2 = run_prox_online(prox, Vector::Ones(6), opts, b);
    ASSERT_EQ(t1.size(), t2.size());
    for (std::size_t j = 0; j < t1.size(); ++j) {
        EXPECT_NEAR(t1.gap[j], t2.gap[j], 1e-9 * (1.0 + t1.gap[j]));
    }
}

TEST(RunProxOnline, DriftingL1PlateausWithoutDivergence) {
    DriftingLsqSequence seq(make_drifting_generator(6, 3, 3, 4), Regularizer::l1(0.1));
    RunOptions opts;
    opts.step = default_alpha(1.0, 6);
    opts.steps = 1500;
    opts.record_gradient_norm = true;
    DirectionSampler sampler(6, 5);
    const TrackingTrace t = run_prox_online(seq, Vector::Ones(6), opts, sampler);
    ASSERT_EQ(t.grad_norm.size(), t.size());
    for (double g : t.gap) {
        EXPECT_TRUE(std::isfinite(g));
        EXPECT_GE(g, -1e-8);
    }
}
