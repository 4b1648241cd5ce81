#pragma once

/**
 * @file problems.hpp
 * @brief Objective instances: static and drifting least squares, l1 composites.
 *
 * A time-varying problem is an ObjectiveSequence: for each time index k it
 * hands out a composite objective L_k = g_k + h_k, its optimal value L_k^*,
 * and (when computable) the distance from a point to the minimizer set.
 *
 * The drifting least-squares family builds A_k = U Sigma_k V^T with fixed
 * orthonormal U (n x r), V (m x r), Sigma_{k+1} = Sigma_k - sigma_step I_r, and
 * a right-hand side following the random walk b_{k+1} = b_k + db_k,
 * db_k ~ N(0, b_noise_var I_n).
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fwdgrad/dual.hpp"
#include "fwdgrad/prox.hpp"
#include "fwdgrad/random.hpp"

namespace fwdgrad {

/// The drifting generator was advanced past the point where Sigma_k stays positive.
class HorizonExceeded : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/// dist_to_solution_set was asked about a system with no exact solution.
class InconsistentSystem : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Loss 1/2 |A x - b|^2.
struct LinearLsqInstance {
    Matrix a;
    Vector b;

    Eigen::Index rows() const { return a.rows(); }
    Eigen::Index cols() const { return a.cols(); }

    Vector residual(const Vector& x) const { return a * x - b; }
    double loss(const Vector& x) const { return 0.5 * residual(x).squaredNorm(); }
    Vector gradient(const Vector& x) const { return a.transpose() * residual(x); }

    /// The loss as a dual-number function (affine map then squared norm).
    ScalarFunction objective() const {
        Matrix a_copy = a;
        Vector neg_b = -b;
        return ScalarFunction(static_cast<std::size_t>(a.cols()),
                              [a_copy = std::move(a_copy), neg_b = std::move(neg_b)](std::span<const Dual> x) {
                                  const std::vector<Dual> r = affine(a_copy, x, neg_b);
                                  return 0.5 * squared_norm(r);
                              });
    }
};

struct LsqConstants {
    double mu = 0.0;    // lambda_min(A A^T)
    double beta = 0.0;  // sigma_max(A)^2
    bool pl_degenerate = false;  // mu == 0: A lacks full row rank
};

/// Smoothness and PL constants of 1/2|Ax-b|^2. The tangent kernel of a linear map is
/// the constant A A^T, so mu is its smallest eigenvalue.
inline LsqConstants lsq_constants(const LinearLsqInstance& inst) {
    if (inst.a.size() == 0 || inst.a.isZero(0.0)) {
        throw std::invalid_argument("lsq_constants needs a nonzero matrix");
    }
    const Eigen::JacobiSVD<Matrix> svd(inst.a);
    const double sigma_max = svd.singularValues()[0];
    LsqConstants c;
    c.beta = sigma_max * sigma_max;
    const Matrix kernel = inst.a * inst.a.transpose();
    const Eigen::SelfAdjointEigenSolver<Matrix> eig(kernel, Eigen::EigenvaluesOnly);
    c.mu = std::max(eig.eigenvalues().minCoeff(), 0.0);
    if (c.mu <= 1e-12 * c.beta) {
        c.mu = 0.0;
        c.pl_degenerate = true;
    }
    return c;
}

/// Euclidean distance from x to {x : A x = b}, i.e. |A^+ (A x - b)|.
inline double dist_to_solution_set(const LinearLsqInstance& inst, const Vector& x) {
    if (x.size() != inst.cols()) {
        throw DimensionError("dist_to_solution_set: x has length " + std::to_string(x.size()) + ", expected " +
                             std::to_string(inst.cols()));
    }
    const Eigen::JacobiSVD<Matrix> svd(inst.a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& s = svd.singularValues();
    const double cutoff = 1e-12 * (s.size() > 0 ? s[0] : 0.0);
    Vector ut_r = svd.matrixU().transpose() * inst.residual(x);
    Vector ut_b = svd.matrixU().transpose() * inst.b;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] > cutoff) {
            ut_r[i] /= s[i];
        } else {
            ut_r[i] = 0.0;
            ut_b[i] = 0.0;
        }
    }
    // Consistency: b must lie in the range of A.
    const Vector b_in_range = svd.matrixU() * ut_b;
    if ((inst.b - b_in_range).norm() > 1e-9 * (1.0 + inst.b.norm())) {
        throw InconsistentSystem("dist_to_solution_set: A x = b has no solution");
    }
    return (svd.matrixV() * ut_r).norm();
}

/// L(x) = g(x) + h(x) at one time index.
struct CompositeObjective {
    ScalarFunction smooth;
    Regularizer regularizer;

    std::size_t dimension() const { return smooth.dimension(); }
    double value(const Vector& x) const { return smooth.value(x) + regularizer.value(x); }
};

/// g = 1/2|Ax-b|^2, h = lambda |x|_1. The subgradient bound of h is lambda sqrt(m).
inline CompositeObjective l1_composite(const LinearLsqInstance& inst, double lambda) {
    return {inst.objective(), Regularizer::l1(lambda)};
}

struct ProblemConstants {
    double beta = 0.0;
    double mu = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
    double eta0 = 0.0;
    double eta_star = 0.0;
    double xi = 0.0;
    bool xi_estimated = true;

    bool valid() const {
        return beta >= 0.0 && mu >= 0.0 && c1 >= 0.0 && c2 >= 0.0 && eta0 >= 0.0 && eta_star >= 0.0 &&
               xi >= 0.0 && mu <= beta;
    }
};

struct DriftOptions {
    double sigma_step = 1e-6;
    double b_noise_var = 1e-2;
};

class DriftingLsqGenerator {
public:
    DriftingLsqGenerator(Matrix u, Matrix v, Vector sigma0, Vector b0, DriftOptions opts, std::uint64_t noise_seed)
        : u_(std::move(u)), v_(std::move(v)), sigma0_(std::move(sigma0)), b0_(std::move(b0)), opts_(opts),
          noise_seed_(noise_seed), noise_(noise_seed), b_(b0_) {
        if (u_.cols() != v_.cols() || sigma0_.size() != u_.cols() || b0_.size() != u_.rows()) {
            throw DimensionError("DriftingLsqGenerator: inconsistent factor shapes");
        }
        if (!(opts_.sigma_step >= 0.0) || !(opts_.b_noise_var >= 0.0)) {
            throw std::invalid_argument("DriftingLsqGenerator: negative drift parameter");
        }
    }

    Eigen::Index rows() const { return u_.rows(); }
    Eigen::Index cols() const { return v_.rows(); }
    Eigen::Index rank() const { return u_.cols(); }
    const Matrix& left() const { return u_; }
    const Matrix& right() const { return v_; }
    const Vector& sigma0() const { return sigma0_; }
    const Vector& b0() const { return b0_; }
    const DriftOptions& options() const { return opts_; }
    std::uint64_t noise_seed() const { return noise_seed_; }

    /// Restart the b random walk from b0 with a different noise stream.
    void reseed_noise(std::uint64_t seed) {
        noise_seed_ = seed;
        rewind();
    }

    /// Largest k for which every entry of Sigma_k is positive. Entries within
    /// 1e-12 sigma_max of zero count as zero.
    std::size_t horizon() const {
        if (opts_.sigma_step == 0.0) {
            return std::numeric_limits<std::size_t>::max();
        }
        const double smallest = sigma0_.minCoeff();
        auto k = static_cast<std::size_t>(std::ceil(smallest / opts_.sigma_step));
        while (k > 0 && exhausted(smallest - static_cast<double>(k) * opts_.sigma_step)) {
            --k;
        }
        return k;
    }

    Vector sigma(std::size_t k) const {
        Vector s = sigma0_.array() - static_cast<double>(k) * opts_.sigma_step;
        if (exhausted(s.minCoeff())) {
            throw HorizonExceeded("singular value reaches zero at k=" + std::to_string(k) + " (horizon " +
                                  std::to_string(horizon()) + ")");
        }
        return s;
    }

    /// (A_k, b_k). Going backwards in k replays the b path from the start.
    LinearLsqInstance advance(std::size_t k) {
        const Vector s = sigma(k);
        if (k < k_) {
            rewind();
        }
        const double scale = std::sqrt(opts_.b_noise_var);
        while (k_ < k) {
            b_ += scale * noise_.normal_vector(b_.size());
            ++k_;
        }
        return {u_ * s.asDiagonal() * v_.transpose(), b_};
    }

    /// A_k^+ r using the known factors.
    Vector pseudo_inverse_apply(std::size_t k, const Vector& r) const {
        const Vector s = sigma(k);
        return v_ * ((u_.transpose() * r).array() / s.array()).matrix();
    }

private:
    bool exhausted(double value) const { return value <= 1e-12 * sigma0_.maxCoeff(); }

    void rewind() {
        noise_ = NormalStream(noise_seed_);
        b_ = b0_;
        k_ = 0;
    }

    Matrix u_;
    Matrix v_;
    Vector sigma0_;
    Vector b0_;
    DriftOptions opts_;
    std::uint64_t noise_seed_;
    NormalStream noise_;
    Vector b_;
    std::size_t k_ = 0;
};

namespace detail {

inline Matrix orthonormal_columns(NormalStream& stream, Eigen::Index rows, Eigen::Index cols) {
    const Matrix g = stream.normal_matrix(rows, cols);
    const Eigen::HouseholderQR<Matrix> qr(g);
    return qr.householderQ() * Matrix::Identity(rows, cols);
}

}  // namespace detail

/// U, V from thin QR of seeded Gaussian matrices; Sigma_0 = diag{1/r, 2/r, ..., 1}; b0 ~ N(0, I_n).
inline DriftingLsqGenerator make_drifting_generator(std::size_t m, std::size_t n, std::size_t r, std::uint64_t seed,
                                                    DriftOptions opts = {}) {
    if (m == 0 || n == 0 || r == 0 || r > std::min(m, n)) {
        throw std::invalid_argument("make_drifting_generator: need 1 <= r <= min(m, n), got m=" + std::to_string(m) +
                                    " n=" + std::to_string(n) + " r=" + std::to_string(r));
    }
    NormalStream stream(derive_seed(seed, 0, Stream::instance));
    const auto mi = static_cast<Eigen::Index>(m);
    const auto ni = static_cast<Eigen::Index>(n);
    const auto ri = static_cast<Eigen::Index>(r);
    Matrix u = detail::orthonormal_columns(stream, ni, ri);
    Matrix v = detail::orthonormal_columns(stream, mi, ri);
    Vector sigma0(ri);
    for (Eigen::Index i = 0; i < ri; ++i) {
        sigma0[i] = static_cast<double>(i + 1) / static_cast<double>(r);
    }
    Vector b0 = stream.normal_vector(ni);
    return DriftingLsqGenerator(std::move(u), std::move(v), std::move(sigma0), std::move(b0), opts,
                                derive_seed(seed, 0, Stream::drift));
}

/// A time-indexed family L_k = g_k + h_k. Implementations may hold streams,
/// so a sequence is single-owner.
class ObjectiveSequence {
public:
    virtual ~ObjectiveSequence() = default;

    virtual std::size_t dimension() const = 0;
    virtual CompositeObjective at(std::size_t k) = 0;
    virtual double optimal_value(std::size_t k) = 0;

    virtual std::optional<double> distance_to_solutions(std::size_t /*k*/, const Vector& /*x*/) {
        return std::nullopt;
    }

    /// Exact gradient of g_k, used for gradient-bound measurements.
    virtual Vector smooth_gradient(std::size_t k, const Vector& x) { return gradient_exact(at(k).smooth, x); }
};

/// The same objective at every k.
class StaticSequence final : public ObjectiveSequence {
public:
    using DistanceOracle = std::function<double(const Vector&)>;

    StaticSequence(CompositeObjective objective, double optimal, DistanceOracle dist = {})
        : objective_(std::move(objective)), optimal_(optimal), dist_(std::move(dist)) {}

    std::size_t dimension() const override { return objective_.dimension(); }
    CompositeObjective at(std::size_t) override { return objective_; }
    double optimal_value(std::size_t) override { return optimal_; }
    std::optional<double> distance_to_solutions(std::size_t, const Vector& x) override {
        if (!dist_) {
            return std::nullopt;
        }
        return dist_(x);
    }

private:
    CompositeObjective objective_;
    double optimal_;
    DistanceOracle dist_;
};

/**
 * Drifting least squares, optionally with an l1 term.
 *
 * Without a regularizer the minimizer set of L_k is A_k^+ b_k + null(A_k) and
 * the distance is |A_k^+ (A_k x - b_k)|; when r = n the system interpolates and
 * L_k^* = 0. With h = lambda|x|_1 the optimum comes from an exact-gradient
 * proximal-gradient solve (warm-started from the previous k) and the minimizer
 * is taken to be unique.
 */
class DriftingLsqSequence final : public ObjectiveSequence {
public:
    explicit DriftingLsqSequence(DriftingLsqGenerator gen, Regularizer h = Regularizer::zero(),
                                 double solve_tolerance = 1e-10)
        : gen_(std::move(gen)), h_(h), tolerance_(solve_tolerance) {}

    std::size_t dimension() const override { return static_cast<std::size_t>(gen_.cols()); }
    const DriftingLsqGenerator& generator() const { return gen_; }
    const Regularizer& regularizer() const { return h_; }

    LinearLsqInstance instance(std::size_t k) { return gen_.advance(k); }

    CompositeObjective at(std::size_t k) override { return {gen_.advance(k).objective(), h_}; }

    double optimal_value(std::size_t k) override {
        if (h_.kind() == Regularizer::Kind::zero) {
            if (gen_.rank() == gen_.rows()) {
                return 0.0;
            }
            const LinearLsqInstance inst = gen_.advance(k);
            const Vector x = gen_.pseudo_inverse_apply(k, inst.b);
            return inst.loss(x);
        }
        return solve(k).optimal;
    }

    std::optional<double> distance_to_solutions(std::size_t k, const Vector& x) override {
        if (h_.kind() == Regularizer::Kind::zero) {
            const LinearLsqInstance inst = gen_.advance(k);
            return gen_.pseudo_inverse_apply(k, inst.residual(x)).norm();
        }
        return (x - solve(k).minimizer).norm();
    }

    Vector smooth_gradient(std::size_t k, const Vector& x) override { return gen_.advance(k).gradient(x); }

    /// Minimizer of L_k (regularized case) or the least-norm solution (plain case).
    Vector minimizer(std::size_t k) {
        if (h_.kind() == Regularizer::Kind::zero) {
            return gen_.pseudo_inverse_apply(k, gen_.advance(k).b);
        }
        return solve(k).minimizer;
    }

private:
    struct Solution {
        Vector minimizer;
        double optimal = 0.0;
    };

    const Solution& solve(std::size_t k) {
        if (cached_k_ && *cached_k_ == k) {
            return cached_;
        }
        const LinearLsqInstance inst = gen_.advance(k);
        const double beta = gen_.sigma0().maxCoeff() * gen_.sigma0().maxCoeff();
        Vector start = cached_k_ ? cached_.minimizer : Vector::Zero(inst.cols());
        ProxGradientOptions opts;
        opts.tolerance = tolerance_;
        const ProxGradientRun run =
            proximal_gradient([&inst](const Vector& x) { return inst.gradient(x); }, h_, std::move(start), 1.0 / beta,
                              opts);
        cached_.minimizer = run.x;
        cached_.optimal = inst.loss(run.x) + h_.value(run.x);
        cached_k_ = k;
        return cached_;
    }

    DriftingLsqGenerator gen_;
    Regularizer h_;
    double tolerance_;
    std::optional<std::size_t> cached_k_;
    Solution cached_;
};

struct DriftEstimate {
    double eta0_hat = 0.0;
    double eta_star_hat = 0.0;
};

/// Trajectory-restricted drift: max_k [L_{k+1}(x_k) - L_k(x_k)]^+ and max_k [L*_{k+1} - L*_k]^+,
/// where trajectory[k] is the iterate in hand at time k.
inline DriftEstimate measure_drift(ObjectiveSequence& seq, const std::vector<Vector>& trajectory) {
    if (trajectory.empty()) {
        throw std::invalid_argument("measure_drift needs a nonempty trajectory");
    }
    DriftEstimate d;
    double previous_optimal = seq.optimal_value(0);
    for (std::size_t k = 0; k < trajectory.size(); ++k) {
        const double now = seq.at(k).value(trajectory[k]);
        const double next_optimal = seq.optimal_value(k + 1);
        const double next = seq.at(k + 1).value(trajectory[k]);
        d.eta0_hat = std::max(d.eta0_hat, next - now);
        d.eta_star_hat = std::max(d.eta_star_hat, next_optimal - previous_optimal);
        previous_optimal = next_optimal;
    }
    return d;
}

/// Points center + s z with z ~ N(0, I) and s log-uniform in [lo, hi].
inline std::vector<Vector> sample_points_around(const Vector& center, std::size_t count, std::uint64_t seed,
                                                double lo = 1e-2, double hi = 10.0) {
    NormalStream stream(seed);
    std::vector<Vector> points;
    points.reserve(count);
    const double log_lo = std::log(lo);
    const double log_hi = std::log(hi);
    for (std::size_t i = 0; i < count; ++i) {
        const double s = std::exp(log_lo + (log_hi - log_lo) * stream.uniform());
        points.push_back(center + s * stream.normal_vector(center.size()));
    }
    return points;
}

/**
 * Empirical quadratic-growth constant: min over samples of 2(L(x) - L*) / dist(x)^2.
 *
 * This is an estimate from above of the true constant (a minimum over finitely
 * many points), reported as such. Points closer than 1e-9 to the solution set
 * are skipped.
 */
template <class Loss, class Distance>
double estimate_xi(Loss&& loss, double optimal, Distance&& dist, const std::vector<Vector>& points) {
    double xi = std::numeric_limits<double>::infinity();
    for (const Vector& x : points) {
        const double d = dist(x);
        if (d <= 1e-9) {
            continue;
        }
        xi = std::min(xi, 2.0 * (loss(x) - optimal) / (d * d));
    }
    if (!std::isfinite(xi)) {
        throw std::invalid_argument("estimate_xi: no usable sample points");
    }
    return xi;
}

}  // namespace fwdgrad
