#pragma once

// Convex regularizers h with closed-form proximal operators.
//
//   prox_{tau h}(v) = argmin_y h(y) + |y - v|^2 / (2 tau)

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fwdgrad {

class Regularizer {
public:
    enum class Kind { zero, l1, box };

    static Regularizer zero() { return Regularizer(Kind::zero, 0.0, 0.0, 0.0); }

    static Regularizer l1(double lambda) {
        if (!(lambda >= 0.0)) {
            throw std::invalid_argument("l1 weight must be nonnegative");
        }
        return Regularizer(Kind::l1, lambda, 0.0, 0.0);
    }

    /// Indicator of the box [lo, hi]^m.
    static Regularizer box(double lo, double hi) {
        if (!(lo <= hi)) {
            throw std::invalid_argument("box needs lo <= hi");
        }
        return Regularizer(Kind::box, 0.0, lo, hi);
    }

    Kind kind() const { return kind_; }
    double lambda() const { return lambda_; }
    double lower() const { return lo_; }
    double upper() const { return hi_; }

    double value(const Eigen::VectorXd& x) const {
        switch (kind_) {
        case Kind::zero:
            return 0.0;
        case Kind::l1:
            return lambda_ * x.lpNorm<1>();
        case Kind::box:
            for (double xi : x) {
                if (xi < lo_ || xi > hi_) {
                    return std::numeric_limits<double>::infinity();
                }
            }
            return 0.0;
        }
        return 0.0;
    }

    /// Bound on |s| over s in the subdifferential; infinite for a box indicator.
    double subgradient_bound(Eigen::Index m) const {
        switch (kind_) {
        case Kind::zero:
            return 0.0;
        case Kind::l1:
            return lambda_ * std::sqrt(static_cast<double>(m));
        case Kind::box:
            return std::numeric_limits<double>::infinity();
        }
        return 0.0;
    }

    /// tau = 0 returns v unchanged (the limit of the prox as tau -> 0).
    Eigen::VectorXd prox(const Eigen::VectorXd& v, double tau) const {
        if (!(tau >= 0.0)) {
            throw std::invalid_argument("prox step must be nonnegative, got " + std::to_string(tau));
        }
        switch (kind_) {
        case Kind::zero:
            return v;
        case Kind::l1: {
            const double t = tau * lambda_;
            Eigen::VectorXd y(v.size());
            for (Eigen::Index i = 0; i < v.size(); ++i) {
                const double shrunk = std::max(std::abs(v[i]) - t, 0.0);
                y[i] = v[i] > 0.0 ? shrunk : (v[i] < 0.0 ? -shrunk : 0.0);
            }
            return y;
        }
        case Kind::box:
            return v.cwiseMax(lo_).cwiseMin(hi_);
        }
        return v;
    }

    std::string describe() const {
        switch (kind_) {
        case Kind::zero:
            return "zero";
        case Kind::l1:
            return "l1(" + std::to_string(lambda_) + ")";
        case Kind::box:
            return "box[" + std::to_string(lo_) + "," + std::to_string(hi_) + "]";
        }
        return "?";
    }

private:
    Regularizer(Kind kind, double lambda, double lo, double hi) : kind_(kind), lambda_(lambda), lo_(lo), hi_(hi) {}

    Kind kind_;
    double lambda_;
    double lo_;
    double hi_;
};

inline Eigen::VectorXd prox_apply(const Regularizer& h, const Eigen::VectorXd& v, double tau) {
    return h.prox(v, tau);
}

struct ProxGradientOptions {
    double tolerance = 1e-10;  // on the gradient-mapping norm |x+ - x| / step
    std::size_t max_iterations = 1'000'000;
    bool record_path = false;
};

struct ProxGradientRun {
    Eigen::VectorXd x;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<Eigen::VectorXd> path;  // x_0 .. x_final when recorded
};

/// Proximal gradient with exact gradients: x+ = prox_{step h}(x - step * grad(x)).
template <class Gradient>
ProxGradientRun proximal_gradient(Gradient&& grad, const Regularizer& h, Eigen::VectorXd x, double step,
                                  const ProxGradientOptions& opts = {}) {
    if (!(step > 0.0)) {
        throw std::invalid_argument("proximal gradient step must be positive");
    }
    ProxGradientRun run;
    if (opts.record_path) {
        run.path.push_back(x);
    }
    while (run.iterations < opts.max_iterations) {
        Eigen::VectorXd next = h.prox(x - step * grad(x), step);
        const double mapping = (next - x).norm() / step;
        x = std::move(next);
        ++run.iterations;
        if (opts.record_path) {
            run.path.push_back(x);
        }
        if (mapping <= opts.tolerance) {
            run.converged = true;
            break;
        }
    }
    run.x = std::move(x);
    return run;
}

}  // namespace fwdgrad
