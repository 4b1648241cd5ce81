#pragma once

/**
 * @file bounds.hpp
 * @brief Closed-form rates and error bounds for forward-gradient methods under (proximal) PL.
 *
 * Notation: mu is the PL constant, beta the smoothness constant, m the
 * dimension, l the number of inner updates per time step, eta0 / eta_star the
 * per-step drift of costs / optimal values, gap0 = L_0(x_0) - L_0^*.
 *
 * Static forward GD, alpha = 1/(beta(m+4)):
 *     E[L(x_k) - L^*] <= (1 - mu/((m+4) beta))^k gap0
 *
 * Online forward GD, gamma = alpha(1 - beta(m+4)alpha/2), gamma < 1/(2 mu l):
 *     E dist(x_{k+1})^2 <= (eta0 + eta_star)/(mu^2 gamma l) + (2/mu)(1 - 2 mu gamma l)^k gap0
 *
 * Online proximal forward gradient, step 1/beta, G1 = 2 c1 (c1 + c2)/beta:
 *     E dist(x_{k+1})^2 <= 2/(xi (1 - q^l)) (eta0 + eta_star + 2 G1 sqrt(m+3)) + (2/xi) q^{k l} gap0,
 *     q = 1 - mu/beta
 *
 * All evaluators are pure functions.
 */

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

#include "fwdgrad/dual.hpp"
#include "fwdgrad/prox.hpp"

namespace fwdgrad {

class BoundDomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct BoundInputs {
    double mu = 0.0;
    double beta = 0.0;
    std::size_t m = 1;
    double alpha = 0.0;
    std::size_t ell = 1;
    double eta0 = 0.0;
    double eta_star = 0.0;
    double gap0 = 0.0;
    double xi = 0.0;
    double c1 = 0.0;
    double c2 = 0.0;
};

namespace detail {

inline double dim_plus_four(std::size_t m) { return static_cast<double>(m) + 4.0; }

inline void require_positive(double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        throw BoundDomainError(std::string(name) + " must be positive and finite, got " + std::to_string(v));
    }
}

}  // namespace detail

/// gamma = alpha (1 - (beta/2)(m+4) alpha), positive for alpha in (0, 2/(beta(m+4))).
inline double gamma_of_alpha(double alpha, double beta, std::size_t m) {
    detail::require_positive(beta, "beta");
    const double limit = 2.0 / (beta * detail::dim_plus_four(m));
    if (!(alpha > 0.0) || !(alpha < limit)) {
        throw BoundDomainError("alpha=" + std::to_string(alpha) + " outside (0, 2/(beta(m+4))) = (0, " +
                               std::to_string(limit) + ")");
    }
    return alpha * (1.0 - 0.5 * beta * detail::dim_plus_four(m) * alpha);
}

/// Contraction factor of the static bound. mu = 0 gives 1 (no contraction).
inline double static_rate(double mu, double beta, std::size_t m) {
    detail::require_positive(beta, "beta");
    if (!(mu >= 0.0) || mu > beta) {
        throw BoundDomainError("need 0 <= mu <= beta");
    }
    return 1.0 - mu / (detail::dim_plus_four(m) * beta);
}

/// (1 - mu/((m+4)beta))^k gap0, accumulated by repeated multiplication so that
/// bound_static(k) == bound_static(k-1) * rate holds exactly.
inline double bound_static(std::size_t k, double mu, double beta, std::size_t m, double gap0) {
    const double q = static_rate(mu, beta, m);
    double b = gap0;
    for (std::size_t i = 0; i < k; ++i) {
        b *= q;
    }
    return b;
}

/// Upper end of the admissible gamma range: min(gamma_of_alpha, 1/(2 mu l)).
inline double gamma_tilde(const BoundInputs& in) {
    detail::require_positive(in.mu, "mu");
    return std::min(gamma_of_alpha(in.alpha, in.beta, in.m), 1.0 / (2.0 * in.mu * static_cast<double>(in.ell)));
}

/// gamma = min(gamma_of_alpha, 0.99/(2 mu l)).
inline double default_gamma(const BoundInputs& in) {
    detail::require_positive(in.mu, "mu");
    return std::min(gamma_of_alpha(in.alpha, in.beta, in.m), 0.99 / (2.0 * in.mu * static_cast<double>(in.ell)));
}

namespace detail {

inline void check_tracking(const BoundInputs& in, double gamma) {
    require_positive(in.mu, "mu");
    if (in.mu > in.beta) {
        throw BoundDomainError("need mu <= beta");
    }
    if (in.ell == 0) {
        throw BoundDomainError("ell must be at least 1");
    }
    if (in.eta0 < 0.0 || in.eta_star < 0.0) {
        throw BoundDomainError("drifts must be nonnegative");
    }
    const double by_alpha = gamma_of_alpha(in.alpha, in.beta, in.m);
    const double by_mu = 1.0 / (2.0 * in.mu * static_cast<double>(in.ell));
    if (!(gamma > 0.0) || gamma > by_alpha || !(gamma < by_mu)) {
        throw BoundDomainError("gamma=" + std::to_string(gamma) + " outside (0, gamma~), gamma~ = " +
                               std::to_string(std::min(by_alpha, by_mu)));
    }
}

}  // namespace detail

/// (eta0 + eta_star)/(mu^2 gamma l): the limsup of the expected squared tracking error.
inline double tracking_limsup(const BoundInputs& in, double gamma) {
    detail::check_tracking(in, gamma);
    return (in.eta0 + in.eta_star) / (in.mu * in.mu * gamma * static_cast<double>(in.ell));
}

inline double tracking_transient(std::size_t k, const BoundInputs& in, double gamma) {
    detail::check_tracking(in, gamma);
    const double q = 1.0 - 2.0 * in.mu * gamma * static_cast<double>(in.ell);
    return (2.0 / in.mu) * std::pow(q, static_cast<double>(k)) * in.gap0;
}

/// Bound on E dist(x_{k+1}, X_{k+1}^*)^2 for online forward GD.
inline double bound_tracking(std::size_t k, const BoundInputs& in, double gamma) {
    return tracking_limsup(in, gamma) + tracking_transient(k, in, gamma);
}

namespace detail {

inline void check_prox(const BoundInputs& in) {
    if (!(in.xi > 0.0)) {
        throw BoundDomainError("xi must be positive, got " + std::to_string(in.xi));
    }
    require_positive(in.mu, "mu");
    require_positive(in.beta, "beta");
    if (in.mu > in.beta) {
        throw BoundDomainError("need mu <= beta");
    }
    if (in.ell == 0) {
        throw BoundDomainError("ell must be at least 1");
    }
}

}  // namespace detail

/// G1 = 2 c1 (c1 + c2) / beta.
inline double prox_noise_constant(const BoundInputs& in) { return 2.0 * in.c1 * (in.c1 + in.c2) / in.beta; }

inline double prox_tracking_asymptotic(const BoundInputs& in) {
    detail::check_prox(in);
    const double q = 1.0 - in.mu / in.beta;
    const double contraction = 1.0 - std::pow(q, static_cast<double>(in.ell));
    const double g1 = prox_noise_constant(in);
    return 2.0 / (in.xi * contraction) *
           (in.eta0 + in.eta_star + 2.0 * g1 * std::sqrt(static_cast<double>(in.m) + 3.0));
}

inline double prox_tracking_transient(std::size_t k, const BoundInputs& in) {
    detail::check_prox(in);
    const double q = 1.0 - in.mu / in.beta;
    return (2.0 / in.xi) * std::pow(q, static_cast<double>(k) * static_cast<double>(in.ell)) * in.gap0;
}

/// Bound on E dist(x_{k+1}, X_{k+1}^*)^2 for the online proximal forward gradient.
inline double bound_prox_tracking(std::size_t k, const BoundInputs& in) {
    return prox_tracking_asymptotic(in) + prox_tracking_transient(k, in);
}

/// limsup of the expected loss gap: (eta0 + eta_star + G1 sqrt(m+3)) / (1 - q^l).
inline double prox_limsup_gap(const BoundInputs& in) {
    detail::check_prox(in);
    const double q = 1.0 - in.mu / in.beta;
    return (in.eta0 + in.eta_star + prox_noise_constant(in) * std::sqrt(static_cast<double>(in.m) + 3.0)) /
           (1.0 - std::pow(q, static_cast<double>(in.ell)));
}

struct GrowthMargins {
    double lower_slack = 0.0;  // (L - L*) - mu/2 dist^2
    double upper_slack = 0.0;  // beta/2 dist^2 - (L - L*)
};

/// Slacks of mu/2 dist^2 <= L - L* <= beta/2 dist^2.
inline GrowthMargins quadratic_growth_margins(double loss_gap, double dist, double mu, double beta) {
    const double d2 = dist * dist;
    return {loss_gap - 0.5 * mu * d2, 0.5 * beta * d2 - loss_gap};
}

template <class Loss, class Distance>
GrowthMargins quadratic_growth_margins(Loss&& loss, double optimal, const Vector& x, double mu, double beta,
                                       Distance&& dist) {
    return quadratic_growth_margins(loss(x) - optimal, dist(x), mu, beta);
}

/**
 * D_h(x, alpha) = -2 alpha min_y { <grad g(x), y - x> + alpha/2 |y - x|^2 + h(y) - h(x) },
 * evaluated at the minimizer y = prox_{h/alpha}(x - grad g(x)/alpha). Nonnegative
 * (y = x is feasible); rounding below zero is clamped.
 */
inline double compute_Dh(const Vector& grad, const Regularizer& h, const Vector& x, double alpha) {
    if (!(alpha > 0.0)) {
        throw BoundDomainError("compute_Dh needs alpha > 0");
    }
    const Vector y = h.prox(x - grad / alpha, 1.0 / alpha);
    const Vector step = y - x;
    const double inner = grad.dot(step) + 0.5 * alpha * step.squaredNorm() + h.value(y) - h.value(x);
    return std::max(0.0, -2.0 * alpha * inner);
}

inline double compute_Dh(const ScalarFunction& g, const Regularizer& h, const Vector& x, double alpha) {
    return compute_Dh(gradient_exact(g, x), h, x, alpha);
}

/// D_h(x, beta) / (2 (L(x) - L*)): a pointwise proximal-PL constant.
inline double prox_pl_ratio(const Vector& grad, const Regularizer& h, const Vector& x, double beta, double loss_gap) {
    if (!(loss_gap > 0.0)) {
        throw BoundDomainError("prox_pl_ratio needs a positive loss gap, got " + std::to_string(loss_gap));
    }
    return compute_Dh(grad, h, x, beta) / (2.0 * loss_gap);
}

inline double prox_pl_ratio(const ScalarFunction& g, const Regularizer& h, const Vector& x, double beta,
                            double loss_gap) {
    return prox_pl_ratio(gradient_exact(g, x), h, x, beta, loss_gap);
}

/// R = sqrt(2 gap0 / beta) / (1 - sqrt(1 - mu/beta)): bounds |x_k - x_0| for exact proximal gradient.
inline double path_radius(double mu, double beta, double gap0) {
    detail::require_positive(mu, "mu");
    detail::require_positive(beta, "beta");
    if (mu > beta) {
        throw BoundDomainError("path_radius needs mu <= beta, got mu=" + std::to_string(mu) +
                               " beta=" + std::to_string(beta));
    }
    if (gap0 < 0.0) {
        throw BoundDomainError("path_radius needs gap0 >= 0");
    }
    return std::sqrt(2.0 * gap0 / beta) / (1.0 - std::sqrt(1.0 - mu / beta));
}

}  // namespace fwdgrad
