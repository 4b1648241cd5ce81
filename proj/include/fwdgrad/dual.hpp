#pragma once

/**
 * @file dual.hpp
 * @brief Forward-mode automatic differentiation with single-direction dual numbers.
 *
 * A Dual carries a value and one tangent. Evaluating a function on inputs
 * seeded with tangent u yields f(x) in the value channel and the directional
 * derivative <grad f(x), u> in the tangent channel, in one pass.
 *
 * @code
 * fwdgrad::ScalarFunction f(2, [](std::span<const fwdgrad::Dual> x) {
 *     return x[0] * x[1];
 * });
 * auto [value, deriv] = fwdgrad::directional_derivative(f, x, u);
 * @endcode
 */

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace fwdgrad {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Input and direction lengths disagree with the function's dimension.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A primitive was evaluated outside its domain (log of a nonpositive value, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

class Dual {
public:
    constexpr Dual() = default;
    constexpr Dual(double value, double tangent) : value_(value), tangent_(tangent) {}

    /// Lifts a constant; the tangent is exactly zero.
    static constexpr Dual constant(double value) { return {value, 0.0}; }

    constexpr double value() const { return value_; }
    constexpr double tangent() const { return tangent_; }

    constexpr Dual& operator+=(const Dual& o) {
        value_ += o.value_;
        tangent_ += o.tangent_;
        return *this;
    }
    constexpr Dual& operator-=(const Dual& o) {
        value_ -= o.value_;
        tangent_ -= o.tangent_;
        return *this;
    }
    constexpr Dual& operator*=(const Dual& o) {
        tangent_ = value_ * o.tangent_ + tangent_ * o.value_;
        value_ *= o.value_;
        return *this;
    }
    Dual& operator/=(const Dual& o);

    constexpr Dual& operator+=(double c) {
        value_ += c;
        return *this;
    }
    constexpr Dual& operator-=(double c) {
        value_ -= c;
        return *this;
    }
    constexpr Dual& operator*=(double c) {
        value_ *= c;
        tangent_ *= c;
        return *this;
    }

private:
    double value_ = 0.0;
    double tangent_ = 0.0;
};

constexpr Dual operator-(const Dual& a) { return {-a.value(), -a.tangent()}; }
constexpr Dual operator+(Dual a, const Dual& b) { return a += b; }
constexpr Dual operator-(Dual a, const Dual& b) { return a -= b; }
constexpr Dual operator*(Dual a, const Dual& b) { return a *= b; }
constexpr Dual operator+(Dual a, double c) { return a += c; }
constexpr Dual operator+(double c, Dual a) { return a += c; }
constexpr Dual operator-(Dual a, double c) { return a -= c; }
constexpr Dual operator-(double c, const Dual& a) { return {c - a.value(), -a.tangent()}; }
constexpr Dual operator*(Dual a, double c) { return a *= c; }
constexpr Dual operator*(double c, Dual a) { return a *= c; }

inline Dual operator/(const Dual& a, const Dual& b) {
    if (b.value() == 0.0) {
        throw DomainError("division by a dual with zero value");
    }
    const double inv = 1.0 / b.value();
    return {a.value() * inv, (a.tangent() * b.value() - a.value() * b.tangent()) * inv * inv};
}
inline Dual operator/(const Dual& a, double c) { return a / Dual::constant(c); }
inline Dual operator/(double c, const Dual& a) { return Dual::constant(c) / a; }

inline Dual& Dual::operator/=(const Dual& o) { return *this = *this / o; }

inline Dual exp(const Dual& a) {
    const double e = std::exp(a.value());
    return {e, e * a.tangent()};
}

inline Dual log(const Dual& a) {
    if (!(a.value() > 0.0)) {
        throw DomainError("log of nonpositive value " + std::to_string(a.value()));
    }
    return {std::log(a.value()), a.tangent() / a.value()};
}

inline Dual sin(const Dual& a) { return {std::sin(a.value()), std::cos(a.value()) * a.tangent()}; }
inline Dual cos(const Dual& a) { return {std::cos(a.value()), -std::sin(a.value()) * a.tangent()}; }

inline Dual sqrt(const Dual& a) {
    // sqrt is not differentiable at 0, so 0 is outside the supported domain.
    if (!(a.value() > 0.0)) {
        throw DomainError("sqrt of nonpositive value " + std::to_string(a.value()));
    }
    const double s = std::sqrt(a.value());
    return {s, a.tangent() / (2.0 * s)};
}

/// a^p for a real exponent. Negative bases need an integral exponent.
inline Dual pow(const Dual& a, double p) {
    if (p == 0.0) {
        return Dual::constant(1.0);
    }
    if (p == 1.0) {
        return a;
    }
    const bool integral = std::floor(p) == p;
    if (a.value() < 0.0 && !integral) {
        throw DomainError("non-integral power of a negative value");
    }
    if (a.value() == 0.0 && p < 1.0) {
        throw DomainError("power with exponent < 1 at zero");
    }
    return {std::pow(a.value(), p), p * std::pow(a.value(), p - 1.0) * a.tangent()};
}

/// Affine map A·x + c over dual inputs. Both channels go through A.
inline std::vector<Dual> affine(const Matrix& a, std::span<const Dual> x, const Vector& offset) {
    if (static_cast<std::size_t>(a.cols()) != x.size() || a.rows() != offset.size()) {
        throw DimensionError("affine: matrix is " + std::to_string(a.rows()) + "x" +
                             std::to_string(a.cols()) + ", input has " + std::to_string(x.size()) +
                             ", offset has " + std::to_string(offset.size()));
    }
    Vector values(a.cols());
    Vector tangents(a.cols());
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
        values[j] = x[static_cast<std::size_t>(j)].value();
        tangents[j] = x[static_cast<std::size_t>(j)].tangent();
    }
    const Vector out_values = a * values + offset;
    const Vector out_tangents = a * tangents;
    std::vector<Dual> out(static_cast<std::size_t>(a.rows()));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        out[static_cast<std::size_t>(i)] = {out_values[i], out_tangents[i]};
    }
    return out;
}

inline Dual squared_norm(std::span<const Dual> x) {
    Dual acc;
    for (const Dual& xi : x) {
        acc += xi * xi;
    }
    return acc;
}

/**
 * Type-erased scalar function R^m -> R evaluated over dual numbers.
 *
 * The callable must be deterministic and side-effect free; a ScalarFunction is
 * immutable after construction and safe to evaluate concurrently.
 */
class ScalarFunction {
public:
    using Body = std::function<Dual(std::span<const Dual>)>;

    ScalarFunction(std::size_t dimension, Body body) : dimension_(dimension), body_(std::move(body)) {
        if (dimension_ == 0) {
            throw DimensionError("ScalarFunction dimension must be at least 1");
        }
        if (!body_) {
            throw std::invalid_argument("ScalarFunction body is empty");
        }
    }

    std::size_t dimension() const { return dimension_; }

    Dual operator()(std::span<const Dual> x) const {
        if (x.size() != dimension_) {
            throw DimensionError("expected " + std::to_string(dimension_) + " inputs, got " +
                                 std::to_string(x.size()));
        }
        return body_(x);
    }

    /// Plain evaluation (all tangents zero).
    double value(const Vector& x) const {
        check(x, "x");
        std::vector<Dual> in(dimension_);
        for (std::size_t j = 0; j < dimension_; ++j) {
            in[j] = Dual::constant(x[static_cast<Eigen::Index>(j)]);
        }
        return body_(in).value();
    }

    void check(const Vector& v, const char* name) const {
        if (static_cast<std::size_t>(v.size()) != dimension_) {
            throw DimensionError(std::string(name) + " has length " + std::to_string(v.size()) +
                                 ", function dimension is " + std::to_string(dimension_));
        }
    }

private:
    std::size_t dimension_;
    Body body_;
};

struct DirectionalDerivative {
    double value;
    double deriv;
};

/// f(x) and <grad f(x), u> from a single forward pass.
inline DirectionalDerivative directional_derivative(const ScalarFunction& f, const Vector& x,
                                                    const Vector& u) {
    f.check(x, "x");
    f.check(u, "u");
    std::vector<Dual> in(f.dimension());
    for (std::size_t j = 0; j < in.size(); ++j) {
        const auto idx = static_cast<Eigen::Index>(j);
        in[j] = {x[idx], u[idx]};
    }
    const Dual out = f(in);
    return {out.value(), out.tangent()};
}

/// Full gradient from m forward passes along the basis vectors.
inline Vector gradient_exact(const ScalarFunction& f, const Vector& x) {
    f.check(x, "x");
    const auto m = static_cast<Eigen::Index>(f.dimension());
    Vector grad(m);
    Vector basis = Vector::Zero(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        basis[j] = 1.0;
        grad[j] = directional_derivative(f, x, basis).deriv;
        basis[j] = 0.0;
    }
    return grad;
}

}  // namespace fwdgrad
