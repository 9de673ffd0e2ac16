#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "advact/error.hpp"

namespace advact {

// ---------------------------------------------------------------------------
// Standard activations.
// ---------------------------------------------------------------------------

// Branching form of the logistic function: never evaluates exp of a large
// positive argument, so it is exact down to x = -745 and beyond.
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

// sigma'(x) = e^-|x| / (1 + e^-|x|)^2, symmetric in x.
inline double sigmoid_prime(double x) {
    const double t = std::exp(-std::abs(x));
    const double d = 1.0 + t;
    return t / (d * d);
}

// Computed through the shared sigmoid kernel: tanh(x) = 2*sigmoid(2x) - 1.
inline double tanh_act(double x) { return 2.0 * sigmoid(2.0 * x) - 1.0; }

inline double tanh_act_prime(double x) {
    const double t = tanh_act(x);
    return 1.0 - t * t;
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }
inline double relu_prime(double x) { return x > 0.0 ? 1.0 : 0.0; }

constexpr double kGeluCubic = 0.044715;
constexpr double kSqrt2OverPi = 0.79788456080286535587989211986876;

// tanh approximation of GELU.
inline double gelu_tanh_approx(double x) {
    return 0.5 * x * (1.0 + tanh_act(kSqrt2OverPi * (x + kGeluCubic * x * x * x)));
}

inline double gelu_tanh_approx_prime(double x) {
    const double u = kSqrt2OverPi * (x + kGeluCubic * x * x * x);
    const double t = tanh_act(u);
    const double du = kSqrt2OverPi * (1.0 + 3.0 * kGeluCubic * x * x);
    return 0.5 * (1.0 + t) + 0.5 * x * (1.0 - t * t) * du;
}

// ---------------------------------------------------------------------------
// Sigmoid adversarial pair.
//
// The adversarial function xi of an activation f is defined by
// xi'(x) = 1 / f'(x); alternating f and xi across layers makes consecutive
// derivative factors cancel in the backward chain.
// ---------------------------------------------------------------------------

// xi_Sigmoid'(x) = (1+e^x)^2 / e^x, expanded to e^x + e^-x + 2 which is
// symmetric and exact over the whole exp range.
inline double xi_sigmoid_prime(double x) { return std::exp(x) + std::exp(-x) + 2.0; }

// Antiderivative with C = 0: (e^2x - 1)/e^x + 2x = e^x - e^-x + 2x. Odd.
inline double xi_sigmoid(double x) {
    if (std::abs(x) > 700.0)
        throw NumericError("xi_sigmoid: |x| > 700 overflows exp");
    return std::exp(x) - std::exp(-x) + 2.0 * x;
}

// Lifted sigmoid: Sigmoid_theta(x) = sigmoid(x) + alpha*x, alpha > 0.
// Its derivative lives in (alpha, alpha + 0.25).
inline void require_alpha(double alpha) {
    if (!(alpha > 0.0)) throw DomainError("sigmoid_theta: alpha must be > 0");
}

inline double sigmoid_theta(double x, double alpha) {
    require_alpha(alpha);
    return sigmoid(x) + alpha * x;
}

inline double sigmoid_theta_prime(double x, double alpha) {
    require_alpha(alpha);
    return sigmoid_prime(x) + alpha;
}

// Derivative of the lifted adversarial function:
// (1+e^x)^2 / (e^x + alpha (1+e^x)^2), rewritten as r/(1 + alpha r) with
// r = xi_sigmoid_prime(x). Lives in (1/(0.25+alpha), 1/alpha).
inline double xi_sigmoid_theta_prime(double x, double alpha) {
    require_alpha(alpha);
    const double r = xi_sigmoid_prime(x);
    if (std::isinf(r)) return 1.0 / alpha;
    return r / (1.0 + alpha * r);
}

// Antiderivative with C = 0:
// [ln(2a e^x + s + 2a + 1) - ln|2a e^x - s + 2a + 1|] / (a s) + x/a,
// s = sqrt(4a+1). For a > 0 the second log argument is always positive
// (2a+1 > s), so the singularity guard below can only fire on rounding.
inline double xi_sigmoid_theta(double x, double alpha) {
    require_alpha(alpha);
    const double s = std::sqrt(4.0 * alpha + 1.0);
    const double ex = std::exp(x);
    const double plus = 2.0 * alpha * ex + s + 2.0 * alpha + 1.0;
    const double minus = std::abs(2.0 * alpha * ex - s + 2.0 * alpha + 1.0);
    if (minus < 1e-300)
        throw NumericError("xi_sigmoid_theta: log singularity at x = " + std::to_string(x));
    return (std::log(plus) - std::log(minus)) / (alpha * s) + x / alpha;
}

// ---------------------------------------------------------------------------
// GaPair: a matched (f, xi) activation pair.
// ---------------------------------------------------------------------------

using ScalarMap = std::function<double(double)>;

// f and xi with their derivatives; alpha is the lift constant (0 for the
// plain pair). Reciprocity contract: (f'(x) + 0) * xi'(x) = 1 for the plain
// pair, (sigma'(x) + alpha) * xi'(x) = 1 for the lifted one.
struct GaPair {
    std::string name;
    ScalarMap f;
    ScalarMap f_prime;
    ScalarMap xi;
    ScalarMap xi_prime;
    double alpha = 0.0;

    // Suprema of the two derivative ranges, used by the alternation policy
    // to decide which member is the small-gradient one.
    double f_prime_sup = 0.0;
    double xi_prime_sup = 0.0;

    bool xi_is_small_member() const { return xi_prime_sup < f_prime_sup; }
};

inline GaPair make_sigmoid_pair() {
    GaPair p;
    p.name = "sigmoid";
    p.f = [](double x) { return sigmoid(x); };
    p.f_prime = [](double x) { return sigmoid_prime(x); };
    p.xi = [](double x) { return xi_sigmoid(x); };
    p.xi_prime = [](double x) { return xi_sigmoid_prime(x); };
    p.alpha = 0.0;
    p.f_prime_sup = 0.25;
    p.xi_prime_sup = std::numeric_limits<double>::infinity();
    return p;
}

inline GaPair make_sigmoid_theta_pair(double alpha) {
    require_alpha(alpha);
    GaPair p;
    p.name = "sigmoid_theta";
    p.f = [alpha](double x) { return sigmoid_theta(x, alpha); };
    p.f_prime = [alpha](double x) { return sigmoid_theta_prime(x, alpha); };
    p.xi = [alpha](double x) { return xi_sigmoid_theta(x, alpha); };
    p.xi_prime = [alpha](double x) { return xi_sigmoid_theta_prime(x, alpha); };
    p.alpha = alpha;
    p.f_prime_sup = alpha + 0.25;
    p.xi_prime_sup = 1.0 / alpha;
    return p;
}

} // namespace advact
