#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "advact/error.hpp"
#include "advact/split.hpp"

namespace advact {

// A scalar network parameter. `penalized` marks membership in the L2
// penalty that constrains adversarial-function parameters.
struct TrainableScalar {
    std::string name;
    double value = 0.0;
    double init = 0.0;
    bool penalized = true;
    double grad = 0.0;

    TrainableScalar() = default;
    TrainableScalar(std::string n, double v, bool pen = true)
        : name(std::move(n)), value(v), init(v), penalized(pen) {}
};

// Clamp policy for reciprocal partials near their singular manifolds.
struct SingularityPolicy {
    double epsilon = 1e-8;      // closeness to the singular manifold
    double clamp_bound = 10.0;  // elementwise clamp for flagged partials
};

// ---------------------------------------------------------------------------
// xi_Tanh: reciprocal partials and the trainable integrated form.
// ---------------------------------------------------------------------------

// Reciprocals of the tanh_split4 partials. The chi3/chi4 components are
// singular on the manifold e^-chi2 = e^chi1; inside `policy.epsilon` of it
// they are clamped and `singular_hits` (when given) is incremented.
inline std::array<double, 4> xi_tanh_partials(double chi1, double chi2, double chi3,
                                              double chi4,
                                              const SingularityPolicy& policy = {},
                                              std::size_t* singular_hits = nullptr) {
    const auto fwd = tanh_split4_partials(chi1, chi2, chi3, chi4);
    std::array<double, 4> out{};
    const bool singular = std::abs(std::exp(-chi2) - std::exp(chi1)) < policy.epsilon;
    for (int i = 0; i < 4; ++i) {
        double r = 1.0 / fwd[i];
        if (singular && i >= 2) {
            if (!std::isfinite(r)) r = policy.clamp_bound;
            r = std::clamp(r, -policy.clamp_bound, policy.clamp_bound);
            if (singular_hits) ++*singular_hits;
        }
        out[i] = r;
    }
    return out;
}

// Trainable parameters of the integrated adversarial Tanh. Initialization
// replaces each constant by its value at the unit point:
// alpha1 = alpha2 = alpha4 = alpha5 = alpha7 = alpha10 = e,
// alpha8 = alpha11 = e, and the integration constants
// alpha3 = alpha6 = alpha9 = alpha12 = 0.
struct XiTanhParams {
    std::array<TrainableScalar, 12> alpha;

    XiTanhParams() {
        const double e = std::exp(1.0);
        const double init[12] = {e, e, 0.0, e, e, 0.0, e, e, 0.0, e, e, 0.0};
        for (int i = 0; i < 12; ++i)
            alpha[i] = TrainableScalar("alpha" + std::to_string(i + 1), init[i]);
    }

    double a(int one_based) const { return alpha[one_based - 1].value; }
};

inline void require_regular_xi_tanh(const XiTanhParams& p) {
    if (std::abs(p.a(7) * p.a(8) - 1.0) < 1e-8)
        throw NumericError("xi_tanh: alpha7*alpha8 too close to 1");
    if (std::abs(p.a(10) * p.a(11) - 1.0) < 1e-8)
        throw NumericError("xi_tanh: alpha10*alpha11 too close to 1");
}

// Sum of the four integrated reciprocal partials with trainable constants:
//   T1 = -(a1+a2) e^-chi1 + a3
//   T2 = -(a4+a5) e^-chi2 + a6
//   T3 = a7 (e^-chi3 a8^-2 - e^chi3 - 2 a8^-1 chi3) / (a7 a8 - 1) + a9
//   T4 = a10 (e^chi4 a11^2 - e^-chi4 - 2 a11 chi4) / (a10 a11 - 1) + a12
inline double xi_tanh_forward(double chi1, double chi2, double chi3, double chi4,
                              const XiTanhParams& p) {
    require_regular_xi_tanh(p);
    require_exp_range(chi1, "xi_tanh_forward");
    require_exp_range(chi2, "xi_tanh_forward");
    require_exp_range(chi3, "xi_tanh_forward");
    require_exp_range(chi4, "xi_tanh_forward");
    const double t1 = -(p.a(1) + p.a(2)) * std::exp(-chi1) + p.a(3);
    const double t2 = -(p.a(4) + p.a(5)) * std::exp(-chi2) + p.a(6);
    const double n3 = std::exp(-chi3) / (p.a(8) * p.a(8)) - std::exp(chi3) -
                      2.0 * chi3 / p.a(8);
    const double t3 = p.a(7) * n3 / (p.a(7) * p.a(8) - 1.0) + p.a(9);
    const double n4 = std::exp(chi4) * p.a(11) * p.a(11) - std::exp(-chi4) -
                      2.0 * p.a(11) * chi4;
    const double t4 = p.a(10) * n4 / (p.a(10) * p.a(11) - 1.0) + p.a(12);
    return t1 + t2 + t3 + t4;
}

// Analytic gradient of xi_tanh_forward in all 16 directions.
struct XiTanhGrad {
    std::array<double, 4> chi{};
    std::array<double, 12> alpha{};
};

inline XiTanhGrad xi_tanh_forward_grad(double chi1, double chi2, double chi3, double chi4,
                                       const XiTanhParams& p) {
    require_regular_xi_tanh(p);
    XiTanhGrad g;
    const double e1m = std::exp(-chi1);
    const double e2m = std::exp(-chi2);
    const double e3 = std::exp(chi3), e3m = std::exp(-chi3);
    const double e4 = std::exp(chi4), e4m = std::exp(-chi4);

    g.chi[0] = (p.a(1) + p.a(2)) * e1m;
    g.chi[1] = (p.a(4) + p.a(5)) * e2m;

    const double a7 = p.a(7), a8 = p.a(8);
    const double d3 = a7 * a8 - 1.0;
    const double n3 = e3m / (a8 * a8) - e3 - 2.0 * chi3 / a8;
    g.chi[2] = a7 * (-e3m / (a8 * a8) - e3 - 2.0 / a8) / d3;

    const double a10 = p.a(10), a11 = p.a(11);
    const double d4 = a10 * a11 - 1.0;
    const double n4 = e4 * a11 * a11 - e4m - 2.0 * a11 * chi4;
    g.chi[3] = a10 * (e4 * a11 * a11 + e4m - 2.0 * a11) / d4;

    g.alpha[0] = -e1m;
    g.alpha[1] = -e1m;
    g.alpha[2] = 1.0;
    g.alpha[3] = -e2m;
    g.alpha[4] = -e2m;
    g.alpha[5] = 1.0;
    g.alpha[6] = -n3 / (d3 * d3);
    g.alpha[7] = a7 * (-2.0 * e3m / (a8 * a8 * a8) + 2.0 * chi3 / (a8 * a8)) / d3 -
                 a7 * a7 * n3 / (d3 * d3);
    g.alpha[8] = 1.0;
    g.alpha[9] = -n4 / (d4 * d4);
    g.alpha[10] = a10 * (2.0 * a11 * e4 - 2.0 * chi4) / d4 - a10 * a10 * n4 / (d4 * d4);
    g.alpha[11] = 1.0;
    return g;
}

// ---------------------------------------------------------------------------
// xi_GeLu: simplified trainable form.
// ---------------------------------------------------------------------------

// Full per-term initialization constants of the integrated adversarial GeLu,
// plus the merged parameters of the simplified form actually trained:
//   xi_GeLu(chi1, chibar) =
//       (a1 chi1 + a2) (d1 sinh((a4 b + a5) chibar) + d2 chibar + d3)
// with chibar = (chi2 + chi3 + chi4) / 3 and b the merged beta.
struct XiGeluParams {
    std::array<TrainableScalar, 13> alpha;
    std::array<TrainableScalar, 3> beta_full;
    // Simplified form.
    TrainableScalar delta1, delta2, delta3, beta;

    XiGeluParams() {
        const double pi = 3.14159265358979323846;
        const double a1 = 1.0 / (0.5 * (1.0 + std::tanh(kSqrt2OverPi * (1.0 + kGeluCubic))));
        const double a3 = 17757500000.0 * pi / 10418555191.0;
        const double a4 = 20325.0 * std::sqrt(2.0) / (7103.0 * std::sqrt(pi));
        const double a5 = 2.0 * kSqrt2OverPi;
        const double a6 = 78125.32 * std::sqrt(2.0 * pi) / 301716.0;
        const double a8 = 185011841.0 * pi / 3029441250.0;
        const double a9 = 26047.0 * std::sqrt(pi) / (74525.0 * std::sqrt(2.0));
        const double init[13] = {a1, 0.0, a3, a4, a5, a6, 0.0, a8, a9, 0.0, a8, a9, 0.0};
        for (int i = 0; i < 13; ++i)
            alpha[i] = TrainableScalar("alpha" + std::to_string(i + 1), init[i]);
        for (int i = 0; i < 3; ++i)
            beta_full[i] = TrainableScalar("beta" + std::to_string(i + 1), 1.0);
        delta1 = TrainableScalar("delta1", (a3 + a8 + a8) / 3.0);
        delta2 = TrainableScalar("delta2", (a6 + a9 + a9) / 3.0);
        delta3 = TrainableScalar("delta3", 0.0);
        beta = TrainableScalar("beta", 1.0);
    }

    double a(int one_based) const { return alpha[one_based - 1].value; }
};

inline double xi_gelu_sinh_arg(double chibar, const XiGeluParams& p) {
    return (p.a(4) * p.beta.value + p.a(5)) * chibar;
}

inline double xi_gelu_forward(double chi1, double chibar, const XiGeluParams& p) {
    const double s = xi_gelu_sinh_arg(chibar, p);
    if (std::abs(s) > 700.0)
        throw NumericError("xi_gelu_forward: sinh argument overflows");
    const double second = p.delta1.value * std::sinh(s) + p.delta2.value * chibar +
                          p.delta3.value;
    return (p.a(1) * chi1 + p.a(2)) * second;
}

// Gradient of the simplified form in its 10 directions:
// chi1, chibar, alpha1, alpha2, alpha4, alpha5, delta1, delta2, delta3, beta.
struct XiGeluGrad {
    double chi1 = 0.0, chibar = 0.0;
    double a1 = 0.0, a2 = 0.0, a4 = 0.0, a5 = 0.0;
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
    double beta = 0.0;
};

inline XiGeluGrad xi_gelu_forward_grad(double chi1, double chibar, const XiGeluParams& p) {
    const double s = xi_gelu_sinh_arg(chibar, p);
    if (std::abs(s) > 700.0)
        throw NumericError("xi_gelu_forward_grad: sinh argument overflows");
    const double sh = std::sinh(s), ch = std::cosh(s);
    const double first = p.a(1) * chi1 + p.a(2);
    const double second = p.delta1.value * sh + p.delta2.value * chibar + p.delta3.value;
    XiGeluGrad g;
    g.chi1 = p.a(1) * second;
    g.chibar = first * (p.delta1.value * ch * (p.a(4) * p.beta.value + p.a(5)) +
                        p.delta2.value);
    g.a1 = chi1 * second;
    g.a2 = second;
    g.a4 = first * p.delta1.value * ch * p.beta.value * chibar;
    g.a5 = first * p.delta1.value * ch * chibar;
    g.d1 = first * sh;
    g.d2 = first * chibar;
    g.d3 = first;
    g.beta = first * p.delta1.value * ch * p.a(4) * chibar;
    return g;
}

// ---------------------------------------------------------------------------
// L2 penalty over trainable scalars.
// ---------------------------------------------------------------------------

// coeff * sum(value^2) over penalized scalars. d(penalty)/d(value) is
// exactly 2 * coeff * value; accumulate_l2_penalty_grads applies it.
inline double l2_penalty(const std::vector<const TrainableScalar*>& params, double coeff) {
    if (coeff < 0.0) throw DomainError("l2_penalty: coeff must be >= 0");
    double s = 0.0;
    for (const auto* p : params)
        if (p->penalized) s += p->value * p->value;
    return coeff * s;
}

inline void accumulate_l2_penalty_grads(std::vector<TrainableScalar*>& params, double coeff,
                                        double upstream = 1.0) {
    if (coeff < 0.0) throw DomainError("l2_penalty: coeff must be >= 0");
    for (auto* p : params)
        if (p->penalized) p->grad += upstream * 2.0 * coeff * p->value;
}

} // namespace advact
