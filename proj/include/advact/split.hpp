#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>

#include "advact/activations.hpp"
#include "advact/error.hpp"

namespace advact {

// ---------------------------------------------------------------------------
// HD-FGD recombination formulas.
//
// A split layer feeds k parallel pre-activations chi_i = x W_i into one of
// the k-ary formulas below. Every formula reduces to its parent scalar
// activation when all chi_i are equal, which is what the identity-init
// reduction tests pin down.
// ---------------------------------------------------------------------------

inline void require_exp_range(double chi, const char* who) {
    if (std::abs(chi) > 700.0)
        throw NumericError(std::string(who) + ": |chi| > 700 overflows exp");
}

// Tanh(chi1, chi2) = sigmoid(chi1) + sigmoid(chi2) - 1.
inline double tanh_split2(double chi1, double chi2) {
    return sigmoid(chi1) + sigmoid(chi2) - 1.0;
}

inline std::array<double, 2> tanh_split2_partials(double chi1, double chi2) {
    return {sigmoid_prime(chi1), sigmoid_prime(chi2)};
}

// Tanh(chi1..chi4) = (e^chi1 - e^-chi2) / (e^chi3 + e^-chi4).
// The e^-chi2 / e^-chi4 sign convention is the one under which the formula
// reduces to tanh at chi1 = chi2 = chi3 = chi4.
inline double tanh_split4(double chi1, double chi2, double chi3, double chi4) {
    require_exp_range(chi1, "tanh_split4");
    require_exp_range(chi2, "tanh_split4");
    require_exp_range(chi3, "tanh_split4");
    require_exp_range(chi4, "tanh_split4");
    return (std::exp(chi1) - std::exp(-chi2)) / (std::exp(chi3) + std::exp(-chi4));
}

inline std::array<double, 4> tanh_split4_partials(double chi1, double chi2, double chi3,
                                                  double chi4) {
    require_exp_range(chi1, "tanh_split4_partials");
    require_exp_range(chi2, "tanh_split4_partials");
    require_exp_range(chi3, "tanh_split4_partials");
    require_exp_range(chi4, "tanh_split4_partials");
    const double e1 = std::exp(chi1);
    const double e2m = std::exp(-chi2);
    const double e3 = std::exp(chi3);
    const double e4m = std::exp(-chi4);
    const double den = e3 + e4m;
    const double den2 = den * den;
    return {
        e1 / den,
        e2m / den,
        (e2m - e1) * e3 / den2,
        (e1 - e2m) * e4m / den2,
    };
}

// GeLu(chi1..chi4) = 0.5 chi1 (1 + tanh(sqrt(2/pi) chi2 (1 + 0.044715 chi3 chi4))).
inline double gelu_split4(double chi1, double chi2, double chi3, double chi4) {
    const double inner = kSqrt2OverPi * chi2 * (1.0 + kGeluCubic * chi3 * chi4);
    return 0.5 * chi1 * (1.0 + tanh_act(inner));
}

inline std::array<double, 4> gelu_split4_partials(double chi1, double chi2, double chi3,
                                                  double chi4) {
    const double inner = kSqrt2OverPi * chi2 * (1.0 + kGeluCubic * chi3 * chi4);
    const double t = tanh_act(inner);
    const double sech2 = 1.0 - t * t;
    const double half_chi1_sech2 = 0.5 * chi1 * sech2;
    return {
        0.5 * (1.0 + t),
        half_chi1_sech2 * kSqrt2OverPi * (1.0 + kGeluCubic * chi3 * chi4),
        half_chi1_sech2 * kSqrt2OverPi * chi2 * kGeluCubic * chi4,
        half_chi1_sech2 * kSqrt2OverPi * chi2 * kGeluCubic * chi3,
    };
}

enum class SplitFormula { Tanh2, Tanh4, Gelu4 };

inline int split_arity(SplitFormula f) { return f == SplitFormula::Tanh2 ? 2 : 4; }

inline std::string split_formula_name(SplitFormula f) {
    switch (f) {
        case SplitFormula::Tanh2: return "tanh2";
        case SplitFormula::Tanh4: return "tanh4";
        case SplitFormula::Gelu4: return "gelu4";
    }
    return "?";
}

// The scalar activation a formula reduces to on the diagonal chi_i = x.
inline double split_reference(SplitFormula f, double x) {
    switch (f) {
        case SplitFormula::Tanh2: return tanh_act(x);
        case SplitFormula::Tanh4: return tanh_act(x);
        case SplitFormula::Gelu4: return gelu_tanh_approx(x);
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// Parameter-count matching (parallel-matrix count).
// ---------------------------------------------------------------------------

// Exact rational, used so the parameter-parity identities can be asserted
// without floating-point slack.
struct Rational {
    std::int64_t num = 0;
    std::int64_t den = 1;

    Rational() = default;
    Rational(std::int64_t n, std::int64_t d = 1) : num(n), den(d) { normalize(); }

    void normalize() {
        if (den == 0) throw DomainError("Rational: zero denominator");
        if (den < 0) {
            num = -num;
            den = -den;
        }
        const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
    }

    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }

    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }

    Rational operator*(const Rational& o) const {
        return Rational(num * o.num, den * o.den);
    }
    Rational operator+(const Rational& o) const {
        return Rational(num * o.den + o.num * den, den * o.den);
    }
};

// n such that the k-way split layer pair has exactly the baseline's
// parameter count:
//   n = (psiI*psiH*k + psiH*psiO) / (psiI*psiH + psiH*psiO).
// With psiI = psiO and psiH = 4*psiI this collapses to (k+1)/2.
inline Rational parallel_matrix_count(std::int64_t psi_i, std::int64_t psi_h,
                                      std::int64_t psi_o, std::int64_t k) {
    if (psi_i <= 0 || psi_h <= 0 || psi_o <= 0 || k <= 0)
        throw DomainError("parallel_matrix_count: all arguments must be positive");
    return Rational(psi_i * psi_h * k + psi_h * psi_o, psi_i * psi_h + psi_h * psi_o);
}

// Branch hidden width for a given divisor n (floor rule; callers report the
// residual deficit rather than padding).
inline std::int64_t branch_width(std::int64_t psi_h, double n) {
    if (!(n >= 1.0)) throw DomainError("branch_width: n must be >= 1");
    const auto w = static_cast<std::int64_t>(std::floor(static_cast<double>(psi_h) / n));
    if (w < 1) throw DomainError("branch_width: floor(psi_h / n) must be >= 1");
    return w;
}

// Parameter deficit of the floored split layer pair against the dense
// baseline; zero when n divides psi_h and n solves the matching equation.
inline std::int64_t split_param_deficit(std::int64_t psi_i, std::int64_t psi_h,
                                        std::int64_t psi_o, std::int64_t k, double n) {
    const std::int64_t w = branch_width(psi_h, n);
    const std::int64_t baseline = psi_i * psi_h + psi_h * psi_o;
    const std::int64_t split = psi_i * w * k + w * psi_o;
    return baseline - split;
}

} // namespace advact
