#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "advact/activations.hpp"
#include "advact/adversarial.hpp"
#include "advact/gradcheck.hpp"
#include "advact/network.hpp"
#include "advact/split.hpp"

namespace advact {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;  // worst deviation or the failing value
};

namespace verify_detail {

inline std::string sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

inline CheckResult grid_max(const std::string& name, double lo, double hi, int points,
                            double tol, const std::function<double(double)>& dev) {
    double worst = 0.0;
    for (int i = 0; i < points; ++i) {
        const double x = lo + (hi - lo) * i / (points - 1);
        worst = std::max(worst, std::abs(dev(x)));
    }
    CheckResult r;
    r.name = name;
    r.pass = worst < tol;
    r.detail = "max dev " + sci(worst) + " (tol " + sci(tol) + ")";
    return r;
}

} // namespace verify_detail

// Closed-form and reciprocity checks: the fast, deterministic part of the
// acceptance surface, also exposed through `advact verify`.
inline std::vector<CheckResult> run_verification() {
    using verify_detail::grid_max;
    std::vector<CheckResult> out;

    // Reciprocity of the plain pair and the lifted pairs.
    out.push_back(grid_max("reciprocity sigmoid' * xi' = 1", -6.0, 6.0, 1000, 1e-12,
                           [](double x) {
                               return sigmoid_prime(x) * xi_sigmoid_prime(x) - 1.0;
                           }));
    for (double alpha : {0.5, 1.0, 2.0}) {
        out.push_back(grid_max(
            "reciprocity (sigmoid' + " + std::to_string(alpha) + ") * xi_theta' = 1", -6.0,
            6.0, 1000, 1e-12, [alpha](double x) {
                return (sigmoid_prime(x) + alpha) * xi_sigmoid_theta_prime(x, alpha) - 1.0;
            }));
    }

    // Antiderivatives: finite differences of the closed forms against the
    // stated derivatives, h = 1e-5.
    out.push_back(grid_max("antiderivative xi_sigmoid", -5.0, 5.0, 201, 1e-6, [](double x) {
        const double fd = finite_difference([](double z) { return xi_sigmoid(z); }, x);
        return rel_err(fd, xi_sigmoid_prime(x));
    }));
    out.push_back(
        grid_max("antiderivative xi_sigmoid_theta (alpha=1)", -5.0, 5.0, 201, 1e-6,
                 [](double x) {
                     const double fd = finite_difference(
                         [](double z) { return xi_sigmoid_theta(z, 1.0); }, x);
                     return rel_err(fd, xi_sigmoid_theta_prime(x, 1.0));
                 }));

    // tanh(x) = 2 sigmoid(2x) - 1.
    out.push_back(grid_max("identity tanh = 2 sigmoid(2x) - 1", -10.0, 10.0, 2001, 1e-14,
                           [](double x) { return tanh_act(x) - std::tanh(x); }));

    // Split reductions on the equal-branch diagonal.
    out.push_back(grid_max("reduction tanh2 -> tanh", -4.0, 4.0, 1000, 1e-12, [](double x) {
        return tanh_split2(2.0 * x, 2.0 * x) - tanh_act(x);
    }));
    out.push_back(grid_max("reduction tanh4 -> tanh", -4.0, 4.0, 1000, 1e-12, [](double x) {
        return tanh_split4(x, x, x, x) - tanh_act(x);
    }));
    out.push_back(grid_max("reduction gelu4 -> gelu", -4.0, 4.0, 1000, 1e-12, [](double x) {
        return gelu_split4(x, x, x, x) - gelu_tanh_approx(x);
    }));

    // Parallel-matrix-count values.
    {
        CheckResult r;
        r.name = "parallel_matrix_count k=3 -> 2, k=4 -> 5/2";
        r.pass = parallel_matrix_count(768, 3072, 768, 3) == Rational(2) &&
                 parallel_matrix_count(768, 3072, 768, 4) == Rational(5, 2);
        r.detail = r.pass ? "exact" : "mismatch";
        out.push_back(r);
    }

    // Initialization constants against independent long-double evaluation.
    {
        CheckResult r;
        r.name = "xi_tanh / xi_gelu initialization constants";
        XiTanhParams t;
        XiGeluParams g;
        const long double pi = 3.14159265358979323846264338327950288L;
        const long double e = 2.71828182845904523536028747135266250L;
        bool pass = true;
        auto close = [&pass](double actual, long double expect) {
            const double ref = static_cast<double>(expect);
            if (std::abs(actual - ref) > 1e-15 * std::max(1.0, std::abs(ref))) pass = false;
        };
        for (int i : {1, 2, 4, 5, 7, 8, 10, 11}) close(t.a(i), e);
        for (int i : {3, 6, 9, 12}) close(t.a(i), 0.0L);
        close(g.a(1), 1.0L / (0.5L * (1.0L + std::tanh(std::sqrt(2.0L / pi) * 1.044715L))));
        close(g.a(3), 17757500000.0L * pi / 10418555191.0L);
        close(g.a(4), 20325.0L / 7103.0L * std::sqrt(2.0L / pi));
        close(g.a(5), 2.0L * std::sqrt(2.0L / pi));
        close(g.a(6), 78125.32L * std::sqrt(2.0L * pi) / 301716.0L);
        close(g.a(8), 185011841.0L * pi / 3029441250.0L);
        close(g.a(9), 26047.0L / 74525.0L * std::sqrt(pi / 2.0L));
        close(g.a(11), 185011841.0L * pi / 3029441250.0L);
        close(g.a(12), 26047.0L / 74525.0L * std::sqrt(pi / 2.0L));
        for (int i : {2, 7, 10, 13}) close(g.a(i), 0.0L);
        close(g.delta1.value, (17757500000.0L * pi / 10418555191.0L +
                               2.0L * (185011841.0L * pi / 3029441250.0L)) / 3.0L);
        close(g.delta2.value, (78125.32L * std::sqrt(2.0L * pi) / 301716.0L +
                               2.0L * (26047.0L / 74525.0L * std::sqrt(pi / 2.0L))) / 3.0L);
        close(g.delta3.value, 0.0L);
        close(g.beta.value, 1.0L);
        r.pass = pass;
        r.detail = pass ? "all within 1e-15" : "constant mismatch";
        out.push_back(r);
    }

    // Parameter accounting on the transformer MLP shape.
    {
        CheckResult r;
        r.name = "parameter accounting 768/3072/768, k=4, n=4";
        std::vector<LayerSpec> base;
        base.push_back({.kind = LayerKind::Dense, .width = 3072, .bias = false});
        base.push_back({.kind = LayerKind::Dense, .width = 768, .bias = false});
        Network baseline = build_network(768, base, {}, 0);

        SplitLinearLayer sl;
        sl.formula = SplitFormula::Tanh4;
        sl.adversarial = true;  // the xi member carries the alpha scalars
        const auto bw = static_cast<std::size_t>(branch_width(3072, 4.0));
        for (int b = 0; b < 4; ++b) sl.weights.emplace_back(768, bw);
        DenseLayer dl;
        dl.weight = Matrix(bw, 768);
        dl.has_bias = false;
        std::vector<Layer> split_layers;
        split_layers.emplace_back(std::move(sl));
        split_layers.emplace_back(std::move(dl));
        Network sa(768, std::move(split_layers), 0, PolicyMode::SA);
        const std::size_t scalars = sa.trainable_scalars().size();

        r.pass = baseline.count_parameters() == 4718592 &&
                 sa.count_parameters() == 2949120 + scalars;
        r.detail = "baseline " + std::to_string(baseline.count_parameters()) + ", split " +
                   std::to_string(sa.count_parameters()) + " (scalars " +
                   std::to_string(scalars) + ")";
        out.push_back(r);
    }

    return out;
}

} // namespace advact
