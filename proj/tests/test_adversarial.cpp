#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "advact/adversarial.hpp"
#include "advact/gradcheck.hpp"
#include "advact/rng.hpp"
#include "advact/split.hpp"

using namespace advact;

TEST_CASE("xi_tanh_partials at the origin") {
    auto p = xi_tanh_partials(0.0, 0.0, 0.0, 0.0);
    CHECK(p[0] == 2.0);
    CHECK(p[1] == 2.0);
    // chi3/chi4 components sit on the singular manifold chi1 + chi2 = 0 and
    // come back clamped.
    SingularityPolicy policy;
    CHECK(std::abs(p[2]) <= policy.clamp_bound);
    CHECK(std::abs(p[3]) <= policy.clamp_bound);
}

TEST_CASE("xi_tanh_partials reciprocity away from the singular manifold") {
    Rng rng(42);
    std::size_t hits = 0;
    int checked = 0;
    SingularityPolicy policy;
    while (checked < 100) {
        double c[4];
        for (double& v : c) v = rng.uniform(-3.0, 3.0);
        if (std::abs(std::exp(-c[1]) - std::exp(c[0])) < 1e-3) continue;  // stay clear
        auto fwd = tanh_split4_partials(c[0], c[1], c[2], c[3]);
        auto rec = xi_tanh_partials(c[0], c[1], c[2], c[3], policy, &hits);
        for (int i = 0; i < 4; ++i)
            CHECK(std::abs(fwd[i] * rec[i] - 1.0) < 1e-10);
        ++checked;
    }
    CHECK(hits == 0);
}

TEST_CASE("xi_tanh_partials clamp counter fires on the singular manifold") {
    std::size_t hits = 0;
    SingularityPolicy policy;
    (void)xi_tanh_partials(0.5, -0.5, 1.0, 1.0, policy, &hits);  // e^-chi2 == e^chi1
    CHECK(hits == 2);
}

TEST_CASE("XiTanhParams initialization constants") {
    XiTanhParams p;
    const double e = std::exp(1.0);
    for (int i : {1, 2, 4, 5, 7, 8, 10, 11}) CHECK(p.a(i) == e);
    for (int i : {3, 6, 9, 12}) CHECK(p.a(i) == 0.0);
    for (const auto& a : p.alpha) {
        CHECK(a.penalized);
        CHECK(a.value == a.init);
    }
}

TEST_CASE("xi_tanh_forward term values at the origin with init parameters") {
    XiTanhParams p;
    const double e = std::exp(1.0);
    // first term: -(a1 + a2) * 1 + a3 = -2e
    const double t1 = -(p.a(1) + p.a(2)) + p.a(3);
    CHECK(t1 == Catch::Approx(-2.0 * e).epsilon(1e-15));
    // third term: e (e^-2 - 1) / (e^2 - 1) = -1/e
    const double n3 = 1.0 / (p.a(8) * p.a(8)) - 1.0;
    const double t3 = p.a(7) * n3 / (p.a(7) * p.a(8) - 1.0) + p.a(9);
    CHECK(t3 == Catch::Approx(-1.0 / e).epsilon(1e-13));
    // full forward = T1 + T2 + T3 + T4 = -2e - 2e - 1/e + e
    CHECK(xi_tanh_forward(0.0, 0.0, 0.0, 0.0, p) ==
          Catch::Approx(-8.522724926548578).epsilon(1e-13));
}

TEST_CASE("xi_tanh_forward rejects singular parameters") {
    XiTanhParams p;
    p.alpha[6].value = 2.0;  // alpha7
    p.alpha[7].value = 0.5;  // alpha8 -> product 1
    CHECK_THROWS_AS(xi_tanh_forward(0.0, 0.0, 0.0, 0.0, p), NumericError);
}

TEST_CASE("xi_tanh_forward gradients match finite differences") {
    Rng rng(77);
    for (int trial = 0; trial < 50; ++trial) {
        XiTanhParams p;
        // jitter the trainables away from init, keeping products regular
        for (auto& a : p.alpha) a.value += rng.uniform(-0.3, 0.3);
        double c[4];
        for (double& v : c) v = rng.uniform(-2.0, 2.0);
        XiTanhGrad g = xi_tanh_forward_grad(c[0], c[1], c[2], c[3], p);
        for (int i = 0; i < 4; ++i) {
            double fd = finite_difference(
                [&](double z) {
                    double d[4] = {c[0], c[1], c[2], c[3]};
                    d[i] = z;
                    return xi_tanh_forward(d[0], d[1], d[2], d[3], p);
                },
                c[i]);
            INFO("chi" << i + 1);
            CHECK(rel_err(g.chi[i], fd) < 1e-6);
        }
        for (int i = 0; i < 12; ++i) {
            double fd = finite_difference(
                [&](double z) {
                    XiTanhParams q = p;
                    q.alpha[i].value = z;
                    return xi_tanh_forward(c[0], c[1], c[2], c[3], q);
                },
                p.alpha[i].value);
            INFO("alpha" << i + 1);
            CHECK(rel_err(g.alpha[i], fd) < 1e-6);
        }
    }
}

TEST_CASE("XiGeluParams initialization constants") {
    XiGeluParams p;
    // independently recomputed in long double
    const long double pi = 3.14159265358979323846264338327950288L;
    const long double a1 =
        1.0L / (0.5L * (1.0L + std::tanh(std::sqrt(2.0L / pi) * 1.044715L)));
    const long double a3 = 17757500000.0L * pi / 10418555191.0L;
    const long double a4 = 20325.0L / 7103.0L * std::sqrt(2.0L / pi);
    const long double a5 = 2.0L * std::sqrt(2.0L / pi);
    const long double a6 = 78125.32L * std::sqrt(2.0L * pi) / 301716.0L;
    const long double a8 = 185011841.0L * pi / 3029441250.0L;
    const long double a9 = 26047.0L / 74525.0L * std::sqrt(pi / 2.0L);

    auto close = [](double actual, long double expect) {
        const double e = static_cast<double>(expect);
        return std::abs(actual - e) <= 1e-15 * std::max(1.0, std::abs(e));
    };
    CHECK(close(p.a(1), a1));
    CHECK(p.a(1) == Catch::Approx(1.1887892552054462).epsilon(1e-15));
    CHECK(close(p.a(3), a3));
    CHECK(close(p.a(4), a4));
    CHECK(close(p.a(5), a5));
    CHECK(close(p.a(6), a6));
    CHECK(close(p.a(8), a8));
    CHECK(close(p.a(9), a9));
    CHECK(p.a(11) == p.a(8));
    CHECK(p.a(12) == p.a(9));
    for (int i : {2, 7, 10, 13}) CHECK(p.a(i) == 0.0);
    for (const auto& b : p.beta_full) CHECK(b.value == 1.0);
    CHECK(p.beta.value == 1.0);
    CHECK(close(p.delta1.value, (a3 + a8 + a8) / 3.0L));
    CHECK(close(p.delta2.value, (a6 + a9 + a9) / 3.0L));
    CHECK(p.delta3.value == 0.0);
}

TEST_CASE("xi_gelu_forward vanishes when the second factor does") {
    XiGeluParams p;  // delta3 = 0 at init
    CHECK(xi_gelu_forward(3.7, 0.0, p) == 0.0);
    CHECK(xi_gelu_forward(-123.0, 0.0, p) == 0.0);
}

TEST_CASE("xi_gelu_forward overflow guard") {
    XiGeluParams p;
    CHECK_THROWS_AS(xi_gelu_forward(1.0, 500.0, p), NumericError);
}

TEST_CASE("xi_gelu_forward gradients match finite differences") {
    Rng rng(88);
    for (int trial = 0; trial < 50; ++trial) {
        XiGeluParams p;
        p.alpha[0].value += rng.uniform(-0.2, 0.2);
        p.alpha[1].value += rng.uniform(-0.2, 0.2);
        p.alpha[3].value += rng.uniform(-0.2, 0.2);
        p.alpha[4].value += rng.uniform(-0.2, 0.2);
        p.delta1.value += rng.uniform(-0.2, 0.2);
        p.delta2.value += rng.uniform(-0.2, 0.2);
        p.delta3.value += rng.uniform(-0.2, 0.2);
        p.beta.value += rng.uniform(-0.2, 0.2);
        const double chi1 = rng.uniform(-2.0, 2.0);
        const double chibar = rng.uniform(-2.0, 2.0);
        XiGeluGrad g = xi_gelu_forward_grad(chi1, chibar, p);

        auto fd_for = [&](auto setter, double at) {
            return finite_difference(
                [&](double z) {
                    XiGeluParams q = p;
                    setter(q, z);
                    return xi_gelu_forward(chi1, chibar, q);
                },
                at);
        };
        CHECK(rel_err(g.chi1, finite_difference(
                                  [&](double z) { return xi_gelu_forward(z, chibar, p); },
                                  chi1)) < 1e-6);
        CHECK(rel_err(g.chibar, finite_difference(
                                    [&](double z) { return xi_gelu_forward(chi1, z, p); },
                                    chibar)) < 1e-6);
        CHECK(rel_err(g.a1, fd_for([](XiGeluParams& q, double z) { q.alpha[0].value = z; },
                                   p.a(1))) < 1e-6);
        CHECK(rel_err(g.a2, fd_for([](XiGeluParams& q, double z) { q.alpha[1].value = z; },
                                   p.a(2))) < 1e-6);
        CHECK(rel_err(g.a4, fd_for([](XiGeluParams& q, double z) { q.alpha[3].value = z; },
                                   p.a(4))) < 1e-6);
        CHECK(rel_err(g.a5, fd_for([](XiGeluParams& q, double z) { q.alpha[4].value = z; },
                                   p.a(5))) < 1e-6);
        CHECK(rel_err(g.d1, fd_for([](XiGeluParams& q, double z) { q.delta1.value = z; },
                                   p.delta1.value)) < 1e-6);
        CHECK(rel_err(g.d2, fd_for([](XiGeluParams& q, double z) { q.delta2.value = z; },
                                   p.delta2.value)) < 1e-6);
        CHECK(rel_err(g.d3, fd_for([](XiGeluParams& q, double z) { q.delta3.value = z; },
                                   p.delta3.value)) < 1e-6);
        CHECK(rel_err(g.beta, fd_for([](XiGeluParams& q, double z) { q.beta.value = z; },
                                     p.beta.value)) < 1e-6);
    }
}

TEST_CASE("l2_penalty values and gradient") {
    TrainableScalar a("a", 2.0);
    TrainableScalar b("b", -1.0);
    std::vector<const TrainableScalar*> view = {&a, &b};
    CHECK(l2_penalty(view, 0.0) == 0.0);
    CHECK(l2_penalty({&a}, 0.05) == Catch::Approx(0.2).epsilon(1e-15));
    CHECK(l2_penalty(view, 0.05) == Catch::Approx(0.25).epsilon(1e-15));

    std::vector<TrainableScalar*> mut = {&a, &b};
    accumulate_l2_penalty_grads(mut, 0.05);
    CHECK(a.grad == 2.0 * 0.05 * 2.0);  // exactly 2*coeff*value
    CHECK(b.grad == 2.0 * 0.05 * -1.0);

    // gradient matches finite differences of the penalty itself
    const double fd = finite_difference(
        [&](double z) {
            TrainableScalar t("t", z);
            return l2_penalty({&t}, 0.05);
        },
        2.0);
    CHECK(rel_err(fd, 0.2) < 1e-8);

    CHECK_THROWS_AS(l2_penalty(view, -1.0), DomainError);

    TrainableScalar unpen("u", 5.0, false);
    CHECK(l2_penalty({&unpen}, 1.0) == 0.0);
}
