#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "advact/gradcheck.hpp"
#include "advact/rng.hpp"
#include "advact/split.hpp"

using namespace advact;

TEST_CASE("tanh_split2 values") {
    CHECK(tanh_split2(0.0, 0.0) == 0.0);
    // chi1 = chi2 = 2x reduces to tanh(x)
    CHECK(tanh_split2(1.0, 1.0) == Catch::Approx(0.46211715726000974).epsilon(1e-15));
    CHECK(std::abs(tanh_split2(30.0, -30.0)) < 1e-12);
}

TEST_CASE("tanh_split4 values") {
    CHECK(tanh_split4(0.0, 0.0, 0.0, 0.0) == 0.0);
    CHECK(tanh_split4(0.7, 0.7, 0.7, 0.7) ==
          Catch::Approx(0.6043677771171635).margin(1e-14));
    CHECK(tanh_split4(1.0, 0.0, 0.0, 0.0) ==
          Catch::Approx(0.8591409142295227).epsilon(1e-15));
    CHECK_THROWS_AS(tanh_split4(701.0, 0.0, 0.0, 0.0), NumericError);
}

TEST_CASE("tanh_split4 partials") {
    auto p0 = tanh_split4_partials(0.0, 0.0, 0.0, 0.0);
    CHECK(p0[0] == 0.5);
    CHECK(p0[2] == 0.0);

    auto p = tanh_split4_partials(0.3, -0.2, 0.1, 0.4);
    const double chis[4] = {0.3, -0.2, 0.1, 0.4};
    for (int i = 0; i < 4; ++i) {
        double fd = finite_difference(
            [&](double z) {
                double c[4] = {chis[0], chis[1], chis[2], chis[3]};
                c[i] = z;
                return tanh_split4(c[0], c[1], c[2], c[3]);
            },
            chis[i]);
        CHECK(rel_err(p[i], fd) < 1e-6);
    }
}

TEST_CASE("gelu_split4 values") {
    CHECK(gelu_split4(0.0, 3.7, 0.0, 0.0) == 0.0);
    CHECK(gelu_split4(1.0, 1.0, 1.0, 1.0) ==
          Catch::Approx(0.8411919906082767).epsilon(1e-14));
    CHECK(gelu_split4(1.0, 0.0, 5.0, 5.0) == 0.5);
}

TEST_CASE("gelu_split4 partials") {
    auto p0 = gelu_split4_partials(0.0, 0.0, 0.0, 0.0);
    CHECK(p0[0] == 0.5);
    CHECK(p0[2] == 0.0);

    auto p = gelu_split4_partials(0.5, 0.5, 0.5, 0.5);
    const double chis[4] = {0.5, 0.5, 0.5, 0.5};
    for (int i = 0; i < 4; ++i) {
        double fd = finite_difference(
            [&](double z) {
                double c[4] = {chis[0], chis[1], chis[2], chis[3]};
                c[i] = z;
                return gelu_split4(c[0], c[1], c[2], c[3]);
            },
            chis[i]);
        CHECK(rel_err(p[i], fd) < 1e-6);
    }
}

TEST_CASE("partials match finite differences at random points") {
    Rng rng(1234);
    for (int trial = 0; trial < 200; ++trial) {
        double c[4];
        for (double& v : c) v = rng.uniform(-3.0, 3.0);
        auto pt = tanh_split4_partials(c[0], c[1], c[2], c[3]);
        auto pg = gelu_split4_partials(c[0], c[1], c[2], c[3]);
        auto p2 = tanh_split2_partials(c[0], c[1]);
        for (int i = 0; i < 4; ++i) {
            double fdt = finite_difference(
                [&](double z) {
                    double d[4] = {c[0], c[1], c[2], c[3]};
                    d[i] = z;
                    return tanh_split4(d[0], d[1], d[2], d[3]);
                },
                c[i]);
            CHECK(rel_err(pt[i], fdt) < 1e-6);
            double fdg = finite_difference(
                [&](double z) {
                    double d[4] = {c[0], c[1], c[2], c[3]};
                    d[i] = z;
                    return gelu_split4(d[0], d[1], d[2], d[3]);
                },
                c[i]);
            CHECK(rel_err(pg[i], fdg) < 1e-6);
        }
        for (int i = 0; i < 2; ++i) {
            double fd2 = finite_difference(
                [&](double z) {
                    double d[2] = {c[0], c[1]};
                    d[i] = z;
                    return tanh_split2(d[0], d[1]);
                },
                c[i]);
            CHECK(rel_err(p2[i], fd2) < 1e-6);
        }
    }
}

TEST_CASE("identity-init reduction to the scalar activations") {
    // All branches equal -> the recombination equals the scalar activation.
    for (int i = 0; i < 1000; ++i) {
        const double x = -4.0 + 8.0 * i / 999.0;
        CHECK(std::abs(tanh_split2(2.0 * x, 2.0 * x) - tanh_act(x)) < 1e-12);
        CHECK(std::abs(tanh_split4(x, x, x, x) - tanh_act(x)) < 1e-12);
        CHECK(std::abs(gelu_split4(x, x, x, x) - gelu_tanh_approx(x)) < 1e-12);
    }
}

TEST_CASE("parallel_matrix_count paper values") {
    // psiI = psiO = d, psiH = 4d: n = (k+1)/2.
    CHECK(parallel_matrix_count(16, 64, 16, 3) == Rational(2));
    CHECK(parallel_matrix_count(16, 64, 16, 4) == Rational(5, 2));
    CHECK(parallel_matrix_count(768, 3072, 768, 3) == Rational(2));
    CHECK(parallel_matrix_count(768, 3072, 768, 4) == Rational(5, 2));
}

TEST_CASE("parameter-count identity with the exact n") {
    Rng rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        const std::int64_t pi = 1 + static_cast<std::int64_t>(rng.below(64));
        const std::int64_t ph = 1 + static_cast<std::int64_t>(rng.below(256));
        const std::int64_t po = 1 + static_cast<std::int64_t>(rng.below(64));
        const std::int64_t k = 2 + static_cast<std::int64_t>(rng.below(5));
        Rational n = parallel_matrix_count(pi, ph, po, k);
        // split params = psiI*(psiH/n)*k + (psiH/n)*psiO, as rationals
        Rational w = Rational(ph) * Rational(n.den, n.num);
        Rational split = Rational(pi) * w * Rational(k) + w * Rational(po);
        Rational baseline(pi * ph + ph * po);
        CHECK(split == baseline);
    }
}

TEST_CASE("branch width floor rule and deficit reporting") {
    CHECK(branch_width(3072, 4.0) == 768);
    CHECK(branch_width(10, 2.5) == 4);
    // n = 4 on the transformer MLP shape: fewer parameters than baseline
    CHECK(split_param_deficit(768, 3072, 768, 4, 4.0) == 4718592 - 2949120);
    // exact-match n = 2.5 with a divisible psiH: zero deficit
    CHECK(split_param_deficit(768, 1280, 768, 4, 2.5) == 0);
    CHECK_THROWS_AS(branch_width(4, 8.0), DomainError);
}
