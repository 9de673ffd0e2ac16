#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include "advact/diagnostics.hpp"
#include "advact/network.hpp"
#include "advact/rng.hpp"
#include "advact/trainer.hpp"

using namespace advact;

namespace {

// Reference binning routine, independent of Histogram::add.
std::vector<std::uint64_t> oracle_bins(const std::vector<double>& values, std::size_t bins,
                                       double lo, double hi) {
    std::vector<std::uint64_t> counts(bins + 2, 0);
    const double width = (hi - lo) / static_cast<double>(bins);
    for (double v : values) {
        if (v < lo) {
            ++counts[0];
        } else if (v > hi) {
            ++counts[bins + 1];
        } else {
            std::size_t b = 0;
            while (b + 1 < bins && v >= lo + width * static_cast<double>(b + 1)) ++b;
            ++counts[b + 1];
        }
    }
    return counts;
}

} // namespace

TEST_CASE("histogram boundary rules") {
    Histogram h = histogram({0.5}, 2, 0.0, 1.0);
    CHECK(h.counts == std::vector<std::uint64_t>{0, 0, 1, 0});  // second regular bin

    Histogram empty = histogram({}, 4, 0.0, 1.0);
    for (auto c : empty.counts) CHECK(c == 0);

    // hi itself lands in the last regular bin, not in overflow
    Histogram edge = histogram({1.0, -0.1, 1.1}, 2, 0.0, 1.0);
    CHECK(edge.counts == std::vector<std::uint64_t>{1, 0, 1, 1});

    CHECK_THROWS_AS(histogram({}, 0, 0.0, 1.0), DomainError);
    CHECK_THROWS_AS(histogram({}, 4, 1.0, 1.0), DomainError);
}

TEST_CASE("histogram matches the oracle on 10k normal samples") {
    Rng rng(2024);
    std::vector<double> samples;
    samples.reserve(10000);
    for (int i = 0; i < 10000; ++i) samples.push_back(rng.normal());
    Histogram h = histogram(samples, 64, -4.0, 4.0);
    CHECK(h.counts == oracle_bins(samples, 64, -4.0, 4.0));
    CHECK(h.total() == samples.size());
}

TEST_CASE("gradient_chain_ratio") {
    CHECK(gradient_chain_ratio({2.5, 2.5}) == 1.0);
    CHECK(gradient_chain_ratio({1e-6, 1.0}) == Catch::Approx(1e-6));
    CHECK(gradient_chain_ratio({0.7}) == 1.0);  // single activated layer
    CHECK(std::isinf(gradient_chain_ratio({1.0, 0.0})));
    CHECK_THROWS_AS(gradient_chain_ratio({}), ContractError);
}

TEST_CASE("ics_drift") {
    LayerEpochStats a, b;
    a.layer_index = b.layer_index = 3;
    a.act_mean = 0.0;
    a.act_std = 1.0;
    b.act_mean = 0.3;
    b.act_std = 1.1;
    CHECK(ics_drift(a, a) == 0.0);
    CHECK(ics_drift(a, b) == Catch::Approx(0.4).epsilon(1e-12));
    LayerEpochStats c;
    c.layer_index = 4;
    CHECK_THROWS_AS(ics_drift(a, c), ContractError);
}

TEST_CASE("collector accumulates per layer per epoch and feeds the CSV") {
    std::vector<LayerSpec> spec;
    spec.push_back({.kind = LayerKind::Dense, .width = 4});
    spec.push_back({.kind = LayerKind::Activation, .activation = ActTag::Sigmoid});
    spec.push_back({.kind = LayerKind::Dense, .width = 4});
    spec.push_back({.kind = LayerKind::Activation, .activation = ActTag::Sigmoid});
    spec.push_back({.kind = LayerKind::Dense, .width = 1});
    Network net = build_network(2, spec, {}, 17);

    Rng rng(6);
    Matrix x(8, 2);
    Matrix y(8, 1);
    for (std::size_t i = 0; i < x.size(); ++i) x.data()[i] = rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < y.size(); ++i) y.data()[i] = rng.uniform(-1.0, 1.0);

    DiagnosticsCollector collector("run0");
    for (std::size_t epoch = 0; epoch < 2; ++epoch) {
        Tape tape;
        ForwardRecord rec = net.forward(tape, x, true);
        Value loss = tape.mse_loss(rec.output, y);
        tape.backward(loss);
        collector.observe_batch(tape, rec.taps);
        collector.end_epoch(epoch);
    }
    // two activated layers, two epochs
    REQUIRE(collector.rows().size() == 4);
    for (const auto& r : collector.rows()) {
        CHECK(r.grad_hist.total() == r.sample_count);
        CHECK(r.act_std >= 0.0);
        CHECK(r.grad_norm >= 0.0);
    }
    // drift defined only from the second epoch on
    CHECK(std::isnan(collector.rows()[0].ics_drift));
    CHECK_FALSE(std::isnan(collector.rows()[2].ics_drift));

    CHECK(collector.grad_norms_at(0).size() == 2);
    CHECK(std::isfinite(collector.chain_ratio_at(0)));

    std::ostringstream csv;
    collector.write_csv(csv);
    const std::string text = csv.str();
    CHECK(text.find("run_id,epoch,layer,grad_norm,grad_hist,act_mean,act_std,ics_drift") == 0);
    CHECK(text.find("run0,0,") != std::string::npos);
    CHECK(text.find(';') != std::string::npos);  // joined histogram counts
    // one row per (layer, epoch) plus the header line
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}

TEST_CASE("hook neutrality: collector does not change the trajectory") {
    auto run = [](bool with_hooks) {
        Rng rng(91);
        Dataset d;
        d.features = Matrix(60, 2);
        d.labels = Matrix(60, 1);
        for (std::size_t i = 0; i < d.features.size(); ++i)
            d.features.data()[i] = rng.uniform(-1.0, 1.0);
        for (std::size_t i = 0; i < d.labels.size(); ++i)
            d.labels.data()[i] = rng.uniform(-1.0, 1.0);
        SplitDataset split = train_test_split(d, 91);
        std::vector<LayerSpec> spec;
        spec.push_back({.kind = LayerKind::Dense, .width = 5});
        spec.push_back({.kind = LayerKind::BatchNorm});
        spec.push_back({.kind = LayerKind::Activation, .activation = ActTag::Sigmoid});
        spec.push_back({.kind = LayerKind::Dense, .width = 1});
        Network net = build_network(2, spec, {PolicyMode::GA}, 13);
        TrainConfig cfg;
        cfg.epochs = 4;
        cfg.batch_size = 16;
        cfg.seed = 13;
        DiagnosticsCollector collector("neutral");
        return train(net, split, cfg, with_hooks ? &collector : nullptr);
    };
    TrainReport with = run(true);
    TrainReport without = run(false);
    CHECK(with.loss_curve == without.loss_curve);   // bitwise
    CHECK(with.final_test.mse == without.final_test.mse);
}
