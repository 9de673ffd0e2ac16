#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "advact/dataset.hpp"
#include "advact/diagnostics.hpp"
#include "advact/error.hpp"
#include "advact/network.hpp"
#include "advact/rng.hpp"
#include "advact/tape.hpp"

namespace advact {

enum class LossKind { MSE, CrossEntropy };

inline std::string loss_kind_name(LossKind k) {
    return k == LossKind::MSE ? "mse" : "cross_entropy";
}

struct TrainConfig {
    std::size_t epochs = 150;
    std::size_t batch_size = 128;
    double lr = 0.1;
    std::size_t lr_half_life = 20;  // epochs per halving
    double l2_coeff = 0.0;
    double clamp_bound = 0.0;  // elementwise parameter-gradient clamp, 0 = off
    std::uint64_t seed = 0;
    LossKind loss = LossKind::MSE;
    bool checked = false;  // NaN/Inf rejection on the tape
};

// Step decay: lr * 0.5^floor(epoch / half_life). Halves exactly at
// multiples of the half life, non-increasing in epoch.
inline double lr_at(std::size_t epoch, const TrainConfig& cfg) {
    if (cfg.lr_half_life == 0) return cfg.lr;
    return cfg.lr * std::pow(0.5, static_cast<double>(epoch / cfg.lr_half_life));
}

// param <- param - lr * grad for every bound parameter, trainable scalars
// included; gradient slots are zeroed afterward. A NaN gradient aborts with
// the owning layer's name.
inline void sgd_step(Tape& tape, ForwardRecord& rec, double lr) {
    for (auto& b : rec.matrices) {
        const TapeNode& n = tape.node(b.leaf.index);
        if (!n.grad_allocated) continue;
        if (!n.grad.all_finite())
            throw NumericError("sgd_step: non-finite gradient at " + n.label);
        for (std::size_t i = 0; i < b.host->size(); ++i)
            b.host->data()[i] -= lr * n.grad.data()[i];
    }
    for (auto& b : rec.scalars) {
        const TapeNode& n = tape.node(b.leaf.index);
        if (!n.grad_allocated) {
            b.host->grad = 0.0;
            continue;
        }
        const double g = n.grad(0, 0);
        if (!std::isfinite(g))
            throw NumericError("sgd_step: non-finite gradient at " + n.label);
        b.host->grad = g;
        b.host->value -= lr * g;
        b.host->grad = 0.0;
    }
}

// Elementwise clamp of every parameter gradient on the tape; the tap nodes
// used by diagnostics keep their raw gradients.
inline void clamp_parameter_grads(Tape& tape, ForwardRecord& rec, double bound) {
    for (auto& b : rec.matrices) {
        TapeNode& n = tape.node(b.leaf.index);
        if (n.grad_allocated) n.grad = clamp_gradient(n.grad, bound);
    }
    for (auto& b : rec.scalars) {
        TapeNode& n = tape.node(b.leaf.index);
        if (n.grad_allocated) n.grad = clamp_gradient(n.grad, bound);
    }
}

struct Metrics {
    double mse = std::numeric_limits<double>::quiet_NaN();
    double accuracy = std::numeric_limits<double>::quiet_NaN();
    double top5_error = std::numeric_limits<double>::quiet_NaN();
};

// Eval-mode forward over the dataset in batches.
inline Metrics evaluate(Network& net, const Dataset& data, LossKind loss,
                        std::size_t batch_size = 256) {
    Metrics m;
    if (data.size() == 0) return m;
    double se = 0.0;
    std::size_t correct = 0, top5_missed = 0, total = 0;
    for (std::size_t start = 0; start < data.size(); start += batch_size) {
        const std::size_t stop = std::min(data.size(), start + batch_size);
        Matrix xb(stop - start, data.features.cols());
        for (std::size_t i = start; i < stop; ++i)
            for (std::size_t j = 0; j < data.features.cols(); ++j)
                xb(i - start, j) = data.features(i, j);
        Tape tape;
        ForwardRecord rec = net.forward(tape, xb, /*training=*/false);
        const Matrix& out = rec.output.val();
        if (loss == LossKind::MSE) {
            for (std::size_t i = start; i < stop; ++i) {
                const double d = out(i - start, 0) - data.labels(i, 0);
                se += d * d;
            }
        } else {
            const std::size_t k = out.cols();
            const std::size_t topk = std::min<std::size_t>(5, k);
            for (std::size_t i = start; i < stop; ++i) {
                const auto y = static_cast<std::size_t>(data.labels(i, 0));
                std::vector<std::size_t> order(k);
                std::iota(order.begin(), order.end(), 0);
                std::partial_sort(order.begin(), order.begin() + topk, order.end(),
                                  [&](std::size_t a, std::size_t b) {
                                      return out(i - start, a) > out(i - start, b);
                                  });
                if (order[0] == y) ++correct;
                bool in_topk = false;
                for (std::size_t t = 0; t < topk; ++t)
                    if (order[t] == y) in_topk = true;
                if (!in_topk) ++top5_missed;
            }
        }
        total += stop - start;
    }
    if (loss == LossKind::MSE) {
        m.mse = se / static_cast<double>(total);
    } else {
        m.accuracy = static_cast<double>(correct) / static_cast<double>(total);
        m.top5_error = static_cast<double>(top5_missed) / static_cast<double>(total);
    }
    return m;
}

struct TrainReport {
    std::uint64_t seed = 0;
    std::vector<double> loss_curve;  // per-epoch sample-weighted mean batch loss
    Metrics initial_test;
    Metrics final_train;
    Metrics final_test;
    std::size_t parameter_count = 0;
};

// One SGD training run. Deterministic: minibatch order comes from a
// dedicated per-epoch stream derived from cfg.seed, and diagnostics hooks
// receive read-only snapshots that cannot perturb the trajectory.
inline TrainReport train(Network& net, const SplitDataset& data, const TrainConfig& cfg,
                         DiagnosticsCollector* hooks = nullptr) {
    if (data.train.features.cols() != net.input_dim())
        throw ShapeError("train: dataset width " + std::to_string(data.train.features.cols()) +
                         " vs network input " + std::to_string(net.input_dim()));
    TrainReport report;
    report.seed = cfg.seed;
    report.parameter_count = net.count_parameters();
    report.initial_test = evaluate(net, data.test, cfg.loss);

    const std::size_t n = data.train.size();
    std::vector<std::size_t> order(n);
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::iota(order.begin(), order.end(), 0);
        Rng shuffle_rng = derive_stream(cfg.seed, stream_tag::kShuffle, epoch);
        shuffle_rng.shuffle(order);
        const double lr = lr_at(epoch, cfg);
        double loss_sum = 0.0;
        std::size_t loss_n = 0;
        for (std::size_t start = 0; start < n; start += cfg.batch_size) {
            const std::size_t stop = std::min(n, start + cfg.batch_size);
            const std::size_t bs = stop - start;
            if (bs < 2 && n > 1) continue;  // batch-norm contract
            Matrix xb(bs, data.train.features.cols());
            Matrix yb(bs, data.train.labels.cols());
            for (std::size_t i = 0; i < bs; ++i) {
                const std::size_t src = order[start + i];
                for (std::size_t j = 0; j < xb.cols(); ++j)
                    xb(i, j) = data.train.features(src, j);
                for (std::size_t j = 0; j < yb.cols(); ++j)
                    yb(i, j) = data.train.labels(src, j);
            }
            Tape tape(cfg.checked);
            try {
                ForwardRecord rec = net.forward(tape, xb, /*training=*/true);
                Value loss = cfg.loss == LossKind::MSE
                                 ? tape.mse_loss(rec.output, yb)
                                 : tape.cross_entropy_loss(rec.output, yb);
                if (cfg.l2_coeff > 0.0 && !rec.scalars.empty()) {
                    Value penalty = tape.leaf(Matrix::scalar(0.0));
                    for (auto& sb : rec.scalars) {
                        if (!sb.host->penalized) continue;
                        penalty = tape.add(penalty, tape.hadamard(sb.leaf, sb.leaf));
                    }
                    loss = tape.add(loss, tape.scale(penalty, cfg.l2_coeff));
                }
                loss_sum += loss.val()(0, 0) * static_cast<double>(bs);
                loss_n += bs;
                tape.backward(loss);
                if (hooks) hooks->observe_batch(tape, rec.taps);
                if (cfg.clamp_bound > 0.0) clamp_parameter_grads(tape, rec, cfg.clamp_bound);
                sgd_step(tape, rec, lr);
            } catch (const NumericError& e) {
                throw NumericError("epoch " + std::to_string(epoch) + ", batch " +
                                   std::to_string(start / cfg.batch_size) + ": " + e.what());
            }
        }
        if (hooks) hooks->end_epoch(epoch);
        report.loss_curve.push_back(loss_n ? loss_sum / static_cast<double>(loss_n) : 0.0);
    }

    report.final_train = evaluate(net, data.train, cfg.loss);
    report.final_test = evaluate(net, data.test, cfg.loss);
    return report;
}

} // namespace advact
