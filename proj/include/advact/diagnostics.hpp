#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "advact/error.hpp"
#include "advact/matrix.hpp"
#include "advact/network.hpp"
#include "advact/tape.hpp"

namespace advact {

// Uniform-width histogram over [lo, hi] plus two overflow bins. Layout:
// counts[0] underflow, counts[1..bins] the regular bins, counts[bins+1]
// overflow. The last regular bin is right-closed so hi itself lands in it.
struct Histogram {
    double lo = 0.0, hi = 0.0;
    std::vector<std::uint64_t> counts;

    Histogram() = default;
    Histogram(std::size_t bins, double lo_, double hi_) : lo(lo_), hi(hi_) {
        if (bins < 1 || !(lo < hi)) throw DomainError("histogram: bad bins/range");
        counts.assign(bins + 2, 0);
    }

    std::size_t bins() const { return counts.size() - 2; }

    void add(double v) {
        if (v < lo) {
            ++counts.front();
        } else if (v > hi) {
            ++counts.back();
        } else {
            const std::size_t b = bins();
            auto idx = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(b));
            if (idx >= b) idx = b - 1;  // v == hi
            ++counts[idx + 1];
        }
    }

    std::uint64_t total() const {
        std::uint64_t t = 0;
        for (auto c : counts) t += c;
        return t;
    }
};

inline Histogram histogram(const std::vector<double>& values, std::size_t bins, double lo,
                           double hi) {
    Histogram h(bins, lo, hi);
    for (double v : values) h.add(v);
    return h;
}

// Per-layer per-epoch gradient and pre-activation statistics.
struct LayerEpochStats {
    std::size_t layer_index = 0;
    std::string layer_tag;
    std::size_t epoch = 0;
    double grad_norm = 0.0;   // L2 over every gradient entry seen this epoch
    Histogram grad_hist;
    double act_mean = 0.0;    // pre-activation first moments
    double act_std = 0.0;
    std::uint64_t sample_count = 0;  // gradient entries observed
    double ics_drift = std::numeric_limits<double>::quiet_NaN();  // vs previous epoch
};

// Ratio of first to last activated-layer gradient norm; the empirical proxy
// for the stability of the layerwise gradient product. A single activated
// layer has ratio 1 by definition; a zero denominator reports +inf.
inline double gradient_chain_ratio(const std::vector<double>& norms) {
    if (norms.empty()) throw ContractError("gradient_chain_ratio: no activated layers");
    if (norms.size() == 1) return 1.0;
    if (norms.back() == 0.0) return std::numeric_limits<double>::infinity();
    return norms.front() / norms.back();
}

// First-two-moments drift between consecutive epochs of the same layer.
inline double ics_drift(const LayerEpochStats& prev, const LayerEpochStats& curr) {
    if (prev.layer_index != curr.layer_index)
        throw ContractError("ics_drift: layer ids differ");
    return std::abs(curr.act_mean - prev.act_mean) + std::abs(curr.act_std - prev.act_std);
}

// Accumulates tap observations over the batches of an epoch and freezes one
// LayerEpochStats row per activated layer at end_epoch(). Observations never
// feed back into training.
class DiagnosticsCollector {
  public:
    explicit DiagnosticsCollector(std::string run_id, std::size_t bins = 64,
                                  double grad_range = 1.0)
        : run_id_(std::move(run_id)), bins_(bins), grad_range_(grad_range) {}

    const std::string& run_id() const { return run_id_; }

    // Call after backward(): tap nodes then carry both values and gradients.
    void observe_batch(const Tape& tape, const std::vector<Tap>& taps) {
        for (const auto& tap : taps) {
            Acc& acc = accs_.try_emplace(tap.layer_index, Acc{}).first->second;
            if (acc.hist.counts.empty()) acc.hist = Histogram(bins_, -grad_range_, grad_range_);
            acc.tag = tap.tag;
            for (const auto& node : tap.nodes) {
                const TapeNode& n = tape.node(node.index);
                for (std::size_t i = 0; i < n.value.size(); ++i) {
                    const double v = n.value.data()[i];
                    acc.value_sum += v;
                    acc.value_sumsq += v * v;
                    ++acc.value_n;
                }
                if (!n.grad_allocated) continue;
                for (std::size_t i = 0; i < n.grad.size(); ++i) {
                    const double g = n.grad.data()[i];
                    acc.grad_sumsq += g * g;
                    acc.hist.add(g);
                    ++acc.grad_n;
                }
            }
        }
    }

    void end_epoch(std::size_t epoch) {
        for (auto& [layer, acc] : accs_) {
            LayerEpochStats row;
            row.layer_index = layer;
            row.layer_tag = acc.tag;
            row.epoch = epoch;
            row.grad_norm = std::sqrt(acc.grad_sumsq);
            row.grad_hist = acc.hist;
            if (acc.value_n > 0) {
                const double n = static_cast<double>(acc.value_n);
                row.act_mean = acc.value_sum / n;
                const double var = acc.value_sumsq / n - row.act_mean * row.act_mean;
                row.act_std = std::sqrt(std::max(0.0, var));
            }
            row.sample_count = acc.grad_n;
            auto prev = last_row_.find(layer);
            if (prev != last_row_.end()) row.ics_drift = ics_drift(prev->second, row);
            last_row_[layer] = row;
            rows_.push_back(std::move(row));
        }
        accs_.clear();
    }

    const std::vector<LayerEpochStats>& rows() const { return rows_; }

    // Activated-layer gradient norms of one epoch, in network order.
    std::vector<double> grad_norms_at(std::size_t epoch) const {
        std::vector<double> out;
        for (const auto& r : rows_)
            if (r.epoch == epoch) out.push_back(r.grad_norm);
        return out;
    }

    double chain_ratio_at(std::size_t epoch) const {
        return gradient_chain_ratio(grad_norms_at(epoch));
    }

    // Mean ics_drift over all layers and epochs that have one.
    double mean_ics_drift() const {
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& r : rows_)
            if (!std::isnan(r.ics_drift)) {
                s += r.ics_drift;
                ++n;
            }
        return n ? s / static_cast<double>(n) : 0.0;
    }

    // One row per (layer, epoch): run_id, epoch, layer, grad_norm,
    // grad_hist (semicolon-joined counts), act_mean, act_std, ics_drift.
    void write_csv(std::ostream& out) const {
        out << "run_id,epoch,layer,grad_norm,grad_hist,act_mean,act_std,ics_drift\n";
        out.precision(17);
        for (const auto& r : rows_) {
            out << run_id_ << ',' << r.epoch << ',' << r.layer_index << ',' << r.grad_norm
                << ',';
            for (std::size_t i = 0; i < r.grad_hist.counts.size(); ++i) {
                if (i) out << ';';
                out << r.grad_hist.counts[i];
            }
            out << ',' << r.act_mean << ',' << r.act_std << ',';
            if (std::isnan(r.ics_drift))
                out << "";
            else
                out << r.ics_drift;
            out << '\n';
        }
    }

  private:
    struct Acc {
        std::string tag;
        double value_sum = 0.0, value_sumsq = 0.0;
        std::uint64_t value_n = 0;
        double grad_sumsq = 0.0;
        std::uint64_t grad_n = 0;
        Histogram hist;
    };

    std::string run_id_;
    std::size_t bins_;
    double grad_range_;
    std::map<std::size_t, Acc> accs_;
    std::map<std::size_t, LayerEpochStats> last_row_;
    std::vector<LayerEpochStats> rows_;
};

} // namespace advact
