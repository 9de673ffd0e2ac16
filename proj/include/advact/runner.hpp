#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advact/config.hpp"
#include "advact/dataset.hpp"
#include "advact/diagnostics.hpp"
#include "advact/network.hpp"
#include "advact/split.hpp"
#include "advact/trainer.hpp"

namespace advact {

// ---------------------------------------------------------------------------
// Model assembly from an ExperimentConfig.
// ---------------------------------------------------------------------------

inline ActTag act_tag_from_name(const std::string& name) {
    if (name == "sigmoid") return ActTag::Sigmoid;
    if (name == "sigmoid_theta") return ActTag::SigmoidTheta;
    if (name == "tanh") return ActTag::Tanh;
    if (name == "gelu") return ActTag::Gelu;
    if (name == "relu") return ActTag::Relu;
    throw SpecError("unknown activation '" + name + "'");
}

inline SplitFormula split_formula_from_name(const std::string& name) {
    if (name == "tanh2") return SplitFormula::Tanh2;
    if (name == "tanh4") return SplitFormula::Tanh4;
    if (name == "gelu4") return SplitFormula::Gelu4;
    throw SpecError("unknown split formula '" + name + "'");
}

inline PolicyMode policy_from_name(const std::string& name) {
    if (name == "none") return PolicyMode::None;
    if (name == "ga") return PolicyMode::GA;
    if (name == "sa") return PolicyMode::SA;
    throw SpecError("unknown policy '" + name + "'");
}

// Layer plan for one hidden block:
//   dense nets:  [BatchNorm +] Dense(width) + Activation
//   split nets:  [BatchNorm +] SplitLinear(k branches of floor(width / n))
// followed by a final Dense to the output width. Batch norm precedes each
// linear map (the zero-mean input recommendation), so the activation sees
// the raw pre-activation and its distribution drift stays observable.
inline std::vector<LayerSpec> model_layers(const ExperimentConfig& cfg,
                                           std::size_t output_dim) {
    std::vector<LayerSpec> spec;
    const bool split = cfg.split_activation();
    const bool bn_each = cfg.model.batchnorm && cfg.model.bn_placement == "each_linear";
    if (cfg.model.batchnorm && cfg.model.bn_placement == "input")
        spec.push_back({.kind = LayerKind::BatchNorm});
    for (std::size_t d = 0; d < cfg.model.depth; ++d) {
        if (bn_each) spec.push_back({.kind = LayerKind::BatchNorm});
        if (split) {
            LayerSpec s;
            s.kind = LayerKind::SplitLinear;
            s.width = static_cast<std::size_t>(
                branch_width(static_cast<std::int64_t>(cfg.model.width), cfg.model.parallel_n));
            s.formula = split_formula_from_name(cfg.model.activation);
            s.k = cfg.model.split_k;
            spec.push_back(s);
        } else {
            LayerSpec dl;
            dl.kind = LayerKind::Dense;
            dl.width = cfg.model.width;
            spec.push_back(dl);
            LayerSpec al;
            al.kind = LayerKind::Activation;
            al.activation = act_tag_from_name(cfg.model.activation);
            al.alpha = cfg.model.alpha;
            spec.push_back(al);
        }
    }
    LayerSpec out;
    out.kind = LayerKind::Dense;
    out.width = output_dim;
    spec.push_back(out);
    return spec;
}

inline Network build_from_config(const ExperimentConfig& cfg, std::size_t input_dim,
                                 std::size_t output_dim, std::uint64_t seed) {
    AlternationPolicy policy{policy_from_name(cfg.model.policy)};
    Network net = build_network(input_dim, model_layers(cfg, output_dim), policy, seed);
    net.set_clamp_bound(cfg.model.clamp_bound);
    return net;
}

// ---------------------------------------------------------------------------
// Report serialization.
// ---------------------------------------------------------------------------

inline Json metrics_to_json(const Metrics& m) {
    Json j;
    if (!std::isnan(m.mse)) j["mse"] = m.mse;
    if (!std::isnan(m.accuracy)) j["accuracy"] = m.accuracy;
    if (!std::isnan(m.top5_error)) j["top5_error"] = m.top5_error;
    return j;
}

inline Json report_to_json(const TrainReport& r) {
    Json j;
    j["seed"] = r.seed;
    j["parameter_count"] = r.parameter_count;
    j["loss_curve"] = r.loss_curve;
    j["initial_test"] = metrics_to_json(r.initial_test);
    j["final_train"] = metrics_to_json(r.final_train);
    j["final_test"] = metrics_to_json(r.final_test);
    return j;
}

inline Json manifest_json(const Network& net, const ExperimentConfig& cfg) {
    Json layers = Json::array();
    std::size_t width = net.input_dim();
    for (const auto& layer : net.layers()) {
        Json l;
        std::visit(
            [&](const auto& v) {
                using T = std::decay_t<decltype(v)>;
                l["tag"] = layer_tag(v);
                if constexpr (std::is_same_v<T, DenseLayer>) {
                    l["kind"] = "dense";
                    l["width"] = v.weight.cols();
                    l["bias"] = v.has_bias;
                    width = v.weight.cols();
                } else if constexpr (std::is_same_v<T, SplitLinearLayer>) {
                    l["kind"] = "split_linear";
                    l["k"] = v.weights.size();
                    l["width"] = v.weights[0].cols();
                    l["adversarial"] = v.adversarial;
                    width = v.weights[0].cols();
                } else if constexpr (std::is_same_v<T, BatchNormLayer>) {
                    l["kind"] = "batchnorm";
                    l["width"] = width;
                } else {
                    l["kind"] = v.use_xi ? "xi_activation" : "activation";
                    l["width"] = width;
                }
            },
            layer);
        layers.push_back(l);
    }
    Json j;
    j["input_dim"] = net.input_dim();
    j["policy"] = policy_mode_name(net.mode());
    j["layers"] = layers;
    j["seeds"] = cfg.seeds;
    return j;
}

// Mean and sample standard deviation of one metric across seeds.
inline Json aggregate_metric(const std::vector<double>& values) {
    Json j;
    const double n = static_cast<double>(values.size());
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double stddev = values.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    j["mean"] = mean;
    j["std"] = stddev;
    j["values"] = values;
    return j;
}

// ---------------------------------------------------------------------------
// run_experiment: the `advact run` entry point.
// ---------------------------------------------------------------------------

struct RunResult {
    int exit_code = 0;
    std::vector<TrainReport> reports;
    std::string error;
};

inline SplitDataset prepare_dataset(const ExperimentConfig& cfg) {
    if (cfg.dataset.kind == "csv") {
        const bool classify = cfg.train.loss == "cross_entropy";
        return load_csv(cfg.dataset.path, cfg.dataset.label_column, cfg.dataset.normalize,
                        cfg.dataset.data_seed, classify);
    }
    Dataset d = synth_dataset(cfg.dataset.name, cfg.dataset.n, cfg.dataset.noise,
                              cfg.dataset.data_seed, cfg.dataset.separation);
    SplitDataset split = train_test_split(d, cfg.dataset.data_seed);
    if (cfg.dataset.normalize) standardize(split);
    return split;
}

inline RunResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr) {
    namespace fs = std::filesystem;
    validate(cfg);
    RunResult result;
    const fs::path out_dir(cfg.output_dir);
    fs::create_directories(out_dir);
    auto say = [&](const std::string& s) {
        if (log) *log << s << "\n";
    };

    std::ofstream run_log(out_dir / "run.log");
    try {
        SplitDataset data = prepare_dataset(cfg);
        const std::size_t output_dim =
            cfg.train.loss == "cross_entropy" ? std::max<std::size_t>(2, data.train.num_classes)
                                              : data.train.labels.cols();
        run_log << "dataset: " << (cfg.dataset.kind == "csv" ? cfg.dataset.path
                                                             : cfg.dataset.name)
                << " train=" << data.train.size() << " test=" << data.test.size() << "\n";

        bool manifest_written = false;
        for (std::uint64_t seed : cfg.seeds) {
            Network net = build_from_config(cfg, data.train.features.cols(), output_dim, seed);
            if (!manifest_written) {
                std::ofstream mf(out_dir / "manifest.json");
                mf << manifest_json(net, cfg).dump(2) << "\n";
                manifest_written = true;
            }
            TrainConfig tc;
            tc.epochs = cfg.train.epochs;
            tc.batch_size = cfg.train.batch_size;
            tc.lr = cfg.train.lr;
            tc.lr_half_life = cfg.train.lr_half_life;
            tc.l2_coeff = cfg.model.l2_coeff;
            tc.clamp_bound = cfg.model.clamp_bound;
            tc.seed = seed;
            tc.loss = cfg.train.loss == "mse" ? LossKind::MSE : LossKind::CrossEntropy;

            DiagnosticsCollector collector("seed" + std::to_string(seed));
            TrainReport report = train(net, data, tc, &collector);
            result.reports.push_back(report);

            const std::string tag = std::to_string(seed);
            {
                std::ofstream rf(out_dir / ("report_seed" + tag + ".json"));
                rf << report_to_json(report).dump(2) << "\n";
            }
            {
                std::ofstream cf(out_dir / ("diagnostics_seed" + tag + ".csv"));
                collector.write_csv(cf);
            }
            run_log << "seed " << seed << ": final "
                    << metrics_to_json(report.final_test).dump() << "\n";
            say("seed " + tag + " done");
        }

        // Aggregate mean +- std across seeds.
        Json agg;
        agg["config"] = to_json(cfg);
        auto collect = [&](auto getter) {
            std::vector<double> v;
            for (const auto& r : result.reports) v.push_back(getter(r));
            return v;
        };
        if (cfg.train.loss == "mse") {
            agg["final_test_mse"] =
                aggregate_metric(collect([](const TrainReport& r) { return r.final_test.mse; }));
            agg["final_train_mse"] = aggregate_metric(
                collect([](const TrainReport& r) { return r.final_train.mse; }));
        } else {
            agg["final_test_accuracy"] = aggregate_metric(
                collect([](const TrainReport& r) { return r.final_test.accuracy; }));
            agg["final_test_top5_error"] = aggregate_metric(
                collect([](const TrainReport& r) { return r.final_test.top5_error; }));
        }
        agg["parameter_count"] = result.reports.front().parameter_count;
        std::ofstream af(out_dir / "aggregate.json");
        af << agg.dump(2) << "\n";
    } catch (const Error& e) {
        result.exit_code = 1;
        result.error = e.what();
        run_log << "FAILED: " << e.what() << "\n";
        std::ofstream marker(out_dir / "FAILED");
        marker << e.what() << "\n";
        say(std::string("FAILED: ") + e.what());
    }
    return result;
}

} // namespace advact
