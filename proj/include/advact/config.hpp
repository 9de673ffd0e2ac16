#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "advact/error.hpp"
#include "advact/trainer.hpp"

namespace advact {

using Json = nlohmann::ordered_json;

// Declarative description of one experiment: dataset source, model shape,
// training settings, output location and the seed list. Serializes to JSON
// with parse(serialize(cfg)) == cfg.
struct ExperimentConfig {
    struct DatasetCfg {
        std::string kind = "synthetic";   // "synthetic" | "csv"
        std::string name = "regress-sin"; // synthetic generator
        std::size_t n = 1000;
        double noise = 0.0;
        double separation = 6.0;          // blobs-2class only
        std::string path;                 // csv source
        std::string label_column = "y";
        bool normalize = false;
        std::uint64_t data_seed = 1;      // generation + split permutation

        bool operator==(const DatasetCfg&) const = default;
    } dataset;

    struct ModelCfg {
        std::size_t depth = 2;
        std::size_t width = 32;           // psi_H; split branches get width/n
        std::string activation = "sigmoid";
        std::string policy = "none";      // none | ga | sa
        int split_k = 4;
        double parallel_n = 4.0;
        bool batchnorm = true;
        std::string bn_placement = "each_linear";  // each_linear | input
        double alpha = 1.0;
        double l2_coeff = 0.0;
        double clamp_bound = 10.0;

        bool operator==(const ModelCfg&) const = default;
    } model;

    struct TrainCfg {
        std::size_t epochs = 150;
        std::size_t batch_size = 128;
        double lr = 0.1;
        std::size_t lr_half_life = 20;
        std::string loss = "mse";  // mse | cross_entropy

        bool operator==(const TrainCfg&) const = default;
    } train;

    std::string output_dir = "out";
    std::vector<std::uint64_t> seeds = {1};

    bool operator==(const ExperimentConfig&) const = default;
    bool split_activation() const {
        return model.activation == "tanh2" || model.activation == "tanh4" ||
               model.activation == "gelu4";
    }
};

inline void validate(const ExperimentConfig& cfg) {
    if (cfg.seeds.empty()) throw SpecError("config: seeds must be non-empty");
    if (cfg.dataset.kind != "synthetic" && cfg.dataset.kind != "csv")
        throw SpecError("config: dataset.kind must be 'synthetic' or 'csv'");
    if (cfg.model.policy != "none" && cfg.model.policy != "ga" && cfg.model.policy != "sa")
        throw SpecError("config: model.policy must be none/ga/sa");
    if (cfg.model.policy == "sa" && !cfg.split_activation())
        throw SpecError("config: SA policy requires a splittable activation "
                        "(tanh2/tanh4/gelu4)");
    if (cfg.model.policy == "ga" &&
        !(cfg.model.activation == "sigmoid" || cfg.model.activation == "sigmoid_theta"))
        throw SpecError("config: GA policy requires sigmoid or sigmoid_theta");
    if (cfg.train.loss != "mse" && cfg.train.loss != "cross_entropy")
        throw SpecError("config: train.loss must be mse or cross_entropy");
    if (cfg.model.depth == 0 || cfg.model.width == 0)
        throw SpecError("config: model depth/width must be positive");
    if (cfg.model.bn_placement != "each_linear" && cfg.model.bn_placement != "input")
        throw SpecError("config: bn_placement must be each_linear or input");
}

inline Json to_json(const ExperimentConfig& cfg) {
    Json j;
    j["dataset"] = {{"kind", cfg.dataset.kind},
                    {"name", cfg.dataset.name},
                    {"n", cfg.dataset.n},
                    {"noise", cfg.dataset.noise},
                    {"separation", cfg.dataset.separation},
                    {"path", cfg.dataset.path},
                    {"label_column", cfg.dataset.label_column},
                    {"normalize", cfg.dataset.normalize},
                    {"data_seed", cfg.dataset.data_seed}};
    j["model"] = {{"depth", cfg.model.depth},
                  {"width", cfg.model.width},
                  {"activation", cfg.model.activation},
                  {"policy", cfg.model.policy},
                  {"split_k", cfg.model.split_k},
                  {"parallel_n", cfg.model.parallel_n},
                  {"batchnorm", cfg.model.batchnorm},
                  {"bn_placement", cfg.model.bn_placement},
                  {"alpha", cfg.model.alpha},
                  {"l2_coeff", cfg.model.l2_coeff},
                  {"clamp_bound", cfg.model.clamp_bound}};
    j["train"] = {{"epochs", cfg.train.epochs},
                  {"batch_size", cfg.train.batch_size},
                  {"lr", cfg.train.lr},
                  {"lr_half_life", cfg.train.lr_half_life},
                  {"loss", cfg.train.loss}};
    j["output"] = cfg.output_dir;
    j["seeds"] = cfg.seeds;
    return j;
}

inline std::string serialize(const ExperimentConfig& cfg) { return to_json(cfg).dump(2); }

inline ExperimentConfig config_from_json(const Json& j) {
    ExperimentConfig cfg;
    try {
        const auto& d = j.at("dataset");
        cfg.dataset.kind = d.value("kind", cfg.dataset.kind);
        cfg.dataset.name = d.value("name", cfg.dataset.name);
        cfg.dataset.n = d.value("n", cfg.dataset.n);
        cfg.dataset.noise = d.value("noise", cfg.dataset.noise);
        cfg.dataset.separation = d.value("separation", cfg.dataset.separation);
        cfg.dataset.path = d.value("path", cfg.dataset.path);
        cfg.dataset.label_column = d.value("label_column", cfg.dataset.label_column);
        cfg.dataset.normalize = d.value("normalize", cfg.dataset.normalize);
        cfg.dataset.data_seed = d.value("data_seed", cfg.dataset.data_seed);
        const auto& m = j.at("model");
        cfg.model.depth = m.value("depth", cfg.model.depth);
        cfg.model.width = m.value("width", cfg.model.width);
        cfg.model.activation = m.value("activation", cfg.model.activation);
        cfg.model.policy = m.value("policy", cfg.model.policy);
        cfg.model.split_k = m.value("split_k", cfg.model.split_k);
        cfg.model.parallel_n = m.value("parallel_n", cfg.model.parallel_n);
        cfg.model.batchnorm = m.value("batchnorm", cfg.model.batchnorm);
        cfg.model.bn_placement = m.value("bn_placement", cfg.model.bn_placement);
        cfg.model.alpha = m.value("alpha", cfg.model.alpha);
        cfg.model.l2_coeff = m.value("l2_coeff", cfg.model.l2_coeff);
        cfg.model.clamp_bound = m.value("clamp_bound", cfg.model.clamp_bound);
        const auto& t = j.at("train");
        cfg.train.epochs = t.value("epochs", cfg.train.epochs);
        cfg.train.batch_size = t.value("batch_size", cfg.train.batch_size);
        cfg.train.lr = t.value("lr", cfg.train.lr);
        cfg.train.lr_half_life = t.value("lr_half_life", cfg.train.lr_half_life);
        cfg.train.loss = t.value("loss", cfg.train.loss);
        cfg.output_dir = j.value("output", cfg.output_dir);
        cfg.seeds = j.value("seeds", cfg.seeds);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    validate(cfg);
    return cfg;
}

inline ExperimentConfig parse_config(const std::string& text) {
    Json j;
    try {
        j = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ParseError(std::string("config: ") + e.what());
    }
    return config_from_json(j);
}

inline ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("config: cannot open " + path);
    std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return parse_config(text);
}

} // namespace advact
