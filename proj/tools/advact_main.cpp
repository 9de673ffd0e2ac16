// advact: config-driven experiment runner for adversarial-activation
// networks.
//
//   advact run --config cfg.json    train/evaluate per the config
//   advact verify                   closed-form and reciprocity checks
//   advact gen --name spirals-2class --out data.csv
//
// `run` writes per-seed report JSON, diagnostics CSV, an architecture
// manifest and an aggregate summary into the configured output directory.

#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "advact/advact.hpp"

namespace {

int cmd_run(const std::string& config_path) {
    advact::ExperimentConfig cfg = advact::load_config(config_path);
    advact::RunResult res = advact::run_experiment(cfg, &std::cout);
    if (res.exit_code != 0) std::cerr << "run failed: " << res.error << "\n";
    return res.exit_code;
}

int cmd_verify() {
    const auto results = advact::run_verification();
    std::size_t failed = 0;
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results) {
        if (!r.pass) ++failed;
        std::printf("%-6s %-*s %s\n", r.pass ? "PASS" : "FAIL", static_cast<int>(width),
                    r.name.c_str(), r.detail.c_str());
    }
    std::printf("%zu/%zu checks passed\n", results.size() - failed, results.size());
    return failed == 0 ? 0 : 1;
}

int cmd_gen(const std::string& name, const std::string& out, std::size_t n, double noise,
            std::uint64_t seed, double separation) {
    advact::Dataset d = advact::synth_dataset(name, n, noise, seed, separation);
    advact::write_csv(d, out);
    std::cout << "wrote " << d.size() << " rows to " << out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adversarial-activation network experiments"};
    app.require_subcommand(1);

    std::string config_path;
    auto* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("--config", config_path, "experiment config (JSON)")->required();

    auto* verify =
        app.add_subcommand("verify", "run the closed-form/reciprocity suite");

    std::string gen_name = "regress-sin", gen_out = "dataset.csv";
    std::size_t gen_n = 1000;
    double gen_noise = 0.0, gen_sep = 6.0;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset as CSV");
    gen->add_option("--name", gen_name,
                    "generator: regress-sin | blobs-2class | spirals-2class");
    gen->add_option("--out", gen_out, "output CSV path")->required();
    gen->add_option("--n", gen_n, "sample count");
    gen->add_option("--noise", gen_noise, "noise level");
    gen->add_option("--seed", gen_seed, "generator seed");
    gen->add_option("--separation", gen_sep, "blob separation");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path);
        if (verify->parsed()) return cmd_verify();
        if (gen->parsed()) return cmd_gen(gen_name, gen_out, gen_n, gen_noise, gen_seed, gen_sep);
    } catch (const advact::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
