#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "advact/config.hpp"
#include "advact/dataset.hpp"
#include "advact/runner.hpp"

using namespace advact;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("advact_test_" +
                                                  std::to_string(::getpid()))) {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

} // namespace

TEST_CASE("load_csv splits 80/20 with the floor rule") {
    TempDir tmp;
    const auto csv = tmp.path / "three.csv";
    write_file(csv, "x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n");
    SplitDataset d = load_csv(csv.string(), "y", false);
    CHECK(d.train.size() == 2);
    CHECK(d.test.size() == 1);
    CHECK(d.train.features.cols() == 2);
}

TEST_CASE("load_csv error paths carry line numbers") {
    TempDir tmp;
    const auto headers_only = tmp.path / "h.csv";
    write_file(headers_only, "x1,y\n");
    CHECK_THROWS_AS(load_csv(headers_only.string(), "y", false), ParseError);

    const auto ragged = tmp.path / "r.csv";
    write_file(ragged, "x1,x2,y\n1,2,3\n4,5\n");
    try {
        load_csv(ragged.string(), "y", false);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    const auto non_numeric = tmp.path / "n.csv";
    write_file(non_numeric, "x1,y\n1,2\nfoo,3\n");
    try {
        load_csv(non_numeric.string(), "y", false);
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    const auto no_label = tmp.path / "l.csv";
    write_file(no_label, "x1,x2\n1,2\n");
    CHECK_THROWS_AS(load_csv(no_label.string(), "z", false), ParseError);
}

TEST_CASE("standardized features have train mean 0 and std 1") {
    TempDir tmp;
    const auto csv = tmp.path / "wide.csv";
    std::string text = "x1,x2,y\n";
    Rng rng(8);
    for (int i = 0; i < 200; ++i) {
        char line[128];
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", rng.uniform(3.0, 9.0),
                      rng.uniform(-100.0, 50.0), rng.uniform(0.0, 1.0));
        text += line;
    }
    write_file(csv, text);
    SplitDataset d = load_csv(csv.string(), "y", true);
    for (std::size_t j = 0; j < 2; ++j) {
        double mean = 0.0;
        const std::size_t n = d.train.size();
        for (std::size_t i = 0; i < n; ++i) mean += d.train.features(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = d.train.features(i, j) - mean;
            var += v * v;
        }
        var /= static_cast<double>(n);
        CHECK(std::abs(mean) < 1e-9);
        CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-9);
    }
}

TEST_CASE("synth regress-sin follows its formula at zero noise") {
    Dataset d = synth_dataset("regress-sin", 100, 0.0, 5);
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double y = std::sin(3.0 * d.features(i, 0)) +
                         d.features(i, 1) * d.features(i, 1) - 0.5 * d.features(i, 2);
        CHECK(d.labels(i, 0) == Catch::Approx(y).margin(1e-15));
    }
}

TEST_CASE("synth determinism and unknown generator") {
    Dataset a = synth_dataset("spirals-2class", 64, 0.05, 7);
    Dataset b = synth_dataset("spirals-2class", 64, 0.05, 7);
    CHECK(a.features == b.features);
    CHECK(a.labels == b.labels);
    CHECK_THROWS_AS(synth_dataset("nope", 10, 0.0, 1), SpecError);
}

TEST_CASE("well-separated blobs are linearly separable") {
    Dataset d = synth_dataset("blobs-2class", 400, 0.1, 11, /*separation=*/10.0);
    // linear oracle: class = [x1 + x2 > 0]
    std::size_t correct = 0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const int pred = d.features(i, 0) + d.features(i, 1) > 0.0 ? 1 : 0;
        if (pred == static_cast<int>(d.labels(i, 0))) ++correct;
    }
    CHECK(correct == d.size());
}

TEST_CASE("dataset CSV round trip") {
    TempDir tmp;
    Dataset d = synth_dataset("regress-sin", 50, 0.1, 3);
    const auto csv = tmp.path / "sin.csv";
    write_csv(d, csv.string());
    SplitDataset back = load_csv(csv.string(), "y", false);
    CHECK(back.train.size() + back.test.size() == 50);
    CHECK(back.train.features.cols() == 3);
}

TEST_CASE("config round trip and validation") {
    ExperimentConfig cfg;
    cfg.dataset.kind = "synthetic";
    cfg.dataset.name = "spirals-2class";
    cfg.dataset.n = 2000;
    cfg.dataset.noise = 0.08;
    cfg.model.depth = 6;
    cfg.model.width = 64;
    cfg.model.activation = "tanh4";
    cfg.model.policy = "sa";
    cfg.model.l2_coeff = 0.05;
    cfg.train.loss = "cross_entropy";
    cfg.train.epochs = 40;
    cfg.seeds = {1, 2, 3, 4, 5};
    ExperimentConfig parsed = parse_config(serialize(cfg));
    CHECK(parsed == cfg);

    ExperimentConfig bad = cfg;
    bad.model.activation = "sigmoid";  // SA needs a splittable activation
    CHECK_THROWS_AS(parse_config(serialize(bad)), SpecError);

    ExperimentConfig no_seeds = cfg;
    no_seeds.seeds.clear();
    CHECK_THROWS_AS(validate(no_seeds), SpecError);

    CHECK_THROWS_AS(parse_config("{ not json"), ParseError);
}

TEST_CASE("run_experiment writes reports, diagnostics, manifest and aggregate") {
    TempDir tmp;
    ExperimentConfig cfg;
    cfg.dataset.kind = "synthetic";
    cfg.dataset.name = "regress-sin";
    cfg.dataset.n = 120;
    cfg.model.depth = 1;
    cfg.model.width = 8;
    cfg.model.activation = "sigmoid";
    cfg.model.policy = "none";
    cfg.train.epochs = 2;
    cfg.train.batch_size = 32;
    cfg.output_dir = (tmp.path / "out").string();
    cfg.seeds = {1, 2, 3};

    RunResult res = run_experiment(cfg);
    REQUIRE(res.exit_code == 0);
    CHECK(res.reports.size() == 3);
    for (int s : {1, 2, 3}) {
        CHECK(fs::exists(tmp.path / "out" / ("report_seed" + std::to_string(s) + ".json")));
        CHECK(fs::exists(tmp.path / "out" /
                         ("diagnostics_seed" + std::to_string(s) + ".csv")));
    }
    CHECK(fs::exists(tmp.path / "out" / "aggregate.json"));
    CHECK(fs::exists(tmp.path / "out" / "manifest.json"));
    CHECK_FALSE(fs::exists(tmp.path / "out" / "FAILED"));

    // aggregate mean equals the arithmetic mean of per-seed finals
    Json agg = Json::parse(read_file(tmp.path / "out" / "aggregate.json"));
    double mean = 0.0;
    for (const auto& r : res.reports) mean += r.final_test.mse;
    mean /= 3.0;
    CHECK(agg["final_test_mse"]["mean"].get<double>() == Catch::Approx(mean).epsilon(1e-15));

    // reruns reproduce identical bytes
    const std::string before =
        read_file(tmp.path / "out" / "report_seed2.json") +
        read_file(tmp.path / "out" / "diagnostics_seed2.csv") +
        read_file(tmp.path / "out" / "manifest.json");
    RunResult res2 = run_experiment(cfg);
    REQUIRE(res2.exit_code == 0);
    const std::string after =
        read_file(tmp.path / "out" / "report_seed2.json") +
        read_file(tmp.path / "out" / "diagnostics_seed2.csv") +
        read_file(tmp.path / "out" / "manifest.json");
    CHECK(before == after);
}

TEST_CASE("run_experiment failure leaves a FAILED marker and nonzero exit") {
    TempDir tmp;
    ExperimentConfig cfg;
    cfg.dataset.kind = "csv";
    cfg.dataset.path = (tmp.path / "missing.csv").string();
    cfg.output_dir = (tmp.path / "out").string();
    RunResult res = run_experiment(cfg);
    CHECK(res.exit_code == 1);
    CHECK(fs::exists(tmp.path / "out" / "FAILED"));
}
