#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "advact/error.hpp"
#include "advact/matrix.hpp"
#include "advact/rng.hpp"

namespace advact {

// Features are (n x d); labels are (n x 1): a class id for classification
// tasks, a regression target otherwise.
struct Dataset {
    Matrix features;
    Matrix labels;
    bool classification = false;
    std::size_t num_classes = 0;

    std::size_t size() const { return features.rows(); }
};

struct SplitDataset {
    Dataset train;
    Dataset test;
};

namespace detail {

inline Dataset take_rows(const Dataset& d, const std::vector<std::size_t>& idx) {
    Dataset out;
    out.classification = d.classification;
    out.num_classes = d.num_classes;
    out.features = Matrix(idx.size(), d.features.cols());
    out.labels = Matrix(idx.size(), d.labels.cols());
    for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t c = 0; c < d.features.cols(); ++c)
            out.features(r, c) = d.features(idx[r], c);
        for (std::size_t c = 0; c < d.labels.cols(); ++c)
            out.labels(r, c) = d.labels(idx[r], c);
    }
    return out;
}

} // namespace detail

// Deterministic 80/20 split by a seeded permutation; train gets
// floor(0.8 * n) rows.
inline SplitDataset train_test_split(const Dataset& d, std::uint64_t seed,
                                     double train_fraction = 0.8) {
    if (d.size() == 0) throw ParseError("train_test_split: empty dataset");
    std::vector<std::size_t> perm(d.size());
    std::iota(perm.begin(), perm.end(), 0);
    Rng rng = derive_stream(seed, stream_tag::kSplit);
    rng.shuffle(perm);
    const auto n_train =
        static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(d.size())));
    std::vector<std::size_t> tr(perm.begin(), perm.begin() + n_train);
    std::vector<std::size_t> te(perm.begin() + n_train, perm.end());
    return {detail::take_rows(d, tr), detail::take_rows(d, te)};
}

// Per-feature standardization fitted on the train split only.
inline void standardize(SplitDataset& split) {
    const std::size_t d = split.train.features.cols();
    const std::size_t n = split.train.features.rows();
    if (n == 0) return;
    std::vector<double> mean(d, 0.0), stddev(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += split.train.features(i, j);
        mean[j] = s / static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double v = split.train.features(i, j) - mean[j];
            ss += v * v;
        }
        stddev[j] = std::sqrt(ss / static_cast<double>(n));
        if (stddev[j] < 1e-12) stddev[j] = 1.0;  // constant column
    }
    auto apply = [&](Matrix& f) {
        for (std::size_t i = 0; i < f.rows(); ++i)
            for (std::size_t j = 0; j < d; ++j)
                f(i, j) = (f(i, j) - mean[j]) / stddev[j];
    };
    apply(split.train.features);
    apply(split.test.features);
}

// ---------------------------------------------------------------------------
// CSV ingestion.
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

// Rectangular numeric CSV with a header row. Splits the named label column
// out of the features, 80/20 train/test by seeded permutation, optional
// standardization fitted on the train split.
inline SplitDataset load_csv(const std::string& path, const std::string& label_column,
                             bool normalize, std::uint64_t seed = 20240515,
                             bool classification = false) {
    std::ifstream in(path);
    if (!in) throw ParseError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw ParseError("load_csv: empty file " + path);
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto header = split_csv_line(line);
    std::size_t label_idx = header.size();
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == label_column) label_idx = i;
    if (label_idx == header.size())
        throw ParseError("load_csv: missing label column '" + label_column + "'");

    std::vector<std::vector<double>> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != header.size())
            throw ParseError("load_csv: ragged row at line " + std::to_string(line_no));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            std::size_t pos = 0;
            double v = 0.0;
            try {
                v = std::stod(c, &pos);
            } catch (const std::exception&) {
                throw ParseError("load_csv: non-numeric cell at line " +
                                 std::to_string(line_no));
            }
            if (pos != c.size())
                throw ParseError("load_csv: non-numeric cell at line " +
                                 std::to_string(line_no));
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("load_csv: no data rows in " + path);

    Dataset d;
    d.classification = classification;
    d.features = Matrix(rows.size(), header.size() - 1);
    d.labels = Matrix(rows.size(), 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::size_t k = 0;
        for (std::size_t j = 0; j < header.size(); ++j) {
            if (j == label_idx)
                d.labels(i, 0) = rows[i][j];
            else
                d.features(i, k++) = rows[i][j];
        }
    }
    if (classification) {
        double mx = 0.0;
        for (std::size_t i = 0; i < d.labels.rows(); ++i) mx = std::max(mx, d.labels(i, 0));
        d.num_classes = static_cast<std::size_t>(mx) + 1;
    }
    SplitDataset split = train_test_split(d, seed);
    if (normalize) standardize(split);
    return split;
}

// ---------------------------------------------------------------------------
// Synthetic generators.
// ---------------------------------------------------------------------------

// regress-sin:    x ~ U[-1,1]^3, y = sin(3 x1) + x2^2 - 0.5 x3 + noise*N(0,1)
// blobs-2class:   two gaussian blobs at +-(sep/2, sep/2), labels 0/1
// spirals-2class: two interleaved spirals, radius t, angle 3*pi*t (+pi offset)
inline Dataset synth_dataset(const std::string& name, std::size_t n, double noise,
                             std::uint64_t seed, double separation = 6.0) {
    Rng rng = derive_stream(seed, stream_tag::kDataset);
    Dataset d;
    if (name == "regress-sin") {
        d.features = Matrix(n, 3);
        d.labels = Matrix(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            const double x1 = rng.uniform(-1.0, 1.0);
            const double x2 = rng.uniform(-1.0, 1.0);
            const double x3 = rng.uniform(-1.0, 1.0);
            d.features(i, 0) = x1;
            d.features(i, 1) = x2;
            d.features(i, 2) = x3;
            double y = std::sin(3.0 * x1) + x2 * x2 - 0.5 * x3;
            if (noise > 0.0) y += noise * rng.normal();
            d.labels(i, 0) = y;
        }
    } else if (name == "blobs-2class") {
        d.classification = true;
        d.num_classes = 2;
        d.features = Matrix(n, 2);
        d.labels = Matrix(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            const int cls = static_cast<int>(i % 2);
            const double cx = (cls == 0 ? -0.5 : 0.5) * separation;
            d.features(i, 0) = cx + noise * rng.normal();
            d.features(i, 1) = cx + noise * rng.normal();
            d.labels(i, 0) = cls;
        }
    } else if (name == "spirals-2class") {
        d.classification = true;
        d.num_classes = 2;
        d.features = Matrix(n, 2);
        d.labels = Matrix(n, 1);
        const double pi = 3.14159265358979323846;
        for (std::size_t i = 0; i < n; ++i) {
            const int cls = static_cast<int>(i % 2);
            const double t = rng.uniform(0.05, 1.0);
            const double angle = 3.0 * pi * t + (cls == 0 ? 0.0 : pi);
            d.features(i, 0) = t * std::cos(angle) + noise * rng.normal();
            d.features(i, 1) = t * std::sin(angle) + noise * rng.normal();
            d.labels(i, 0) = cls;
        }
    } else {
        throw SpecError("synth_dataset: unknown generator '" + name + "'");
    }
    return d;
}

// Writes a dataset as CSV with feature columns x1..xd and label column y.
inline void write_csv(const Dataset& d, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("write_csv: cannot open " + path);
    out.precision(17);
    for (std::size_t j = 0; j < d.features.cols(); ++j) out << "x" << j + 1 << ",";
    out << "y\n";
    for (std::size_t i = 0; i < d.features.rows(); ++i) {
        for (std::size_t j = 0; j < d.features.cols(); ++j) out << d.features(i, j) << ",";
        out << d.labels(i, 0) << "\n";
    }
}

} // namespace advact
