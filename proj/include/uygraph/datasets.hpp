#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "uygraph/graph.hpp"
#include "uygraph/rng.hpp"

namespace uygraph {

struct DatasetBundle {
    LabeledGraph graph;
    std::string name;
    std::string source_path;
    std::uint64_t checksum = 0; // FNV-1a over the four CSV files
};

struct SbmSpec {
    int num_classes = 2;
    int nodes_per_class = 50;
    double p_in = 0.1;
    double p_out = 0.01;
    int feature_dim = 8;
    double separation = 1.0;   // distance scale between class means
    double feature_noise = 1.0;
    std::uint64_t seed = 0;
    bool require_connected = false;

    // (n-1) p_in / ((n-1) p_in + n (C-1) p_out)
    double expected_homophily() const;
};

// Reads edges.csv, features.csv, labels.csv, splits.csv from a directory.
// Duplicate edges are merged, self-loops dropped with a warning; malformed
// rows raise DataError naming file and line.
DatasetBundle load_dataset(const std::string& dir);

// Writes the same four files; load(save(load(x))) round-trips bit-exactly.
void save_dataset(const LabeledGraph& graph, const std::string& dir);

// Planted-partition generator with per-class Gaussian features; deterministic
// per seed. With require_connected, resamples up to 20 times then errors.
DatasetBundle generate_sbm(const SbmSpec& spec);

struct SplitMasks {
    std::vector<char> train, val, test;
};

// Stratified split: exactly per_class_train train nodes per class, then a
// fraction of the labeled remainder for validation, rest test. Errors when a
// class cannot supply its quota.
SplitMasks make_split(const LabeledGraph& graph, int per_class_train, double val_fraction,
                      std::uint64_t seed);

// JSON text: {name, num_nodes, num_edges, num_classes, homophily, ...}.
std::string dataset_summary_json(const DatasetBundle& bundle);

} // namespace uygraph
