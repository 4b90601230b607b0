#pragma once

#include <utility>
#include <vector>

#include "uygraph/errors.hpp"
#include "uygraph/matrix.hpp"
#include "uygraph/sparse.hpp"

namespace uygraph {

constexpr int kNoLabel = -1;

// Undirected graph with node features, partial labels and disjoint
// train/val/test masks. Edges are stored canonically (i < j), deduplicated,
// never self-loops.
struct LabeledGraph {
    int num_nodes = 0;
    int num_classes = 0;
    std::vector<std::pair<int, int>> edges;
    Matrix features;              // num_nodes x d0
    std::vector<int> labels;      // kNoLabel for unlabeled
    std::vector<char> train_mask; // char, not bool: avoids vector<bool> proxies
    std::vector<char> val_mask;
    std::vector<char> test_mask;

    int feature_dim() const { return features.cols(); }
    bool labeled(int v) const { return labels[v] != kNoLabel; }

    void validate() const;

    // Adjacency lists derived from the edge set.
    std::vector<std::vector<int>> adjacency_lists() const;
};

struct WeightedEdge {
    int i = 0;
    int j = 0;
    double w = 0.0;
};

// Edge list of a signed graph over num_nodes nodes; carrier for the incidence
// form of a signed Laplacian. Weights are typically +1/-1.
struct SignedEdgeList {
    int num_nodes = 0;
    std::vector<WeightedEdge> edges;
};

// Canonicalizes (sorts endpoints, merges duplicates, drops self-loops) and
// reports how many self-loops were dropped.
int canonicalize_edges(std::vector<std::pair<int, int>>& edges);

} // namespace uygraph
