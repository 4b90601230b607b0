#include "uygraph/graph.hpp"

#include <algorithm>
#include <set>

namespace uygraph {

int canonicalize_edges(std::vector<std::pair<int, int>>& edges) {
    int dropped_self_loops = 0;
    std::vector<std::pair<int, int>> kept;
    kept.reserve(edges.size());
    for (auto [a, b] : edges) {
        if (a == b) {
            ++dropped_self_loops;
            continue;
        }
        if (a > b) std::swap(a, b);
        kept.emplace_back(a, b);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    edges = std::move(kept);
    return dropped_self_loops;
}

void LabeledGraph::validate() const {
    if (features.rows() != num_nodes)
        throw DataError("LabeledGraph: feature row count != num_nodes");
    if (static_cast<int>(labels.size()) != num_nodes)
        throw DataError("LabeledGraph: label vector size != num_nodes");
    if (static_cast<int>(train_mask.size()) != num_nodes ||
        static_cast<int>(val_mask.size()) != num_nodes ||
        static_cast<int>(test_mask.size()) != num_nodes)
        throw DataError("LabeledGraph: mask size != num_nodes");
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= num_nodes || b >= num_nodes)
            throw DataError("LabeledGraph: edge endpoint out of range");
        if (a == b) throw DataError("LabeledGraph: self-loop in canonical edge set");
        if (a > b) throw DataError("LabeledGraph: edge not canonical");
    }
    std::set<std::pair<int, int>> seen(edges.begin(), edges.end());
    if (seen.size() != edges.size()) throw DataError("LabeledGraph: duplicate edges");
    for (int v = 0; v < num_nodes; ++v) {
        if (labels[v] != kNoLabel && (labels[v] < 0 || labels[v] >= num_classes))
            throw DataError("LabeledGraph: label out of class range");
        int in_masks = (train_mask[v] != 0) + (val_mask[v] != 0) + (test_mask[v] != 0);
        if (in_masks > 1) throw DataError("LabeledGraph: overlapping masks");
    }
}

std::vector<std::vector<int>> LabeledGraph::adjacency_lists() const {
    std::vector<std::vector<int>> adj(num_nodes);
    for (auto [a, b] : edges) {
        adj[a].push_back(b);
        adj[b].push_back(a);
    }
    return adj;
}

} // namespace uygraph
