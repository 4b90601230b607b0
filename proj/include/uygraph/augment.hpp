#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "uygraph/graph.hpp"
#include "uygraph/matrix.hpp"
#include "uygraph/rng.hpp"
#include "uygraph/sparse.hpp"

namespace uygraph {

enum class CnFeaturePolicy { class_mean_linear, learnable_embedding, zeros };

// How collapsing nodes connect among themselves: zero block, all-pairs
// negative edges, or identity (self-loops only).
enum class CnCnPolicy { none, negative, identity_block };

struct CollapsingNodeSet {
    int count = 0;              // K
    std::vector<int> cn_labels; // class id per CN, size K
    int multiplicity = 1;       // K = multiplicity * num_classes
    CnFeaturePolicy feature_policy = CnFeaturePolicy::class_mean_linear;
};

// multiplicity copies of each class, class-major per replicate.
CollapsingNodeSet make_cn_set(int num_classes, int multiplicity,
                              CnFeaturePolicy policy = CnFeaturePolicy::class_mean_linear);

// N x K block of {+1, -1, 0} wiring train nodes to collapsing nodes. Rows of
// nodes outside the train mask are all-zero.
struct ConnectionMatrix {
    int rows = 0; // N
    int cols = 0; // K
    std::vector<std::int8_t> v;

    int get(int i, int k) const { return v[static_cast<std::size_t>(i) * cols + k]; }
};

ConnectionMatrix build_connection_matrix(const std::vector<int>& labels,
                                         const std::vector<char>& train_mask,
                                         const std::vector<int>& cn_labels);

struct AugmentedGraph {
    LabeledGraph base;
    CollapsingNodeSet cns;
    ConnectionMatrix connections;
    SignedMatrix a_c;   // (N+K) x (N+K)
    Matrix cn_features; // K x d0
    CnCnPolicy cn_cn_policy = CnCnPolicy::negative;
    bool self_loops = false;

    int total_nodes() const { return base.num_nodes + cns.count; }
};

// Block matrix [[A, C], [C^T, B]] with B chosen by policy; add_self_loops
// sets every diagonal entry of the full matrix to +1.
AugmentedGraph assemble_augmented(const LabeledGraph& graph, const CollapsingNodeSet& cns,
                                  const ConnectionMatrix& c, CnCnPolicy policy,
                                  bool add_self_loops);

// K x d0 feature block per policy. class_mean_linear applies an identity-
// initialized affine map to the per-class train means, so at initialization
// row k equals the mean of class-k train features; an empty class falls back
// to the global train mean with a warning on stderr.
Matrix init_cn_features(const LabeledGraph& graph, const CollapsingNodeSet& cns, Rng& rng);

// Signed re-weighting of the original edges: +1/-1 by label agreement when
// both endpoints are train nodes, +1 untouched otherwise. Dimension N.
SignedMatrix build_label_adjacency(const LabeledGraph& graph);

// |E^-| of a signed matrix (off-diagonal negative entries, unordered).
std::int64_t count_negative_edges(const SignedMatrix& a);

// K(K-1)/2 + K(|T|-1), the negative-edge budget used by the spectrum bound.
std::int64_t theorem_negative_edge_bound(int k, int train_size);

// Full pipeline: CN set for multiplicity m, connection matrix, assembly,
// feature block.
AugmentedGraph augment(const LabeledGraph& graph, int multiplicity, CnCnPolicy cn_cn_policy,
                       CnFeaturePolicy feature_policy, bool add_self_loops, Rng& rng);

// Edge-list CSV (src,dst,weight,cn) with cn=1 on rows touching a collapsing
// node; the serialization format consumed by the datasets tooling.
void write_augmented_edge_csv(const AugmentedGraph& aug, std::ostream& out);

} // namespace uygraph
