#include "uygraph/augment.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace uygraph {

CollapsingNodeSet make_cn_set(int num_classes, int multiplicity, CnFeaturePolicy policy) {
    if (num_classes < 1) throw DataError("make_cn_set: need at least one class");
    if (multiplicity < 1) throw DataError("make_cn_set: multiplicity must be >= 1");
    CollapsingNodeSet s;
    s.multiplicity = multiplicity;
    s.feature_policy = policy;
    s.count = num_classes * multiplicity;
    s.cn_labels.reserve(s.count);
    for (int rep = 0; rep < multiplicity; ++rep)
        for (int c = 0; c < num_classes; ++c) s.cn_labels.push_back(c);
    return s;
}

ConnectionMatrix build_connection_matrix(const std::vector<int>& labels,
                                         const std::vector<char>& train_mask,
                                         const std::vector<int>& cn_labels) {
    if (cn_labels.empty()) throw DataError("build_connection_matrix: no collapsing nodes");
    if (labels.size() != train_mask.size())
        throw DataError("build_connection_matrix: labels/mask size mismatch");
    const int n = static_cast<int>(labels.size());
    const int k = static_cast<int>(cn_labels.size());
    ConnectionMatrix c;
    c.rows = n;
    c.cols = k;
    c.v.assign(static_cast<std::size_t>(n) * k, 0);
    for (int i = 0; i < n; ++i) {
        if (!train_mask[i]) continue; // val/test/unlabeled rows stay zero
        if (labels[i] == kNoLabel)
            throw DataError("build_connection_matrix: train node without label");
        for (int q = 0; q < k; ++q)
            c.v[static_cast<std::size_t>(i) * k + q] = labels[i] == cn_labels[q] ? 1 : -1;
    }
    return c;
}

AugmentedGraph assemble_augmented(const LabeledGraph& graph, const CollapsingNodeSet& cns,
                                  const ConnectionMatrix& c, CnCnPolicy policy,
                                  bool add_self_loops) {
    if (c.rows != graph.num_nodes || c.cols != cns.count)
        throw DataError("assemble_augmented: connection matrix dimension mismatch");
    const int n = graph.num_nodes;
    const int k = cns.count;
    SignedMatrix a(n + k);
    for (auto [i, j] : graph.edges) a.set(i, j, 1.0);
    for (int i = 0; i < n; ++i)
        for (int q = 0; q < k; ++q)
            if (int s = c.get(i, q); s != 0) a.set(i, n + q, static_cast<double>(s));
    switch (policy) {
        case CnCnPolicy::none:
            break;
        case CnCnPolicy::negative:
            for (int p = 0; p < k; ++p)
                for (int q = p + 1; q < k; ++q) a.set(n + p, n + q, -1.0);
            break;
        case CnCnPolicy::identity_block:
            for (int q = 0; q < k; ++q) a.set(n + q, n + q, 1.0);
            break;
    }
    if (add_self_loops)
        for (int i = 0; i < n + k; ++i) a.set(i, i, 1.0); // weight +1 always

    AugmentedGraph out;
    out.base = graph;
    out.cns = cns;
    out.connections = c;
    out.a_c = std::move(a);
    out.cn_features = Matrix(k, graph.feature_dim());
    out.cn_cn_policy = policy;
    out.self_loops = add_self_loops;
    return out;
}

Matrix init_cn_features(const LabeledGraph& graph, const CollapsingNodeSet& cns, Rng& rng) {
    const int d = graph.feature_dim();
    Matrix f(cns.count, d);
    switch (cns.feature_policy) {
        case CnFeaturePolicy::zeros:
            return f;
        case CnFeaturePolicy::learnable_embedding: {
            const double scale = 1.0 / std::sqrt(static_cast<double>(std::max(1, d)));
            for (int k = 0; k < cns.count; ++k)
                for (int j = 0; j < d; ++j) f(k, j) = rng.normal(0.0, scale);
            return f;
        }
        case CnFeaturePolicy::class_mean_linear:
            break;
    }
    // per-class means over train nodes; identity-initialized affine map
    // leaves them unchanged at this point
    std::vector<std::vector<double>> mean(graph.num_classes, std::vector<double>(d, 0.0));
    std::vector<int> count(graph.num_classes, 0);
    std::vector<double> global_mean(d, 0.0);
    int global_count = 0;
    for (int v = 0; v < graph.num_nodes; ++v) {
        if (!graph.train_mask[v]) continue;
        if (graph.labels[v] == kNoLabel)
            throw DataError("init_cn_features: train node without label");
        const double* row = graph.features.row(v);
        for (int j = 0; j < d; ++j) {
            mean[graph.labels[v]][j] += row[j];
            global_mean[j] += row[j];
        }
        ++count[graph.labels[v]];
        ++global_count;
    }
    if (global_count == 0) throw DataError("init_cn_features: empty train mask");
    for (int j = 0; j < d; ++j) global_mean[j] /= global_count;
    for (int c = 0; c < graph.num_classes; ++c)
        if (count[c] > 0)
            for (int j = 0; j < d; ++j) mean[c][j] /= count[c];
    for (int k = 0; k < cns.count; ++k) {
        int c = cns.cn_labels[k];
        if (count[c] == 0) {
            std::fprintf(stderr,
                         "uygraph: warning: class %d has no train nodes, "
                         "falling back to global train mean for CN %d\n",
                         c, k);
            for (int j = 0; j < d; ++j) f(k, j) = global_mean[j];
        } else {
            for (int j = 0; j < d; ++j) f(k, j) = mean[c][j];
        }
    }
    return f;
}

SignedMatrix build_label_adjacency(const LabeledGraph& graph) {
    SignedMatrix a(graph.num_nodes);
    for (auto [i, j] : graph.edges) {
        if (graph.train_mask[i] && graph.train_mask[j]) {
            if (graph.labels[i] == kNoLabel || graph.labels[j] == kNoLabel)
                throw DataError("build_label_adjacency: train node without label");
            a.set(i, j, graph.labels[i] == graph.labels[j] ? 1.0 : -1.0);
        } else {
            a.set(i, j, 1.0); // unlabeled endpoint: base model untouched
        }
    }
    return a;
}

std::int64_t count_negative_edges(const SignedMatrix& a) {
    std::int64_t count = 0;
    for (const auto& e : a.entries())
        if (e.i != e.j && e.w < 0.0) ++count;
    return count;
}

std::int64_t theorem_negative_edge_bound(int k, int train_size) {
    const std::int64_t kk = k;
    return kk * (kk - 1) / 2 + kk * (train_size - 1);
}

AugmentedGraph augment(const LabeledGraph& graph, int multiplicity, CnCnPolicy cn_cn_policy,
                       CnFeaturePolicy feature_policy, bool add_self_loops, Rng& rng) {
    auto cns = make_cn_set(graph.num_classes, multiplicity, feature_policy);
    auto c = build_connection_matrix(graph.labels, graph.train_mask, cns.cn_labels);
    auto aug = assemble_augmented(graph, cns, c, cn_cn_policy, add_self_loops);
    aug.cn_features = init_cn_features(graph, cns, rng);
    return aug;
}

void write_augmented_edge_csv(const AugmentedGraph& aug, std::ostream& out) {
    const int n = aug.base.num_nodes;
    out << "src,dst,weight,cn\n";
    SignedMatrix sorted = aug.a_c;
    sorted.sort_entries();
    char buf[64];
    for (const auto& e : sorted.entries()) {
        if (e.w == 0.0) continue;
        std::snprintf(buf, sizeof buf, "%.17g", e.w);
        out << e.i << ',' << e.j << ',' << buf << ',' << (e.i >= n || e.j >= n ? 1 : 0) << '\n';
    }
}

} // namespace uygraph
