#include "uygraph/graph_core.hpp"

#include <cmath>

namespace uygraph {

HomophilyResult homophily_score(const LabeledGraph& graph) {
    auto adj = graph.adjacency_lists();
    double total = 0.0;
    int counted = 0, skipped = 0, labeled = 0;
    for (int v = 0; v < graph.num_nodes; ++v) {
        if (!graph.labeled(v)) continue;
        ++labeled;
        if (adj[v].empty()) {
            ++skipped;
            continue;
        }
        int same = 0;
        for (int u : adj[v])
            if (graph.labels[u] == graph.labels[v]) ++same;
        total += static_cast<double>(same) / static_cast<double>(adj[v].size());
        ++counted;
    }
    if (labeled == 0) throw DataError("homophily_score: no labels");
    HomophilyResult r;
    r.skipped = skipped;
    r.score = counted == 0 ? 0.0 : total / counted;
    return r;
}

std::vector<double> absolute_degree(const SignedMatrix& m) {
    std::vector<double> deg(m.dim(), 0.0);
    for (const auto& e : m.entries()) {
        if (e.w == 0.0) continue;
        deg[e.i] += std::abs(e.w);
        if (e.i != e.j) deg[e.j] += std::abs(e.w);
    }
    return deg;
}

namespace {

// M plus identity, as canonical entries.
SignedMatrix with_self_loops(const SignedMatrix& m) {
    SignedMatrix out = m;
    for (int i = 0; i < m.dim(); ++i) out.add(i, i, 1.0);
    return out;
}

} // namespace

CsrMatrix normalize_rw(const SignedMatrix& m, bool add_self_loops) {
    SignedMatrix work = add_self_loops ? with_self_loops(m) : m;
    auto deg = absolute_degree(work);
    for (int i = 0; i < work.dim(); ++i)
        if (deg[i] == 0.0) throw DataError("normalize_rw: isolated node");
    std::vector<SparseEntry> trip;
    for (const auto& e : work.entries()) {
        if (e.w == 0.0) continue;
        trip.push_back({e.i, e.j, e.w / deg[e.i]});
        if (e.i != e.j) trip.push_back({e.j, e.i, e.w / deg[e.j]});
    }
    return csr_from_triplets(work.dim(), work.dim(), trip);
}

SignedMatrix normalize_sym(const SignedMatrix& m, bool add_self_loops) {
    SignedMatrix work = add_self_loops ? with_self_loops(m) : m;
    auto deg = absolute_degree(work);
    for (int i = 0; i < work.dim(); ++i)
        if (deg[i] == 0.0) throw DataError("normalize_sym: isolated node");
    SignedMatrix out(work.dim());
    for (const auto& e : work.entries()) {
        if (e.w == 0.0) continue;
        out.set(e.i, e.j, e.w / std::sqrt(deg[e.i] * deg[e.j]));
    }
    return out;
}

SignedMatrix signed_laplacian(const SignedEdgeList& edges) {
    if (edges.edges.empty()) throw DataError("signed_laplacian: empty edge list");
    SignedMatrix l(edges.num_nodes);
    for (const auto& e : edges.edges) {
        if (e.i == e.j) continue; // zero incidence column
        l.add(e.i, e.i, e.w);
        l.add(e.j, e.j, e.w);
        l.add(e.i, e.j, -e.w);
    }
    l.compact();
    return l;
}

Matrix incidence_matrix(const SignedEdgeList& edges) {
    Matrix e(edges.num_nodes, static_cast<int>(edges.edges.size()));
    for (int k = 0; k < static_cast<int>(edges.edges.size()); ++k) {
        e(edges.edges[k].i, k) += 1.0;
        e(edges.edges[k].j, k) -= 1.0;
    }
    return e;
}

namespace {

double quadratic_form(const SignedMatrix& m, const Matrix& h) {
    const int d = h.cols();
    double total = 0.0;
    for (const auto& e : m.entries()) {
        if (e.w == 0.0) continue;
        const double* hi = h.row(e.i);
        const double* hj = h.row(e.j);
        double dot = 0.0;
        for (int f = 0; f < d; ++f) dot += hi[f] * hj[f];
        total += (e.i == e.j ? 1.0 : 2.0) * e.w * dot;
    }
    return total;
}

double edge_gap_sum(int i, int j, const Matrix& h) {
    const double* hi = h.row(i);
    const double* hj = h.row(j);
    double s = 0.0;
    for (int f = 0; f < h.cols(); ++f) {
        double g = hi[f] - hj[f];
        s += g * g;
    }
    return s;
}

} // namespace

double dirichlet_energy(const SignedMatrix& l, const Matrix& h) {
    if (l.dim() != h.rows()) throw DataError("dirichlet_energy: dimension mismatch");
    double qf = quadratic_form(l, h);
    // Edge-sum route: off-diagonal L_ij stores -w_ij.
    double es = 0.0;
    for (const auto& e : l.entries()) {
        if (e.i == e.j || e.w == 0.0) continue;
        es += (-e.w) * edge_gap_sum(e.i, e.j, h);
    }
    double tol = 1e-9 * std::max({1.0, std::abs(qf), std::abs(es)});
    if (std::abs(qf - es) > tol)
        throw NumericalError("dirichlet_energy: quadratic form and edge sum disagree");
    return qf;
}

double signed_energy(const SignedMatrix& a_c, const Matrix& h) {
    if (a_c.dim() != h.rows()) throw DataError("signed_energy: dimension mismatch");
    double total = 0.0;
    for (const auto& e : a_c.entries()) {
        if (e.i == e.j || e.w == 0.0) continue;
        total += e.w * edge_gap_sum(e.i, e.j, h);
    }
    return total;
}

SignedMatrix adjacency_matrix(const LabeledGraph& graph) {
    SignedMatrix a(graph.num_nodes);
    for (auto [i, j] : graph.edges) a.set(i, j, 1.0);
    return a;
}

SignedEdgeList edge_list_of(const SignedMatrix& m) {
    SignedEdgeList el;
    el.num_nodes = m.dim();
    for (const auto& e : m.entries())
        if (e.i != e.j && e.w != 0.0) el.edges.push_back({e.i, e.j, e.w});
    return el;
}

} // namespace uygraph
