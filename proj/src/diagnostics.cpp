#include "uygraph/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "uygraph/eig.hpp"
#include "uygraph/graph_core.hpp"
#include "uygraph/kernels.hpp"
#include "uygraph/rng.hpp"

namespace uygraph {

OsmProbeReport osm_fixed_point_probe(const CsrMatrix& a_c_normalized, int n_original,
                                     int iterations, double tolerance, std::uint64_t seed) {
    const int n = a_c_normalized.rows;
    if (n_original < 1 || n_original > n)
        throw DataError("osm_fixed_point_probe: bad original-node count");
    OsmProbeReport rep;
    rep.iterations = iterations;
    if (n == 1 || n_original == 1) {
        rep.degenerate = true;
        rep.converged_to_constant = true;
        return rep;
    }
    Rng rng(seed);
    std::vector<double> h(n);
    for (double& v : h) v = rng.uniform(-1.0, 1.0);
    for (int it = 0; it < iterations; ++it) {
        h = spmv(a_c_normalized, h);
        double sup = 0.0;
        for (double v : h) sup = std::max(sup, std::abs(v));
        if (sup == 0.0) break; // annihilated; std of zeros is 0
        for (double& v : h) v /= sup; // direction only
    }
    double mean = 0.0;
    for (int i = 0; i < n_original; ++i) mean += h[i];
    mean /= n_original;
    double var = 0.0;
    for (int i = 0; i < n_original; ++i) var += (h[i] - mean) * (h[i] - mean);
    rep.x_block_std = std::sqrt(var / n_original);
    rep.converged_to_constant = rep.x_block_std < tolerance;
    return rep;
}

namespace {

// h^{(l+1)} = tanh(A_c h^{(l)} W_in^{(l)}); r = 0 returns x itself.
Matrix win_only_forward(const std::vector<Matrix>& w_in, const CsrMatrix& a_c, const Matrix& x,
                        int r) {
    Matrix h = x;
    for (int l = 0; l < r; ++l) {
        Matrix mixed = matmul(h, w_in[l]);
        h = spmm(a_c, mixed);
        double* d = h.data();
        for (std::size_t k = 0; k < h.size(); ++k) d[k] = std::tanh(d[k]);
    }
    return h;
}

double spectral_norm(const Matrix& w) {
    // largest singular value via the Gram matrix
    Matrix gram = matmul_at(w, w);
    EigResult eig = symmetric_eig(gram);
    double lmax = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.back();
    return std::sqrt(std::max(0.0, lmax));
}

} // namespace

SensitivityReport sensitivity_check(const std::vector<Matrix>& w_in, const CsrMatrix& a_c,
                                    const Matrix& x, int r, double alpha,
                                    const std::vector<std::pair<int, int>>& pairs) {
    if (r < 0) throw DataError("sensitivity_check: r must be >= 0");
    if (r > 0 && static_cast<int>(w_in.size()) < r)
        throw DataError("sensitivity_check: need one W_in per layer");
    SensitivityReport rep;
    rep.r = r;
    rep.alpha = alpha;
    for (int l = 0; l < r; ++l) rep.beta_in = std::max(rep.beta_in, spectral_norm(w_in[l]));

    const CsrMatrix a_abs = abs_csr(a_c);
    const int d0 = x.cols();
    const double step = 1e-5;

    // (sum_{l=0}^r |A_c|^l)_{i,s} for each requested source s
    std::set<int> sources;
    for (auto [i, s] : pairs) sources.insert(s);
    std::map<int, std::vector<double>> reach;
    for (int s : sources) {
        std::vector<double> u(a_abs.rows, 0.0), acc(a_abs.rows, 0.0);
        u[s] = 1.0;
        acc[s] = 1.0;
        for (int l = 1; l <= r; ++l) {
            u = spmv(a_abs, u);
            for (int q = 0; q < a_abs.rows; ++q) acc[q] += u[q];
        }
        reach[s] = std::move(acc);
    }

    rep.all_satisfied = true;
    for (auto [i, s] : pairs) {
        SensitivityPair p;
        p.i = i;
        p.s = s;
        // d_r x d0 Jacobian by central differences over node s inputs
        const int d_r = r == 0 ? d0 : w_in[r - 1].cols();
        Matrix jac(d_r, d0);
        for (int g = 0; g < d0; ++g) {
            Matrix xp = x, xm = x;
            xp(s, g) += step;
            xm(s, g) -= step;
            Matrix hp = win_only_forward(w_in, a_c, xp, r);
            Matrix hm = win_only_forward(w_in, a_c, xm, r);
            for (int f = 0; f < d_r; ++f) jac(f, g) = (hp(i, f) - hm(i, f)) / (2.0 * step);
        }
        p.empirical = spectral_norm(jac);
        p.bound = std::pow(2.0 * alpha * rep.beta_in, r) * reach[s][i];
        if (r == 0) p.bound = i == s ? 1.0 : 0.0;
        p.satisfied = p.empirical <= p.bound * (1.0 + 1e-6);
        rep.all_satisfied = rep.all_satisfied && p.satisfied;
        rep.pairs.push_back(p);
    }
    return rep;
}

SpectrumReport spectrum_report(const AugmentedGraph& augmented) {
    SpectrumReport rep;
    SignedEdgeList edges = edge_list_of(augmented.a_c);
    SignedMatrix l_c = edges.edges.empty() ? SignedMatrix(augmented.total_nodes())
                                           : signed_laplacian(edges);
    EigResult eig = symmetric_eig(l_c);
    rep.eigenvalues = eig.eigenvalues;
    for (double v : rep.eigenvalues)
        if (v < -1e-10) ++rep.negative_count; // below the numerical-zero band

    int train_size = static_cast<int>(
        std::count(augmented.base.train_mask.begin(), augmented.base.train_mask.end(), 1));
    rep.theorem_bound = theorem_negative_edge_bound(augmented.cns.count, train_size);
    rep.edge_negative_count = count_negative_edges(augmented.a_c);
    rep.bound_violated = rep.negative_count > rep.theorem_bound ||
                         rep.negative_count > rep.edge_negative_count;
    return rep;
}

namespace {

std::vector<std::set<int>> support_neighbors(const SignedMatrix& support) {
    std::vector<std::set<int>> nbr(support.dim());
    for (const auto& e : support.entries()) {
        if (e.i == e.j || e.w == 0.0) continue;
        nbr[e.i].insert(e.j);
        nbr[e.j].insert(e.i);
    }
    return nbr;
}

double fc3_from_neighbors(const std::vector<std::set<int>>& nbr, int i, int j) {
    const auto& ni = nbr[i];
    const auto& nj = nbr[j];
    if (!ni.count(j)) throw DataError("forman_fc3: (i, j) is not an edge of the support");
    int triangles = 0;
    for (int u : ni)
        if (u != j && nj.count(u)) ++triangles;
    return 4.0 - static_cast<double>(ni.size()) - static_cast<double>(nj.size()) +
           3.0 * triangles;
}

} // namespace

double forman_fc3(const SignedMatrix& support, int i, int j) {
    return fc3_from_neighbors(support_neighbors(support), i, j);
}

CurvatureReport curvature_delta_report(const LabeledGraph& graph,
                                       const AugmentedGraph& augmented) {
    CurvatureReport rep;
    auto before_nbr = support_neighbors(adjacency_matrix(graph));
    auto after_nbr = support_neighbors(augmented.a_c);
    double sum = 0.0;
    rep.min_delta = graph.edges.empty() ? 0.0 : std::numeric_limits<double>::infinity();
    for (auto [i, j] : graph.edges) {
        double b = fc3_from_neighbors(before_nbr, i, j);
        double a = fc3_from_neighbors(after_nbr, i, j);
        rep.edges.emplace_back(i, j);
        rep.before.push_back(b);
        rep.after.push_back(a);
        rep.delta.push_back(a - b);
        sum += a - b;
        rep.min_delta = std::min(rep.min_delta, a - b);
    }
    rep.mean_delta = rep.edges.empty() ? 0.0 : sum / rep.edges.size();
    return rep;
}

EnergyTrace energy_trace(const Trajectory& traj, const SignedMatrix& l_c) {
    EnergyTrace tr;
    EigResult eig = symmetric_eig(l_c);
    tr.lambda_max = eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues.back();
    for (std::size_t s = 0; s < traj.states.size(); ++s) {
        const Matrix& h = traj.states[s];
        double nsq = h.sum_squares();
        double dir = dirichlet_energy(l_c, h);
        double bound = tr.lambda_max * nsq;
        tr.norm_sq.push_back(nsq);
        tr.dirichlet.push_back(dir);
        tr.bound.push_back(bound);
        if (dir > bound * (1.0 + 1e-8) + 1e-12)
            tr.violations.push_back(static_cast<int>(s)); // algebraic identity broken
    }
    return tr;
}

} // namespace uygraph
