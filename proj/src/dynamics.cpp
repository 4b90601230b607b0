#include "uygraph/dynamics.hpp"

#include <cmath>
#include <limits>

#include "uygraph/eig.hpp"
#include "uygraph/kernels.hpp"
#include "uygraph/model.hpp"

namespace uygraph {

void DynamicsSpec::validate() const {
    if (step_size <= 0.0) throw DataError("DynamicsSpec: step size must be > 0");
    if (horizon < step_size) throw DataError("DynamicsSpec: horizon must be >= step size");
    if (delta < 0.0) throw DataError("DynamicsSpec: delta must be >= 0");
    const bool needs_att =
        variant == DynamicsVariant::uygat || similarity == SimilarityMode::attention;
    if (needs_att && attention_params.empty())
        throw DataError("DynamicsSpec: attention variant without attention params");
}

Matrix double_well(const Matrix& h, double delta) {
    Matrix out(h.rows(), h.cols());
    if (delta == 0.0) return out;
    const double* src = h.data();
    double* dst = out.data();
    for (std::size_t k = 0; k < h.size(); ++k) dst[k] = delta * src[k] * (1.0 - src[k] * src[k]);
    return out;
}

namespace {

bool variant_has_double_well(DynamicsVariant v) {
    return v != DynamicsVariant::grand; // Eq-3-style flow carries no potential
}

bool variant_uses_attention(const DynamicsSpec& spec) {
    return spec.variant == DynamicsVariant::uygat ||
           spec.similarity == SimilarityMode::attention;
}

// Static part of the interaction weights for one variant.
CsrMatrix build_generator(const DynamicsSpec& spec, const CsrMatrix& a_c,
                          const SignedMatrix* a_y) {
    switch (spec.variant) {
        case DynamicsVariant::grand:
        case DynamicsVariant::uygcn:
        case DynamicsVariant::uygat:
            return a_c;
        case DynamicsVariant::acmp: {
            CsrMatrix g = a_c;
            for (int i = 0; i < g.rows; ++i)
                for (int k = g.row_ptr[i]; k < g.row_ptr[i + 1]; ++k)
                    if (g.col[k] != i) g.val[k] -= spec.beta;
            return g;
        }
        case DynamicsVariant::label_universe: {
            if (!a_y) throw DataError("rhs: label_universe requires the label adjacency");
            const int n = a_y->dim();
            CsrMatrix g = a_c;
            for (int i = 0; i < g.rows && i < n; ++i)
                for (int k = g.row_ptr[i]; k < g.row_ptr[i + 1]; ++k) {
                    const int j = g.col[k];
                    if (j >= n || j == i) continue;
                    const double sign_w = a_y->get(i, j);
                    if (sign_w < 0.0) g.val[k] = -g.val[k];
                }
            return g;
        }
    }
    throw DataError("rhs: unknown variant");
}

// Support of |a_c| plus self-loops, for the attention softmax neighborhoods.
CsrMatrix attention_support(const CsrMatrix& a_c) {
    std::vector<SparseEntry> trip;
    std::vector<char> has_diag(a_c.rows, 0);
    for (int i = 0; i < a_c.rows; ++i)
        for (int k = a_c.row_ptr[i]; k < a_c.row_ptr[i + 1]; ++k) {
            trip.push_back({i, a_c.col[k], a_c.val[k]});
            if (a_c.col[k] == i) has_diag[i] = 1;
        }
    for (int i = 0; i < a_c.rows; ++i)
        if (!has_diag[i]) trip.push_back({i, i, 0.0}); // support only; zero weight
    return csr_from_triplets(a_c.rows, a_c.cols, trip);
}

// dh_i = sum_j W_ij (h_j - h_i) [+ delta h (1 - h^2)]
Matrix flow(const CsrMatrix& w, const std::vector<double>* vals, const Matrix& h, double delta) {
    Matrix out = vals ? spmm_vals(w, *vals, h) : spmm(w, h);
    const int d = h.cols();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < w.rows; ++i) {
        double rowsum = 0.0;
        for (int k = w.row_ptr[i]; k < w.row_ptr[i + 1]; ++k)
            rowsum += vals ? (*vals)[k] : w.val[k];
        double* oi = out.row(i);
        const double* hi = h.row(i);
        for (int f = 0; f < d; ++f) {
            oi[f] -= rowsum * hi[f];
            if (delta != 0.0) oi[f] += delta * hi[f] * (1.0 - hi[f] * hi[f]);
        }
    }
    return out;
}

} // namespace

Matrix rhs(const DynamicsSpec& spec, const CsrMatrix& a_c, const SignedMatrix* a_y,
           const Matrix& h) {
    spec.validate();
    if (a_c.rows != h.rows()) throw DataError("rhs: state row count != matrix dimension");
    CsrMatrix gen = build_generator(spec, a_c, a_y);
    const double delta = variant_has_double_well(spec.variant) ? spec.delta : 0.0;
    if (variant_uses_attention(spec)) {
        CsrMatrix support = attention_support(gen);
        std::vector<double> alpha =
            attention_coefficients(h, spec.attention_params, support);
        std::vector<double> vals(support.val.size());
        for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = support.val[k] * alpha[k];
        return flow(support, &vals, h, delta);
    }
    return flow(gen, nullptr, h, delta);
}

Trajectory integrate_euler(const DynamicsSpec& spec, const CsrMatrix& a_c, const SignedMatrix* a_y,
                           const Matrix& h0) {
    spec.validate();
    if (!h0.all_finite()) throw DataError("integrate_euler: non-finite initial state");
    CsrMatrix gen = build_generator(spec, a_c, a_y);
    const bool attn = variant_uses_attention(spec);
    CsrMatrix support;
    if (attn) support = attention_support(gen);
    const double delta = variant_has_double_well(spec.variant) ? spec.delta : 0.0;
    const double dt = spec.step_size;
    const int steps = static_cast<int>(std::llround(spec.horizon / dt));

    Trajectory traj;
    traj.times.reserve(steps + 1);
    traj.states.reserve(steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(h0);

    Matrix h = h0;
    for (int s = 1; s <= steps; ++s) {
        Matrix dh;
        if (attn) {
            std::vector<double> alpha = attention_coefficients(h, spec.attention_params, support);
            std::vector<double> vals(support.val.size());
            for (std::size_t k = 0; k < vals.size(); ++k) vals[k] = support.val[k] * alpha[k];
            dh = flow(support, &vals, h, delta);
        } else {
            dh = flow(gen, nullptr, h, delta);
        }
        double* hp = h.data();
        const double* dp = dh.data();
        for (std::size_t k = 0; k < h.size(); ++k) hp[k] += dt * dp[k];
        if (!h.all_finite()) {
            traj.diverged_at = s * dt;
            break;
        }
        traj.times.push_back(s * dt);
        traj.states.push_back(h);
    }
    return traj;
}

ClosedFormResult closed_form_solution(const SignedMatrix& l_c, const Matrix& h0, double t) {
    if (l_c.dim() != h0.rows()) throw DataError("closed_form_solution: dimension mismatch");
    ClosedFormResult r;
    if (t == 0.0) {
        r.state = h0;
        return r;
    }
    EigResult eig = symmetric_eig(l_c);
    Matrix projected = matmul_at(eig.eigenvectors, h0); // U^T H0
    constexpr double clamp = 1e12;
    for (int k = 0; k < projected.rows(); ++k) {
        double filter = std::exp(-eig.eigenvalues[k] * t);
        if (filter > clamp) {
            filter = clamp;
            r.explosive = true;
        }
        for (int f = 0; f < projected.cols(); ++f) projected(k, f) *= filter;
    }
    r.state = matmul(eig.eigenvectors, projected);
    return r;
}

namespace {

// Max over pairs (and feature components) of |h_i - h_j| within one state.
double group_diameter(const Matrix& h, const std::vector<int>& group) {
    double d = 0.0;
    for (std::size_t a = 0; a < group.size(); ++a)
        for (std::size_t b = a + 1; b < group.size(); ++b) {
            const double* ha = h.row(group[a]);
            const double* hb = h.row(group[b]);
            for (int f = 0; f < h.cols(); ++f) d = std::max(d, std::abs(ha[f] - hb[f]));
        }
    return d;
}

double cross_separation_max(const Matrix& h, const std::vector<int>& g1,
                            const std::vector<int>& g2) {
    double d = 0.0;
    for (int a : g1)
        for (int b : g2) {
            const double* ha = h.row(a);
            const double* hb = h.row(b);
            for (int f = 0; f < h.cols(); ++f) d = std::max(d, std::abs(ha[f] - hb[f]));
        }
    return d;
}

double cross_separation_min_pair(const Matrix& h, const std::vector<int>& g1,
                                 const std::vector<int>& g2) {
    double dmin = std::numeric_limits<double>::infinity();
    for (int a : g1)
        for (int b : g2) {
            const double* ha = h.row(a);
            const double* hb = h.row(b);
            double pair_gap = 0.0;
            for (int f = 0; f < h.cols(); ++f) pair_gap = std::max(pair_gap, std::abs(ha[f] - hb[f]));
            dmin = std::min(dmin, pair_gap);
        }
    return dmin;
}

} // namespace

FlockingReport detect_bicluster_flocking(const Trajectory& traj, const std::vector<int>& group1,
                                         const std::vector<int>& group2, double c_prime,
                                         int window) {
    if (group1.empty() || group2.empty())
        throw DataError("detect_bicluster_flocking: empty group");
    for (int a : group1)
        for (int b : group2)
            if (a == b) throw DataError("detect_bicluster_flocking: groups not disjoint");
    const int len = static_cast<int>(traj.states.size());
    if (len <= window) throw DataError("detect_bicluster_flocking: trajectory shorter than window");

    FlockingReport rep;
    const Matrix& initial = traj.states.front();
    const double init1 = group_diameter(initial, group1);
    const double init2 = group_diameter(initial, group2);

    for (int s = len - window; s < len; ++s) {
        rep.within_diameter_1 = std::max(rep.within_diameter_1, group_diameter(traj.states[s], group1));
        rep.within_diameter_2 = std::max(rep.within_diameter_2, group_diameter(traj.states[s], group2));
    }
    // "finite sup" operationalized as 10x the initial diameter
    const double eps = 1e-12;
    const bool bounded = rep.within_diameter_1 <= 10.0 * init1 + eps &&
                         rep.within_diameter_2 <= 10.0 * init2 + eps &&
                         std::isfinite(rep.within_diameter_1) && std::isfinite(rep.within_diameter_2);

    rep.between_separation = cross_separation_min_pair(traj.states.back(), group1, group2);

    int last_below = -1;
    for (int s = 0; s < len; ++s)
        if (cross_separation_max(traj.states[s], group1, group2) < c_prime) last_below = s;
    if (last_below + 1 < len) rep.t_star = traj.times[last_below + 1];

    rep.flocked = bounded && rep.t_star.has_value() && !traj.explosive();
    return rep;
}

} // namespace uygraph
