#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "uygraph/augment.hpp"
#include "uygraph/dynamics.hpp"
#include "uygraph/graph.hpp"
#include "uygraph/matrix.hpp"
#include "uygraph/model.hpp"
#include "uygraph/sparse.hpp"

namespace uygraph {

struct OsmProbeReport {
    double x_block_std = 0.0; // std over the first N entries of the iterate
    bool converged_to_constant = false;
    bool degenerate = false; // single-node graph
    int iterations = 0;
};

// Iterates h <- A_hat h from a seeded random start with sup-norm
// renormalization each step, then reports how constant the original-node
// block ended up. A constant limit is the over-smoothed state.
OsmProbeReport osm_fixed_point_probe(const CsrMatrix& a_c_normalized, int n_original,
                                     int iterations, double tolerance, std::uint64_t seed = 7);

struct SensitivityPair {
    int i = 0;
    int s = 0;
    double empirical = 0.0; // operator norm of d h_i^{(r)} / d x_s
    double bound = 0.0;     // (2 alpha beta_in)^r (sum_l |A_c|^l)_{i,s}
    bool satisfied = false; // empirical <= bound (1 + 1e-6)
};

struct SensitivityReport {
    int r = 0;
    double alpha = 0.0;
    double beta_in = 0.0; // max spectral norm of W_in over layers
    std::vector<SensitivityPair> pairs;
    bool all_satisfied = false;
};

// Jacobian sensitivity against the propagation bound. The probe forward is
// the W_in-only stack h^{(l+1)} = tanh(A_c h^{(l)} W_in^{(l)}) so the
// derivative bound |sigma'| <= alpha holds everywhere; Jacobians come from
// central finite differences over every input coordinate of node s.
SensitivityReport sensitivity_check(const std::vector<Matrix>& w_in, const CsrMatrix& a_c,
                                    const Matrix& x, int r, double alpha,
                                    const std::vector<std::pair<int, int>>& pairs);

struct SpectrumReport {
    std::vector<double> eigenvalues; // ascending
    int negative_count = 0;          // eigenvalues < -1e-10
    std::int64_t theorem_bound = 0;  // K(K-1)/2 + K(|T|-1)
    std::int64_t edge_negative_count = 0;
    bool bound_violated = false; // flagged, never hidden
};

SpectrumReport spectrum_report(const AugmentedGraph& augmented);

// Augmented Forman curvature 4 - d_i - d_j + 3 * (#triangles through the
// edge), degrees and triangles on the unweighted off-diagonal support.
double forman_fc3(const SignedMatrix& support, int i, int j);

struct CurvatureReport {
    std::vector<std::pair<int, int>> edges; // original edges
    std::vector<double> before, after, delta;
    double min_delta = 0.0, mean_delta = 0.0;
};

// Per original edge: FC3 on the base support vs the augmented |A_c| support.
CurvatureReport curvature_delta_report(const LabeledGraph& graph, const AugmentedGraph& augmented);

struct EnergyTrace {
    std::vector<double> norm_sq;        // ||h||^2 per step
    std::vector<double> dirichlet;      // h^T L h per step
    std::vector<double> bound;          // lambda_max ||h||^2 per step
    double lambda_max = 0.0;
    std::vector<int> violations;        // steps where dirichlet > bound (1+1e-8)
};

EnergyTrace energy_trace(const Trajectory& traj, const SignedMatrix& l_c);

} // namespace uygraph
