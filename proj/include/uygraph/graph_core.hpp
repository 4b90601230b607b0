#pragma once

#include <vector>

#include "uygraph/graph.hpp"
#include "uygraph/matrix.hpp"
#include "uygraph/sparse.hpp"

namespace uygraph {

struct HomophilyResult {
    double score = 0.0; // mean fraction of same-label neighbors, in [0, 1]
    int skipped = 0;    // labeled nodes with no neighbors
};

// Mean over labeled nodes of (same-label neighbor count / neighbor count).
// Unlabeled neighbors count in the denominator only. Throws DataError("no
// labels") when no node is labeled.
HomophilyResult homophily_score(const LabeledGraph& graph);

// D_ii = sum_j |m_ij|. Entries with i == j contribute once.
std::vector<double> absolute_degree(const SignedMatrix& m);

// Row-stochastic (in absolute value) normalization D^-1 (M + I) or D^-1 M;
// degrees use absolute weights and are computed after the optional self-loop
// addition. The result is not symmetric in general, hence CSR.
CsrMatrix normalize_rw(const SignedMatrix& m, bool add_self_loops);

// Symmetric normalization D^-1/2 (M + I) D^-1/2 or D^-1/2 M D^-1/2. Exactly
// symmetric by construction; entry signs are preserved.
SignedMatrix normalize_sym(const SignedMatrix& m, bool add_self_loops);

// L_ii = sum of incident weights, L_ij = -w_ij. Equals E W E^T for the
// incidence matrix E below.
SignedMatrix signed_laplacian(const SignedEdgeList& edges);

// Incidence matrix E of shape num_nodes x |edges|: column e has +1 at edge
// source and -1 at edge target. Paired with edge weights it reconstructs the
// Laplacian; kept as an independent route for tests.
Matrix incidence_matrix(const SignedEdgeList& edges);

// tr(h^T L h), cross-checked against the edge-sum form
// sum_(i,j) w_ij ||h_i - h_j||^2 to 1e-9 relative; disagreement means the
// input is not a Laplacian and raises NumericalError.
double dirichlet_energy(const SignedMatrix& l, const Matrix& h);

// Signed edge-sum energy sum_(i,j) a_ij ||h_i - h_j||^2 over unordered pairs;
// may be negative.
double signed_energy(const SignedMatrix& a_c, const Matrix& h);

// +1 adjacency of the plain graph.
SignedMatrix adjacency_matrix(const LabeledGraph& graph);

// Off-diagonal entries of a symmetric matrix as a weighted edge list
// (diagonal entries contribute nothing to an incidence Laplacian).
SignedEdgeList edge_list_of(const SignedMatrix& m);

} // namespace uygraph
