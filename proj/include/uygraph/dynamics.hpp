#pragma once

#include <optional>
#include <vector>

#include "uygraph/matrix.hpp"
#include "uygraph/sparse.hpp"

namespace uygraph {

enum class DynamicsVariant { grand, acmp, uygcn, uygat, label_universe };
enum class SimilarityMode { fixed_weights, attention };

struct DynamicsSpec {
    DynamicsVariant variant = DynamicsVariant::uygcn;
    double delta = 0.0; // double-well coefficient; grand ignores it
    double beta = 0.0;  // acmp constant repulsion
    SimilarityMode similarity = SimilarityMode::fixed_weights;
    double step_size = 0.01;
    double horizon = 1.0;
    std::vector<double> attention_params; // frozen, length 2*d

    void validate() const;
};

struct Trajectory {
    std::vector<double> times;  // starts at 0, increasing
    std::vector<Matrix> states; // one per time
    std::optional<double> diverged_at;

    bool explosive() const { return diverged_at.has_value(); }
};

struct FlockingReport {
    double within_diameter_1 = 0.0; // sup over trailing window, group 1
    double within_diameter_2 = 0.0;
    double between_separation = 0.0; // min cross-pair max-component gap, final time
    std::optional<double> t_star;    // first time after which separation stays >= c_prime
    bool flocked = false;
};

// Elementwise delta * h (1 - h^2); zero at h in {-1, 0, +1}.
Matrix double_well(const Matrix& h, double delta);

// Time derivative of the chosen diffusion variant. a_c carries the
// (normalized or raw) propagation weights; label_universe additionally needs
// the signed label adjacency a_y over the first N nodes.
Matrix rhs(const DynamicsSpec& spec, const CsrMatrix& a_c, const SignedMatrix* a_y,
           const Matrix& h);

// Explicit Euler from t=0 to the horizon, recording every step. A non-finite
// state aborts the run; the partial trajectory is flagged with the divergence
// time.
Trajectory integrate_euler(const DynamicsSpec& spec, const CsrMatrix& a_c, const SignedMatrix* a_y,
                           const Matrix& h0);

struct ClosedFormResult {
    Matrix state;
    bool explosive = false; // some spectral factor e^{-lambda t} hit the clamp
};

// H(t) = U e^{-Lambda t} U^T H(0); the filter is clamped at 1e12 because
// negative eigenvalues make the flow genuinely divergent.
ClosedFormResult closed_form_solution(const SignedMatrix& l_c, const Matrix& h0, double t);

// Bi-cluster flocking check over a recorded trajectory: both groups stay
// within 10x their initial diameter over the trailing window, and the max
// cross-pair component gap stays >= c_prime from some time t* on.
FlockingReport detect_bicluster_flocking(const Trajectory& traj, const std::vector<int>& group1,
                                         const std::vector<int>& group2, double c_prime,
                                         int window);

} // namespace uygraph
