#pragma once

#include <vector>

#include "uygraph/matrix.hpp"
#include "uygraph/sparse.hpp"

namespace uygraph {

struct EigResult {
    std::vector<double> eigenvalues; // ascending
    Matrix eigenvectors;             // column k pairs with eigenvalues[k]
};

// Cyclic-Jacobi eigendecomposition of a symmetric matrix. Converges when the
// off-diagonal Frobenius norm drops below 1e-12 relative to ||M||_F; raises
// NumericalError after 100 sweeps without convergence, or when the input is
// not symmetric to 1e-12.
EigResult symmetric_eig(const Matrix& m);
EigResult symmetric_eig(const SignedMatrix& m);

Matrix to_dense(const SignedMatrix& m);

} // namespace uygraph
