#pragma once

#include "uygraph/matrix.hpp"
#include "uygraph/sparse.hpp"

// Data-parallel kernels behind every propagation and channel-mixing step.
// The OpenMP variants split work by output row; within a row the accumulation
// order is identical to the serial reference, so results are bitwise equal
// for any thread count. reference:: holds the plain serial loops used by the
// tests and the benchmark as ground truth.

namespace uygraph {

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);
// Y = S * X, sparse times dense
Matrix spmm(const CsrMatrix& s, const Matrix& x);
// Y = S * X with the structure of s but substituted entry values (per-layer
// attention reweighting reuses one support structure).
Matrix spmm_vals(const CsrMatrix& s, const std::vector<double>& vals, const Matrix& x);
// y = S * x
std::vector<double> spmv(const CsrMatrix& s, const std::vector<double>& x);

namespace reference {
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_at(const Matrix& a, const Matrix& b);
Matrix matmul_bt(const Matrix& a, const Matrix& b);
Matrix spmm(const CsrMatrix& s, const Matrix& x);
Matrix spmm_vals(const CsrMatrix& s, const std::vector<double>& vals, const Matrix& x);
std::vector<double> spmv(const CsrMatrix& s, const std::vector<double>& x);
} // namespace reference

} // namespace uygraph
