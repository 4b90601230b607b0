#include "uygraph/eig.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace uygraph {

Matrix to_dense(const SignedMatrix& m) {
    Matrix d(m.dim(), m.dim());
    for (const auto& e : m.entries()) {
        if (e.w == 0.0) continue;
        d(e.i, e.j) = e.w;
        d(e.j, e.i) = e.w;
    }
    return d;
}

namespace {

double offdiag_norm(const Matrix& a) {
    double s = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = i + 1; j < a.cols(); ++j) s += a(i, j) * a(i, j);
    return std::sqrt(2.0 * s);
}

} // namespace

EigResult symmetric_eig(const Matrix& m) {
    const int n = m.rows();
    if (n != m.cols()) throw DataError("symmetric_eig: matrix not square");
    const double scale = m.frobenius_norm();
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (std::abs(m(i, j) - m(j, i)) > 1e-12 * std::max(1.0, scale))
                throw DataError("symmetric_eig: matrix not symmetric");

    Matrix a = m;
    Matrix u = Matrix::identity(n);
    const double tol = 1e-12 * std::max(1.0, scale);
    const int max_sweeps = 100;

    bool converged = (n <= 1) || offdiag_norm(a) <= tol;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (int p = 0; p < n - 1; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double app = a(p, p), aqq = a(q, q);
                // rotation angle from the classic two-sided Jacobi formulas
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double ukp = u(k, p), ukq = u(k, q);
                    u(k, p) = c * ukp - s * ukq;
                    u(k, q) = s * ukp + c * ukq;
                }
            }
        }
        converged = offdiag_norm(a) <= tol;
    }
    if (!converged) throw NumericalError("symmetric_eig: no convergence in 100 sweeps");

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

    EigResult r;
    r.eigenvalues.resize(n);
    r.eigenvectors = Matrix(n, n);
    for (int k = 0; k < n; ++k) {
        r.eigenvalues[k] = a(order[k], order[k]);
        for (int i = 0; i < n; ++i) r.eigenvectors(i, k) = u(i, order[k]);
    }
    return r;
}

EigResult symmetric_eig(const SignedMatrix& m) { return symmetric_eig(to_dense(m)); }

} // namespace uygraph
