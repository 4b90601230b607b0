#include "uygraph/kernels.hpp"

namespace uygraph {

static void check_mul(const Matrix& a, const Matrix& b, int a_dim, int b_dim, const char* where) {
    int ak = a_dim == 0 ? a.rows() : a.cols();
    int bk = b_dim == 0 ? b.rows() : b.cols();
    if (ak != bk) throw DataError(std::string(where) + ": inner dimension mismatch");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul(a, b, 1, 0, "matmul");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(m, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b.row(p);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
    check_mul(a, b, 0, 0, "matmul_at");
    const int m = a.cols(), k = a.rows(), n = b.cols();
    Matrix c(m, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = a(p, i);
            if (av == 0.0) continue;
            const double* bp = b.row(p);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    check_mul(a, b, 1, 1, "matmul_bt");
    const int m = a.rows(), k = a.cols(), n = b.rows();
    Matrix c(m, n);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int j = 0; j < n; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = s;
        }
    }
    return c;
}

Matrix spmm(const CsrMatrix& s, const Matrix& x) {
    if (s.cols != x.rows()) throw DataError("spmm: inner dimension mismatch");
    const int d = x.cols();
    Matrix y(s.rows, d);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < s.rows; ++i) {
        double* yi = y.row(i);
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const double w = s.val[k];
            const double* xj = x.row(s.col[k]);
            for (int f = 0; f < d; ++f) yi[f] += w * xj[f];
        }
    }
    return y;
}

Matrix spmm_vals(const CsrMatrix& s, const std::vector<double>& vals, const Matrix& x) {
    if (s.cols != x.rows()) throw DataError("spmm_vals: inner dimension mismatch");
    if (vals.size() != s.val.size()) throw DataError("spmm_vals: value array size mismatch");
    const int d = x.cols();
    Matrix y(s.rows, d);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < s.rows; ++i) {
        double* yi = y.row(i);
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const double w = vals[k];
            const double* xj = x.row(s.col[k]);
            for (int f = 0; f < d; ++f) yi[f] += w * xj[f];
        }
    }
    return y;
}

std::vector<double> spmv(const CsrMatrix& s, const std::vector<double>& x) {
    if (s.cols != static_cast<int>(x.size())) throw DataError("spmv: dimension mismatch");
    std::vector<double> y(s.rows, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = 0; i < s.rows; ++i) {
        double acc = 0.0;
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) acc += s.val[k] * x[s.col[k]];
        y[i] = acc;
    }
    return y;
}

namespace reference {

Matrix matmul(const Matrix& a, const Matrix& b) {
    check_mul(a, b, 1, 0, "reference::matmul");
    const int m = a.rows(), k = a.cols(), n = b.cols();
    Matrix c(m, n);
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = ai[p];
            if (av == 0.0) continue;
            const double* bp = b.row(p);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
    check_mul(a, b, 0, 0, "reference::matmul_at");
    const int m = a.cols(), k = a.rows(), n = b.cols();
    Matrix c(m, n);
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        for (int p = 0; p < k; ++p) {
            const double av = a(p, i);
            if (av == 0.0) continue;
            const double* bp = b.row(p);
            for (int j = 0; j < n; ++j) ci[j] += av * bp[j];
        }
    }
    return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    check_mul(a, b, 1, 1, "reference::matmul_bt");
    const int m = a.rows(), k = a.cols(), n = b.rows();
    Matrix c(m, n);
    for (int i = 0; i < m; ++i) {
        double* ci = c.row(i);
        const double* ai = a.row(i);
        for (int j = 0; j < n; ++j) {
            const double* bj = b.row(j);
            double s = 0.0;
            for (int p = 0; p < k; ++p) s += ai[p] * bj[p];
            ci[j] = s;
        }
    }
    return c;
}

Matrix spmm(const CsrMatrix& s, const Matrix& x) {
    if (s.cols != x.rows()) throw DataError("reference::spmm: inner dimension mismatch");
    const int d = x.cols();
    Matrix y(s.rows, d);
    for (int i = 0; i < s.rows; ++i) {
        double* yi = y.row(i);
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const double w = s.val[k];
            const double* xj = x.row(s.col[k]);
            for (int f = 0; f < d; ++f) yi[f] += w * xj[f];
        }
    }
    return y;
}

Matrix spmm_vals(const CsrMatrix& s, const std::vector<double>& vals, const Matrix& x) {
    if (s.cols != x.rows()) throw DataError("reference::spmm_vals: inner dimension mismatch");
    if (vals.size() != s.val.size())
        throw DataError("reference::spmm_vals: value array size mismatch");
    const int d = x.cols();
    Matrix y(s.rows, d);
    for (int i = 0; i < s.rows; ++i) {
        double* yi = y.row(i);
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) {
            const double w = vals[k];
            const double* xj = x.row(s.col[k]);
            for (int f = 0; f < d; ++f) yi[f] += w * xj[f];
        }
    }
    return y;
}

std::vector<double> spmv(const CsrMatrix& s, const std::vector<double>& x) {
    if (s.cols != static_cast<int>(x.size())) throw DataError("reference::spmv: dimension mismatch");
    std::vector<double> y(s.rows, 0.0);
    for (int i = 0; i < s.rows; ++i) {
        double acc = 0.0;
        for (int k = s.row_ptr[i]; k < s.row_ptr[i + 1]; ++k) acc += s.val[k] * x[s.col[k]];
        y[i] = acc;
    }
    return y;
}

} // namespace reference
} // namespace uygraph
