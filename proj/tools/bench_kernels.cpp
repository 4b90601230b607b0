// Compares the OpenMP kernels against the serial reference implementations
// and reports speedups on shapes typical of a training run.

#include <chrono>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "uygraph/kernels.hpp"
#include "uygraph/rng.hpp"

using namespace uygraph;

namespace {

Matrix random_matrix(int rows, int cols, Rng& rng) {
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
    return m;
}

CsrMatrix random_sparse(int n, double density, Rng& rng) {
    std::vector<SparseEntry> trip;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (rng.bernoulli(density)) trip.push_back({i, j, rng.normal()});
    return csr_from_triplets(n, n, trip);
}

double time_ms(const std::function<void()>& fn, int repeats) {
    auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < repeats; ++r) fn();
    auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / repeats;
}

void report(const char* name, double serial_ms, double parallel_ms, bool equal) {
    std::printf("%-28s serial %8.3f ms   parallel %8.3f ms   speedup %5.2fx   %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms,
                equal ? "bitwise-equal" : "MISMATCH");
}

} // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("openmp: not enabled\n");
#endif
    Rng rng(42);
    const int repeats = 5;

    {
        Matrix a = random_matrix(512, 512, rng);
        Matrix b = random_matrix(512, 512, rng);
        Matrix out_p, out_s;
        double tp = time_ms([&] { out_p = matmul(a, b); }, repeats);
        double ts = time_ms([&] { out_s = reference::matmul(a, b); }, repeats);
        report("matmul 512x512x512", ts, tp, out_p == out_s);
    }
    {
        Matrix a = random_matrix(512, 512, rng);
        Matrix b = random_matrix(512, 512, rng);
        Matrix out_p, out_s;
        double tp = time_ms([&] { out_p = matmul_at(a, b); }, repeats);
        double ts = time_ms([&] { out_s = reference::matmul_at(a, b); }, repeats);
        report("matmul_at 512x512x512", ts, tp, out_p == out_s);
    }
    {
        Matrix a = random_matrix(512, 512, rng);
        Matrix b = random_matrix(512, 512, rng);
        Matrix out_p, out_s;
        double tp = time_ms([&] { out_p = matmul_bt(a, b); }, repeats);
        double ts = time_ms([&] { out_s = reference::matmul_bt(a, b); }, repeats);
        report("matmul_bt 512x512x512", ts, tp, out_p == out_s);
    }
    {
        CsrMatrix s = random_sparse(2000, 0.01, rng);
        Matrix x = random_matrix(2000, 64, rng);
        Matrix out_p, out_s;
        double tp = time_ms([&] { out_p = spmm(s, x); }, repeats);
        double ts = time_ms([&] { out_s = reference::spmm(s, x); }, repeats);
        report("spmm 2000 (1% nnz) x 64", ts, tp, out_p == out_s);
    }
    {
        CsrMatrix s = random_sparse(2000, 0.01, rng);
        std::vector<double> x(2000);
        for (double& v : x) v = rng.normal();
        std::vector<double> out_p, out_s;
        double tp = time_ms([&] { out_p = spmv(s, x); }, repeats);
        double ts = time_ms([&] { out_s = reference::spmv(s, x); }, repeats);
        report("spmv 2000 (1% nnz)", ts, tp, out_p == out_s);
    }
    return 0;
}
