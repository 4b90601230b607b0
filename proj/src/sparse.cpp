#include "uygraph/sparse.hpp"

#include <numeric>

namespace uygraph {

CsrMatrix csr_from_triplets(int rows, int cols, const std::vector<SparseEntry>& triplets) {
    CsrMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.row_ptr.assign(rows + 1, 0);
    for (const auto& t : triplets) {
        if (t.i < 0 || t.i >= rows || t.j < 0 || t.j >= cols)
            throw DataError("csr_from_triplets: index out of range");
        ++m.row_ptr[t.i + 1];
    }
    for (int i = 0; i < rows; ++i) m.row_ptr[i + 1] += m.row_ptr[i];
    std::vector<int> cursor(m.row_ptr.begin(), m.row_ptr.end() - 1);
    m.col.assign(triplets.size(), 0);
    m.val.assign(triplets.size(), 0.0);
    for (const auto& t : triplets) {
        int k = cursor[t.i]++;
        m.col[k] = t.j;
        m.val[k] = t.w;
    }
    // canonical column order per row, duplicates summed
    CsrMatrix out;
    out.rows = rows;
    out.cols = cols;
    out.row_ptr.assign(rows + 1, 0);
    std::vector<std::pair<int, double>> buf;
    for (int i = 0; i < rows; ++i) {
        buf.clear();
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            buf.emplace_back(m.col[k], m.val[k]);
        std::sort(buf.begin(), buf.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        int prev = -1;
        for (const auto& [c, v] : buf) {
            if (c == prev) {
                out.val.back() += v;
            } else {
                out.col.push_back(c);
                out.val.push_back(v);
                prev = c;
            }
        }
        out.row_ptr[i + 1] = static_cast<int>(out.col.size());
    }
    return out;
}

CsrMatrix to_csr(const SignedMatrix& m) {
    std::vector<SparseEntry> trip;
    trip.reserve(m.entries().size() * 2);
    for (const auto& e : m.entries()) {
        if (e.w == 0.0) continue;
        trip.push_back(e);
        if (e.i != e.j) trip.push_back({e.j, e.i, e.w});
    }
    return csr_from_triplets(m.dim(), m.dim(), trip);
}

CsrMatrix abs_csr(const CsrMatrix& m) {
    CsrMatrix out = m;
    for (double& v : out.val) v = std::abs(v);
    return out;
}

CsrMatrix transpose(const CsrMatrix& m) {
    std::vector<SparseEntry> trip;
    trip.reserve(m.col.size());
    for (int i = 0; i < m.rows; ++i)
        for (int k = m.row_ptr[i]; k < m.row_ptr[i + 1]; ++k)
            trip.push_back({m.col[k], i, m.val[k]});
    return csr_from_triplets(m.cols, m.rows, trip);
}

} // namespace uygraph
