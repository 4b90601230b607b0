#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>
#include <vector>

#include "uygraph/errors.hpp"

namespace uygraph {

struct SparseEntry {
    int i = 0;
    int j = 0;
    double w = 0.0;
};

// Symmetric sparse matrix with real (possibly negative) weights. Entries are
// stored once with the canonical key i <= j; no explicit zeros. Carrier for
// adjacencies (signed or not) and signed Laplacians.
class SignedMatrix {
public:
    SignedMatrix() = default;
    explicit SignedMatrix(int dim) : dim_(dim) {}

    int dim() const { return dim_; }
    const std::vector<SparseEntry>& entries() const { return entries_; }

    // Sets M[i][j] = M[j][i] = w. w == 0 removes the entry.
    void set(int i, int j, double w) {
        if (i < 0 || j < 0 || i >= dim_ || j >= dim_)
            throw DataError("SignedMatrix::set: index out of range");
        if (i > j) std::swap(i, j);
        auto key = std::make_pair(i, j);
        auto it = index_.find(key);
        if (w == 0.0) {
            if (it != index_.end()) {
                entries_[it->second].w = 0.0; // compacted on demand
                dirty_ = true;
                index_.erase(it);
            }
            return;
        }
        if (it != index_.end()) {
            entries_[it->second].w = w;
        } else {
            index_[key] = entries_.size();
            entries_.push_back({i, j, w});
        }
    }

    void add(int i, int j, double w) { set(i, j, get(i, j) + w); }

    double get(int i, int j) const {
        if (i > j) std::swap(i, j);
        auto it = index_.find(std::make_pair(i, j));
        return it == index_.end() ? 0.0 : entries_[it->second].w;
    }

    // Drops zeroed slots left behind by set(...,0) and sorts canonically.
    void compact() {
        if (!dirty_) return;
        std::vector<SparseEntry> kept;
        kept.reserve(entries_.size());
        for (const auto& e : entries_)
            if (e.w != 0.0) kept.push_back(e);
        entries_ = std::move(kept);
        rebuild_index();
        dirty_ = false;
    }

    void sort_entries() {
        compact();
        std::sort(entries_.begin(), entries_.end(), [](const SparseEntry& a, const SparseEntry& b) {
            return std::tie(a.i, a.j) < std::tie(b.i, b.j);
        });
        rebuild_index();
    }

    int nnz_offdiag() const {
        int n = 0;
        for (const auto& e : entries_)
            if (e.i != e.j && e.w != 0.0) ++n;
        return n;
    }

private:
    void rebuild_index() {
        index_.clear();
        for (std::size_t k = 0; k < entries_.size(); ++k)
            index_[std::make_pair(entries_[k].i, entries_[k].j)] = k;
    }

    int dim_ = 0;
    bool dirty_ = false;
    std::vector<SparseEntry> entries_;
    std::map<std::pair<int, int>, std::size_t> index_;
};

// General sparse matrix in CSR form. Normalized propagation operators live
// here: row-stochastic normalization of a symmetric matrix is not symmetric,
// so it cannot be a SignedMatrix.
struct CsrMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<int> row_ptr; // size rows+1
    std::vector<int> col;
    std::vector<double> val;

    int nnz() const { return static_cast<int>(col.size()); }

    double get(int i, int j) const {
        for (int k = row_ptr[i]; k < row_ptr[i + 1]; ++k)
            if (col[k] == j) return val[k];
        return 0.0;
    }
};

// Expands symmetric canonical storage into full CSR (both orientations).
CsrMatrix to_csr(const SignedMatrix& m);

// Entrywise absolute value.
CsrMatrix abs_csr(const CsrMatrix& m);

// Builds CSR from triplets (duplicates summed).
CsrMatrix csr_from_triplets(int rows, int cols, const std::vector<SparseEntry>& triplets);

CsrMatrix transpose(const CsrMatrix& m);

} // namespace uygraph
