#pragma once

#include <cstddef>
#include <map>
#include <utility>
#include <vector>

#include "ptensor/combinatorics.hpp"
#include "ptensor/matrix.hpp"

namespace ptensor {

using SparseRow = std::vector<std::pair<std::size_t, Rational>>;  // sorted by column, no zeros

/// Incremental Gauss-Jordan elimination over the rationals. Rows are kept
/// sparse and fully reduced: every pivot column is zero in all other rows.
class ExactRowReducer {
public:
    explicit ExactRowReducer(std::size_t cols) : cols_(cols) {}

    /// Adds a row; returns true if it was independent of the rows so far.
    bool add_row(const SparseRow& row);
    template <class T>
    bool add_dense_row(std::span<const T> row) {
        SparseRow sparse;
        for (std::size_t c = 0; c < row.size(); ++c)
            if (row[c] != T{}) sparse.emplace_back(c, Rational(row[c]));
        return add_row(sparse);
    }

    std::size_t rank() const noexcept { return pivots_.size(); }
    std::size_t cols() const noexcept { return cols_; }

    /// Basis of the right null space {x : R x = 0}, one vector per free column.
    std::vector<std::vector<Rational>> nullspace() const;

    /// True if `row` lies in the span of the rows added so far.
    bool contains(const SparseRow& row) const;

private:
    SparseRow reduce(SparseRow row) const;

    std::size_t cols_;
    std::map<std::size_t, SparseRow> pivots_;  // pivot column -> row with leading 1
};

/// Rank of the rows of `m`, computed exactly.
template <class T>
std::size_t exact_rank(const Matrix<T>& m) {
    ExactRowReducer r(m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) r.add_dense_row(m.row(i));
    return r.rank();
}

}  // namespace ptensor
