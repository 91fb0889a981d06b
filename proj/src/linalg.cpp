#include "ptensor/linalg.hpp"

#include <algorithm>

#include "ptensor/error.hpp"

namespace ptensor {

namespace {

// a + s * b for sorted sparse rows.
SparseRow axpy(const SparseRow& a, const Rational& s, const SparseRow& b) {
    SparseRow out;
    out.reserve(a.size() + b.size());
    auto ia = a.begin(), ib = b.begin();
    while (ia != a.end() || ib != b.end()) {
        if (ib == b.end() || (ia != a.end() && ia->first < ib->first)) {
            out.push_back(*ia++);
        } else if (ia == a.end() || ib->first < ia->first) {
            out.emplace_back(ib->first, s * ib->second);
            ++ib;
        } else {
            Rational v = ia->second + s * ib->second;
            if (v != 0) out.emplace_back(ia->first, std::move(v));
            ++ia;
            ++ib;
        }
    }
    return out;
}

const Rational* find(const SparseRow& row, std::size_t col) {
    auto it = std::lower_bound(row.begin(), row.end(), col, [](const auto& e, std::size_t c) { return e.first < c; });
    return it != row.end() && it->first == col ? &it->second : nullptr;
}

}  // namespace

SparseRow ExactRowReducer::reduce(SparseRow row) const {
    // Pivot rows are zero in every other pivot column, so one pass over the
    // pivot columns present in the original row suffices.
    std::vector<std::pair<std::size_t, Rational>> hits;
    for (const auto& [c, v] : row)
        if (pivots_.count(c)) hits.emplace_back(c, v);
    for (const auto& [c, v] : hits) row = axpy(row, -v, pivots_.at(c));
    return row;
}

bool ExactRowReducer::add_row(const SparseRow& input) {
    for (const auto& [c, v] : input)
        if (c >= cols_) throw ContractError("row entry outside the column range");
    SparseRow row = reduce(input);
    if (row.empty()) return false;
    const std::size_t pivot = row.front().first;
    const Rational lead = row.front().second;
    for (auto& [c, v] : row) v /= lead;
    for (auto& [pc, prow] : pivots_) {
        if (const Rational* v = find(prow, pivot)) prow = axpy(prow, -Rational(*v), row);
    }
    pivots_.emplace(pivot, std::move(row));
    return true;
}

bool ExactRowReducer::contains(const SparseRow& row) const { return reduce(row).empty(); }

std::vector<std::vector<Rational>> ExactRowReducer::nullspace() const {
    std::vector<std::vector<Rational>> basis;
    for (std::size_t f = 0; f < cols_; ++f) {
        if (pivots_.count(f)) continue;
        std::vector<Rational> x(cols_);
        x[f] = 1;
        for (const auto& [pc, prow] : pivots_)
            if (const Rational* v = find(prow, f)) x[pc] = -*v;
        basis.push_back(std::move(x));
    }
    return basis;
}

}  // namespace ptensor
