#pragma once

// Ground-truth computations that share no code path with the map kernels:
// group averaging over S_A x S_B x S_C, the exact solution space of the
// equivariance constraints, and a brute-force evaluation of spec semantics.

#include <cstddef>
#include <vector>

#include "ptensor/combinatorics.hpp"
#include "ptensor/maps.hpp"
#include "ptensor/matrix.hpp"

namespace ptensor {

inline constexpr std::size_t kDefaultGroupCap = 10'000'000;
inline constexpr std::size_t kDefaultNullspaceCap = 4096;

/// Sizes of A = D1 \ D2, B = D1 n D2 and C = D2 \ D1. In the realigned frame
/// B occupies positions [0, b) of both domains, A positions [b, b+a) of D1 and
/// C positions [b, b+c) of D2.
struct BlockGeometry {
    std::size_t a = 0;
    std::size_t b = 0;
    std::size_t c = 0;

    std::size_t d1() const noexcept { return a + b; }
    std::size_t d2() const noexcept { return b + c; }
    Geometry geometry() const noexcept { return Geometry{b, a + b, b + c}; }
    friend bool operator==(const BlockGeometry&, const BlockGeometry&) = default;
};

/// (1/(a! b! c!)) * sum over (s1, s2, s3) in S_A x S_B x S_C of
/// (fix s1 + fix s2)^k_in * (fix s2 + fix s3)^k_out. Throws SizeError when the
/// group order exceeds `cap`, ConsistencyError if the average is not integral.
BigInt burnside_dimension(int k_in, int k_out, const BlockGeometry& g, std::size_t cap = kDefaultGroupCap);

/// Exact basis of {M : rho_out(s) M = M rho_in(s)} for the adjacent
/// transpositions s inside A, B and C. Each matrix is (d2^k_out) x (d1^k_in).
std::vector<Matrix<Rational>> nullspace_basis(int k_in, int k_out, const BlockGeometry& g,
                                              std::size_t cap = kDefaultNullspaceCap);

/// True iff the vectorized row spaces of the two lists coincide.
/// Throws ContractError when any shapes differ.
template <class T, class U>
bool compare_span(const std::vector<Matrix<T>>& lhs, const std::vector<Matrix<U>>& rhs);

/// Brute-force entry of a spec's matrix: checks every block tie and range
/// bound for the output tuple `out_idx` and input tuple `in_idx`.
bool reference_entry(const BasisMapSpec& spec, const Geometry& g, std::span<const std::size_t> out_idx,
                     std::span<const std::size_t> in_idx);

/// Brute-force realization via reference_entry over all (output, input) tuples.
Matrix<std::uint8_t> reference_matrix(const BasisMapSpec& spec, const Geometry& g);

}  // namespace ptensor

#include "ptensor/linalg.hpp"

namespace ptensor {

template <class T, class U>
bool compare_span(const std::vector<Matrix<T>>& lhs, const std::vector<Matrix<U>>& rhs) {
    std::size_t rows = 0, cols = 0;
    bool shaped = false;
    auto check = [&](std::size_t r, std::size_t c) {
        if (!shaped) {
            rows = r;
            cols = c;
            shaped = true;
        } else if (r != rows || c != cols) {
            throw ContractError("compare_span: matrix shapes differ");
        }
    };
    for (const auto& m : lhs) check(m.rows(), m.cols());
    for (const auto& m : rhs) check(m.rows(), m.cols());
    if (!shaped) return true;

    auto vectorize = [](const auto& m) {
        SparseRow row;
        for (std::size_t i = 0; i < m.data().size(); ++i)
            if (m.data()[i] != 0) row.emplace_back(i, Rational(m.data()[i]));
        return row;
    };
    ExactRowReducer left(rows * cols), right(rows * cols);
    for (const auto& m : lhs) left.add_row(vectorize(m));
    for (const auto& m : rhs) right.add_row(vectorize(m));
    if (left.rank() != right.rank()) return false;
    for (const auto& m : rhs)
        if (!left.contains(vectorize(m))) return false;
    return true;
}

}  // namespace ptensor
