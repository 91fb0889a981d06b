#include "ptensor/oracle.hpp"

#include "ptensor/error.hpp"
#include "ptensor/linalg.hpp"

namespace ptensor {

BigInt burnside_dimension(int k_in, int k_out, const BlockGeometry& g, std::size_t cap) {
    if (k_in < 0 || k_out < 0) throw ContractError("negative tensor order");
    // Group order a! b! c!, checked against the cap before enumerating.
    std::size_t order = 1;
    for (std::size_t n : {g.a, g.b, g.c})
        for (std::size_t i = 2; i <= n; ++i) {
            order *= i;
            if (order > cap) throw SizeError("group order exceeds cap " + std::to_string(cap));
        }
    // The sum over S_A x S_B x S_C only depends on each factor's fixed-point
    // count, so enumerate each factor once and weight by multiplicity.
    const auto ha = fixed_point_histogram(static_cast<int>(g.a), cap);
    const auto hb = fixed_point_histogram(static_cast<int>(g.b), cap);
    const auto hc = fixed_point_histogram(static_cast<int>(g.c), cap);
    BigInt total = 0;
    for (std::size_t f1 = 0; f1 < ha.size(); ++f1) {
        if (!ha[f1]) continue;
        for (std::size_t f2 = 0; f2 < hb.size(); ++f2) {
            if (!hb[f2]) continue;
            const BigInt left = boost::multiprecision::pow(BigInt(f1 + f2), static_cast<unsigned>(k_in));
            for (std::size_t f3 = 0; f3 < hc.size(); ++f3) {
                if (!hc[f3]) continue;
                const BigInt right = boost::multiprecision::pow(BigInt(f2 + f3), static_cast<unsigned>(k_out));
                total += BigInt(ha[f1]) * BigInt(hb[f2]) * BigInt(hc[f3]) * left * right;
            }
        }
    }
    if (total % order != 0) throw ConsistencyError("Burnside average is not an integer");
    return total / order;
}

namespace {

// Image of a row-major offset under a position permutation applied to every mode.
std::size_t permute_offset(std::size_t off, const std::vector<std::size_t>& pos_map, std::size_t d, int order) {
    std::size_t result = 0, scale = 1;
    for (int m = 0; m < order; ++m) {
        const std::size_t digit = off % d;
        off /= d;
        result += pos_map[digit] * scale;
        scale *= d;
    }
    return result;
}

}  // namespace

std::vector<Matrix<Rational>> nullspace_basis(int k_in, int k_out, const BlockGeometry& g, std::size_t cap) {
    if (k_in < 0 || k_out < 0) throw ContractError("negative tensor order");
    const std::size_t d1 = g.d1(), d2 = g.d2();
    const std::size_t rows = checked_power(d2, k_out, cap);
    const std::size_t cols = checked_power(d1, k_in, cap);
    if (cols != 0 && rows > cap / cols) throw SizeError("null-space unknowns exceed cap " + std::to_string(cap));
    const std::size_t unknowns = rows * cols;

    // Generators as position maps on D1 and D2 (realigned layout).
    std::vector<std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> gens;
    auto ident = [](std::size_t n) {
        std::vector<std::size_t> v(n);
        for (std::size_t i = 0; i < n; ++i) v[i] = i;
        return v;
    };
    for (std::size_t i = 0; i + 1 < g.b; ++i) {
        auto p1 = ident(d1), p2 = ident(d2);
        std::swap(p1[i], p1[i + 1]);
        std::swap(p2[i], p2[i + 1]);
        gens.emplace_back(std::move(p1), std::move(p2));
    }
    for (std::size_t i = 0; i + 1 < g.a; ++i) {
        auto p1 = ident(d1);
        std::swap(p1[g.b + i], p1[g.b + i + 1]);
        gens.emplace_back(std::move(p1), ident(d2));
    }
    for (std::size_t i = 0; i + 1 < g.c; ++i) {
        auto p2 = ident(d2);
        std::swap(p2[g.b + i], p2[g.b + i + 1]);
        gens.emplace_back(ident(d1), std::move(p2));
    }

    // rho_out(s) M rho_in(s)^-1 = M, entrywise: M[s.o, s.i] = M[o, i].
    ExactRowReducer reducer(unknowns);
    for (const auto& [p_in, p_out] : gens) {
        for (std::size_t o = 0; o < rows; ++o) {
            const std::size_t so = permute_offset(o, p_out, d2, k_out);
            for (std::size_t i = 0; i < cols; ++i) {
                const std::size_t si = permute_offset(i, p_in, d1, k_in);
                const std::size_t x = o * cols + i, y = so * cols + si;
                if (x == y) continue;
                SparseRow row{{std::min(x, y), Rational(1)}, {std::max(x, y), Rational(-1)}};
                reducer.add_row(row);
            }
        }
    }

    std::vector<Matrix<Rational>> basis;
    for (auto& vec : reducer.nullspace()) basis.emplace_back(rows, cols, std::move(vec));
    return basis;
}

bool reference_entry(const BasisMapSpec& spec, const Geometry& g, std::span<const std::size_t> out_idx,
                     std::span<const std::size_t> in_idx) {
    const auto& part = spec.partition();
    const int k_out = spec.k_out();
    if (static_cast<int>(out_idx.size()) != k_out || static_cast<int>(in_idx.size()) != spec.k_in())
        throw ContractError("reference_entry: index arity mismatch");
    for (const auto& block : part.blocks()) {
        const auto b = static_cast<std::size_t>(part.block_of(block.front()));
        auto value_of = [&](int e) { return e < k_out ? out_idx[static_cast<std::size_t>(e)] : in_idx[static_cast<std::size_t>(e - k_out)]; };
        const std::size_t v = value_of(block.front());
        for (int e : block)
            if (value_of(e) != v) return false;
        std::size_t bound = 0;
        switch (spec.roles()[b]) {
        case BlockRole::Mixed: bound = g.d_cap; break;
        case BlockRole::PureInput: bound = *spec.flags()[b] == Variant::All ? g.d1 : g.d_cap; break;
        case BlockRole::PureOutput: bound = *spec.flags()[b] == Variant::All ? g.d2 : g.d_cap; break;
        }
        if (v >= bound) return false;
    }
    return true;
}

Matrix<std::uint8_t> reference_matrix(const BasisMapSpec& spec, const Geometry& g) {
    const std::size_t rows = checked_power(g.d2, spec.k_out(), kDefaultNullspaceCap * kDefaultNullspaceCap);
    const std::size_t cols = checked_power(g.d1, spec.k_in(), kDefaultNullspaceCap * kDefaultNullspaceCap);
    Matrix<std::uint8_t> m(rows, cols);
    auto decode = [](std::size_t off, std::size_t d, int order) {
        std::vector<std::size_t> idx(static_cast<std::size_t>(order));
        for (int k = order - 1; k >= 0; --k) {
            idx[static_cast<std::size_t>(k)] = off % d;
            off /= d;
        }
        return idx;
    };
    for (std::size_t o = 0; o < rows; ++o) {
        const auto oi = decode(o, g.d2, spec.k_out());
        for (std::size_t i = 0; i < cols; ++i) m(o, i) = reference_entry(spec, g, oi, decode(i, g.d1, spec.k_in()));
    }
    return m;
}

}  // namespace ptensor
