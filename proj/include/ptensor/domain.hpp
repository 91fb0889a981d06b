#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

#include "ptensor/permutation.hpp"

namespace ptensor {

/// An element of the universe that permutations act on (a graph vertex here).
struct Atom {
    std::uint64_t id = 0;
    friend auto operator<=>(const Atom&, const Atom&) = default;
};

/// Ordered list of distinct atoms a P-tensor's modes are indexed by.
class RefDomain {
public:
    RefDomain() = default;
    /// Throws ContractError on duplicate atoms.
    explicit RefDomain(std::vector<Atom> atoms);
    RefDomain(std::initializer_list<std::uint64_t> ids);
    static RefDomain from_ids(const std::vector<std::uint64_t>& ids);

    std::size_t size() const noexcept { return atoms_.size(); }
    bool empty() const noexcept { return atoms_.empty(); }
    const Atom& operator[](std::size_t i) const { return atoms_[i]; }
    const std::vector<Atom>& atoms() const noexcept { return atoms_; }
    std::vector<std::uint64_t> ids() const;

    bool contains(Atom a) const;
    std::optional<std::size_t> position_of(Atom a) const;
    bool same_set(const RefDomain& other) const;

    /// Reorders so that the atom at position j moves to position perm(j).
    RefDomain reordered(const Permutation& perm) const;

    std::string to_string() const;

    friend bool operator==(const RefDomain&, const RefDomain&) = default;

private:
    std::vector<Atom> atoms_;
};

/// Restriction of a permutation of the universe {0..n-1} (atoms are indexed
/// by id) to a domain D = (x_1..x_d): returns tau with sigma(x_j) = x_tau(j),
/// or nullopt when sigma does not map D onto itself as a set.
/// Throws ContractError if an atom id lies outside sigma.
std::optional<Permutation> restrict_permutation(const Permutation& sigma, const RefDomain& domain);

/// Common-atoms-first realignment of an input domain (D1) and output domain (D2).
/// Both realigned domains start with the common atoms in ascending id order,
/// followed by the remaining atoms in ascending id order.
struct DomainAlignment {
    std::size_t d_cap = 0;
    std::size_t d1 = 0;
    std::size_t d2 = 0;
    Permutation perm_in;   // D1.reordered(perm_in) == in_aligned
    Permutation perm_out;  // D2.reordered(perm_out) == out_aligned
    RefDomain in_aligned;
    RefDomain out_aligned;
};

/// Throws DisjointDomainsError when the domains share no atom and
/// `require_overlap` is set.
DomainAlignment align_domains(const RefDomain& in, const RefDomain& out, bool require_overlap = true);

}  // namespace ptensor
