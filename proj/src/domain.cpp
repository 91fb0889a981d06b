#include "ptensor/domain.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "ptensor/error.hpp"

namespace ptensor {

Permutation::Permutation(std::vector<std::size_t> mapping) : map_(std::move(mapping)) {
    std::vector<bool> seen(map_.size(), false);
    for (std::size_t v : map_) {
        if (v >= map_.size() || seen[v]) throw ContractError("not a permutation: " + to_string());
        seen[v] = true;
    }
}

Permutation Permutation::identity(std::size_t n) {
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    return Permutation(std::move(m));
}

Permutation Permutation::transposition(std::size_t n, std::size_t i, std::size_t j) {
    if (i >= n || j >= n) throw ContractError("transposition index out of range");
    std::vector<std::size_t> m(n);
    std::iota(m.begin(), m.end(), std::size_t{0});
    std::swap(m[i], m[j]);
    return Permutation(std::move(m));
}

Permutation Permutation::inverse() const {
    std::vector<std::size_t> inv(map_.size());
    for (std::size_t i = 0; i < map_.size(); ++i) inv[map_[i]] = i;
    return Permutation(std::move(inv));
}

bool Permutation::is_identity() const noexcept {
    for (std::size_t i = 0; i < map_.size(); ++i)
        if (map_[i] != i) return false;
    return true;
}

Permutation operator*(const Permutation& a, const Permutation& b) {
    if (a.size() != b.size()) throw ContractError("composing permutations of different sizes");
    std::vector<std::size_t> m(a.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = a.map_[b.map_[i]];
    return Permutation(std::move(m));
}

std::string Permutation::to_string() const {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < map_.size(); ++i) os << (i ? " " : "") << map_[i];
    os << ']';
    return os.str();
}

RefDomain::RefDomain(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    std::set<Atom> seen(atoms_.begin(), atoms_.end());
    if (seen.size() != atoms_.size()) throw ContractError("duplicate atom in reference domain " + to_string());
}

RefDomain::RefDomain(std::initializer_list<std::uint64_t> ids) : RefDomain(from_ids(std::vector<std::uint64_t>(ids))) {}

RefDomain RefDomain::from_ids(const std::vector<std::uint64_t>& ids) {
    std::vector<Atom> atoms;
    atoms.reserve(ids.size());
    for (auto id : ids) atoms.push_back(Atom{id});
    return RefDomain(std::move(atoms));
}

std::vector<std::uint64_t> RefDomain::ids() const {
    std::vector<std::uint64_t> out;
    out.reserve(atoms_.size());
    for (const auto& a : atoms_) out.push_back(a.id);
    return out;
}

bool RefDomain::contains(Atom a) const { return position_of(a).has_value(); }

std::optional<std::size_t> RefDomain::position_of(Atom a) const {
    auto it = std::find(atoms_.begin(), atoms_.end(), a);
    if (it == atoms_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - atoms_.begin());
}

bool RefDomain::same_set(const RefDomain& other) const {
    if (size() != other.size()) return false;
    auto a = atoms_, b = other.atoms_;
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    return a == b;
}

RefDomain RefDomain::reordered(const Permutation& perm) const {
    if (perm.size() != size()) throw ContractError("permutation size does not match domain size");
    std::vector<Atom> out(size());
    for (std::size_t j = 0; j < size(); ++j) out[perm[j]] = atoms_[j];
    RefDomain d;
    d.atoms_ = std::move(out);
    return d;
}

std::string RefDomain::to_string() const {
    std::ostringstream os;
    os << '(';
    for (std::size_t i = 0; i < atoms_.size(); ++i) os << (i ? "," : "") << atoms_[i].id;
    os << ')';
    return os.str();
}

std::optional<Permutation> restrict_permutation(const Permutation& sigma, const RefDomain& domain) {
    std::vector<std::size_t> tau(domain.size());
    for (std::size_t j = 0; j < domain.size(); ++j) {
        const auto id = domain[j].id;
        if (id >= sigma.size())
            throw ContractError("atom " + std::to_string(id) + " lies outside the permutation's universe");
        auto image = domain.position_of(Atom{sigma[static_cast<std::size_t>(id)]});
        if (!image) return std::nullopt;
        tau[j] = *image;
    }
    return Permutation(std::move(tau));
}

namespace {

// Permutation sending each position of `from` to the position of the same atom in `to`.
Permutation reorder_to(const RefDomain& from, const RefDomain& to) {
    std::vector<std::size_t> m(from.size());
    for (std::size_t j = 0; j < from.size(); ++j) m[j] = *to.position_of(from[j]);
    return Permutation(std::move(m));
}

}  // namespace

DomainAlignment align_domains(const RefDomain& in, const RefDomain& out, bool require_overlap) {
    std::vector<Atom> a_in = in.atoms(), a_out = out.atoms();
    std::sort(a_in.begin(), a_in.end());
    std::sort(a_out.begin(), a_out.end());
    std::vector<Atom> common;
    std::set_intersection(a_in.begin(), a_in.end(), a_out.begin(), a_out.end(), std::back_inserter(common));
    if (common.empty() && require_overlap)
        throw DisjointDomainsError("domains " + in.to_string() + " and " + out.to_string() + " share no atom");

    auto canonical = [&](const std::vector<Atom>& sorted) {
        std::vector<Atom> order = common;
        std::set_difference(sorted.begin(), sorted.end(), common.begin(), common.end(), std::back_inserter(order));
        return RefDomain(std::move(order));
    };

    DomainAlignment al;
    al.d_cap = common.size();
    al.d1 = in.size();
    al.d2 = out.size();
    al.in_aligned = canonical(a_in);
    al.out_aligned = canonical(a_out);
    al.perm_in = reorder_to(in, al.in_aligned);
    al.perm_out = reorder_to(out, al.out_aligned);
    return al;
}

}  // namespace ptensor
