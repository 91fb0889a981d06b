#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "ptensor/domain.hpp"
#include "ptensor/error.hpp"
#include "ptensor/random.hpp"

namespace ptensor {

inline constexpr std::size_t kDefaultTensorCap = 100'000'000;

/// d^k, throwing SizeError once the product exceeds `cap`.
inline std::size_t checked_power(std::size_t d, int k, std::size_t cap) {
    std::size_t n = 1;
    for (int i = 0; i < k; ++i) {
        if (d != 0 && n > cap / d) throw SizeError("tensor size exceeds cap " + std::to_string(cap));
        n *= d;
    }
    return n;
}

/// A k-th order P-tensor with C channels over an ordered reference domain.
/// Values are dense row-major over the k domain modes, channel mode last.
template <class Scalar>
class BasicPTensor {
public:
    using value_type = Scalar;

    BasicPTensor() = default;

    BasicPTensor(RefDomain domain, int order, std::size_t channels)
        : domain_(std::move(domain)), order_(order), channels_(channels) {
        if (order < 0) throw ContractError("negative tensor order");
        if (channels == 0) throw ContractError("a P-tensor needs at least one channel");
        values_.assign(checked_power(domain_.size(), order_, kDefaultTensorCap) * channels_, Scalar{});
    }

    BasicPTensor(RefDomain domain, int order, std::size_t channels, std::vector<Scalar> values)
        : BasicPTensor(std::move(domain), order, channels) {
        if (values.size() != values_.size())
            throw ContractError("expected " + std::to_string(values_.size()) + " values, got " + std::to_string(values.size()));
        values_ = std::move(values);
    }

    const RefDomain& domain() const noexcept { return domain_; }
    int order() const noexcept { return order_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t d() const noexcept { return domain_.size(); }
    /// Number of domain-index tuples (d^k).
    std::size_t entries() const noexcept { return channels_ ? values_.size() / channels_ : 0; }

    std::span<const Scalar> values() const noexcept { return values_; }
    std::span<Scalar> values() noexcept { return values_; }

    /// Flat offset of (idx[0], ..., idx[k-1], c).
    std::size_t offset(std::span<const std::size_t> idx, std::size_t c = 0) const {
        if (static_cast<int>(idx.size()) != order_) throw ContractError("index arity does not match tensor order");
        std::size_t off = 0;
        for (auto i : idx) {
            if (i >= d()) throw ContractError("index out of range");
            off = off * d() + i;
        }
        return off * channels_ + c;
    }

    Scalar& at(std::span<const std::size_t> idx, std::size_t c = 0) { return values_[offset(idx, c)]; }
    const Scalar& at(std::span<const std::size_t> idx, std::size_t c = 0) const { return values_[offset(idx, c)]; }
    Scalar& at(std::initializer_list<std::size_t> idx, std::size_t c = 0) {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()), c);
    }
    const Scalar& at(std::initializer_list<std::size_t> idx, std::size_t c = 0) const {
        return at(std::span<const std::size_t>(idx.begin(), idx.size()), c);
    }

    /// Same values, different frame label. Used when only the anchor changes.
    BasicPTensor with_domain(RefDomain domain) const {
        if (domain.size() != d()) throw ContractError("with_domain: size mismatch");
        BasicPTensor t = *this;
        t.domain_ = std::move(domain);
        return t;
    }

    friend bool operator==(const BasicPTensor&, const BasicPTensor&) = default;

private:
    RefDomain domain_;
    int order_ = 0;
    std::size_t channels_ = 1;
    std::vector<Scalar> values_ = std::vector<Scalar>(1);
};

using PTensor = BasicPTensor<double>;
using IntPTensor = BasicPTensor<std::int64_t>;

namespace detail {

// out[tau(i1),...,tau(ik), c] = in[i1,...,ik, c]
template <class Scalar>
std::vector<Scalar> permuted_values(const BasicPTensor<Scalar>& t, const Permutation& tau) {
    if (tau.size() != t.d())
        throw ContractError("permutation of size " + std::to_string(tau.size()) + " applied to domain of size " +
                            std::to_string(t.d()));
    const std::size_t d = t.d(), C = t.channels(), k = static_cast<std::size_t>(t.order());
    std::vector<Scalar> out(t.values().size());
    std::vector<std::size_t> idx(k, 0);
    const auto in = t.values();
    for (std::size_t e = 0; e < t.entries(); ++e) {
        std::size_t dst = 0;
        for (std::size_t m = 0; m < k; ++m) dst = dst * d + tau[idx[m]];
        for (std::size_t c = 0; c < C; ++c) out[dst * C + c] = in[e * C + c];
        for (std::size_t m = k; m-- > 0;) {
            if (++idx[m] < d) break;
            idx[m] = 0;
        }
    }
    return out;
}

}  // namespace detail

/// Group action in a fixed frame: values become tau(T) with
/// tau(T)[i1..ik] = T[tau^-1(i1)..tau^-1(ik)]; the domain list is unchanged.
template <class Scalar>
BasicPTensor<Scalar> act(const BasicPTensor<Scalar>& t, const Permutation& tau) {
    return BasicPTensor<Scalar>(t.domain(), t.order(), t.channels(), detail::permuted_values(t, tau));
}

/// Applies tau to the values as in act() and reorders the domain the same way,
/// so every atom keeps its entries (the atom at position j moves to tau(j)).
template <class Scalar>
BasicPTensor<Scalar> permute_ptensor(const BasicPTensor<Scalar>& t, const Permutation& tau) {
    return BasicPTensor<Scalar>(t.domain().reordered(tau), t.order(), t.channels(), detail::permuted_values(t, tau));
}

/// Re-expresses `t` over `target`, a reordering of its domain, keeping atom/value binding.
template <class Scalar>
BasicPTensor<Scalar> reexpress(const BasicPTensor<Scalar>& t, const RefDomain& target) {
    if (!t.domain().same_set(target)) throw ContractError("reexpress: target is not a reordering of the domain");
    std::vector<std::size_t> m(t.d());
    for (std::size_t j = 0; j < t.d(); ++j) m[j] = *target.position_of(t.domain()[j]);
    return permute_ptensor(t, Permutation(std::move(m)));
}

/// Deterministic random tensor. Integer scalars are uniform in [-8, 8];
/// floating scalars uniform in [-1, 1). See Rng for the generator.
template <class Scalar>
BasicPTensor<Scalar> random_ptensor(const RefDomain& domain, int order, std::size_t channels, std::uint64_t seed,
                                    std::size_t cap = kDefaultTensorCap) {
    const std::size_t n = checked_power(domain.size(), order, cap);
    if (channels != 0 && n > cap / channels) throw SizeError("random_ptensor: size exceeds cap " + std::to_string(cap));
    BasicPTensor<Scalar> t(domain, order, channels);
    Rng rng(seed);
    for (auto& v : t.values()) {
        if constexpr (std::is_integral_v<Scalar>)
            v = static_cast<Scalar>(rng.uniform_int(-8, 8));
        else
            v = static_cast<Scalar>(rng.uniform_real(-1.0, 1.0));
    }
    return t;
}

}  // namespace ptensor
