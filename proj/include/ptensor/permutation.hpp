#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace ptensor {

/// Bijection on {0..n-1}; maps i to (*this)[i].
class Permutation {
public:
    Permutation() = default;
    /// Throws ContractError unless `mapping` is a bijection.
    explicit Permutation(std::vector<std::size_t> mapping);

    static Permutation identity(std::size_t n);
    /// Swaps positions i and j.
    static Permutation transposition(std::size_t n, std::size_t i, std::size_t j);

    std::size_t size() const noexcept { return map_.size(); }
    std::size_t operator[](std::size_t i) const { return map_[i]; }
    std::size_t operator()(std::size_t i) const { return map_.at(i); }
    std::span<const std::size_t> mapping() const noexcept { return map_; }

    Permutation inverse() const;
    bool is_identity() const noexcept;

    /// (a * b)(i) = a(b(i)): b is applied first.
    friend Permutation operator*(const Permutation& a, const Permutation& b);
    friend bool operator==(const Permutation&, const Permutation&) = default;

    std::string to_string() const;

private:
    std::vector<std::size_t> map_;
};

}  // namespace ptensor
