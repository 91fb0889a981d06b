#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

namespace ptensor {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline constexpr int kDefaultBellCap = 30;
inline constexpr int kDefaultPartitionCap = 12;
inline constexpr std::size_t kDefaultFactorialCap = 10'000'000;

/// Exact Bell number B(m). Throws SizeError when m exceeds `cap`
/// (values are memoized once, up to the largest cap ever requested).
BigInt bell(int m, int cap = kDefaultBellCap);

BigInt binomial(int n, int k);

/// A set partition of {0, ..., m-1} stored as a restricted-growth string:
/// label[0] == 0 and label[i] <= 1 + max(label[0..i-1]). Blocks are numbered
/// by first appearance, so block b's minimum element precedes block b+1's.
class SetPartition {
public:
    SetPartition() = default;

    /// Validates the restricted-growth property; throws ContractError.
    static SetPartition from_rgs(std::vector<int> labels);
    /// Accepts any list of disjoint nonempty blocks covering {0..m-1}.
    static SetPartition from_blocks(const std::vector<std::vector<int>>& blocks, int m);

    int size() const noexcept { return static_cast<int>(labels_.size()); }
    int num_blocks() const noexcept { return num_blocks_; }
    int block_of(int element) const { return labels_.at(static_cast<std::size_t>(element)); }
    const std::vector<int>& rgs() const noexcept { return labels_; }

    /// Blocks in label order, each sorted ascending.
    std::vector<std::vector<int>> blocks() const;

    /// "{{1,3},{2,5,6},{4}}" with 1-based elements.
    std::string to_string() const;

    friend bool operator==(const SetPartition&, const SetPartition&) = default;
    friend auto operator<=>(const SetPartition& a, const SetPartition& b) { return a.labels_ <=> b.labels_; }

private:
    explicit SetPartition(std::vector<int> labels, int num_blocks)
        : labels_(std::move(labels)), num_blocks_(num_blocks) {}

    std::vector<int> labels_;
    int num_blocks_ = 0;
};

/// Visits every partition of an m-set in lexicographic restricted-growth order.
/// The callback returns false to stop early.
void for_each_partition(int m, const std::function<bool(const SetPartition&)>& visit);

std::vector<SetPartition> enumerate_partitions(int m, int cap = kDefaultPartitionCap);

// Elements 0..k_out-1 are output modes, k_out..k_out+k_in-1 input modes.
enum class BlockRole { PureOutput, Mixed, PureInput };

struct PartitionType {
    int p1 = 0;  // pure-output (broadcast)
    int p2 = 0;  // mixed (transfer)
    int p3 = 0;  // pure-input (sum)
    friend bool operator==(const PartitionType&, const PartitionType&) = default;
};

struct Classification {
    std::vector<BlockRole> roles;  // one per block, in block order
    PartitionType type;
};

Classification classify_partition(const SetPartition& partition, int k_out, int k_in);

const char* to_string(BlockRole role);

/// Number of equivariant maps between P-tensors over the same domain: B(k_in + k_out).
BigInt count_same_domain(int k_in, int k_out, int cap = kDefaultBellCap);

/// Sum over p, q of C(k_in,p) C(k_out,q) B(p+q) B(k_in-p) B(k_out-q).
BigInt count_overlap_closed_form(int k_in, int k_out, int cap = kDefaultBellCap);

/// Sum over all partitions of the k_out + k_in modes of 2^(p1 + p3).
BigInt count_overlap_variant_sum(int k_in, int k_out);

/// Closed form, cross-checked against the variant sum. Throws
/// ConsistencyError if the two ever disagree. `cap` bounds k_in + k_out.
BigInt count_overlap(int k_in, int k_out, int cap = kDefaultBellCap);

/// (1/z!) * sum over sigma in S_z of fix(sigma)^k, by explicit enumeration of S_z.
Rational avg_fixed_power(int z, int k, std::size_t factorial_cap = kDefaultFactorialCap);

/// Number of fixed points of every permutation of S_n, histogrammed:
/// result[f] = #{sigma : fix(sigma) == f}. Enumerates all n! permutations.
std::vector<std::size_t> fixed_point_histogram(int n, std::size_t factorial_cap = kDefaultFactorialCap);

}  // namespace ptensor
