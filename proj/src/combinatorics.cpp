#include "ptensor/combinatorics.hpp"

#include <algorithm>
#include <mutex>
#include <numeric>
#include <sstream>

#include "ptensor/error.hpp"

namespace ptensor {

namespace {

// Bell numbers via the Bell triangle; grown on demand under a mutex, read
// through a snapshot afterwards.
class BellTable {
public:
    BigInt get(int m) {
        std::lock_guard lock(mutex_);
        while (static_cast<int>(values_.size()) <= m) extend();
        return values_[static_cast<std::size_t>(m)];
    }

private:
    void extend() {
        if (values_.empty()) {
            values_.emplace_back(1);
            row_ = {BigInt(1)};
            return;
        }
        std::vector<BigInt> next;
        next.reserve(row_.size() + 1);
        next.push_back(row_.back());
        for (const auto& v : row_) next.push_back(next.back() + v);
        row_ = std::move(next);
        values_.push_back(row_.front());
    }

    std::mutex mutex_;
    std::vector<BigInt> values_;
    std::vector<BigInt> row_;
};

BellTable& bell_table() {
    static BellTable table;
    return table;
}

std::size_t checked_factorial(int z, std::size_t cap) {
    std::size_t f = 1;
    for (int i = 2; i <= z; ++i) {
        f *= static_cast<std::size_t>(i);
        if (f > cap) throw SizeError(std::to_string(z) + "! exceeds the iteration cap " + std::to_string(cap));
    }
    return f;
}

}  // namespace

BigInt bell(int m, int cap) {
    if (m < 0) throw ContractError("bell: negative argument");
    if (m > cap) throw SizeError("bell(" + std::to_string(m) + ") exceeds cap " + std::to_string(cap));
    return bell_table().get(m);
}

BigInt binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    BigInt r = 1;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

SetPartition SetPartition::from_rgs(std::vector<int> labels) {
    int next = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || labels[i] > next)
            throw ContractError("not a restricted-growth string at position " + std::to_string(i));
        if (labels[i] == next) ++next;
    }
    return SetPartition(std::move(labels), next);
}

SetPartition SetPartition::from_blocks(const std::vector<std::vector<int>>& blocks, int m) {
    if (m < 0) throw ContractError("negative partition size");
    std::vector<int> owner(static_cast<std::size_t>(m), -1);
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        if (blocks[b].empty()) throw ContractError("empty block");
        for (int e : blocks[b]) {
            if (e < 0 || e >= m) throw ContractError("block element out of range");
            if (owner[static_cast<std::size_t>(e)] != -1) throw ContractError("blocks overlap");
            owner[static_cast<std::size_t>(e)] = static_cast<int>(b);
        }
    }
    // relabel by first appearance
    std::vector<int> relabel(blocks.size(), -1);
    std::vector<int> labels(static_cast<std::size_t>(m));
    int next = 0;
    for (int i = 0; i < m; ++i) {
        int b = owner[static_cast<std::size_t>(i)];
        if (b < 0) throw ContractError("blocks do not cover element " + std::to_string(i + 1));
        if (relabel[static_cast<std::size_t>(b)] < 0) relabel[static_cast<std::size_t>(b)] = next++;
        labels[static_cast<std::size_t>(i)] = relabel[static_cast<std::size_t>(b)];
    }
    return SetPartition(std::move(labels), next);
}

std::vector<std::vector<int>> SetPartition::blocks() const {
    std::vector<std::vector<int>> out(static_cast<std::size_t>(num_blocks_));
    for (int i = 0; i < size(); ++i) out[static_cast<std::size_t>(labels_[static_cast<std::size_t>(i)])].push_back(i);
    return out;
}

std::string SetPartition::to_string() const {
    std::ostringstream os;
    os << '{';
    bool first_block = true;
    for (const auto& block : blocks()) {
        if (!first_block) os << ',';
        first_block = false;
        os << '{';
        for (std::size_t i = 0; i < block.size(); ++i) os << (i ? "," : "") << block[i] + 1;
        os << '}';
    }
    os << '}';
    return os.str();
}

void for_each_partition(int m, const std::function<bool(const SetPartition&)>& visit) {
    if (m < 0) throw ContractError("negative partition size");
    std::vector<int> labels(static_cast<std::size_t>(m), 0);
    // prefix_max[i] = max(labels[0..i])
    std::vector<int> prefix_max(static_cast<std::size_t>(m), 0);
    while (true) {
        if (!visit(SetPartition::from_rgs(labels))) return;
        // Rightmost position that can still grow.
        int i = m - 1;
        while (i > 0 && labels[static_cast<std::size_t>(i)] > prefix_max[static_cast<std::size_t>(i - 1)]) --i;
        if (i <= 0) return;
        ++labels[static_cast<std::size_t>(i)];
        prefix_max[static_cast<std::size_t>(i)] =
            std::max(prefix_max[static_cast<std::size_t>(i - 1)], labels[static_cast<std::size_t>(i)]);
        for (int j = i + 1; j < m; ++j) {
            labels[static_cast<std::size_t>(j)] = 0;
            prefix_max[static_cast<std::size_t>(j)] = prefix_max[static_cast<std::size_t>(j - 1)];
        }
    }
}

std::vector<SetPartition> enumerate_partitions(int m, int cap) {
    if (m > cap) throw SizeError("partition enumeration of " + std::to_string(m) + " elements exceeds cap " + std::to_string(cap));
    std::vector<SetPartition> out;
    out.reserve(static_cast<std::size_t>(bell(m)));
    for_each_partition(m, [&](const SetPartition& p) {
        out.push_back(p);
        return true;
    });
    return out;
}

Classification classify_partition(const SetPartition& partition, int k_out, int k_in) {
    if (k_out < 0 || k_in < 0 || partition.size() != k_out + k_in)
        throw ContractError("partition of " + std::to_string(partition.size()) + " elements does not match k_out + k_in = " +
                            std::to_string(k_out + k_in));
    std::vector<bool> has_out(static_cast<std::size_t>(partition.num_blocks()), false);
    std::vector<bool> has_in(static_cast<std::size_t>(partition.num_blocks()), false);
    for (int i = 0; i < partition.size(); ++i) {
        auto b = static_cast<std::size_t>(partition.block_of(i));
        (i < k_out ? has_out : has_in)[b] = true;
    }
    Classification c;
    c.roles.reserve(has_out.size());
    for (std::size_t b = 0; b < has_out.size(); ++b) {
        if (has_out[b] && has_in[b]) {
            c.roles.push_back(BlockRole::Mixed);
            ++c.type.p2;
        } else if (has_out[b]) {
            c.roles.push_back(BlockRole::PureOutput);
            ++c.type.p1;
        } else {
            c.roles.push_back(BlockRole::PureInput);
            ++c.type.p3;
        }
    }
    return c;
}

const char* to_string(BlockRole role) {
    switch (role) {
    case BlockRole::PureOutput: return "pure-output";
    case BlockRole::Mixed: return "mixed";
    case BlockRole::PureInput: return "pure-input";
    }
    return "?";
}

BigInt count_same_domain(int k_in, int k_out, int cap) {
    if (k_in < 0 || k_out < 0) throw ContractError("negative tensor order");
    return bell(k_in + k_out, cap);
}

BigInt count_overlap_closed_form(int k_in, int k_out, int cap) {
    if (k_in < 0 || k_out < 0) throw ContractError("negative tensor order");
    if (k_in + k_out > cap)
        throw SizeError("order sum " + std::to_string(k_in + k_out) + " exceeds cap " + std::to_string(cap));
    BigInt total = 0;
    for (int p = 0; p <= k_in; ++p)
        for (int q = 0; q <= k_out; ++q)
            total += binomial(k_in, p) * binomial(k_out, q) * bell(p + q, cap) * bell(k_in - p, cap) * bell(k_out - q, cap);
    return total;
}

BigInt count_overlap_variant_sum(int k_in, int k_out) {
    if (k_in < 0 || k_out < 0) throw ContractError("negative tensor order");
    const int m = k_in + k_out;
    if (m > kDefaultPartitionCap) throw SizeError("variant sum over partitions of " + std::to_string(m) + " elements exceeds cap");
    BigInt total = 0;
    for_each_partition(m, [&](const SetPartition& p) {
        auto t = classify_partition(p, k_out, k_in).type;
        total += BigInt(1) << (t.p1 + t.p3);
        return true;
    });
    return total;
}

BigInt count_overlap(int k_in, int k_out, int cap) {
    BigInt closed = count_overlap_closed_form(k_in, k_out, cap);
    if (k_in + k_out <= kDefaultPartitionCap) {
        BigInt summed = count_overlap_variant_sum(k_in, k_out);
        if (closed != summed)
            throw ConsistencyError("overlap count mismatch for (" + std::to_string(k_in) + "," + std::to_string(k_out) +
                                   "): closed form " + closed.str() + " vs variant sum " + summed.str());
    }
    return closed;
}

std::vector<std::size_t> fixed_point_histogram(int n, std::size_t factorial_cap) {
    if (n < 0) throw ContractError("negative permutation size");
    checked_factorial(n, factorial_cap);
    std::vector<std::size_t> hist(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    do {
        std::size_t fixed = 0;
        for (int i = 0; i < n; ++i) fixed += perm[static_cast<std::size_t>(i)] == i;
        ++hist[fixed];
    } while (std::next_permutation(perm.begin(), perm.end()));
    return hist;
}

Rational avg_fixed_power(int z, int k, std::size_t factorial_cap) {
    if (z < 1) throw ContractError("avg_fixed_power: z must be >= 1");
    if (k < 0) throw ContractError("avg_fixed_power: negative power");
    const std::size_t order = checked_factorial(z, factorial_cap);
    const auto hist = fixed_point_histogram(z, factorial_cap);
    BigInt sum = 0;
    for (std::size_t f = 0; f < hist.size(); ++f) sum += BigInt(hist[f]) * boost::multiprecision::pow(BigInt(f), static_cast<unsigned>(k));
    return Rational(sum, BigInt(order));
}

}  // namespace ptensor
