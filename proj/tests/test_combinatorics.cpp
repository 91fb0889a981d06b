#include "doctest.h"

#include <set>

#include "ptensor/combinatorics.hpp"
#include "ptensor/error.hpp"

using namespace ptensor;

TEST_CASE("bell numbers") {
    CHECK(bell(0) == 1);
    CHECK(bell(4) == 15);
    CHECK(bell(6) == 203);
    CHECK(bell(12) == 4213597);
    CHECK(bell(30) == BigInt("846749014511809332450147"));
    CHECK_THROWS_AS(bell(31), SizeError);
    CHECK_THROWS_AS(bell(5, 4), SizeError);
}

TEST_CASE("bell recurrence and monotonicity") {
    for (int m = 0; m < 20; ++m) {
        BigInt sum = 0;
        for (int j = 0; j <= m; ++j) sum += binomial(m, j) * bell(j);
        CHECK(bell(m + 1) == sum);
        CHECK(bell(m + 1) >= bell(m));
    }
}

TEST_CASE("partition enumeration") {
    const auto two = enumerate_partitions(2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].to_string() == "{{1,2}}");
    CHECK(two[1].to_string() == "{{1},{2}}");

    CHECK(enumerate_partitions(5).size() == 52);

    const auto zero = enumerate_partitions(0);
    REQUIRE(zero.size() == 1);
    CHECK(zero[0].size() == 0);
    CHECK(zero[0].num_blocks() == 0);

    CHECK_THROWS_AS(enumerate_partitions(13), SizeError);
}

TEST_CASE("partition counts, lexicographic order and no duplicates") {
    for (int m = 0; m <= 10; ++m) {
        const auto all = enumerate_partitions(m);
        CHECK(all.size() == static_cast<std::size_t>(bell(m)));
        for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i - 1].rgs() < all[i].rgs());
        std::set<std::vector<int>> seen;
        for (const auto& p : all) seen.insert(p.rgs());
        CHECK(seen.size() == all.size());
    }
}

TEST_CASE("restricted-growth strings round-trip through blocks") {
    for (int m = 0; m <= 7; ++m)
        for (const auto& p : enumerate_partitions(m)) {
            const auto back = SetPartition::from_blocks(p.blocks(), m);
            CHECK(back == p);
        }
    CHECK(SetPartition::from_blocks({{3}, {1, 4, 5}, {0, 2}}, 6).rgs() == std::vector<int>{0, 1, 0, 2, 1, 1});
}

TEST_CASE("invalid partitions are rejected") {
    CHECK_THROWS_AS(SetPartition::from_rgs({1, 0}), ContractError);
    CHECK_THROWS_AS(SetPartition::from_rgs({0, 2}), ContractError);
    CHECK_THROWS_AS(SetPartition::from_blocks({{0}, {0, 1}}, 2), ContractError);
    CHECK_THROWS_AS(SetPartition::from_blocks({{0}}, 2), ContractError);
    CHECK_THROWS_AS(SetPartition::from_blocks({{0}, {}}, 1), ContractError);
}

TEST_CASE("classification of the worked partition") {
    const auto p = SetPartition::from_blocks({{0, 2}, {1, 4, 5}, {3}}, 6);
    CHECK(p.to_string() == "{{1,3},{2,5,6},{4}}");
    const auto c = classify_partition(p, 3, 3);
    CHECK(c.roles == std::vector<BlockRole>{BlockRole::PureOutput, BlockRole::Mixed, BlockRole::PureInput});
    CHECK(c.type == PartitionType{1, 1, 1});
}

TEST_CASE("classification extremes") {
    const int k_out = 2, k_in = 3;
    const auto singletons = SetPartition::from_rgs({0, 1, 2, 3, 4});
    CHECK(classify_partition(singletons, k_out, k_in).type == PartitionType{k_out, 0, k_in});
    const auto one = SetPartition::from_rgs({0, 0, 0, 0, 0});
    CHECK(classify_partition(one, k_out, k_in).type == PartitionType{0, 1, 0});
    CHECK_THROWS_AS(classify_partition(one, 2, 2), ContractError);
}

TEST_CASE("type invariants hold for every partition") {
    for (int k_out = 0; k_out <= 3; ++k_out)
        for (int k_in = 0; k_in <= 3; ++k_in)
            for (const auto& p : enumerate_partitions(k_out + k_in)) {
                const auto t = classify_partition(p, k_out, k_in).type;
                CHECK(t.p1 + t.p2 + t.p3 == p.num_blocks());
                CHECK(t.p1 <= k_out);
                CHECK(t.p3 <= k_in);
            }
}

TEST_CASE("same-domain counts") {
    CHECK(count_same_domain(0, 0) == 1);
    CHECK(count_same_domain(1, 1) == 2);
    CHECK(count_same_domain(1, 2) == 5);
    CHECK(count_same_domain(2, 2) == 15);
    CHECK(count_same_domain(2, 3) == 52);
    CHECK(count_same_domain(3, 3) == 203);
}

TEST_CASE("overlap counts") {
    CHECK(count_overlap(0, 0) == 1);
    CHECK(count_overlap(1, 1) == 5);
    CHECK(count_overlap(1, 2) == 17);
    CHECK(count_overlap(2, 2) == 63);
    CHECK(count_overlap(3, 3) == 1277);
    // Completes the sequence 5, 17, 63, 275, 1277 along k_in + k_out = 2..6.
    CHECK(count_overlap(2, 3) == 275);
}

TEST_CASE("closed form equals the variant sum") {
    for (int k = 0; k <= 5; ++k)
        for (int kp = 0; kp <= 5; ++kp) {
            CAPTURE(k);
            CAPTURE(kp);
            CHECK(count_overlap_closed_form(k, kp) == count_overlap_variant_sum(k, kp));
            CHECK(count_overlap_closed_form(k, kp) == count_overlap_closed_form(kp, k));
        }
}

TEST_CASE("count caps") {
    CHECK_THROWS_AS(count_same_domain(20, 20), SizeError);
    CHECK_THROWS_AS(count_overlap(3, 3, 5), SizeError);
    CHECK(count_overlap(16, 16, 40) > 0);
    CHECK_THROWS_AS(count_same_domain(-1, 0), ContractError);
}

TEST_CASE("average fixed-point powers") {
    CHECK(avg_fixed_power(3, 3) == Rational(5));
    CHECK(avg_fixed_power(1, 3) == Rational(1));
    CHECK(avg_fixed_power(1, 2) == Rational(1));
    CHECK(avg_fixed_power(1, 2) != Rational(bell(2)));
    CHECK_THROWS_AS(avg_fixed_power(11, 1), SizeError);
}

TEST_CASE("bell-trace lemma") {
    for (int z = 1; z <= 8; ++z)
        for (int k = 1; k <= 6; ++k) {
            CAPTURE(z);
            CAPTURE(k);
            if (z >= k)
                CHECK(avg_fixed_power(z, k) == Rational(bell(k)));
            else
                CHECK(avg_fixed_power(z, k) < Rational(bell(k)));
        }
}

TEST_CASE("fixed-point histogram") {
    CHECK(fixed_point_histogram(3) == std::vector<std::size_t>{2, 3, 0, 1});
    CHECK(fixed_point_histogram(0) == std::vector<std::size_t>{1});
}
