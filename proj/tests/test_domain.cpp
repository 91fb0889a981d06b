#include "doctest.h"

#include <numeric>

#include "ptensor/domain.hpp"
#include "ptensor/error.hpp"
#include "ptensor/ptensor.hpp"
#include "ptensor/random.hpp"

using namespace ptensor;

TEST_CASE("permutations") {
    CHECK_THROWS_AS(Permutation({0, 0}), ContractError);
    CHECK_THROWS_AS(Permutation({0, 2}), ContractError);
    const Permutation p({2, 0, 1});
    CHECK((p * p.inverse()).is_identity());
    CHECK((p.inverse() * p).is_identity());
    const Permutation q({1, 0, 2});
    // (p * q)(i) = p(q(i))
    CHECK((p * q)[0] == p[q[0]]);
    CHECK((p * q) == Permutation({0, 2, 1}));
    CHECK(Permutation::transposition(3, 0, 2) == Permutation({2, 1, 0}));
}

TEST_CASE("domains reject duplicates") {
    CHECK_THROWS_AS(RefDomain({1, 2, 1}), ContractError);
    const RefDomain d{5, 3, 9};
    CHECK(d.size() == 3);
    CHECK(d.position_of(Atom{9}) == 2u);
    CHECK_FALSE(d.position_of(Atom{4}).has_value());
    CHECK(d.same_set(RefDomain{9, 5, 3}));
    CHECK_FALSE(d.same_set(RefDomain{9, 5}));
    CHECK(d.reordered(Permutation({1, 2, 0})) == RefDomain{9, 5, 3});
}

TEST_CASE("restriction of global permutations") {
    // Universe {0,1,2}; atoms 0 and 2 stand for 1 and 3.
    const RefDomain d{0, 2};
    auto id = restrict_permutation(Permutation::identity(3), d);
    REQUIRE(id.has_value());
    CHECK(id->is_identity());

    auto swap13 = restrict_permutation(Permutation::transposition(3, 0, 2), d);
    REQUIRE(swap13.has_value());
    CHECK(*swap13 == Permutation({1, 0}));

    CHECK_FALSE(restrict_permutation(Permutation::transposition(3, 0, 1), d).has_value());
    CHECK_THROWS_AS(restrict_permutation(Permutation::identity(2), d), ContractError);
}

TEST_CASE("restriction satisfies sigma(x_j) = x_tau(j)") {
    Rng rng(11);
    const RefDomain d{4, 1, 3};
    int fixed = 0;
    for (int t = 0; t < 500; ++t) {
        std::vector<std::size_t> m(6);
        std::iota(m.begin(), m.end(), 0);
        rng.shuffle(m);
        const Permutation sigma(m);
        auto tau = restrict_permutation(sigma, d);
        if (!tau) continue;
        ++fixed;
        for (std::size_t j = 0; j < d.size(); ++j) CHECK(sigma[d[j].id] == d[(*tau)[j]].id);
    }
    CHECK(fixed > 0);
}

TEST_CASE("alignment: edge to edge") {
    const auto al = align_domains(RefDomain{1, 2}, RefDomain{2, 3});
    CHECK(al.d_cap == 1);
    CHECK(al.d1 == 2);
    CHECK(al.d2 == 2);
    CHECK(al.in_aligned == RefDomain{2, 1});
    CHECK(al.out_aligned == RefDomain{2, 3});
    CHECK(RefDomain({1, 2}).reordered(al.perm_in) == al.in_aligned);
    CHECK(RefDomain({2, 3}).reordered(al.perm_out) == al.out_aligned);
}

TEST_CASE("alignment: equal domains and disjoint domains") {
    const RefDomain d{0, 4, 7};
    const auto al = align_domains(d, d);
    CHECK(al.d_cap == 3);
    CHECK(al.perm_in.is_identity());
    CHECK(al.perm_out.is_identity());
    CHECK_THROWS_AS(align_domains(RefDomain{0, 1}, RefDomain{2, 3}), DisjointDomainsError);
    CHECK(align_domains(RefDomain{0, 1}, RefDomain{2, 3}, false).d_cap == 0);
}

TEST_CASE("alignment is canonical and idempotent") {
    const auto al = align_domains(RefDomain{9, 3, 5, 1}, RefDomain{7, 5, 2, 9});
    CHECK(al.in_aligned == RefDomain{5, 9, 1, 3});
    CHECK(al.out_aligned == RefDomain{5, 9, 2, 7});
    const auto again = align_domains(al.in_aligned, al.out_aligned);
    CHECK(again.perm_in.is_identity());
    CHECK(again.perm_out.is_identity());
}

TEST_CASE("fixing both domains is fixing A, B and C") {
    // Exhaustive over a 6-atom universe for several splits.
    const std::vector<std::pair<RefDomain, RefDomain>> cases{
        {RefDomain{0, 1, 2}, RefDomain{2, 3, 4, 5}},
        {RefDomain{5, 0, 3}, RefDomain{3, 1, 5}},
        {RefDomain{0, 1, 2, 3, 4}, RefDomain{4, 5}},
    };
    for (const auto& [d1, d2] : cases) {
        std::vector<std::size_t> m(6);
        std::iota(m.begin(), m.end(), 0);
        do {
            const Permutation sigma(m);
            const bool both = restrict_permutation(sigma, d1) && restrict_permutation(sigma, d2);
            bool parts = true;
            for (std::uint64_t x = 0; x < 6; ++x) {
                const Atom ax{x}, ay{sigma[x]};
                if (d1.contains(ax) != d1.contains(ay) || d2.contains(ax) != d2.contains(ay)) parts = false;
            }
            CHECK(both == parts);
        } while (std::next_permutation(m.begin(), m.end()));
    }
}

TEST_CASE("fixing both domains is fixing A, B and C, sampled on larger universes") {
    Rng rng(3);
    const RefDomain d1{0, 1, 2, 3, 4, 5}, d2{4, 5, 6, 7, 8, 9};
    for (int t = 0; t < 2000; ++t) {
        // Half of the samples are drawn from the stabilizer so both outcomes occur.
        std::vector<std::size_t> m(10);
        std::iota(m.begin(), m.end(), 0);
        if (t % 2) {
            std::vector<std::size_t> a{0, 1, 2, 3}, b{4, 5}, c{6, 7, 8, 9};
            for (auto* part : {&a, &b, &c}) {
                auto img = *part;
                rng.shuffle(img);
                for (std::size_t i = 0; i < part->size(); ++i) m[(*part)[i]] = img[i];
            }
        } else {
            rng.shuffle(m);
        }
        const Permutation sigma(m);
        const bool both = restrict_permutation(sigma, d1) && restrict_permutation(sigma, d2);
        bool parts = true;
        for (std::uint64_t x = 0; x < 10; ++x) {
            const Atom ax{x}, ay{sigma[x]};
            if (d1.contains(ax) != d1.contains(ay) || d2.contains(ax) != d2.contains(ay)) parts = false;
        }
        CHECK(both == parts);
        if (t % 2) CHECK(both);
    }
}
