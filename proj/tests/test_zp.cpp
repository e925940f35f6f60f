#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>

#include "fuglede/zp.hpp"
#include "oracles.hpp"

using namespace fuglede;

namespace {

const PrimeParams p3m2{3, 2};

ZVector shuffled_balanced(const PrimeParams & params, std::mt19937 & rng)
{
    auto v = canonical_b1(params);
    std::shuffle(v.begin(), v.end(), rng);
    return v;
}

}  // namespace

TEST_CASE("params reject non-primes and non-positive weights")
{
    CHECK(PrimeParams::make(5, 3).len() == 15);
    CHECK_THROWS_AS(PrimeParams::make(4, 2), InputError);
    CHECK_THROWS_AS(PrimeParams::make(5, 0), InputError);
    CHECK_THROWS_AS(PrimeParams::make(17, 2), InputError);
}

TEST_CASE("is_balanced")
{
    CHECK(is_balanced(ZVector{0, 1, 2, 0, 1, 2}, p3m2));
    CHECK_FALSE(is_balanced(ZVector{0, 0, 0, 0, 0, 0}, p3m2));
    CHECK(is_balanced(ZVector{0, 0, 2, 1, 2, 1}, p3m2));
    CHECK_THROWS_AS(is_balanced(ZVector{0, 1, 2}, p3m2), InputError);

    // the zero vector is never balanced, whatever the weight
    for (int m = 1; m < 5; ++m)
        CHECK_FALSE(is_balanced(ZVector(static_cast<std::size_t>(5 * m), 0), PrimeParams{5, m}));
}

TEST_CASE("canonical_b1")
{
    CHECK(canonical_b1(p3m2) == ZVector{0, 1, 2, 0, 1, 2});
    CHECK(canonical_b1({5, 2}) == ZVector{0, 1, 2, 3, 4, 0, 1, 2, 3, 4});
    CHECK(canonical_b1({3, 1}) == ZVector{0, 1, 2});
}

TEST_CASE("raise_pair_matrix")
{
    const ZVector v{0, 1, 2, 0, 1, 2};
    const ZVector w{0, 0, 1, 1, 2, 2};
    const auto X = raise_pair_matrix(v, w, 3);
    CHECK(X == CountMatrix::from_rows({{1, 1, 0}, {1, 0, 1}, {0, 1, 1}}));
    CHECK(X.total() == 6);
    CHECK(raise_pair_matrix(v, v, 3) == CountMatrix::identity(3, 2));
    CHECK(raise_pair_matrix(w, v, 3) == X.transposed());
    CHECK_THROWS_AS(raise_pair_matrix(v, ZVector{0, 1}, 3), InputError);
}

TEST_CASE("linear_combination")
{
    const ZVector b1{0, 1, 2, 0, 1, 2};
    const ZVector b2{0, 0, 1, 1, 2, 2};
    const ZVector b3{0, 0, 0, 1, 1, 1};
    CHECK(linear_combination({1, 0, 0}, b1, b2, b3, 3) == b1);
    CHECK(linear_combination({0, 0, 0}, b1, b2, b3, 3) == ZVector(6, 0));
    CHECK(linear_combination({1, 1, 0}, b1, b2, b3, 3) == ZVector{0, 1, 0, 1, 0, 1});
    CHECK_THROWS_AS(linear_combination({1, 1, 1}, b1, b2, ZVector{0}, 3), InputError);
}

TEST_CASE("rank_mod_p against span enumeration")
{
    const ZVector b1{0, 1, 2, 0, 1, 2};
    const ZVector b2{0, 0, 1, 1, 2, 2};
    const ZVector b3{0, 0, 0, 1, 1, 1};
    CHECK(oracle::rank_by_span({b1, b2, b3}, 3) == 3);
    CHECK(rank_mod_p({b1}, 3) == 1);
    CHECK(rank_mod_p({b1, scaled(b1, 2, 3)}, 3) == 1);
    CHECK(rank_mod_p({b1, b2, b3}, 3) == 3);
    CHECK(rank_mod_p({}, 3) == 0);

    std::mt19937 rng(7);
    std::uniform_int_distribution<int> entry(0, 4);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<ZVector> rows(static_cast<std::size_t>(1 + trial % 4), ZVector(6));
        for (auto & r : rows)
            for (auto & x : r)
                x = static_cast<Residue>(entry(rng) % (trial % 2 ? 5 : 3));
        const int p = trial % 2 ? 5 : 3;
        const int rank = rank_mod_p(rows, p);
        REQUIRE(rank == oracle::rank_by_span(rows, p));

        // invariant under row permutation and nonzero row scaling
        auto permuted = rows;
        std::shuffle(permuted.begin(), permuted.end(), rng);
        for (auto & r : permuted)
            r = scaled(r, 1 + static_cast<int>(rng() % static_cast<unsigned>(p - 1)), p);
        CHECK(rank_mod_p(permuted, p) == rank);
    }
}

TEST_CASE("is_independent_of_span2")
{
    const ZVector b1{0, 1, 2, 0, 1, 2};
    const ZVector b2{0, 0, 1, 1, 2, 2};
    CHECK_FALSE(is_independent_of_span2(b1, b1, b2, 3));
    CHECK_FALSE(is_independent_of_span2(linear_combination({1, 2, 0}, b1, b2, b1, 3), b1, b2, 3));
    CHECK(is_independent_of_span2(ZVector{0, 0, 0, 1, 1, 1}, b1, b2, 3));
}

TEST_CASE("balancedness is preserved by nonzero scaling and permutation")
{
    std::mt19937 rng(11);
    for (const PrimeParams params : {PrimeParams{3, 2}, PrimeParams{5, 2}, PrimeParams{5, 3}, PrimeParams{7, 4}}) {
        for (int trial = 0; trial < 50; ++trial) {
            const auto v = shuffled_balanced(params, rng);
            REQUIRE(is_balanced(v, params));
            for (int c = 1; c < params.p; ++c)
                CHECK(is_balanced(scaled(v, c, params.p), params));
            auto w = v;
            std::shuffle(w.begin(), w.end(), rng);
            CHECK(is_balanced(w, params));
        }
    }
}

TEST_CASE("raising gives a Davey matrix exactly when v, w and v - w are balanced")
{
    const auto all = oracle::balanced_vectors(3, 2, false);
    REQUIRE(all.size() == 90);
    for (const auto & v : all) {
        for (const auto & w : all) {
            const auto X = raise_pair_matrix(v, w, 3);
            const bool expected = is_balanced(difference(v, w, 3), p3m2);
            CHECK(oracle::davey(oracle::grid_of(X), 2) == expected);
            CHECK(raise_pair_matrix(w, v, 3) == X.transposed());
        }
    }
}
