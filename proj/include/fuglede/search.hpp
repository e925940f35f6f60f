#ifndef FUGLEDE_SEARCH_HPP
#define FUGLEDE_SEARCH_HPP

#include <array>
#include <bit>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "fuglede/bitset.hpp"
#include "fuglede/davey.hpp"
#include "fuglede/pruning.hpp"
#include "fuglede/zp.hpp"

namespace fuglede {

/// Returns the b' with raise_pair_matrix(b, b') == D obtained by scanning b left to
/// right and handing out each row multiset of D in ascending order.
ZVector davey_on_vec(const DaveyMatrix & D, std::span<const Residue> b);

using ThirdRowVisitor = std::function<void(std::span<const Residue>)>;

/// Visits every b3 with b3[0] == 0, raise_pair_matrix(b1, b3) == D1 and
/// raise_pair_matrix(b2, b3) == D2, in lexicographic order.
void for_each_third_row(const DaveyMatrix & D1, const DaveyMatrix & D2, std::span<const Residue> b1,
                        std::span<const Residue> b2, const ThirdRowVisitor & visit);

std::vector<ZVector> davey_on_vec_2x2(const DaveyMatrix & D1, const DaveyMatrix & D2,
                                      std::span<const Residue> b1, std::span<const Residue> b2);

/// Third rows up to column permutations that fix both b1 and b2. A class
/// records, for every pair (x, z) = (b1_k, b2_k), how many of those positions
/// receive each value y. Everything the search computes from a third row
/// (both raisings, V, R, independence) is constant on a class.
struct ThirdRowClass
{
    struct Cell
    {
        Residue x = 0;
        Residue z = 0;
        Residue y = 0;
        std::uint8_t count = 0;

        friend auto operator<=>(const Cell &, const Cell &) = default;
    };

    std::vector<Cell> cells;
    /// Number of distinct b3 with b3[0] == 0 in the class.
    std::uint64_t arrangements = 0;
};

using ThirdRowClassVisitor = std::function<void(const ThirdRowClass &)>;

/// Visits the classes of the vectors davey_on_vec_2x2(D1, D2, b1, b2) where
/// D = raise_pair_matrix(b1, b2). Only D enters: it fixes the class sizes.
void for_each_third_row_class(const DaveyMatrix & D, const DaveyMatrix & D1, const DaveyMatrix & D2,
                              const ThirdRowClassVisitor & visit);

/// The member of the class whose values ascend within each (x, z) position group.
ZVector class_representative(const ThirdRowClass & cls, std::span<const Residue> b1, std::span<const Residue> b2);

/// Subset of Z_p^3 indexed by CoefficientTriple::index.
class ValidSet
{
public:
    static constexpr std::size_t kCapacity = kMaxPrime * kMaxPrime * kMaxPrime;

    explicit ValidSet(int p) : p_(p) {}

    int prime() const { return p_; }
    bool contains(int index) const { return (words_[index >> 6] >> (index & 63)) & 1U; }
    bool contains(const CoefficientTriple & t) const { return contains(t.index(p_)); }
    void insert(int index) { words_[index >> 6] |= std::uint64_t{1} << (index & 63); }
    void insert(const CoefficientTriple & t) { insert(t.index(p_)); }
    std::size_t size() const;
    std::vector<CoefficientTriple> members() const;

    /// Calls f(index) for every member in increasing index order.
    template <typename F>
    void for_each_index(F && f) const
    {
        for (std::size_t w = 0; w < words_.size(); ++w)
            for (auto bits = words_[w]; bits != 0; bits &= bits - 1)
                f(static_cast<int>(w * 64 + static_cast<std::size_t>(std::countr_zero(bits))));
    }

    friend bool operator==(const ValidSet &, const ValidSet &) = default;

private:
    int p_;
    std::array<std::uint64_t, (kCapacity + 63) / 64> words_{};
};

/// { t in Z_p^3 : t1*b1 + t2*b2 + t3*b3 is balanced }.
ValidSet balanced_linear_combinations(std::span<const Residue> b1, std::span<const Residue> b2,
                                      std::span<const Residue> b3, const PrimeParams & params);

/// Same set computed from a class of third rows.
ValidSet balanced_linear_combinations(const ThirdRowClass & cls, const PrimeParams & params);

/// True iff the third rows of the class lie outside span(b1, b2).
bool is_independent_of_span2(const ThirdRowClass & cls, int p);

inline CoefficientTriple unit_triple(int i)
{
    return {static_cast<Residue>(i == 0), static_cast<Residue>(i == 1), static_cast<Residue>(i == 2)};
}

/// Members of V adjacent to every unit triple, where v ~ w iff v - w is in V.
/// A unit triple counts as adjacent to itself.
std::vector<CoefficientTriple> reduce_valid_set(const ValidSet & V);

/// |reduce_valid_set(V)| without materialising the set.
std::size_t reduced_set_size(const ValidSet & V);

/// Searches R for a clique of size >= threshold containing the three unit
/// triples. Throws InputError if |R| < threshold; the caller decides on that bound.
std::optional<std::vector<CoefficientTriple>> clique_fallback(const ValidSet & V,
                                                              std::span<const CoefficientTriple> R, int threshold);

struct TripleContext
{
    ZVector b1;
    ZVector b2;
    ZVector b3;
    DaveyMatrix D;
    DaveyMatrix D1;
    DaveyMatrix D2;
};

struct Counterexample
{
    TripleContext context;
    std::vector<CoefficientTriple> lambda;
    /// m*p rows: the zero row followed by one combination per used triple.
    std::vector<ZVector> matrix;
};

/// Assembles the candidate log-Hadamard matrix from lambda and checks every
/// property a rank-3 special dephased matrix needs. Throws VerificationError
/// naming the first violated property.
Counterexample verify_counterexample(const TripleContext & ctx, std::span<const CoefficientTriple> lambda,
                                     const PrimeParams & params);

struct Shard
{
    int index = 0;
    int count = 1;

    friend bool operator==(const Shard &, const Shard &) = default;
};

struct SearchReport
{
    int p = 0;
    int m = 0;
    std::uint64_t davey_count = 0;
    std::uint64_t outer_matrices_examined = 0;
    std::uint64_t d2_pairs_examined = 0;
    std::uint64_t d1_candidates_after_filter = 0;
    std::uint64_t b3_vectors_tested = 0;
    std::uint64_t triples_tested = 0;
    std::uint64_t max_reduced_set_size = 0;
    std::uint64_t threshold = 0;
    std::uint64_t clique_fallback_invocations = 0;
    std::vector<Counterexample> counterexamples;
    double elapsed_seconds = 0.0;
    Shard shard;
};

/// Adds counters, takes maxima, concatenates counterexamples. Used both for
/// per-thread partials and for recombining shard reports.
void merge_into(SearchReport & total, const SearchReport & part);

/// True if the two reports agree on everything except timing and shard.
bool same_counters(const SearchReport & a, const SearchReport & b);

struct SearchProgress
{
    std::uint64_t units_done = 0;
    std::uint64_t units_total = 0;
    std::uint64_t triples_tested = 0;
    double elapsed_seconds = 0.0;
};

struct SearchOptions
{
    int threads = 1;
    std::uint64_t log_every = 1000;
    std::function<void(const SearchProgress &)> progress;
    /// Stops after this many work units of the shard (0 = no limit); for partial probes.
    std::uint64_t max_units = 0;
};

/// Number of (D, D2) work units for the catalog, before sharding.
std::uint64_t work_unit_count(const DaveyCatalog & catalog);

/// Exhaustive search for a rank-3 special dephased log-Hadamard matrix of weight m.
/// Work unit u is the u-th (D, D2) pair in catalog order; shard k of N takes u = k mod N.
SearchReport run_search(const PrimeParams & params, Shard shard, const DaveyCatalog & catalog,
                        const PruneCache & cache, const SearchOptions & options = {});

/// Builds catalog and cache itself.
SearchReport run_search(const PrimeParams & params, Shard shard = {}, const SearchOptions & options = {});

}  // namespace fuglede

#endif  // FUGLEDE_SEARCH_HPP
