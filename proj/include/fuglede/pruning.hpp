#ifndef FUGLEDE_PRUNING_HPP
#define FUGLEDE_PRUNING_HPP

#include <cstdint>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "fuglede/bitset.hpp"
#include "fuglede/davey.hpp"

namespace fuglede {

/// A perfect matching between two size-m multisets, stored as a sorted list of
/// (left, right) pairs. Repeated pairs carry multiplicity.
struct Matching
{
    std::vector<std::pair<Residue, Residue>> pairs;

    friend auto operator<=>(const Matching &, const Matching &) = default;
};

/// All distinct perfect matchings between a and b, built one element of a at a time.
std::vector<Matching> enumerate_matchings(const Multiset & a, const Multiset & b);

/// True iff some matching has D1(x, y) >= multiplicity of (x, y) for all its pairs.
bool matrix_admits_matching(const DaveyMatrix & D1, std::span<const Matching> matchings);

/// All sorted size-m multisets over Z_p, lexicographic.
std::vector<Multiset> all_multisets(int p, int m);

/// For every pair (a, b) of size-m multisets, the catalog indices of matrices D1
/// for which some pairing of a with b fits inside D1.
///
/// Keys are (values of b1 above a pivot value v of b2, values of a candidate b3
/// below v). A candidate D1 must accommodate every such pairing simultaneously.
class PruneCache
{
public:
    PruneCache() = default;
    PruneCache(int p, int m, std::size_t catalog_size);

    int prime() const { return p_; }
    int weight() const { return m_; }
    std::size_t catalog_size() const { return catalog_size_; }
    std::size_t key_count() const { return multisets_.size() * multisets_.size(); }
    const std::vector<Multiset> & multisets() const { return multisets_; }

    /// Position of a sorted size-m multiset in multisets(); throws InputError if absent.
    std::size_t multiset_id(const Multiset & s) const;

    const Bitset & lookup(std::size_t a_id, std::size_t b_id) const { return table_[a_id * multisets_.size() + b_id]; }
    const Bitset & lookup(const Multiset & a, const Multiset & b) const { return lookup(multiset_id(a), multiset_id(b)); }
    Bitset & entry(std::size_t a_id, std::size_t b_id) { return table_[a_id * multisets_.size() + b_id]; }

    friend bool operator==(const PruneCache & x, const PruneCache & y)
    {
        return x.p_ == y.p_ && x.m_ == y.m_ && x.catalog_size_ == y.catalog_size_ && x.table_ == y.table_;
    }

private:
    static std::uint64_t code(const Multiset & s, int p);

    int p_ = 0;
    int m_ = 0;
    std::size_t catalog_size_ = 0;
    std::vector<Multiset> multisets_;
    std::unordered_map<std::uint64_t, std::size_t> ids_;
    std::vector<Bitset> table_;
};

PruneCache calc_cache(const PrimeParams & params, const DaveyCatalog & catalog);

/// Intersection over pivot values v of cache[(column_multiset(D, v), row_multiset(D2, v))].
Bitset davey_filtered_from_cache(const DaveyMatrix & D, const DaveyMatrix & D2, const PruneCache & cache);

/// Same query with the per-matrix multiset ids precomputed (hot path of the search).
Bitset davey_filtered_from_cache(std::span<const std::size_t> column_ids_of_D,
                                 std::span<const std::size_t> row_ids_of_D2, const PruneCache & cache);

/// Header "p m catalog_hash", then one "a|b|indices" line per key in multiset order.
void write_cache(std::ostream & out, const PruneCache & cache, std::uint64_t catalog_hash);
/// Throws ValidationError if the stored hash differs from expected_catalog_hash.
PruneCache read_cache(std::istream & in, const DaveyCatalog & catalog, std::uint64_t expected_catalog_hash);

}  // namespace fuglede

#endif  // FUGLEDE_PRUNING_HPP
