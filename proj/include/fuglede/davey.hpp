#ifndef FUGLEDE_DAVEY_HPP
#define FUGLEDE_DAVEY_HPP

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fuglede/zp.hpp"

namespace fuglede {

/// Sorted multiset over Z_p.
using Multiset = std::vector<Residue>;

bool is_davey(const CountMatrix & M, int m);

/// p x p nonnegative integer matrix whose row sums, column sums and wrap-around
/// diagonal sums sum_i D(i, i+s) all equal the weight.
class DaveyMatrix
{
public:
    DaveyMatrix() = default;

    /// Throws ValidationError if M is not a Davey matrix of weight m.
    DaveyMatrix(CountMatrix M, int m);

    int order() const { return counts_.order(); }
    int weight() const { return weight_; }
    int operator()(int i, int j) const { return counts_(i, j); }
    const CountMatrix & counts() const { return counts_; }

    DaveyMatrix transposed() const;
    bool is_symmetric() const { return counts_ == counts_.transposed(); }

    friend bool operator==(const DaveyMatrix &, const DaveyMatrix &) = default;
    friend auto operator<=>(const DaveyMatrix & a, const DaveyMatrix & b) { return a.counts_ <=> b.counts_; }

private:
    CountMatrix counts_;
    int weight_ = 0;
};

/// Diagonal profile of a permutation matrix: key[s] = sum_i M(i, i+s).
using DiagonalKey = std::vector<int>;

DiagonalKey diagonal_key(const CountMatrix & M);

/// Every Davey matrix of weight m, in row-major lexicographic order (no D(0,0) filter).
std::vector<DaveyMatrix> all_davey_matrices(int p, int m);

/// Ordered, duplicate-free set of Davey matrices of one weight.
class DaveyCatalog
{
public:
    DaveyCatalog() = default;
    /// Sorts and deduplicates.
    DaveyCatalog(int p, int m, std::vector<DaveyMatrix> matrices);

    int prime() const { return p_; }
    int weight() const { return m_; }
    std::size_t size() const { return matrices_.size(); }
    bool empty() const { return matrices_.empty(); }
    const DaveyMatrix & operator[](std::size_t i) const { return matrices_[i]; }
    const std::vector<DaveyMatrix> & matrices() const { return matrices_; }
    auto begin() const { return matrices_.begin(); }
    auto end() const { return matrices_.end(); }

    std::optional<std::size_t> index_of(const DaveyMatrix & D) const;
    std::optional<std::size_t> index_of(const CountMatrix & M) const;

    friend bool operator==(const DaveyCatalog &, const DaveyCatalog &) = default;

private:
    int p_ = 0;
    int m_ = 0;
    std::vector<DaveyMatrix> matrices_;
};

/// The catalog of weight-m Davey matrices with D(0,0) > 0, built from sums of
/// permutation matrices grouped by diagonal key.
DaveyCatalog get_davey_matrices(int p, int m);

/// The multiset containing i with multiplicity D(i, j).
Multiset column_multiset(const DaveyMatrix & D, int j);
/// The multiset containing j with multiplicity D(i, j).
Multiset row_multiset(const DaveyMatrix & D, int i);

/// "p m e00 e01 ... e(p-1)(p-1)".
std::string serialize_davey(const DaveyMatrix & D);
/// Throws ParseError on malformed text and ValidationError if the sums are wrong.
DaveyMatrix deserialize_davey(std::string_view record);

/// Header "p m count", then one serialized matrix per line.
void write_catalog(std::ostream & out, const DaveyCatalog & catalog);
DaveyCatalog read_catalog(std::istream & in);

/// FNV-1a over the catalog file text; ties a cache file to the catalog it indexes.
std::uint64_t catalog_checksum(const DaveyCatalog & catalog);

}  // namespace fuglede

#endif  // FUGLEDE_DAVEY_HPP
