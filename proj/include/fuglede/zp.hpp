#ifndef FUGLEDE_ZP_HPP
#define FUGLEDE_ZP_HPP

#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fuglede/errors.hpp"

namespace fuglede {

using Residue = std::uint8_t;

/// A vector over Z_p. Rows of candidate log-Hadamard matrices have length m*p.
using ZVector = std::vector<Residue>;

/// Largest modulus the library accepts; keeps count matrices within 8-bit cells.
inline constexpr int kMaxPrime = 13;

bool is_prime(int n);

/// Modulus and weight. Construct through make() to get the invariants checked.
struct PrimeParams
{
    int p = 0;
    int m = 0;

    static PrimeParams make(int p, int m);

    int len() const { return p * m; }

    friend bool operator==(const PrimeParams &, const PrimeParams &) = default;
};

/// (l1, l2, l3) in Z_p^3, the coefficients of l1*b1 + l2*b2 + l3*b3.
struct CoefficientTriple
{
    Residue l1 = 0;
    Residue l2 = 0;
    Residue l3 = 0;

    int index(int p) const { return (l1 * p + l2) * p + l3; }
    static CoefficientTriple from_index(int index, int p);

    CoefficientTriple negated(int p) const;
    CoefficientTriple minus(const CoefficientTriple & other, int p) const;
    CoefficientTriple scaled(int c, int p) const;
    bool is_zero() const { return l1 == 0 && l2 == 0 && l3 == 0; }

    friend auto operator<=>(const CoefficientTriple &, const CoefficientTriple &) = default;
};

std::string to_string(const CoefficientTriple & t);

/// Square p x p matrix of small nonnegative counts, row-major.
class CountMatrix
{
public:
    CountMatrix() = default;
    explicit CountMatrix(int p) : p_(p), cells_(static_cast<std::size_t>(p * p), 0) {}
    CountMatrix(int p, std::vector<std::uint8_t> cells);

    /// Builds from nested rows; all rows must have the same length as the outer list.
    static CountMatrix from_rows(const std::vector<std::vector<int>> & rows);
    static CountMatrix identity(int p, int scale = 1);

    int order() const { return p_; }
    int operator()(int i, int j) const { return cells_[static_cast<std::size_t>(i * p_ + j)]; }
    std::uint8_t & at(int i, int j) { return cells_[static_cast<std::size_t>(i * p_ + j)]; }

    const std::vector<std::uint8_t> & cells() const { return cells_; }
    int total() const;
    CountMatrix transposed() const;

    friend bool operator==(const CountMatrix &, const CountMatrix &) = default;
    friend auto operator<=>(const CountMatrix &, const CountMatrix &) = default;

private:
    int p_ = 0;
    std::vector<std::uint8_t> cells_;
};

bool is_balanced(std::span<const Residue> v, const PrimeParams & params);

/// m concatenated copies of (0, 1, ..., p-1).
ZVector canonical_b1(const PrimeParams & params);

/// counts(i, j) = #{k : v_k = i, w_k = j}.
CountMatrix raise_pair_matrix(std::span<const Residue> v, std::span<const Residue> w, int p);

ZVector linear_combination(const CoefficientTriple & t, std::span<const Residue> b1,
                           std::span<const Residue> b2, std::span<const Residue> b3, int p);

ZVector scaled(std::span<const Residue> v, int c, int p);
ZVector difference(std::span<const Residue> v, std::span<const Residue> w, int p);

/// Multiplicative inverses of 1..p-1; entry 0 is unused.
std::vector<int> inverse_table(int p);

int rank_mod_p(const std::vector<ZVector> & rows, int p);

/// True iff b3 is not of the form l1*b1 + l2*b2.
bool is_independent_of_span2(std::span<const Residue> b3, std::span<const Residue> b1,
                             std::span<const Residue> b2, int p);

}  // namespace fuglede

#endif  // FUGLEDE_ZP_HPP
