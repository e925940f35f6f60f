#include "fuglede/zp.hpp"

#include <array>
#include <utility>

namespace fuglede {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char * what)
{
    if (a != b)
        throw InputError(std::string(what) + ": length mismatch (" + std::to_string(a) + " vs "
                         + std::to_string(b) + ")");
}

}  // namespace

bool is_prime(int n)
{
    if (n < 2)
        return false;
    for (int d = 2; d * d <= n; ++d)
        if (n % d == 0)
            return false;
    return true;
}

PrimeParams PrimeParams::make(int p, int m)
{
    if (!is_prime(p))
        throw InputError("modulus " + std::to_string(p) + " is not prime");
    if (p > kMaxPrime)
        throw InputError("modulus " + std::to_string(p) + " exceeds supported maximum "
                         + std::to_string(kMaxPrime));
    if (m < 1)
        throw InputError("weight must be at least 1, got " + std::to_string(m));
    return PrimeParams{p, m};
}

CoefficientTriple CoefficientTriple::from_index(int index, int p)
{
    return {static_cast<Residue>(index / (p * p)), static_cast<Residue>((index / p) % p),
            static_cast<Residue>(index % p)};
}

CoefficientTriple CoefficientTriple::negated(int p) const
{
    auto neg = [p](Residue x) { return static_cast<Residue>((p - x) % p); };
    return {neg(l1), neg(l2), neg(l3)};
}

CoefficientTriple CoefficientTriple::minus(const CoefficientTriple & other, int p) const
{
    auto sub = [p](Residue x, Residue y) { return static_cast<Residue>((x + p - y) % p); };
    return {sub(l1, other.l1), sub(l2, other.l2), sub(l3, other.l3)};
}

CoefficientTriple CoefficientTriple::scaled(int c, int p) const
{
    auto mul = [c, p](Residue x) { return static_cast<Residue>((x * c) % p); };
    return {mul(l1), mul(l2), mul(l3)};
}

std::string to_string(const CoefficientTriple & t)
{
    return "(" + std::to_string(t.l1) + "," + std::to_string(t.l2) + "," + std::to_string(t.l3) + ")";
}

CountMatrix::CountMatrix(int p, std::vector<std::uint8_t> cells) : p_(p), cells_(std::move(cells))
{
    if (cells_.size() != static_cast<std::size_t>(p * p))
        throw InputError("count matrix: expected " + std::to_string(p * p) + " cells");
}

CountMatrix CountMatrix::from_rows(const std::vector<std::vector<int>> & rows)
{
    const int p = static_cast<int>(rows.size());
    CountMatrix out(p);
    for (int i = 0; i < p; ++i) {
        if (static_cast<int>(rows[i].size()) != p)
            throw InputError("count matrix: ragged rows");
        for (int j = 0; j < p; ++j) {
            if (rows[i][j] < 0 || rows[i][j] > 255)
                throw InputError("count matrix: entry out of range");
            out.at(i, j) = static_cast<std::uint8_t>(rows[i][j]);
        }
    }
    return out;
}

CountMatrix CountMatrix::identity(int p, int scale)
{
    CountMatrix out(p);
    for (int i = 0; i < p; ++i)
        out.at(i, i) = static_cast<std::uint8_t>(scale);
    return out;
}

int CountMatrix::total() const
{
    int t = 0;
    for (auto c : cells_)
        t += c;
    return t;
}

CountMatrix CountMatrix::transposed() const
{
    CountMatrix out(p_);
    for (int i = 0; i < p_; ++i)
        for (int j = 0; j < p_; ++j)
            out.at(j, i) = static_cast<std::uint8_t>((*this)(i, j));
    return out;
}

bool is_balanced(std::span<const Residue> v, const PrimeParams & params)
{
    require_same_length(v.size(), static_cast<std::size_t>(params.len()), "is_balanced");
    std::array<int, kMaxPrime> histogram{};
    for (auto x : v) {
        if (x >= params.p)
            throw InputError("is_balanced: entry " + std::to_string(x) + " not reduced mod p");
        ++histogram[x];
    }
    for (int r = 0; r < params.p; ++r)
        if (histogram[r] != params.m)
            return false;
    return true;
}

ZVector canonical_b1(const PrimeParams & params)
{
    ZVector out(static_cast<std::size_t>(params.len()));
    for (int k = 0; k < params.len(); ++k)
        out[k] = static_cast<Residue>(k % params.p);
    return out;
}

CountMatrix raise_pair_matrix(std::span<const Residue> v, std::span<const Residue> w, int p)
{
    require_same_length(v.size(), w.size(), "raise_pair_matrix");
    CountMatrix out(p);
    for (std::size_t k = 0; k < v.size(); ++k)
        ++out.at(v[k], w[k]);
    return out;
}

ZVector linear_combination(const CoefficientTriple & t, std::span<const Residue> b1,
                           std::span<const Residue> b2, std::span<const Residue> b3, int p)
{
    require_same_length(b1.size(), b2.size(), "linear_combination");
    require_same_length(b1.size(), b3.size(), "linear_combination");
    ZVector out(b1.size());
    for (std::size_t k = 0; k < b1.size(); ++k)
        out[k] = static_cast<Residue>((t.l1 * b1[k] + t.l2 * b2[k] + t.l3 * b3[k]) % p);
    return out;
}

ZVector scaled(std::span<const Residue> v, int c, int p)
{
    ZVector out(v.size());
    const int cc = ((c % p) + p) % p;
    for (std::size_t k = 0; k < v.size(); ++k)
        out[k] = static_cast<Residue>((v[k] * cc) % p);
    return out;
}

ZVector difference(std::span<const Residue> v, std::span<const Residue> w, int p)
{
    require_same_length(v.size(), w.size(), "difference");
    ZVector out(v.size());
    for (std::size_t k = 0; k < v.size(); ++k)
        out[k] = static_cast<Residue>((v[k] + p - w[k]) % p);
    return out;
}

std::vector<int> inverse_table(int p)
{
    std::vector<int> inv(static_cast<std::size_t>(p), 0);
    for (int a = 1; a < p; ++a)
        for (int b = 1; b < p; ++b)
            if ((a * b) % p == 1)
                inv[a] = b;
    return inv;
}

int rank_mod_p(const std::vector<ZVector> & rows, int p)
{
    if (rows.empty())
        return 0;
    const std::size_t cols = rows.front().size();
    std::vector<std::vector<int>> a;
    a.reserve(rows.size());
    for (const auto & r : rows) {
        require_same_length(r.size(), cols, "rank_mod_p");
        a.emplace_back(r.begin(), r.end());
    }

    const auto inv = inverse_table(p);
    std::size_t rank = 0;
    for (std::size_t col = 0; col < cols && rank < a.size(); ++col) {
        std::size_t pivot = rank;
        while (pivot < a.size() && a[pivot][col] % p == 0)
            ++pivot;
        if (pivot == a.size())
            continue;
        std::swap(a[rank], a[pivot]);
        const int scale = inv[a[rank][col] % p];
        for (auto & x : a[rank])
            x = (x * scale) % p;
        for (std::size_t r = 0; r < a.size(); ++r) {
            if (r == rank || a[r][col] % p == 0)
                continue;
            const int f = a[r][col] % p;
            for (std::size_t c = col; c < cols; ++c)
                a[r][c] = ((a[r][c] - f * a[rank][c]) % p + p) % p;
        }
        ++rank;
    }
    return static_cast<int>(rank);
}

bool is_independent_of_span2(std::span<const Residue> b3, std::span<const Residue> b1,
                             std::span<const Residue> b2, int p)
{
    require_same_length(b3.size(), b1.size(), "is_independent_of_span2");
    require_same_length(b3.size(), b2.size(), "is_independent_of_span2");
    for (int l1 = 0; l1 < p; ++l1) {
        for (int l2 = 0; l2 < p; ++l2) {
            bool equal = true;
            for (std::size_t k = 0; k < b3.size() && equal; ++k)
                equal = (l1 * b1[k] + l2 * b2[k]) % p == b3[k];
            if (equal)
                return false;
        }
    }
    return true;
}

}  // namespace fuglede
