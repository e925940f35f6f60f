#include "fuglede/davey.hpp"

#include <algorithm>
#include <charconv>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

namespace fuglede {

bool is_davey(const CountMatrix & M, int m)
{
    const int p = M.order();
    for (int i = 0; i < p; ++i) {
        int row = 0;
        int col = 0;
        int diag = 0;
        for (int j = 0; j < p; ++j) {
            row += M(i, j);
            col += M(j, i);
            diag += M(j, (j + i) % p);
        }
        if (row != m || col != m || diag != m)
            return false;
    }
    return true;
}

DaveyMatrix::DaveyMatrix(CountMatrix M, int m) : counts_(std::move(M)), weight_(m)
{
    if (!is_davey(counts_, m))
        throw ValidationError("matrix is not a Davey matrix of weight " + std::to_string(m));
}

DaveyMatrix DaveyMatrix::transposed() const
{
    return DaveyMatrix(counts_.transposed(), weight_);
}

DiagonalKey diagonal_key(const CountMatrix & M)
{
    const int p = M.order();
    DiagonalKey key(static_cast<std::size_t>(p), 0);
    for (int s = 0; s < p; ++s)
        for (int i = 0; i < p; ++i)
            key[s] += M(i, (i + s) % p);
    return key;
}

namespace {

struct KeyGroup
{
    DiagonalKey key;
    std::vector<CountMatrix> members;
};

std::vector<KeyGroup> permutation_matrices_by_key(int p)
{
    std::map<DiagonalKey, std::vector<CountMatrix>> groups;
    std::vector<int> sigma(static_cast<std::size_t>(p));
    std::iota(sigma.begin(), sigma.end(), 0);
    do {
        CountMatrix P(p);
        for (int i = 0; i < p; ++i)
            P.at(i, sigma[i]) = 1;
        groups[diagonal_key(P)].push_back(std::move(P));
    } while (std::next_permutation(sigma.begin(), sigma.end()));

    std::vector<KeyGroup> out;
    for (auto & [key, members] : groups)
        out.push_back({key, std::move(members)});
    return out;
}

class DaveyEnumerator
{
public:
    DaveyEnumerator(int p, int m) : p_(p), m_(m), groups_(permutation_matrices_by_key(p)), sum_(p) {}

    std::set<CountMatrix> run()
    {
        choose_keys(0, m_, DiagonalKey(static_cast<std::size_t>(p_), 0));
        return std::move(found_);
    }

private:
    // Picks a multiset of m keys (as multiplicities per group) summing to (m, ..., m).
    void choose_keys(std::size_t group, int remaining, DiagonalKey total)
    {
        if (remaining == 0) {
            if (std::all_of(total.begin(), total.end(), [&](int x) { return x == m_; }))
                sum_members(0);
            return;
        }
        if (group == groups_.size())
            return;

        const auto & key = groups_[group].key;
        for (int take = remaining; take >= 0; --take) {
            DiagonalKey next = total;
            bool fits = true;
            for (std::size_t s = 0; s < key.size(); ++s) {
                next[s] += take * key[s];
                fits = fits && next[s] <= m_;
            }
            if (!fits)
                continue;
            chosen_.emplace_back(group, take);
            choose_keys(group + 1, remaining - take, std::move(next));
            chosen_.pop_back();
        }
    }

    // For each chosen group, adds a multiset of `take` members of that group.
    void sum_members(std::size_t slot)
    {
        if (slot == chosen_.size()) {
            found_.insert(sum_);
            return;
        }
        const auto [group, take] = chosen_[slot];
        add_from_group(slot, groups_[group].members, 0, take);
    }

    void add_from_group(std::size_t slot, const std::vector<CountMatrix> & members, std::size_t first,
                        int take)
    {
        if (take == 0) {
            sum_members(slot + 1);
            return;
        }
        for (std::size_t k = first; k < members.size(); ++k) {
            accumulate(members[k], +1);
            add_from_group(slot, members, k, take - 1);
            accumulate(members[k], -1);
        }
    }

    void accumulate(const CountMatrix & P, int sign)
    {
        for (int i = 0; i < p_; ++i)
            for (int j = 0; j < p_; ++j)
                sum_.at(i, j) = static_cast<std::uint8_t>(sum_(i, j) + sign * P(i, j));
    }

    int p_;
    int m_;
    std::vector<KeyGroup> groups_;
    std::vector<std::pair<std::size_t, int>> chosen_;
    CountMatrix sum_;
    std::set<CountMatrix> found_;
};

}  // namespace

std::vector<DaveyMatrix> all_davey_matrices(int p, int m)
{
    if (!is_prime(p) || p > kMaxPrime)
        throw InputError("all_davey_matrices: unsupported modulus " + std::to_string(p));
    if (m < 1)
        throw InputError("all_davey_matrices: weight must be positive");

    std::vector<DaveyMatrix> out;
    for (auto & M : DaveyEnumerator(p, m).run())
        out.emplace_back(M, m);
    return out;
}

DaveyCatalog::DaveyCatalog(int p, int m, std::vector<DaveyMatrix> matrices)
    : p_(p), m_(m), matrices_(std::move(matrices))
{
    for (const auto & D : matrices_)
        if (D.order() != p || D.weight() != m)
            throw InputError("catalog member has wrong order or weight");
    std::sort(matrices_.begin(), matrices_.end());
    matrices_.erase(std::unique(matrices_.begin(), matrices_.end()), matrices_.end());
}

std::optional<std::size_t> DaveyCatalog::index_of(const CountMatrix & M) const
{
    auto it = std::lower_bound(matrices_.begin(), matrices_.end(), M,
                               [](const DaveyMatrix & D, const CountMatrix & x) { return D.counts() < x; });
    if (it == matrices_.end() || it->counts() != M)
        return std::nullopt;
    return static_cast<std::size_t>(it - matrices_.begin());
}

std::optional<std::size_t> DaveyCatalog::index_of(const DaveyMatrix & D) const
{
    if (D.weight() != m_)
        return std::nullopt;
    return index_of(D.counts());
}

DaveyCatalog get_davey_matrices(int p, int m)
{
    auto all = all_davey_matrices(p, m);
    std::erase_if(all, [](const DaveyMatrix & D) { return D(0, 0) == 0; });
    return DaveyCatalog(p, m, std::move(all));
}

Multiset column_multiset(const DaveyMatrix & D, int j)
{
    if (j < 0 || j >= D.order())
        throw InputError("column_multiset: column out of range");
    Multiset out;
    for (int i = 0; i < D.order(); ++i)
        out.insert(out.end(), static_cast<std::size_t>(D(i, j)), static_cast<Residue>(i));
    return out;
}

Multiset row_multiset(const DaveyMatrix & D, int i)
{
    if (i < 0 || i >= D.order())
        throw InputError("row_multiset: row out of range");
    Multiset out;
    for (int j = 0; j < D.order(); ++j)
        out.insert(out.end(), static_cast<std::size_t>(D(i, j)), static_cast<Residue>(j));
    return out;
}

std::string serialize_davey(const DaveyMatrix & D)
{
    std::string out = std::to_string(D.order()) + " " + std::to_string(D.weight());
    for (auto c : D.counts().cells()) {
        out += ' ';
        out += std::to_string(c);
    }
    return out;
}

namespace {

std::vector<int> parse_ints(std::string_view text)
{
    std::vector<int> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r'))
            ++pos;
        if (pos == text.size())
            break;
        int value = 0;
        auto [ptr, ec] = std::from_chars(text.data() + pos, text.data() + text.size(), value);
        if (ec != std::errc{} || value < 0)
            throw ParseError("expected a nonnegative integer in \"" + std::string(text) + "\"");
        pos = static_cast<std::size_t>(ptr - text.data());
        if (pos < text.size() && text[pos] != ' ' && text[pos] != '\t' && text[pos] != '\r')
            throw ParseError("unexpected character in \"" + std::string(text) + "\"");
        out.push_back(value);
    }
    return out;
}

}  // namespace

DaveyMatrix deserialize_davey(std::string_view record)
{
    const auto ints = parse_ints(record);
    if (ints.size() < 2)
        throw ParseError("Davey record too short");
    const int p = ints[0];
    const int m = ints[1];
    if (p < 2 || p > kMaxPrime)
        throw ParseError("Davey record has unsupported order " + std::to_string(p));
    if (ints.size() != static_cast<std::size_t>(2 + p * p))
        throw ParseError("Davey record has " + std::to_string(ints.size() - 2) + " entries, expected "
                         + std::to_string(p * p));
    std::vector<std::uint8_t> cells;
    for (std::size_t k = 2; k < ints.size(); ++k) {
        if (ints[k] > 255)
            throw ParseError("Davey record entry out of range");
        cells.push_back(static_cast<std::uint8_t>(ints[k]));
    }
    return DaveyMatrix(CountMatrix(p, std::move(cells)), m);
}

void write_catalog(std::ostream & out, const DaveyCatalog & catalog)
{
    out << catalog.prime() << ' ' << catalog.weight() << ' ' << catalog.size() << '\n';
    for (const auto & D : catalog)
        out << serialize_davey(D) << '\n';
}

DaveyCatalog read_catalog(std::istream & in)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("catalog: missing header");
    const auto header = parse_ints(line);
    if (header.size() != 3)
        throw ParseError("catalog: header must be \"p m count\"");
    const int p = header[0];
    const int m = header[1];
    std::vector<DaveyMatrix> matrices;
    matrices.reserve(static_cast<std::size_t>(header[2]));
    for (int k = 0; k < header[2]; ++k) {
        if (!std::getline(in, line))
            throw ParseError("catalog: expected " + std::to_string(header[2]) + " records, got "
                             + std::to_string(k));
        auto D = deserialize_davey(line);
        if (D.order() != p || D.weight() != m)
            throw ValidationError("catalog: record " + std::to_string(k) + " does not match header");
        if (!matrices.empty() && !(matrices.back() < D))
            throw ValidationError("catalog: records not in strictly increasing order");
        matrices.push_back(std::move(D));
    }
    return DaveyCatalog(p, m, std::move(matrices));
}

std::uint64_t catalog_checksum(const DaveyCatalog & catalog)
{
    std::ostringstream text;
    write_catalog(text, catalog);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text.str()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace fuglede
