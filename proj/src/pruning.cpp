#include "fuglede/pruning.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>

namespace fuglede {

std::vector<Matching> enumerate_matchings(const Multiset & a, const Multiset & b)
{
    if (a.size() != b.size())
        throw InputError("enumerate_matchings: multisets differ in size");

    struct Partial
    {
        Matching matching;
        Multiset remaining;
    };

    std::vector<Partial> frontier{{Matching{}, b}};
    for (auto x : a) {
        std::vector<Partial> next;
        for (const auto & state : frontier) {
            for (std::size_t k = 0; k < state.remaining.size(); ++k) {
                // equal right-hand values give identical extensions
                if (k > 0 && state.remaining[k] == state.remaining[k - 1])
                    continue;
                Partial grown = state;
                grown.matching.pairs.emplace_back(x, state.remaining[k]);
                grown.remaining.erase(grown.remaining.begin() + static_cast<std::ptrdiff_t>(k));
                next.push_back(std::move(grown));
            }
        }
        frontier = std::move(next);
    }

    std::set<Matching> distinct;
    for (auto & state : frontier) {
        std::sort(state.matching.pairs.begin(), state.matching.pairs.end());
        distinct.insert(std::move(state.matching));
    }
    return {distinct.begin(), distinct.end()};
}

bool matrix_admits_matching(const DaveyMatrix & D1, std::span<const Matching> matchings)
{
    for (const auto & matching : matchings) {
        bool fits = true;
        const auto & pairs = matching.pairs;
        for (std::size_t k = 0; k < pairs.size() && fits;) {
            std::size_t run = k;
            while (run < pairs.size() && pairs[run] == pairs[k])
                ++run;
            fits = D1(pairs[k].first, pairs[k].second) >= static_cast<int>(run - k);
            k = run;
        }
        if (fits)
            return true;
    }
    return false;
}

std::vector<Multiset> all_multisets(int p, int m)
{
    std::vector<Multiset> out;
    Multiset current;
    auto extend = [&](auto & self, int low) -> void {
        if (static_cast<int>(current.size()) == m) {
            out.push_back(current);
            return;
        }
        for (int v = low; v < p; ++v) {
            current.push_back(static_cast<Residue>(v));
            self(self, v);
            current.pop_back();
        }
    };
    extend(extend, 0);
    return out;
}

std::uint64_t PruneCache::code(const Multiset & s, int p)
{
    std::uint64_t c = 0;
    for (auto x : s)
        c = c * static_cast<std::uint64_t>(p + 1) + x + 1;
    return c;
}

PruneCache::PruneCache(int p, int m, std::size_t catalog_size)
    : p_(p), m_(m), catalog_size_(catalog_size), multisets_(all_multisets(p, m))
{
    for (std::size_t k = 0; k < multisets_.size(); ++k)
        ids_.emplace(code(multisets_[k], p), k);
    table_.assign(multisets_.size() * multisets_.size(), Bitset(catalog_size));
}

std::size_t PruneCache::multiset_id(const Multiset & s) const
{
    auto it = s.size() == static_cast<std::size_t>(m_) ? ids_.find(code(s, p_)) : ids_.end();
    if (it == ids_.end())
        throw InputError("prune cache: not a sorted size-" + std::to_string(m_) + " multiset");
    return it->second;
}

PruneCache calc_cache(const PrimeParams & params, const DaveyCatalog & catalog)
{
    if (catalog.prime() != params.p || catalog.weight() != params.m)
        throw InputError("calc_cache: catalog built for different parameters");

    PruneCache cache(params.p, params.m, catalog.size());
    const auto & sets = cache.multisets();
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = 0; b < sets.size(); ++b) {
            const auto matchings = enumerate_matchings(sets[a], sets[b]);
            auto & entry = cache.entry(a, b);
            for (std::size_t d = 0; d < catalog.size(); ++d)
                if (matrix_admits_matching(catalog[d], matchings))
                    entry.set(d);
        }
    }
    return cache;
}

Bitset davey_filtered_from_cache(std::span<const std::size_t> column_ids_of_D,
                                 std::span<const std::size_t> row_ids_of_D2, const PruneCache & cache)
{
    Bitset result = cache.lookup(column_ids_of_D[0], row_ids_of_D2[0]);
    for (std::size_t v = 1; v < column_ids_of_D.size() && !result.none(); ++v)
        result &= cache.lookup(column_ids_of_D[v], row_ids_of_D2[v]);
    return result;
}

Bitset davey_filtered_from_cache(const DaveyMatrix & D, const DaveyMatrix & D2, const PruneCache & cache)
{
    const int p = D.order();
    if (D2.order() != p || p != cache.prime())
        throw InputError("davey_filtered_from_cache: order mismatch");
    std::vector<std::size_t> cols;
    std::vector<std::size_t> rows;
    for (int v = 0; v < p; ++v) {
        cols.push_back(cache.multiset_id(column_multiset(D, v)));
        rows.push_back(cache.multiset_id(row_multiset(D2, v)));
    }
    return davey_filtered_from_cache(cols, rows, cache);
}

namespace {

std::string join(const Multiset & s)
{
    std::string out;
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (k > 0)
            out += ' ';
        out += std::to_string(s[k]);
    }
    return out;
}

std::vector<std::size_t> split_numbers(const std::string & text)
{
    std::istringstream in(text);
    std::vector<std::size_t> out;
    long long x = 0;
    while (in >> x) {
        if (x < 0)
            throw ParseError("cache: negative number in \"" + text + "\"");
        out.push_back(static_cast<std::size_t>(x));
    }
    if (!in.eof())
        throw ParseError("cache: malformed field \"" + text + "\"");
    return out;
}

}  // namespace

void write_cache(std::ostream & out, const PruneCache & cache, std::uint64_t catalog_hash)
{
    out << cache.prime() << ' ' << cache.weight() << ' ' << catalog_hash << '\n';
    const auto & sets = cache.multisets();
    for (std::size_t a = 0; a < sets.size(); ++a) {
        for (std::size_t b = 0; b < sets.size(); ++b) {
            out << join(sets[a]) << '|' << join(sets[b]) << '|';
            bool first = true;
            cache.lookup(a, b).for_each([&](std::size_t i) {
                if (!first)
                    out << ' ';
                out << i;
                first = false;
            });
            out << '\n';
        }
    }
}

PruneCache read_cache(std::istream & in, const DaveyCatalog & catalog, std::uint64_t expected_catalog_hash)
{
    std::string line;
    if (!std::getline(in, line))
        throw ParseError("cache: missing header");
    std::istringstream header(line);
    int p = 0;
    int m = 0;
    std::uint64_t hash = 0;
    if (!(header >> p >> m >> hash))
        throw ParseError("cache: header must be \"p m catalog_hash\"");
    if (p != catalog.prime() || m != catalog.weight())
        throw ValidationError("cache: parameters do not match the catalog");
    if (hash != expected_catalog_hash)
        throw ValidationError("cache: catalog checksum mismatch");

    PruneCache cache(p, m, catalog.size());
    std::vector<bool> seen(cache.key_count(), false);
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto bar1 = line.find('|');
        const auto bar2 = bar1 == std::string::npos ? bar1 : line.find('|', bar1 + 1);
        if (bar2 == std::string::npos)
            throw ParseError("cache: line lacks two '|' separators");
        auto to_multiset = [](const std::vector<std::size_t> & xs) {
            Multiset s;
            for (auto x : xs)
                s.push_back(static_cast<Residue>(x));
            return s;
        };
        const auto a = to_multiset(split_numbers(line.substr(0, bar1)));
        const auto b = to_multiset(split_numbers(line.substr(bar1 + 1, bar2 - bar1 - 1)));
        std::size_t a_id = 0;
        std::size_t b_id = 0;
        try {
            a_id = cache.multiset_id(a);
            b_id = cache.multiset_id(b);
        } catch (const InputError & e) {
            throw ParseError(std::string("cache: ") + e.what());
        }
        seen[a_id * cache.multisets().size() + b_id] = true;
        auto & entry = cache.entry(a_id, b_id);
        for (auto index : split_numbers(line.substr(bar2 + 1))) {
            if (index >= catalog.size())
                throw ValidationError("cache: catalog index " + std::to_string(index) + " out of range");
            entry.set(index);
        }
    }
    if (std::find(seen.begin(), seen.end(), false) != seen.end())
        throw ParseError("cache: missing key lines");
    return cache;
}

}  // namespace fuglede
