#include "fuglede/search.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cassert>
#include <chrono>
#include <mutex>
#include <thread>
#include <utility>

namespace fuglede {

ZVector davey_on_vec(const DaveyMatrix & D, std::span<const Residue> b)
{
    const int p = D.order();
    const PrimeParams params{p, D.weight()};
    if (!is_balanced(b, params))
        throw InputError("davey_on_vec: input vector is not balanced for the matrix weight");

    std::vector<Multiset> pending;
    for (int i = 0; i < p; ++i)
        pending.push_back(row_multiset(D, i));
    std::vector<std::size_t> next(static_cast<std::size_t>(p), 0);

    ZVector out(b.size());
    for (std::size_t k = 0; k < b.size(); ++k)
        out[k] = pending[b[k]][next[b[k]]++];
    return out;
}

namespace {

// Depth-first fill of b3 with per-cell budgets for D1 (indexed by b1 value) and
// D2 (indexed by b2 value). open1[x] has bit y set while D1 budget (x, y) > 0.
class ThirdRowSearch
{
public:
    ThirdRowSearch(const DaveyMatrix & D1, const DaveyMatrix & D2, std::span<const Residue> b1,
                   std::span<const Residue> b2, const ThirdRowVisitor & visit)
        : p_(D1.order()), b1_(b1), b2_(b2), visit_(visit), b3_(b1.size(), 0)
    {
        for (int x = 0; x < p_; ++x) {
            for (int y = 0; y < p_; ++y) {
                budget1_[x * p_ + y] = static_cast<std::uint8_t>(D1(x, y));
                budget2_[x * p_ + y] = static_cast<std::uint8_t>(D2(x, y));
                if (D1(x, y) > 0)
                    open1_[x] |= 1U << y;
                if (D2(x, y) > 0)
                    open2_[x] |= 1U << y;
            }
        }
    }

    void run() { descend(0); }

private:
    void descend(std::size_t pos)
    {
        if (pos == b3_.size()) {
            visit_(b3_);
            return;
        }
        const int x = b1_[pos];
        const int z = b2_[pos];
        std::uint32_t candidates = open1_[x] & open2_[z];
        if (pos == 0)
            candidates &= 1U;
        while (candidates != 0) {
            const int y = std::countr_zero(candidates);
            candidates &= candidates - 1;

            auto & c1 = budget1_[x * p_ + y];
            auto & c2 = budget2_[z * p_ + y];
            if (--c1 == 0)
                open1_[x] &= ~(1U << y);
            if (--c2 == 0)
                open2_[z] &= ~(1U << y);
            b3_[pos] = static_cast<Residue>(y);

            descend(pos + 1);

            if (c1++ == 0)
                open1_[x] |= 1U << y;
            if (c2++ == 0)
                open2_[z] |= 1U << y;
        }
    }

    int p_;
    std::span<const Residue> b1_;
    std::span<const Residue> b2_;
    const ThirdRowVisitor & visit_;
    ZVector b3_;
    std::array<std::uint8_t, kMaxPrime * kMaxPrime> budget1_{};
    std::array<std::uint8_t, kMaxPrime * kMaxPrime> budget2_{};
    std::array<std::uint32_t, kMaxPrime> open1_{};
    std::array<std::uint32_t, kMaxPrime> open2_{};
};

}  // namespace

void for_each_third_row(const DaveyMatrix & D1, const DaveyMatrix & D2, std::span<const Residue> b1,
                        std::span<const Residue> b2, const ThirdRowVisitor & visit)
{
    if (b1.size() != b2.size())
        throw InputError("davey_on_vec_2x2: length mismatch");
    if (D1.order() != D2.order())
        throw InputError("davey_on_vec_2x2: order mismatch");
    if (b1.empty())
        return;
    ThirdRowSearch(D1, D2, b1, b2, visit).run();
}

std::vector<ZVector> davey_on_vec_2x2(const DaveyMatrix & D1, const DaveyMatrix & D2,
                                      std::span<const Residue> b1, std::span<const Residue> b2)
{
    std::vector<ZVector> out;
    for_each_third_row(D1, D2, b1, b2, [&](std::span<const Residue> b3) { out.emplace_back(b3.begin(), b3.end()); });
    return out;
}

namespace {

constexpr auto kFactorials = [] {
    std::array<std::uint64_t, 21> f{};
    f[0] = 1;
    for (std::size_t k = 1; k < f.size(); ++k)
        f[k] = f[k - 1] * k;
    return f;
}();

// Visits every class of third rows. Classes are the (x, z) position groups of
// b1/b2 in row-major order; each group of size D(x, z) is split over values y
// within the remaining budgets of D1 row x and D2 row z. One instance serves
// all D1 for a fixed (D, D2).
template <typename Visit>
class ClassSearch
{
public:
    ClassSearch(const DaveyMatrix & D, const DaveyMatrix & D2, Visit & visit) : p_(D.order()), visit_(visit)
    {
        for (int x = 0; x < p_; ++x)
            for (int z = 0; z < p_; ++z)
                if (D(x, z) > 0)
                    groups_.push_back({static_cast<Residue>(x), static_cast<Residue>(z), D(x, z)});
        for (int z = 0; z < p_; ++z)
            for (int y = 0; y < p_; ++y)
                budget2_[z * p_ + y] = D2(z, y);
    }

    void run(const DaveyMatrix & D1)
    {
        // b3[0] = 0 requires the (0, 0) group (which holds position 0) to exist.
        if (groups_.empty() || groups_.front().x != 0 || groups_.front().z != 0)
            return;
        for (int x = 0; x < p_; ++x)
            for (int y = 0; y < p_; ++y)
                budget1_[x * p_ + y] = D1(x, y);
        current_.cells.clear();
        taken_in_group_ = 0;
        if (fillable(0))
            split(0, 0, groups_.front().size, 1);
    }

private:
    struct Group
    {
        Residue x;
        Residue z;
        int size;
    };

    int capacity(const Group & g, int y) const { return std::min(budget1_[g.x * p_ + y], budget2_[g.z * p_ + y]); }

    void split(std::size_t group, int y, int remaining, std::uint64_t arrangements)
    {
        if (remaining == 0) {
            const auto ways = group_arrangements(group);
            if (group + 1 == groups_.size()) {
                current_.arrangements = arrangements * ways;
                visit_(std::as_const(current_));
                return;
            }
            if (groups_[group + 1].x != groups_[group].x && !fillable(group + 1))
                return;
            const auto saved = taken_in_group_;
            taken_in_group_ = 0;
            split(group + 1, 0, groups_[group + 1].size, arrangements * ways);
            taken_in_group_ = saved;
            return;
        }
        if (y == p_)
            return;

        const auto & g = groups_[group];
        int spare = 0;
        for (int v = y + 1; v < p_; ++v)
            spare += capacity(g, v);
        const int most = std::min(remaining, capacity(g, y));
        int least = std::max(0, remaining - spare);
        if (group == 0 && y == 0)
            least = std::max(least, 1);

        for (int take = most; take >= least; --take) {
            if (take > 0) {
                budget1_[g.x * p_ + y] -= take;
                budget2_[g.z * p_ + y] -= take;
                current_.cells.push_back({g.x, g.z, static_cast<Residue>(y), static_cast<std::uint8_t>(take)});
                ++taken_in_group_;
            }
            split(group, y + 1, remaining - take, arrangements);
            if (take > 0) {
                budget1_[g.x * p_ + y] += take;
                budget2_[g.z * p_ + y] += take;
                current_.cells.pop_back();
                --taken_in_group_;
            }
        }
    }

    // Necessary condition for filling groups first, first + 1, ...: every
    // unspent D1 cell (x, y) and D2 cell (z, y) is still reachable from the
    // untouched groups sharing its x or z.
    bool fillable(std::size_t first) const
    {
        std::array<int, kMaxPrime * kMaxPrime> reach1;
        std::array<int, kMaxPrime * kMaxPrime> reach2;
        std::fill_n(reach1.begin(), p_ * p_, 0);
        std::fill_n(reach2.begin(), p_ * p_, 0);
        for (std::size_t k = first; k < groups_.size(); ++k) {
            const auto & g = groups_[k];
            for (int y = 0; y < p_; ++y) {
                reach1[g.x * p_ + y] += std::min(g.size, budget2_[g.z * p_ + y]);
                reach2[g.z * p_ + y] += std::min(g.size, budget1_[g.x * p_ + y]);
            }
        }
        for (int i = 0; i < p_ * p_; ++i)
            if (reach1[i] < budget1_[i] || reach2[i] < budget2_[i])
                return false;
        return true;
    }

    // Multinomial over the cells of the group just completed (the last
    // taken_in_group_ cells); position 0 is pinned to y = 0 in group 0.
    std::uint64_t group_arrangements(std::size_t group) const
    {
        int n = groups_[group].size;
        std::uint64_t denominator = 1;
        const auto begin = current_.cells.size() - taken_in_group_;
        for (std::size_t k = begin; k < current_.cells.size(); ++k) {
            int t = current_.cells[k].count;
            if (group == 0 && current_.cells[k].y == 0)
                --t;
            denominator *= kFactorials[static_cast<std::size_t>(t)];
        }
        if (group == 0)
            --n;
        return kFactorials[static_cast<std::size_t>(n)] / denominator;
    }

    int p_;
    Visit & visit_;
    std::vector<Group> groups_;
    std::array<int, kMaxPrime * kMaxPrime> budget1_{};
    std::array<int, kMaxPrime * kMaxPrime> budget2_{};
    ThirdRowClass current_;
    std::size_t taken_in_group_ = 0;
};

}  // namespace

void for_each_third_row_class(const DaveyMatrix & D, const DaveyMatrix & D1, const DaveyMatrix & D2,
                              const ThirdRowClassVisitor & visit)
{
    if (D.order() != D1.order() || D.order() != D2.order())
        throw InputError("for_each_third_row_class: order mismatch");
    ClassSearch<const ThirdRowClassVisitor> search(D, D2, visit);
    search.run(D1);
}

ZVector class_representative(const ThirdRowClass & cls, std::span<const Residue> b1, std::span<const Residue> b2)
{
    if (b1.size() != b2.size())
        throw InputError("class_representative: length mismatch");
    // cells are grouped by (x, z) with ascending y, so handing them out in
    // order fills each position group in ascending value order
    const int p = kMaxPrime;
    std::array<std::vector<Residue>, kMaxPrime * kMaxPrime> pending;
    for (const auto & c : cls.cells)
        pending[c.x * p + c.z].insert(pending[c.x * p + c.z].end(), c.count, c.y);
    std::array<std::size_t, kMaxPrime * kMaxPrime> next{};
    ZVector out(b1.size());
    for (std::size_t k = 0; k < b1.size(); ++k) {
        const auto slot = static_cast<std::size_t>(b1[k] * p + b2[k]);
        if (next[slot] >= pending[slot].size())
            throw InputError("class_representative: class does not fit the given rows");
        out[k] = pending[slot][next[slot]++];
    }
    return out;
}

std::size_t ValidSet::size() const
{
    std::size_t n = 0;
    for (auto w : words_)
        n += static_cast<std::size_t>(std::popcount(w));
    return n;
}

std::vector<CoefficientTriple> ValidSet::members() const
{
    std::vector<CoefficientTriple> out;
    for_each_index([&](int i) { out.push_back(CoefficientTriple::from_index(i, p_)); });
    return out;
}

namespace {

// Per prime: one triple per line through the origin (first nonzero
// coordinate 1), the indices of its nonzero multiples, and x mod p for every
// x a combination of residues can reach.
struct ProjectiveTable
{
    std::vector<CoefficientTriple> lines;
    std::vector<std::array<int, kMaxPrime - 1>> multiples;
    std::array<Residue, 3 * (kMaxPrime - 1) * (kMaxPrime - 1) + 1> mod{};
};

const ProjectiveTable & projective_table(int p)
{
    static const auto tables = [] {
        std::array<ProjectiveTable, kMaxPrime + 1> out;
        for (int q = 2; q <= kMaxPrime; ++q) {
            if (!is_prime(q))
                continue;
            auto & t = out[static_cast<std::size_t>(q)];
            for (int index = 1; index < q * q * q; ++index) {
                const auto c = CoefficientTriple::from_index(index, q);
                const int lead = c.l1 != 0 ? c.l1 : (c.l2 != 0 ? c.l2 : c.l3);
                if (lead != 1)
                    continue;
                t.lines.push_back(c);
                std::array<int, kMaxPrime - 1> mult{};
                for (int k = 1; k < q; ++k)
                    mult[static_cast<std::size_t>(k - 1)] = c.scaled(k, q).index(q);
                t.multiples.push_back(mult);
            }
            for (std::size_t x = 0; x < t.mod.size(); ++x)
                t.mod[x] = static_cast<Residue>(x % static_cast<std::size_t>(q));
        }
        return out;
    }();
    return tables[static_cast<std::size_t>(p)];
}

}  // namespace

ValidSet balanced_linear_combinations(std::span<const Residue> b1, std::span<const Residue> b2,
                                      std::span<const Residue> b3, const PrimeParams & params)
{
    const std::size_t len = b1.size();
    if (b2.size() != len || b3.size() != len || len != static_cast<std::size_t>(params.len()))
        throw InputError("balanced_linear_combinations: length mismatch");

    ThirdRowClass cls;
    for (std::size_t k = 0; k < len; ++k)
        cls.cells.push_back({b1[k], b2[k], b3[k], 1});
    return balanced_linear_combinations(cls, params);
}

ValidSet balanced_linear_combinations(const ThirdRowClass & cls, const PrimeParams & params)
{
    const int p = params.p;
    const int m = params.m;
    const auto & table = projective_table(p);

    // Balancedness is invariant under nonzero scaling, so one triple per line is enough.
    ValidSet V(p);
    std::array<int, kMaxPrime> histogram{};
    for (std::size_t line = 0; line < table.lines.size(); ++line) {
        const auto & t = table.lines[line];
        histogram.fill(0);
        bool balanced = true;
        for (const auto & c : cls.cells) {
            auto & h = histogram[table.mod[t.l1 * c.x + t.l2 * c.z + t.l3 * c.y]];
            h += c.count;
            if (h > m) {
                balanced = false;
                break;
            }
        }
        // no bucket exceeds m and the counts total m*p, so all equal m
        if (balanced)
            for (int k = 0; k < p - 1; ++k)
                V.insert(table.multiples[line][static_cast<std::size_t>(k)]);
    }
    return V;
}

bool is_independent_of_span2(const ThirdRowClass & cls, int p)
{
    for (int l1 = 0; l1 < p; ++l1) {
        for (int l2 = 0; l2 < p; ++l2) {
            bool inside = true;
            for (std::size_t k = 0; k < cls.cells.size() && inside; ++k) {
                const auto & c = cls.cells[k];
                inside = (l1 * c.x + l2 * c.z) % p == c.y;
            }
            if (inside)
                return false;
        }
    }
    return true;
}

namespace {

bool adjacent_to_units(const ValidSet & V, const CoefficientTriple & v)
{
    const int p = V.prime();
    for (int i = 0; i < 3; ++i) {
        const auto e = unit_triple(i);
        if (v != e && !V.contains(v.minus(e, p)))
            return false;
    }
    return true;
}

}  // namespace

std::vector<CoefficientTriple> reduce_valid_set(const ValidSet & V)
{
    std::vector<CoefficientTriple> R;
    for (const auto & v : V.members())
        if (adjacent_to_units(V, v))
            R.push_back(v);
    return R;
}

std::size_t reduced_set_size(const ValidSet & V)
{
    const int p = V.prime();
    const int pp = p * p;
    std::size_t n = 0;
    V.for_each_index([&](int i) {
        // index of v - e for each unit e, stepping one coordinate down mod p
        const int a = i / pp;
        const int b = (i / p) % p;
        const int c = i % p;
        const bool ok1 = i == pp || V.contains(a > 0 ? i - pp : i + (p - 1) * pp);
        const bool ok2 = i == p || V.contains(b > 0 ? i - p : i + (p - 1) * p);
        const bool ok3 = i == 1 || V.contains(c > 0 ? i - 1 : i + (p - 1));
        n += ok1 && ok2 && ok3 ? 1 : 0;
    });
    return n;
}

namespace {

class CliqueSearch
{
public:
    CliqueSearch(std::vector<Bitset> adjacency, std::size_t need) : adjacency_(std::move(adjacency)), need_(need) {}

    std::optional<std::vector<std::size_t>> run()
    {
        Bitset all(adjacency_.size(), true);
        if (expand(all))
            return chosen_;
        return std::nullopt;
    }

private:
    bool expand(Bitset candidates)
    {
        if (chosen_.size() >= need_)
            return true;
        while (chosen_.size() + candidates.count() >= need_) {
            std::size_t v = 0;
            candidates.for_each([&](std::size_t i) { v = std::max(v, i); });
            candidates.reset(v);
            chosen_.push_back(v);
            if (expand(candidates & adjacency_[v]))
                return true;
            chosen_.pop_back();
        }
        return false;
    }

    std::vector<Bitset> adjacency_;
    std::size_t need_;
    std::vector<std::size_t> chosen_;
};

}  // namespace

std::optional<std::vector<CoefficientTriple>> clique_fallback(const ValidSet & V,
                                                              std::span<const CoefficientTriple> R, int threshold)
{
    if (threshold < 3 || static_cast<int>(R.size()) < threshold)
        throw InputError("clique_fallback: reduced set smaller than the threshold");

    const int p = V.prime();
    const std::array units{unit_triple(0), unit_triple(1), unit_triple(2)};
    for (const auto & e : units)
        if (std::find(R.begin(), R.end(), e) == R.end())
            return std::nullopt;
    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            if (!V.contains(units[i].minus(units[j], p)))
                return std::nullopt;

    std::vector<CoefficientTriple> others;
    for (const auto & v : R)
        if (std::find(units.begin(), units.end(), v) == units.end())
            others.push_back(v);

    std::vector<Bitset> adjacency(others.size(), Bitset(others.size()));
    for (std::size_t a = 0; a < others.size(); ++a)
        for (std::size_t b = a + 1; b < others.size(); ++b)
            if (V.contains(others[a].minus(others[b], p))) {
                adjacency[a].set(b);
                adjacency[b].set(a);
            }

    const auto found = CliqueSearch(std::move(adjacency), static_cast<std::size_t>(threshold - 3)).run();
    if (!found)
        return std::nullopt;

    std::vector<CoefficientTriple> lambda(units.begin(), units.end());
    for (auto i : *found)
        lambda.push_back(others[i]);
    return lambda;
}

Counterexample verify_counterexample(const TripleContext & ctx, std::span<const CoefficientTriple> lambda,
                                     const PrimeParams & params)
{
    const int p = params.p;
    const auto rows_wanted = static_cast<std::size_t>(params.len() - 1);
    if (lambda.size() < rows_wanted)
        throw InputError("verify_counterexample: need at least " + std::to_string(rows_wanted) + " triples, got "
                         + std::to_string(lambda.size()));
    for (int i = 0; i < 3; ++i)
        if (std::find(lambda.begin(), lambda.end(), unit_triple(i)) == lambda.end())
            throw InputError("verify_counterexample: unit triple " + to_string(unit_triple(i)) + " missing");

    if (raise_pair_matrix(ctx.b1, ctx.b2, p) != ctx.D.counts() || raise_pair_matrix(ctx.b1, ctx.b3, p) != ctx.D1.counts()
        || raise_pair_matrix(ctx.b2, ctx.b3, p) != ctx.D2.counts())
        throw VerificationError("rows b1, b2, b3 do not raise the recorded Davey matrices");

    std::vector<CoefficientTriple> used{unit_triple(0), unit_triple(1), unit_triple(2)};
    std::vector<CoefficientTriple> rest;
    for (const auto & t : lambda)
        if (std::find(used.begin(), used.end(), t) == used.end())
            rest.push_back(t);
    std::sort(rest.begin(), rest.end());
    rest.erase(std::unique(rest.begin(), rest.end()), rest.end());
    for (const auto & t : rest) {
        if (used.size() == rows_wanted)
            break;
        used.push_back(t);
    }
    if (used.size() < rows_wanted)
        throw VerificationError("lambda has fewer than " + std::to_string(rows_wanted) + " distinct triples");

    Counterexample out{ctx, used, {}};
    out.matrix.emplace_back(static_cast<std::size_t>(params.len()), 0);
    for (const auto & t : used)
        out.matrix.push_back(linear_combination(t, ctx.b1, ctx.b2, ctx.b3, p));

    const auto & M = out.matrix;
    for (std::size_t r = 0; r < M.size(); ++r)
        if (M[r][0] != 0)
            throw VerificationError("first column is not all zero (row " + std::to_string(r) + ")");
    if (M[1] != canonical_b1(params))
        throw VerificationError("second row is not the canonical pattern (0,1,...,p-1,...)");
    if (rank_mod_p(M, p) != 3)
        throw VerificationError("matrix rank over Z_p is " + std::to_string(rank_mod_p(M, p)) + ", not 3");
    for (std::size_t r = 0; r < M.size(); ++r)
        for (std::size_t s = r + 1; s < M.size(); ++s)
            if (!is_balanced(difference(M[r], M[s], p), params))
                throw VerificationError("not log-Hadamard: difference of rows " + std::to_string(r) + " and "
                                        + std::to_string(s) + " is not balanced");
    return out;
}

void merge_into(SearchReport & total, const SearchReport & part)
{
    total.outer_matrices_examined += part.outer_matrices_examined;
    total.d2_pairs_examined += part.d2_pairs_examined;
    total.d1_candidates_after_filter += part.d1_candidates_after_filter;
    total.b3_vectors_tested += part.b3_vectors_tested;
    total.triples_tested += part.triples_tested;
    total.max_reduced_set_size = std::max(total.max_reduced_set_size, part.max_reduced_set_size);
    total.clique_fallback_invocations += part.clique_fallback_invocations;
    total.counterexamples.insert(total.counterexamples.end(), part.counterexamples.begin(), part.counterexamples.end());
}

bool same_counters(const SearchReport & a, const SearchReport & b)
{
    auto lambdas = [](const SearchReport & r) {
        std::vector<std::vector<CoefficientTriple>> out;
        for (const auto & c : r.counterexamples)
            out.push_back(c.lambda);
        return out;
    };
    return a.p == b.p && a.m == b.m && a.davey_count == b.davey_count
           && a.outer_matrices_examined == b.outer_matrices_examined && a.d2_pairs_examined == b.d2_pairs_examined
           && a.d1_candidates_after_filter == b.d1_candidates_after_filter
           && a.b3_vectors_tested == b.b3_vectors_tested && a.triples_tested == b.triples_tested
           && a.max_reduced_set_size == b.max_reduced_set_size && a.threshold == b.threshold
           && a.clique_fallback_invocations == b.clique_fallback_invocations && lambdas(a) == lambdas(b);
}

namespace {

// D must have D(1, 0) > 0 so that the representative b2 starts (0, 0, ...).
std::vector<std::size_t> outer_indices(const DaveyCatalog & catalog)
{
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < catalog.size(); ++i)
        if (catalog[i](1, 0) > 0)
            out.push_back(i);
    return out;
}

struct UnitResult
{
    std::uint64_t unit = 0;
    Counterexample found;
};

class SearchDriver
{
public:
    SearchDriver(const PrimeParams & params, const DaveyCatalog & catalog, const PruneCache & cache)
        : params_(params), catalog_(catalog), cache_(cache), b1_(canonical_b1(params)), outer_(outer_indices(catalog))
    {
        const int p = params.p;
        for (const auto & D : catalog) {
            std::vector<std::size_t> cols;
            std::vector<std::size_t> rows;
            for (int v = 0; v < p; ++v) {
                cols.push_back(cache.multiset_id(column_multiset(D, v)));
                rows.push_back(cache.multiset_id(row_multiset(D, v)));
            }
            column_ids_.push_back(std::move(cols));
            row_ids_.push_back(std::move(rows));
        }
        for (auto i : outer_)
            b2_.push_back(davey_on_vec(catalog[i], b1_));

        const int m = params.m;
        at_most_.assign(static_cast<std::size_t>(p * p * (m + 1)), Bitset(catalog.size()));
        for (std::size_t d1 = 0; d1 < catalog.size(); ++d1)
            for (int cell = 0; cell < p * p; ++cell)
                for (int t = catalog[d1](cell / p, cell % p); t <= m; ++t)
                    at_most_[static_cast<std::size_t>(cell * (m + 1) + t)].set(d1);
    }

    std::uint64_t unit_count() const { return outer_.size() * catalog_.size(); }

    void process(std::uint64_t unit, SearchReport & report, std::vector<UnitResult> & found) const
    {
        const auto outer = static_cast<std::size_t>(unit / catalog_.size());
        const auto d2 = static_cast<std::size_t>(unit % catalog_.size());
        const auto d = outer_[outer];
        const auto & b2 = b2_[outer];
        const auto & D = catalog_[d];
        const auto & D2 = catalog_[d2];

        if (d2 == 0)
            ++report.outer_matrices_examined;
        ++report.d2_pairs_examined;

        auto candidates = davey_filtered_from_cache(column_ids_[d], row_ids_[d2], cache_);
        report.d1_candidates_after_filter += candidates.count();
        narrow_by_reach(D, D2, candidates);
        const auto threshold = static_cast<std::size_t>(params_.len() - 1);
        const int p = params_.p;

        // Third rows are handled one column-permutation class at a time; every
        // counter is weighted by the number of vectors in the class.
        std::size_t current_d1 = 0;
        auto visit = [&](const ThirdRowClass & cls) {
            report.b3_vectors_tested += cls.arrangements;
            if (!is_independent_of_span2(cls, p))
                return;
            report.triples_tested += cls.arrangements;

            const auto V = balanced_linear_combinations(cls, params_);
            const auto r_size = reduced_set_size(V);
            report.max_reduced_set_size = std::max<std::uint64_t>(report.max_reduced_set_size, r_size);
            if (r_size < threshold)
                return;

            report.clique_fallback_invocations += cls.arrangements;
            const auto R = reduce_valid_set(V);
            const auto lambda = clique_fallback(V, R, static_cast<int>(threshold));
            if (!lambda)
                return;
            const auto & D1 = catalog_[current_d1];
            const auto b3 = class_representative(cls, b1_, b2);
            assert(raise_pair_matrix(b1_, b3, p) == D1.counts());
            assert(raise_pair_matrix(b2, b3, p) == D2.counts());
            TripleContext ctx{b1_, b2, b3, D, D1, D2};
            found.push_back({unit, verify_counterexample(ctx, *lambda, params_)});
        };
        ClassSearch search(D, D2, visit);
        candidates.for_each([&](std::size_t d1) {
            current_d1 = d1;
            search.run(catalog_[d1]);
        });
    }

private:
    // Positions with b1 = x number D(x, z) per b2 value z, and at most D2(z, y)
    // of those can take b3 = y, so D1(x, y) is bounded by sum_z min(D(x, z), D2(z, y)).
    void narrow_by_reach(const DaveyMatrix & D, const DaveyMatrix & D2, Bitset & candidates) const
    {
        const int p = params_.p;
        const int m = params_.m;
        for (int x = 0; x < p; ++x)
            for (int y = 0; y < p; ++y) {
                int reach = 0;
                for (int z = 0; z < p; ++z)
                    reach += std::min(D(x, z), D2(z, y));
                if (reach < m)
                    candidates &= at_most_[static_cast<std::size_t>((x * p + y) * (m + 1) + reach)];
            }
    }

    PrimeParams params_;
    const DaveyCatalog & catalog_;
    const PruneCache & cache_;
    ZVector b1_;
    std::vector<std::size_t> outer_;
    std::vector<ZVector> b2_;
    std::vector<std::vector<std::size_t>> column_ids_;
    std::vector<std::vector<std::size_t>> row_ids_;
    /// at_most_[(x * p + y) * (m + 1) + t]: catalog matrices with D1(x, y) <= t.
    std::vector<Bitset> at_most_;
};

}  // namespace

std::uint64_t work_unit_count(const DaveyCatalog & catalog)
{
    return outer_indices(catalog).size() * catalog.size();
}

SearchReport run_search(const PrimeParams & params, Shard shard, const DaveyCatalog & catalog,
                        const PruneCache & cache, const SearchOptions & options)
{
    if (!is_prime(params.p) || params.m <= 1 || params.m >= params.p)
        throw InputError("run_search: need prime p and 1 < m < p");
    if (shard.count < 1 || shard.index < 0 || shard.index >= shard.count)
        throw InputError("run_search: invalid shard descriptor");
    if (catalog.prime() != params.p || catalog.weight() != params.m || cache.prime() != params.p
        || cache.weight() != params.m || cache.catalog_size() != catalog.size())
        throw InputError("run_search: catalog or cache built for different parameters");

    const auto start = std::chrono::steady_clock::now();
    const SearchDriver driver(params, catalog, cache);

    const auto total_units = driver.unit_count();
    const auto stride = static_cast<std::uint64_t>(shard.count);
    const auto first = static_cast<std::uint64_t>(shard.index);
    std::uint64_t shard_units = total_units > first ? (total_units - first + stride - 1) / stride : 0;
    if (options.max_units != 0)
        shard_units = std::min(shard_units, options.max_units);

    const int threads = std::max(1, options.threads);
    std::vector<SearchReport> partials(static_cast<std::size_t>(threads));
    std::vector<std::vector<UnitResult>> found(static_cast<std::size_t>(threads));
    std::atomic<std::uint64_t> next{0};
    std::atomic<std::uint64_t> done{0};
    std::atomic<std::uint64_t> triples{0};
    std::mutex progress_mutex;

    auto worker = [&](std::size_t id) {
        auto & report = partials[id];
        for (std::uint64_t j = next++; j < shard_units; j = next++) {
            const auto before = report.triples_tested;
            driver.process(first + j * stride, report, found[id]);
            triples += report.triples_tested - before;
            const auto finished = ++done;
            if (options.progress && options.log_every != 0 && finished % options.log_every == 0) {
                const std::chrono::duration<double> t = std::chrono::steady_clock::now() - start;
                std::lock_guard lock(progress_mutex);
                options.progress({finished, shard_units, triples.load(), t.count()});
            }
        }
    };

    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::jthread> pool;
        for (int t = 0; t < threads; ++t)
            pool.emplace_back(worker, static_cast<std::size_t>(t));
    }

    SearchReport report;
    report.p = params.p;
    report.m = params.m;
    report.davey_count = catalog.size();
    report.threshold = static_cast<std::uint64_t>(params.len() - 1);
    report.shard = shard;
    for (const auto & part : partials)
        merge_into(report, part);

    std::vector<UnitResult> all_found;
    for (auto & f : found)
        all_found.insert(all_found.end(), f.begin(), f.end());
    std::stable_sort(all_found.begin(), all_found.end(),
                     [](const UnitResult & a, const UnitResult & b) { return a.unit < b.unit; });
    for (auto & r : all_found)
        report.counterexamples.push_back(std::move(r.found));

    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    report.elapsed_seconds = elapsed.count();
    return report;
}

SearchReport run_search(const PrimeParams & params, Shard shard, const SearchOptions & options)
{
    if (!is_prime(params.p) || params.m <= 1 || params.m >= params.p)
        throw InputError("run_search: need prime p and 1 < m < p");
    const auto catalog = get_davey_matrices(params.p, params.m);
    const auto cache = calc_cache(params, catalog);
    return run_search(params, shard, catalog, cache, options);
}

}  // namespace fuglede
