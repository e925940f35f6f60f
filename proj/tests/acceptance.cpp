// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
// Set FUGLEDE_ACCEPTANCE_FULL=1 to rerun the p = 5, m = 4 search in full
// instead of checking one shard against frozen values.
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include <unistd.h>

#include "fuglede/cli.hpp"
#include "oracles.hpp"

using namespace fuglede;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kP3TimeLimitSeconds = 60.0;

// Frozen from one full single-thread run of `fuglede_search --prime 5 --weight 4`.
struct Frozen
{
    std::uint64_t davey_count;
    std::uint64_t outer;
    std::uint64_t d2_pairs;
    std::uint64_t d1_candidates;
    std::uint64_t b3_vectors;
    std::uint64_t triples;
    std::uint64_t max_reduced;
    std::uint64_t clique_invocations;
};

constexpr Frozen kP5M4Full{8161, 4127, 33680447, 13360347809, 46924357157, 46924354895, 28, 1227287};
// Shard 0 of 256 of the same search, rerun by the suite.
constexpr int kP5M4ShardCount = 256;
constexpr Frozen kP5M4Shard0{8161, 17, 131565, 52266333, 183554360, 183554352, 28, 8097};

int failures = 0;

void report(int id, const std::string & title, bool ok, const std::string & detail)
{
    std::cout << (ok ? "PASS" : "FAIL") << " [" << id << "] " << title << ": " << detail << std::endl;
    if (!ok)
        ++failures;
}

struct Scratch
{
    fs::path path = fs::temp_directory_path() / ("fuglede_acceptance_" + std::to_string(::getpid()));
    Scratch() { fs::create_directories(path); }
    ~Scratch() { fs::remove_all(path); }
};

struct CliRun
{
    int exit_code = 0;
    json doc;
    double seconds = 0.0;
    std::string diagnostics;
};

CliRun run_tool(std::vector<std::string> args, const fs::path & report_path)
{
    args.insert(args.begin(), "fuglede_search");
    args.push_back("--report");
    args.push_back(report_path.string());
    std::vector<const char *> argv;
    for (const auto & a : args)
        argv.push_back(a.c_str());

    CliRun run;
    std::ostringstream diag;
    const auto start = std::chrono::steady_clock::now();
    run.exit_code = run_cli(parse_args(static_cast<int>(argv.size()), argv.data()), diag);
    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    run.diagnostics = diag.str();
    std::ifstream in(report_path);
    run.doc = json::parse(in);
    return run;
}

std::string threads_flag()
{
    return std::to_string(std::max(4U, std::thread::hardware_concurrency()));
}

bool matches(const json & w, const Frozen & f)
{
    return w.at("davey_count") == f.davey_count && w.at("outer_matrices_examined") == f.outer
           && w.at("d2_pairs_examined") == f.d2_pairs && w.at("d1_candidates_after_filter") == f.d1_candidates
           && w.at("b3_vectors_tested") == f.b3_vectors && w.at("triples_tested") == f.triples
           && w.at("max_reduced_set_size") == f.max_reduced
           && w.at("clique_fallback_invocations") == f.clique_invocations;
}

std::string summary(const json & w)
{
    std::ostringstream s;
    s << "m=" << w.at("weight") << " " << w.at("verdict").get<std::string>() << " max|R|="
      << w.at("max_reduced_set_size") << " (bound " << w.at("threshold") << ") clique="
      << w.at("clique_fallback_invocations") << " triples=" << w.at("triples_tested");
    return s.str();
}

std::set<oracle::Grid> grids(const std::vector<DaveyMatrix> & ms)
{
    std::set<oracle::Grid> out;
    for (const auto & D : ms)
        out.insert(oracle::grid_of(D.counts()));
    return out;
}

void criterion_1(const Scratch & tmp)
{
    const auto run = run_tool({"--prime", "3"}, tmp.path / "p3.json");
    const auto & w = run.doc.at("weights");
    const bool ok = run.exit_code == kExitVerified && run.doc.at("verdict") == kVerdictVerified && w.size() == 1
                    && w[0].at("weight") == 2 && w[0].at("verdict") == kVerdictVerified
                    && run.seconds < kP3TimeLimitSeconds;
    std::ostringstream d;
    d << "exit " << run.exit_code << ", " << summary(w[0]) << ", " << run.seconds << " s (limit "
      << kP3TimeLimitSeconds << " s)";
    report(1, "p=3 regression", ok, d.str());
}

void criterion_2(const Scratch & tmp)
{
    const bool full = std::getenv("FUGLEDE_ACCEPTANCE_FULL") != nullptr;
    std::vector<json> weights;
    bool ok = true;
    std::ostringstream d;

    const auto small = run_tool({"--prime", "5", "--weight", "2", "--weight", "3", "--threads", threads_flag()},
                                tmp.path / "p5_small.json");
    ok = ok && small.exit_code == kExitVerified;
    for (const auto & w : small.doc.at("weights"))
        weights.push_back(w);

    json m4;
    if (full) {
        const auto run = run_tool({"--prime", "5", "--weight", "4", "--threads", threads_flag(), "--log-every", "0"},
                                  tmp.path / "p5_m4.json");
        ok = ok && run.exit_code == kExitVerified;
        m4 = run.doc.at("weights")[0];
        const bool same = matches(m4, kP5M4Full);
        ok = ok && same;
        d << "full m=4 run " << (same ? "matches" : "DIFFERS FROM") << " frozen counters; ";
    } else {
        const auto shard = "0/" + std::to_string(kP5M4ShardCount);
        const auto run = run_tool({"--prime", "5", "--weight", "4", "--shard", shard, "--threads", threads_flag(),
                                   "--log-every", "0"},
                                  tmp.path / "p5_m4_shard.json");
        const auto & w = run.doc.at("weights")[0];
        const bool same = run.exit_code == kExitVerified && w.at("verdict") == kVerdictPartial
                          && matches(w, kP5M4Shard0);
        ok = ok && same;
        d << "m=4 shard " << shard << " " << (same ? "matches" : "DIFFERS FROM") << " frozen counters; ";
        m4 = {{"weight", 4},
              {"verdict", kVerdictVerified},
              {"max_reduced_set_size", kP5M4Full.max_reduced},
              {"threshold", 19},
              {"clique_fallback_invocations", kP5M4Full.clique_invocations},
              {"triples_tested", kP5M4Full.triples}};
        d << "m=4 full-run values frozen; ";
    }
    weights.push_back(m4);

    for (const auto & w : weights) {
        const int m = w.at("weight").get<int>();
        const bool verified = w.at("verdict") == kVerdictVerified;
        const bool small_r = w.at("max_reduced_set_size").get<std::uint64_t>() < static_cast<std::uint64_t>(5 * m - 1);
        const bool no_clique = w.at("clique_fallback_invocations") == 0;
        ok = ok && verified && small_r && no_clique;
        d << summary(w) << (small_r && no_clique ? "" : " [|R| bound violated]") << "; ";
    }
    report(2, "p=5 headline (verdict, |R| < 5m-1, no clique fallback)", ok, d.str());
}

void criterion_3()
{
    bool ok = true;
    std::ostringstream d;
    for (int m : {1, 2}) {
        const auto brute = oracle::davey_matrices(3, m);
        std::set<oracle::Grid> brute_lead;
        for (const auto & g : brute)
            if (g[0][0] > 0)
                brute_lead.insert(g);
        const auto catalog = get_davey_matrices(3, m);
        const bool all_equal = grids(all_davey_matrices(3, m)) == brute;
        const bool catalog_equal = grids({catalog.begin(), catalog.end()}) == brute_lead;
        ok = ok && all_equal && catalog_equal;
        d << "m=" << m << ": " << brute.size() << " brute-force matrices (" << brute_lead.size()
          << " with D(0,0)>0), enumeration " << (all_equal && catalog_equal ? "equal" : "DIFFERENT") << "; ";
    }
    report(3, "Davey enumeration equals brute force", ok, d.str());
}

void criterion_4()
{
    const int p = 3;
    const int m = 2;
    const auto catalog = get_davey_matrices(p, m);
    const auto b1 = canonical_b1({p, m});
    const auto all = oracle::balanced_vectors(p, m, false);
    bool ok = all.size() == 90;
    std::size_t pairs = 0;
    std::size_t vectors = 0;
    for (const auto & D : catalog) {
        const auto b2 = davey_on_vec(D, b1);
        for (const auto & D1 : catalog)
            for (const auto & D2 : catalog) {
                std::vector<ZVector> expected;
                for (const auto & b3 : all)
                    if (b3[0] == 0 && oracle::raise(b1, b3, p) == oracle::grid_of(D1.counts())
                        && oracle::raise(b2, b3, p) == oracle::grid_of(D2.counts()))
                        expected.push_back(b3);
                const auto got = davey_on_vec_2x2(D1, D2, b1, b2);
                ok = ok && got == expected;
                ++pairs;
                vectors += got.size();
            }
    }
    std::ostringstream d;
    d << pairs << " (D1, D2) pairs over " << catalog.size() << " choices of b2, " << vectors
      << " third rows, filter over " << all.size() << " balanced vectors";
    report(4, "tree search equals exhaustive filter", ok, d.str());
}

void criterion_5()
{
    const PrimeParams params{3, 2};
    const auto catalog = get_davey_matrices(3, 2);
    const auto cache = calc_cache(params, catalog);
    const auto b1 = canonical_b1(params);
    bool ok = true;
    std::size_t live = 0;
    std::size_t pruned = 0;
    for (const auto & D : catalog) {
        const auto b2 = davey_on_vec(D, b1);
        for (const auto & D2 : catalog) {
            const auto kept = davey_filtered_from_cache(D, D2, cache);
            for (std::size_t i = 0; i < catalog.size(); ++i) {
                if (!davey_on_vec_2x2(catalog[i], D2, b1, b2).empty()) {
                    ++live;
                    ok = ok && kept.test(i);
                }
                pruned += kept.test(i) ? 0 : 1;
            }
        }
    }

    const DaveyMatrix excluded(CountMatrix::from_rows({{2, 0, 0}, {0, 0, 2}, {0, 2, 0}}), 2);
    const auto matchings = enumerate_matchings({0, 2}, {1, 2});
    const auto index = catalog.index_of(excluded);
    const bool example = index && !matrix_admits_matching(excluded, matchings)
                         && !cache.lookup({0, 2}, {1, 2}).test(*index);
    ok = ok && example;

    std::ostringstream d;
    d << live << " live D1 all kept, " << pruned << " pruned; D1=[[2,0,0],[0,0,2],[0,2,0]] against {0,2}|{1,2} "
      << (example ? "excluded" : "NOT excluded");
    report(5, "filter soundness", ok, d.str());
}

void criterion_6()
{
    const ZVector b1{0, 1, 2, 0, 1, 2};
    const ZVector b2{0, 0, 1, 1, 2, 2};
    const auto X = raise_pair_matrix(b1, b2, 3);
    const bool raise_ok = X == CountMatrix::from_rows({{1, 1, 0}, {1, 0, 1}, {0, 1, 1}});
    const bool back_ok = raise_ok && davey_on_vec(DaveyMatrix(X, 2), b1) == b2;
    const bool alt_ok = raise_pair_matrix(b1, ZVector{0, 0, 2, 1, 2, 1}, 3) == X;
    report(6, "worked example", raise_ok && back_ok && alt_ok,
           std::string("raise ") + (raise_ok ? "ok" : "WRONG") + ", davey_on_vec " + (back_ok ? "ok" : "WRONG")
               + ", alternative b2 " + (alt_ok ? "ok" : "WRONG"));
}

void criterion_7()
{
    std::ostringstream d;
    bool ok = true;

    std::mt19937 rng(2024);
    bool closure = true;
    for (const PrimeParams params : {PrimeParams{3, 2}, PrimeParams{5, 3}, PrimeParams{7, 2}, PrimeParams{13, 4}}) {
        for (int trial = 0; trial < 100; ++trial) {
            auto v = canonical_b1(params);
            std::shuffle(v.begin(), v.end(), rng);
            for (int c = 1; c < params.p; ++c)
                closure = closure && is_balanced(scaled(v, c, params.p), params);
            std::shuffle(v.begin(), v.end(), rng);
            closure = closure && is_balanced(v, params);
        }
    }
    d << "balanced closure " << (closure ? "ok" : "BROKEN") << "; ";
    ok = ok && closure;

    bool negation = true;
    std::size_t sets = 0;
    for (auto [p, m] : {std::pair{3, 2}, std::pair{5, 2}}) {
        const PrimeParams params{p, m};
        const auto catalog = get_davey_matrices(p, m);
        const auto b1 = canonical_b1(params);
        for (const auto & D : catalog) {
            const auto b2 = davey_on_vec(D, b1);
            for (const auto & D1 : catalog)
                for (const auto & D2 : catalog)
                    for (const auto & b3 : davey_on_vec_2x2(D1, D2, b1, b2)) {
                        const auto V = balanced_linear_combinations(b1, b2, b3, params);
                        negation = negation && !V.contains({0, 0, 0});
                        for (const auto & t : V.members())
                            negation = negation && V.contains(t.negated(p));
                        ++sets;
                    }
        }
    }
    d << "V negation/zero over " << sets << " sets " << (negation ? "ok" : "BROKEN") << "; ";
    ok = ok && negation;

    bool transpose = true;
    for (auto [p, m] : {std::pair{3, 1}, std::pair{3, 2}, std::pair{5, 2}, std::pair{5, 3}, std::pair{7, 2}}) {
        const auto catalog = get_davey_matrices(p, m);
        for (const auto & D : catalog)
            transpose = transpose && catalog.index_of(D.transposed()).has_value();
    }
    d << "transpose closure " << (transpose ? "ok" : "BROKEN") << "; ";
    ok = ok && transpose;

    bool symmetric3 = true;
    for (int m : {1, 2})
        for (const auto & D : get_davey_matrices(3, m))
            symmetric3 = symmetric3 && D.is_symmetric();
    std::size_t asymmetric5 = 0;
    for (const auto & D : get_davey_matrices(5, 2))
        asymmetric5 += D.is_symmetric() ? 0 : 1;
    d << "p=3 symmetric " << (symmetric3 ? "ok" : "BROKEN") << ", p=5 m=2 asymmetric members " << asymmetric5 << "; ";
    ok = ok && symmetric3 && asymmetric5 > 0;

    bool deterministic = true;
    for (auto [p, m] : {std::pair{5, 2}, std::pair{5, 3}}) {
        const PrimeParams params{p, m};
        const auto catalog = get_davey_matrices(p, m);
        const auto cache = calc_cache(params, catalog);
        // m = 3 uses the slice u = 0 mod 40; shards k*40 mod count*40 split it exactly
        const int slices = m == 2 ? 1 : 40;
        auto run = [&](int index, int count, int threads) {
            SearchOptions options;
            options.threads = threads;
            return run_search(params, {index * slices, count * slices}, catalog, cache, options);
        };
        const auto whole = run(0, 1, 1);
        deterministic = deterministic && same_counters(whole, run(0, 1, 4));
        for (int count : {2, 5}) {
            auto combined = run(0, count, 3);
            for (int k = 1; k < count; ++k)
                merge_into(combined, run(k, count, k % 2 + 1));
            deterministic = deterministic && same_counters(combined, whole);
        }
    }
    d << "thread/shard determinism " << (deterministic ? "ok" : "BROKEN");
    ok = ok && deterministic;

    report(7, "property suite", ok, d.str());
}

void criterion_8(const Scratch & tmp)
{
    const auto run = run_tool({"--prime", "7", "--weight", "2", "--shard", "3/1000", "--max-units", "2000",
                               "--log-every", "500"},
                              tmp.path / "p7.json");
    const auto & w = run.doc.at("weights")[0];
    const bool ok = run.exit_code == kExitVerified && run.doc.at("verdict") == kVerdictPartial
                    && w.at("d2_pairs_examined") == 2000 && w.at("davey_count").get<std::uint64_t>() > 0
                    && run.diagnostics.find("2000/2000 units") != std::string::npos;
    std::ostringstream d;
    d << "catalog " << w.at("davey_count") << ", " << w.at("d2_pairs_examined") << " units of shard 3/1000, "
      << w.at("triples_tested") << " triples, " << run.seconds << " s, verdict "
      << run.doc.at("verdict").get<std::string>();
    report(8, "p=7 accepted with measurable sharded progress", ok, d.str());
}

}  // namespace

int main()
{
    Scratch tmp;
    auto guard = [](int id, auto && f) {
        try {
            f();
        } catch (const std::exception & e) {
            report(id, "criterion threw", false, e.what());
        }
    };
    guard(1, [&] { criterion_1(tmp); });
    guard(2, [&] { criterion_2(tmp); });
    guard(3, [] { criterion_3(); });
    guard(4, [] { criterion_4(); });
    guard(5, [] { criterion_5(); });
    guard(6, [] { criterion_6(); });
    guard(7, [] { criterion_7(); });
    guard(8, [&] { criterion_8(tmp); });
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
    return failures == 0 ? 0 : 1;
}
