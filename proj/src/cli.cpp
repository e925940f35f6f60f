#include "fuglede/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fuglede {

using nlohmann::json;

namespace {

Shard parse_shard(const std::string & text)
{
    const auto slash = text.find('/');
    if (slash == std::string::npos)
        throw UsageError("--shard: expected K/N, got \"" + text + "\"");
    try {
        std::size_t used_k = 0;
        std::size_t used_n = 0;
        const auto k_text = text.substr(0, slash);
        const auto n_text = text.substr(slash + 1);
        const int k = std::stoi(k_text, &used_k);
        const int n = std::stoi(n_text, &used_n);
        if (used_k != k_text.size() || used_n != n_text.size())
            throw std::invalid_argument("trailing characters");
        if (n < 1 || k < 0 || k >= n)
            throw UsageError("--shard: need 0 <= K < N, got \"" + text + "\"");
        return {k, n};
    } catch (const std::logic_error &) {
        throw UsageError("--shard: expected K/N, got \"" + text + "\"");
    }
}

}  // namespace

RunConfig parse_args(int argc, const char * const * argv)
{
    RunConfig config;
    std::string shard_text = "0/1";
    std::string cache_path;
    std::string catalog_path;

    CLI::App app{"Exhaustive search for rank-3 special dephased log-Hadamard matrices over Z_p"};
    app.add_option("--prime", config.prime, "Prime modulus p")->required();
    app.add_option("--weight", config.weights, "Weight m with 1 < m < p (repeatable; default all)");
    app.add_option("--threads", config.threads, "Worker threads")->capture_default_str();
    app.add_option("--shard", shard_text, "Shard K/N: process work units u with u mod N == K")->capture_default_str();
    app.add_option("--cache", cache_path, "Prune cache file (loaded if present, else built and saved)");
    app.add_option("--catalog", catalog_path, "Davey catalog file (loaded if present, else built and saved)");
    app.add_option("--report", config.report_path, "Report output path (default: standard output)");
    app.add_option("--log-every", config.log_every, "Progress line every U work units (0 = off)")->capture_default_str();
    app.add_option("--max-units", config.max_units, "Stop after U work units of the shard (partial run)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp &) {
        throw HelpRequested(app.help());
    } catch (const CLI::ParseError & e) {
        throw UsageError(e.what());
    }

    if (!is_prime(config.prime))
        throw UsageError("--prime: " + std::to_string(config.prime) + " is not prime");
    if (config.prime < 3 || config.prime > kMaxPrime)
        throw UsageError("--prime: supported range is 3.." + std::to_string(kMaxPrime));
    if (config.weights.empty())
        for (int m = 2; m < config.prime; ++m)
            config.weights.push_back(m);
    for (int m : config.weights)
        if (m <= 1 || m >= config.prime)
            throw UsageError("--weight: " + std::to_string(m) + " is outside (1, " + std::to_string(config.prime) + ")");
    std::sort(config.weights.begin(), config.weights.end());
    config.weights.erase(std::unique(config.weights.begin(), config.weights.end()), config.weights.end());
    if (config.threads < 1)
        throw UsageError("--threads: must be at least 1");
    config.shard = parse_shard(shard_text);
    if (!cache_path.empty())
        config.cache_path = cache_path;
    if (!catalog_path.empty())
        config.catalog_path = catalog_path;
    return config;
}

std::string verdict_of(const WeightOutcome & outcome)
{
    if (!outcome.report.counterexamples.empty())
        return kVerdictCounterexample;
    if (!outcome.complete || outcome.report.shard.count > 1)
        return kVerdictPartial;
    return kVerdictVerified;
}

namespace {

json vector_json(const ZVector & v)
{
    return json(std::vector<int>(v.begin(), v.end()));
}

ZVector vector_from_json(const json & j)
{
    ZVector out;
    for (int x : j.get<std::vector<int>>())
        out.push_back(static_cast<Residue>(x));
    return out;
}

json counterexample_json(const Counterexample & c)
{
    json lambda = json::array();
    for (const auto & t : c.lambda)
        lambda.push_back({t.l1, t.l2, t.l3});
    json matrix = json::array();
    for (const auto & row : c.matrix)
        matrix.push_back(vector_json(row));
    return {
        {"b1", vector_json(c.context.b1)},
        {"b2", vector_json(c.context.b2)},
        {"b3", vector_json(c.context.b3)},
        {"D", serialize_davey(c.context.D)},
        {"D1", serialize_davey(c.context.D1)},
        {"D2", serialize_davey(c.context.D2)},
        {"lambda", lambda},
        {"matrix", matrix},
    };
}

Counterexample counterexample_from_json(const json & j)
{
    Counterexample c;
    c.context = {vector_from_json(j.at("b1")),
                 vector_from_json(j.at("b2")),
                 vector_from_json(j.at("b3")),
                 deserialize_davey(j.at("D").get<std::string>()),
                 deserialize_davey(j.at("D1").get<std::string>()),
                 deserialize_davey(j.at("D2").get<std::string>())};
    for (const auto & t : j.at("lambda"))
        c.lambda.push_back({t.at(0).get<Residue>(), t.at(1).get<Residue>(), t.at(2).get<Residue>()});
    for (const auto & row : j.at("matrix"))
        c.matrix.push_back(vector_from_json(row));
    return c;
}

json weight_json(const WeightOutcome & outcome)
{
    const auto & r = outcome.report;
    json counterexamples = json::array();
    for (const auto & c : r.counterexamples)
        counterexamples.push_back(counterexample_json(c));
    return {
        {"prime", r.p},
        {"weight", r.m},
        {"davey_count", r.davey_count},
        {"outer_matrices_examined", r.outer_matrices_examined},
        {"d2_pairs_examined", r.d2_pairs_examined},
        {"d1_candidates_after_filter", r.d1_candidates_after_filter},
        {"b3_vectors_tested", r.b3_vectors_tested},
        {"triples_tested", r.triples_tested},
        {"max_reduced_set_size", r.max_reduced_set_size},
        {"threshold", r.threshold},
        {"clique_fallback_invocations", r.clique_fallback_invocations},
        {"counterexamples", counterexamples},
        {"elapsed_seconds", r.elapsed_seconds},
        {"shard", std::to_string(r.shard.index) + "/" + std::to_string(r.shard.count)},
        {"complete", outcome.complete},
        {"verdict", verdict_of(outcome)},
    };
}

WeightOutcome weight_from_json(const json & j)
{
    WeightOutcome out;
    auto & r = out.report;
    r.p = j.at("prime").get<int>();
    r.m = j.at("weight").get<int>();
    r.davey_count = j.at("davey_count").get<std::uint64_t>();
    r.outer_matrices_examined = j.at("outer_matrices_examined").get<std::uint64_t>();
    r.d2_pairs_examined = j.at("d2_pairs_examined").get<std::uint64_t>();
    r.d1_candidates_after_filter = j.at("d1_candidates_after_filter").get<std::uint64_t>();
    r.b3_vectors_tested = j.at("b3_vectors_tested").get<std::uint64_t>();
    r.triples_tested = j.at("triples_tested").get<std::uint64_t>();
    r.max_reduced_set_size = j.at("max_reduced_set_size").get<std::uint64_t>();
    r.threshold = j.at("threshold").get<std::uint64_t>();
    r.clique_fallback_invocations = j.at("clique_fallback_invocations").get<std::uint64_t>();
    for (const auto & c : j.at("counterexamples"))
        r.counterexamples.push_back(counterexample_from_json(c));
    r.elapsed_seconds = j.at("elapsed_seconds").get<double>();
    try {
        r.shard = parse_shard(j.at("shard").get<std::string>());
    } catch (const UsageError & e) {
        throw ParseError(std::string("report: ") + e.what());
    }
    out.complete = j.value("complete", true);
    return out;
}

}  // namespace

std::string report_document(int prime, const std::vector<WeightOutcome> & outcomes)
{
    json weights = json::array();
    bool any_counterexample = false;
    bool any_partial = false;
    std::vector<int> covered;
    for (const auto & o : outcomes) {
        weights.push_back(weight_json(o));
        const auto v = verdict_of(o);
        any_counterexample = any_counterexample || v == kVerdictCounterexample;
        any_partial = any_partial || v == kVerdictPartial;
        covered.push_back(o.report.m);
    }
    std::sort(covered.begin(), covered.end());

    std::string verdict = any_counterexample ? kVerdictCounterexample : (any_partial ? kVerdictPartial : kVerdictVerified);
    bool all_weights = static_cast<int>(covered.size()) == prime - 2;
    for (std::size_t k = 0; k < covered.size() && all_weights; ++k)
        all_weights = covered[k] == static_cast<int>(k) + 2;

    json doc = {
        {"prime", prime},
        {"verdict", verdict},
        {"all_weights_covered", all_weights},
        {"weights", weights},
    };
    if (verdict == kVerdictVerified && all_weights)
        doc["conclusion"] = "no rank-3 special dephased log-Hadamard matrix exists for p = " + std::to_string(prime)
                            + ": spectral sets and tiles coincide in Z_" + std::to_string(prime) + "^3";
    return doc.dump(2) + "\n";
}

std::vector<WeightOutcome> parse_report_document(const std::string & text)
{
    try {
        const auto doc = json::parse(text);
        std::vector<WeightOutcome> out;
        for (const auto & w : doc.at("weights"))
            out.push_back(weight_from_json(w));
        return out;
    } catch (const json::exception & e) {
        throw ParseError(std::string("report: ") + e.what());
    }
}

int emit_report(int prime, const std::vector<WeightOutcome> & outcomes, const std::string & path)
{
    const auto text = report_document(prime, outcomes);
    if (path.empty()) {
        std::cout << text << std::flush;
        if (!std::cout)
            return kExitError;
    } else {
        std::ofstream out(path);
        out << text;
        out.close();
        if (!out)
            return kExitError;
    }
    for (const auto & o : outcomes)
        if (!o.report.counterexamples.empty())
            return kExitCounterexample;
    return kExitVerified;
}

std::string path_for_weight(const std::string & path, int weight, bool several_weights)
{
    return several_weights ? path + ".m" + std::to_string(weight) : path;
}

DaveyCatalog load_or_build_catalog(const PrimeParams & params, const std::optional<std::string> & path)
{
    if (path && std::filesystem::exists(*path)) {
        std::ifstream in(*path);
        auto catalog = read_catalog(in);
        if (catalog.prime() != params.p || catalog.weight() != params.m)
            throw ValidationError("catalog " + *path + " was built for different parameters");
        for (const auto & D : catalog)
            if (D(0, 0) == 0)
                throw ValidationError("catalog " + *path + " contains a matrix with D(0,0) = 0");
        return catalog;
    }
    auto catalog = get_davey_matrices(params.p, params.m);
    if (path) {
        std::ofstream out(*path);
        write_catalog(out, catalog);
        if (!out)
            throw std::runtime_error("cannot write catalog " + *path);
    }
    return catalog;
}

PruneCache load_or_build_cache(const PrimeParams & params, const DaveyCatalog & catalog,
                               const std::optional<std::string> & path)
{
    const auto hash = catalog_checksum(catalog);
    if (path && std::filesystem::exists(*path)) {
        std::ifstream in(*path);
        return read_cache(in, catalog, hash);
    }
    auto cache = calc_cache(params, catalog);
    if (path) {
        std::ofstream out(*path);
        write_cache(out, cache, hash);
        if (!out)
            throw std::runtime_error("cannot write cache " + *path);
    }
    return cache;
}

int run_cli(const RunConfig & config, std::ostream & diagnostics)
{
    std::vector<WeightOutcome> outcomes;
    const bool several = config.weights.size() > 1;
    try {
        for (int m : config.weights) {
            const auto params = PrimeParams::make(config.prime, m);
            const auto catalog_path = config.catalog_path
                                          ? std::optional(path_for_weight(*config.catalog_path, m, several))
                                          : std::nullopt;
            const auto cache_path = config.cache_path
                                        ? std::optional(path_for_weight(*config.cache_path, m, several))
                                        : std::nullopt;
            const auto catalog = load_or_build_catalog(params, catalog_path);
            const auto cache = load_or_build_cache(params, catalog, cache_path);

            const auto total = work_unit_count(catalog);
            const auto stride = static_cast<std::uint64_t>(config.shard.count);
            const auto first = static_cast<std::uint64_t>(config.shard.index);
            const auto shard_units = total > first ? (total - first + stride - 1) / stride : 0;
            diagnostics << "[p=" << params.p << " m=" << m << "] catalog " << catalog.size() << " matrices, "
                        << total << " work units, shard " << config.shard.index << "/" << config.shard.count
                        << " owns " << shard_units << std::endl;

            SearchOptions options;
            options.threads = config.threads;
            options.log_every = config.log_every;
            options.max_units = config.max_units;
            options.progress = [&](const SearchProgress & progress) {
                diagnostics << "[p=" << params.p << " m=" << m << "] " << progress.units_done << "/"
                            << progress.units_total << " units, " << progress.triples_tested << " triples, "
                            << progress.elapsed_seconds << " s" << std::endl;
            };

            WeightOutcome outcome;
            outcome.report = run_search(params, config.shard, catalog, cache, options);
            outcome.complete = config.max_units == 0 || config.max_units >= shard_units;
            diagnostics << "[p=" << params.p << " m=" << m << "] " << verdict_of(outcome) << ", max |R| "
                        << outcome.report.max_reduced_set_size << " (threshold " << outcome.report.threshold
                        << "), " << outcome.report.elapsed_seconds << " s" << std::endl;
            outcomes.push_back(std::move(outcome));
        }
    } catch (const std::exception & e) {
        diagnostics << "error: " << e.what() << std::endl;
        return kExitError;
    }
    return emit_report(config.prime, outcomes, config.report_path);
}

}  // namespace fuglede
