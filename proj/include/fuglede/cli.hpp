#ifndef FUGLEDE_CLI_HPP
#define FUGLEDE_CLI_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fuglede/search.hpp"

namespace fuglede {

class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig
{
    int prime = 0;
    std::vector<int> weights;
    int threads = 1;
    Shard shard;
    std::optional<std::string> cache_path;
    std::optional<std::string> catalog_path;
    /// Empty means standard output.
    std::string report_path;
    std::uint64_t log_every = 1000;
    /// 0 = run the whole shard.
    std::uint64_t max_units = 0;
};

/// Thrown by parse_args for --help; the message is the help text.
class HelpRequested : public UsageError
{
public:
    using UsageError::UsageError;
};

/// Throws UsageError naming the offending flag.
RunConfig parse_args(int argc, const char * const * argv);

enum ExitCode : int
{
    kExitVerified = 0,
    kExitError = 1,
    kExitCounterexample = 2,
};

inline constexpr const char * kVerdictVerified = "verified-no-counterexample";
inline constexpr const char * kVerdictCounterexample = "counterexample-found";
inline constexpr const char * kVerdictPartial = "partial-shard";

/// One finished weight together with whether its shard covered every work unit.
struct WeightOutcome
{
    SearchReport report;
    bool complete = true;
};

std::string verdict_of(const WeightOutcome & outcome);

/// Serializes to the report document; see README for the field list.
std::string report_document(int prime, const std::vector<WeightOutcome> & outcomes);

/// Parses a report document back into its per-weight outcomes.
std::vector<WeightOutcome> parse_report_document(const std::string & text);

/// Writes the document (to stdout when path is empty) and returns the exit code:
/// 2 if any weight found a verified counterexample, 1 if writing failed, else 0.
int emit_report(int prime, const std::vector<WeightOutcome> & outcomes, const std::string & path);

/// Loads the catalog from path if it exists (validating it), otherwise builds and saves it.
DaveyCatalog load_or_build_catalog(const PrimeParams & params, const std::optional<std::string> & path);

/// Loads the cache if it exists and its checksum matches the catalog, otherwise builds and saves it.
PruneCache load_or_build_cache(const PrimeParams & params, const DaveyCatalog & catalog,
                               const std::optional<std::string> & path);

/// Per-weight file name when one path serves several weights: "<path>.m<weight>".
std::string path_for_weight(const std::string & path, int weight, bool several_weights);

/// Runs every configured weight and emits the report; returns the process exit code.
int run_cli(const RunConfig & config, std::ostream & diagnostics);

}  // namespace fuglede

#endif  // FUGLEDE_CLI_HPP
