#ifndef CELEBNET_CONFIG_HPP
#define CELEBNET_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "celebnet/experiments.hpp"

namespace celebnet {

// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_verification_failed = 1,
    exit_usage = 2,
    exit_resource = 3,
};

// Everything a run needs, resolved from flags and/or a JSON config file
// (flags win). Field names match flag and config-file key names one-to-one.
struct RunConfig {
    std::string command;         // simulate|sweep|verify|adversary|derandomize|oracle
    std::string target;          // verify target: lemma1|lemma2|lemma3|thm4|thm5|thm6|lem4|cor2

    std::string family = "celebrity";  // empty|clique|celebrity
    std::int64_t n = 0;                // 0 = derive from sizing (celebrity family)
    int k = 0;                         // 0 = derive from sizing
    double epsilon = 0.3;
    double delta = 0.1;
    double prior = 0.5;

    std::string order = "uniform";     // uniform|weighted|identity
    std::vector<double> weights;
    std::string policy = "paper";      // paper|exact
    int j_threshold = 0;               // 0 = derive from sizing
    int enum_cap = 20;

    std::int64_t trials = 100;
    std::optional<std::uint64_t> seed;
    double confidence = 0.95;
    int workers = 0;
    bool ladder = false;
    std::int64_t mc_samples = 100000;
    std::int64_t budget = 0;           // adversary evaluations; 0 = auto
    int samples = 50;                  // derandomize relabeling samples
    std::int64_t trials_per_sample = 50;
    std::int64_t n_override = 0;
    std::vector<std::int64_t> populations;  // sweep

    bool trace = false;
    std::string trace_out;
    std::string csv_out;
    std::string json_out;
    std::string plot_dir;
    std::string graph_in;   // graph JSON to load instead of family/n/k
    std::string graph_out;  // write the constructed graph as JSON

    bool operator==(const RunConfig&) const = default;

    // Validates the cross-field constraints shared by all commands; the
    // command handlers check their own requirements on top.
    void validate() const;
};

// Applies one config-file key. Unknown keys and wrongly-typed values raise
// ParameterError.
void apply_config_key(RunConfig& cfg, const std::string& key, const nlohmann::json& value);

// Full-document versions (round-trip: from_json(to_json(cfg)) == cfg).
nlohmann::ordered_json run_config_to_json(const RunConfig& cfg);
RunConfig run_config_from_json(const nlohmann::json& doc);

// Formatting helpers shared by every emitter (12 significant digits).
std::string format_double(double v);
std::string csv_field(const std::string& raw);  // RFC 4180 quoting
std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows);

void write_file(const std::string& path, const std::string& content);

// Executes a fully-parsed config; returns the process exit code. Output
// stream defaults to stdout.
int run_command(const RunConfig& cfg);

// Full command-line entry point (parse + dispatch + error mapping).
int cli_main(int argc, const char* const* argv);

}  // namespace celebnet

#endif
