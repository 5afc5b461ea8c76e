#include "celebnet/config.hpp"

#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include <CLI11.hpp>

namespace celebnet {

// ---------------------------------------------------------------------------
// RunConfig validation and (de)serialization
// ---------------------------------------------------------------------------

void RunConfig::validate() const {
    static const std::set<std::string> commands{"simulate", "sweep",       "verify",
                                                "adversary", "derandomize", "oracle"};
    if (!commands.count(command)) throw ParameterError("unknown command: " + command);
    if (command == "verify") {
        static const std::set<std::string> targets{"lemma1", "lemma2", "lemma3", "thm4",
                                                   "thm5",   "thm6",   "lem4",   "cor2"};
        if (!targets.count(target)) throw ParameterError("unknown verify target: " + target);
    }
    if (family != "empty" && family != "clique" && family != "celebrity")
        throw ParameterError("family must be empty|clique|celebrity, got " + family);
    if (n < 0) throw ParameterError("n must be >= 0 (0 = derive from sizing)");
    if (k < 0) throw ParameterError("k must be >= 0 (0 = derive from sizing)");
    if (!(delta > 0.0) || !(delta <= 0.5))
        throw ParameterError("delta must be in (0, 0.5], got " + std::to_string(delta));
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw ParameterError("epsilon must be in (0, 1); note the sizing clamp epsilon <= 0.5 - "
                             "delta is applied downstream");
    if (!(prior > 0.0) || !(prior < 1.0)) throw ParameterError("prior must be in (0, 1)");
    if (order != "uniform" && order != "weighted" && order != "identity")
        throw ParameterError("order must be uniform|weighted|identity, got " + order);
    if (order == "weighted") {
        if (weights.empty()) throw ParameterError("weighted order needs --weights");
        for (double w : weights)
            if (!(w > 0.0)) throw ParameterError("weights must be strictly positive");
    }
    if (policy != "paper" && policy != "exact")
        throw ParameterError("policy must be paper|exact, got " + policy);
    if (j_threshold < 0) throw ParameterError("j-threshold must be >= 0");
    if (enum_cap < 1) throw ParameterError("enum-cap must be >= 1");
    if (trials < 1) throw ParameterError("trials must be >= 1");
    if (!(confidence > 0.0) || !(confidence < 1.0))
        throw ParameterError("confidence must be in (0, 1)");
    if (workers < 0) throw ParameterError("workers must be >= 0");
    if (mc_samples < 0) throw ParameterError("mc-samples must be >= 0");
    if (budget < 0) throw ParameterError("budget must be >= 0 (0 = auto)");
    if (samples < 1) throw ParameterError("samples must be >= 1");
    if (trials_per_sample < 1) throw ParameterError("trials-per-sample must be >= 1");
    if (n_override < 0) throw ParameterError("n-override must be >= 0");
}

namespace {

template <typename T>
T get_typed(const nlohmann::json& value, const std::string& key) {
    try {
        return value.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ParameterError("config key \"" + key + "\" has the wrong type: " + value.dump());
    }
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key, const nlohmann::json& value) {
    if (key == "command") cfg.command = get_typed<std::string>(value, key);
    else if (key == "target") cfg.target = get_typed<std::string>(value, key);
    else if (key == "family") cfg.family = get_typed<std::string>(value, key);
    else if (key == "n") cfg.n = get_typed<std::int64_t>(value, key);
    else if (key == "k") cfg.k = get_typed<int>(value, key);
    else if (key == "epsilon") cfg.epsilon = get_typed<double>(value, key);
    else if (key == "delta") cfg.delta = get_typed<double>(value, key);
    else if (key == "prior") cfg.prior = get_typed<double>(value, key);
    else if (key == "order") cfg.order = get_typed<std::string>(value, key);
    else if (key == "weights") cfg.weights = get_typed<std::vector<double>>(value, key);
    else if (key == "policy") cfg.policy = get_typed<std::string>(value, key);
    else if (key == "j-threshold") cfg.j_threshold = get_typed<int>(value, key);
    else if (key == "enum-cap") cfg.enum_cap = get_typed<int>(value, key);
    else if (key == "trials") cfg.trials = get_typed<std::int64_t>(value, key);
    else if (key == "seed") cfg.seed = get_typed<std::uint64_t>(value, key);
    else if (key == "confidence") cfg.confidence = get_typed<double>(value, key);
    else if (key == "workers") cfg.workers = get_typed<int>(value, key);
    else if (key == "ladder") cfg.ladder = get_typed<bool>(value, key);
    else if (key == "mc-samples") cfg.mc_samples = get_typed<std::int64_t>(value, key);
    else if (key == "budget") cfg.budget = get_typed<std::int64_t>(value, key);
    else if (key == "samples") cfg.samples = get_typed<int>(value, key);
    else if (key == "trials-per-sample")
        cfg.trials_per_sample = get_typed<std::int64_t>(value, key);
    else if (key == "n-override") cfg.n_override = get_typed<std::int64_t>(value, key);
    else if (key == "populations")
        cfg.populations = get_typed<std::vector<std::int64_t>>(value, key);
    else if (key == "trace") cfg.trace = get_typed<bool>(value, key);
    else if (key == "trace-out") cfg.trace_out = get_typed<std::string>(value, key);
    else if (key == "csv-out") cfg.csv_out = get_typed<std::string>(value, key);
    else if (key == "json-out") cfg.json_out = get_typed<std::string>(value, key);
    else if (key == "plot-dir") cfg.plot_dir = get_typed<std::string>(value, key);
    else if (key == "graph-in") cfg.graph_in = get_typed<std::string>(value, key);
    else if (key == "graph-out") cfg.graph_out = get_typed<std::string>(value, key);
    else throw ParameterError("unknown config key: \"" + key + "\"");
}

nlohmann::ordered_json run_config_to_json(const RunConfig& cfg) {
    nlohmann::ordered_json doc;
    doc["command"] = cfg.command;
    doc["target"] = cfg.target;
    doc["family"] = cfg.family;
    doc["n"] = cfg.n;
    doc["k"] = cfg.k;
    doc["epsilon"] = cfg.epsilon;
    doc["delta"] = cfg.delta;
    doc["prior"] = cfg.prior;
    doc["order"] = cfg.order;
    doc["weights"] = cfg.weights;
    doc["policy"] = cfg.policy;
    doc["j-threshold"] = cfg.j_threshold;
    doc["enum-cap"] = cfg.enum_cap;
    doc["trials"] = cfg.trials;
    if (cfg.seed) doc["seed"] = *cfg.seed;
    doc["confidence"] = cfg.confidence;
    doc["workers"] = cfg.workers;
    doc["ladder"] = cfg.ladder;
    doc["mc-samples"] = cfg.mc_samples;
    doc["budget"] = cfg.budget;
    doc["samples"] = cfg.samples;
    doc["trials-per-sample"] = cfg.trials_per_sample;
    doc["n-override"] = cfg.n_override;
    doc["populations"] = cfg.populations;
    doc["trace"] = cfg.trace;
    doc["trace-out"] = cfg.trace_out;
    doc["csv-out"] = cfg.csv_out;
    doc["json-out"] = cfg.json_out;
    doc["plot-dir"] = cfg.plot_dir;
    doc["graph-in"] = cfg.graph_in;
    doc["graph-out"] = cfg.graph_out;
    return doc;
}

RunConfig run_config_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParameterError("config document must be a JSON object");
    RunConfig cfg;
    for (const auto& [key, value] : doc.items()) apply_config_key(cfg, key, value);
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Emission helpers
// ---------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string csv_field(const std::string& raw) {
    if (raw.find_first_of(",\"\n\r") == std::string::npos) return raw;
    std::string quoted = "\"";
    for (char c : raw) {
        quoted += c;
        if (c == '"') quoted += '"';
    }
    quoted += '"';
    return quoted;
}

std::string sweep_rows_to_csv(const std::vector<SweepRow>& rows) {
    std::string out = "epsilon,delta,n,k,j,trials,mean_fraction,ci_lo,ci_hi,seed\n";
    for (const auto& r : rows) {
        out += format_double(r.epsilon) + "," + format_double(r.delta) + "," +
               std::to_string(r.n) + "," + std::to_string(r.k) + "," + std::to_string(r.j) +
               "," + std::to_string(r.trials) + "," + format_double(r.mean_fraction) + "," +
               format_double(r.ci_lo) + "," + format_double(r.ci_hi) + "," +
               std::to_string(r.seed) + "\n";
    }
    return out;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << content;
    if (!out) throw IoError("write failed: " + path);
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

const char* role_name(Role r) {
    switch (r) {
        case Role::celebrity: return "celebrity";
        case Role::commoner: return "commoner";
        case Role::plain: return "plain";
    }
    return "?";
}

std::uint64_t resolve_seed(const RunConfig& cfg) {
    if (cfg.seed) return *cfg.seed;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

// ---------------------------------------------------------------------------
// Shared run pieces
// ---------------------------------------------------------------------------

constexpr std::int64_t kMaxPopulation = 20'000'000;

struct ResolvedRun {
    ObservationGraph graph = ObservationGraph::empty(1);
    Challenge challenge;
    Policy policy;
    OrderModel order_model;
    std::optional<GraphSizing> sizing_used;
    int j_effective = 0;
};

ResolvedRun resolve_run(const RunConfig& cfg) {
    ResolvedRun run;

    std::int64_t n = cfg.n;
    int k = cfg.k;
    if (!cfg.graph_in.empty()) {
        run.graph = ObservationGraph::from_json(nlohmann::json::parse(read_file(cfg.graph_in)));
        n = run.graph.num_agents();
        k = run.graph.num_celebrities();
    } else if (cfg.family == "celebrity") {
        const GraphSizing s = sizing(cfg.epsilon, cfg.delta);
        run.sizing_used = s;
        if (n == 0) n = s.sufficient_population;
        if (k == 0) k = s.num_celebrities;
        if (n > kMaxPopulation)
            throw ResourceError("population " + std::to_string(n) + " exceeds the memory budget");
        run.graph = ObservationGraph::celebrity(static_cast<int>(n), k);
    } else {
        if (n < 1)
            throw ParameterError("n is required for family \"" + cfg.family + "\"");
        run.graph =
            cfg.family == "empty" ? ObservationGraph::empty(static_cast<int>(n))
                                  : ObservationGraph::clique(static_cast<int>(n));
    }

    run.challenge.num_agents = static_cast<int>(n);
    run.challenge.delta = cfg.delta;
    run.challenge.prior_one = cfg.prior;

    if (cfg.policy == "paper") {
        run.j_effective = cfg.j_threshold > 0
                              ? cfg.j_threshold
                              : (run.sizing_used ? run.sizing_used->guinea_pig_threshold : 1);
        run.policy = Policy::paper(run.j_effective);
    } else {
        run.policy = Policy::exact(cfg.enum_cap);
    }

    if (cfg.order == "uniform") {
        run.order_model = OrderModel::uniform();
    } else if (cfg.order == "identity") {
        run.order_model = OrderModel::fixed(ArrivalOrder::identity(static_cast<int>(n)));
    } else {
        if (static_cast<std::int64_t>(cfg.weights.size()) != n)
            throw ParameterError("weights must list exactly n = " + std::to_string(n) +
                                 " values");
        run.order_model = OrderModel::weighted(cfg.weights);
    }
    return run;
}

void emit_outputs(const RunConfig& cfg, const Report& report, const std::vector<SweepRow>& rows) {
    std::cout << report.to_text();
    if (!cfg.json_out.empty()) write_file(cfg.json_out, report.to_json().dump(2) + "\n");
    if (!cfg.csv_out.empty()) write_file(cfg.csv_out, sweep_rows_to_csv(rows));
    if (!cfg.plot_dir.empty() && !rows.empty()) {
        std::string mean_series, lo_series, hi_series;
        for (const auto& r : rows) {
            mean_series += std::to_string(r.n) + "," + format_double(r.mean_fraction) + "\n";
            lo_series += std::to_string(r.n) + "," + format_double(r.ci_lo) + "\n";
            hi_series += std::to_string(r.n) + "," + format_double(r.ci_hi) + "\n";
        }
        write_file(cfg.plot_dir + "/fraction_vs_n.xy", mean_series);
        write_file(cfg.plot_dir + "/ci_lo_vs_n.xy", lo_series);
        write_file(cfg.plot_dir + "/ci_hi_vs_n.xy", hi_series);
    }
}

// Mirrors estimate_fraction's per-trial seed derivation while also writing a
// JSONL trace, so traced and untraced runs of the same seed agree.
EstimateResult traced_estimate(const ResolvedRun& run, std::int64_t trials, std::uint64_t seed,
                               double confidence, const std::string& trace_path) {
    std::ofstream trace_file(trace_path, std::ios::binary);
    if (!trace_file) throw IoError("cannot open for writing: " + trace_path);

    EstimateResult r;
    r.trials = trials;
    r.seed = seed;
    r.confidence = confidence;
    const int n = run.graph.num_agents();
    std::vector<double> fractions;
    fractions.reserve(static_cast<std::size_t>(trials));

    for (std::int64_t i = 0; i < trials; ++i) {
        const std::uint64_t tseed = derive_seed(seed, static_cast<std::uint64_t>(i));
        const ArrivalOrder order = run.order_model.kind == OrderModelKind::fixed
                                       ? run.order_model.fixed_order
                                       : run.order_model.sample(n, derive_seed(tseed, 1));
        TraceSink sink = [&](const TraceRecord& rec) {
            nlohmann::ordered_json line{{"trial", i},           {"t", rec.t},
                                        {"agent", rec.agent},   {"role", role_name(rec.role)},
                                        {"signal", rec.signal}, {"observed_votes", rec.observed_votes},
                                        {"action", rec.action}};
            trace_file << line.dump() << "\n";
        };
        const TrialOutcome outcome = run_trial(run.challenge, run.graph, order, run.policy,
                                               derive_seed(tseed, 2), false, &sink);
        r.successes += outcome.optimal_count;
        fractions.push_back(outcome.fraction);
    }
    r.observations = trials * n;
    r.mean_fraction = static_cast<double>(r.successes) / static_cast<double>(r.observations);
    const WilsonInterval ci = wilson_interval(r.successes, r.observations, confidence);
    r.ci_lower = ci.lower;
    r.ci_upper = ci.upper;
    if (trials >= 2) {
        double ss = 0.0;
        for (double f : fractions) ss += (f - r.mean_fraction) * (f - r.mean_fraction);
        r.trial_std = std::sqrt(ss / static_cast<double>(trials - 1));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_simulate(const RunConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    std::cout << "seed " << seed << "\n";
    const ResolvedRun run = resolve_run(cfg);

    if (!cfg.graph_out.empty())
        write_file(cfg.graph_out, run.graph.to_json().dump(2) + "\n");

    EstimateResult est;
    if (cfg.trace) {
        if (cfg.trace_out.empty()) throw ParameterError("--trace needs --trace-out");
        est = traced_estimate(run, cfg.trials, seed, cfg.confidence, cfg.trace_out);
    } else {
        est = estimate_fraction(run.challenge, run.graph, run.order_model, run.policy,
                                cfg.trials, seed, cfg.confidence, cfg.workers);
    }

    Report report;
    report.title = "simulate: mean optimal-action fraction";
    report.data["family"] = family_name(run.graph.family());
    report.data["n"] = run.graph.num_agents();
    report.data["k"] = run.graph.num_celebrities();
    report.data["delta"] = cfg.delta;
    report.data["prior"] = cfg.prior;
    report.data["order"] = cfg.order;
    report.data["policy"] = cfg.policy;
    if (cfg.policy == "paper") report.data["j_threshold"] = run.j_effective;
    if (run.sizing_used) {
        report.data["epsilon"] = run.sizing_used->epsilon;
        report.data["sizing"] = {{"j", run.sizing_used->guinea_pig_threshold},
                                 {"k", run.sizing_used->num_celebrities},
                                 {"n_hat", run.sizing_used->sufficient_population}};
    }
    report.data["estimate"] = est.to_json();
    report.data["seed_ledger"] = {{"root", seed}};

    const std::vector<SweepRow> rows{{run.sizing_used ? run.sizing_used->epsilon : 0.0,
                                      cfg.delta, run.graph.num_agents(),
                                      run.graph.num_celebrities(), run.j_effective, cfg.trials,
                                      est.mean_fraction, est.ci_lower, est.ci_upper, seed}};
    emit_outputs(cfg, report, rows);
    return exit_ok;
}

int cmd_sweep(const RunConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    std::cout << "seed " << seed << "\n";
    if (cfg.family != "celebrity")
        throw ParameterError("sweep supports the celebrity family");
    const GraphSizing s = sizing(cfg.epsilon, cfg.delta);

    std::vector<std::int64_t> populations = cfg.populations;
    if (populations.empty()) {
        for (int shift = 3; shift >= 0; --shift) {
            const std::int64_t pop = s.sufficient_population >> shift;
            if (pop > s.num_celebrities + 1) populations.push_back(pop);
        }
    }
    std::sort(populations.begin(), populations.end());

    std::vector<SweepRow> rows;
    Report report;
    report.title = "sweep: fraction vs population (celebrity graph, uniform arrival)";
    report.data["epsilon"] = s.epsilon;
    report.data["delta"] = cfg.delta;
    report.data["k"] = s.num_celebrities;
    report.data["j"] = s.guinea_pig_threshold;
    report.data["trials"] = cfg.trials;
    report.data["seed_ledger"] = {{"root", seed}};

    for (std::size_t i = 0; i < populations.size(); ++i) {
        const std::int64_t n = populations[i];
        if (n <= s.num_celebrities + 1)
            throw ParameterError("population " + std::to_string(n) + " too small for K=" +
                                 std::to_string(s.num_celebrities));
        if (n > kMaxPopulation)
            throw ResourceError("population " + std::to_string(n) + " exceeds the memory budget");
        Challenge challenge;
        challenge.num_agents = static_cast<int>(n);
        challenge.delta = cfg.delta;
        challenge.prior_one = cfg.prior;
        const ObservationGraph graph =
            ObservationGraph::celebrity(static_cast<int>(n), s.num_celebrities);
        const EstimateResult est = estimate_fraction(
            challenge, graph, OrderModel::uniform(), Policy::paper(s.guinea_pig_threshold),
            cfg.trials, derive_seed(seed, i), cfg.confidence, cfg.workers);
        rows.push_back({s.epsilon, cfg.delta, n, s.num_celebrities, s.guinea_pig_threshold,
                        cfg.trials, est.mean_fraction, est.ci_lower, est.ci_upper, est.seed});
    }
    auto rows_json = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        rows_json.push_back({{"n", r.n},
                             {"mean_fraction", r.mean_fraction},
                             {"ci_lo", r.ci_lo},
                             {"ci_hi", r.ci_hi},
                             {"seed", r.seed}});
    }
    report.data["rows"] = rows_json;
    emit_outputs(cfg, report, rows);
    return exit_ok;
}

int cmd_verify(const RunConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    std::cout << "seed " << seed << "\n";

    Report report;
    std::vector<SweepRow> rows;

    if (cfg.target == "lemma1") {
        report = verify_lemma1(cfg.delta, cfg.epsilon);
    } else if (cfg.target == "lemma2") {
        const int j = cfg.j_threshold > 0 ? cfg.j_threshold : 10;
        const int k = cfg.k > 0 ? cfg.k : 5;
        report = verify_lemma2(cfg.epsilon, j, k, cfg.mc_samples, seed, cfg.confidence);
    } else if (cfg.target == "lemma3") {
        const int j = cfg.j_threshold > 0 ? cfg.j_threshold : 10;
        report = verify_lemma3(cfg.epsilon, j, cfg.mc_samples, seed, cfg.confidence);
    } else if (cfg.target == "thm4") {
        Theorem4Options options;
        options.n_override = cfg.n_override;
        options.confidence = cfg.confidence;
        options.workers = cfg.workers;
        options.ladder = cfg.ladder;
        report = verify_theorem4(cfg.epsilon, cfg.delta, cfg.trials, seed, options);
        rows = theorem4_sweep_rows(report);
    } else if (cfg.target == "thm5") {
        // Exact small-n reduction first, then the statistical attack sweep.
        Challenge small;
        small.num_agents = 5;
        small.delta = cfg.delta;
        const Report exact =
            verify_theorem5_small(5, 2, small, Policy::paper(cfg.j_threshold > 0 ? cfg.j_threshold : 1));
        Theorem5Options options;
        options.n_override = cfg.n_override;
        options.trials_per_order = cfg.trials;
        options.confidence = cfg.confidence;
        options.workers = cfg.workers;
        report = verify_theorem5(cfg.epsilon, cfg.delta, seed, options);
        report.data["exact_small_n"] = exact.to_json();
        for (const auto& c : exact.checks)
            report.check("small-n " + c.name, c.pass, c.detail);
    } else if (cfg.target == "thm6") {
        const int n = cfg.n > 0 ? static_cast<int>(cfg.n) : 5000;
        const GraphSizing s = sizing(cfg.epsilon, cfg.delta);
        const int k = cfg.k > 0 ? cfg.k : s.num_celebrities;
        Challenge challenge;
        challenge.num_agents = n;
        challenge.delta = cfg.delta;
        challenge.prior_one = cfg.prior;
        const OrderModel model = cfg.order == "weighted"
                                     ? OrderModel::weighted(cfg.weights)
                                     : OrderModel::uniform();
        const DerandomizeResult result = derandomize_theorem6(
            challenge, n, k, model, Policy::paper(s.guinea_pig_threshold), cfg.samples,
            cfg.trials_per_sample, seed, cfg.confidence, cfg.workers);
        report = result.report;
    } else if (cfg.target == "lem4") {
        const int n = cfg.n > 0 ? static_cast<int>(cfg.n) : 5;
        const int k = cfg.k > 0 ? cfg.k : 2;
        Challenge challenge;
        challenge.num_agents = n;
        challenge.delta = cfg.delta;
        report = verify_lemma4(n, k, challenge,
                               Policy::paper(cfg.j_threshold > 0 ? cfg.j_threshold : 1));
    } else {  // cor2
        const int n = cfg.n > 0 ? static_cast<int>(cfg.n) : 4;
        const int k = cfg.k > 0 ? cfg.k : 1;
        Challenge challenge;
        challenge.num_agents = n;
        challenge.delta = cfg.delta;
        report = corollary2_equivalence(n, k, challenge,
                                        Policy::paper(cfg.j_threshold > 0 ? cfg.j_threshold : 1));
    }

    emit_outputs(cfg, report, rows);
    return report.passed() ? exit_ok : exit_verification_failed;
}

int cmd_adversary(const RunConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    std::cout << "seed " << seed << "\n";
    RunConfig local = cfg;
    if (local.n == 0) throw ParameterError("adversary needs an explicit n");
    const ResolvedRun run = resolve_run(local);

    std::int64_t budget = cfg.budget;
    if (budget == 0) {
        budget = 200;
        if (run.graph.num_agents() <= 8) {
            budget = 1;
            for (int i = 2; i <= run.graph.num_agents(); ++i) budget *= i;
        }
    }
    const AdversaryResult result =
        adversarial_search(run.graph, run.challenge, run.policy, budget, seed);

    Report report;
    report.title = "adversary: arrival order minimizing the expected optimal fraction";
    report.data["family"] = family_name(run.graph.family());
    report.data["n"] = run.graph.num_agents();
    report.data["k"] = run.graph.num_celebrities();
    report.data["delta"] = cfg.delta;
    report.data["policy"] = cfg.policy;
    report.data["budget"] = budget;
    report.data["evaluated"] = result.evaluated;
    report.data["exhaustive"] = result.exhaustive;
    report.data["exact_values"] = result.exact_values;
    report.data["value"] = result.value;
    report.data["order"] = result.order.order;
    report.data["seed_ledger"] = {{"root", seed}};
    emit_outputs(cfg, report, {});
    return exit_ok;
}

int cmd_derandomize(const RunConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    std::cout << "seed " << seed << "\n";
    const int n = cfg.n > 0 ? static_cast<int>(cfg.n) : 5000;
    const GraphSizing s = sizing(cfg.epsilon, cfg.delta);
    const int k = cfg.k > 0 ? cfg.k : s.num_celebrities;
    Challenge challenge;
    challenge.num_agents = n;
    challenge.delta = cfg.delta;
    challenge.prior_one = cfg.prior;
    const OrderModel model =
        cfg.order == "weighted" ? OrderModel::weighted(cfg.weights) : OrderModel::uniform();
    const int j = cfg.j_threshold > 0 ? cfg.j_threshold : s.guinea_pig_threshold;

    DerandomizeResult result =
        derandomize_theorem6(challenge, n, k, model, Policy::paper(j), cfg.samples,
                             cfg.trials_per_sample, seed, cfg.confidence, cfg.workers);
    result.report.data["best_relabeling"] = result.best_relabeling.tau;
    emit_outputs(cfg, result.report, {});
    return result.report.passed() ? exit_ok : exit_verification_failed;
}

int cmd_oracle(const RunConfig& cfg) {
    const std::uint64_t seed = resolve_seed(cfg);
    std::cout << "seed " << seed << "\n";
    RunConfig local = cfg;
    if (local.n == 0) throw ParameterError("oracle needs an explicit n");
    const ResolvedRun run = resolve_run(local);
    const int n = run.graph.num_agents();

    const ArrivalOrder order = cfg.order == "identity"
                                   ? ArrivalOrder::identity(n)
                                   : run.order_model.sample(n, derive_seed(seed, 1));
    const ExactStrategies strategies =
        build_exact_strategies(run.challenge, run.graph, order, n, cfg.enum_cap);

    nlohmann::ordered_json doc;
    doc["family"] = family_name(run.graph.family());
    doc["n"] = n;
    doc["delta"] = cfg.delta;
    doc["order"] = order.order;
    auto positions = nlohmann::ordered_json::array();
    for (int t = 1; t <= n; ++t) {
        const StrategyTable& table = strategies.per_position[static_cast<std::size_t>(t - 1)];
        auto entries = nlohmann::ordered_json::array();
        for (std::size_t key = 0; key < table.action.size(); ++key) {
            if (table.action[key] < 0) continue;  // unreachable
            entries.push_back({{"observed_bits", key >> 1},
                               {"own_signal", key & 1},
                               {"action", table.action[key]},
                               {"posterior", table.posterior[key]}});
        }
        positions.push_back({{"position", t},
                             {"observed_positions", table.observed_positions},
                             {"entries", entries}});
    }
    doc["positions"] = positions;

    std::cout << "oracle: exact strategy tables for " << n << " positions\n";
    if (!cfg.json_out.empty())
        write_file(cfg.json_out, doc.dump(2) + "\n");
    else
        std::cout << doc.dump(2) << "\n";
    return exit_ok;
}

}  // namespace

int run_command(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "verify") return cmd_verify(cfg);
    if (cfg.command == "adversary") return cmd_adversary(cfg);
    if (cfg.command == "derandomize") return cmd_derandomize(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    throw ParameterError("unknown command: " + cfg.command);
}

// ---------------------------------------------------------------------------
// Command line
// ---------------------------------------------------------------------------

namespace {

struct CliState {
    RunConfig cfg;
    std::string config_path;
    std::vector<CLI::Option*> tracked;

    // Which config keys were explicitly set on the command line.
    std::set<std::string> given() const {
        std::set<std::string> keys;
        for (const CLI::Option* opt : tracked)
            if (opt->count() > 0) keys.insert(opt->get_name(false, true).substr(2));
        return keys;
    }
};

void add_common_options(CLI::App* sub, CliState& state) {
    RunConfig& cfg = state.cfg;
    auto track = [&](CLI::Option* opt) { state.tracked.push_back(opt); };

    track(sub->add_option("--config", state.config_path, "JSON config file; flags override"));
    track(sub->add_option("--family", cfg.family, "graph family: empty|clique|celebrity"));
    track(sub->add_option("--n", cfg.n, "agent count (0 = derive from sizing)"));
    track(sub->add_option("--k", cfg.k, "celebrity count (0 = derive from sizing)"));
    track(sub->add_option("--epsilon", cfg.epsilon, "target optimality gap"));
    track(sub->add_option("--delta", cfg.delta, "signal accuracy margin"));
    track(sub->add_option("--prior", cfg.prior, "prior probability of state 1"));
    track(sub->add_option("--order", cfg.order, "arrival model: uniform|weighted|identity"));
    track(sub->add_option("--weights", cfg.weights, "weighted-order weights")->delimiter(','));
    track(sub->add_option("--policy", cfg.policy, "decision policy: paper|exact"));
    track(sub->add_option("--j-threshold", cfg.j_threshold,
                          "guinea-pig threshold J (0 = derive from sizing)"));
    track(sub->add_option("--enum-cap", cfg.enum_cap, "exact-policy predecessor cap"));
    track(sub->add_option("--trials", cfg.trials, "Monte Carlo trials"));
    track(sub->add_option("--seed", cfg.seed, "root seed (absent: drawn from entropy)"));
    track(sub->add_option("--confidence", cfg.confidence, "Wilson interval confidence"));
    track(sub->add_option("--workers", cfg.workers, "worker threads (0 = auto)"));
    track(sub->add_flag("--ladder", cfg.ladder, "also run the N/8..N doubling ladder"));
    track(sub->add_option("--mc-samples", cfg.mc_samples, "Monte Carlo cross-check samples"));
    track(sub->add_option("--budget", cfg.budget, "adversary evaluation budget (0 = auto)"));
    track(sub->add_option("--samples", cfg.samples, "derandomization relabeling samples"));
    track(sub->add_option("--trials-per-sample", cfg.trials_per_sample,
                          "trials per sampled relabeling"));
    track(sub->add_option("--n-override", cfg.n_override, "population override for verifiers"));
    track(sub->add_option("--populations", cfg.populations, "sweep population list")
              ->delimiter(','));
    track(sub->add_flag("--trace", cfg.trace, "write per-arrival trace records"));
    track(sub->add_option("--trace-out", cfg.trace_out, "trace JSONL path"));
    track(sub->add_option("--csv-out", cfg.csv_out, "CSV output path"));
    track(sub->add_option("--json-out", cfg.json_out, "JSON report path"));
    track(sub->add_option("--plot-dir", cfg.plot_dir, "directory for x,y series files"));
    track(sub->add_option("--graph-in", cfg.graph_in, "load graph from JSON document"));
    track(sub->add_option("--graph-out", cfg.graph_out, "write constructed graph as JSON"));
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CliState state;
    CLI::App app{"celebnet: sequential social learning on designed observation networks"};
    app.require_subcommand(1);

    static const char* kCommands[] = {"simulate", "sweep", "adversary", "derandomize", "oracle"};
    for (const char* name : kCommands) {
        CLI::App* sub = app.add_subcommand(name);
        add_common_options(sub, state);
    }
    CLI::App* verify = app.add_subcommand("verify");
    verify->add_option("target", state.cfg.target,
                       "lemma1|lemma2|lemma3|thm4|thm5|thm6|lem4|cor2")
        ->required();
    add_common_options(verify, state);

    try {
        app.parse(argc, argv);
        state.cfg.command = app.get_subcommands().front()->get_name();

        if (!state.config_path.empty()) {
            const nlohmann::json doc = nlohmann::json::parse(read_file(state.config_path));
            if (!doc.is_object()) throw ParameterError("config document must be a JSON object");
            const std::set<std::string> cli_given = state.given();
            for (const auto& [key, value] : doc.items()) {
                if (key == "command" || key == "target" || cli_given.count(key)) continue;
                apply_config_key(state.cfg, key, value);
            }
        }
        return run_command(state.cfg);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        nlohmann::ordered_json err{
            {"error", {{"type", "usage"}, {"message", e.what()}, {"exit_code", exit_usage}}}};
        std::cerr << err.dump() << "\n";
        return exit_usage;
    } catch (const ParameterError& e) {
        nlohmann::ordered_json err{
            {"error", {{"type", "parameter"}, {"message", e.what()}, {"exit_code", exit_usage}}}};
        std::cerr << err.dump() << "\n";
        return exit_usage;
    } catch (const PolicyError& e) {
        nlohmann::ordered_json err{
            {"error", {{"type", "policy"}, {"message", e.what()}, {"exit_code", exit_usage}}}};
        std::cerr << err.dump() << "\n";
        return exit_usage;
    } catch (const ResourceError& e) {
        nlohmann::ordered_json err{{"error",
                                    {{"type", "resource"},
                                     {"message", e.what()},
                                     {"exit_code", exit_resource}}}};
        std::cerr << err.dump() << "\n";
        return exit_resource;
    } catch (const IoError& e) {
        nlohmann::ordered_json err{
            {"error", {{"type", "io"}, {"message", e.what()}, {"exit_code", exit_resource}}}};
        std::cerr << err.dump() << "\n";
        return exit_resource;
    } catch (const nlohmann::json::exception& e) {
        nlohmann::ordered_json err{
            {"error", {{"type", "usage"}, {"message", e.what()}, {"exit_code", exit_usage}}}};
        std::cerr << err.dump() << "\n";
        return exit_usage;
    } catch (const std::exception& e) {
        nlohmann::ordered_json err{{"error",
                                    {{"type", "internal"},
                                     {"message", e.what()},
                                     {"exit_code", exit_resource}}}};
        std::cerr << err.dump() << "\n";
        return exit_resource;
    }
}

}  // namespace celebnet
