#include "celebnet/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace celebnet {

// ---------------------------------------------------------------------------
// Order models
// ---------------------------------------------------------------------------

OrderModel OrderModel::fixed(ArrivalOrder order) {
    order.validate();
    OrderModel m;
    m.kind = OrderModelKind::fixed;
    m.fixed_order = std::move(order);
    return m;
}

OrderModel OrderModel::weighted(std::vector<double> w) {
    OrderModel m;
    m.kind = OrderModelKind::weighted;
    m.weights = std::move(w);
    return m;
}

ArrivalOrder OrderModel::sample(int n, std::uint64_t seed) const {
    switch (kind) {
        case OrderModelKind::fixed:
            if (fixed_order.num_agents() != n)
                throw ParameterError("fixed order size does not match the agent count");
            return fixed_order;
        case OrderModelKind::uniform:
            return uniform_order(n, seed);
        case OrderModelKind::weighted:
            if (static_cast<int>(weights.size()) != n)
                throw ParameterError("weight vector size does not match the agent count");
            return weighted_order(weights, seed);
    }
    throw ParameterError("unknown order model");
}

const char* OrderModel::name() const {
    switch (kind) {
        case OrderModelKind::fixed: return "fixed";
        case OrderModelKind::uniform: return "uniform";
        case OrderModelKind::weighted: return "weighted";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

int resolve_workers(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CELEBNET_WORKERS")) {
        const int w = std::atoi(env);
        if (w > 0) return w;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

namespace {

// Runs `trials` independent evaluations of `trial_fn` (trial index ->
// optimal count) across workers. Per-trial results land in index-addressed
// slots and are reduced single-threaded, so the outcome does not depend on
// scheduling.
template <typename TrialFn>
EstimateResult pooled_estimate(std::int64_t trials, std::int64_t agents_per_trial,
                               std::uint64_t seed, double confidence, int workers,
                               TrialFn&& trial_fn) {
    if (trials < 1) throw ParameterError("trials must be >= 1");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(trials), 0);

    const int n_workers =
        static_cast<int>(std::min<std::int64_t>(resolve_workers(workers), trials));
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto run_range = [&](std::int64_t begin, std::int64_t end) {
        try {
            for (std::int64_t i = begin; i < end; ++i)
                counts[static_cast<std::size_t>(i)] = trial_fn(i);
        } catch (...) {
            std::lock_guard<std::mutex> lock(failure_mutex);
            if (!failure) failure = std::current_exception();
        }
    };

    if (n_workers <= 1) {
        run_range(0, trials);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        const std::int64_t chunk = (trials + n_workers - 1) / n_workers;
        for (int w = 0; w < n_workers; ++w) {
            const std::int64_t begin = w * chunk;
            const std::int64_t end = std::min<std::int64_t>(begin + chunk, trials);
            if (begin >= end) break;
            pool.emplace_back(run_range, begin, end);
        }
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    EstimateResult r;
    r.trials = trials;
    r.seed = seed;
    r.confidence = confidence;
    r.observations = trials * agents_per_trial;
    for (std::int64_t c : counts) r.successes += c;
    r.mean_fraction =
        static_cast<double>(r.successes) / static_cast<double>(r.observations);
    const WilsonInterval ci = wilson_interval(r.successes, r.observations, confidence);
    r.ci_lower = ci.lower;
    r.ci_upper = ci.upper;

    if (trials >= 2) {
        const double n_agents = static_cast<double>(agents_per_trial);
        double ss = 0.0;
        for (std::int64_t c : counts) {
            const double d = static_cast<double>(c) / n_agents - r.mean_fraction;
            ss += d * d;
        }
        r.trial_std = std::sqrt(ss / static_cast<double>(trials - 1));
    }
    return r;
}

}  // namespace

double EstimateResult::trial_stderr() const {
    return trials > 0 ? trial_std / std::sqrt(static_cast<double>(trials)) : 0.0;
}

nlohmann::ordered_json EstimateResult::to_json() const {
    return nlohmann::ordered_json{{"mean_fraction", mean_fraction},
                                  {"trials", trials},
                                  {"ci_lower", ci_lower},
                                  {"ci_upper", ci_upper},
                                  {"confidence", confidence},
                                  {"successes", successes},
                                  {"observations", observations},
                                  {"trial_std", trial_std},
                                  {"seed", seed}};
}

EstimateResult estimate_fraction(const Challenge& challenge, const ObservationGraph& graph,
                                 const OrderModel& order_model, const Policy& policy,
                                 std::int64_t trials, std::uint64_t seed, double confidence,
                                 int workers) {
    challenge.validate();
    const int n = graph.num_agents();
    const bool fixed = order_model.kind == OrderModelKind::fixed;
    if (fixed && order_model.fixed_order.num_agents() != n)
        throw ParameterError("fixed order size does not match the agent count");

    return pooled_estimate(trials, n, seed, confidence, workers, [&](std::int64_t i) {
        const std::uint64_t tseed = derive_seed(seed, static_cast<std::uint64_t>(i));
        if (fixed)
            return run_trial(challenge, graph, order_model.fixed_order, policy,
                             derive_seed(tseed, 2), false)
                .optimal_count;
        const ArrivalOrder order = order_model.sample(n, derive_seed(tseed, 1));
        return run_trial(challenge, graph, order, policy, derive_seed(tseed, 2), false)
            .optimal_count;
    });
}

EstimateResult estimate_relabeled_fraction(const Challenge& challenge, int n, int k,
                                           const OrderModel& order_model, const Policy& policy,
                                           std::int64_t trials, std::uint64_t seed,
                                           double confidence, int workers) {
    challenge.validate();
    return pooled_estimate(trials, n, seed, confidence, workers, [&](std::int64_t i) {
        const std::uint64_t tseed = derive_seed(seed, static_cast<std::uint64_t>(i));
        const Relabeling tau = uniform_relabeling(n, derive_seed(tseed, 3));
        const ObservationGraph graph = ObservationGraph::relabeled_celebrity(n, k, tau);
        const ArrivalOrder order = order_model.kind == OrderModelKind::fixed
                                       ? order_model.fixed_order
                                       : order_model.sample(n, derive_seed(tseed, 1));
        return run_trial(challenge, graph, order, policy, derive_seed(tseed, 2), false)
            .optimal_count;
    });
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

bool Report::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.pass; });
}

void Report::check(const std::string& name, bool pass, const std::string& detail) {
    checks.push_back({name, pass, detail});
}

std::string Report::to_text() const {
    std::ostringstream out;
    out << title << "\n";
    for (const auto& [key, value] : data.items()) {
        out << "  " << key;
        for (std::size_t i = key.size(); i < 28; ++i) out << ' ';
        if (value.is_string())
            out << value.get<std::string>() << "\n";
        else
            out << value.dump() << "\n";
    }
    for (const auto& c : checks) {
        out << "  [" << (c.pass ? "PASS" : "FAIL") << "] " << c.name;
        if (!c.detail.empty()) out << " (" << c.detail << ")";
        out << "\n";
    }
    out << "  overall: " << (passed() ? "PASS" : "FAIL");
    if (inconclusive) out << " [statistically inconclusive]";
    out << "\n";
    return out.str();
}

nlohmann::ordered_json Report::to_json() const {
    nlohmann::ordered_json doc;
    doc["title"] = title;
    doc["data"] = data;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& c : checks)
        arr.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    doc["checks"] = arr;
    doc["passed"] = passed();
    doc["inconclusive"] = inconclusive;
    return doc;
}

// ---------------------------------------------------------------------------
// Lemma 1
// ---------------------------------------------------------------------------

Report verify_lemma1(double delta, double epsilon) {
    detail::require_delta(delta);
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ParameterError("epsilon must be in (0, 1)");

    const auto n = static_cast<std::int64_t>(std::ceil(1.0 / (4.0 * delta * delta * epsilon)));
    const double tail = clear_majority_probability(n, delta);
    const double bound = 1.0 - epsilon;

    Report r;
    r.title = "lemma1: exact clear-majority tail at the sized guinea-pig population";
    r.data["delta"] = delta;
    r.data["epsilon"] = epsilon;
    r.data["population"] = n;
    r.data["exact_tail"] = tail;
    r.data["bound"] = bound;
    r.check("exact_tail > 1 - epsilon", tail > bound,
            "tail=" + std::to_string(tail) + " bound=" + std::to_string(bound));
    return r;
}

// ---------------------------------------------------------------------------
// Lemmas 2 and 3
// ---------------------------------------------------------------------------

namespace {

double telescoping_no_celebrity(std::int64_t population, std::int64_t slots,
                                std::int64_t celebrities, std::int64_t already_gone = 0) {
    double product = 1.0;
    for (std::int64_t i = 0; i < slots; ++i) {
        const double num =
            static_cast<double>(population - already_gone - celebrities - i);
        const double den = static_cast<double>(population - already_gone - i);
        if (num <= 0.0) return 0.0;
        product *= num / den;
    }
    return product;
}

}  // namespace

Report verify_lemma2(double epsilon, int j_guineas, int k_celebs, std::int64_t mc_samples,
                     std::uint64_t seed, double confidence) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ParameterError("epsilon must be in (0, 1)");
    if (j_guineas < 1) throw ParameterError("J must be >= 1");
    if (k_celebs < 0) throw ParameterError("K must be >= 0");

    const auto n =
        static_cast<std::int64_t>(std::ceil(2.0 * j_guineas * k_celebs / epsilon)) + j_guineas;
    const double product = telescoping_no_celebrity(n, j_guineas, k_celebs);
    const double bound = 1.0 - epsilon;

    Report r;
    r.title = "lemma2: no celebrity among the first J arrivals";
    r.data["epsilon"] = epsilon;
    r.data["j_guineas"] = j_guineas;
    r.data["k_celebrities"] = k_celebs;
    r.data["population"] = n;
    r.data["exact_product"] = product;
    r.data["bound"] = bound;
    r.check("exact_product >= 1 - epsilon", product >= bound);

    if (mc_samples > 0) {
        Rng rng(derive_seed(seed, 1));
        std::int64_t hits = 0;
        for (std::int64_t s = 0; s < mc_samples; ++s) {
            const std::vector<int> prefix =
                uniform_prefix(static_cast<int>(n), j_guineas, rng);
            const bool clean = std::none_of(prefix.begin(), prefix.end(),
                                            [&](int id) { return id <= k_celebs; });
            hits += clean ? 1 : 0;
        }
        const WilsonInterval ci = wilson_interval(hits, mc_samples, confidence);
        r.data["mc_samples"] = mc_samples;
        r.data["mc_estimate"] = static_cast<double>(hits) / static_cast<double>(mc_samples);
        r.data["mc_ci"] = {ci.lower, ci.upper};
        r.data["seed_ledger"] = {{"root", seed}, {"mc", derive_seed(seed, 1)}};
        r.check("monte carlo CI contains exact product", ci.contains(product));
    }
    return r;
}

Report verify_lemma3(double epsilon, int j_guineas, std::int64_t mc_samples, std::uint64_t seed,
                     double confidence) {
    if (!(epsilon > 0.0) || !(epsilon < 1.0)) throw ParameterError("epsilon must be in (0, 1)");
    if (j_guineas < 1) throw ParameterError("J must be >= 1");

    const int k = static_cast<int>(std::ceil((2.0 / epsilon) * std::log(1.0 / epsilon)));
    const auto n = static_cast<std::int64_t>(std::ceil(2.0 * j_guineas / epsilon));
    const auto window_end = static_cast<std::int64_t>(std::floor(static_cast<double>(n) * epsilon));
    if (window_end <= j_guineas)
        throw ParameterError("floor(N*epsilon) must exceed J for the lemma-3 window");
    const std::int64_t window = window_end - j_guineas;

    const double miss = telescoping_no_celebrity(n, window, k, j_guineas);
    const double conditional = 1.0 - miss;
    const double bound = 1.0 - epsilon;

    Report r;
    r.title = "lemma3: a celebrity arrives inside the (J, N*eps] window";
    r.data["epsilon"] = epsilon;
    r.data["j_guineas"] = j_guineas;
    r.data["k_celebrities"] = k;
    r.data["population"] = n;
    r.data["window_end"] = window_end;
    r.data["exact_conditional"] = conditional;
    r.data["bound"] = bound;
    r.check("conditional >= 1 - epsilon", conditional >= bound);

    if (mc_samples > 0) {
        Rng rng(derive_seed(seed, 1));
        std::int64_t accepted = 0, hits = 0;
        const std::int64_t max_attempts = mc_samples * 20;
        for (std::int64_t attempt = 0; accepted < mc_samples && attempt < max_attempts;
             ++attempt) {
            const std::vector<int> prefix =
                uniform_prefix(static_cast<int>(n), static_cast<int>(window_end), rng);
            const bool clean_head =
                std::none_of(prefix.begin(), prefix.begin() + j_guineas,
                             [&](int id) { return id <= k; });
            if (!clean_head) continue;  // condition of the lemma
            ++accepted;
            const bool hit = std::any_of(prefix.begin() + j_guineas, prefix.end(),
                                         [&](int id) { return id <= k; });
            hits += hit ? 1 : 0;
        }
        if (accepted < mc_samples)
            throw ResourceError("lemma3 conditional sampler rejected too many draws");
        const WilsonInterval ci = wilson_interval(hits, accepted, confidence);
        r.data["mc_samples"] = accepted;
        r.data["mc_estimate"] = static_cast<double>(hits) / static_cast<double>(accepted);
        r.data["mc_ci"] = {ci.lower, ci.upper};
        r.data["seed_ledger"] = {{"root", seed}, {"mc", derive_seed(seed, 1)}};
        r.check("monte carlo CI contains exact conditional", ci.contains(conditional));
    }
    return r;
}

// ---------------------------------------------------------------------------
// Theorem 4
// ---------------------------------------------------------------------------

namespace {

nlohmann::ordered_json sweep_row_json(const SweepRow& row) {
    return nlohmann::ordered_json{
        {"epsilon", row.epsilon},   {"delta", row.delta}, {"n", row.n},
        {"k", row.k},               {"j", row.j},         {"trials", row.trials},
        {"mean_fraction", row.mean_fraction}, {"ci_lo", row.ci_lo},
        {"ci_hi", row.ci_hi},       {"seed", row.seed}};
}

}  // namespace

Report verify_theorem4(double epsilon, double delta, std::int64_t trials, std::uint64_t seed,
                       const Theorem4Options& options) {
    const GraphSizing s = sizing(epsilon, delta);
    const std::int64_t n = options.n_override > 0 ? options.n_override : s.sufficient_population;
    if (n > options.max_population)
        throw ResourceError("population " + std::to_string(n) + " exceeds the memory budget (" +
                            std::to_string(options.max_population) +
                            "); pass an n_override or raise the budget");
    if (s.num_celebrities >= n)
        throw ParameterError("population too small for K=" + std::to_string(s.num_celebrities) +
                             " celebrities");

    Challenge challenge;
    challenge.num_agents = static_cast<int>(n);
    challenge.delta = delta;
    const Policy policy = Policy::paper(s.guinea_pig_threshold);
    const double bound = 1.0 - s.epsilon;

    Report r;
    r.title = "theorem4: celebrity graph is epsilon-optimal under uniform arrival";
    r.data["epsilon"] = s.epsilon;
    if (s.clamped()) r.data["epsilon_requested"] = s.requested_epsilon;
    r.data["delta"] = delta;
    r.data["population"] = n;
    r.data["sized_population"] = s.sufficient_population;
    r.data["k_celebrities"] = s.num_celebrities;
    r.data["j_guineas"] = s.guinea_pig_threshold;
    r.data["bound"] = bound;

    auto estimate_at = [&](std::int64_t pop, std::uint64_t est_seed) {
        Challenge ch = challenge;
        ch.num_agents = static_cast<int>(pop);
        const ObservationGraph graph =
            ObservationGraph::celebrity(static_cast<int>(pop), s.num_celebrities);
        return estimate_fraction(ch, graph, OrderModel::uniform(), policy, trials, est_seed,
                                 options.confidence, options.workers);
    };

    const EstimateResult est = estimate_at(n, derive_seed(seed, 0));
    r.data["estimate"] = est.to_json();

    auto rows = nlohmann::ordered_json::array();
    rows.push_back(sweep_row_json({s.epsilon, delta, n, s.num_celebrities,
                                   s.guinea_pig_threshold, trials, est.mean_fraction,
                                   est.ci_lower, est.ci_upper, est.seed}));

    r.check("mean_fraction >= 1 - epsilon", est.mean_fraction >= bound,
            "mean=" + std::to_string(est.mean_fraction));
    if (est.mean_fraction >= bound && est.ci_lower < bound) r.inconclusive = true;
    r.data["ci_lower_clears_bound"] = est.ci_lower >= bound;

    if (options.ladder) {
        // Doubling ladder N/8, N/4, N/2, N: the learning curve must be
        // monotone up to trial-level CI overlap (z = 2.576, i.e. 99%).
        std::vector<std::int64_t> rungs;
        for (int shift = 3; shift >= 1; --shift) {
            const std::int64_t pop = n >> shift;
            if (pop > s.num_celebrities + 1) rungs.push_back(pop);
        }
        rungs.push_back(n);

        std::vector<EstimateResult> ladder;
        auto ladder_rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < rungs.size(); ++i) {
            const EstimateResult e = rungs[i] == n
                                         ? est
                                         : estimate_at(rungs[i], derive_seed(seed, 1 + i));
            ladder.push_back(e);
            ladder_rows.push_back(sweep_row_json({s.epsilon, delta, rungs[i], s.num_celebrities,
                                                  s.guinea_pig_threshold, trials,
                                                  e.mean_fraction, e.ci_lower, e.ci_upper,
                                                  e.seed}));
        }
        r.data["ladder"] = ladder_rows;
        bool monotone = true;
        for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
            const double slack = 2.576 * std::sqrt(ladder[i].trial_stderr() * ladder[i].trial_stderr() +
                                                   ladder[i + 1].trial_stderr() *
                                                       ladder[i + 1].trial_stderr());
            if (ladder[i + 1].mean_fraction < ladder[i].mean_fraction - slack) monotone = false;
        }
        r.check("ladder means nondecreasing up to CI overlap", monotone);
        for (const auto& row : ladder_rows) rows.push_back(row);
    }

    r.data["sweep_rows"] = rows;
    r.data["seed_ledger"] = {{"root", seed}, {"estimate", est.seed}};
    return r;
}

std::vector<SweepRow> theorem4_sweep_rows(const Report& report) {
    std::vector<SweepRow> rows;
    if (!report.data.contains("sweep_rows")) return rows;
    for (const auto& row : report.data.at("sweep_rows")) {
        SweepRow s;
        s.epsilon = row.at("epsilon").get<double>();
        s.delta = row.at("delta").get<double>();
        s.n = row.at("n").get<std::int64_t>();
        s.k = row.at("k").get<int>();
        s.j = row.at("j").get<int>();
        s.trials = row.at("trials").get<std::int64_t>();
        s.mean_fraction = row.at("mean_fraction").get<double>();
        s.ci_lo = row.at("ci_lo").get<double>();
        s.ci_hi = row.at("ci_hi").get<double>();
        s.seed = row.at("seed").get<std::uint64_t>();
        rows.push_back(s);
    }
    std::sort(rows.begin(), rows.end(), [](const SweepRow& a, const SweepRow& b) { return a.n < b.n; });
    return rows;
}

// ---------------------------------------------------------------------------
// Lemma 4 / Corollary 2 / Theorem 5 (small n)
// ---------------------------------------------------------------------------

namespace {

struct StepTrace {
    std::vector<int> signals;
    std::vector<int> actions;
    std::vector<char> roles;
};

StepTrace run_traced(const Challenge& challenge, const ObservationGraph& graph,
                     const ArrivalOrder& order, const Policy& policy, int theta,
                     const std::vector<int>& signals_by_identity) {
    StepTrace trace;
    const int n = graph.num_agents();
    trace.signals.reserve(static_cast<std::size_t>(n));
    trace.roles.reserve(static_cast<std::size_t>(n));
    const TrialOutcome outcome = run_trial_given(challenge, graph, order, policy, theta,
                                                 signals_by_identity, true);
    trace.actions = outcome.actions;
    for (int t = 1; t <= n; ++t) {
        const int agent = order.agent_at(t);
        trace.signals.push_back(signals_by_identity[static_cast<std::size_t>(agent - 1)]);
        trace.roles.push_back(graph.is_celebrity(agent) ? 1 : 0);
    }
    return trace;
}

}  // namespace

bool lemma4_step_equivalence(const ArrivalOrder& sigma, const Relabeling& tau,
                             const std::vector<int>& signals, int theta,
                             const Challenge& challenge, int k, const Policy& policy) {
    const int n = sigma.num_agents();
    sigma.validate();
    tau.validate();
    if (tau.num_agents() != n || static_cast<int>(signals.size()) != n)
        throw ParameterError("sigma, tau and the signal profile must share one size");

    // Challenge 1: arrival sigma, signals s(tau(i)), celebrities tau^-1(1..k).
    const ObservationGraph relabeled = ObservationGraph::relabeled_celebrity(n, k, tau);
    std::vector<int> permuted(static_cast<std::size_t>(n));
    for (int i = 1; i <= n; ++i)
        permuted[static_cast<std::size_t>(i - 1)] =
            signals[static_cast<std::size_t>(tau.label_of(i) - 1)];

    // Challenge 2: arrival tau(sigma), signals s, celebrities 1..k.
    const ObservationGraph standard = ObservationGraph::celebrity(n, k);
    ArrivalOrder mapped;
    mapped.order.reserve(static_cast<std::size_t>(n));
    for (int id : sigma.order) mapped.order.push_back(tau.label_of(id));

    const StepTrace a = run_traced(challenge, relabeled, sigma, policy, theta, permuted);
    const StepTrace b = run_traced(challenge, standard, mapped, policy, theta, signals);
    return a.signals == b.signals && a.actions == b.actions && a.roles == b.roles;
}

Report verify_lemma4(int n, int k, const Challenge& challenge, const Policy& policy) {
    if (n < 2 || n > 7) throw ParameterError("lemma4 exhaustive sweep supports 2 <= n <= 7");
    if (k < 1 || k >= n) throw ParameterError("need 1 <= k < n");
    challenge.validate();

    std::vector<int> base(static_cast<std::size_t>(n));
    std::iota(base.begin(), base.end(), 1);

    std::int64_t combos = 0, mismatches = 0;
    std::vector<int> signals(static_cast<std::size_t>(n));

    std::vector<int> tau_perm = base;
    do {
        Relabeling tau{tau_perm};
        std::vector<int> sigma_perm = base;
        do {
            ArrivalOrder sigma{sigma_perm};
            for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << n); ++bits) {
                for (int i = 0; i < n; ++i)
                    signals[static_cast<std::size_t>(i)] = static_cast<int>((bits >> i) & 1u);
                for (int theta = 0; theta <= 1; ++theta) {
                    ++combos;
                    if (!lemma4_step_equivalence(sigma, tau, signals, theta, challenge, k,
                                                 policy))
                        ++mismatches;
                }
            }
        } while (std::next_permutation(sigma_perm.begin(), sigma_perm.end()));
    } while (std::next_permutation(tau_perm.begin(), tau_perm.end()));

    // The lemma fails when challenge 1 keeps the unpermuted signals; find the
    // first such breakdown in lexicographic order.
    bool counterexample_found = false;
    nlohmann::ordered_json counterexample;
    tau_perm = base;
    do {
        Relabeling tau{tau_perm};
        const ObservationGraph relabeled = ObservationGraph::relabeled_celebrity(n, k, tau);
        const ObservationGraph standard = ObservationGraph::celebrity(n, k);
        std::vector<int> sigma_perm = base;
        do {
            ArrivalOrder sigma{sigma_perm};
            ArrivalOrder mapped;
            mapped.order.reserve(static_cast<std::size_t>(n));
            for (int id : sigma.order) mapped.order.push_back(tau.label_of(id));
            for (std::uint32_t bits = 0; bits < (std::uint32_t{1} << n) && !counterexample_found;
                 ++bits) {
                for (int i = 0; i < n; ++i)
                    signals[static_cast<std::size_t>(i)] = static_cast<int>((bits >> i) & 1u);
                for (int theta = 0; theta <= 1 && !counterexample_found; ++theta) {
                    const StepTrace a =
                        run_traced(challenge, relabeled, sigma, policy, theta, signals);
                    const StepTrace b =
                        run_traced(challenge, standard, mapped, policy, theta, signals);
                    if (a.signals != b.signals || a.actions != b.actions || a.roles != b.roles) {
                        counterexample_found = true;
                        counterexample = {{"sigma", sigma.order},
                                          {"tau", tau.tau},
                                          {"signals", signals},
                                          {"theta", theta}};
                    }
                }
            }
        } while (!counterexample_found &&
                 std::next_permutation(sigma_perm.begin(), sigma_perm.end()));
    } while (!counterexample_found && std::next_permutation(tau_perm.begin(), tau_perm.end()));

    Report r;
    r.title = "lemma4: step-identical traces under the relabeling construction";
    r.data["n"] = n;
    r.data["k"] = k;
    r.data["combinations"] = combos;
    r.data["mismatches"] = mismatches;
    if (counterexample_found) r.data["unpermuted_counterexample"] = counterexample;
    r.check("all traces step-identical", mismatches == 0);
    r.check("unpermuted-signal counterexample exists", counterexample_found);
    return r;
}

namespace {

// Exact-value caches over all n! orders and all C(n, k) celebrity sets.
struct PairEnumeration {
    int n = 0;
    int k = 0;
    std::vector<std::vector<int>> orders;
    std::map<std::vector<int>, int> order_index;
    std::vector<double> fixed_value;      // by order index, standard graph
    std::vector<double> relabeled_value;  // by order index * 2^n + celeb mask; NaN = not computed

    PairEnumeration(int n_in, int k_in, const Challenge& challenge, const Policy& policy)
        : n(n_in), k(k_in) {
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 1);
        do {
            order_index[perm] = static_cast<int>(orders.size());
            orders.push_back(perm);
        } while (std::next_permutation(perm.begin(), perm.end()));

        const ObservationGraph standard = ObservationGraph::celebrity(n, k);
        fixed_value.reserve(orders.size());
        for (const auto& o : orders)
            fixed_value.push_back(
                exact_expected_fraction(challenge, standard, ArrivalOrder{o}, policy));

        relabeled_value.assign(orders.size() << n,
                               std::numeric_limits<double>::quiet_NaN());
        challenge_ = &challenge;
        policy_ = &policy;
    }

    static std::uint32_t celeb_mask(const Relabeling& tau, int k) {
        std::uint32_t mask = 0;
        for (int i = 1; i <= tau.num_agents(); ++i)
            if (tau.label_of(i) <= k) mask |= std::uint32_t{1} << (i - 1);
        return mask;
    }

    // Builds a canonical relabeling realizing the celebrity set `mask`.
    Relabeling tau_for_mask(std::uint32_t mask) const {
        Relabeling tau;
        tau.tau.resize(static_cast<std::size_t>(n));
        int next_celebrity = 1, next_commoner = k + 1;
        for (int i = 1; i <= n; ++i)
            tau.tau[static_cast<std::size_t>(i - 1)] =
                (mask >> (i - 1)) & 1u ? next_celebrity++ : next_commoner++;
        return tau;
    }

    double relabeled(int order_idx, std::uint32_t mask) {
        double& slot = relabeled_value[(static_cast<std::size_t>(order_idx) << n) + mask];
        if (std::isnan(slot)) {
            const ObservationGraph graph =
                ObservationGraph::relabeled_celebrity(n, k, tau_for_mask(mask));
            slot = exact_expected_fraction(*challenge_, graph,
                                           ArrivalOrder{orders[static_cast<std::size_t>(order_idx)]},
                                           *policy_);
        }
        return slot;
    }

    double uniform_fixed_value() const {
        double sum = 0.0;
        for (double v : fixed_value) sum += v;
        return sum / static_cast<double>(fixed_value.size());
    }

private:
    const Challenge* challenge_ = nullptr;
    const Policy* policy_ = nullptr;
};

}  // namespace

Report corollary2_equivalence(int n, int k, const Challenge& challenge, const Policy& policy,
                              double tolerance) {
    if (n < 2 || n > 7) throw ParameterError("corollary2 exact enumeration supports 2 <= n <= 7");
    if (k < 1 || k >= n) throw ParameterError("need 1 <= k < n");
    challenge.validate();

    PairEnumeration cache(n, k, challenge, policy);
    double max_diff = 0.0;
    double sum_relabeled = 0.0, sum_fixed = 0.0;
    std::vector<int> mapped(static_cast<std::size_t>(n));

    for (std::size_t ti = 0; ti < cache.orders.size(); ++ti) {
        Relabeling tau{cache.orders[ti]};
        const std::uint32_t mask = PairEnumeration::celeb_mask(tau, k);
        for (std::size_t si = 0; si < cache.orders.size(); ++si) {
            const auto& sigma = cache.orders[si];
            // Construction 1: arrival sigma on the tau-relabeled bi-clique.
            const double e1 = cache.relabeled(static_cast<int>(si), mask);
            // Construction 2: arrival tau(sigma) on the standard bi-clique.
            for (int t = 0; t < n; ++t)
                mapped[static_cast<std::size_t>(t)] =
                    tau.label_of(sigma[static_cast<std::size_t>(t)]);
            const double e2 =
                cache.fixed_value[static_cast<std::size_t>(cache.order_index.at(mapped))];
            max_diff = std::max(max_diff, std::abs(e1 - e2));
            sum_relabeled += e1;
            sum_fixed += e2;
        }
    }

    const double pairs = static_cast<double>(cache.orders.size() * cache.orders.size());
    const double expected_x_relabeled = sum_relabeled / pairs * n;
    const double expected_x_fixed = sum_fixed / pairs * n;

    Report r;
    r.title = "corollary2: equal expected optimal-action counts across constructions";
    r.data["n"] = n;
    r.data["k"] = k;
    r.data["delta"] = challenge.delta;
    r.data["pairs"] = static_cast<std::int64_t>(pairs);
    r.data["expected_x_relabeled"] = expected_x_relabeled;
    r.data["expected_x_fixed"] = expected_x_fixed;
    r.data["max_pair_diff"] = max_diff;
    r.data["tolerance"] = tolerance;
    r.check("per-pair expectations equal", max_diff <= tolerance);
    r.check("averaged expectations equal",
            std::abs(expected_x_relabeled - expected_x_fixed) <= tolerance);
    return r;
}

Report verify_theorem5_small(int n, int k, const Challenge& challenge, const Policy& policy,
                             double tolerance) {
    if (n < 2 || n > 6) throw ParameterError("theorem5 exact reduction supports 2 <= n <= 6");
    if (k < 1 || k >= n) throw ParameterError("need 1 <= k < n");
    challenge.validate();

    PairEnumeration cache(n, k, challenge, policy);

    // Enumerate the C(n, k) celebrity sets once; a uniform tau induces the
    // uniform distribution over them.
    std::vector<std::uint32_t> masks;
    for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n); ++mask)
        if (std::popcount(mask) == k) masks.push_back(mask);

    const double uniform_value = cache.uniform_fixed_value();
    double worst_diff = 0.0;
    double adversary_best = 1.0;
    for (std::size_t si = 0; si < cache.orders.size(); ++si) {
        double sum = 0.0;
        for (const std::uint32_t mask : masks) sum += cache.relabeled(static_cast<int>(si), mask);
        const double value_vs_randomized = sum / static_cast<double>(masks.size());
        worst_diff = std::max(worst_diff, std::abs(value_vs_randomized - uniform_value));
        adversary_best = std::min(adversary_best, value_vs_randomized);
    }

    Report r;
    r.title = "theorem5 (exact): adversary value vs randomized graph equals uniform-arrival value";
    r.data["n"] = n;
    r.data["k"] = k;
    r.data["delta"] = challenge.delta;
    r.data["uniform_arrival_value"] = uniform_value;
    r.data["adversary_value"] = adversary_best;
    r.data["max_order_diff"] = worst_diff;
    r.data["tolerance"] = tolerance;
    r.check("every order's value equals the uniform-arrival value", worst_diff <= tolerance);
    return r;
}

Report verify_theorem5(double epsilon, double delta, std::uint64_t seed,
                       const Theorem5Options& options) {
    const GraphSizing s = sizing(epsilon, delta);
    const std::int64_t n = options.n_override > 0 ? options.n_override : s.sufficient_population;
    if (n > options.max_population)
        throw ResourceError("population " + std::to_string(n) + " exceeds the memory budget");
    if (s.num_celebrities >= n) throw ParameterError("population too small for K celebrities");

    Challenge challenge;
    challenge.num_agents = static_cast<int>(n);
    challenge.delta = delta;
    const Policy policy = Policy::paper(s.guinea_pig_threshold);
    const double bound = 1.0 - s.epsilon;

    const ObservationGraph fixed_graph =
        ObservationGraph::celebrity(static_cast<int>(n), s.num_celebrities);
    const std::vector<ArrivalOrder> attacks = heuristic_attack_orders(fixed_graph);
    static const char* kAttackNames[] = {"identity", "reverse", "celebrities_first",
                                         "celebrities_last", "celebrities_spread"};

    Report r;
    r.title = "theorem5: randomized celebrity graph vs heuristic adversary orders";
    r.data["epsilon"] = s.epsilon;
    r.data["delta"] = delta;
    r.data["population"] = n;
    r.data["k_celebrities"] = s.num_celebrities;
    r.data["j_guineas"] = s.guinea_pig_threshold;
    r.data["trials_per_order"] = options.trials_per_order;
    r.data["bound"] = bound;

    auto rows = nlohmann::ordered_json::array();
    double worst = 1.0;
    bool all_ci_clear = true;
    for (std::size_t i = 0; i < attacks.size(); ++i) {
        const EstimateResult est = estimate_relabeled_fraction(
            challenge, static_cast<int>(n), s.num_celebrities, OrderModel::fixed(attacks[i]),
            policy, options.trials_per_order, derive_seed(seed, i), options.confidence,
            options.workers);
        worst = std::min(worst, est.mean_fraction);
        all_ci_clear = all_ci_clear && est.ci_lower >= bound;
        rows.push_back({{"attack", kAttackNames[i]},
                        {"mean_fraction", est.mean_fraction},
                        {"ci_lower", est.ci_lower},
                        {"ci_upper", est.ci_upper},
                        {"seed", est.seed}});
    }
    r.data["attacks"] = rows;
    r.data["worst_mean"] = worst;
    r.data["seed_ledger"] = {{"root", seed}};
    r.check("worst attack mean >= 1 - epsilon", worst >= bound,
            "worst=" + std::to_string(worst));
    if (worst >= bound && !all_ci_clear) r.inconclusive = true;
    return r;
}

// ---------------------------------------------------------------------------
// Theorem 6
// ---------------------------------------------------------------------------

DerandomizeResult derandomize_theorem6(const Challenge& challenge, int n, int k,
                                       const OrderModel& order_model, const Policy& policy,
                                       int samples, std::int64_t trials_per_sample,
                                       std::uint64_t seed, double confidence, int workers,
                                       std::int64_t randomized_trials) {
    if (samples < 1) throw ParameterError("samples must be >= 1");
    if (trials_per_sample < 1) throw ParameterError("trials_per_sample must be >= 1");
    if (randomized_trials <= 0) randomized_trials = samples * trials_per_sample;

    DerandomizeResult out;
    double sum = 0.0;
    int best_idx = -1;
    auto scores = nlohmann::ordered_json::array();
    for (int i = 0; i < samples; ++i) {
        const Relabeling tau =
            uniform_relabeling(n, derive_seed(seed, 0x10000u + static_cast<std::uint64_t>(i)));
        const ObservationGraph graph = ObservationGraph::relabeled_celebrity(n, k, tau);
        const EstimateResult est = estimate_fraction(
            challenge, graph, order_model, policy, trials_per_sample,
            derive_seed(seed, 0x20000u + static_cast<std::uint64_t>(i)), confidence, workers);
        sum += est.mean_fraction;
        scores.push_back(est.mean_fraction);
        if (best_idx < 0 || est.mean_fraction > out.best_score.mean_fraction) {
            best_idx = i;
            out.best_score = est;
            out.best_relabeling = tau;
        }
    }
    out.average_score = sum / static_cast<double>(samples);
    out.randomized_score =
        estimate_relabeled_fraction(challenge, n, k, order_model, policy, randomized_trials,
                                    derive_seed(seed, 0x30000u), confidence, workers);

    Report& r = out.report;
    r.title = "theorem6: derandomization by sampled relabelings";
    r.data["n"] = n;
    r.data["k"] = k;
    r.data["order_model"] = order_model.name();
    r.data["samples"] = samples;
    r.data["trials_per_sample"] = trials_per_sample;
    r.data["best_index"] = best_idx;
    r.data["best_score"] = out.best_score.to_json();
    r.data["average_score"] = out.average_score;
    r.data["randomized_score"] = out.randomized_score.to_json();
    r.data["sample_scores"] = scores;
    r.data["seed_ledger"] = {{"root", seed},
                             {"relabeling_stream", 0x10000},
                             {"score_stream", 0x20000},
                             {"randomized_stream", 0x30000}};
    r.check("best sample score >= average score",
            out.best_score.mean_fraction >= out.average_score - 1e-15);
    const double width = std::max(out.best_score.ci_upper - out.best_score.ci_lower,
                                  out.randomized_score.ci_upper - out.randomized_score.ci_lower);
    r.check("best score >= randomized score - CI width",
            out.best_score.mean_fraction >= out.randomized_score.mean_fraction - width);
    return out;
}

}  // namespace celebnet
