#ifndef CELEBNET_ENGINE_HPP
#define CELEBNET_ENGINE_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "celebnet/graph.hpp"
#include "celebnet/model.hpp"
#include "celebnet/permutations.hpp"

namespace celebnet {

// What one agent knows at decision time.
struct InfoSet {
    int agent_id = 0;
    int own_signal = 0;
    int position = 1;                                   // arrival time t, 1-based
    std::vector<int> predecessors;                      // identities of all earlier arrivals
    std::vector<std::pair<int, int>> observed_actions;  // (identity, action) of neighbor
                                                        // predecessors, arrival order
    std::optional<int> observed_action_of(int agent) const;
};

struct TrialOutcome {
    int theta = 0;
    std::vector<int> actions;      // by arrival time; empty unless recorded
    std::int64_t optimal_count = 0;  // X = #{agents with action == theta}
    double fraction = 0.0;         // X / N
};

enum class PolicyKind { paper_rule, exact_bayes };

struct Policy {
    PolicyKind kind = PolicyKind::paper_rule;
    // Minimum number of guinea pigs a celebrity must have observed before
    // commoners copy its action (J).
    int guinea_pig_threshold = 1;
    // Maximum predecessor count enumerable by the exact policy.
    int enumeration_cap = 20;

    static Policy paper(int guinea_pig_threshold) {
        return Policy{PolicyKind::paper_rule, guinea_pig_threshold, 20};
    }
    static Policy exact(int cap = 20) { return Policy{PolicyKind::exact_bayes, 1, cap}; }
};

// Deterministic role-aware best-reply rule:
//  - observing no one: play own signal;
//  - celebrity: follow a clear majority (|margin| >= 2) of the commoners
//    that arrived before the first celebrity, else own signal;
//  - commoner seeing >= 1 celebrity: copy the earliest observed celebrity's
//    action if that celebrity had observed >= J commoners, else own signal;
//  - clique: cascade rule (posterior over signals inferred from non-cascading
//    predecessors, ties toward own signal).
// Throws PolicyError for explicit graphs.
int paper_rule_decision(const InfoSet& info, const ObservationGraph& graph,
                        int guinea_pig_threshold);
int paper_rule_decision(const InfoSet& info, const ObservationGraph& graph,
                        const GraphSizing& params);

// Strategy table of one arrival position for the exact-Bayes policy:
// index = (observed-action bits << 1) | own signal.
struct StrategyTable {
    std::vector<int> observed_positions;  // earlier arrival times (1-based) visible from here
    std::vector<std::int8_t> action;      // -1 = infoset unreachable
    std::vector<double> posterior;        // P(theta=1 | infoset); NaN if unreachable
    int entry(int obs_bits, int own_signal) const {
        return static_cast<int>(action[(static_cast<std::size_t>(obs_bits) << 1) |
                                       static_cast<std::size_t>(own_signal)]);
    }
};

struct ExactStrategies {
    std::vector<StrategyTable> per_position;  // positions 1..t
};

// Builds, by induction on arrival time, the deterministic best-reply strategy
// of every position 1..up_to_position: enumerate all states and predecessor
// signal profiles, simulate earlier strategies, and aggregate the likelihood
// of each reachable infoset. Ties (posterior exactly 1/2) break toward the
// own signal; with a uniform prior ties are detected exactly via integer
// signal-count accumulation for positions up to 14 predecessors and via a
// relative tolerance above that. Throws ResourceError beyond `cap`.
ExactStrategies build_exact_strategies(const Challenge& challenge, const ObservationGraph& graph,
                                       const ArrivalOrder& order, int up_to_position, int cap);

struct ExactDecision {
    int action = 0;
    double posterior = 0.5;
};

// Exact-enumeration best reply for the agent holding `info`.
ExactDecision exact_bayes_decision(const InfoSet& info, const Challenge& challenge,
                                   const ObservationGraph& graph, const ArrivalOrder& order,
                                   int cap = 20);

struct TraceRecord {
    int t = 0;
    int agent = 0;
    Role role = Role::plain;
    int signal = 0;
    int observed_votes = 0;  // number of observations the rule actually used
    int action = 0;
};
using TraceSink = std::function<void(const TraceRecord&)>;

// Runs one trial with the given state and signal assignment (signals indexed
// by agent identity). Deterministic. The celebrity/empty/clique families run
// in O(1) per agent via running counters; explicit graphs and the exact
// policy use the general infoset path.
TrialOutcome run_trial_given(const Challenge& challenge, const ObservationGraph& graph,
                             const ArrivalOrder& order, const Policy& policy, int theta,
                             std::span<const int> signals_by_identity, bool record_actions = true,
                             const TraceSink* trace = nullptr);

// Draws theta from the prior and signals lazily in arrival order from the
// seed's stream, then runs the trial. Bit-for-bit reproducible from
// (inputs, seed). With record_actions = false only the counters are kept.
TrialOutcome run_trial(const Challenge& challenge, const ObservationGraph& graph,
                       const ArrivalOrder& order, const Policy& policy, std::uint64_t seed,
                       bool record_actions = true, const TraceSink* trace = nullptr);

// Exact expected optimal-action fraction for a fixed order: sums over both
// states and all 2^n signal profiles. Feasible for n <= ~20.
double exact_expected_fraction(const Challenge& challenge, const ObservationGraph& graph,
                               const ArrivalOrder& order, const Policy& policy);

// Infoset of the agent arriving at time t, given the realized actions of
// times 1..t-1.
InfoSet build_infoset(const ObservationGraph& graph, const ArrivalOrder& order, int t,
                      int own_signal, std::span<const int> actions_by_time);

}  // namespace celebnet

#endif
