#include "celebnet/engine.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <string>

namespace celebnet {

std::optional<int> InfoSet::observed_action_of(int agent) const {
    for (const auto& [id, action] : observed_actions)
        if (id == agent) return action;
    return std::nullopt;
}

InfoSet build_infoset(const ObservationGraph& graph, const ArrivalOrder& order, int t,
                      int own_signal, std::span<const int> actions_by_time) {
    if (t < 1 || t > order.num_agents()) throw ParameterError("position out of range");
    if (static_cast<int>(actions_by_time.size()) < t - 1)
        throw ParameterError("need the actions of all earlier arrivals");
    InfoSet info;
    info.agent_id = order.agent_at(t);
    info.own_signal = own_signal;
    info.position = t;
    info.predecessors.reserve(static_cast<std::size_t>(t) - 1);
    for (int u = 1; u < t; ++u) {
        const int pred = order.agent_at(u);
        info.predecessors.push_back(pred);
        if (graph.observes(info.agent_id, pred))
            info.observed_actions.emplace_back(pred, actions_by_time[static_cast<std::size_t>(u - 1)]);
    }
    return info;
}

namespace {

int margin_action(std::int64_t margin, int own_signal) {
    if (margin >= 2) return 1;
    if (margin <= -2) return 0;
    return own_signal;
}

}  // namespace

int paper_rule_decision(const InfoSet& info, const ObservationGraph& graph,
                        int guinea_pig_threshold) {
    if (guinea_pig_threshold < 0) throw ParameterError("guinea_pig_threshold must be >= 0");
    detail::require_binary(info.own_signal, "own_signal");

    switch (graph.family()) {
        case GraphFamily::empty:
            return info.own_signal;

        case GraphFamily::clique: {
            // Standard cascade: a predecessor that was not yet cascading acted
            // on its own signal, so its action reveals it; cascading actions
            // reveal nothing. Decide by the inferred-signal margin plus the
            // own signal (the uniform-prior posterior argmax, ties to own).
            std::int64_t margin = 0;
            for (const auto& [id, action] : info.observed_actions) {
                if (margin >= 2 || margin <= -2) break;  // everyone later is cascading
                margin += action == 1 ? 1 : -1;
            }
            return margin_action(margin, info.own_signal);
        }

        case GraphFamily::celebrity: {
            if (graph.is_celebrity(info.agent_id)) {
                // Independent votes: commoners that arrived before the first
                // celebrity. Later commoners are copycats and are ignored.
                std::int64_t margin = 0;
                for (int pred : info.predecessors) {
                    if (graph.is_celebrity(pred)) break;
                    const auto action = info.observed_action_of(pred);
                    if (!action)
                        throw ParameterError("celebrity infoset is missing a commoner action");
                    margin += *action == 1 ? 1 : -1;
                }
                return margin_action(margin, info.own_signal);
            }
            // Commoner: copy the earliest observed celebrity if it had seen
            // at least J guinea pigs; otherwise keep the own signal.
            std::int64_t commoners_before = 0;
            for (int pred : info.predecessors) {
                if (!graph.is_celebrity(pred)) {
                    ++commoners_before;
                    continue;
                }
                if (commoners_before >= guinea_pig_threshold) {
                    const auto action = info.observed_action_of(pred);
                    if (!action)
                        throw ParameterError("commoner infoset is missing a celebrity action");
                    return *action;
                }
                return info.own_signal;
            }
            return info.own_signal;  // guinea pig
        }

        case GraphFamily::explicit_edges:
            throw PolicyError(
                "paper rule covers empty/clique/celebrity families; use the exact policy for "
                "explicit graphs");
    }
    throw PolicyError("unknown graph family");
}

int paper_rule_decision(const InfoSet& info, const ObservationGraph& graph,
                        const GraphSizing& params) {
    return paper_rule_decision(info, graph, params.guinea_pig_threshold);
}

// ---------------------------------------------------------------------------
// Exact-Bayes strategy tables
// ---------------------------------------------------------------------------

namespace {

// Positions up to this many predecessors get exact tie detection through
// integer accumulation of signal-match counts.
constexpr int kExactTieLimit = 14;

struct TableBuilder {
    const Challenge& challenge;
    const ObservationGraph& graph;
    const ArrivalOrder& order;

    std::vector<StrategyTable> tables;

    void build_position(int t) {
        const double p = 0.5 + challenge.delta;
        const double q = 0.5 - challenge.delta;
        const double prior1 = challenge.prior_one;

        StrategyTable table;
        for (int u = 1; u < t; ++u)
            if (graph.observes(order.agent_at(t), order.agent_at(u)))
                table.observed_positions.push_back(u);
        const int d = static_cast<int>(table.observed_positions.size());
        const std::size_t keys = std::size_t{1} << (d + 1);

        const bool exact_ties = (t - 1) <= kExactTieLimit && prior1 == 0.5;
        // match_counts[key][theta][m]: number of signal profiles consistent
        // with `key` whose signals match theta in exactly m positions.
        std::vector<std::int64_t> match_counts;
        if (exact_ties) match_counts.assign(keys * 2 * static_cast<std::size_t>(t + 1), 0);
        std::vector<double> weight(keys * 2, 0.0);

        std::vector<double> pow_p(static_cast<std::size_t>(t) + 1),
            pow_q(static_cast<std::size_t>(t) + 1);
        pow_p[0] = pow_q[0] = 1.0;
        for (int i = 1; i <= t; ++i) {
            pow_p[static_cast<std::size_t>(i)] = pow_p[static_cast<std::size_t>(i - 1)] * p;
            pow_q[static_cast<std::size_t>(i)] = pow_q[static_cast<std::size_t>(i - 1)] * q;
        }

        std::vector<std::int8_t> actions(static_cast<std::size_t>(t), 0);
        const std::uint32_t profiles = std::uint32_t{1} << t;
        for (std::uint32_t bits = 0; bits < profiles; ++bits) {
            // Simulate positions 1..t-1 with the already-built strategies.
            for (int u = 1; u < t; ++u) {
                const auto& tu = tables[static_cast<std::size_t>(u - 1)];
                std::size_t obs = 0;
                for (std::size_t i = 0; i < tu.observed_positions.size(); ++i)
                    obs |= static_cast<std::size_t>(
                               actions[static_cast<std::size_t>(tu.observed_positions[i] - 1)])
                           << i;
                const int s_u = static_cast<int>((bits >> (u - 1)) & 1u);
                actions[static_cast<std::size_t>(u - 1)] = static_cast<std::int8_t>(
                    tu.action[(obs << 1) | static_cast<std::size_t>(s_u)]);
            }
            std::size_t obs_t = 0;
            for (std::size_t i = 0; i < table.observed_positions.size(); ++i)
                obs_t |= static_cast<std::size_t>(
                             actions[static_cast<std::size_t>(table.observed_positions[i] - 1)])
                         << i;
            const int s_t = static_cast<int>((bits >> (t - 1)) & 1u);
            const std::size_t key = (obs_t << 1) | static_cast<std::size_t>(s_t);

            const int ones = std::popcount(bits & (profiles - 1));
            // Matching-signal counts: theta=1 matches `ones`, theta=0 matches
            // t - ones positions.
            weight[key * 2 + 1] += pow_p[static_cast<std::size_t>(ones)] *
                                   pow_q[static_cast<std::size_t>(t - ones)];
            weight[key * 2 + 0] += pow_p[static_cast<std::size_t>(t - ones)] *
                                   pow_q[static_cast<std::size_t>(ones)];
            if (exact_ties) {
                const std::size_t base = key * 2 * static_cast<std::size_t>(t + 1);
                ++match_counts[base + static_cast<std::size_t>(t + 1) +
                               static_cast<std::size_t>(ones)];
                ++match_counts[base + static_cast<std::size_t>(t - ones)];
            }
        }

        table.action.assign(keys, -1);
        table.posterior.assign(keys, std::numeric_limits<double>::quiet_NaN());
        for (std::size_t key = 0; key < keys; ++key) {
            const double w1 = prior1 * weight[key * 2 + 1];
            const double w0 = (1.0 - prior1) * weight[key * 2 + 0];
            if (w0 + w1 == 0.0) continue;  // unreachable infoset
            const int own = static_cast<int>(key & 1);

            bool tie;
            if (exact_ties) {
                const std::size_t base = key * 2 * static_cast<std::size_t>(t + 1);
                tie = std::equal(match_counts.begin() + static_cast<std::ptrdiff_t>(base),
                                 match_counts.begin() + static_cast<std::ptrdiff_t>(
                                                            base + static_cast<std::size_t>(t + 1)),
                                 match_counts.begin() + static_cast<std::ptrdiff_t>(
                                                            base + static_cast<std::size_t>(t + 1)));
            } else {
                tie = std::abs(w1 - w0) <= 1e-12 * (w1 + w0);
            }

            int a;
            if (tie)
                a = own;
            else
                a = w1 > w0 ? 1 : 0;
            table.action[key] = static_cast<std::int8_t>(a);
            table.posterior[key] = tie ? 0.5 : w1 / (w0 + w1);
        }
        tables.push_back(std::move(table));
    }
};

}  // namespace

ExactStrategies build_exact_strategies(const Challenge& challenge, const ObservationGraph& graph,
                                       const ArrivalOrder& order, int up_to_position, int cap) {
    challenge.validate();
    order.validate();
    if (order.num_agents() != graph.num_agents())
        throw ParameterError("order size does not match graph size");
    if (up_to_position < 1 || up_to_position > order.num_agents())
        throw ParameterError("position out of range");
    if (up_to_position - 1 > cap)
        throw ResourceError("exact enumeration needs " + std::to_string(up_to_position - 1) +
                            " predecessor signals, cap is " + std::to_string(cap));

    TableBuilder builder{challenge, graph, order, {}};
    builder.tables.reserve(static_cast<std::size_t>(up_to_position));
    for (int t = 1; t <= up_to_position; ++t) builder.build_position(t);
    return ExactStrategies{std::move(builder.tables)};
}

ExactDecision exact_bayes_decision(const InfoSet& info, const Challenge& challenge,
                                   const ObservationGraph& graph, const ArrivalOrder& order,
                                   int cap) {
    const ExactStrategies strategies =
        build_exact_strategies(challenge, graph, order, info.position, cap);
    const StrategyTable& table = strategies.per_position.back();

    if (info.observed_actions.size() != table.observed_positions.size())
        throw ParameterError("infoset observations do not match the graph/order neighborhood");
    std::size_t obs = 0;
    for (std::size_t i = 0; i < table.observed_positions.size(); ++i) {
        const int pred_id = order.agent_at(table.observed_positions[i]);
        const auto action = info.observed_action_of(pred_id);
        if (!action)
            throw ParameterError("infoset is missing the action of agent " +
                                 std::to_string(pred_id));
        obs |= static_cast<std::size_t>(*action) << i;
    }
    const std::size_t key = (obs << 1) | static_cast<std::size_t>(info.own_signal);
    if (table.action[key] < 0) {
        // Off-equilibrium history: no profile reaches it. Keep the own signal.
        return {info.own_signal, 0.5};
    }
    return {table.action[key], table.posterior[key]};
}

// ---------------------------------------------------------------------------
// Trial runner
// ---------------------------------------------------------------------------

namespace {

// O(1)-per-agent counters for the implicit families.
struct FastState {
    // celebrity family
    bool first_celeb_seen = false;
    int first_celeb_action = 0;
    std::int64_t first_celeb_votes = 0;    // guinea pigs it observed
    std::int64_t pre_celeb_margin = 0;     // +/- votes of pre-first-celebrity commoners
    std::int64_t pre_celeb_count = 0;
    // clique family
    std::int64_t cascade_margin = 0;
    std::int64_t cascade_count = 0;  // predecessors whose actions reveal their signal
};

struct StepResult {
    int action = 0;
    int observed_votes = 0;
};

StepResult fast_step(GraphFamily family, const ObservationGraph& graph, int agent, int signal,
                     int guinea_pig_threshold, FastState& st) {
    switch (family) {
        case GraphFamily::empty:
            return {signal, 0};

        case GraphFamily::clique: {
            const StepResult r{margin_action(st.cascade_margin, signal),
                               static_cast<int>(st.cascade_count)};
            // A non-cascading agent's action equals its signal; record it for
            // the agents that follow.
            if (st.cascade_margin < 2 && st.cascade_margin > -2) {
                st.cascade_margin += r.action == 1 ? 1 : -1;
                ++st.cascade_count;
            }
            return r;
        }

        case GraphFamily::celebrity: {
            if (graph.is_celebrity(agent)) {
                const int action = margin_action(st.pre_celeb_margin, signal);
                const auto votes = static_cast<int>(st.pre_celeb_count);
                if (!st.first_celeb_seen) {
                    st.first_celeb_seen = true;
                    st.first_celeb_action = action;
                    st.first_celeb_votes = st.pre_celeb_count;
                }
                return {action, votes};
            }
            if (!st.first_celeb_seen) {
                st.pre_celeb_margin += signal == 1 ? 1 : -1;
                ++st.pre_celeb_count;
                return {signal, 0};  // guinea pig
            }
            if (st.first_celeb_votes >= guinea_pig_threshold)
                return {st.first_celeb_action, 1};
            return {signal, 0};
        }

        case GraphFamily::explicit_edges:
            break;
    }
    throw PolicyError("fast path does not cover this family");
}

// One configured trial engine; exact-policy strategy tables are built once
// and reused across runs with different signal realizations.
class TrialEngine {
public:
    TrialEngine(const Challenge& challenge, const ObservationGraph& graph,
                const ArrivalOrder& order, const Policy& policy)
        : challenge_(challenge), graph_(graph), order_(order), policy_(policy) {
        challenge.validate();
        if (order.num_agents() != graph.num_agents())
            throw ParameterError("order size does not match the agent count");
        if (policy.kind == PolicyKind::exact_bayes) {
            strategies_ = build_exact_strategies(challenge, graph, order, graph.num_agents(),
                                                 policy.enumeration_cap);
            actions_by_time_.resize(static_cast<std::size_t>(graph.num_agents()));
        } else if (graph.family() == GraphFamily::explicit_edges) {
            throw PolicyError("paper rule cannot run on explicit graphs; use the exact policy");
        }
    }

    template <typename SignalAt>
    TrialOutcome run(int theta, SignalAt&& signal_at, bool record_actions,
                     const TraceSink* trace) {
        detail::require_binary(theta, "theta");
        const int n = graph_.num_agents();
        TrialOutcome out;
        out.theta = theta;
        if (record_actions) out.actions.reserve(static_cast<std::size_t>(n));

        const bool exact = policy_.kind == PolicyKind::exact_bayes;
        FastState st;
        for (int t = 1; t <= n; ++t) {
            const int agent = order_.agent_at(t);
            const int signal = signal_at(t, agent);
            detail::require_binary(signal, "signal");

            StepResult step;
            if (exact) {
                const StrategyTable& table =
                    strategies_.per_position[static_cast<std::size_t>(t - 1)];
                std::size_t obs = 0;
                for (std::size_t i = 0; i < table.observed_positions.size(); ++i)
                    obs |= static_cast<std::size_t>(actions_by_time_[static_cast<std::size_t>(
                               table.observed_positions[i] - 1)])
                           << i;
                const std::size_t key = (obs << 1) | static_cast<std::size_t>(signal);
                const int a = table.action[key] < 0 ? signal : static_cast<int>(table.action[key]);
                step = {a, static_cast<int>(table.observed_positions.size())};
                actions_by_time_[static_cast<std::size_t>(t - 1)] = static_cast<std::int8_t>(a);
            } else {
                step = fast_step(graph_.family(), graph_, agent, signal,
                                 policy_.guinea_pig_threshold, st);
            }

            if (step.action == theta) ++out.optimal_count;
            if (record_actions) out.actions.push_back(step.action);
            if (trace && *trace)
                (*trace)(TraceRecord{t, agent, graph_.role(agent), signal, step.observed_votes,
                                     step.action});
        }
        out.fraction = static_cast<double>(out.optimal_count) / static_cast<double>(n);
        return out;
    }

private:
    const Challenge& challenge_;
    const ObservationGraph& graph_;
    const ArrivalOrder& order_;
    const Policy& policy_;
    ExactStrategies strategies_;
    std::vector<std::int8_t> actions_by_time_;
};

}  // namespace

TrialOutcome run_trial_given(const Challenge& challenge, const ObservationGraph& graph,
                             const ArrivalOrder& order, const Policy& policy, int theta,
                             std::span<const int> signals_by_identity, bool record_actions,
                             const TraceSink* trace) {
    if (static_cast<int>(signals_by_identity.size()) != graph.num_agents())
        throw ParameterError("signal vector size does not match the agent count");
    TrialEngine engine(challenge, graph, order, policy);
    auto signal_at = [&](int, int agent) {
        return signals_by_identity[static_cast<std::size_t>(agent - 1)];
    };
    return engine.run(theta, signal_at, record_actions, trace);
}

TrialOutcome run_trial(const Challenge& challenge, const ObservationGraph& graph,
                       const ArrivalOrder& order, const Policy& policy, std::uint64_t seed,
                       bool record_actions, const TraceSink* trace) {
    TrialEngine engine(challenge, graph, order, policy);
    Rng rng(seed);
    const int theta = rng.bernoulli(challenge.prior_one) ? 1 : 0;
    const double accuracy = challenge.signal_accuracy();
    // Signals are drawn lazily, one per arrival, so an aggregate-only run
    // keeps O(1) state beyond the counters.
    auto signal_at = [&](int, int) { return rng.bernoulli(accuracy) ? theta : 1 - theta; };
    return engine.run(theta, signal_at, record_actions, trace);
}

double exact_expected_fraction(const Challenge& challenge, const ObservationGraph& graph,
                               const ArrivalOrder& order, const Policy& policy) {
    challenge.validate();
    const int n = graph.num_agents();
    if (n > 24) throw ResourceError("exact expectation enumerates 2^n profiles; n <= 24 required");

    const double p = 0.5 + challenge.delta;
    const double q = 0.5 - challenge.delta;
    std::vector<double> pow_p(static_cast<std::size_t>(n) + 1), pow_q(static_cast<std::size_t>(n) + 1);
    pow_p[0] = pow_q[0] = 1.0;
    for (int i = 1; i <= n; ++i) {
        pow_p[static_cast<std::size_t>(i)] = pow_p[static_cast<std::size_t>(i - 1)] * p;
        pow_q[static_cast<std::size_t>(i)] = pow_q[static_cast<std::size_t>(i - 1)] * q;
    }

    TrialEngine engine(challenge, graph, order, policy);
    std::vector<int> signals(static_cast<std::size_t>(n));
    double expectation = 0.0;
    for (int theta = 0; theta <= 1; ++theta) {
        const double prior = theta == 1 ? challenge.prior_one : 1.0 - challenge.prior_one;
        const std::uint32_t profiles = std::uint32_t{1} << n;
        for (std::uint32_t bits = 0; bits < profiles; ++bits) {
            for (int i = 0; i < n; ++i)
                signals[static_cast<std::size_t>(i)] = static_cast<int>((bits >> i) & 1u);
            const int matches =
                theta == 1 ? std::popcount(bits) : n - std::popcount(bits);
            const double w = prior * pow_p[static_cast<std::size_t>(matches)] *
                             pow_q[static_cast<std::size_t>(n - matches)];
            auto signal_at = [&](int, int agent) {
                return signals[static_cast<std::size_t>(agent - 1)];
            };
            expectation += w * engine.run(theta, signal_at, false, nullptr).fraction;
        }
    }
    return expectation;
}

}  // namespace celebnet
