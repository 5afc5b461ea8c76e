#ifndef CELEBNET_ADVERSARY_HPP
#define CELEBNET_ADVERSARY_HPP

#include <cstdint>
#include <vector>

#include "celebnet/engine.hpp"

namespace celebnet {

struct AdversaryResult {
    ArrivalOrder order;
    double value = 0.0;             // expected optimal-action fraction under `order`
    std::int64_t evaluated = 0;     // candidate orders scored
    bool exhaustive = false;        // all n! orders were enumerated
    bool exact_values = false;      // values from full enumeration vs Monte Carlo
};

// Searches for the arrival order minimizing the expected optimal-action
// fraction. The adversary knows the graph and policy but not the realized
// state or signals.
//
// For n <= 8 with budget >= n! the search enumerates all orders in
// lexicographic sequence with exact evaluation, so the returned minimizer is
// global and ties resolve to the lexicographically smallest order. Otherwise
// it hill-climbs over adjacent transpositions from the identity order until
// the budget of evaluations is spent, scoring candidates exactly when
// n <= 14 and by common-random-number Monte Carlo above that.
AdversaryResult adversarial_search(const ObservationGraph& graph, const Challenge& challenge,
                                   const Policy& policy, std::int64_t budget,
                                   std::uint64_t seed = 0, std::int64_t mc_trials = 200);

// Deterministic attack orders derived from the graph's role structure:
// identity, reverse, celebrities first, celebrities last, and celebrities
// spread evenly from the front. Used by the theorem-5 verifier as the
// heuristic adversary pool.
std::vector<ArrivalOrder> heuristic_attack_orders(const ObservationGraph& graph);

}  // namespace celebnet

#endif
