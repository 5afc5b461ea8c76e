#ifndef CELEBNET_PERMUTATIONS_HPP
#define CELEBNET_PERMUTATIONS_HPP

#include <cstdint>
#include <vector>

#include "celebnet/errors.hpp"
#include "celebnet/rng.hpp"

namespace celebnet {

bool is_permutation_of_1_to_n(const std::vector<int>& v);

// Arrival order: order[t-1] is the identity of the agent arriving at time t.
// (This is the inverse of the convention that maps an agent to its position;
// everything downstream iterates over arrival times.)
struct ArrivalOrder {
    std::vector<int> order;

    static ArrivalOrder identity(int n);
    int num_agents() const { return static_cast<int>(order.size()); }
    int agent_at(int t) const { return order[static_cast<std::size_t>(t) - 1]; }  // t in 1..n
    void validate() const;
};

// Relabeling: tau[i-1] is the designer's label of agent i. In a relabeled
// celebrity graph, agent i is a celebrity iff tau(i) <= k.
struct Relabeling {
    std::vector<int> tau;

    static Relabeling identity(int n);
    int num_agents() const { return static_cast<int>(tau.size()); }
    int label_of(int agent) const { return tau[static_cast<std::size_t>(agent) - 1]; }
    void validate() const;
};

// Unbiased Fisher-Yates sample of a uniform permutation of 1..n.
ArrivalOrder uniform_order(int n, std::uint64_t seed);
Relabeling uniform_relabeling(int n, std::uint64_t seed);

// Sequential sampling without replacement proportional to weight: position 1
// is drawn with probability w_i / sum(w), removed, repeat. Equal weights
// reproduce the uniform distribution.
ArrivalOrder weighted_order(const std::vector<double>& weights, std::uint64_t seed);

// First `len` entries of a uniform permutation of 1..n, via sparse
// Fisher-Yates: O(len) time and space regardless of n.
std::vector<int> uniform_prefix(int n, int len, Rng& rng);

}  // namespace celebnet

#endif
