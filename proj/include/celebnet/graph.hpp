#ifndef CELEBNET_GRAPH_HPP
#define CELEBNET_GRAPH_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "celebnet/errors.hpp"
#include "celebnet/permutations.hpp"

namespace celebnet {

enum class Role { plain, celebrity, commoner };
enum class GraphFamily { empty, clique, celebrity, explicit_edges };

const char* family_name(GraphFamily f);
GraphFamily family_from_name(const std::string& name);

// Undirected visibility relation over agents 1..n plus role labels.
//
// The empty/clique/celebrity families store no edge list: adjacency and
// degrees are answered from the role table alone, so a bi-clique with
// N ~ 10^6 agents costs O(N) bytes. Arbitrary graphs use sorted adjacency
// vectors ("explicit" family) and carry plain roles.
class ObservationGraph {
public:
    static ObservationGraph empty(int n);
    static ObservationGraph clique(int n);
    // Agents 1..k are celebrities, k+1..n commoners; edges = {(i,j): i <= k < j}.
    static ObservationGraph celebrity(int n, int k);
    // Agent i is a celebrity iff tau(i) <= k.
    static ObservationGraph relabeled_celebrity(int n, int k, const Relabeling& tau);
    static ObservationGraph from_edges(int n, const std::vector<std::pair<int, int>>& edges);

    GraphFamily family() const { return family_; }
    int num_agents() const { return n_; }
    int num_celebrities() const { return k_; }

    Role role(int agent) const {
        check_agent(agent);
        if (family_ != GraphFamily::celebrity) return Role::plain;
        return celeb_[static_cast<std::size_t>(agent)] ? Role::celebrity : Role::commoner;
    }
    bool is_celebrity(int agent) const { return role(agent) == Role::celebrity; }

    bool observes(int a, int b) const;
    int degree(int agent) const;
    std::int64_t num_edges() const;
    const std::vector<int>& explicit_neighbors(int agent) const;

    // {"family":..., "n":..., "k":..., "relabeling":[...]} for implicit
    // families; {"family":"explicit", "n":..., "edges":[[i,j],...]} otherwise.
    nlohmann::ordered_json to_json() const;
    static ObservationGraph from_json(const nlohmann::json& doc);

private:
    ObservationGraph() = default;
    void check_agent(int agent) const {
        if (agent < 1 || agent > n_)
            throw ParameterError("agent id out of range: " + std::to_string(agent));
    }

    GraphFamily family_ = GraphFamily::empty;
    int n_ = 0;
    int k_ = 0;
    std::vector<char> celeb_;            // 1-based, celebrity family only
    std::vector<int> relabeling_;        // tau used at construction (empty = identity)
    std::vector<std::vector<int>> adj_;  // 1-based sorted lists, explicit family only
};

// Theorem-4 sizing: sufficient guinea-pig threshold, celebrity count, and
// population for an epsilon-optimal celebrity graph. Epsilon above
// 0.5 - delta is clamped down (the WLOG step of the proof) and the clamp is
// reported via requested_epsilon != epsilon.
struct GraphSizing {
    double epsilon = 0.0;            // effective (possibly clamped)
    double requested_epsilon = 0.0;  // as passed in
    double delta = 0.0;
    int guinea_pig_threshold = 0;             // J = ceil(1 / (delta^2 epsilon))
    int num_celebrities = 0;                  // K = ceil((8/epsilon) ln(4/epsilon))
    std::int64_t sufficient_population = 0;   // N_hat = ceil((128/(eps^3 delta^2)) ln(4/eps))
    bool clamped() const { return epsilon != requested_epsilon; }
};

GraphSizing sizing(double epsilon, double delta);

}  // namespace celebnet

#endif
