#include "celebnet/graph.hpp"

#include <algorithm>
#include <cmath>

#include "celebnet/model.hpp"

namespace celebnet {

const char* family_name(GraphFamily f) {
    switch (f) {
        case GraphFamily::empty: return "empty";
        case GraphFamily::clique: return "clique";
        case GraphFamily::celebrity: return "celebrity";
        case GraphFamily::explicit_edges: return "explicit";
    }
    return "?";
}

GraphFamily family_from_name(const std::string& name) {
    if (name == "empty") return GraphFamily::empty;
    if (name == "clique") return GraphFamily::clique;
    if (name == "celebrity") return GraphFamily::celebrity;
    if (name == "explicit") return GraphFamily::explicit_edges;
    throw ParameterError("unknown graph family: " + name);
}

ObservationGraph ObservationGraph::empty(int n) {
    if (n < 1) throw ParameterError("graph needs n >= 1");
    ObservationGraph g;
    g.family_ = GraphFamily::empty;
    g.n_ = n;
    return g;
}

ObservationGraph ObservationGraph::clique(int n) {
    if (n < 1) throw ParameterError("graph needs n >= 1");
    ObservationGraph g;
    g.family_ = GraphFamily::clique;
    g.n_ = n;
    return g;
}

ObservationGraph ObservationGraph::celebrity(int n, int k) {
    return relabeled_celebrity(n, k, Relabeling::identity(n));
}

ObservationGraph ObservationGraph::relabeled_celebrity(int n, int k, const Relabeling& tau) {
    if (n < 2) throw ParameterError("celebrity graph needs n >= 2");
    if (k < 1 || k >= n)
        throw ParameterError("celebrity count must satisfy 1 <= k < n, got k=" +
                             std::to_string(k) + " n=" + std::to_string(n));
    if (tau.num_agents() != n) throw ParameterError("relabeling size does not match n");
    tau.validate();

    ObservationGraph g;
    g.family_ = GraphFamily::celebrity;
    g.n_ = n;
    g.k_ = k;
    g.celeb_.assign(static_cast<std::size_t>(n) + 1, 0);
    bool identity = true;
    for (int i = 1; i <= n; ++i) {
        if (tau.label_of(i) <= k) g.celeb_[static_cast<std::size_t>(i)] = 1;
        if (tau.label_of(i) != i) identity = false;
    }
    if (!identity) g.relabeling_ = tau.tau;
    return g;
}

ObservationGraph ObservationGraph::from_edges(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n < 1) throw ParameterError("graph needs n >= 1");
    ObservationGraph g;
    g.family_ = GraphFamily::explicit_edges;
    g.n_ = n;
    g.adj_.assign(static_cast<std::size_t>(n) + 1, {});
    for (auto [a, b] : edges) {
        if (a < 1 || a > n || b < 1 || b > n)
            throw ParameterError("edge endpoint out of range: (" + std::to_string(a) + "," +
                                 std::to_string(b) + ")");
        if (a == b) throw ParameterError("self-loop rejected: " + std::to_string(a));
        g.adj_[static_cast<std::size_t>(a)].push_back(b);
        g.adj_[static_cast<std::size_t>(b)].push_back(a);
    }
    for (auto& nb : g.adj_) {
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    return g;
}

bool ObservationGraph::observes(int a, int b) const {
    check_agent(a);
    check_agent(b);
    if (a == b) return false;
    switch (family_) {
        case GraphFamily::empty: return false;
        case GraphFamily::clique: return true;
        case GraphFamily::celebrity:
            return celeb_[static_cast<std::size_t>(a)] != celeb_[static_cast<std::size_t>(b)];
        case GraphFamily::explicit_edges: {
            const auto& nb = adj_[static_cast<std::size_t>(a)];
            return std::binary_search(nb.begin(), nb.end(), b);
        }
    }
    return false;
}

int ObservationGraph::degree(int agent) const {
    check_agent(agent);
    switch (family_) {
        case GraphFamily::empty: return 0;
        case GraphFamily::clique: return n_ - 1;
        case GraphFamily::celebrity:
            return celeb_[static_cast<std::size_t>(agent)] ? n_ - k_ : k_;
        case GraphFamily::explicit_edges:
            return static_cast<int>(adj_[static_cast<std::size_t>(agent)].size());
    }
    return 0;
}

std::int64_t ObservationGraph::num_edges() const {
    switch (family_) {
        case GraphFamily::empty: return 0;
        case GraphFamily::clique: return static_cast<std::int64_t>(n_) * (n_ - 1) / 2;
        case GraphFamily::celebrity: return static_cast<std::int64_t>(k_) * (n_ - k_);
        case GraphFamily::explicit_edges: {
            std::int64_t deg_sum = 0;
            for (const auto& nb : adj_) deg_sum += static_cast<std::int64_t>(nb.size());
            return deg_sum / 2;
        }
    }
    return 0;
}

const std::vector<int>& ObservationGraph::explicit_neighbors(int agent) const {
    check_agent(agent);
    if (family_ != GraphFamily::explicit_edges)
        throw PolicyError("explicit_neighbors is only available for explicit graphs");
    return adj_[static_cast<std::size_t>(agent)];
}

nlohmann::ordered_json ObservationGraph::to_json() const {
    nlohmann::ordered_json doc;
    doc["family"] = family_name(family_);
    doc["n"] = n_;
    if (family_ == GraphFamily::celebrity) {
        doc["k"] = k_;
        if (!relabeling_.empty()) doc["relabeling"] = relabeling_;
    }
    if (family_ == GraphFamily::explicit_edges) {
        auto edges = nlohmann::ordered_json::array();
        for (int a = 1; a <= n_; ++a)
            for (int b : adj_[static_cast<std::size_t>(a)])
                if (a < b) edges.push_back({a, b});
        doc["edges"] = edges;
    }
    return doc;
}

ObservationGraph ObservationGraph::from_json(const nlohmann::json& doc) {
    if (!doc.is_object() || !doc.contains("family") || !doc.contains("n"))
        throw ParameterError("graph document needs \"family\" and \"n\"");
    const GraphFamily fam = family_from_name(doc.at("family").get<std::string>());
    const int n = doc.at("n").get<int>();
    switch (fam) {
        case GraphFamily::empty: return empty(n);
        case GraphFamily::clique: return clique(n);
        case GraphFamily::celebrity: {
            if (!doc.contains("k")) throw ParameterError("celebrity graph document needs \"k\"");
            const int k = doc.at("k").get<int>();
            if (doc.contains("relabeling")) {
                Relabeling tau;
                tau.tau = doc.at("relabeling").get<std::vector<int>>();
                return relabeled_celebrity(n, k, tau);
            }
            return celebrity(n, k);
        }
        case GraphFamily::explicit_edges: {
            if (!doc.contains("edges")) throw ParameterError("explicit graph document needs \"edges\"");
            std::vector<std::pair<int, int>> edges;
            for (const auto& e : doc.at("edges")) {
                if (!e.is_array() || e.size() != 2)
                    throw ParameterError("edges must be [i,j] pairs");
                edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
            return from_edges(n, edges);
        }
    }
    throw ParameterError("unreachable graph family");
}

GraphSizing sizing(double epsilon, double delta) {
    detail::require_delta(delta);
    if (!(epsilon > 0.0) || !(epsilon < 1.0))
        throw ParameterError("epsilon must be in (0, 1), got " + std::to_string(epsilon));

    GraphSizing s;
    s.requested_epsilon = epsilon;
    // WLOG clamp from the theorem's proof; at delta = 0.5 the clamp target
    // degenerates to 0 and is skipped (signals are already perfect).
    if (delta < 0.5 && epsilon > 0.5 - delta) epsilon = 0.5 - delta;
    s.epsilon = epsilon;
    s.delta = delta;

    const double j_real = 1.0 / (delta * delta * epsilon);
    const double k_real = (8.0 / epsilon) * std::log(4.0 / epsilon);
    const double n_real = (128.0 / (epsilon * epsilon * epsilon * delta * delta)) *
                          std::log(4.0 / epsilon);
    if (j_real > 2e9 || n_real > 9e18)
        throw ResourceError("sizing overflow: epsilon/delta too small");
    s.guinea_pig_threshold = static_cast<int>(std::ceil(j_real));
    s.num_celebrities = static_cast<int>(std::ceil(k_real));
    s.sufficient_population = static_cast<std::int64_t>(std::ceil(n_real));

    // Ceiling only strengthens the bound N_hat >= 8JK/eps + J; verify anyway.
    const double lhs = static_cast<double>(s.sufficient_population);
    const double rhs = 8.0 * s.guinea_pig_threshold * s.num_celebrities / epsilon +
                       s.guinea_pig_threshold;
    if (lhs < rhs)
        throw std::logic_error("sizing invariant violated: N_hat < 8JK/eps + J");
    return s;
}

}  // namespace celebnet
