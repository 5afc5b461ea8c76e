#include "celebnet/permutations.hpp"

#include <algorithm>
#include <numeric>
#include <string>
#include <unordered_map>

namespace celebnet {

bool is_permutation_of_1_to_n(const std::vector<int>& v) {
    const int n = static_cast<int>(v.size());
    std::vector<char> seen(static_cast<std::size_t>(n) + 1, 0);
    for (int x : v) {
        if (x < 1 || x > n || seen[static_cast<std::size_t>(x)]) return false;
        seen[static_cast<std::size_t>(x)] = 1;
    }
    return true;
}

ArrivalOrder ArrivalOrder::identity(int n) {
    if (n < 1) throw ParameterError("order size must be >= 1");
    ArrivalOrder o;
    o.order.resize(static_cast<std::size_t>(n));
    std::iota(o.order.begin(), o.order.end(), 1);
    return o;
}

void ArrivalOrder::validate() const {
    if (order.empty() || !is_permutation_of_1_to_n(order))
        throw ParameterError("arrival order must be a permutation of 1..n");
}

Relabeling Relabeling::identity(int n) {
    if (n < 1) throw ParameterError("relabeling size must be >= 1");
    Relabeling r;
    r.tau.resize(static_cast<std::size_t>(n));
    std::iota(r.tau.begin(), r.tau.end(), 1);
    return r;
}

void Relabeling::validate() const {
    if (tau.empty() || !is_permutation_of_1_to_n(tau))
        throw ParameterError("relabeling must be a permutation of 1..n");
}

namespace {

std::vector<int> shuffled_identity(int n, std::uint64_t seed) {
    if (n < 1) throw ParameterError("permutation size must be >= 1");
    std::vector<int> v(static_cast<std::size_t>(n));
    std::iota(v.begin(), v.end(), 1);
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const auto j = static_cast<std::size_t>(rng.next_below(static_cast<std::uint64_t>(i) + 1));
        std::swap(v[static_cast<std::size_t>(i)], v[j]);
    }
    return v;
}

}  // namespace

ArrivalOrder uniform_order(int n, std::uint64_t seed) {
    ArrivalOrder o;
    o.order = shuffled_identity(n, seed);
    return o;
}

Relabeling uniform_relabeling(int n, std::uint64_t seed) {
    Relabeling r;
    r.tau = shuffled_identity(n, seed);
    return r;
}

std::vector<int> uniform_prefix(int n, int len, Rng& rng) {
    if (n < 1 || len < 0 || len > n) throw ParameterError("uniform_prefix needs 0 <= len <= n");
    std::unordered_map<int, int> displaced;  // index -> value, for touched slots only
    auto value_at = [&](int idx) {
        const auto it = displaced.find(idx);
        return it == displaced.end() ? idx + 1 : it->second;
    };
    std::vector<int> prefix(static_cast<std::size_t>(len));
    for (int i = 0; i < len; ++i) {
        const int j = i + static_cast<int>(rng.next_below(static_cast<std::uint64_t>(n - i)));
        prefix[static_cast<std::size_t>(i)] = value_at(j);
        displaced[j] = value_at(i);
    }
    return prefix;
}

ArrivalOrder weighted_order(const std::vector<double>& weights, std::uint64_t seed) {
    const int n = static_cast<int>(weights.size());
    if (n < 1) throw ParameterError("weighted_order needs at least one weight");
    for (int i = 0; i < n; ++i)
        if (!(weights[static_cast<std::size_t>(i)] > 0.0))
            throw ParameterError("weights must be strictly positive (agent " +
                                 std::to_string(i + 1) + ")");

    // Fenwick tree over remaining weights; each pick descends the tree to the
    // prefix-sum position of a uniform draw, then zeroes the picked agent.
    std::vector<double> tree(static_cast<std::size_t>(n) + 1, 0.0);
    auto update = [&](int i, double delta) {
        for (; i <= n; i += i & -i) tree[static_cast<std::size_t>(i)] += delta;
    };
    for (int i = 1; i <= n; ++i) update(i, weights[static_cast<std::size_t>(i - 1)]);

    int log2n = 0;
    while ((1 << (log2n + 1)) <= n) ++log2n;

    auto prefix_sum = [&](int i) {
        double s = 0.0;
        for (; i > 0; i -= i & -i) s += tree[static_cast<std::size_t>(i)];
        return s;
    };

    Rng rng(seed);
    std::vector<char> taken(static_cast<std::size_t>(n) + 1, 0);
    ArrivalOrder out;
    out.order.reserve(static_cast<std::size_t>(n));
    for (int picked = 0; picked < n; ++picked) {
        double target = rng.next_unit() * prefix_sum(n);
        int pos = 0;
        for (int step = 1 << log2n; step > 0; step >>= 1) {
            const int next = pos + step;
            if (next <= n && tree[static_cast<std::size_t>(next)] <= target) {
                target -= tree[static_cast<std::size_t>(next)];
                pos = next;
            }
        }
        int agent = pos + 1;
        // Rounding at the top of the CDF can land on an exhausted slot; step
        // to the nearest remaining agent.
        while (agent <= n && taken[static_cast<std::size_t>(agent)]) ++agent;
        if (agent > n) {
            agent = n;
            while (taken[static_cast<std::size_t>(agent)]) --agent;
        }
        taken[static_cast<std::size_t>(agent)] = 1;
        out.order.push_back(agent);
        update(agent, -weights[static_cast<std::size_t>(agent - 1)]);
    }
    return out;
}

}  // namespace celebnet
