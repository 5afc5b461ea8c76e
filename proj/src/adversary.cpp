#include "celebnet/adversary.hpp"

#include <algorithm>
#include <numeric>

namespace celebnet {

namespace {

std::int64_t factorial_capped(int n, std::int64_t cap) {
    std::int64_t f = 1;
    for (int i = 2; i <= n; ++i) {
        f *= i;
        if (f > cap) return cap + 1;
    }
    return f;
}

double mc_value(const Challenge& challenge, const ObservationGraph& graph,
                const ArrivalOrder& order, const Policy& policy, std::int64_t trials,
                std::uint64_t seed) {
    double sum = 0.0;
    for (std::int64_t i = 0; i < trials; ++i)
        sum += run_trial(challenge, graph, order, policy, derive_seed(seed, static_cast<std::uint64_t>(i)),
                         false)
                   .fraction;
    return sum / static_cast<double>(trials);
}

}  // namespace

AdversaryResult adversarial_search(const ObservationGraph& graph, const Challenge& challenge,
                                   const Policy& policy, std::int64_t budget, std::uint64_t seed,
                                   std::int64_t mc_trials) {
    if (budget < 1) throw ParameterError("adversary budget must be >= 1");
    if (mc_trials < 1) throw ParameterError("mc_trials must be >= 1");
    const int n = graph.num_agents();

    AdversaryResult result;
    const std::int64_t total_orders = factorial_capped(n, budget);

    // Values whose difference is below this are treated as ties; enumeration
    // sums the same rational terms in different orders, so exact ties land
    // within a few ulps of each other.
    constexpr double kTieTolerance = 1e-12;

    if (n <= 8 && total_orders <= budget) {
        // Exhaustive sweep in lexicographic order; keeping only improvements
        // beyond the tie tolerance makes the returned minimizer the
        // lexicographically smallest one.
        std::vector<int> perm(static_cast<std::size_t>(n));
        std::iota(perm.begin(), perm.end(), 1);
        bool first = true;
        do {
            ArrivalOrder candidate{perm};
            const double v = exact_expected_fraction(challenge, graph, candidate, policy);
            ++result.evaluated;
            if (first || v < result.value - kTieTolerance) {
                result.value = v;
                result.order = std::move(candidate);
                first = false;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        result.exhaustive = true;
        result.exact_values = true;
        return result;
    }

    // Greedy hill-climbing over adjacent transpositions from the identity.
    const bool exact = n <= 14;
    auto value_of = [&](const ArrivalOrder& order) {
        ++result.evaluated;
        return exact ? exact_expected_fraction(challenge, graph, order, policy)
                     : mc_value(challenge, graph, order, policy, mc_trials, seed);
    };

    ArrivalOrder current = ArrivalOrder::identity(n);
    result.exact_values = exact;
    result.value = value_of(current);
    bool improved = true;
    while (improved && result.evaluated < budget) {
        improved = false;
        for (int i = 0; i + 1 < n && result.evaluated < budget; ++i) {
            std::swap(current.order[static_cast<std::size_t>(i)],
                      current.order[static_cast<std::size_t>(i) + 1]);
            const double v = value_of(current);
            if (v < result.value - kTieTolerance) {
                result.value = v;
                improved = true;
            } else {
                std::swap(current.order[static_cast<std::size_t>(i)],
                          current.order[static_cast<std::size_t>(i) + 1]);
            }
        }
    }
    result.order = std::move(current);
    return result;
}

std::vector<ArrivalOrder> heuristic_attack_orders(const ObservationGraph& graph) {
    const int n = graph.num_agents();
    std::vector<int> celebs, commons;
    for (int i = 1; i <= n; ++i)
        (graph.is_celebrity(i) ? celebs : commons).push_back(i);

    std::vector<ArrivalOrder> orders;
    orders.push_back(ArrivalOrder::identity(n));

    ArrivalOrder reverse = ArrivalOrder::identity(n);
    std::reverse(reverse.order.begin(), reverse.order.end());
    orders.push_back(std::move(reverse));

    ArrivalOrder celebs_first;
    celebs_first.order = celebs;
    celebs_first.order.insert(celebs_first.order.end(), commons.begin(), commons.end());
    orders.push_back(std::move(celebs_first));

    ArrivalOrder celebs_last;
    celebs_last.order = commons;
    celebs_last.order.insert(celebs_last.order.end(), celebs.begin(), celebs.end());
    orders.push_back(std::move(celebs_last));

    // Celebrities spread evenly across the sequence, starting immediately:
    // starves every celebrity of a large guinea-pig pool.
    ArrivalOrder spread;
    spread.order.reserve(static_cast<std::size_t>(n));
    const std::size_t gap = celebs.empty()
                                ? static_cast<std::size_t>(n)
                                : (commons.size() + celebs.size() - 1) / celebs.size() + 1;
    std::size_t ci = 0, mi = 0;
    for (int t = 0; t < n; ++t) {
        if (ci < celebs.size() && (static_cast<std::size_t>(t) % gap == 0 || mi == commons.size()))
            spread.order.push_back(celebs[ci++]);
        else
            spread.order.push_back(commons[mi++]);
    }
    orders.push_back(std::move(spread));
    return orders;
}

}  // namespace celebnet
