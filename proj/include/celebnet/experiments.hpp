#ifndef CELEBNET_EXPERIMENTS_HPP
#define CELEBNET_EXPERIMENTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "celebnet/adversary.hpp"
#include "celebnet/engine.hpp"
#include "celebnet/stats.hpp"

namespace celebnet {

// ---------------------------------------------------------------------------
// Estimation
// ---------------------------------------------------------------------------

enum class OrderModelKind { fixed, uniform, weighted };

struct OrderModel {
    OrderModelKind kind = OrderModelKind::uniform;
    ArrivalOrder fixed_order;      // kind == fixed
    std::vector<double> weights;   // kind == weighted

    static OrderModel uniform() { return {}; }
    static OrderModel fixed(ArrivalOrder order);
    static OrderModel weighted(std::vector<double> w);

    ArrivalOrder sample(int n, std::uint64_t seed) const;
    const char* name() const;
};

struct EstimateResult {
    double mean_fraction = 0.0;
    std::int64_t trials = 0;
    double ci_lower = 0.0;   // Wilson interval on the pooled per-agent-correct
    double ci_upper = 1.0;   // proportion
    double confidence = 0.95;
    std::uint64_t seed = 0;
    std::int64_t successes = 0;      // pooled correct decisions
    std::int64_t observations = 0;   // trials * n
    double trial_std = 0.0;          // sample std of per-trial fractions

    double trial_stderr() const;
    nlohmann::ordered_json to_json() const;
};

// Number of worker threads: `requested` if > 0, else the CELEBNET_WORKERS
// environment variable, else hardware concurrency.
int resolve_workers(int requested);

// Mean optimal-action fraction over independent trials. Trial i draws its
// order (per the model) and its trial stream from seeds derived off `seed`
// by trial index, so the result is independent of worker scheduling.
EstimateResult estimate_fraction(const Challenge& challenge, const ObservationGraph& graph,
                                 const OrderModel& order_model, const Policy& policy,
                                 std::int64_t trials, std::uint64_t seed,
                                 double confidence = 0.95, int workers = 0);

// Same, but every trial also draws a fresh uniform relabeling of the
// celebrity graph (the randomized-designer construction).
EstimateResult estimate_relabeled_fraction(const Challenge& challenge, int n, int k,
                                           const OrderModel& order_model, const Policy& policy,
                                           std::int64_t trials, std::uint64_t seed,
                                           double confidence = 0.95, int workers = 0);

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct Report {
    std::string title;
    nlohmann::ordered_json data = nlohmann::ordered_json::object();
    std::vector<CheckResult> checks;
    bool inconclusive = false;  // mean cleared the bound but the CI lower bound did not

    bool passed() const;
    void check(const std::string& name, bool pass, const std::string& detail = "");
    std::string to_text() const;
    nlohmann::ordered_json to_json() const;
};

// One row of the sweep CSV: epsilon,delta,n,k,j,trials,mean_fraction,ci_lo,ci_hi,seed
struct SweepRow {
    double epsilon = 0.0;
    double delta = 0.0;
    std::int64_t n = 0;
    int k = 0;
    int j = 0;
    std::int64_t trials = 0;
    double mean_fraction = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    std::uint64_t seed = 0;
};

// ---------------------------------------------------------------------------
// Exact verifiers
// ---------------------------------------------------------------------------

// Exact binomial tail at N = ceil(1/(4 delta^2 epsilon)) exceeds 1 - epsilon.
Report verify_lemma1(double delta, double epsilon);

// P(no celebrity among the first J arrivals) at N = ceil(2JK/eps) + J, by the
// telescoping product, checked against 1 - eps and cross-checked by Monte
// Carlo permutation sampling (skipped when mc_samples == 0).
Report verify_lemma2(double epsilon, int j_guineas, int k_celebs, std::int64_t mc_samples = 0,
                     std::uint64_t seed = 0, double confidence = 0.95);

// P(some celebrity arrives in slots J+1..floor(N eps) | none among first J)
// at K = ceil((2/eps) ln(1/eps)), N = ceil(2J/eps).
Report verify_lemma3(double epsilon, int j_guineas, std::int64_t mc_samples = 0,
                     std::uint64_t seed = 0, double confidence = 0.95);

struct Theorem4Options {
    std::int64_t n_override = 0;  // 0 = use sizing's N_hat
    double confidence = 0.95;
    int workers = 0;
    bool ladder = false;           // also check the N/8..N doubling ladder
    std::int64_t max_population = 20'000'000;
};

// Builds the sized celebrity graph, estimates the fraction under uniform
// arrival with the paper-rule policy and checks mean >= 1 - epsilon.
Report verify_theorem4(double epsilon, double delta, std::int64_t trials, std::uint64_t seed,
                       const Theorem4Options& options = {});
std::vector<SweepRow> theorem4_sweep_rows(const Report& report);

// Step-equivalence of the two lemma-4 challenges for one (sigma, tau, signal
// profile, state): arrival sigma with signals s(tau(i)) on the tau-relabeled
// bi-clique versus arrival tau(sigma) with signals s on the standard
// bi-clique.
bool lemma4_step_equivalence(const ArrivalOrder& sigma, const Relabeling& tau,
                             const std::vector<int>& signals, int theta,
                             const Challenge& challenge, int k, const Policy& policy);

// Exhaustive lemma-4 sweep over all (sigma, tau) pairs, signal profiles and
// states, plus a search for the counterexample that appears when challenge 1
// keeps the unpermuted signals.
Report verify_lemma4(int n, int k, const Challenge& challenge, const Policy& policy);

// Exact equality of expected optimal-action counts across the two
// constructions, per (sigma, tau) pair and on average (full enumeration;
// n <= 7).
Report corollary2_equivalence(int n, int k, const Challenge& challenge, const Policy& policy,
                              double tolerance = 1e-12);

// Exact small-n theorem-5 reduction: for every fixed arrival order, the
// adversary's value against the tau-randomized graph equals the
// uniform-arrival value of the fixed graph.
Report verify_theorem5_small(int n, int k, const Challenge& challenge, const Policy& policy,
                             double tolerance = 1e-12);

struct Theorem5Options {
    std::int64_t n_override = 0;
    std::int64_t trials_per_order = 100;
    double confidence = 0.95;
    int workers = 0;
    std::int64_t max_population = 20'000'000;
};

// Worst-of-heuristic-adversary check of the randomized celebrity graph:
// every attack order must keep the mean fraction >= 1 - epsilon when the
// relabeling is redrawn each trial.
Report verify_theorem5(double epsilon, double delta, std::uint64_t seed,
                       const Theorem5Options& options = {});

struct DerandomizeResult {
    Relabeling best_relabeling;
    EstimateResult best_score;
    double average_score = 0.0;
    EstimateResult randomized_score;
    Report report;
};

// Theorem-6 derandomization by sampling: scores `samples` relabeled graphs
// under the arrival model, returns the best one, and checks best >= average
// (and best >= randomized ensemble score - CI width).
DerandomizeResult derandomize_theorem6(const Challenge& challenge, int n, int k,
                                       const OrderModel& order_model, const Policy& policy,
                                       int samples, std::int64_t trials_per_sample,
                                       std::uint64_t seed, double confidence = 0.95,
                                       int workers = 0, std::int64_t randomized_trials = 0);

}  // namespace celebnet

#endif
