#ifndef CELEBNET_MODEL_HPP
#define CELEBNET_MODEL_HPP

#include <cstdint>

#include "celebnet/errors.hpp"

namespace celebnet {

// Binary symmetric learning environment: two states/signals/actions {0,1},
// match-the-state utility, signal accuracy 0.5 + delta.
struct Challenge {
    int num_agents = 1;
    double delta = 0.1;      // signal accuracy margin, in (0, 0.5]
    double prior_one = 0.5;  // P(theta = 1)

    void validate() const;
    double signal_accuracy() const { return 0.5 + delta; }
};

struct WorldState {
    int theta = 0;  // drawn once per trial from the prior
};

// P(signal | state) under the symmetric binary channel.
double signal_likelihood(int state, int signal, double delta);

// P(theta=1 | k_ones of m_total independent signals equal 1), by Bayes rule.
// Computed in log-odds space; with a uniform prior the value depends only on
// the margin 2*k_ones - m_total.
double posterior_from_signal_counts(int k_ones, int m_total, double delta, double prior_one);

// Exact split of the vote margin 2X - n for X ~ Binomial(n, p):
//   below  = P(2X - n <= -2)
//   middle = P(|2X - n| <= 1)
//   above  = P(2X - n >= +2)
// Probabilities are computed by the mode-anchored term recurrence with
// compensated summation and normalized by the total mass, which keeps the
// absolute error near machine precision up to n ~ 10^6.
struct MarginTails {
    double below = 0.0;
    double middle = 0.0;
    double above = 0.0;
};
MarginTails binomial_margin_tails(std::int64_t n, double p);

// P(clear majority of correct signals among n agents), i.e. P(2X - n >= 2)
// with X ~ Binomial(n, 0.5 + delta). Margin >= 2 is the integerization of
// the sum >= n/2 + 1 threshold that is exact for both parities of n.
double clear_majority_probability(std::int64_t n, double delta);

// Exact posterior P(theta=1 | celebrity action, own signal) for a follower
// that observes one celebrity. The celebrity follows the strict majority
// (margin >= 2) of j_observed independent signal-followers and otherwise its
// own signal; celebrity action and own signal are conditionally independent
// given theta. Uniform prior.
double follower_posterior(int celebrity_action, int own_signal, std::int64_t j_observed,
                          double delta);

namespace detail {
void require_binary(int v, const char* name);
void require_delta(double delta);
}  // namespace detail

}  // namespace celebnet

#endif
