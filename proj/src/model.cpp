#include "celebnet/model.hpp"

#include <cmath>
#include <string>

namespace celebnet {

namespace detail {

void require_binary(int v, const char* name) {
    if (v != 0 && v != 1)
        throw ParameterError(std::string(name) + " must be 0 or 1, got " + std::to_string(v));
}

void require_delta(double delta) {
    if (!(delta > 0.0) || !(delta <= 0.5))
        throw ParameterError("delta must be in (0, 0.5], got " + std::to_string(delta));
}

}  // namespace detail

void Challenge::validate() const {
    if (num_agents < 1)
        throw ParameterError("num_agents must be >= 1, got " + std::to_string(num_agents));
    detail::require_delta(delta);
    if (!(prior_one > 0.0) || !(prior_one < 1.0))
        throw ParameterError("prior_one must be in (0, 1), got " + std::to_string(prior_one));
}

double signal_likelihood(int state, int signal, double delta) {
    detail::require_binary(state, "state");
    detail::require_binary(signal, "signal");
    detail::require_delta(delta);
    return signal == state ? 0.5 + delta : 0.5 - delta;
}

double posterior_from_signal_counts(int k_ones, int m_total, double delta, double prior_one) {
    if (m_total < 0 || k_ones < 0 || k_ones > m_total)
        throw ParameterError("signal counts must satisfy 0 <= k_ones <= m_total, got k=" +
                             std::to_string(k_ones) + " m=" + std::to_string(m_total));
    detail::require_delta(delta);
    if (!(prior_one > 0.0) || !(prior_one < 1.0))
        throw ParameterError("prior_one must be in (0, 1)");

    const int margin = 2 * k_ones - m_total;
    if (margin == 0) return prior_one;  // evidence cancels for any delta
    // log-odds update; at delta = 0.5 the per-signal log ratio is +inf and
    // the sign of the margin decides.
    const double logit = std::log(prior_one / (1.0 - prior_one)) +
                         margin * (std::log(0.5 + delta) - std::log(0.5 - delta));
    if (std::isinf(logit)) return logit > 0 ? 1.0 : 0.0;
    return 1.0 / (1.0 + std::exp(-logit));
}

MarginTails binomial_margin_tails(std::int64_t n, double p) {
    if (n < 0) throw ParameterError("binomial size must be >= 0");
    if (!(p >= 0.0) || !(p <= 1.0)) throw ParameterError("binomial probability must be in [0, 1]");
    if (n == 0) return {0.0, 1.0, 0.0};

    auto bucket_of = [n](std::int64_t x) {
        const std::int64_t d = 2 * x - n;
        return d >= 2 ? 2 : (d <= -2 ? 0 : 1);
    };
    if (p == 0.0 || p == 1.0) {
        MarginTails t;
        switch (bucket_of(p == 1.0 ? n : 0)) {
            case 0: t.below = 1.0; break;
            case 1: t.middle = 1.0; break;
            default: t.above = 1.0; break;
        }
        return t;
    }

    // Kahan-compensated bucket sums over pmf terms generated by the ratio
    // recurrence outward from the mode; all terms <= term(mode) so nothing
    // overflows and far-tail underflow is harmless.
    double sums[3] = {0.0, 0.0, 0.0};
    double comp[3] = {0.0, 0.0, 0.0};
    auto add = [&](int b, double v) {
        const double y = v - comp[b];
        const double t = sums[b] + y;
        comp[b] = (t - sums[b]) - y;
        sums[b] = t;
    };

    const double q = 1.0 - p;
    const std::int64_t mode = static_cast<std::int64_t>((n + 1) * p);
    const double log_mode = std::lgamma(static_cast<double>(n) + 1.0) -
                            std::lgamma(static_cast<double>(mode) + 1.0) -
                            std::lgamma(static_cast<double>(n - mode) + 1.0) +
                            mode * std::log(p) + (n - mode) * std::log(q);
    const double term_mode = std::exp(log_mode);

    add(bucket_of(mode), term_mode);
    double t = term_mode;
    for (std::int64_t x = mode + 1; x <= n && t > 0.0; ++x) {
        t *= (static_cast<double>(n - x + 1) / static_cast<double>(x)) * (p / q);
        add(bucket_of(x), t);
    }
    t = term_mode;
    for (std::int64_t x = mode - 1; x >= 0 && t > 0.0; --x) {
        t *= (static_cast<double>(x + 1) / static_cast<double>(n - x)) * (q / p);
        add(bucket_of(x), t);
    }

    const double total = sums[0] + sums[1] + sums[2];
    return {sums[0] / total, sums[1] / total, sums[2] / total};
}

double clear_majority_probability(std::int64_t n, double delta) {
    if (n < 1) throw ParameterError("n must be >= 1");
    detail::require_delta(delta);
    return binomial_margin_tails(n, 0.5 + delta).above;
}

double follower_posterior(int celebrity_action, int own_signal, std::int64_t j_observed,
                          double delta) {
    detail::require_binary(celebrity_action, "celebrity_action");
    detail::require_binary(own_signal, "own_signal");
    detail::require_delta(delta);
    if (j_observed < 0) throw ParameterError("j_observed must be >= 0");

    double likelihood[2];
    for (int theta = 0; theta <= 1; ++theta) {
        const double p1 = theta == 1 ? 0.5 + delta : 0.5 - delta;  // P(signal=1 | theta)
        const MarginTails tails = binomial_margin_tails(j_observed, p1);
        const double act_one = tails.above + tails.middle * p1;
        const double act = celebrity_action == 1 ? act_one : 1.0 - act_one;
        const double sig = own_signal == 1 ? p1 : 1.0 - p1;
        likelihood[theta] = act * sig;
    }
    const double total = likelihood[0] + likelihood[1];
    if (total == 0.0) return 0.5;  // evidence impossible under both states (delta = 0.5)
    return likelihood[1] / total;
}

}  // namespace celebnet
