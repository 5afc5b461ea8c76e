#ifndef CELEBNET_STATS_HPP
#define CELEBNET_STATS_HPP

#include <cstdint>

#include "celebnet/errors.hpp"

namespace celebnet {

// Inverse standard normal CDF by bisection on erfc; monotone and accurate to
// ~1e-14 over the useful range.
double normal_quantile(double p);

struct WilsonInterval {
    double lower = 0.0;
    double upper = 1.0;
    double width() const { return upper - lower; }
    bool contains(double v) const { return v >= lower && v <= upper; }
};

// Wilson score interval for a binomial proportion at the given two-sided
// confidence level.
WilsonInterval wilson_interval(std::int64_t successes, std::int64_t total, double confidence);

}  // namespace celebnet

#endif
