#include "celebnet/stats.hpp"

#include <cmath>
#include <string>

namespace celebnet {

double normal_quantile(double p) {
    if (!(p > 0.0) || !(p < 1.0))
        throw ParameterError("normal quantile needs p in (0, 1), got " + std::to_string(p));
    auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    double lo = -40.0, hi = 40.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        (cdf(mid) < p ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

WilsonInterval wilson_interval(std::int64_t successes, std::int64_t total, double confidence) {
    if (total < 0 || successes < 0 || successes > total)
        throw ParameterError("wilson interval needs 0 <= successes <= total");
    if (!(confidence > 0.0) || !(confidence < 1.0))
        throw ParameterError("confidence must be in (0, 1)");
    if (total == 0) return {0.0, 1.0};

    const double z = normal_quantile(0.5 + confidence / 2.0);
    const double n = static_cast<double>(total);
    const double phat = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    WilsonInterval w{center - half, center + half};
    if (w.lower < 0.0) w.lower = 0.0;
    if (w.upper > 1.0) w.upper = 1.0;
    return w;
}

}  // namespace celebnet
