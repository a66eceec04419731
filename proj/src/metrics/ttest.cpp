#include <cmath>
#include <limits>

#include <boost/math/distributions/students_t.hpp>

#include "relanno/error.hpp"
#include "relanno/metrics.hpp"

namespace relanno::metrics {

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b, double alpha)
{
    if (a.size() != b.size())
        throw ValidationError("paired_ttest: samples differ in length");
    if (a.size() < 2)
        throw ValidationError("paired_ttest: need at least 2 pairs");

    const auto n = static_cast<double>(a.size());
    double mean = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        mean += a[i] - b[i];
    mean /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i] - mean;
        ss += d * d;
    }
    const double sd = std::sqrt(ss / (n - 1.0));

    TTestResult r;
    r.df = n - 1.0;
    // Differences with no spread: either no effect at all or a perfectly consistent one.
    if (sd <= 1e-15 * std::max(1.0, std::abs(mean))) {
        if (std::abs(mean) <= 1e-15) {
            r.t = 0.0;
            r.p_value = 1.0;
        } else {
            r.t = std::copysign(std::numeric_limits<double>::infinity(), mean);
            r.p_value = 0.0;
        }
    } else {
        r.t = mean / (sd / std::sqrt(n));
        boost::math::students_t dist(r.df);
        r.p_value = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    }
    r.significant = r.p_value < alpha;
    return r;
}

} // namespace relanno::metrics
