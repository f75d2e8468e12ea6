#pragma once

#include <cmath>
#include <numbers>
#include <string>

#include "ksample/errors.hpp"
#include "ksample/statistic.hpp"

namespace ksample {

inline double std_normal_cdf(double z) {
    return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

// Outcome of the one-sided asymptotic test: large positive values of the
// scaled statistic are evidence against homogeneity.
struct TestReport {
    StatisticBreakdown breakdown;
    double p_value = 0.0;
    double alpha = 0.0;
    bool reject = false;
    std::string method = "asymptotic-normal-one-sided";
};

// p = 1 - Phi(n * t_hat), computed as Phi(-n * t_hat) to keep precision in
// the far tail. Rejection is boundary-inclusive.
inline TestReport decide(const StatisticBreakdown& breakdown, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw InvalidAlpha("alpha must lie strictly between 0 and 1");
    }
    TestReport report;
    report.breakdown = breakdown;
    report.alpha = alpha;
    report.p_value = std_normal_cdf(-breakdown.n_t_hat);
    report.reject = report.p_value <= alpha;
    return report;
}

inline TestReport run_test(const MultiSample& sample, const KernelSpec& spec,
                           const RegularizationPolicy& policy, double alpha) {
    return decide(statistic(sample, spec, policy), alpha);
}

} // namespace ksample
