#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ksample/distributions.hpp"
#include "ksample/errors.hpp"
#include "ksample/inference.hpp"
#include "ksample/kernel.hpp"
#include "ksample/rng.hpp"
#include "ksample/sample.hpp"
#include "ksample/statistic.hpp"

namespace ksample {

// A named list of k source distributions, one per group.
struct CaseSpec {
    std::string name;
    std::vector<DistSpec> dists;
};

inline CaseSpec null_case() {
    return CaseSpec{"null",
                    {DistSpec::normal(0.0, 1.0), DistSpec::normal(0.0, 1.0),
                     DistSpec::normal(0.0, 1.0)}};
}

// The four built-in alternatives: shape difference at matched gap, variance
// ladder, uniform against two skewed betas, and a pure location shift.
inline CaseSpec builtin_case(const std::string& name) {
    if (name == "1") {
        return CaseSpec{"1",
                        {DistSpec::normal(3.0, 1.0), DistSpec::gamma(3.0, 1.0),
                         DistSpec::gamma(6.0, 2.0)}};
    }
    if (name == "2") {
        return CaseSpec{"2",
                        {DistSpec::normal(0.0, 1.0), DistSpec::normal(0.0, 2.0),
                         DistSpec::normal(0.0, 4.0)}};
    }
    if (name == "3") {
        return CaseSpec{"3",
                        {DistSpec::uniform(0.0, 1.0), DistSpec::beta(1.0, 1.5),
                         DistSpec::beta(1.5, 1.0)}};
    }
    if (name == "4") {
        return CaseSpec{"4",
                        {DistSpec::normal(0.0, 1.0), DistSpec::normal(0.3, 1.0),
                         DistSpec::normal(0.6, 1.0)}};
    }
    if (name == "null") {
        return null_case();
    }
    throw InvalidParameters("unknown case \"" + name + "\" (expected 1, 2, 3, 4, or null)");
}

// Splits n_total as evenly as possible over k groups, remainder going to the
// earliest groups. Every group must end up with at least 2 observations.
inline std::vector<Eigen::Index> equal_split(Eigen::Index n_total, Eigen::Index k) {
    if (k < 2) {
        throw InvalidParameters("need at least 2 groups");
    }
    if (n_total < 2 * k) {
        throw InvalidParameters("total size " + std::to_string(n_total) +
                                " cannot give every one of " + std::to_string(k) +
                                " groups 2 observations");
    }
    const Eigen::Index base = n_total / k;
    const Eigen::Index rem = n_total % k;
    std::vector<Eigen::Index> sizes(static_cast<std::size_t>(k), base);
    for (Eigen::Index j = 0; j < rem; ++j) {
        ++sizes[static_cast<std::size_t>(j)];
    }
    return sizes;
}

struct StudyOptions {
    double alpha = 0.05;
    KernelSpec kernel = KernelSpec::gaussian();
    RegularizationPolicy policy = RegularizationPolicy::schedule();
    std::uint64_t master_seed = 0;
    Eigen::Index replications = 500;
    int threads = 0; // 0 = hardware concurrency
};

// Draws one synthetic dataset. The stream key depends only on
// (master_seed, n_total, replication), so a replication's data is identical
// no matter how replications are scheduled across threads.
inline MultiSample generate_case_sample(const CaseSpec& spec,
                                        const std::vector<Eigen::Index>& sizes,
                                        std::uint64_t master_seed, Eigen::Index replication) {
    if (sizes.size() != spec.dists.size()) {
        throw InvalidParameters("case \"" + spec.name + "\" has " +
                                std::to_string(spec.dists.size()) + " distributions but " +
                                std::to_string(sizes.size()) + " group sizes were given");
    }
    Eigen::Index n_total = 0;
    for (Eigen::Index sz : sizes) {
        n_total += sz;
    }
    CounterRng rng = CounterRng::for_stream(master_seed, static_cast<std::uint64_t>(n_total),
                                            static_cast<std::uint64_t>(replication));
    std::vector<std::pair<std::string, Eigen::MatrixXd>> groups;
    groups.reserve(sizes.size());
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        groups.emplace_back("g" + std::to_string(j + 1),
                            sample_dist(spec.dists[j], rng, sizes[j]));
    }
    return make_multi_sample(groups);
}

namespace detail {

// Runs fn(0..reps-1), possibly on several threads. Each index is handled by
// exactly one worker; if any call throws, the exception for the lowest index
// is rethrown after all workers finish.
template <typename Fn>
inline void for_each_replication(Eigen::Index reps, int threads, Fn&& fn) {
    int workers = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::max(workers, 1);
    workers = static_cast<int>(std::min<Eigen::Index>(workers, reps));

    if (workers <= 1) {
        for (Eigen::Index r = 0; r < reps; ++r) {
            fn(r);
        }
        return;
    }

    std::atomic<Eigen::Index> next{0};
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(reps));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const Eigen::Index r = next.fetch_add(1);
                if (r >= reps) {
                    return;
                }
                try {
                    fn(r);
                } catch (...) {
                    errors[static_cast<std::size_t>(r)] = std::current_exception();
                }
            }
        });
    }
    for (auto& worker : pool) {
        worker.join();
    }
    for (const auto& error : errors) {
        if (error) {
            std::rethrow_exception(error);
        }
    }
}

} // namespace detail

// Rethrows a degeneracy error with the work item attached, so a failing
// replication in a long study can be found again.
[[noreturn]] inline void rethrow_degenerate_with_context(const DegenerateKernelMatrix& error,
                                                         Eigen::Index n_total,
                                                         Eigen::Index replication) {
    throw DegenerateKernelMatrix(std::string(error.what()) + " (n=" + std::to_string(n_total) +
                                 ", replication=" + std::to_string(replication) + ")");
}

struct PowerRow {
    Eigen::Index n_total = 0;
    std::vector<Eigen::Index> sizes;
    Eigen::Index replications = 0;
    Eigen::Index rejections = 0;
    double power = 0.0;
    double mc_se = 0.0; // binomial standard error sqrt(p(1-p)/reps)
};

struct PowerCurve {
    std::string case_name;
    double alpha = 0.0;
    std::uint64_t master_seed = 0;
    KernelSpec kernel;
    RegularizationPolicy policy;
    std::vector<PowerRow> rows;
};

// Rejection rate of the level-alpha test at each total sample size, with
// groups sized by equal_split and fresh data every replication.
inline PowerCurve run_power_study(const CaseSpec& spec, const std::vector<Eigen::Index>& totals,
                                  const StudyOptions& options) {
    if (totals.empty()) {
        throw InvalidParameters("need at least one total sample size");
    }
    if (options.replications < 1) {
        throw InvalidParameters("need at least 1 replication");
    }

    PowerCurve curve;
    curve.case_name = spec.name;
    curve.alpha = options.alpha;
    curve.master_seed = options.master_seed;
    curve.kernel = options.kernel;
    curve.policy = options.policy;

    const Eigen::Index k = static_cast<Eigen::Index>(spec.dists.size());
    for (const Eigen::Index n_total : totals) {
        PowerRow row;
        row.n_total = n_total;
        row.sizes = equal_split(n_total, k);
        row.replications = options.replications;

        std::vector<char> rejected(static_cast<std::size_t>(options.replications), 0);
        detail::for_each_replication(options.replications, options.threads, [&](Eigen::Index r) {
            const MultiSample sample =
                generate_case_sample(spec, row.sizes, options.master_seed, r);
            try {
                const TestReport report =
                    run_test(sample, options.kernel, options.policy, options.alpha);
                rejected[static_cast<std::size_t>(r)] = report.reject ? 1 : 0;
            } catch (const DegenerateKernelMatrix& error) {
                rethrow_degenerate_with_context(error, n_total, r);
            }
        });

        row.rejections = std::count(rejected.begin(), rejected.end(), 1);
        row.power = static_cast<double>(row.rejections) / static_cast<double>(row.replications);
        row.mc_se = std::sqrt(row.power * (1.0 - row.power) /
                              static_cast<double>(row.replications));
        curve.rows.push_back(std::move(row));
    }
    return curve;
}

// One-sample Kolmogorov distance between the empirical distribution of
// `values` and the standard normal.
inline double ks_distance_to_std_normal(std::vector<double> values) {
    if (values.empty()) {
        throw InvalidParameters("need at least one value");
    }
    std::sort(values.begin(), values.end());
    const double count = static_cast<double>(values.size());
    double dist = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double cdf = std_normal_cdf(values[i]);
        const double above = static_cast<double>(i + 1) / count - cdf;
        const double below = cdf - static_cast<double>(i) / count;
        dist = std::max({dist, above, below});
    }
    return dist;
}

struct NullStudySummary {
    double mean = 0.0;
    double variance = 0.0; // sample variance, 0 for a single replication
    double ks_distance = 0.0;
};

struct NullStudyResult {
    std::string case_name;
    Eigen::Index n_total = 0;
    std::vector<Eigen::Index> sizes;
    Eigen::Index replications = 0;
    std::uint64_t master_seed = 0;
    KernelSpec kernel;
    RegularizationPolicy policy;
    std::vector<double> statistics; // scaled statistic n * t_hat, one per replication
    NullStudySummary summary;
};

// Samples the scaled statistic under the case's own distributions, which must
// all coincide so the draws really are from the null.
inline NullStudyResult run_null_distribution_study(const CaseSpec& spec, Eigen::Index n_total,
                                                   const StudyOptions& options) {
    if (spec.dists.empty()) {
        throw InvalidParameters("case has no distributions");
    }
    for (const DistSpec& dist : spec.dists) {
        if (!(dist == spec.dists.front())) {
            throw InvalidParameters(
                "null study requires identical distributions in every group");
        }
    }
    if (options.replications < 1) {
        throw InvalidParameters("need at least 1 replication");
    }

    NullStudyResult result;
    result.case_name = spec.name;
    result.n_total = n_total;
    result.sizes = equal_split(n_total, static_cast<Eigen::Index>(spec.dists.size()));
    result.replications = options.replications;
    result.master_seed = options.master_seed;
    result.kernel = options.kernel;
    result.policy = options.policy;
    result.statistics.assign(static_cast<std::size_t>(options.replications), 0.0);

    detail::for_each_replication(options.replications, options.threads, [&](Eigen::Index r) {
        const MultiSample sample =
            generate_case_sample(spec, result.sizes, options.master_seed, r);
        try {
            const StatisticBreakdown breakdown =
                statistic(sample, options.kernel, options.policy);
            result.statistics[static_cast<std::size_t>(r)] = breakdown.n_t_hat;
        } catch (const DegenerateKernelMatrix& error) {
            rethrow_degenerate_with_context(error, n_total, r);
        }
    });

    double mean = 0.0;
    for (double value : result.statistics) {
        mean += value;
    }
    mean /= static_cast<double>(result.statistics.size());
    double variance = 0.0;
    if (result.statistics.size() > 1) {
        for (double value : result.statistics) {
            variance += (value - mean) * (value - mean);
        }
        variance /= static_cast<double>(result.statistics.size() - 1);
    }
    result.summary.mean = mean;
    result.summary.variance = variance;
    result.summary.ks_distance = ks_distance_to_std_normal(result.statistics);
    return result;
}

} // namespace ksample
