#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "ksample/inference.hpp"
#include "ksample/kernel.hpp"
#include "ksample/sample.hpp"
#include "ksample/simulation.hpp"

namespace ksample {

using ordered_json = nlohmann::ordered_json;

// JSON document for one test run. verify_max_rel_dev, when given, reports the
// worst relative deviation from the dense reference route.
inline ordered_json test_report_json(const TestReport& report, const MultiSample& sample,
                                     const KernelSpec& kernel,
                                     std::optional<double> verify_max_rel_dev = std::nullopt) {
    ordered_json doc;
    doc["n"] = static_cast<std::int64_t>(report.breakdown.n);
    doc["k"] = static_cast<std::int64_t>(report.breakdown.k);
    ordered_json sizes = ordered_json::array();
    for (Eigen::Index j = 0; j < sample.group_count(); ++j) {
        sizes.push_back(static_cast<std::int64_t>(sample.layout.size(j)));
    }
    doc["sizes"] = std::move(sizes);
    doc["gamma"] = report.breakdown.gamma;
    doc["ell"] = report.breakdown.ell;
    doc["statistic"] = report.breakdown.t_hat;
    doc["n_statistic"] = report.breakdown.n_t_hat;
    doc["p_value"] = report.p_value;
    doc["alpha"] = report.alpha;
    doc["reject"] = report.reject;
    doc["method"] = report.method;
    doc["kernel"] = {{"family", kernel_family_name(kernel.family)}, {"scale", kernel.scale}};
    if (verify_max_rel_dev) {
        doc["verify"] = {{"max_rel_dev", *verify_max_rel_dev}};
    }
    return doc;
}

namespace detail {

inline ordered_json gamma_policy_json(const RegularizationPolicy& policy) {
    if (policy.mode == RegularizationPolicy::Mode::Fixed) {
        return policy.fixed_gamma;
    }
    return "auto";
}

} // namespace detail

inline ordered_json power_curve_json(const PowerCurve& curve) {
    ordered_json doc;
    doc["case"] = curve.case_name;
    doc["alpha"] = curve.alpha;
    doc["seed"] = curve.master_seed;
    doc["kernel"] = {{"family", kernel_family_name(curve.kernel.family)},
                     {"scale", curve.kernel.scale}};
    doc["gamma_policy"] = detail::gamma_policy_json(curve.policy);
    ordered_json rows = ordered_json::array();
    for (const PowerRow& row : curve.rows) {
        ordered_json entry;
        entry["n_total"] = static_cast<std::int64_t>(row.n_total);
        ordered_json sizes = ordered_json::array();
        for (Eigen::Index sz : row.sizes) {
            sizes.push_back(static_cast<std::int64_t>(sz));
        }
        entry["sizes"] = std::move(sizes);
        entry["replications"] = static_cast<std::int64_t>(row.replications);
        entry["rejections"] = static_cast<std::int64_t>(row.rejections);
        entry["power"] = row.power;
        entry["mc_se"] = row.mc_se;
        rows.push_back(std::move(entry));
    }
    doc["rows"] = std::move(rows);
    return doc;
}

// CSV table, one row per total sample size:
// n_total,n1,...,nk,replications,rejections,power,mc_se
inline std::string power_curve_csv(const PowerCurve& curve) {
    std::string out = "n_total";
    const std::size_t k = curve.rows.empty() ? 0 : curve.rows.front().sizes.size();
    for (std::size_t j = 1; j <= k; ++j) {
        out += ",n" + std::to_string(j);
    }
    out += ",replications,rejections,power,mc_se\n";
    for (const PowerRow& row : curve.rows) {
        out += std::to_string(row.n_total);
        for (Eigen::Index sz : row.sizes) {
            out += ',' + std::to_string(sz);
        }
        out += ',' + std::to_string(row.replications);
        out += ',' + std::to_string(row.rejections);
        out += ',' + detail::format_double(row.power);
        out += ',' + detail::format_double(row.mc_se);
        out += '\n';
    }
    return out;
}

inline ordered_json null_study_json(const NullStudyResult& result) {
    ordered_json doc;
    doc["case"] = result.case_name;
    doc["n"] = static_cast<std::int64_t>(result.n_total);
    ordered_json sizes = ordered_json::array();
    for (Eigen::Index sz : result.sizes) {
        sizes.push_back(static_cast<std::int64_t>(sz));
    }
    doc["sizes"] = std::move(sizes);
    doc["replications"] = static_cast<std::int64_t>(result.replications);
    doc["seed"] = result.master_seed;
    doc["kernel"] = {{"family", kernel_family_name(result.kernel.family)},
                     {"scale", result.kernel.scale}};
    doc["gamma_policy"] = detail::gamma_policy_json(result.policy);
    doc["statistics"] = result.statistics;
    doc["summary"] = {{"mean", result.summary.mean},
                      {"variance", result.summary.variance},
                      {"ks_distance", result.summary.ks_distance}};
    return doc;
}

// CSV table of the sampled scaled statistics, one row per replication.
inline std::string null_study_csv(const NullStudyResult& result) {
    std::string out = "replication,n_t_hat\n";
    for (std::size_t r = 0; r < result.statistics.size(); ++r) {
        out += std::to_string(r);
        out += ',' + detail::format_double(result.statistics[r]);
        out += '\n';
    }
    return out;
}

} // namespace ksample
