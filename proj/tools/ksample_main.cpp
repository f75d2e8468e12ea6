#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ksample/ksample.hpp"

namespace {

struct CommonOptions {
    double alpha = 0.05;
    double kernel_scale = 2.0;
    std::string gamma = "auto";
    std::uint64_t seed = 0;
    std::string output; // empty or "-" = stdout
    std::string format;
};

void add_common_flags(CLI::App* cmd, CommonOptions& opts, const std::string& default_format) {
    opts.format = default_format;
    cmd->add_option("--alpha", opts.alpha, "Significance level in (0,1)")
        ->capture_default_str();
    cmd->add_option("--kernel-scale", opts.kernel_scale,
                    "Gaussian kernel scale s in exp(-s*|x-y|^2)")
        ->capture_default_str();
    cmd->add_option("--gamma", opts.gamma,
                    "Regularization: \"auto\" for the sample-size schedule, or a positive value")
        ->capture_default_str();
    cmd->add_option("--seed", opts.seed, "Master seed for random streams")
        ->capture_default_str();
    cmd->add_option("--output", opts.output, "Output path (default: stdout)");
    cmd->add_option("--format", opts.format, "Output format")
        ->check(CLI::IsMember({"json", "csv"}))
        ->capture_default_str();
}

ksample::RegularizationPolicy parse_gamma(const std::string& text) {
    if (text == "auto") {
        return ksample::RegularizationPolicy::schedule();
    }
    try {
        std::size_t consumed = 0;
        const double value = std::stod(text, &consumed);
        if (consumed == text.size()) {
            return ksample::RegularizationPolicy::fixed(value);
        }
    } catch (const std::logic_error&) {
    }
    throw ksample::InvalidParameters("--gamma must be \"auto\" or a positive number, got \"" +
                                     text + "\"");
}

void write_text(const std::string& output, const std::string& text) {
    if (output.empty() || output == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(output);
    if (!out) {
        throw ksample::ParseError("cannot open \"" + output + "\" for writing");
    }
    out << text;
}

ksample::DistSpec parse_dist(const nlohmann::json& entry) {
    const std::string family = entry.at("family").get<std::string>();
    if (family == "normal") {
        return ksample::DistSpec::normal(entry.at("mean").get<double>(),
                                         entry.at("variance").get<double>());
    }
    if (family == "gamma") {
        return ksample::DistSpec::gamma(entry.at("shape").get<double>(),
                                        entry.at("rate").get<double>());
    }
    if (family == "beta") {
        return ksample::DistSpec::beta(entry.at("a").get<double>(), entry.at("b").get<double>());
    }
    if (family == "uniform") {
        return ksample::DistSpec::uniform(entry.at("lo").get<double>(),
                                          entry.at("hi").get<double>());
    }
    throw ksample::ValidationError("unknown distribution family \"" + family + "\"");
}

ksample::CaseSpec load_case_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ksample::ParseError("cannot open \"" + path + "\"");
    }
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& error) {
        throw ksample::ParseError("case file \"" + path + "\": " + error.what());
    }
    try {
        ksample::CaseSpec spec;
        spec.name = doc.value("name", "custom");
        const auto& dists = doc.at("distributions");
        if (!dists.is_array()) {
            throw ksample::ValidationError("\"distributions\" must be an array");
        }
        for (const auto& entry : dists) {
            spec.dists.push_back(parse_dist(entry));
        }
        if (spec.dists.size() < 2) {
            throw ksample::ValidationError("case file needs at least 2 distributions");
        }
        return spec;
    } catch (const nlohmann::json::exception& error) {
        throw ksample::ValidationError("case file \"" + path + "\": " + error.what());
    }
}

ksample::CaseSpec resolve_case(const std::string& selector) {
    constexpr std::string_view prefix = "file:";
    if (selector.rfind(prefix, 0) == 0) {
        return load_case_file(selector.substr(prefix.size()));
    }
    return ksample::builtin_case(selector);
}

int run(int argc, char** argv) {
    CLI::App app{"Regularized kernel-embedding k-sample homogeneity test"};
    app.require_subcommand(1);

    CommonOptions test_opts;
    std::string test_input = "-";
    bool verify = false;
    CLI::App* test_cmd = app.add_subcommand(
        "test", "Run the homogeneity test on a CSV file (header group,x1[,x2,...])");
    test_cmd->add_option("input", test_input, "CSV path, or - for stdin")
        ->capture_default_str();
    add_common_flags(test_cmd, test_opts, "json");
    test_cmd->add_flag("--verify", verify,
                       "Also run the dense reference route and report max_rel_dev");

    CommonOptions sim_opts;
    std::string case_selector;
    std::vector<long long> totals;
    long long sim_reps = 500;
    int sim_threads = 0;
    CLI::App* sim_cmd = app.add_subcommand(
        "simulate", "Monte Carlo power study over a grid of total sample sizes");
    sim_cmd->add_option("--case", case_selector,
                        "Built-in case 1|2|3|4|null, or file:PATH with a JSON case "
                        "(normal distributions take mean and VARIANCE)")
        ->required();
    sim_cmd->add_option("--sizes", totals, "Comma-separated total sample sizes")
        ->delimiter(',')
        ->required();
    sim_cmd->add_option("--reps", sim_reps, "Replications per sample size")
        ->capture_default_str();
    sim_cmd->add_option("--threads", sim_threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    add_common_flags(sim_cmd, sim_opts, "csv");

    CommonOptions null_opts;
    long long null_n = 300;
    long long null_reps = 500;
    int null_threads = 0;
    CLI::App* null_cmd = app.add_subcommand(
        "null-study", "Sample the scaled statistic under equal distributions");
    null_cmd->add_option("--n", null_n, "Total sample size")->capture_default_str();
    null_cmd->add_option("--reps", null_reps, "Replications")->capture_default_str();
    null_cmd->add_option("--threads", null_threads, "Worker threads (0 = hardware)")
        ->capture_default_str();
    add_common_flags(null_cmd, null_opts, "json");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& error) {
        const int code = app.exit(error);
        return code == 0 ? 0 : 2;
    }

    if (test_cmd->parsed()) {
        if (test_opts.format != "json") {
            throw ksample::ValidationError("test emits a single record; only json is supported");
        }
        const ksample::MultiSample sample = test_input == "-"
                                                ? ksample::load_csv(std::cin)
                                                : ksample::load_csv_file(test_input);
        const ksample::KernelSpec kernel = ksample::KernelSpec::gaussian(test_opts.kernel_scale);
        const ksample::RegularizationPolicy policy = parse_gamma(test_opts.gamma);
        const ksample::TestReport report =
            ksample::run_test(sample, kernel, policy, test_opts.alpha);

        std::optional<double> max_rel_dev;
        if (verify) {
            const ksample::OracleReport oracle =
                ksample::oracle_statistic(sample, kernel, report.breakdown.gamma);
            auto rel = [](double value, double reference) {
                return std::abs(value - reference) / std::max(1.0, std::abs(reference));
            };
            max_rel_dev =
                std::max({rel(report.breakdown.numerator_sum, oracle.numerator_sum),
                          rel(report.breakdown.ell, oracle.ell),
                          rel(report.breakdown.t_hat, oracle.t_hat)});
        }
        const ksample::ordered_json doc =
            ksample::test_report_json(report, sample, kernel, max_rel_dev);
        write_text(test_opts.output, doc.dump(2) + "\n");
        return 0;
    }

    if (sim_cmd->parsed()) {
        ksample::StudyOptions options;
        options.alpha = sim_opts.alpha;
        options.kernel = ksample::KernelSpec::gaussian(sim_opts.kernel_scale);
        options.policy = parse_gamma(sim_opts.gamma);
        options.master_seed = sim_opts.seed;
        options.replications = static_cast<Eigen::Index>(sim_reps);
        options.threads = sim_threads;

        std::vector<Eigen::Index> sizes(totals.begin(), totals.end());
        const ksample::PowerCurve curve =
            ksample::run_power_study(resolve_case(case_selector), sizes, options);
        if (sim_opts.format == "json") {
            write_text(sim_opts.output, ksample::power_curve_json(curve).dump(2) + "\n");
        } else {
            write_text(sim_opts.output, ksample::power_curve_csv(curve));
        }
        return 0;
    }

    ksample::StudyOptions options;
    options.alpha = null_opts.alpha;
    options.kernel = ksample::KernelSpec::gaussian(null_opts.kernel_scale);
    options.policy = parse_gamma(null_opts.gamma);
    options.master_seed = null_opts.seed;
    options.replications = static_cast<Eigen::Index>(null_reps);
    options.threads = null_threads;

    const ksample::NullStudyResult result = ksample::run_null_distribution_study(
        ksample::null_case(), static_cast<Eigen::Index>(null_n), options);
    if (null_opts.format == "json") {
        write_text(null_opts.output, ksample::null_study_json(result).dump(2) + "\n");
    } else {
        // CSV carries the per-replication table; when it goes to a file the
        // summary is still available on stdout.
        write_text(null_opts.output, ksample::null_study_csv(result));
        if (!null_opts.output.empty() && null_opts.output != "-") {
            ksample::ordered_json summary;
            summary["summary"] = {{"mean", result.summary.mean},
                                  {"variance", result.summary.variance},
                                  {"ks_distance", result.summary.ks_distance}};
            std::cout << summary.dump(2) << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const ksample::DegenerateKernelMatrix& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 3;
    } catch (const ksample::NumericalFailure& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 4;
    } catch (const ksample::SingularSystem& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 4;
    } catch (const ksample::Error& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 2;
    } catch (const std::exception& error) {
        std::cerr << "error: " << error.what() << "\n";
        return 4;
    }
}
