#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "ksample/errors.hpp"
#include "ksample/kernel.hpp"
#include "ksample/sample.hpp"

namespace ksample {

// Below this value the normalization is treated as zero and the statistic is
// undefined (all kernel columns identical after centering).
inline constexpr double kEllDegeneracyThreshold = 1e-12;

// Ridge level for the regularized covariance inverse. Either the built-in
// sample-size schedule or a fixed user-supplied value.
struct RegularizationPolicy {
    enum class Mode { Schedule, Fixed };

    Mode mode = Mode::Schedule;
    double fixed_gamma = 0.0;

    static RegularizationPolicy schedule() { return RegularizationPolicy{}; }

    static RegularizationPolicy fixed(double gamma) {
        if (!(gamma > 0.0) || !std::isfinite(gamma)) {
            throw InvalidParameters("fixed gamma must be finite and > 0");
        }
        return RegularizationPolicy{Mode::Fixed, gamma};
    }

    // Schedule: 0.2 for n < 100, 0.01 for 100 <= n <= 300, n^(-1/4) beyond.
    double gamma_for(Eigen::Index n) const {
        if (mode == Mode::Fixed) {
            return fixed_gamma;
        }
        if (n < 1) {
            throw InvalidParameters("sample size must be >= 1");
        }
        if (n < 100) {
            return 0.2;
        }
        if (n <= 300) {
            return 0.01;
        }
        return std::pow(static_cast<double>(n), -0.25);
    }
};

// Coefficient vector m^(j): pairing it with the kernel columns gives the
// difference between group j's mean embedding and the pooled mean embedding.
// Entries are 1/n_j - 1/n on group j's block and -1/n elsewhere.
inline Eigen::VectorXd contrast_vector(const GroupLayout& layout, Eigen::Index j) {
    const Eigen::Index k = layout.group_count();
    if (j < 0 || j >= k) {
        throw IndexOutOfRange("group index " + std::to_string(j) + " out of range [0, " +
                              std::to_string(k) + ")");
    }
    const Eigen::Index n = layout.total();
    Eigen::VectorXd m = Eigen::VectorXd::Constant(n, -1.0 / static_cast<double>(n));
    m.segment(layout.offset(j), layout.size(j)).array() +=
        1.0 / static_cast<double>(layout.size(j));
    return m;
}

// Applies the block-centering map N = blockdiag(I - 11^T/n_j): within each
// group's rows, subtracts the column means of that block.
inline Eigen::MatrixXd center_apply(const GroupLayout& layout, const Eigen::MatrixXd& values) {
    if (values.rows() != layout.total()) {
        throw ShapeMismatch("row count " + std::to_string(values.rows()) +
                            " does not match layout total " + std::to_string(layout.total()));
    }
    Eigen::MatrixXd centered = values;
    for (Eigen::Index j = 0; j < layout.group_count(); ++j) {
        auto block = centered.middleRows(layout.offset(j), layout.size(j));
        block.rowwise() -= block.colwise().mean();
    }
    return centered;
}

inline Eigen::VectorXd center_apply(const GroupLayout& layout, const Eigen::VectorXd& values) {
    if (values.size() != layout.total()) {
        throw ShapeMismatch("length " + std::to_string(values.size()) +
                            " does not match layout total " + std::to_string(layout.total()));
    }
    Eigen::VectorXd centered = values;
    for (Eigen::Index j = 0; j < layout.group_count(); ++j) {
        auto block = centered.segment(layout.offset(j), layout.size(j));
        block.array() -= block.mean();
    }
    return centered;
}

// Everything computed on the way to the normalized statistic. per_group_terms
// are the proportion-weighted squared norms before normalization, so
// t_hat = sum(per_group_terms) / (sqrt(2) * ell) and n_t_hat = n * t_hat.
struct StatisticBreakdown {
    std::vector<double> per_group_terms;
    double numerator_sum = 0.0;
    double ell = 0.0;
    double gamma = 0.0;
    double t_hat = 0.0;
    double n_t_hat = 0.0;
    Eigen::Index n = 0;
    Eigen::Index k = 0;
};

// Computes the homogeneity statistic through the kernel matrix.
//
// With L the kernel matrix, N the block-centering map, and A = N L N:
//   term_j = (n_j / (n g)) * (m' L m - (1/n) w' B^{-1} w),  w = N L m,
// where B = g I + A/n, via the matrix inversion lemma applied to the
// regularized covariance. The normalization is
//   ell^2 = sum_i lam_i^2 / (lam_i + g)^2,  lam_i eigenvalues of A/n,
// evaluated without an eigendecomposition as
//   ell^2 = tr(A^2)/(n g)^2 - 2 tr(C A^2)/(n^3 g^2) + tr(C^2 A^2)/(n^4 g^2),
// with C = B^{-1} A from the same Cholesky factor the group terms use.
inline StatisticBreakdown statistic(const MultiSample& sample, const KernelSpec& spec,
                                    const RegularizationPolicy& policy) {
    validate_or_throw(sample);

    const Eigen::Index n = sample.total_size();
    const Eigen::Index k = sample.group_count();
    const double n_d = static_cast<double>(n);
    const double gamma = policy.gamma_for(n);

    const Eigen::MatrixXd kernel_matrix = gram(spec, sample.data);

    Eigen::MatrixXd centered =
        center_apply(sample.layout, Eigen::MatrixXd(center_apply(sample.layout, kernel_matrix)
                                                        .transpose()));
    const Eigen::MatrixXd a = 0.5 * (centered + centered.transpose());

    Eigen::MatrixXd b = a / n_d;
    b.diagonal().array() += gamma;
    const Eigen::LLT<Eigen::MatrixXd> llt(b);
    if (llt.info() != Eigen::Success) {
        throw NumericalFailure("Cholesky factorization of the regularized matrix failed");
    }

    StatisticBreakdown out;
    out.n = n;
    out.k = k;
    out.gamma = gamma;
    out.per_group_terms.reserve(static_cast<std::size_t>(k));

    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd m = contrast_vector(sample.layout, j);
        const Eigen::VectorXd lm = kernel_matrix * m;
        const Eigen::VectorXd w = center_apply(sample.layout, lm);
        const double direct = m.dot(lm);
        const double correction = w.dot(llt.solve(w)) / n_d;
        const double weight = sample.proportion(j) / gamma;
        out.per_group_terms.push_back(weight * (direct - correction));
        out.numerator_sum += out.per_group_terms.back();
    }

    const Eigen::MatrixXd c = llt.solve(a);
    const Eigen::MatrixXd a2 = a * a;
    const double tr_a2 = a2.trace();
    const double tr_ca2 = c.cwiseProduct(a2).sum(); // tr(C A^2), A^2 symmetric
    const Eigen::MatrixXd d = c * a2;
    const double tr_c2a2 = c.cwiseProduct(d.transpose()).sum(); // tr(C (C A^2))

    const double inv_ng = 1.0 / (n_d * gamma);
    double ell_sq = inv_ng * inv_ng *
                    (tr_a2 - 2.0 * tr_ca2 / n_d + tr_c2a2 / (n_d * n_d));
    if (ell_sq < 0.0) {
        ell_sq = 0.0;
    }
    out.ell = std::sqrt(ell_sq);

    if (!(out.ell >= kEllDegeneracyThreshold)) {
        throw DegenerateKernelMatrix(
            "degenerate kernel matrix: normalization is numerically zero after centering");
    }

    out.t_hat = out.numerator_sum / (std::numbers::sqrt2 * out.ell);
    out.n_t_hat = n_d * out.t_hat;

    if (!std::isfinite(out.t_hat) || !std::isfinite(out.ell)) {
        throw NumericalFailure("statistic evaluated to a non-finite value");
    }
    return out;
}

// Max relative disagreement between the statistic on `sample` and on the
// group-permuted sample, over the scale-bearing outputs. Group terms are
// matched through the permutation.
inline double statistic_order_invariance_check(const MultiSample& sample, const KernelSpec& spec,
                                               const RegularizationPolicy& policy,
                                               const std::vector<Eigen::Index>& perm) {
    const StatisticBreakdown base = statistic(sample, spec, policy);
    const StatisticBreakdown permuted = statistic(permute_groups(sample, perm), spec, policy);

    auto rel = [](double a, double b) {
        return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
    };
    double worst = rel(base.numerator_sum, permuted.numerator_sum);
    worst = std::max(worst, rel(base.ell, permuted.ell));
    worst = std::max(worst, rel(base.t_hat, permuted.t_hat));
    for (std::size_t pos = 0; pos < perm.size(); ++pos) {
        const auto original = static_cast<std::size_t>(perm[pos]);
        worst = std::max(worst, rel(base.per_group_terms[original],
                                    permuted.per_group_terms[pos]));
    }
    return worst;
}

} // namespace ksample
