#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "ksample/errors.hpp"
#include "ksample/kernel.hpp"
#include "ksample/sample.hpp"
#include "ksample/statistic.hpp"

namespace ksample {

// Reference results computed by a slow dense route, for cross-checking the
// production path. eigenvalues are those of the centered kernel matrix
// divided by n, in ascending order.
struct OracleReport {
    std::vector<double> per_group_terms;
    double numerator_sum = 0.0;
    double ell = 0.0;
    double t_hat = 0.0;
    Eigen::VectorXd eigenvalues;
    double gamma = 0.0;
};

// The block-centering map as an explicit dense matrix:
// blockdiag(I - 11^T/n_j).
inline Eigen::MatrixXd dense_center_matrix(const GroupLayout& layout) {
    const Eigen::Index n = layout.total();
    Eigen::MatrixXd center = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < layout.group_count(); ++j) {
        const Eigen::Index sz = layout.size(j);
        center.block(layout.offset(j), layout.offset(j), sz, sz) =
            Eigen::MatrixXd::Identity(sz, sz) -
            Eigen::MatrixXd::Constant(sz, sz, 1.0 / static_cast<double>(sz));
    }
    return center;
}

// Same quantities as statistic(), by a different derivation: each group term
// is m' L (g I + N N' L / n)^{-1} m through an LU solve of the non-symmetric
// resolvent (no inversion lemma), and the normalization comes from the full
// eigendecomposition of N L N / n. Degenerate inputs yield ell = 0 and
// t_hat = 0 rather than an error, so callers can inspect the report.
inline OracleReport oracle_statistic(const MultiSample& sample, const KernelSpec& spec,
                                     double gamma) {
    validate_or_throw(sample);
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
        throw InvalidParameters("gamma must be finite and > 0");
    }

    const Eigen::Index n = sample.total_size();
    const Eigen::Index k = sample.group_count();
    const double n_d = static_cast<double>(n);

    OracleReport out;
    out.gamma = gamma;

    const Eigen::MatrixXd kernel_matrix = gram(spec, sample.data);
    const Eigen::MatrixXd center = dense_center_matrix(sample.layout);

    Eigen::MatrixXd resolvent =
        (center * center.transpose()) * kernel_matrix / n_d;
    resolvent.diagonal().array() += gamma;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(resolvent);

    out.per_group_terms.reserve(static_cast<std::size_t>(k));
    for (Eigen::Index j = 0; j < k; ++j) {
        const Eigen::VectorXd m = contrast_vector(sample.layout, j);
        const Eigen::VectorXd solved = lu.solve(m);
        if (!solved.allFinite()) {
            throw SingularSystem("resolvent solve produced non-finite values");
        }
        const double term = sample.proportion(j) * m.dot(kernel_matrix * solved);
        out.per_group_terms.push_back(term);
        out.numerator_sum += term;
    }

    const Eigen::MatrixXd scaled = (center * kernel_matrix * center) / n_d;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(
        0.5 * (scaled + scaled.transpose()));
    if (eigen.info() != Eigen::Success) {
        throw NumericalFailure("eigendecomposition of the centered kernel matrix failed");
    }
    out.eigenvalues = eigen.eigenvalues();

    double ell_sq = 0.0;
    for (Eigen::Index i = 0; i < out.eigenvalues.size(); ++i) {
        const double lam = std::max(out.eigenvalues[i], 0.0);
        const double ratio = lam / (lam + gamma);
        ell_sq += ratio * ratio;
    }
    out.ell = std::sqrt(ell_sq);

    if (out.ell >= kEllDegeneracyThreshold) {
        out.t_hat = out.numerator_sum / (std::numbers::sqrt2 * out.ell);
    } else {
        out.t_hat = 0.0;
    }
    return out;
}

} // namespace ksample
