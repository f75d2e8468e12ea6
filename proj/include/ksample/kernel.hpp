#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "ksample/errors.hpp"

namespace ksample {

enum class KernelFamily { Gaussian };

// Symmetric positive-semidefinite kernel on R^d. The Gaussian family is
// K(x,y) = exp(-scale * ||x - y||^2); it is bounded by 1 with K(x,x) = 1,
// so the sup-norm condition needed by the test always holds.
struct KernelSpec {
    KernelFamily family = KernelFamily::Gaussian;
    double scale = 2.0;

    static KernelSpec gaussian(double scale = 2.0) {
        if (!(scale > 0.0)) {
            throw InvalidParameters("kernel scale must be > 0");
        }
        return KernelSpec{KernelFamily::Gaussian, scale};
    }
};

inline const char* kernel_family_name(KernelFamily family) {
    switch (family) {
    case KernelFamily::Gaussian:
        return "gaussian";
    }
    return "unknown";
}

namespace detail {

// Squared distance accumulated from coordinate differences. Keeping the
// per-coordinate subtraction first makes the Gram matrix invariant under a
// common shift of all points whenever the shifted coordinates are exact.
// noinline: with FP contraction the compiler may fuse d*d into the
// accumulator differently per inlining context; a single compiled instance
// keeps K(x,y) bit-identical across every call site and argument order.
[[gnu::noinline]] inline double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd>& x,
                                                 const Eigen::Ref<const Eigen::RowVectorXd>& y) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        acc += d * d;
    }
    return acc;
}

inline void check_spec(const KernelSpec& spec) {
    if (!(spec.scale > 0.0)) {
        throw InvalidParameters("kernel scale must be > 0");
    }
}

} // namespace detail

inline double eval_kernel(const KernelSpec& spec,
                          const Eigen::Ref<const Eigen::RowVectorXd>& x,
                          const Eigen::Ref<const Eigen::RowVectorXd>& y) {
    detail::check_spec(spec);
    if (x.size() != y.size()) {
        throw DimensionMismatch("kernel arguments have dimensions " +
                                std::to_string(x.size()) + " and " +
                                std::to_string(y.size()));
    }
    return std::exp(-spec.scale * detail::squared_distance(x, y));
}

// Pairwise kernel matrix over the rows of `points`. Entries above the
// diagonal are computed once and mirrored, so the result is symmetric
// bit-for-bit and downstream solvers never see an asymmetry tolerance.
inline Eigen::MatrixXd gram(const KernelSpec& spec, const Eigen::Ref<const Eigen::MatrixXd>& points) {
    detail::check_spec(spec);
    const Eigen::Index n = points.rows();
    if (n < 1) {
        throw InvalidParameters("gram needs at least one point");
    }
    Eigen::MatrixXd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        g(i, i) = std::exp(-spec.scale * detail::squared_distance(points.row(i), points.row(i)));
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double v =
                std::exp(-spec.scale * detail::squared_distance(points.row(i), points.row(j)));
            g(i, j) = v;
            g(j, i) = v;
        }
    }
    return g;
}

} // namespace ksample
