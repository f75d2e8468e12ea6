#include <cmath>

#include <catch2/catch_amalgamated.hpp>

#include "ksample/kernel.hpp"
#include "test_support.hpp"

using ksample::KernelSpec;

namespace {

Eigen::RowVectorXd point1(double x) {
    Eigen::RowVectorXd p(1);
    p << x;
    return p;
}

} // namespace

TEST_CASE("kernel spec validates its scale") {
    CHECK(KernelSpec::gaussian().scale == 2.0);
    CHECK(KernelSpec::gaussian(0.5).scale == 0.5);
    CHECK_THROWS_AS(KernelSpec::gaussian(0.0), ksample::InvalidParameters);
    CHECK_THROWS_AS(KernelSpec::gaussian(-1.0), ksample::InvalidParameters);
    CHECK(std::string(ksample::kernel_family_name(ksample::KernelFamily::Gaussian)) ==
          "gaussian");
}

TEST_CASE("kernel evaluation at reference points") {
    const KernelSpec spec = KernelSpec::gaussian(2.0);

    CHECK(ksample::eval_kernel(spec, point1(0.0), point1(0.0)) == 1.0);
    CHECK(ksample::eval_kernel(spec, point1(0.0), point1(1.0)) == std::exp(-2.0));
    CHECK_THAT(ksample::eval_kernel(spec, point1(0.0), point1(1.0)),
               Catch::Matchers::WithinAbs(0.1353352832, 1e-10));

    Eigen::RowVectorXd p(2);
    p << 1.0, 2.0;
    CHECK(ksample::eval_kernel(spec, p, p) == 1.0);

    CHECK_THROWS_AS(ksample::eval_kernel(spec, point1(0.0), p), ksample::DimensionMismatch);
}

TEST_CASE("gram matrix of a three-point line") {
    Eigen::MatrixXd points(3, 1);
    points << 0.0, 1.0, 0.0;
    const Eigen::MatrixXd g = ksample::gram(KernelSpec::gaussian(2.0), points);

    const double e2 = std::exp(-2.0);
    Eigen::MatrixXd expected(3, 3);
    expected << 1.0, e2, 1.0, e2, 1.0, e2, 1.0, e2, 1.0;
    CHECK((g.array() == expected.array()).all());
}

TEST_CASE("gram matrix of identical points is all ones") {
    Eigen::MatrixXd points = Eigen::MatrixXd::Constant(5, 2, 1.7);
    const Eigen::MatrixXd g = ksample::gram(KernelSpec::gaussian(2.0), points);
    CHECK((g.array() == 1.0).all());
}

TEST_CASE("gram matrix is exactly symmetric, bounded, and entrywise correct") {
    ksample::CounterRng rng(12345);
    Eigen::MatrixXd points(10, 3);
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) {
            points(r, c) = 4.0 * rng.next_double() - 2.0;
        }
    }
    const KernelSpec spec = KernelSpec::gaussian(2.0);
    const Eigen::MatrixXd g = ksample::gram(spec, points);

    CHECK((g.array() == g.transpose().array()).all());
    CHECK(g.maxCoeff() <= 1.0);
    CHECK(g.minCoeff() > 0.0);
    CHECK((g.diagonal().array() == 1.0).all());

    // independent recomputation with the argument order reversed
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index j = 0; j < points.rows(); ++j) {
            CHECK(g(i, j) == ksample::eval_kernel(spec, points.row(j), points.row(i)));
        }
    }
}

TEST_CASE("gram matrix is positive semidefinite with jitter") {
    ksample::CounterRng rng(777);
    Eigen::MatrixXd points(12, 1);
    for (Eigen::Index r = 0; r < points.rows(); ++r) {
        points(r, 0) = ksample::detail::draw_std_normal(rng);
    }
    Eigen::MatrixXd g = ksample::gram(KernelSpec::gaussian(2.0), points);
    g.diagonal().array() += 1e-10;
    const Eigen::LLT<Eigen::MatrixXd> llt(g);
    CHECK(llt.info() == Eigen::Success);
}

TEST_CASE("gram matrix is bitwise invariant under a common shift of grid data") {
    const ksample::MultiSample sample = test_support::grid_sample(11, 0, 3, 2);
    const ksample::MultiSample moved = test_support::shifted(sample, 7.3);

    const Eigen::MatrixXd g0 = ksample::gram(KernelSpec::gaussian(2.0), sample.data);
    const Eigen::MatrixXd g1 = ksample::gram(KernelSpec::gaussian(2.0), moved.data);
    CHECK((g0.array() == g1.array()).all());
}

TEST_CASE("gram rejects empty input") {
    Eigen::MatrixXd empty(0, 1);
    CHECK_THROWS_AS(ksample::gram(KernelSpec::gaussian(2.0), empty),
                    ksample::InvalidParameters);
}
