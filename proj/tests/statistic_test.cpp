#include <cmath>
#include <numbers>

#include <catch2/catch_amalgamated.hpp>

#include "ksample/oracle.hpp"
#include "ksample/statistic.hpp"
#include "test_support.hpp"

using ksample::GroupLayout;
using ksample::KernelSpec;
using ksample::RegularizationPolicy;

TEST_CASE("gamma schedule honors its breakpoints") {
    const RegularizationPolicy policy = RegularizationPolicy::schedule();
    CHECK(policy.gamma_for(1) == 0.2);
    CHECK(policy.gamma_for(50) == 0.2);
    CHECK(policy.gamma_for(99) == 0.2);
    CHECK(policy.gamma_for(100) == 0.01);
    CHECK(policy.gamma_for(300) == 0.01);
    CHECK(policy.gamma_for(301) == std::pow(301.0, -0.25));
    CHECK(policy.gamma_for(10000) == std::pow(10000.0, -0.25));
    CHECK_THAT(policy.gamma_for(10000), Catch::Matchers::WithinULP(0.1, 1));
    CHECK_THROWS_AS(policy.gamma_for(0), ksample::InvalidParameters);
}

TEST_CASE("fixed gamma policy returns its value and validates it") {
    const RegularizationPolicy policy = RegularizationPolicy::fixed(0.37);
    CHECK(policy.gamma_for(10) == 0.37);
    CHECK(policy.gamma_for(100000) == 0.37);
    CHECK_THROWS_AS(RegularizationPolicy::fixed(0.0), ksample::InvalidParameters);
    CHECK_THROWS_AS(RegularizationPolicy::fixed(-0.2), ksample::InvalidParameters);
}

TEST_CASE("contrast vector entries for sizes (2,3,5)") {
    const GroupLayout layout = GroupLayout::from_sizes({2, 3, 5});

    const Eigen::VectorXd m1 = ksample::contrast_vector(layout, 0);
    REQUIRE(m1.size() == 10);
    for (Eigen::Index i = 0; i < 2; ++i) {
        CHECK(m1[i] == 1.0 / 2.0 - 1.0 / 10.0);
        CHECK_THAT(m1[i], Catch::Matchers::WithinULP(0.4, 1));
    }
    for (Eigen::Index i = 2; i < 10; ++i) {
        CHECK(m1[i] == -0.1);
    }

    const Eigen::VectorXd m3 = ksample::contrast_vector(layout, 2);
    for (Eigen::Index i = 0; i < 5; ++i) {
        CHECK(m3[i] == -0.1);
    }
    for (Eigen::Index i = 5; i < 10; ++i) {
        CHECK(m3[i] == 1.0 / 5.0 - 1.0 / 10.0);
        CHECK_THAT(m3[i], Catch::Matchers::WithinULP(0.1, 1));
    }

    CHECK_THROWS_AS(ksample::contrast_vector(layout, -1), ksample::IndexOutOfRange);
    CHECK_THROWS_AS(ksample::contrast_vector(layout, 3), ksample::IndexOutOfRange);
}

TEST_CASE("contrast vectors sum to zero") {
    ksample::CounterRng rng(5);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Eigen::Index> sizes;
        const Eigen::Index k = 2 + static_cast<Eigen::Index>(rng.next_u64() % 4);
        for (Eigen::Index j = 0; j < k; ++j) {
            sizes.push_back(2 + static_cast<Eigen::Index>(rng.next_u64() % 30));
        }
        const GroupLayout layout = GroupLayout::from_sizes(sizes);
        for (Eigen::Index j = 0; j < k; ++j) {
            const Eigen::VectorXd m = ksample::contrast_vector(layout, j);
            CHECK(std::abs(m.sum()) <=
                  static_cast<double>(layout.total()) * 1e-16);
        }
    }
}

TEST_CASE("center_apply removes blockwise means") {
    const GroupLayout layout = GroupLayout::from_sizes({2, 2});

    Eigen::VectorXd column(4);
    column << 1.0, 2.0, 3.0, 4.0;
    const Eigen::VectorXd centered = ksample::center_apply(layout, column);
    Eigen::VectorXd expected(4);
    expected << -0.5, 0.5, -0.5, 0.5;
    CHECK((centered.array() == expected.array()).all());

    const GroupLayout layout23 = GroupLayout::from_sizes({2, 3});
    const Eigen::VectorXd ones = Eigen::VectorXd::Constant(5, 1.0);
    CHECK((ksample::center_apply(layout23, ones).array() == 0.0).all());

    Eigen::MatrixXd wrong(3, 2);
    CHECK_THROWS_AS(ksample::center_apply(layout, Eigen::MatrixXd(wrong)),
                    ksample::ShapeMismatch);
}

TEST_CASE("center_apply is idempotent and matches the dense centering matrix") {
    const GroupLayout layout = GroupLayout::from_sizes({3, 3});
    ksample::CounterRng rng(8);
    Eigen::MatrixXd values(6, 3);
    for (Eigen::Index r = 0; r < 6; ++r) {
        for (Eigen::Index c = 0; c < 3; ++c) {
            values(r, c) = ksample::detail::draw_std_normal(rng);
        }
    }
    const Eigen::MatrixXd once = ksample::center_apply(layout, values);
    const Eigen::MatrixXd twice = ksample::center_apply(layout, once);
    CHECK((twice - once).cwiseAbs().maxCoeff() <= 1e-14);

    const Eigen::MatrixXd dense = ksample::dense_center_matrix(layout) * values;
    CHECK((dense - once).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("statistic rejects invalid samples and degenerate data") {
    std::vector<std::pair<std::string, Eigen::MatrixXd>> groups;
    groups.emplace_back("a", Eigen::MatrixXd::Constant(3, 1, 1.5));
    groups.emplace_back("b", Eigen::MatrixXd::Constant(4, 1, 1.5));
    const ksample::MultiSample flat = ksample::make_multi_sample(groups);

    CHECK_THROWS_AS(
        ksample::statistic(flat, KernelSpec::gaussian(), RegularizationPolicy::schedule()),
        ksample::DegenerateKernelMatrix);
    CHECK_THROWS_WITH(
        ksample::statistic(flat, KernelSpec::gaussian(), RegularizationPolicy::schedule()),
        Catch::Matchers::ContainsSubstring("degenerate kernel matrix"));
}

TEST_CASE("statistic agrees with the dense reference on a fixed instance") {
    ksample::CounterRng rng(17);
    std::vector<std::pair<std::string, Eigen::MatrixXd>> groups;
    const std::vector<Eigen::Index> sizes = {4, 5, 6};
    for (std::size_t j = 0; j < sizes.size(); ++j) {
        Eigen::MatrixXd points(sizes[j], 1);
        for (Eigen::Index r = 0; r < sizes[j]; ++r) {
            points(r, 0) = ksample::detail::draw_std_normal(rng);
        }
        groups.emplace_back("g" + std::to_string(j + 1), std::move(points));
    }
    const ksample::MultiSample sample = ksample::make_multi_sample(groups);
    const KernelSpec spec = KernelSpec::gaussian(2.0);
    const RegularizationPolicy policy = RegularizationPolicy::fixed(0.2);

    const ksample::StatisticBreakdown fast = ksample::statistic(sample, spec, policy);
    const ksample::OracleReport slow = ksample::oracle_statistic(sample, spec, 0.2);

    CHECK(test_support::rel_dev(fast.t_hat, slow.t_hat) <= 1e-10);
    CHECK(test_support::rel_dev(fast.numerator_sum, slow.numerator_sum) <= 1e-10);
    CHECK(test_support::rel_dev(fast.ell, slow.ell) <= 1e-10);

    CHECK(fast.t_hat == fast.numerator_sum / (std::numbers::sqrt2 * fast.ell));
    CHECK(fast.n_t_hat == 15.0 * fast.t_hat);
    CHECK(fast.gamma == 0.2);
    CHECK(fast.k == 3);
}

TEST_CASE("per-group terms are nonnegative up to round-off") {
    for (std::uint64_t i = 0; i < 10; ++i) {
        const auto [sample, gamma] = test_support::make_instance(23, i);
        const ksample::StatisticBreakdown breakdown = ksample::statistic(
            sample, KernelSpec::gaussian(), RegularizationPolicy::fixed(gamma));
        CHECK(breakdown.numerator_sum >= -1e-10);
        CHECK(breakdown.ell >= 0.0);
        for (double term : breakdown.per_group_terms) {
            CHECK(term >= -1e-10);
        }
    }
}

TEST_CASE("statistic is bitwise invariant under a common shift of grid data") {
    const ksample::MultiSample sample = test_support::grid_sample(31, 4, 3, 1);
    const ksample::MultiSample moved = test_support::shifted(sample, 7.3);
    const KernelSpec spec = KernelSpec::gaussian(2.0);
    const RegularizationPolicy policy = RegularizationPolicy::schedule();

    const ksample::StatisticBreakdown base = ksample::statistic(sample, spec, policy);
    const ksample::StatisticBreakdown shifted_result = ksample::statistic(moved, spec, policy);

    CHECK(base.t_hat == shifted_result.t_hat);
    CHECK(base.n_t_hat == shifted_result.n_t_hat);
    CHECK(base.ell == shifted_result.ell);
    CHECK(base.numerator_sum == shifted_result.numerator_sum);
    REQUIRE(base.per_group_terms.size() == shifted_result.per_group_terms.size());
    for (std::size_t j = 0; j < base.per_group_terms.size(); ++j) {
        CHECK(base.per_group_terms[j] == shifted_result.per_group_terms[j]);
    }
}

TEST_CASE("statistic is invariant to group order") {
    const KernelSpec spec = KernelSpec::gaussian(2.0);
    const RegularizationPolicy policy = RegularizationPolicy::schedule();

    const auto three = test_support::make_instance(47, 1);
    REQUIRE(three.sample.group_count() == 3);
    CHECK(ksample::statistic_order_invariance_check(three.sample, spec, policy, {1, 2, 0}) <=
          1e-10);
    CHECK(ksample::statistic_order_invariance_check(three.sample, spec, policy, {0, 1, 2}) ==
          0.0);

    const auto two = test_support::make_instance(47, 0);
    REQUIRE(two.sample.group_count() == 2);
    CHECK(ksample::statistic_order_invariance_check(two.sample, spec, policy, {1, 0}) <=
          1e-10);
}
