// Generalized pick-freeze estimators of ul-tau_u^(p), total effects and the
// complementarity identity.

#include <gtest/gtest.h>

#include <cmath>

#include "hosi/moment_indices.hpp"
#include "hosi/oracles.hpp"

using namespace hosi;

namespace {

BlackBoxFunction constant(int d, double c) {
    return BlackBoxFunction(d, [c](std::span<const double>) { return c; });
}

BlackBoxFunction rect2() {  // 1{x1 < 0.1} 1{x2 < 0.2}
    return BlackBoxFunction(2, [](std::span<const double> x) { return (x[0] < 0.1 && x[1] < 0.2) ? 1.0 : 0.0; });
}

}  // namespace

TEST(MomentIndices, ConstantGivesZero) {
    const auto f = constant(3, 2.5);
    for (int p : {2, 3, 4}) {
        const auto u = VarSubset::of(3, {1, 2});
        const auto des = build_pickfreeze(1, 1000, 3, p, u);
        const auto c = estimate_ult_p_centered(f, u, p, des);
        EXPECT_NEAR(c.value, 0.0, 1e-12);
        EXPECT_EQ(c.std_error, 0.0);
        const auto dd = estimate_ult_p_difference(f, u, p, des);
        EXPECT_EQ(dd.value, 0.0);
        EXPECT_EQ(dd.std_error, 0.0);
    }
}

TEST(MomentIndices, EmptySubsetSkipsEvaluation) {
    int calls = 0;
    const BlackBoxFunction f(2, [&calls](std::span<const double>) {
        ++calls;
        return 1.0;
    });
    const auto u = VarSubset::empty(2);
    const auto des = build_pickfreeze(1, 100, 2, 3, u);
    EXPECT_EQ(estimate_ult_p_centered(f, u, 3, des, 1).value, 0.0);
    EXPECT_EQ(estimate_ult_p_difference(f, u, 3, des, 1).value, 0.0);
    EXPECT_EQ(calls, 0);
}

TEST(MomentIndices, RectangleP3Centered) {
    const auto u = VarSubset::of(2, {1});
    const double oracle = 8e-6 * 99.0;  // eps^3 (eps_1^-2 - 1)
    const auto des = build_pickfreeze(2024, 1000000, 2, 3, u);
    const auto e = estimate_ult_p_centered(rect2(), u, 3, des);
    EXPECT_NEAR(e.value, 7.92e-4, 3.0 * e.std_error);
    EXPECT_NEAR(oracle, 7.92e-4, 1e-15);
    EXPECT_TRUE(e.approximate_se);
}

TEST(MomentIndices, AdditiveVarianceDifference) {
    const BlackBoxFunction f(2, [](std::span<const double> x) { return x[0] + x[1]; });
    const auto u = VarSubset::of(2, {1});
    const auto e = estimate_ult_p_difference(f, u, 2, build_pickfreeze(5, 100000, 2, 2, u));
    EXPECT_NEAR(e.value, 1.0 / 12.0, 3.0 * e.std_error);
    EXPECT_FALSE(e.approximate_se);
}

TEST(MomentIndices, ProductP4MatchesOracle) {
    ProductFunctionSpec spec{{Factor::linear(1.0, 0.5), Factor::cosine(1.0, 0.4), Factor::gfunction(1.0)}};
    const auto u = VarSubset::of(3, {1});
    const double oracle = product_indices(spec, u, 4, IndexFamily::moment).ult;
    const auto e = estimate_ult_p_difference(spec.as_function(), u, 4, build_pickfreeze(6, 200000, 3, 4, u));
    EXPECT_NEAR(e.value, oracle, 3.0 * e.std_error);
}

TEST(MomentIndices, TotalEffect) {
    const BlackBoxFunction f(2, [](std::span<const double> x) { return x[0] - 0.5; });
    const auto u1 = VarSubset::of(2, {1}), u2 = VarSubset::of(2, {2});
    const auto t1 = estimate_total_effect(f, u1, build_pickfreeze(7, 100000, 2, 2, u1));
    const auto t2 = estimate_total_effect(f, u2, build_pickfreeze(7, 100000, 2, 2, u2));
    EXPECT_NEAR(t1.value, 1.0 / 12.0, 3.0 * t1.std_error);
    EXPECT_EQ(t2.value, 0.0);  // x2 is inactive: every difference vanishes
    EXPECT_EQ(estimate_total_effect(constant(2, 3.0), u1, build_pickfreeze(7, 100, 2, 2, u1)).value, 0.0);
}

TEST(MomentIndices, ComplementarityExactOnGrid) {
    const auto g = GridFunction::random({4, 4, 2}, 3);
    const double var = grid_variance(g);
    for (const auto& u : enumerate_subsets(3, SubsetFilter::all)) {
        double under = 0.0, total_comp = 0.0;
        for (const auto& v : enumerate_subsets(3, SubsetFilter::nonempty)) {
            const double s = anova_variance(g, v);
            if (v.subset_of(u)) under += s;
            if (!set_intersection(v, complement(u)).is_empty()) total_comp += s;
        }
        EXPECT_NEAR(under + total_comp - var, 0.0, 1e-12);
        const double brute_under = u.is_empty() ? 0.0 : grid_moment_raw(g, u, 2) - g.mean() * g.mean();
        EXPECT_NEAR(brute_under, under, 1e-12);
    }
}

TEST(MomentIndices, ComplementarityMonteCarlo) {
    const auto spec = ProductFunctionSpec::gfunction({0.0, 1.0, 9.0});
    const auto f = spec.as_function();
    for (const auto& u : enumerate_subsets(3, SubsetFilter::nonempty)) {
        const auto r = check_complementarity(f, u, build_pickfreeze(11, 100000, 3, 2, u));
        EXPECT_LE(std::abs(r.z()), 3.0) << u.to_string();
    }
    const auto u = VarSubset::of(2, {1});
    const auto rc = check_complementarity(constant(2, 4.0), u, build_pickfreeze(1, 100, 2, 2, u));
    EXPECT_EQ(rc.residual, 0.0);
    EXPECT_EQ(rc.z(), 0.0);
}

// Mean of 200 independent estimates at n=1000 sits within 4 SE of the truth.
TEST(MomentIndices, DifferenceEstimatorUnbiased) {
    ProductFunctionSpec spec{{Factor::linear(1.0, 0.5), Factor::linear(1.0, 0.3)}};
    const auto f = spec.as_function();
    const auto u = VarSubset::of(2, {1});
    for (int p : {2, 3, 4}) {
        const double oracle = product_indices(spec, u, p, IndexFamily::moment).ult;
        double s = 0.0, ss = 0.0;
        const int runs = 200;
        for (int r = 0; r < runs; ++r) {
            const double v = estimate_ult_p_difference(f, u, p, build_pickfreeze(1000 + r, 1000, 2, p, u), 1).value;
            s += v;
            ss += v * v;
        }
        const double mean = s / runs;
        const double se_mean = std::sqrt((ss / runs - mean * mean) / (runs - 1));
        EXPECT_NEAR(mean, oracle, 4.0 * se_mean) << "p=" << p;
    }
}

// At p = 2 both estimators reduce to the classical pick-freeze pair.
TEST(MomentIndices, ClassicalReductionAtP2) {
    const auto spec = ProductFunctionSpec::gfunction({0.0, 1.0, 9.0});
    const auto f = spec.as_function();
    const auto u = VarSubset::of(3, {1, 3});
    const std::uint64_t n = 5000;
    const auto des = build_pickfreeze(17, n, 3, 2, u);

    double prod = 0.0, diff = 0.0, mean = 0.0;
    std::vector<double> buf(des.width()), y1(3), y2(3);
    for (std::uint64_t i = 0; i < n; ++i) {
        des.fill(i, buf);
        des.glued_point(buf, 0, y1);
        des.glued_point(buf, 1, y2);
        const double a = f(y1), b = f(y2);
        prod += a * b;
        diff += a * b - f(des.z_point(buf, 0)) * f(des.z_point(buf, 1));
        mean += 0.5 * (a + b);
    }
    prod /= n, diff /= n, mean /= n;
    const double centered_ref = prod - mean * mean;

    EXPECT_NEAR(estimate_ult_p_centered(f, u, 2, des).value, centered_ref, 1e-13);
    EXPECT_NEAR(estimate_ult_p_difference(f, u, 2, des).value, diff, 1e-13);
}

TEST(MomentIndices, IndependentOfWorkers) {
    const auto f = ProductFunctionSpec::gfunction({0.0, 1.0}).as_function();
    const auto u = VarSubset::of(2, {2});
    const auto des = build_pickfreeze(3, 30000, 2, 4, u);
    const auto a = estimate_ult_p_difference(f, u, 4, des, 1);
    const auto b = estimate_ult_p_difference(f, u, 4, des, 3);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(MomentIndices, DesignMismatchRejected) {
    const auto f = constant(2, 1.0);
    const auto des = build_pickfreeze(1, 10, 2, 3, VarSubset::of(2, {1}));
    EXPECT_THROW(estimate_ult_p_difference(f, VarSubset::of(2, {2}), 3, des), Error);
    EXPECT_THROW(estimate_ult_p_difference(f, VarSubset::of(2, {1}), 4, des), Error);
    EXPECT_THROW(estimate_ult_p_difference(constant(3, 1.0), VarSubset::of(2, {1}), 3, des), Error);
}

TEST(MomentIndices, OddOrderCanBeNegative) {
    // Left-skewed factor: ult^(3) for the subset is negative and is reported as such.
    ProductFunctionSpec spec{{Factor::table({-3.0, 1.0, 1.0, 1.0}), Factor::linear(1.0, 0.1)}};
    const auto u = VarSubset::of(2, {1});
    const double oracle = product_indices(spec, u, 3, IndexFamily::moment).ult;
    ASSERT_LT(oracle, 0.0);
    const auto e = estimate_ult_p_difference(spec.as_function(), u, 3, build_pickfreeze(2, 200000, 2, 3, u));
    EXPECT_LT(e.value, 0.0);
    EXPECT_NEAR(e.value, oracle, 4.0 * e.std_error);
}
