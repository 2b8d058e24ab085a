// core_model and sampling: subsets, glue, black-box wrapper, RNG, designs.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hosi/replicates.hpp"
#include "hosi/sampling.hpp"

using namespace hosi;

namespace {

std::vector<std::string> names(const std::vector<VarSubset>& v) {
    std::vector<std::string> out;
    for (const auto& u : v) out.push_back(u.to_string());
    return out;
}

}  // namespace

TEST(VarSubset, GlueDefinition) {
    const Point x{0.1, 0.2, 0.3}, z{0.7, 0.8, 0.9};
    EXPECT_EQ(glue(x, z, VarSubset::of(3, {1, 3})), (Point{0.1, 0.8, 0.3}));
    EXPECT_EQ(glue(x, z, VarSubset::full(3)), x);
    EXPECT_EQ(glue(x, z, VarSubset::empty(3)), z);
}

TEST(VarSubset, GlueSymmetryAndIdempotence) {
    SampleStream s(7, 0);
    for (int d = 1; d <= 4; ++d)
        for (const auto& u : enumerate_subsets(d, SubsetFilter::all)) {
            const Point x = uniform_point(s, d), z = uniform_point(s, d);
            EXPECT_EQ(glue(x, z, u), glue(z, x, complement(u)));
            EXPECT_EQ(glue(glue(x, z, u), z, u), glue(x, z, u));
        }
}

TEST(VarSubset, Complement) {
    EXPECT_EQ(complement(VarSubset::of(3, {1, 3})).to_string(), "{2}");
    EXPECT_EQ(complement(VarSubset::empty(3)).to_string(), "{1,2,3}");
    EXPECT_TRUE(complement(VarSubset::full(3)).is_empty());
}

TEST(VarSubset, Enumerate) {
    EXPECT_EQ(names(enumerate_subsets(2, SubsetFilter::all)), (std::vector<std::string>{"{}", "{1}", "{2}", "{1,2}"}));
    EXPECT_EQ(names(enumerate_subsets(3, SubsetFilter::singletons)), (std::vector<std::string>{"{1}", "{2}", "{3}"}));
    EXPECT_EQ(names(enumerate_subsets(2, SubsetFilter::nonempty)), (std::vector<std::string>{"{1}", "{2}", "{1,2}"}));
    EXPECT_EQ(enumerate_subsets(4, SubsetFilter::up_to_size, 2).size(), 1u + 4u + 6u);
    EXPECT_EQ(enumerate_subsets(40, SubsetFilter::up_to_size, 2).size(), 1u + 40u + 780u);
    EXPECT_THROW(enumerate_subsets(21, SubsetFilter::all), Error);
}

// Union, intersection and subset tests checked against plain mask algebra.
TEST(VarSubset, LatticeLawsExhaustive) {
    const int d = 5;
    const auto all = enumerate_subsets(d, SubsetFilter::all);
    for (const auto& a : all)
        for (const auto& b : all) {
            const auto un = set_union(a, b), in = set_intersection(a, b);
            EXPECT_EQ(un, set_union(b, a));
            EXPECT_EQ(in, set_intersection(b, a));
            EXPECT_EQ(set_union(a, in), a);         // absorption
            EXPECT_EQ(set_intersection(a, un), a);
            EXPECT_EQ(complement(un), set_intersection(complement(a), complement(b)));  // De Morgan
            EXPECT_EQ(a.subset_of(b), in == a);
            EXPECT_EQ(a.proper_subset_of(b), a.subset_of(b) && !(a == b));
            EXPECT_EQ(set_difference(a, b), set_intersection(a, complement(b)));
        }
}

TEST(VarSubset, Validation) {
    EXPECT_THROW(VarSubset::of(3, {4}), Error);
    EXPECT_THROW(VarSubset::of(3, {0}), Error);
    EXPECT_THROW(VarSubset(2, 0b100), Error);
    EXPECT_NO_THROW(VarSubset::full(63));
    EXPECT_EQ(VarSubset::of(5, {2, 4}).size(), 2);
}

TEST(BlackBox, RejectsNonFiniteAndWrongArity) {
    const BlackBoxFunction f(2, [](std::span<const double> x) { return x[0] < 0.5 ? 1.0 : NAN; });
    EXPECT_DOUBLE_EQ(f({0.1, 0.2}), 1.0);
    try {
        (void)f({0.7, 0.2});
        FAIL() << "expected NonFiniteValue";
    } catch (const NonFiniteValue& e) {
        EXPECT_EQ(e.point(), (Point{0.7, 0.2}));
    }
    EXPECT_THROW((void)f({0.1}), Error);
    EXPECT_THROW(BlackBoxFunction(0, [](std::span<const double>) { return 0.0; }), Error);
}

TEST(BlackBox, WrapUnitIsHalfOpen) {
    EXPECT_EQ(wrap_unit(1.0), 0.0);
    EXPECT_EQ(wrap_unit(0.0), 0.0);
    EXPECT_DOUBLE_EQ(wrap_unit(-0.25), 0.75);
    EXPECT_EQ(wrap_unit(-1e-300), 0.0);  // rounds up to 1, maps to 0
}

// ---------------------------------------------------------------------------

TEST(Sampling, PhiloxKnownAnswer) {
    // Random123 known-answer vector for philox4x32-10, all-ones input.
    const Philox4x32::Counter ctr{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu};
    const Philox4x32::Key key{0xffffffffu, 0xffffffffu};
    const auto out = Philox4x32::block(ctr, key);
    EXPECT_EQ(out[0], 0x408f276du);
    EXPECT_EQ(out[1], 0x41c83b0eu);
    EXPECT_EQ(out[2], 0xa20bc7c6u);
    EXPECT_EQ(out[3], 0x6d5451fdu);
}

TEST(Sampling, StreamDeterminism) {
    SampleStream a(1, 0), b(1, 0);
    EXPECT_EQ(uniform_point(a, 5), uniform_point(b, 5));
    SampleStream c(1, 1);
    SampleStream a2(1, 0);
    EXPECT_NE(uniform_point(c, 5), uniform_point(a2, 5));
}

TEST(Sampling, MeanOfUniforms) {
    SampleStream s(1, 0);
    double sum = 0.0;
    for (int i = 0; i < 100000; ++i) sum += s.next();
    EXPECT_NEAR(sum / 1e5, 0.5, 0.005);
}

TEST(Sampling, StreamsUncorrelated) {
    const int n = 10000;
    SampleStream a(1, 0), b(1, 1);
    double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
    for (int i = 0; i < n; ++i) {
        const double x = a.next(), y = b.next();
        sa += x, sb += y, saa += x * x, sbb += y * y, sab += x * y;
    }
    const double cov = sab / n - sa / n * sb / n;
    const double r = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
    EXPECT_LT(std::abs(r), 0.03);
}

TEST(Sampling, KolmogorovSmirnov) {
    SampleStream s(3, 0);
    std::vector<double> v(10000);
    s.fill(v);
    std::sort(v.begin(), v.end());
    double dmax = 0.0;
    const double n = static_cast<double>(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        ASSERT_GE(v[i], 0.0);
        ASSERT_LT(v[i], 1.0);
        dmax = std::max({dmax, (i + 1) / n - v[i], v[i] - i / n});
    }
    EXPECT_LT(dmax, 1.628 / std::sqrt(n));  // 1% critical value
}

TEST(Sampling, LatticeDefinition) {
    const std::vector<double> zero{0.0};
    EXPECT_EQ(lattice_point(0, 11, 1, zero), (Point{0.0}));
    for (std::uint64_t i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(lattice_point(i, 7, 1, zero)[0], i / 7.0);
    EXPECT_EQ(korobov_generator(7, 1), (std::vector<std::uint64_t>{1}));
}

TEST(Sampling, LatticeQuadrature) {
    const std::uint64_t n = 1009;
    const auto g = korobov_generator(n, 2);
    SampleStream s(5, 0);
    const Point shift = uniform_point(s, 2);
    double sum = 0.0;
    for (std::uint64_t i = 0; i < n; ++i) sum += lattice_point(i, n, g, shift)[0];
    EXPECT_NEAR(sum / n, 0.5, 1e-3);
}

TEST(Sampling, PickFreezeShapeAndDeterminism) {
    const auto d1 = build_pickfreeze(9, 1, 2, 2, VarSubset::of(2, {1}));
    EXPECT_EQ(d1.width(), 1u + 2u * 2u);
    const auto r = d1.replicate(0);
    EXPECT_EQ(r.x_u.size(), 1u);
    EXPECT_EQ(r.z.size(), 4u);

    const auto a = build_pickfreeze(42, 100, 3, 3, VarSubset::of(3, {2}));
    const auto b = build_pickfreeze(42, 100, 3, 3, VarSubset::of(3, {2}));
    for (std::uint64_t i = 0; i < 100; ++i) {
        EXPECT_EQ(a.replicate(i).x_u, b.replicate(i).x_u);
        EXPECT_EQ(a.replicate(i).z, b.replicate(i).z);
    }

    const auto e = build_pickfreeze(1, 10, 2, 3, VarSubset::empty(2));
    EXPECT_TRUE(e.replicate(0).x_u.empty());
    EXPECT_EQ(e.replicate(0).z.size(), 6u);
}

TEST(Sampling, GluedPointsShareTheFrozenBlock) {
    const auto u = VarSubset::of(3, {1, 3});
    const auto des = build_pickfreeze(3, 4, 3, 3, u, PointSet::shifted_lattice);
    std::vector<double> buf(des.width()), y(3);
    des.fill(2, buf);
    for (int k = 0; k < 3; ++k) {
        des.glued_point(buf, k, y);
        EXPECT_EQ(y[0], buf[0]);
        EXPECT_EQ(y[2], buf[1]);
        EXPECT_EQ(y[1], des.z_point(buf, k)[1]);
    }
}

TEST(Replicates, IndependentOfWorkerCount) {
    auto kernel = [](std::uint64_t first, std::uint64_t count, std::span<double> out) {
        for (std::uint64_t i = 0; i < count; ++i) {
            SampleStream s(11, first + i);
            out[i] = std::exp(10.0 * s.next());
        }
    };
    const auto one = run_replicates(50000, 1, 1, kernel);
    const auto four = run_replicates(50000, 1, 4, kernel);
    EXPECT_EQ(one[0].mean(), four[0].mean());
    EXPECT_EQ(one[0].std_error(), four[0].std_error());
}

TEST(Replicates, ChanMergeMatchesDirect) {
    std::vector<double> v;
    SampleStream s(2, 0);
    for (int i = 0; i < 1000; ++i) v.push_back(1e6 + s.next());
    auto all = ColumnSummary::of(v);
    auto lo = ColumnSummary::of(std::span<const double>(v).first(300));
    lo.merge(ColumnSummary::of(std::span<const double>(v).subspan(300)));
    EXPECT_NEAR(lo.mean(), all.mean(), 1e-9);
    EXPECT_NEAR(lo.variance(), all.variance(), 1e-9 * all.variance());
}
