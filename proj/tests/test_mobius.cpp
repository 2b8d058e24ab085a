// Moebius / zeta transforms over the subset lattice.

#include <gtest/gtest.h>

#include <cmath>

#include "hosi/mobius.hpp"
#include "hosi/oracles.hpp"

using namespace hosi;

namespace {

SubsetMap random_map(int d, std::uint64_t seed) {
    SampleStream s(seed, static_cast<std::uint64_t>(d));
    SubsetMap m = SubsetMap::full_lattice(d);
    for (const auto& u : enumerate_subsets(d, SubsetFilter::all)) m.set(u, 2.0 * s.next() - 1.0);
    return m;
}

}  // namespace

TEST(Mobius, InclusionExclusionD2) {
    SubsetMap cum(2);
    cum.set(VarSubset::empty(2), 0.0);
    cum.set(VarSubset::of(2, {1}), 0.3);
    cum.set(VarSubset::of(2, {2}), 0.5);
    cum.set(VarSubset::full(2), 1.1);
    const auto comp = moebius_transform(cum);
    EXPECT_EQ(comp.at(VarSubset::empty(2)), 0.0);
    EXPECT_DOUBLE_EQ(comp.at(VarSubset::of(2, {1})), 0.3);
    EXPECT_DOUBLE_EQ(comp.at(VarSubset::of(2, {2})), 0.5);
    EXPECT_NEAR(comp.at(VarSubset::full(2)), 1.1 - 0.3 - 0.5, 1e-15);
}

TEST(Mobius, InversePairOnRandomMaps) {
    for (int d = 1; d <= 8; ++d)
        for (std::uint64_t t = 0; t < (d <= 6 ? 100u : 20u); ++t) {
            const auto x = random_map(d, t);
            const auto back = zeta_transform(moebius_transform(x));
            const auto fwd = moebius_transform(zeta_transform(x));
            for (const auto& [mask, v] : x.entries()) {
                ASSERT_NEAR(back.entries().at(mask), v, 1e-12);
                ASSERT_NEAR(fwd.entries().at(mask), v, 1e-12);
            }
        }
}

TEST(Mobius, SparseMatchesDense) {
    // Downward-closed family (all subsets of size <= 2) vs. the dense path.
    const int d = 5;
    const auto full = random_map(d, 3);
    SubsetMap part(d);
    for (const auto& u : enumerate_subsets(d, SubsetFilter::up_to_size, 2)) part.set(u, full.at(u));
    ASSERT_FALSE(part.is_full_lattice());
    const auto a = moebius_transform(full), b = moebius_transform(part);
    for (const auto& u : part.subsets()) EXPECT_NEAR(a.at(u), b.at(u), 1e-14);
}

TEST(Mobius, RejectsFamiliesThatAreNotDownwardClosed) {
    SubsetMap m(3);
    m.set(VarSubset::empty(3), 0.0);
    m.set(VarSubset::of(3, {1, 2}), 1.0);
    m.set(VarSubset::of(3, {1}), 1.0);
    try {
        (void)moebius_transform(m);
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("{2}"), std::string::npos);
    }
    EXPECT_EQ(m.missing_for_closure().size(), 1u);
}

TEST(Mobius, ZetaExamples) {
    SubsetMap one(1);
    one.set(VarSubset::empty(1), 0.0);
    one.set(VarSubset::full(1), 0.7);
    EXPECT_EQ(zeta_transform(one).at(VarSubset::full(1)), 0.7);

    const auto zero = zeta_transform(SubsetMap::full_lattice(4));
    for (const auto& [m, v] : zero.entries()) EXPECT_EQ(v, 0.0);

    // Additive spectral components: only singletons are nonzero.
    AdditiveSpec add{0.5, {Factor::linear(0.0, 0.4), Factor::cosine(0.0, 0.3), Factor::gfunction(2.0)}};
    SubsetMap comp = SubsetMap::full_lattice(3);
    for (const auto& u : enumerate_subsets(3, SubsetFilter::nonempty))
        comp.set(u, additive_indices(add, u, 4, IndexFamily::fourier).component);
    const auto cum = zeta_transform(comp);
    for (const auto& u : enumerate_subsets(3, SubsetFilter::nonempty)) {
        double s = 0.0;
        for (int j : u.members()) s += comp.at(VarSubset::of(3, {j}));
        EXPECT_NEAR(cum.at(u), s, 1e-14);
        EXPECT_NEAR(cum.at(u), additive_indices(add, u, 4, IndexFamily::fourier).ult, 1e-12);
    }
}

TEST(Mobius, RectangleComponentsP4) {
    const RectangleSpec rect{{0.1, 0.2, 0.3}, {}};
    const double eps = 0.1 * 0.2 * 0.3;
    SubsetMap cum = SubsetMap::full_lattice(3);
    for (const auto& u : enumerate_subsets(3, SubsetFilter::nonempty))
        cum.set(u, rectangle_indices(rect, u, 4, IndexFamily::moment).ult);
    const auto comp = moebius_transform(cum);
    for (const auto& u : enumerate_subsets(3, SubsetFilter::nonempty)) {
        double want = std::pow(eps, 4);
        for (int j : u.members()) want *= std::pow(rect.eps[static_cast<std::size_t>(j - 1)], -3) - 1.0;
        EXPECT_NEAR(comp.at(u), want, 1e-12 * std::max(1.0, want)) << u.to_string();
    }
}

TEST(Mobius, MonotoneZetaOfNonnegativeComponents) {
    const ProductFunctionSpec spec = ProductFunctionSpec::gfunction({0.0, 1.0, 3.0, 9.0});
    for (auto family : {IndexFamily::moment, IndexFamily::fourier, IndexFamily::walsh}) {
        SubsetMap comp = SubsetMap::full_lattice(4);
        for (const auto& u : enumerate_subsets(4, SubsetFilter::nonempty))
            comp.set(u, product_indices(spec, u, 4, family).component);
        const auto cum = zeta_transform(comp);
        for (const auto& u : enumerate_subsets(4, SubsetFilter::all))
            for (const auto& v : enumerate_subsets(4, SubsetFilter::all))
                if (u.subset_of(v)) {
                    EXPECT_LE(cum.at(u), cum.at(v)) << to_string(family);
                }
    }
}

TEST(Mobius, StdErrorsAddInQuadrature) {
    SubsetMap se(2);
    se.set(VarSubset::empty(2), 0.0);
    se.set(VarSubset::of(2, {1}), 0.3);
    se.set(VarSubset::of(2, {2}), 0.4);
    se.set(VarSubset::full(2), 1.2);
    const auto out = moebius_std_errors(se);
    EXPECT_NEAR(out.at(VarSubset::full(2)), std::sqrt(0.09 + 0.16 + 1.44), 1e-15);
    EXPECT_NEAR(out.at(VarSubset::of(2, {2})), 0.4, 1e-15);
}
