#pragma once

// Monte Carlo evaluation of the cyclic multilinear operator and the spectral
// subset indices built on it.  Shared by the Fourier and Walsh syntheses;
// only the CyclicDesign differs.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/cyclic_design.hpp"
#include "hosi/replicates.hpp"

namespace hosi {

enum class SpectralVariant { full_pd, reduced_p_minus_1_d, dirichlet_weighted };

inline const char* to_string(SpectralVariant v) {
    switch (v) {
        case SpectralVariant::full_pd: return "full_pd";
        case SpectralVariant::reduced_p_minus_1_d: return "reduced_p_minus_1_d";
        case SpectralVariant::dirichlet_weighted: return "dirichlet_weighted";
    }
    return "?";
}

struct SpectralEstimate {
    VarSubset subset;
    int order = 2;
    /// ul-tau_u^[p] (raw minus mu-hat^p) or, for operator/weighted runs, the
    /// operator value itself.
    double value = 0.0;
    double std_error = 0.0;
    /// Mean of the replicate products: estimates ul-tau_u^[p] + mu^p.
    double raw_value = 0.0;
    double raw_std_error = 0.0;
    std::uint64_t n = 0;
    SpectralVariant variant = SpectralVariant::full_pd;
    Synthesis synthesis = Synthesis::fourier;
    int base = 2;
    std::uint64_t seed = 0;
    bool approximate_se = false;
    /// Odd p without a weighting kernel: estimand is the real part of a
    /// possibly complex coefficient sum.
    bool experimental = false;
    int dirichlet_n = -1;
    std::vector<long long> modulation;
};

namespace detail {

/// Columns: [product over slots, mean of slot values].  slots[j] is the
/// function evaluated at w_j.
inline ReplicateSummary cyclic_summary(std::span<const BlackBoxFunction* const> slots,
                                       const CyclicDesign& design, unsigned workers) {
    const auto p = static_cast<std::size_t>(design.p());
    const auto d = static_cast<std::size_t>(design.d());
    if (slots.size() != p) throw Error("need exactly p functions for the multilinear operator");
    for (const auto* f : slots)
        if (f->dim() != design.d())
            throw Error("function dimension " + std::to_string(f->dim()) + " does not match design dimension " +
                        std::to_string(design.d()));
    bool same = true;
    for (const auto* f : slots) same = same && (f == slots[0]);

    return run_replicates(design.n(), 2, workers,
                          [&](std::uint64_t first, std::uint64_t count, std::span<double> out) {
        std::vector<double> scratch(design.width());
        std::vector<double> pts(count * p * d);
        for (std::uint64_t i = 0; i < count; ++i)
            design.points(first + i, scratch, std::span<double>(pts).subspan(i * p * d, p * d));
        std::vector<double> vals(count * p);
        if (same) {
            slots[0]->evaluate_batch(pts, vals);
        } else {
            std::vector<double> slot_pts(count * d), slot_vals(count);
            for (std::size_t j = 0; j < p; ++j) {
                for (std::uint64_t i = 0; i < count; ++i)
                    std::copy_n(pts.begin() + static_cast<std::ptrdiff_t>((i * p + j) * d), d,
                                slot_pts.begin() + static_cast<std::ptrdiff_t>(i * d));
                slots[j]->evaluate_batch(slot_pts, slot_vals);
                for (std::uint64_t i = 0; i < count; ++i) vals[i * p + j] = slot_vals[i];
            }
        }
        for (std::uint64_t i = 0; i < count; ++i) {
            double prod = 1.0, sum = 0.0;
            for (std::size_t j = 0; j < p; ++j) {
                prod *= vals[i * p + j];
                sum += vals[i * p + j];
            }
            out[2 * i] = prod;
            out[2 * i + 1] = sum / static_cast<double>(p);
        }
    });
}

inline SpectralVariant variant_of(const CyclicDesign& design) {
    return design.form() == CyclicForm::full ? SpectralVariant::full_pd : SpectralVariant::reduced_p_minus_1_d;
}

}  // namespace detail

/// MC estimate of <f_0, ..., f_{p-1}>_p (Fourier) or <...>_{p,wal} (Walsh,
/// per the design's synthesis).  The design's subset must be the full set.
inline SpectralEstimate multilinear_product(std::span<const BlackBoxFunction> fs, const CyclicDesign& design,
                                            unsigned workers = 0) {
    if (!design.subset().is_full()) throw Error("multilinear_product needs a design over the full variable set");
    std::vector<const BlackBoxFunction*> slots;
    for (const auto& f : fs) slots.push_back(&f);
    auto s = detail::cyclic_summary(slots, design, workers);
    SpectralEstimate est;
    est.subset = design.subset();
    est.order = design.p();
    est.raw_value = est.value = s[0].mean();
    est.raw_std_error = est.std_error = s[0].std_error();
    est.n = design.n();
    est.variant = detail::variant_of(design);
    est.synthesis = design.synthesis();
    est.base = design.base();
    est.seed = design.seed();
    return est;
}

/// ul-tau_u^[p] for either synthesis: mean product minus mu-hat^p, where
/// mu-hat pools all n*p evaluations.  u = {} gives 0 without evaluating f.
inline SpectralEstimate estimate_ult_cyclic(const BlackBoxFunction& f, const VarSubset& u, int p,
                                            const CyclicDesign& design, unsigned workers = 0) {
    if (p < 2) throw Error("order p must be at least 2");
    if (!(u == design.subset()))
        throw Error("design was built for subset " + design.subset().to_string() + ", not " + u.to_string());
    if (p != design.p())
        throw Error("design was built for p=" + std::to_string(design.p()) + ", not p=" + std::to_string(p));
    SpectralEstimate est;
    est.subset = u;
    est.order = p;
    est.n = design.n();
    est.variant = detail::variant_of(design);
    est.synthesis = design.synthesis();
    est.base = design.base();
    est.seed = design.seed();
    est.approximate_se = true;
    est.experimental = (p % 2 == 1);
    if (u.is_empty()) return est;

    std::vector<const BlackBoxFunction*> slots(static_cast<std::size_t>(p), &f);
    auto s = detail::cyclic_summary(slots, design, workers);
    est.raw_value = s[0].mean();
    est.raw_std_error = s[0].std_error();
    est.value = est.raw_value - std::pow(s[1].mean(), p);
    est.std_error = est.raw_std_error;
    return est;
}

}  // namespace hosi
