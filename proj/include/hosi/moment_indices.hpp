#pragma once

// Moment-based subset importance ul-tau_u^(p): the mean of a product of p
// function values that share x_u and redraw the complement, minus mu^p.
// p = 2 gives the classical closed Sobol' index.

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/replicates.hpp"
#include "hosi/sampling.hpp"

namespace hosi {

enum class MomentEstimator { product_centered, product_difference, classical_total };

inline const char* to_string(MomentEstimator e) {
    switch (e) {
        case MomentEstimator::product_centered: return "product_centered";
        case MomentEstimator::product_difference: return "product_difference";
        case MomentEstimator::classical_total: return "classical_total";
    }
    return "?";
}

struct IndexEstimate {
    VarSubset subset;
    int order = 2;
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
    MomentEstimator estimator = MomentEstimator::product_difference;
    std::uint64_t seed = 0;
    /// True when std_error ignores the covariance of a subtracted mean.
    bool approximate_se = false;
};

namespace detail {

inline void check_design(const BlackBoxFunction& f, const VarSubset& u, int p,
                         const PickFreezeDesign& design) {
    if (f.dim() != design.d())
        throw Error("function dimension " + std::to_string(f.dim()) + " does not match design dimension " +
                    std::to_string(design.d()));
    if (!(u == design.subset()))
        throw Error("design was built for subset " + design.subset().to_string() + ", not " + u.to_string());
    if (p != design.p())
        throw Error("design was built for p=" + std::to_string(design.p()) + ", not p=" + std::to_string(p));
    if (design.n() < 2) throw Error("estimators need at least n=2 replicates");
}

/// Fills `glued` with the p points x_u : z^(k)_{-u} and (optionally) `plain`
/// with the p complement blocks, for `count` replicates starting at `first`.
inline void pickfreeze_points(const PickFreezeDesign& design, std::uint64_t first, std::uint64_t count,
                              int npoints, std::vector<double>& glued, std::vector<double>* plain) {
    const auto d = static_cast<std::size_t>(design.d());
    const auto p = static_cast<std::size_t>(npoints);
    std::vector<double> buf(design.width());
    glued.resize(count * p * d);
    if (plain) plain->resize(count * p * d);
    for (std::uint64_t i = 0; i < count; ++i) {
        design.fill(first + i, buf);
        for (std::size_t k = 0; k < p; ++k) {
            auto dst = std::span<double>(glued).subspan((i * p + k) * d, d);
            design.glued_point(buf, static_cast<int>(k), dst);
            if (plain) {
                auto z = design.z_point(buf, static_cast<int>(k));
                std::copy(z.begin(), z.end(), plain->begin() + static_cast<std::ptrdiff_t>((i * p + k) * d));
            }
        }
    }
}

}  // namespace detail

/// Product estimator centered by the pooled mean of all n*p evaluations.
/// The reported standard error ignores the variability of mu-hat^p.
inline IndexEstimate estimate_ult_p_centered(const BlackBoxFunction& f, const VarSubset& u, int p,
                                             const PickFreezeDesign& design, unsigned workers = 0) {
    if (p < 2) throw Error("order p must be at least 2");
    detail::check_design(f, u, p, design);
    IndexEstimate est{u, p, 0.0, 0.0, design.n(), MomentEstimator::product_centered, design.seed(), true};
    if (u.is_empty()) return est;

    const auto pp = static_cast<std::size_t>(p);
    auto summary = run_replicates(design.n(), 2, workers,
                                  [&](std::uint64_t first, std::uint64_t count, std::span<double> out) {
        std::vector<double> pts;
        detail::pickfreeze_points(design, first, count, p, pts, nullptr);
        std::vector<double> vals(count * pp);
        f.evaluate_batch(pts, vals);
        for (std::uint64_t i = 0; i < count; ++i) {
            double prod = 1.0, sum = 0.0;
            for (std::size_t k = 0; k < pp; ++k) {
                prod *= vals[i * pp + k];
                sum += vals[i * pp + k];
            }
            out[i * 2] = prod;
            out[i * 2 + 1] = sum / static_cast<double>(p);
        }
    });
    const double mu_hat = summary[1].mean();
    est.value = summary[0].mean() - std::pow(mu_hat, p);
    est.std_error = summary[0].std_error();
    return est;
}

/// Unbiased estimator: mean over replicates of
/// prod_k f(x_u : z^(k)_{-u}) - prod_k f(z^(k)).
inline IndexEstimate estimate_ult_p_difference(const BlackBoxFunction& f, const VarSubset& u, int p,
                                               const PickFreezeDesign& design, unsigned workers = 0) {
    if (p < 2) throw Error("order p must be at least 2");
    detail::check_design(f, u, p, design);
    IndexEstimate est{u, p, 0.0, 0.0, design.n(), MomentEstimator::product_difference, design.seed(), false};
    if (u.is_empty()) return est;

    const auto pp = static_cast<std::size_t>(p);
    auto summary = run_replicates(design.n(), 1, workers,
                                  [&](std::uint64_t first, std::uint64_t count, std::span<double> out) {
        std::vector<double> glued, plain;
        detail::pickfreeze_points(design, first, count, p, glued, &plain);
        std::vector<double> gv(count * pp), pv(count * pp);
        f.evaluate_batch(glued, gv);
        f.evaluate_batch(plain, pv);
        for (std::uint64_t i = 0; i < count; ++i) {
            double a = 1.0, b = 1.0;
            for (std::size_t k = 0; k < pp; ++k) {
                a *= gv[i * pp + k];
                b *= pv[i * pp + k];
            }
            out[i] = a - b;
        }
    });
    est.value = summary[0].mean();
    est.std_error = summary[0].std_error();
    return est;
}

/// Total index ol-tau_u^2 = 1/2 E (f(x) - f(x_{-u} : z_u))^2.  Reuses a
/// pick-freeze design built for u: z^(1) plays x, and x_u replaces its
/// u-coordinates.
inline IndexEstimate estimate_total_effect(const BlackBoxFunction& f, const VarSubset& u,
                                           const PickFreezeDesign& design, unsigned workers = 0) {
    if (f.dim() != design.d()) throw Error("function dimension does not match design dimension");
    if (!(u == design.subset()))
        throw Error("design was built for subset " + design.subset().to_string() + ", not " + u.to_string());
    if (design.n() < 2) throw Error("estimators need at least n=2 replicates");
    IndexEstimate est{u, 2, 0.0, 0.0, design.n(), MomentEstimator::classical_total, design.seed(), false};
    if (u.is_empty()) return est;

    auto summary = run_replicates(design.n(), 1, workers,
                                  [&](std::uint64_t first, std::uint64_t count, std::span<double> out) {
        std::vector<double> glued, plain;
        detail::pickfreeze_points(design, first, count, 1, glued, &plain);
        std::vector<double> gv(count), pv(count);
        f.evaluate_batch(glued, gv);
        f.evaluate_batch(plain, pv);
        for (std::uint64_t i = 0; i < count; ++i) {
            const double diff = pv[i] - gv[i];
            out[i] = 0.5 * diff * diff;
        }
    });
    est.value = summary[0].mean();
    est.std_error = summary[0].std_error();
    return est;
}

/// ul-tau_u^2 + ol-tau_{-u}^2 - sigma^2, all estimated on one p=2 design so
/// that the residual has an exact per-replicate standard error.
struct ComplementarityReport {
    VarSubset subset;
    double under = 0.0;        // ul-tau_u^2
    double total_comp = 0.0;   // ol-tau_{-u}^2
    double variance = 0.0;     // sigma^2
    double residual = 0.0;
    double residual_std_error = 0.0;
    std::uint64_t n = 0;

    /// |residual| / SE, or 0 when both vanish.
    double z() const noexcept {
        if (residual_std_error > 0.0) return residual / residual_std_error;
        return residual == 0.0 ? 0.0 : INFINITY;
    }
};

inline ComplementarityReport check_complementarity(const BlackBoxFunction& f, const VarSubset& u,
                                                   const PickFreezeDesign& design, unsigned workers = 0) {
    detail::check_design(f, u, 2, design);
    auto summary = run_replicates(design.n(), 4, workers,
                                  [&](std::uint64_t first, std::uint64_t count, std::span<double> out) {
        std::vector<double> glued, plain;
        detail::pickfreeze_points(design, first, count, 2, glued, &plain);
        std::vector<double> gv(count * 2), pv(count * 2);
        f.evaluate_batch(glued, gv);
        f.evaluate_batch(plain, pv);
        for (std::uint64_t i = 0; i < count; ++i) {
            const double y1 = gv[2 * i], y2 = gv[2 * i + 1];
            const double z1 = pv[2 * i], z2 = pv[2 * i + 1];
            const double under = y1 * y2 - z1 * z2;
            const double total = 0.5 * (y1 - y2) * (y1 - y2);
            const double var = 0.5 * (z1 - z2) * (z1 - z2);
            out[i * 4 + 0] = under;
            out[i * 4 + 1] = total;
            out[i * 4 + 2] = var;
            out[i * 4 + 3] = under + total - var;
        }
    });
    ComplementarityReport r;
    r.subset = u;
    r.n = design.n();
    r.under = summary[0].mean();
    r.total_comp = summary[1].mean();
    r.variance = summary[2].mean();
    r.residual = summary[3].mean();
    r.residual_std_error = summary[3].std_error();
    return r;
}

}  // namespace hosi
