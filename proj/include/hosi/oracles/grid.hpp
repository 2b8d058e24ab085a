#pragma once

// Piecewise-constant functions on small tensor grids, and exhaustive
// (enumeration-based) values of every index family on them.

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/mobius.hpp"
#include "hosi/oracles/closed_forms.hpp"
#include "hosi/oracles/factors.hpp"
#include "hosi/sampling.hpp"
#include "hosi/spectral_walsh.hpp"

namespace hosi {

inline constexpr std::size_t kMaxGridCells = 4096;  // 16^3

/// f constant on the cells of an m_1 x ... x m_d grid of equal-width
/// cells; values row-major with the last axis fastest.
class GridFunction {
public:
    GridFunction(std::vector<std::size_t> shape, std::vector<double> values)
        : shape_(std::move(shape)), values_(std::move(values)) {
        if (shape_.empty() || shape_.size() > 3) throw Error("grid functions have 1 to 3 axes");
        std::size_t total = 1;
        for (auto m : shape_) {
            if (m < 1) throw Error("grid axis needs at least one cell");
            total *= m;
            if (total > kMaxGridCells) throw Error("grid too large: more than 4096 cells");
        }
        if (values_.size() != total)
            throw Error("grid has " + std::to_string(values_.size()) + " values for " + std::to_string(total) + " cells");
        for (double v : values_)
            if (!std::isfinite(v)) throw Error("grid has a non-finite cell value");
    }

    /// Cell values uniform on [lo, hi).
    static GridFunction random(std::vector<std::size_t> shape, std::uint64_t seed, double lo = -1.0,
                               double hi = 1.0) {
        std::size_t total = 1;
        for (auto m : shape) total *= m;
        SampleStream s(seed, 0);
        std::vector<double> v(total);
        for (double& x : v) x = lo + (hi - lo) * s.next();
        return GridFunction(std::move(shape), std::move(v));
    }

    int dim() const noexcept { return static_cast<int>(shape_.size()); }
    const std::vector<std::size_t>& shape() const noexcept { return shape_; }
    const std::vector<double>& values() const noexcept { return values_; }
    std::size_t cells() const noexcept { return values_.size(); }

    std::size_t flat_index(std::span<const std::size_t> idx) const {
        std::size_t f = 0;
        for (std::size_t a = 0; a < shape_.size(); ++a) f = f * shape_[a] + idx[a];
        return f;
    }

    double evaluate(std::span<const double> x) const {
        std::size_t f = 0;
        for (std::size_t a = 0; a < shape_.size(); ++a) {
            auto c = static_cast<std::size_t>(x[a] * static_cast<double>(shape_[a]));
            f = f * shape_[a] + std::min(c, shape_[a] - 1);
        }
        return values_[f];
    }

    BlackBoxFunction as_function() const {
        GridFunction copy = *this;
        return BlackBoxFunction(dim(), [copy](std::span<const double> x) { return copy.evaluate(x); });
    }

    double mean() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s / static_cast<double>(values_.size());
    }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> values_;
};

namespace detail {

/// Advances a row-major multi-index; false after the last one.
inline bool next_index(std::vector<std::size_t>& idx, std::span<const std::size_t> shape) {
    for (std::size_t a = shape.size(); a-- > 0;) {
        if (++idx[a] < shape[a]) return true;
        idx[a] = 0;
    }
    return false;
}

inline void check_grid_subset(const GridFunction& g, const VarSubset& u) {
    if (u.dim() != g.dim())
        throw Error("subset dimension " + std::to_string(u.dim()) + " does not match grid dimension " +
                    std::to_string(g.dim()));
}

}  // namespace detail

/// f-bar_u on the full grid: the average of f over the axes outside u,
/// broadcast back over them.
inline std::vector<double> conditional_mean(const GridFunction& g, const VarSubset& u) {
    detail::check_grid_subset(g, u);
    const auto& shape = g.shape();
    const std::size_t d = shape.size();
    std::size_t outside = 1;
    for (std::size_t a = 0; a < d; ++a)
        if (!u.contains(static_cast<int>(a) + 1)) outside *= shape[a];
    std::vector<double> out(g.cells(), 0.0);
    std::vector<std::size_t> idx(d, 0), key(d, 0);
    // accumulate per u-cell into a slot addressed with outside axes zeroed
    std::vector<double> acc(g.cells(), 0.0);
    do {
        for (std::size_t a = 0; a < d; ++a) key[a] = u.contains(static_cast<int>(a) + 1) ? idx[a] : 0;
        acc[g.flat_index(key)] += g.values()[g.flat_index(idx)];
    } while (detail::next_index(idx, shape));
    std::fill(idx.begin(), idx.end(), 0);
    do {
        for (std::size_t a = 0; a < d; ++a) key[a] = u.contains(static_cast<int>(a) + 1) ? idx[a] : 0;
        out[g.flat_index(idx)] = acc[g.flat_index(key)] / static_cast<double>(outside);
    } while (detail::next_index(idx, shape));
    return out;
}

/// E[f-bar_u(x_u)^p], i.e. ult^(p)_u + mu^p through the conditional mean.
inline double grid_moment_raw(const GridFunction& g, const VarSubset& u, int p) {
    const auto fbar = conditional_mean(g, u);
    double s = 0.0;
    for (double v : fbar) s += std::pow(v, p);
    return s / static_cast<double>(fbar.size());
}

/// The pick-freeze integral E[prod_k f(x_u : z^(k)_{-u})] by enumerating
/// every u-cell and every p-tuple of complement cells.
inline double grid_pickfreeze_raw(const GridFunction& g, const VarSubset& u, int p) {
    detail::check_grid_subset(g, u);
    if (p < 1) throw Error("order p must be positive");
    const auto& shape = g.shape();
    const std::size_t d = shape.size();
    std::vector<std::size_t> ushape, cshape;
    for (std::size_t a = 0; a < d; ++a) (u.contains(static_cast<int>(a) + 1) ? ushape : cshape).push_back(shape[a]);
    std::size_t nu = 1, nc = 1;
    for (auto m : ushape) nu *= m;
    for (auto m : cshape) nc *= m;
    if (static_cast<double>(nu) * std::pow(static_cast<double>(nc), p) > 2e8)
        throw Error("grid too large for exhaustive pick-freeze enumeration");

    std::vector<std::size_t> full(d);
    auto value = [&](std::size_t ucell, std::size_t ccell) {
        std::size_t ur = ucell, cr = ccell;
        for (std::size_t a = d; a-- > 0;) {
            if (u.contains(static_cast<int>(a) + 1)) {
                full[a] = ur % shape[a];
                ur /= shape[a];
            } else {
                full[a] = cr % shape[a];
                cr /= shape[a];
            }
        }
        return g.values()[g.flat_index(full)];
    };

    double total = 0.0;
    std::vector<std::size_t> tuple(static_cast<std::size_t>(p));
    for (std::size_t x = 0; x < nu; ++x) {
        std::fill(tuple.begin(), tuple.end(), 0);
        for (;;) {
            double prod = 1.0;
            for (std::size_t k = 0; k < tuple.size(); ++k) prod *= value(x, tuple[k]);
            total += prod;
            std::size_t k = 0;
            while (k < tuple.size() && ++tuple[k] == nc) tuple[k++] = 0;
            if (k == tuple.size()) break;
        }
    }
    return total / (static_cast<double>(nu) * std::pow(static_cast<double>(nc), p));
}

/// ANOVA part f_u = sum_{v subset u} (-1)^{|u-v|} f-bar_v on the full grid.
inline std::vector<double> anova_component(const GridFunction& g, const VarSubset& u) {
    detail::check_grid_subset(g, u);
    std::vector<double> out(g.cells(), 0.0);
    for (VarSubset::Mask s = u.mask();; s = (s - 1) & u.mask()) {
        const double sign = (std::popcount(u.mask() ^ s) % 2) ? -1.0 : 1.0;
        const auto fbar = conditional_mean(g, VarSubset(g.dim(), s));
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += sign * fbar[i];
        if (s == 0) break;
    }
    return out;
}

/// sigma_u^2 = int f_u^2 (u nonempty).
inline double anova_variance(const GridFunction& g, const VarSubset& u) {
    if (u.is_empty()) return 0.0;
    const auto fu = anova_component(g, u);
    double s = 0.0;
    for (double v : fu) s += v * v;
    return s / static_cast<double>(fu.size());
}

inline double grid_variance(const GridFunction& g) {
    const double mu = g.mean();
    double s = 0.0;
    for (double v : g.values()) s += (v - mu) * (v - mu);
    return s / static_cast<double>(g.cells());
}

/// sum over u-supported k of |f^(k)|^p.  The coefficient of a grid
/// function is V(k mod M) prod_j phi_j(k_j), where V is the discrete
/// transform of the cell values and phi_j the transform of one cell, so the
/// sum reduces to sum_r |V(r)|^p prod_j Phi_p(r_j) with Phi_p the
/// residue-class sum of |phi|^p (Hurwitz series with certified tail).
inline double grid_fourier_raw(const GridFunction& g, const VarSubset& u, int p) {
    detail::check_grid_subset(g, u);
    if (p < 2) throw Error("order p must be at least 2");
    const auto& shape = g.shape();
    const std::size_t d = shape.size();
    // V over all residues, one axis at a time
    std::vector<std::complex<double>> V(g.values().begin(), g.values().end());
    std::size_t stride = g.cells();
    for (std::size_t a = 0; a < d; ++a) {
        const std::size_t m = shape[a];
        stride /= m;
        const std::size_t outer = g.cells() / (m * stride);
        std::vector<std::complex<double>> line(m);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t in = 0; in < stride; ++in) {
                const std::size_t base = o * m * stride + in;
                for (std::size_t r = 0; r < m; ++r) {
                    std::complex<double> s = 0.0;
                    for (std::size_t c = 0; c < m; ++c)
                        s += V[base + c * stride] *
                             std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((r * c) % m) / static_cast<double>(m));
                    line[r] = s;
                }
                for (std::size_t r = 0; r < m; ++r) V[base + r * stride] = line[r];
            }
    }
    std::vector<std::vector<double>> phi(d);
    for (std::size_t a = 0; a < d; ++a)
        for (std::size_t r = 0; r < shape[a]; ++r) phi[a].push_back(detail::cell_kernel_power_sum(r, shape[a], p));

    double total = 0.0;
    std::vector<std::size_t> idx(d, 0);
    do {
        bool supported = true;
        double w = 1.0;
        for (std::size_t a = 0; a < d; ++a) {
            if (idx[a] != 0 && !u.contains(static_cast<int>(a) + 1)) supported = false;
            w *= phi[a][idx[a]];
        }
        if (supported) total += std::pow(std::abs(V[g.flat_index(idx)]), p) * w;
    } while (detail::next_index(idx, shape));
    return total;
}

/// Walsh expansion of the grid; every axis must have a power-of-b count.
inline WalshPolynomial grid_walsh(const GridFunction& g, int base) {
    return WalshPolynomial::from_grid(g.values(), g.shape(), base);
}

/// sigma_{p,wal} restricted to u-supported indices (real part).
inline double grid_walsh_raw(const GridFunction& g, const VarSubset& u, int p, int base) {
    detail::check_grid_subset(g, u);
    return exact_sigma_p_walsh(grid_walsh(g, base).restricted_to(u), p).real();
}

/// Exhaustive value of one index family on a grid function: ult_u and the
/// Moebius component sigma_u.  Moment values use the conditional-mean
/// route, spectral values the exact coefficient sums.
inline OracleValue brute_force_grid(const GridFunction& g, const VarSubset& u, int p, IndexFamily family,
                                    int base = 2) {
    detail::check_oracle_args(g.dim(), u, p);
    detail::require_even_spectral(family, p);
    auto raw = [&](const VarSubset& v) {
        switch (family) {
            case IndexFamily::moment: return grid_moment_raw(g, v, p);
            case IndexFamily::fourier: return grid_fourier_raw(g, v, p);
            case IndexFamily::walsh: return grid_walsh_raw(g, v, p, base);
        }
        return 0.0;
    };
    const double empty = raw(VarSubset::empty(g.dim()));
    SubsetMap cum(g.dim());
    for (VarSubset::Mask s = u.mask();; s = (s - 1) & u.mask()) {
        const VarSubset v(g.dim(), s);
        cum.set(v, s == 0 ? 0.0 : raw(v) - empty);
        if (s == 0) break;
    }
    return {cum.at(u), moebius_transform(cum).at(u), {}};
}

// ---------------------------------------------------------------------------
// Additive p = 3 constant
// ---------------------------------------------------------------------------

struct P3Instance {
    std::uint64_t seed = 0;
    double mu = 0.0;
    std::vector<double> tau2;   // E h_j^2
    std::vector<double> gamma;  // E h_j^3 (unstandardized)
    double brute = 0.0;         // ult^(3)_{1,2} by enumeration
    double coef1 = 0.0;         // sum_j (mu tau_j^2 + gamma_j)
    double coef3 = 0.0;         // sum_j (3 mu tau_j^2 + gamma_j)
    bool discriminating = false;
    int winner = 0;             // 1 or 3; 0 when neither matches or the input cannot tell
};

struct P3DiscrepancyReport {
    std::vector<P3Instance> instances;
    int winning_constant = 0;
    bool consistent = false;

    std::string to_text() const {
        std::ostringstream os;
        os.precision(17);
        os << "additive p=3 coefficient check: ult^(3)_u vs sum_j (c mu tau_j^2 + gamma_j), c in {1,3}\n";
        for (const auto& in : instances) {
            os << "seed=" << in.seed << " mu=" << in.mu << " brute=" << in.brute << " c=1:" << in.coef1
               << " c=3:" << in.coef3 << (in.discriminating ? "" : " (non-discriminating)") << " winner=" << in.winner
               << "\n";
        }
        os << "winning constant: " << winning_constant << (consistent ? " (consistent)" : " (INCONSISTENT)") << "\n";
        return os.str();
    }
};

/// Random additive grids f = c + a_i + b_j on 8 x 8 cells (skewed
/// marginals), plus one zero-mean control.  Brute-force ult^(3)_{1,2}
/// decides between the two candidate coefficients on mu tau^2.
inline P3DiscrepancyReport resolve_additive_p3_discrepancy(std::uint64_t seed = 1, int instances = 10) {
    constexpr std::size_t M = 8;
    P3DiscrepancyReport rep;
    for (int t = 0; t <= instances; ++t) {
        const bool control = (t == instances);
        SampleStream s(seed, static_cast<std::uint64_t>(t));
        std::vector<double> a(M), b(M);
        for (auto* axis : {&a, &b})
            for (double& v : *axis) {
                const double r = s.next();
                v = r * r * r;  // skewed
            }
        for (auto* axis : {&a, &b}) {
            double m = 0.0;
            for (double v : *axis) m += v;
            m /= M;
            for (double& v : *axis) v -= m;
        }
        const double c = control ? 0.0 : 0.5 + 1.5 * s.next();
        std::vector<double> vals(M * M);
        for (std::size_t i = 0; i < M; ++i)
            for (std::size_t j = 0; j < M; ++j) vals[i * M + j] = c + a[i] + b[j];
        GridFunction g({M, M}, vals);

        P3Instance in;
        in.seed = static_cast<std::uint64_t>(t);
        in.mu = c;
        for (auto* axis : {&a, &b}) {
            double m2 = 0.0, m3 = 0.0;
            for (double v : *axis) {
                m2 += v * v;
                m3 += v * v * v;
            }
            in.tau2.push_back(m2 / M);
            in.gamma.push_back(m3 / M);
        }
        const VarSubset u = VarSubset::full(2);
        in.brute = grid_moment_raw(g, u, 3) - std::pow(g.mean(), 3);
        for (std::size_t j = 0; j < 2; ++j) {
            in.coef1 += in.mu * in.tau2[j] + in.gamma[j];
            in.coef3 += 3.0 * in.mu * in.tau2[j] + in.gamma[j];
        }
        const double scale = std::max(1.0, std::abs(in.brute));
        in.discriminating = std::abs(in.coef1 - in.coef3) > 1e-8 * scale;
        const bool m1 = std::abs(in.brute - in.coef1) <= 1e-12 * scale;
        const bool m3 = std::abs(in.brute - in.coef3) <= 1e-12 * scale;
        if (in.discriminating) in.winner = m3 ? 3 : (m1 ? 1 : 0);
        rep.instances.push_back(in);
    }
    int winner = -1;
    bool ok = true;
    for (const auto& in : rep.instances) {
        if (!in.discriminating) continue;
        if (in.winner == 0 || (winner >= 0 && in.winner != winner)) ok = false;
        if (winner < 0) winner = in.winner;
    }
    rep.winning_constant = winner < 0 ? 0 : winner;
    rep.consistent = ok && winner > 0;
    return rep;
}

}  // namespace hosi
