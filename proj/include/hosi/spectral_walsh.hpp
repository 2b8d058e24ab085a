#pragma once

// Walsh side of the spectral indices: finite Walsh expansions as an exact
// oracle, exhaustive evaluation of the Walsh multilinear operator on b-adic
// grids, and the Walsh estimators.

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/cyclic_design.hpp"
#include "hosi/spectral.hpp"
#include "hosi/walsh.hpp"

namespace hosi {

/// Finite Walsh series sum_k c_k wal_k(x) in base b.
class WalshPolynomial {
public:
    WalshPolynomial(int dim, int base) : dim_(dim), base_(base) {
        if (dim < 1 || dim > kMaxDim) throw Error("WalshPolynomial dimension outside [1, 63]");
        check_base(base);
    }

    int dim() const noexcept { return dim_; }
    int base() const noexcept { return base_; }
    const std::map<WalshIndex, std::complex<double>>& terms() const noexcept { return terms_; }

    WalshPolynomial& add(const WalshIndex& k, std::complex<double> c) {
        if (k.size() != static_cast<std::size_t>(dim_)) throw Error("Walsh index has wrong dimension");
        terms_[k] += c;
        return *this;
    }
    std::complex<double> coefficient(const WalshIndex& k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? std::complex<double>{} : it->second;
    }
    std::complex<double> mean() const { return coefficient(WalshIndex(static_cast<std::size_t>(dim_), 0)); }

    std::complex<double> evaluate(std::span<const double> x) const {
        std::complex<double> s = 0.0;
        for (const auto& [k, c] : terms_) s += c * walsh_eval(k, x, base_);
        return s;
    }
    BlackBoxFunction as_function() const {
        WalshPolynomial copy = *this;
        return BlackBoxFunction(dim_, [copy](std::span<const double> x) { return copy.evaluate(x).real(); });
    }

    /// Terms with every nonzero index coordinate inside u.
    WalshPolynomial restricted_to(const VarSubset& u) const {
        WalshPolynomial out(dim_, base_);
        for (const auto& [k, c] : terms_) {
            bool inside = true;
            for (std::size_t j = 0; j < k.size(); ++j) inside = inside && (k[j] == 0 || u.contains(static_cast<int>(j) + 1));
            if (inside) out.terms_[k] = c;
        }
        return out;
    }

    /// Walsh expansion of a tensor-grid function whose axes have b-power
    /// cell counts (row-major, last axis fastest).  Zero coefficients are
    /// dropped below `drop`.
    static WalshPolynomial from_grid(std::span<const double> values, std::span<const std::size_t> shape, int base,
                                     double drop = 0.0) {
        auto coeffs = chrestenson_transform(values, shape, base);
        WalshPolynomial out(static_cast<int>(shape.size()), base);
        WalshIndex k(shape.size(), 0);
        for (std::size_t flat = 0; flat < coeffs.size(); ++flat) {
            std::size_t rem = flat;
            for (std::size_t a = shape.size(); a-- > 0;) {
                k[a] = rem % shape[a];
                rem /= shape[a];
            }
            if (std::abs(coeffs[flat]) > drop) out.terms_[k] = coeffs[flat];
        }
        return out;
    }

private:
    int dim_;
    int base_;
    std::map<WalshIndex, std::complex<double>> terms_;
};

/// sigma_{p,wal}(f) = sum_k c(k)^ceil(p/2) c(-k)^floor(p/2), with -k the
/// digitwise negation.  For real f and even p this is sum_k |c(k)|^p.
inline std::complex<double> exact_sigma_p_walsh(const WalshPolynomial& poly, int p) {
    if (p < 1) throw Error("order p must be positive");
    std::complex<double> s = 0.0;
    for (const auto& [k, c] : poly.terms())
        s += std::pow(c, (p + 1) / 2) * std::pow(poly.coefficient(index_neg(k, poly.base())), p / 2);
    return s;
}

// ---------------------------------------------------------------------------
// Exhaustive operator on b-adic grids
// ---------------------------------------------------------------------------

/// Complex function on [0,1)^d, constant on cells of width b^-t per axis.
/// Cell index on each axis is the t-digit integer floor(x b^t).
struct WalshGrid {
    int base = 2;
    int levels = 1;
    int dim = 1;
    std::vector<std::complex<double>> values;  // row-major, last axis fastest

    std::size_t cells_per_axis() const { return static_cast<std::size_t>(ipow(static_cast<std::uint64_t>(base), levels)); }
};

/// wal_k sampled on the grid with t levels; exact when every k_j < b^t.
inline WalshGrid walsh_grid(const WalshIndex& k, int base, int levels) {
    check_base(base);
    const auto m = ipow(static_cast<std::uint64_t>(base), levels);
    for (auto kj : k)
        if (kj >= m) throw Error("Walsh index exceeds the grid resolution");
    const DigitCodec codec(base, levels);
    WalshGrid g{base, levels, static_cast<int>(k.size()), {}};
    std::size_t total = 1;
    for (std::size_t j = 0; j < k.size(); ++j) total *= m;
    g.values.resize(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        std::int64_t s = 0;
        for (std::size_t a = k.size(); a-- > 0;) {
            const std::uint64_t c = rem % m;
            rem /= m;
            std::uint64_t kk = k[a];
            for (int i = 1; kk; ++i, kk /= static_cast<std::uint64_t>(base))
                s += static_cast<std::int64_t>((kk % static_cast<std::uint64_t>(base)) *
                                               static_cast<std::uint64_t>(codec.digit(c, i)));
        }
        g.values[flat] = root_of_unity(s, base);
    }
    return g;
}

/// Exact u-restricted Walsh operator: the integrand depends only on the
/// first t digits of every block, so the integral is the average over all
/// (b^{td})^p cell tuples.  Slot j evaluates f_j at (-1)^j (c_j - c_{j+})
/// digitwise on u and at c_j off u.
inline std::complex<double> exact_walsh_operator(std::span<const WalshGrid> fs, const VarSubset& u) {
    if (fs.size() < 2) throw Error("the multilinear operator needs p >= 2 functions");
    const WalshGrid& g0 = fs[0];
    for (const auto& g : fs)
        if (g.base != g0.base || g.levels != g0.levels || g.dim != g0.dim)
            throw Error("Walsh grids must share base, levels and dimension");
    if (u.dim() != g0.dim) throw Error("subset dimension does not match grid dimension");
    const std::size_t p = fs.size();
    const auto d = static_cast<std::size_t>(g0.dim);
    const std::size_t m = g0.cells_per_axis();
    std::size_t cells = 1;
    for (std::size_t a = 0; a < d; ++a) cells *= m;
    if (std::pow(static_cast<double>(cells), static_cast<double>(p)) > 5e7)
        throw Error("grid too large for exhaustive Walsh operator");
    const DigitCodec codec(g0.base, std::max(g0.levels, 1));

    std::vector<std::size_t> tuple(p, 0);
    std::vector<std::uint64_t> coords(p * d);
    std::complex<double> total = 0.0;
    for (;;) {
        for (std::size_t j = 0; j < p; ++j) {
            std::size_t rem = tuple[j];
            for (std::size_t a = d; a-- > 0;) {
                coords[j * d + a] = rem % m;
                rem /= m;
            }
        }
        std::complex<double> prod = 1.0;
        for (std::size_t j = 0; j < p; ++j) {
            const std::size_t next = (j + 1) % p;
            std::size_t flat = 0;
            for (std::size_t a = 0; a < d; ++a) {
                std::uint64_t c = coords[j * d + a];
                if (u.contains(static_cast<int>(a) + 1)) {
                    const std::uint64_t other = coords[next * d + a];
                    c = (j % 2 == 0) ? codec.sub(c, other) : codec.sub(other, c);
                }
                flat = flat * m + c;
            }
            prod *= fs[j].values[flat];
        }
        total += prod;
        std::size_t j = 0;
        while (j < p && ++tuple[j] == cells) tuple[j++] = 0;
        if (j == p) break;
    }
    return total / std::pow(static_cast<double>(cells), static_cast<double>(p));
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// ul-tau_{u,wal}^[p] from a Walsh design (full or reduced form).
inline SpectralEstimate estimate_ult_walsh(const BlackBoxFunction& f, const VarSubset& u, int p,
                                           const CyclicDesign& design, unsigned workers = 0) {
    if (design.synthesis() != Synthesis::walsh) throw Error("estimate_ult_walsh needs a Walsh design");
    return estimate_ult_cyclic(f, u, p, design, workers);
}

/// Real part of D_{m,wal}(x) wal_a(x), with D_{m,wal} the literal character
/// sum over {0..b^m-1}^d.
inline BlackBoxFunction modulated_walsh_dirichlet(int m, int base, const WalshIndex& a) {
    const int d = static_cast<int>(a.size());
    check_base(base);
    if (m < 0) throw Error("walsh_dirichlet: m must be nonnegative");
    return BlackBoxFunction(d, [m, base, a](std::span<const double> x) {
        const double dk = walsh_dirichlet(m, base, x);
        if (dk == 0.0) return 0.0;
        return dk * walsh_eval(a, x, base).real();
    });
}

/// <f, ..., f, D_{m,wal} wal_a>_{p,wal} for odd p: estimates
/// sum_{k in {0..b^m-1}^d} |f^_wal(k + a)|^{p-1}.
inline SpectralEstimate estimate_weighted_walsh(const BlackBoxFunction& f, int p, int m, const WalshIndex& a,
                                                const CyclicDesign& design, unsigned workers = 0) {
    if (p < 3 || p % 2 == 0) throw Error("weighted Walsh measure needs odd p >= 3");
    if (a.size() != static_cast<std::size_t>(f.dim())) throw Error("modulation index has wrong dimension");
    if (design.p() != p) throw Error("design order does not match p");
    if (design.synthesis() != Synthesis::walsh) throw Error("weighted Walsh measure needs a Walsh design");
    if (!design.subset().is_full()) throw Error("weighted Walsh measure needs a design over all variables");
    const BlackBoxFunction kernel = modulated_walsh_dirichlet(m, design.base(), a);
    std::vector<const BlackBoxFunction*> slots(static_cast<std::size_t>(p), &f);
    slots.back() = &kernel;
    auto s = detail::cyclic_summary(slots, design, workers);
    SpectralEstimate est;
    est.subset = design.subset();
    est.order = p;
    est.raw_value = est.value = s[0].mean();
    est.raw_std_error = est.std_error = s[0].std_error();
    est.n = design.n();
    est.variant = SpectralVariant::dirichlet_weighted;
    est.synthesis = Synthesis::walsh;
    est.base = design.base();
    est.seed = design.seed();
    est.dirichlet_n = m;
    est.modulation.assign(a.begin(), a.end());
    return est;
}

}  // namespace hosi
