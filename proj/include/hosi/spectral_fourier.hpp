#pragma once

// Fourier side of the spectral indices: trigonometric polynomials as an
// exact coefficient-space oracle, the Dirichlet kernel, and the Fourier
// estimators (full, reduced and Dirichlet-weighted).

#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/cyclic_design.hpp"
#include "hosi/spectral.hpp"

namespace hosi {

using Frequency = std::vector<long long>;
using cplx = std::complex<double>;

/// Finite Fourier series sum_k c_k exp(2 pi i k.x) on [0,1)^d.
class TrigPolynomial {
public:
    explicit TrigPolynomial(int dim) : dim_(dim) {
        if (dim < 1 || dim > kMaxDim) throw Error("TrigPolynomial dimension outside [1, 63]");
    }

    int dim() const noexcept { return dim_; }
    const std::map<Frequency, cplx>& terms() const noexcept { return terms_; }

    TrigPolynomial& add(const Frequency& k, cplx c) {
        if (k.size() != static_cast<std::size_t>(dim_)) throw Error("frequency vector has wrong dimension");
        terms_[k] += c;
        return *this;
    }

    cplx coefficient(const Frequency& k) const {
        auto it = terms_.find(k);
        return it == terms_.end() ? cplx{} : it->second;
    }
    cplx mean() const { return coefficient(Frequency(static_cast<std::size_t>(dim_), 0)); }

    cplx evaluate(std::span<const double> x) const {
        if (x.size() != static_cast<std::size_t>(dim_)) throw Error("TrigPolynomial evaluated at wrong dimension");
        cplx s = 0.0;
        for (const auto& [k, c] : terms_) {
            double phase = 0.0;
            for (std::size_t j = 0; j < k.size(); ++j) phase += static_cast<double>(k[j]) * x[j];
            phase -= std::floor(phase);
            s += c * std::polar(1.0, 2.0 * std::numbers::pi * phase);
        }
        return s;
    }

    /// Largest |c(-k) - conj(c(k))|; zero for real-valued polynomials.
    double conjugate_asymmetry() const {
        double worst = 0.0;
        for (const auto& [k, c] : terms_) {
            Frequency neg(k.size());
            for (std::size_t j = 0; j < k.size(); ++j) neg[j] = -k[j];
            worst = std::max(worst, std::abs(coefficient(neg) - std::conj(c)));
        }
        return worst;
    }
    bool is_real(double tol = 1e-14) const { return conjugate_asymmetry() <= tol; }

    /// Real part as a black-box function.
    BlackBoxFunction as_function() const {
        TrigPolynomial copy = *this;
        return BlackBoxFunction(dim_, [copy](std::span<const double> x) { return copy.evaluate(x).real(); });
    }

    /// Terms whose frequency support is exactly u: the ANOVA part f_u.
    TrigPolynomial anova_part(const VarSubset& u) const {
        TrigPolynomial out(dim_);
        for (const auto& [k, c] : terms_)
            if (support(k) == u.mask()) out.terms_[k] = c;
        return out;
    }
    /// Terms whose frequency support lies inside u.
    TrigPolynomial restricted_to(const VarSubset& u) const {
        TrigPolynomial out(dim_);
        for (const auto& [k, c] : terms_)
            if ((support(k) & ~u.mask()) == 0) out.terms_[k] = c;
        return out;
    }

    static VarSubset::Mask support(const Frequency& k) {
        VarSubset::Mask m = 0;
        for (std::size_t j = 0; j < k.size(); ++j)
            if (k[j] != 0) m |= VarSubset::Mask{1} << j;
        return m;
    }

    /// exp(2 pi i k.x)
    static TrigPolynomial exponential(const Frequency& k) {
        TrigPolynomial t(static_cast<int>(k.size()));
        t.add(k, 1.0);
        return t;
    }

private:
    int dim_;
    std::map<Frequency, cplx> terms_;
};

/// D_N(x) e^{2 pi i m.x} as a polynomial: coefficient 1 on m + {-N..N}^d.
inline TrigPolynomial dirichlet_polynomial(int N, int dim, const Frequency& m = {}) {
    if (N < 0) throw Error("Dirichlet order N must be nonnegative");
    Frequency shift = m.empty() ? Frequency(static_cast<std::size_t>(dim), 0) : m;
    if (shift.size() != static_cast<std::size_t>(dim)) throw Error("modulation has wrong dimension");
    TrigPolynomial t(dim);
    Frequency k(static_cast<std::size_t>(dim), -N);
    for (;;) {
        Frequency shifted(k.size());
        for (std::size_t j = 0; j < k.size(); ++j) shifted[j] = k[j] + shift[j];
        t.add(shifted, 1.0);
        std::size_t j = 0;
        while (j < k.size() && k[j] == N) k[j++] = -N;
        if (j == k.size()) break;
        ++k[j];
    }
    return t;
}

/// sigma_p(f) = sum_k c(k)^ceil(p/2) c(-k)^floor(p/2).  For real f and even
/// p this is sum_k |c(k)|^p and the imaginary part vanishes.
inline cplx exact_sigma_p(const TrigPolynomial& poly, int p) {
    if (p < 1) throw Error("order p must be positive");
    cplx s = 0.0;
    for (const auto& [k, c] : poly.terms()) {
        Frequency neg(k.size());
        for (std::size_t j = 0; j < k.size(); ++j) neg[j] = -k[j];
        s += std::pow(c, (p + 1) / 2) * std::pow(poly.coefficient(neg), p / 2);
    }
    return s;
}

/// Exact ul-tau_u^[p] + mu^p as sum over u-supported frequencies.
inline cplx exact_ult_spectral_plus_mean(const TrigPolynomial& poly, const VarSubset& u, int p) {
    return exact_sigma_p(poly.restricted_to(u), p);
}

namespace detail {

/// Integral over the torus of prod_j phi_{k_j}(w_j) where the w_j are built
/// from cyclic differences on u and independent blocks off u.  Works from
/// the linear form in the integration variables: the integral is 1 when
/// every variable's total frequency vanishes, 0 otherwise.
inline bool cyclic_integral_nonzero(std::span<const Frequency* const> ks, VarSubset::Mask u) {
    const std::size_t p = ks.size();
    const std::size_t d = ks[0]->size();
    for (std::size_t c = 0; c < d; ++c) {
        if ((u >> c) & 1u) {
            // slot j uses (-1)^j (x_j - x_{j+}): +(-1)^j k_j on x_j and
            // -(-1)^j k_j on x_{j+}.
            std::vector<long long> coeff(p, 0);
            for (std::size_t j = 0; j < p; ++j) {
                const long long sgn = (j % 2 == 0) ? 1 : -1;
                coeff[j] += sgn * (*ks[j])[c];
                coeff[(j + 1) % p] -= sgn * (*ks[j])[c];
            }
            for (long long v : coeff)
                if (v != 0) return false;
        } else {
            for (std::size_t j = 0; j < p; ++j)
                if ((*ks[j])[c] != 0) return false;
        }
    }
    return true;
}

}  // namespace detail

/// Exact value of the u-restricted cyclic operator on polynomials
/// f_0..f_{p-1}, by expanding every tuple of terms.  With u the full set
/// this is <f_0, ..., f_{p-1}>_p.  Cost is the product of the term counts.
inline cplx exact_cyclic_operator(std::span<const TrigPolynomial> fs, const VarSubset& u) {
    if (fs.size() < 2) throw Error("the multilinear operator needs p >= 2 functions");
    const int d = fs[0].dim();
    double work = 1.0;
    for (const auto& f : fs) {
        if (f.dim() != d) throw Error("polynomials must share a dimension");
        work *= static_cast<double>(std::max<std::size_t>(f.terms().size(), 1));
    }
    if (u.dim() != d) throw Error("subset dimension does not match polynomial dimension");
    if (work > 5e7) throw Error("tuple expansion too large for the exact operator");

    const std::size_t p = fs.size();
    std::vector<std::map<Frequency, cplx>::const_iterator> it(p);
    for (std::size_t j = 0; j < p; ++j) {
        if (fs[j].terms().empty()) return 0.0;
        it[j] = fs[j].terms().begin();
    }
    std::vector<const Frequency*> ks(p);
    cplx total = 0.0;
    for (;;) {
        for (std::size_t j = 0; j < p; ++j) ks[j] = &it[j]->first;
        if (detail::cyclic_integral_nonzero(ks, u.mask())) {
            cplx prod = 1.0;
            for (std::size_t j = 0; j < p; ++j) prod *= it[j]->second;
            total += prod;
        }
        std::size_t j = 0;
        while (j < p) {
            if (++it[j] != fs[j].terms().end()) break;
            it[j] = fs[j].terms().begin();
            ++j;
        }
        if (j == p) break;
    }
    return total;
}

inline cplx exact_multilinear(std::span<const TrigPolynomial> fs) {
    return exact_cyclic_operator(fs, VarSubset::full(fs.empty() ? 1 : fs[0].dim()));
}

// ---------------------------------------------------------------------------
// Dirichlet kernel
// ---------------------------------------------------------------------------

inline constexpr double kDirichletSingularity = 1e-9;

/// One factor sin(2 pi (N+1/2) t) / sin(pi t) of D_N.
inline double dirichlet_factor(int N, double x) {
    if (N < 0) throw Error("Dirichlet order N must be nonnegative");
    if (N == 0) return 1.0;
    const double t = x - std::round(x);  // D_N is 1-periodic and even
    const double n2 = 2.0 * N + 1.0;
    if (t == 0.0) return n2;
    if (std::abs(std::sin(std::numbers::pi * t)) < kDirichletSingularity) {
        const double nn = static_cast<double>(N) * (N + 1);
        return n2 * (1.0 - (2.0 * std::numbers::pi * std::numbers::pi / 3.0) * nn * t * t);
    }
    return std::sin(2.0 * std::numbers::pi * (N + 0.5) * t) / std::sin(std::numbers::pi * t);
}

/// D_N(x) = prod_j sin(2 pi (N+1/2) x_j) / sin(pi x_j), with value 2N+1 per
/// factor at x_j in {0, 1}.
inline double dirichlet_kernel(int N, std::span<const double> x) {
    double out = 1.0;
    for (double xj : x) out *= dirichlet_factor(N, xj);
    return out;
}

/// Real part of D_N(x) exp(2 pi i m.x).
inline BlackBoxFunction modulated_dirichlet(int N, const Frequency& m) {
    const int d = static_cast<int>(m.size());
    return BlackBoxFunction(d, [N, m](std::span<const double> x) {
        double phase = 0.0;
        for (std::size_t j = 0; j < m.size(); ++j) phase += static_cast<double>(m[j]) * x[j];
        phase -= std::floor(phase);
        return dirichlet_kernel(N, x) * std::cos(2.0 * std::numbers::pi * phase);
    });
}

// ---------------------------------------------------------------------------
// Estimators
// ---------------------------------------------------------------------------

/// ul-tau_u^[p] via the pd-dimensional cyclic-difference integral.
inline SpectralEstimate estimate_ult_spectral(const BlackBoxFunction& f, const VarSubset& u, int p,
                                              const CyclicDesign& design, unsigned workers = 0) {
    if (design.synthesis() != Synthesis::fourier) throw Error("estimate_ult_spectral needs a Fourier design");
    if (design.form() != CyclicForm::full) throw Error("estimate_ult_spectral needs a full-form design");
    return estimate_ult_cyclic(f, u, p, design, workers);
}

/// Same estimand through the (p-1)d-dimensional change of variables.
inline SpectralEstimate estimate_ult_spectral_reduced(const BlackBoxFunction& f, const VarSubset& u, int p,
                                                      const CyclicDesign& design, unsigned workers = 0) {
    if (design.synthesis() != Synthesis::fourier) throw Error("estimate_ult_spectral_reduced needs a Fourier design");
    if (design.form() != CyclicForm::reduced) throw Error("estimate_ult_spectral_reduced needs a reduced-form design");
    return estimate_ult_cyclic(f, u, p, design, workers);
}

/// <f, ..., f, D_N e^{2 pi i m.x}>_p for odd p: estimates
/// sum_{k in {-N..N}^d} |f^(k+m)|^{p-1}.  Only the real part of the
/// modulated kernel enters, which leaves the estimand unchanged for real f.
inline SpectralEstimate estimate_weighted_spectral(const BlackBoxFunction& f, int p, int N, const Frequency& m,
                                                   const CyclicDesign& design, unsigned workers = 0) {
    if (p < 3 || p % 2 == 0) throw Error("weighted spectral measure needs odd p >= 3");
    if (N < 0) throw Error("Dirichlet order N must be nonnegative");
    if (m.size() != static_cast<std::size_t>(f.dim())) throw Error("modulation vector has wrong dimension");
    if (design.p() != p) throw Error("design order does not match p");
    if (design.synthesis() != Synthesis::fourier) throw Error("weighted spectral measure needs a Fourier design");
    if (!design.subset().is_full()) throw Error("weighted spectral measure needs a design over all variables");
    const BlackBoxFunction kernel = modulated_dirichlet(N, m);
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
    est.synthesis = Synthesis::fourier;
    est.seed = design.seed();
    est.dirichlet_n = N;
    est.modulation = m;
    return est;
}

/// Exact sum_{k in {-N..N}^d} |c(k+m)|^{p-1} from coefficients.
inline double exact_weighted_sum(const TrigPolynomial& poly, int p, int N, const Frequency& m) {
    double s = 0.0;
    for (const auto& [k, c] : poly.terms()) {
        bool inside = true;
        for (std::size_t j = 0; j < k.size(); ++j) inside = inside && std::llabs(k[j] - m[j]) <= N;
        if (inside) s += std::pow(std::abs(c), p - 1);
    }
    return s;
}

}  // namespace hosi
