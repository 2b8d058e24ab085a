#pragma once

// One-dimensional factor families used to build product and additive test
// functions, with their exact power integrals, moments and coefficient
// power sums on both character systems.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/spectral_walsh.hpp"
#include "hosi/walsh.hpp"

namespace hosi {

/// Thrown when a closed form does not exist for the requested combination.
class OracleUnavailable : public Error {
public:
    using Error::Error;
};

namespace detail {

inline double binomial(int n, int k) {
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

/// Stop when 2 sum_{k>K} (pi k)^-p < this.
inline constexpr double kSeriesTailTarget = 1e-12;

/// sum_{j>=0} (j + a)^-s for s > 1, a > 0: direct sum up to J, then an
/// Euler-Maclaurin tail.  `bound` receives the magnitude of the first
/// omitted correction, which bounds the remainder for this completely
/// monotone summand.
inline double hurwitz_zeta(double s, double a, double* bound = nullptr) {
    if (!(s > 1.0) || !(a > 0.0)) throw Error("hurwitz_zeta needs s > 1 and a > 0");
    constexpr int J = 32;
    double head = 0.0;
    for (int j = J - 1; j >= 0; --j) head += std::pow(j + a, -s);
    const double x = J + a;
    // g^(n)(x) = (-1)^n (s)_n x^{-s-n}
    auto rising = [s](int n) {
        double r = 1.0;
        for (int i = 0; i < n; ++i) r *= s + i;
        return r;
    };
    static constexpr double B[] = {1.0 / 6, -1.0 / 30, 1.0 / 42, -1.0 / 30, 5.0 / 66};
    double tail = std::pow(x, 1.0 - s) / (s - 1.0) + 0.5 * std::pow(x, -s);
    double fact = 1.0;  // (2k)!
    for (int k = 1; k <= 4; ++k) {
        fact *= (2.0 * k - 1) * (2.0 * k);
        // - B_2k/(2k)! g^(2k-1)(x), g^(2k-1) = -(s)_{2k-1} x^{-s-2k+1}
        tail += B[k - 1] / fact * rising(2 * k - 1) * std::pow(x, -s - 2 * k + 1);
    }
    if (bound) {
        fact *= 9.0 * 10.0;
        *bound = std::abs(B[4]) / fact * rising(9) * std::pow(x, -s - 9);
    }
    return head + tail;
}

/// sum_{k = r mod M, k != 0} |phi(k)|^p with phi the transform of the
/// indicator of one cell of width 1/M:
/// |phi(k)| = |sin(pi k / M)| / (pi |k|), and the k = 0 term 1/M.
inline double cell_kernel_power_sum(std::size_t r, std::size_t M, int p) {
    if (r % M == 0) return std::pow(1.0 / static_cast<double>(M), p);
    const double a = static_cast<double>(r % M) / static_cast<double>(M);
    const double lattice = (hurwitz_zeta(p, a) + hurwitz_zeta(p, 1.0 - a)) * std::pow(static_cast<double>(M), -p);
    return std::pow(std::abs(std::sin(std::numbers::pi * a)) / std::numbers::pi, p) * lattice;
}

/// sum_k |c(k)|^p for a piecewise-constant function on M equal cells.
inline double table_fourier_power_sum(const std::vector<double>& cells, int p) {
    const std::size_t M = cells.size();
    double total = 0.0;
    for (std::size_t r = 0; r < M; ++r) {
        std::complex<double> V = 0.0;
        for (std::size_t c = 0; c < M; ++c)
            V += cells[c] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>((r * c) % M) / M);
        total += std::pow(std::abs(V), p) * cell_kernel_power_sum(r, M, p);
    }
    return total;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Rectangle series
// ---------------------------------------------------------------------------

struct SeriesResult {
    double value = 0.0;
    double tail_bound = 0.0;
    long long terms = 0;
};

/// 2 sum_{k=1}^{K} |sin(pi k eps) / (pi k)|^p, no tail.
inline double rect_fourier_series(double eps, int p, long long K) {
    double s = 0.0;
    for (long long k = K; k >= 1; --k) s += std::pow(std::abs(std::sin(std::numbers::pi * k * eps)) / (std::numbers::pi * k), p);
    return 2.0 * s;
}

/// T_p(eps) = 2 sum_{k>=1} |sin(pi k eps)/(pi k)|^p, truncated once the
/// tail bound 2 sum_{k>K} (pi k)^-p <= 2 pi^-p K^{1-p}/(p-1) drops below
/// 1e-12.  p = 2 uses the exact value eps - eps^2.
inline SeriesResult rect_fourier_tail(double eps, int p) {
    if (!(eps > 0.0 && eps < 1.0)) throw Error("rectangle side must lie in (0, 1)");
    if (p < 2) throw Error("order p must be at least 2");
    if (p == 2) return {eps - eps * eps, 0.0, 0};
    const double c = 2.0 * std::pow(std::numbers::pi, -p) / (p - 1);
    long long K = static_cast<long long>(std::ceil(std::pow(c / detail::kSeriesTailTarget, 1.0 / (p - 1))));
    K = std::max(K, 1LL);
    return {rect_fourier_series(eps, p, K), c * std::pow(static_cast<double>(K), 1 - p), K};
}

/// (2/3) eps^3 - eps^4, valid for 0 < eps <= 1/2.
inline double rect_T4_closed(double eps) { return (2.0 / 3.0) * eps * eps * eps - eps * eps * eps * eps; }

// ---------------------------------------------------------------------------
// Factor
// ---------------------------------------------------------------------------

enum class FactorKind { linear, cosine, indicator, gfunction, table };

/// h(x) on [0,1).  linear: mu + tau sqrt(12)(x - 1/2); cosine:
/// mu + tau sqrt(2) cos(2 pi x); indicator of [offset, offset + eps) mod 1;
/// g-function (|4x - 2| + a)/(1 + a); table: constant on equal cells.
class Factor {
public:
    static Factor linear(double mu, double tau) { return Factor(FactorKind::linear, mu, tau); }
    static Factor cosine(double mu, double tau) { return Factor(FactorKind::cosine, mu, tau); }
    static Factor indicator(double eps, double offset = 0.0) {
        if (!(eps > 0.0 && eps < 1.0)) throw Error("indicator width must lie in (0, 1), got " + std::to_string(eps));
        if (!(offset >= 0.0 && offset < 1.0)) throw Error("indicator offset must lie in [0, 1)");
        Factor f(FactorKind::indicator, 0.0, 0.0);
        f.eps_ = eps;
        f.offset_ = offset;
        return f;
    }
    static Factor gfunction(double a) {
        if (!(a >= 0.0)) throw Error("g-function parameter a must be nonnegative");
        Factor f(FactorKind::gfunction, 0.0, 0.0);
        f.a_ = a;
        f.check_normalization();
        return f;
    }
    static Factor table(std::vector<double> cells) {
        if (cells.empty()) throw Error("table factor needs at least one cell");
        for (double v : cells)
            if (!std::isfinite(v)) throw Error("table factor has a non-finite cell");
        Factor f(FactorKind::table, 0.0, 0.0);
        f.cells_ = std::move(cells);
        return f;
    }

    FactorKind kind() const noexcept { return kind_; }
    double eps() const noexcept { return eps_; }
    double offset() const noexcept { return offset_; }
    double a() const noexcept { return a_; }
    const std::vector<double>& cells() const noexcept { return cells_; }

    double operator()(double x) const {
        switch (kind_) {
            case FactorKind::linear: return mu_ + tau_ * std::sqrt(12.0) * (x - 0.5);
            case FactorKind::cosine: return mu_ + tau_ * std::numbers::sqrt2 * std::cos(2.0 * std::numbers::pi * x);
            case FactorKind::indicator: return wrap_unit(x - offset_) < eps_ ? 1.0 : 0.0;
            case FactorKind::gfunction: return (std::abs(4.0 * x - 2.0) + a_) / (1.0 + a_);
            case FactorKind::table: {
                auto c = static_cast<std::size_t>(x * static_cast<double>(cells_.size()));
                return cells_[std::min(c, cells_.size() - 1)];
            }
        }
        return 0.0;
    }

    /// Exact int_0^1 h(x)^p dx.
    double power_integral(int p) const {
        if (p < 0) throw Error("power must be nonnegative");
        switch (kind_) {
            case FactorKind::linear: {
                // s = sqrt(12)(x - 1/2) is uniform on [-sqrt3, sqrt3]: E s^k = 3^{k/2}/(k+1), k even
                double s = 0.0;
                for (int k = 0; k <= p; k += 2)
                    s += detail::binomial(p, k) * std::pow(mu_, p - k) * std::pow(tau_, k) * std::pow(3.0, k / 2) / (k + 1);
                return s;
            }
            case FactorKind::cosine: {
                // E cos^k = C(k, k/2) / 2^k, k even
                double s = 0.0;
                for (int k = 0; k <= p; k += 2)
                    s += detail::binomial(p, k) * std::pow(mu_, p - k) * std::pow(tau_ * std::numbers::sqrt2, k) *
                         detail::binomial(k, k / 2) / std::pow(2.0, k);
                return s;
            }
            case FactorKind::indicator: return p == 0 ? 1.0 : eps_;
            case FactorKind::gfunction: {
                // |4x - 2| is uniform on [0, 2]
                double s = 0.0;
                for (int k = 0; k <= p; ++k) s += detail::binomial(p, k) * std::pow(a_, p - k) * std::pow(2.0, k) / (k + 1);
                return s / std::pow(1.0 + a_, p);
            }
            case FactorKind::table: {
                double s = 0.0;
                for (double v : cells_) s += std::pow(v, p);
                return s / static_cast<double>(cells_.size());
            }
        }
        return 0.0;
    }

    double mean() const { return power_integral(1); }

    /// mu, tau^2 and the standardized third and fourth moments.
    MomentDescriptor moments() const {
        MomentDescriptor d;
        d.mu = mean();
        d.tau2 = std::max(0.0, central_moment(2));
        if (d.tau2 > 0.0) {
            const double tau = std::sqrt(d.tau2);
            d.gamma = central_moment(3) / (d.tau2 * tau);
            d.kappa = central_moment(4) / (d.tau2 * d.tau2);
        }
        return d;
    }

    /// E (h - mu)^k from the exact power integrals.
    double central_moment(int k) const {
        const double mu = mean();
        double s = 0.0;
        for (int i = 0; i <= k; ++i) s += detail::binomial(k, i) * power_integral(i) * std::pow(-mu, k - i);
        return s;
    }

    /// sum_{k in Z} |h^(k)|^p.
    double fourier_power_sum(int p) const {
        if (p < 2) throw Error("order p must be at least 2");
        const double pi = std::numbers::pi;
        switch (kind_) {
            case FactorKind::linear:
                // |h^(k)| = tau sqrt(12) / (2 pi |k|)
                return std::pow(std::abs(mu_), p) + 2.0 * std::pow(tau_ * std::sqrt(12.0) / (2.0 * pi), p) * std::riemann_zeta(p);
            case FactorKind::cosine: return std::pow(std::abs(mu_), p) + 2.0 * std::pow(std::abs(tau_) / std::numbers::sqrt2, p);
            case FactorKind::indicator: return std::pow(eps_, p) + rect_fourier_tail(eps_, p).value;
            case FactorKind::gfunction: {
                // h^(k) = 4 / (pi^2 k^2 (1 + a)) for odd k, 0 for even k != 0
                const double c = 4.0 / (pi * pi * (1.0 + a_));
                return 1.0 + 2.0 * std::pow(c, p) * (1.0 - std::pow(2.0, -2 * p)) * std::riemann_zeta(2 * p);
            }
            case FactorKind::table: return detail::table_fourier_power_sum(cells_, p);
        }
        return 0.0;
    }

    /// Cells of width b^-t carrying this factor exactly, if it is constant
    /// on some b-adic grid with at most b^t <= 2^20 cells.
    std::optional<std::vector<double>> adic_cells(int b) const {
        check_base(b);
        if (kind_ == FactorKind::table) {
            if (adic_levels(cells_.size(), b) < 0) return std::nullopt;
            return cells_;
        }
        if (kind_ != FactorKind::indicator || offset_ != 0.0) return std::nullopt;
        std::uint64_t m = 1;
        while (m <= (1u << 20)) {
            const double scaled = eps_ * static_cast<double>(m);
            if (scaled == std::floor(scaled)) {
                std::vector<double> cells(m, 0.0);
                for (std::uint64_t c = 0; c < static_cast<std::uint64_t>(scaled); ++c) cells[c] = 1.0;
                return cells;
            }
            m *= static_cast<std::uint64_t>(b);
        }
        return std::nullopt;
    }

    /// sum_k |h^_wal(k)|^p in base b, where a closed form or an exact grid
    /// representation exists.  p = 2 always reduces to int h^2.
    std::optional<double> walsh_power_sum(int p, int b) const {
        if (p < 2) throw Error("order p must be at least 2");
        check_base(b);
        if (kind_ == FactorKind::indicator && offset_ != 0.0) return std::nullopt;  // offset-sensitive
        if (p == 2) return power_integral(2);
        if (auto cells = adic_cells(b)) {
            const std::size_t shape[1] = {cells->size()};
            auto poly = WalshPolynomial::from_grid(*cells, shape, b);
            double s = 0.0;
            for (const auto& [k, c] : poly.terms()) s += std::pow(std::abs(c), p);
            return s;
        }
        if (kind_ == FactorKind::linear) {
            // coefficient of wal_{kappa b^i} in x is b^{-(i+1)} / (e^{-2 pi i kappa/b} - 1)
            double ring = 0.0;
            for (int kappa = 1; kappa < b; ++kappa)
                ring += std::pow(2.0 * std::sin(std::numbers::pi * kappa / b), -p);
            const double bp = std::pow(static_cast<double>(b), -p);
            return std::pow(std::abs(mu_), p) + std::pow(std::abs(tau_) * std::sqrt(12.0), p) * bp / (1.0 - bp) * ring;
        }
        if (kind_ == FactorKind::gfunction && b == 2) {
            // |4x - 2| = 1 + sum_{i>=1} 2^{-i} wal_{2^i + 1}(x)
            return 1.0 + std::pow(1.0 + a_, -p) / (std::pow(2.0, p) - 1.0);
        }
        return std::nullopt;
    }

    std::string to_string() const {
        auto num = [](double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        switch (kind_) {
            case FactorKind::linear: return "linear(" + num(mu_) + "," + num(tau_) + ")";
            case FactorKind::cosine: return "cosine(" + num(mu_) + "," + num(tau_) + ")";
            case FactorKind::indicator:
                return offset_ == 0.0 ? "indicator(" + num(eps_) + ")" : "indicator(" + num(eps_) + "," + num(offset_) + ")";
            case FactorKind::gfunction: return "g(" + num(a_) + ")";
            case FactorKind::table: {
                std::string s = "table(";
                for (std::size_t i = 0; i < cells_.size(); ++i) s += (i ? "," : "") + num(cells_[i]);
                return s + ")";
            }
        }
        return "?";
    }

private:
    Factor(FactorKind kind, double mu, double tau) : kind_(kind), mu_(mu), tau_(tau) {
        if (!std::isfinite(mu) || !std::isfinite(tau)) throw Error("factor parameters must be finite");
        if (kind == FactorKind::linear || kind == FactorKind::cosine) check_normalization();
    }

    /// Midpoint rule on 4096 cells is exact for these shapes (polynomial of
    /// degree <= 2 per piece with breakpoints on the grid, or a low trig
    /// polynomial); compare with the closed forms.
    void check_normalization() const {
        constexpr int N = 4096;
        double s1 = 0.0, s2 = 0.0;
        for (int i = 0; i < N; ++i) {
            const double v = (*this)((i + 0.5) / N);
            s1 += v;
            s2 += v * v;
        }
        s1 /= N;
        s2 /= N;
        const double mu = power_integral(1), m2 = power_integral(2);
        // midpoint rule undershoots int (c x)^2 by c^2 / (12 N^2)
        const double quad_err = kind_ == FactorKind::cosine ? 0.0 : (kind_ == FactorKind::linear ? 12.0 * tau_ * tau_ : 16.0 / ((1 + a_) * (1 + a_))) / (12.0 * N * N);
        if (std::abs(s1 - mu) > 1e-10 * std::max(1.0, std::abs(mu)) ||
            std::abs(s2 + quad_err - m2) > 1e-10 * std::max(1.0, m2))
            throw Error("factor normalization check failed for " + to_string());
    }

    FactorKind kind_;
    double mu_ = 0.0;
    double tau_ = 0.0;
    double eps_ = 0.0;
    double offset_ = 0.0;
    double a_ = 0.0;
    std::vector<double> cells_;
};

}  // namespace hosi
