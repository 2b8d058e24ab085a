#pragma once

// Closed-form indices for product, rectangle-indicator and additive test
// functions.

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/mobius.hpp"
#include "hosi/oracles/factors.hpp"

namespace hosi {

enum class IndexFamily { moment, fourier, walsh };

inline const char* to_string(IndexFamily f) {
    switch (f) {
        case IndexFamily::moment: return "moment";
        case IndexFamily::fourier: return "fourier";
        case IndexFamily::walsh: return "walsh";
    }
    return "?";
}

/// ul-tau_u (cumulative, mean power removed) and the Moebius component
/// sigma_u of one subset.
struct OracleValue {
    double ult = 0.0;
    double component = 0.0;
    std::string note;
};

namespace detail {

inline void check_oracle_args(int dim, const VarSubset& u, int p) {
    if (u.dim() != dim)
        throw Error("subset dimension " + std::to_string(u.dim()) + " does not match function dimension " +
                    std::to_string(dim));
    if (p < 2) throw Error("order p must be at least 2");
}

inline void require_even_spectral(IndexFamily family, int p) {
    if (family != IndexFamily::moment && p % 2 != 0)
        throw OracleUnavailable("spectral oracles are defined for even p only (odd p needs the weighted measure)");
}

/// ult_u + mu^p = prod_{j in u} inside_j * prod_{j not in u} outside_j and
/// sigma_u = prod_{j not in u} outside_j * prod_{j in u} (inside_j - outside_j).
inline OracleValue product_form(const std::vector<double>& inside, const std::vector<double>& outside,
                                const VarSubset& u) {
    double cum = 1.0, all_out = 1.0, comp = 1.0;
    for (std::size_t j = 0; j < inside.size(); ++j) {
        const bool in = u.contains(static_cast<int>(j) + 1);
        cum *= in ? inside[j] : outside[j];
        all_out *= outside[j];
        comp *= in ? inside[j] - outside[j] : outside[j];
    }
    if (u.is_empty()) return {0.0, 0.0, {}};
    return {cum - all_out, comp, {}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Product functions
// ---------------------------------------------------------------------------

/// f(x) = prod_j h_j(x_j).
struct ProductFunctionSpec {
    std::vector<Factor> factors;

    int dim() const noexcept { return static_cast<int>(factors.size()); }

    double mean() const {
        double m = 1.0;
        for (const auto& h : factors) m *= h.mean();
        return m;
    }

    BlackBoxFunction as_function() const {
        auto fs = factors;
        return BlackBoxFunction(dim(), [fs](std::span<const double> x) {
            double v = 1.0;
            for (std::size_t j = 0; j < fs.size(); ++j) v *= fs[j](x[j]);
            return v;
        });
    }

    static ProductFunctionSpec gfunction(const std::vector<double>& a) {
        ProductFunctionSpec s;
        for (double aj : a) s.factors.push_back(Factor::gfunction(aj));
        return s;
    }
};

/// Moment indices for p in {2, 3, 4} from (mu_j, tau_j, gamma_j, kappa_j):
/// int h^2 = mu^2 + tau^2, int h^3 = mu^3 + 3 mu tau^2 + gamma tau^3,
/// int h^4 = mu^4 + 6 mu^2 tau^2 + 4 mu gamma tau^3 + kappa tau^4.
inline OracleValue product_moment_indices(const ProductFunctionSpec& spec, const VarSubset& u, int p) {
    detail::check_oracle_args(spec.dim(), u, p);
    if (p > 4) throw OracleUnavailable("closed-form moment tables cover p in {2,3,4}; use product_moment_indices_general");
    std::vector<double> inside, outside;
    for (const auto& h : spec.factors) {
        const MomentDescriptor m = h.moments();
        const double t2 = m.tau2, t = m.tau(), mu = m.mu;
        double excess = t2;  // int h^p - mu^p
        if (p == 3) excess = t2 * (3.0 * mu + m.gamma * t);
        if (p == 4) excess = t2 * (6.0 * mu * mu + 4.0 * mu * m.gamma * t + m.kappa * t2);
        outside.push_back(std::pow(mu, p));
        inside.push_back(std::pow(mu, p) + excess);
    }
    // components straight from the table
    OracleValue v = detail::product_form(inside, outside, u);
    return v;
}

/// Any p >= 2 from exact power integrals.
inline OracleValue product_moment_indices_general(const ProductFunctionSpec& spec, const VarSubset& u, int p) {
    detail::check_oracle_args(spec.dim(), u, p);
    std::vector<double> inside, outside;
    for (const auto& h : spec.factors) {
        inside.push_back(h.power_integral(p));
        outside.push_back(std::pow(h.mean(), p));
    }
    return detail::product_form(inside, outside, u);
}

/// Spectral indices for even p: the u-supported coefficient sum factorizes
/// into prod_{j in u} S_p(h_j) * prod_{j not in u} |mu_j|^p.
inline OracleValue product_spectral_indices(const ProductFunctionSpec& spec, const VarSubset& u, int p,
                                            IndexFamily family, int base = 2) {
    detail::check_oracle_args(spec.dim(), u, p);
    if (family == IndexFamily::moment) return product_moment_indices_general(spec, u, p);
    detail::require_even_spectral(family, p);
    std::vector<double> inside, outside;
    for (std::size_t j = 0; j < spec.factors.size(); ++j) {
        const Factor& h = spec.factors[j];
        outside.push_back(std::pow(std::abs(h.mean()), p));
        if (!u.contains(static_cast<int>(j) + 1)) {
            inside.push_back(outside.back());
            continue;
        }
        if (family == IndexFamily::fourier) {
            inside.push_back(h.fourier_power_sum(p));
        } else {
            auto s = h.walsh_power_sum(p, base);
            if (!s) throw OracleUnavailable("no exact base-" + std::to_string(base) + " Walsh form for factor " + h.to_string());
            inside.push_back(*s);
        }
    }
    return detail::product_form(inside, outside, u);
}

inline OracleValue product_indices(const ProductFunctionSpec& spec, const VarSubset& u, int p, IndexFamily family,
                                   int base = 2) {
    if (family == IndexFamily::moment)
        return p <= 4 ? product_moment_indices(spec, u, p) : product_moment_indices_general(spec, u, p);
    return product_spectral_indices(spec, u, p, family, base);
}

// ---------------------------------------------------------------------------
// Rectangle indicator
// ---------------------------------------------------------------------------

/// Indicator of prod_j [offset_j, offset_j + eps_j) (mod 1).
struct RectangleSpec {
    std::vector<double> eps;
    std::vector<double> offset;  // empty means all zero

    int dim() const noexcept { return static_cast<int>(eps.size()); }
    double off(std::size_t j) const { return offset.empty() ? 0.0 : offset[j]; }

    ProductFunctionSpec as_product() const {
        ProductFunctionSpec s;
        for (std::size_t j = 0; j < eps.size(); ++j) s.factors.push_back(Factor::indicator(eps[j], off(j)));
        return s;
    }
    BlackBoxFunction as_function() const { return as_product().as_function(); }
};

/// Moment family: eps^p (prod_{j in u} eps_j^{-(p-1)} - 1) with
/// eps = prod eps_j.  Fourier family (even p): prod_{j in u} Q_p(eps_j)
/// prod_{j not in u} eps_j^p - eps^p with Q_p = eps^p + T_p(eps); the p = 4
/// path uses Q_4 = (2/3) eps^3 when eps < 1/2 and the series otherwise.
inline OracleValue rectangle_indices(const RectangleSpec& rect, const VarSubset& u, int p, IndexFamily family,
                                     int base = 2) {
    if (!rect.offset.empty() && rect.offset.size() != rect.eps.size())
        throw Error("rectangle offsets and widths differ in length");
    detail::check_oracle_args(rect.dim(), u, p);
    for (double e : rect.eps)
        if (!(e > 0.0 && e < 1.0)) throw Error("rectangle side must lie in (0, 1)");
    std::vector<double> inside, outside;
    std::string note;
    switch (family) {
        case IndexFamily::moment:
            for (double e : rect.eps) {
                inside.push_back(e);  // int 1^p
                outside.push_back(std::pow(e, p));
            }
            break;
        case IndexFamily::fourier:
            detail::require_even_spectral(family, p);
            // the offset only changes coefficient phases
            for (double e : rect.eps) {
                outside.push_back(std::pow(e, p));
                if (p == 4 && e < 0.5) {
                    inside.push_back((2.0 / 3.0) * e * e * e);
                } else {
                    if (p == 4) note = "eps >= 1/2: T_4 taken from the series";
                    inside.push_back(std::pow(e, p) + rect_fourier_tail(e, p).value);
                }
            }
            break;
        case IndexFamily::walsh:
            for (std::size_t j = 0; j < rect.eps.size(); ++j)
                if (rect.off(j) != 0.0) throw OracleUnavailable("Walsh measures depend on the offset; no oracle for shifted rectangles");
            return product_spectral_indices(rect.as_product(), u, p, family, base);
    }
    OracleValue v = detail::product_form(inside, outside, u);
    v.note = note;
    return v;
}

// ---------------------------------------------------------------------------
// Additive functions
// ---------------------------------------------------------------------------

/// f(x) = c + sum_j h_j(x_j).
struct AdditiveSpec {
    double constant = 0.0;
    std::vector<Factor> terms;

    int dim() const noexcept { return static_cast<int>(terms.size()); }
    double mean() const {
        double m = constant;
        for (const auto& h : terms) m += h.mean();
        return m;
    }
    BlackBoxFunction as_function() const {
        auto hs = terms;
        const double c = constant;
        return BlackBoxFunction(dim(), [hs, c](std::span<const double> x) {
            double v = c;
            for (std::size_t j = 0; j < hs.size(); ++j) v += hs[j](x[j]);
            return v;
        });
    }
};

namespace detail {

/// E[(mu + sum_{j in u} (h_j - mu_j))^p] by convolving central-moment
/// sequences of the independent summands.
inline double additive_power_mean(const AdditiveSpec& spec, const VarSubset& u, int p) {
    std::vector<double> sum(static_cast<std::size_t>(p) + 1, 0.0);
    sum[0] = 1.0;
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        if (!u.contains(static_cast<int>(j) + 1)) continue;
        std::vector<double> cm(static_cast<std::size_t>(p) + 1);
        for (int k = 0; k <= p; ++k) cm[static_cast<std::size_t>(k)] = spec.terms[j].central_moment(k);
        cm[1] = 0.0;
        std::vector<double> next(sum.size(), 0.0);
        for (int k = 0; k <= p; ++k)
            for (int i = 0; i <= k; ++i)
                next[static_cast<std::size_t>(k)] += binomial(k, i) * sum[static_cast<std::size_t>(i)] * cm[static_cast<std::size_t>(k - i)];
        sum = std::move(next);
    }
    const double mu = spec.mean();
    double out = 0.0;
    for (int k = 0; k <= p; ++k) out += binomial(p, k) * std::pow(mu, p - k) * sum[static_cast<std::size_t>(k)];
    return out;
}

}  // namespace detail

/// Moment family: ult_u + mu^p = E[(mu + sum_{j in u} h~_j)^p], with the
/// component obtained by Moebius inversion over the subsets of u.
/// Spectral families: only singleton components are nonzero,
/// sigma_{j} = S_p(h_j) - |mu_j|^p.
inline OracleValue additive_indices(const AdditiveSpec& spec, const VarSubset& u, int p, IndexFamily family,
                                    int base = 2) {
    detail::check_oracle_args(spec.dim(), u, p);
    if (u.is_empty()) return {};
    if (family == IndexFamily::moment) {
        const double mup = std::pow(spec.mean(), p);
        SubsetMap cum(spec.dim());
        for (VarSubset::Mask s = u.mask();; s = (s - 1) & u.mask()) {
            const VarSubset v(spec.dim(), s);
            cum.set(v, s == 0 ? 0.0 : detail::additive_power_mean(spec, v, p) - mup);
            if (s == 0) break;
        }
        const SubsetMap comp = moebius_transform(cum);
        return {cum.at(u), comp.at(u), {}};
    }
    detail::require_even_spectral(family, p);
    OracleValue v;
    for (std::size_t j = 0; j < spec.terms.size(); ++j) {
        if (!u.contains(static_cast<int>(j) + 1)) continue;
        const Factor& h = spec.terms[j];
        double s;
        if (family == IndexFamily::fourier) {
            s = h.fourier_power_sum(p);
        } else {
            auto w = h.walsh_power_sum(p, base);
            if (!w) throw OracleUnavailable("no exact base-" + std::to_string(base) + " Walsh form for term " + h.to_string());
            s = *w;
        }
        const double contrib = s - std::pow(std::abs(h.mean()), p);
        v.ult += contrib;
        if (u.size() == 1) v.component = contrib;
    }
    return v;
}

}  // namespace hosi
