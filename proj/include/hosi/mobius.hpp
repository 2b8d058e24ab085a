#pragma once

// Alternating-sum transforms on the subset lattice.  Cumulative indices
// ul-tau_u become per-subset components sigma_u via the Moebius transform,
// and back via the zeta transform.

#include <bit>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hosi/core.hpp"

namespace hosi {

/// Values indexed by subsets of {1..d}.  Stored sparsely; a family that
/// covers the whole lattice uses the dense O(d 2^d) transform.
class SubsetMap {
public:
    explicit SubsetMap(int dim) : dim_(dim) {
        if (dim < 1 || dim > kMaxDim) throw Error("SubsetMap dimension outside [1, 63]");
    }

    /// Every subset of {1..d}, all zero.
    static SubsetMap full_lattice(int dim) {
        if (dim > kMaxLatticeDim) throw Error("full lattice needs d <= 20");
        SubsetMap m(dim);
        for (VarSubset::Mask k = 0; k < (VarSubset::Mask{1} << dim); ++k) m.values_[k] = 0.0;
        return m;
    }

    int dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::map<VarSubset::Mask, double>& entries() const noexcept { return values_; }

    void set(const VarSubset& u, double v) {
        check(u);
        values_[u.mask()] = v;
    }
    bool contains(const VarSubset& u) const { return values_.count(u.mask()) != 0; }
    double at(const VarSubset& u) const {
        check(u);
        auto it = values_.find(u.mask());
        if (it == values_.end()) throw Error("subset " + u.to_string() + " not present in map");
        return it->second;
    }
    std::optional<double> get(const VarSubset& u) const {
        auto it = values_.find(u.mask());
        if (it == values_.end()) return std::nullopt;
        return it->second;
    }

    std::vector<VarSubset> subsets() const {
        std::vector<VarSubset> out;
        for (const auto& [mask, v] : values_) out.emplace_back(dim_, mask);
        return out;
    }

    bool is_full_lattice() const {
        return dim_ <= kMaxLatticeDim && values_.size() == (std::size_t{1} << dim_);
    }

    /// Subsets of stored entries that are missing from the map.
    std::vector<VarSubset> missing_for_closure() const {
        std::map<VarSubset::Mask, bool> missing;
        for (const auto& [mask, v] : values_) {
            for (VarSubset::Mask s = mask;; s = (s - 1) & mask) {
                if (!values_.count(s)) missing[s] = true;
                if (s == 0) break;
            }
        }
        std::vector<VarSubset> out;
        for (const auto& [mask, flag] : missing) out.emplace_back(dim_, mask);
        return out;
    }

private:
    void check(const VarSubset& u) const {
        if (u.dim() != dim_)
            throw Error("subset of dimension " + std::to_string(u.dim()) + " used with map of dimension " +
                        std::to_string(dim_));
    }

    int dim_;
    std::map<VarSubset::Mask, double> values_;
};

namespace detail {

inline void require_downward_closed(const SubsetMap& m) {
    auto missing = m.missing_for_closure();
    if (missing.empty()) return;
    std::string msg = "subset family is not downward closed; missing";
    for (std::size_t i = 0; i < missing.size() && i < 16; ++i) msg += " " + missing[i].to_string();
    if (missing.size() > 16) msg += " ... (" + std::to_string(missing.size()) + " total)";
    throw Error(msg);
}

/// out(u) = sum_{v subset u} sign^{|u-v|} in(v).
inline SubsetMap lattice_transform(const SubsetMap& in, double sign) {
    require_downward_closed(in);
    const int d = in.dim();
    SubsetMap out(d);
    if (in.is_full_lattice()) {
        const std::size_t n = std::size_t{1} << d;
        std::vector<double> a(n);
        for (const auto& [mask, v] : in.entries()) a[mask] = v;
        for (int bit = 0; bit < d; ++bit)
            for (std::size_t s = 0; s < n; ++s)
                if (s >> bit & 1u) a[s] += sign * a[s ^ (std::size_t{1} << bit)];
        for (std::size_t s = 0; s < n; ++s) out.set(VarSubset(d, s), a[s]);
        return out;
    }
    for (const auto& [mask, v] : in.entries()) {
        double acc = 0.0;
        const int size_u = std::popcount(mask);
        for (VarSubset::Mask s = mask;; s = (s - 1) & mask) {
            const int gap = size_u - std::popcount(s);
            acc += ((gap % 2 == 1) ? sign : 1.0) * in.entries().at(s);
            if (s == 0) break;
        }
        out.set(VarSubset(d, mask), acc);
    }
    return out;
}

}  // namespace detail

/// Components from cumulative values: out(u) = sum_{v subset u} (-1)^{|u-v|} cum(v).
inline SubsetMap moebius_transform(const SubsetMap& cum) { return detail::lattice_transform(cum, -1.0); }

/// Cumulative values from components: out(u) = sum_{v subset u} comp(v).
inline SubsetMap zeta_transform(const SubsetMap& components) { return detail::lattice_transform(components, 1.0); }

/// Standard errors of Moebius components, assuming the cumulative
/// estimates are independent: sqrt of the summed variances.  Approximate.
inline SubsetMap moebius_std_errors(const SubsetMap& cum_se) {
    detail::require_downward_closed(cum_se);
    SubsetMap var(cum_se.dim());
    for (const auto& [mask, se] : cum_se.entries()) var.set(VarSubset(cum_se.dim(), mask), se * se);
    SubsetMap summed = zeta_transform(var);
    SubsetMap out(cum_se.dim());
    for (const auto& [mask, v] : summed.entries()) out.set(VarSubset(cum_se.dim(), mask), std::sqrt(v));
    return out;
}

}  // namespace hosi
