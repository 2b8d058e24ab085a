#pragma once

// Domain types shared by every estimator: points on the half-open unit cube,
// variable subsets as bitmasks, the glue operation and the black-box
// function contract.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <memory>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace hosi {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using Point = std::vector<double>;

inline constexpr int kMaxDim = 63;
inline constexpr int kMaxLatticeDim = 20;

/// Maps a coordinate into [0,1) by taking its fractional part; an exact 1.0
/// (or anything that rounds to it) becomes 0.0.
inline double wrap_unit(double v) noexcept {
    double w = v - std::floor(v);
    return w >= 1.0 ? 0.0 : w;
}

inline std::string format_point(std::span<const double> x) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (i) os << ", ";
        os << x[i];
    }
    os << ')';
    return os.str();
}

/// Raised when a function returns NaN or an infinity.  Carries the point.
class NonFiniteValue : public Error {
public:
    NonFiniteValue(Point where, double value)
        : Error("non-finite function value " + std::to_string(value) + " at " +
                format_point(where)),
          point_(std::move(where)), value_(value) {}
    const Point& point() const noexcept { return point_; }
    double value() const noexcept { return value_; }

private:
    Point point_;
    double value_;
};

// ---------------------------------------------------------------------------
// VarSubset
// ---------------------------------------------------------------------------

/// Subset u of {1..d}; bit j-1 of the mask stands for variable j.
class VarSubset {
public:
    using Mask = std::uint64_t;

    constexpr VarSubset() = default;

    VarSubset(int dim, Mask mask) : mask_(mask), dim_(dim) {
        if (dim < 1 || dim > kMaxDim)
            throw Error("dimension " + std::to_string(dim) + " outside [1, 63]");
        if (mask & ~full_mask(dim))
            throw Error("subset mask has bits beyond dimension " + std::to_string(dim));
    }

    /// Builds a subset from 1-based variable indices.
    static VarSubset of(int dim, std::initializer_list<int> vars) {
        return of(dim, std::span<const int>(vars.begin(), vars.size()));
    }
    static VarSubset of(int dim, std::span<const int> vars) {
        Mask m = 0;
        for (int v : vars) {
            if (v < 1 || v > dim)
                throw Error("variable index " + std::to_string(v) + " outside 1.." +
                            std::to_string(dim));
            m |= Mask{1} << (v - 1);
        }
        return VarSubset(dim, m);
    }
    static VarSubset empty(int dim) { return VarSubset(dim, 0); }
    static VarSubset full(int dim) { return VarSubset(dim, full_mask(dim)); }

    static constexpr Mask full_mask(int dim) noexcept {
        return dim >= 64 ? ~Mask{0} : ((Mask{1} << dim) - 1);
    }

    constexpr Mask mask() const noexcept { return mask_; }
    constexpr int dim() const noexcept { return dim_; }
    int size() const noexcept { return std::popcount(mask_); }
    bool is_empty() const noexcept { return mask_ == 0; }
    bool is_full() const noexcept { return mask_ == full_mask(dim_); }

    /// 1-based membership test.
    bool contains(int var) const noexcept {
        return var >= 1 && var <= dim_ && ((mask_ >> (var - 1)) & 1u);
    }
    bool subset_of(const VarSubset& v) const noexcept { return (mask_ & ~v.mask_) == 0; }
    bool proper_subset_of(const VarSubset& v) const noexcept {
        return subset_of(v) && mask_ != v.mask_;
    }

    /// 1-based member indices in ascending order.
    std::vector<int> members() const {
        std::vector<int> out;
        for (int j = 0; j < dim_; ++j)
            if ((mask_ >> j) & 1u) out.push_back(j + 1);
        return out;
    }

    friend bool operator==(const VarSubset&, const VarSubset&) = default;

    /// "{1,3}"; the empty set prints as "{}".
    std::string to_string() const {
        std::string s = "{";
        bool first = true;
        for (int v : members()) {
            if (!first) s += ',';
            s += std::to_string(v);
            first = false;
        }
        return s + "}";
    }

private:
    Mask mask_ = 0;
    int dim_ = 0;
};

inline void require_same_dim(const VarSubset& a, const VarSubset& b) {
    if (a.dim() != b.dim())
        throw Error("subset dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
}

inline VarSubset complement(const VarSubset& u) {
    return VarSubset(u.dim(), ~u.mask() & VarSubset::full_mask(u.dim()));
}
inline VarSubset set_union(const VarSubset& a, const VarSubset& b) {
    require_same_dim(a, b);
    return VarSubset(a.dim(), a.mask() | b.mask());
}
inline VarSubset set_intersection(const VarSubset& a, const VarSubset& b) {
    require_same_dim(a, b);
    return VarSubset(a.dim(), a.mask() & b.mask());
}
inline VarSubset set_difference(const VarSubset& a, const VarSubset& b) {
    require_same_dim(a, b);
    return VarSubset(a.dim(), a.mask() & ~b.mask());
}

enum class SubsetFilter { all, nonempty, singletons, up_to_size };

/// Subsets of {1..d} in ascending mask order.  `max_size` is only read for
/// SubsetFilter::up_to_size.
inline std::vector<VarSubset> enumerate_subsets(int dim, SubsetFilter filter, int max_size = 0) {
    if (dim < 1 || dim > kMaxDim)
        throw Error("dimension " + std::to_string(dim) + " outside [1, 63]");
    std::vector<VarSubset> out;
    if (filter == SubsetFilter::singletons) {
        for (int j = 0; j < dim; ++j) out.emplace_back(dim, VarSubset::Mask{1} << j);
        return out;
    }
    if (filter == SubsetFilter::up_to_size) {
        if (max_size < 0) throw Error("subset size bound must be nonnegative");
        // Sizes up to 2 are polynomial in d; anything larger walks the lattice.
        if (max_size > 2 && dim > kMaxLatticeDim)
            throw Error("enumerating subsets of size up to " + std::to_string(max_size) +
                        " needs d <= 20 (got d=" + std::to_string(dim) +
                        "); list the subsets explicitly instead");
        if (max_size <= 2) {
            std::vector<VarSubset::Mask> masks;
            if (max_size >= 0) masks.push_back(0);
            for (int i = 0; i < dim && max_size >= 1; ++i) {
                masks.push_back(VarSubset::Mask{1} << i);
                for (int j = 0; j < i && max_size >= 2; ++j)
                    masks.push_back((VarSubset::Mask{1} << i) | (VarSubset::Mask{1} << j));
            }
            std::sort(masks.begin(), masks.end());
            for (auto m : masks) out.emplace_back(dim, m);
            return out;
        }
    } else if (dim > kMaxLatticeDim) {
        throw Error("enumerating all subsets needs d <= 20 (got d=" + std::to_string(dim) +
                    "); use singletons, pairs or an explicit subset list");
    }
    const VarSubset::Mask end = VarSubset::Mask{1} << dim;
    for (VarSubset::Mask m = 0; m < end; ++m) {
        if (filter == SubsetFilter::nonempty && m == 0) continue;
        if (filter == SubsetFilter::up_to_size && std::popcount(m) > max_size) continue;
        out.emplace_back(dim, m);
    }
    return out;
}

// ---------------------------------------------------------------------------
// glue
// ---------------------------------------------------------------------------

/// y_j = x_j for j in u, z_j otherwise, written into `out`.
inline void glue_into(std::span<const double> x, std::span<const double> z, const VarSubset& u,
                      std::span<double> out) {
    const auto d = static_cast<std::size_t>(u.dim());
    if (x.size() != d || z.size() != d || out.size() != d)
        throw Error("glue: dimension mismatch (x=" + std::to_string(x.size()) +
                    ", z=" + std::to_string(z.size()) + ", d=" + std::to_string(d) + ")");
    for (std::size_t j = 0; j < d; ++j) out[j] = ((u.mask() >> j) & 1u) ? x[j] : z[j];
}

inline Point glue(std::span<const double> x, std::span<const double> z, const VarSubset& u) {
    Point y(static_cast<std::size_t>(u.dim()));
    glue_into(x, z, u, y);
    return y;
}

// ---------------------------------------------------------------------------
// BlackBoxFunction
// ---------------------------------------------------------------------------

/// A real-valued function on [0,1)^d.  Evaluation must be deterministic and
/// safe to call concurrently.  Batch evaluation takes points packed row-wise.
class BlackBoxFunction {
public:
    using PointFn = std::function<double(std::span<const double>)>;
    using BatchFn = std::function<void(std::span<const double>, std::span<double>)>;

    BlackBoxFunction() = default;

    BlackBoxFunction(int dim, PointFn fn) : dim_(dim) {
        check_dim(dim);
        auto shared = std::make_shared<PointFn>(std::move(fn));
        point_ = [shared](std::span<const double> x) { return (*shared)(x); };
        batch_ = [shared, dim](std::span<const double> pts, std::span<double> vals) {
            const auto d = static_cast<std::size_t>(dim);
            for (std::size_t i = 0; i < vals.size(); ++i) vals[i] = (*shared)(pts.subspan(i * d, d));
        };
    }

    /// For evaluators that are cheaper per batch than per point (external processes).
    static BlackBoxFunction batched(int dim, BatchFn fn) {
        check_dim(dim);
        BlackBoxFunction f;
        f.dim_ = dim;
        auto shared = std::make_shared<BatchFn>(std::move(fn));
        f.batch_ = [shared](std::span<const double> pts, std::span<double> vals) {
            (*shared)(pts, vals);
        };
        f.point_ = [shared](std::span<const double> x) {
            double v = 0.0;
            (*shared)(x, std::span<double>(&v, 1));
            return v;
        };
        return f;
    }

    int dim() const noexcept { return dim_; }
    explicit operator bool() const noexcept { return static_cast<bool>(point_); }

    double operator()(std::span<const double> x) const {
        if (x.size() != static_cast<std::size_t>(dim_))
            throw Error("function of dimension " + std::to_string(dim_) + " called with " +
                        std::to_string(x.size()) + " coordinates");
        const double v = point_(x);
        if (!std::isfinite(v)) throw NonFiniteValue(Point(x.begin(), x.end()), v);
        return v;
    }
    double operator()(std::initializer_list<double> x) const {
        return (*this)(std::span<const double>(x.begin(), x.size()));
    }

    /// Evaluates vals.size() points stored contiguously in `points`; throws
    /// NonFiniteValue naming the first offending point.
    void evaluate_batch(std::span<const double> points, std::span<double> vals) const {
        const auto d = static_cast<std::size_t>(dim_);
        if (points.size() != vals.size() * d)
            throw Error("batch of " + std::to_string(points.size()) +
                        " coordinates does not match " + std::to_string(vals.size()) +
                        " points of dimension " + std::to_string(d));
        if (vals.empty()) return;
        batch_(points, vals);
        for (std::size_t i = 0; i < vals.size(); ++i)
            if (!std::isfinite(vals[i])) {
                auto p = points.subspan(i * d, d);
                throw NonFiniteValue(Point(p.begin(), p.end()), vals[i]);
            }
    }

private:
    static void check_dim(int dim) {
        if (dim < 1 || dim > kMaxDim)
            throw Error("function dimension " + std::to_string(dim) + " outside [1, 63]");
    }

    int dim_ = 0;
    PointFn point_;
    BatchFn batch_;
};

/// Mean, variance and the normalized third and fourth moments of one factor
/// h = mu + tau * g with  int g = 0, int g^2 = 1.
struct MomentDescriptor {
    double mu = 0.0;
    double tau2 = 0.0;
    double gamma = 0.0;  // int g^3
    double kappa = 0.0;  // int g^4

    double tau() const noexcept { return std::sqrt(tau2); }
};

}  // namespace hosi
