#pragma once

// Point designs for the cyclic multilinear operator.  For each replicate the
// design yields p evaluation points w_0..w_{p-1}.  On the coordinates in u,
// w_j is built from cyclic differences of p independent blocks (full form)
// or from p-1 free blocks plus their alternating sum (reduced form); on the
// complement every w_j gets its own independent block.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hosi/core.hpp"
#include "hosi/sampling.hpp"
#include "hosi/walsh.hpp"

namespace hosi {

enum class CyclicForm { full, reduced };
enum class Synthesis { fourier, walsh };

inline const char* to_string(CyclicForm f) { return f == CyclicForm::full ? "full_pd" : "reduced_p_minus_1_d"; }
inline const char* to_string(Synthesis s) { return s == Synthesis::fourier ? "fourier" : "walsh"; }

/// {a - b} computed as (a - b) + 1 when negative; an exact 1.0 maps to 0.0.
inline double frac_diff(double a, double b) noexcept {
    double r = a - b;
    if (r < 0.0) r += 1.0;
    return r >= 1.0 ? 0.0 : r;
}

class CyclicDesign {
public:
    CyclicDesign(std::uint64_t seed, std::uint64_t n, int d, int p, VarSubset u,
                 CyclicForm form = CyclicForm::full, Synthesis synthesis = Synthesis::fourier, int base = 2,
                 PointSet points = PointSet::monte_carlo)
        : seed_(seed), n_(n), d_(d), p_(p), u_(u), form_(form), synthesis_(synthesis), codec_(base) {
        if (n < 2) throw Error("cyclic design needs n >= 2 replicates");
        if (p < 2) throw Error("cyclic design needs p >= 2");
        if (u.dim() != d) throw Error("subset dimension does not match design dimension");
        source_ = UniformSource(points, seed, n, width());
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t n() const noexcept { return n_; }
    int d() const noexcept { return d_; }
    int p() const noexcept { return p_; }
    const VarSubset& subset() const noexcept { return u_; }
    CyclicForm form() const noexcept { return form_; }
    Synthesis synthesis() const noexcept { return synthesis_; }
    int base() const noexcept { return codec_.base(); }

    /// Variates per replicate: p*d (full) or (p-1)|u| + p(d-|u|) (reduced).
    std::size_t width() const noexcept {
        const auto nu = static_cast<std::size_t>(u_.size());
        const auto nc = static_cast<std::size_t>(d_) - nu;
        const auto pp = static_cast<std::size_t>(p_);
        return form_ == CyclicForm::full ? pp * static_cast<std::size_t>(d_) : (pp - 1) * nu + pp * nc;
    }

    /// Writes the p evaluation points of replicate i into out (p*d values).
    /// `scratch` must hold width() values.
    void points(std::uint64_t i, std::span<double> scratch, std::span<double> out) const {
        source_.fill(i, scratch);
        const auto d = static_cast<std::size_t>(d_);
        const auto p = static_cast<std::size_t>(p_);
        const auto mask = u_.mask();
        if (form_ == CyclicForm::full) {
            // block j occupies scratch[j*d, (j+1)*d)
            for (std::size_t j = 0; j < p; ++j) {
                const std::size_t next = (j + 1) % p;
                for (std::size_t c = 0; c < d; ++c) {
                    const double own = scratch[j * d + c];
                    double v = own;
                    if ((mask >> c) & 1u) v = cyclic(j, own, scratch[next * d + c]);
                    out[j * d + c] = v;
                }
            }
            return;
        }
        // Reduced: blocks 0..p-2 are full d-vectors, then d-|u| complement
        // coordinates for the last slot.
        for (std::size_t j = 0; j + 1 < p; ++j)
            for (std::size_t c = 0; c < d; ++c) out[j * d + c] = scratch[j * d + c];
        std::size_t tail = (p - 1) * d;
        for (std::size_t c = 0; c < d; ++c) {
            if ((mask >> c) & 1u)
                out[(p - 1) * d + c] = alternating(scratch, c);
            else
                out[(p - 1) * d + c] = scratch[tail++];
        }
    }

private:
    /// (-1)^j (a - b) mod 1, or its digitwise analogue.
    double cyclic(std::size_t j, double a, double b) const {
        if (synthesis_ == Synthesis::fourier) return (j % 2 == 0) ? frac_diff(a, b) : frac_diff(b, a);
        return (j % 2 == 0) ? codec_.sub(a, b) : codec_.sub(b, a);
    }

    /// Last slot of the reduced form on coordinate c:
    /// (-1)^p (y_0 - y_1 + ... + (-1)^{p-2} y_{p-2}) mod 1, or digitwise.
    double alternating(std::span<const double> scratch, std::size_t c) const {
        const auto d = static_cast<std::size_t>(d_);
        const auto p = static_cast<std::size_t>(p_);
        if (synthesis_ == Synthesis::fourier) {
            double s = 0.0;
            for (std::size_t j = 0; j + 1 < p; ++j) s += (j % 2 == 0 ? 1.0 : -1.0) * scratch[j * d + c];
            if (p % 2 == 1) s = -s;
            return wrap_unit(s);
        }
        std::uint64_t s = codec_.encode(scratch[c]);
        for (std::size_t j = 1; j + 1 < p; ++j) {
            const std::uint64_t y = codec_.encode(scratch[j * d + c]);
            s = (j % 2 == 1) ? codec_.sub(s, y) : codec_.add(s, y);
        }
        if (p % 2 == 1) s = codec_.neg(s);
        return codec_.decode(s);
    }

    std::uint64_t seed_;
    std::uint64_t n_;
    int d_;
    int p_;
    VarSubset u_;
    CyclicForm form_;
    Synthesis synthesis_;
    DigitCodec codec_;
    UniformSource source_;
};

}  // namespace hosi
