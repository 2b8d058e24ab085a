#pragma once

// Seedable sampling for the Monte Carlo estimators.  Variates come from a
// Philox4x32-10 counter-based generator keyed by the seed, so replicate i of
// any design is reachable without generating replicates 0..i-1.

#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "hosi/core.hpp"

namespace hosi {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        for (int r = 0; r < 10; ++r) {
            ctr = round(ctr, key);
            key[0] += kW0;
            key[1] += kW1;
        }
        return ctr;
    }

private:
    static constexpr std::uint32_t kM0 = 0xD2511F53u;
    static constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kW0 = 0x9E3779B9u;
    static constexpr std::uint32_t kW1 = 0xBB67AE85u;

    static Counter round(const Counter& c, const Key& k) noexcept {
        const std::uint64_t p0 = std::uint64_t{kM0} * c[0];
        const std::uint64_t p1 = std::uint64_t{kM1} * c[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32), lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32), lo1 = static_cast<std::uint32_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// 53 random bits to a double in [0,1).
inline double bits_to_unit(std::uint64_t bits) noexcept {
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

/// Deterministic stream of U[0,1) variates indexed by (seed, stream_id).
/// Distinct stream ids use disjoint counter ranges under the same key.
class SampleStream {
public:
    SampleStream(std::uint64_t seed, std::uint64_t stream_id)
        : seed_(seed), stream_id_(stream_id),
          key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream_id() const noexcept { return stream_id_; }
    std::uint64_t position() const noexcept { return counter_ * 2 + (have_spare_ ? 1 : 0); }

    double next() noexcept {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const Philox4x32::Counter ctr{static_cast<std::uint32_t>(counter_),
                                      static_cast<std::uint32_t>(counter_ >> 32),
                                      static_cast<std::uint32_t>(stream_id_),
                                      static_cast<std::uint32_t>(stream_id_ >> 32)};
        ++counter_;
        const auto out = Philox4x32::block(ctr, key_);
        spare_ = bits_to_unit((std::uint64_t{out[2]} << 32) | out[3]);
        have_spare_ = true;
        return bits_to_unit((std::uint64_t{out[0]} << 32) | out[1]);
    }

    void fill(std::span<double> out) noexcept {
        for (double& v : out) v = next();
    }

private:
    std::uint64_t seed_;
    std::uint64_t stream_id_;
    Philox4x32::Key key_;
    std::uint64_t counter_ = 0;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

/// d consecutive variates from the stream.
inline Point uniform_point(SampleStream& stream, int d) {
    if (d < 1) throw Error("uniform_point: dimension must be positive");
    Point x(static_cast<std::size_t>(d));
    stream.fill(x);
    return x;
}

// ---------------------------------------------------------------------------
// Rank-1 lattice
// ---------------------------------------------------------------------------

/// Korobov generating vector (1, a, a^2, ...) mod n with a the integer
/// closest to n(sqrt(5)-1)/2 that is coprime to n.  For n < 3 the vector is
/// all ones.
inline std::vector<std::uint64_t> korobov_generator(std::uint64_t n, int d) {
    if (n == 0) throw Error("lattice size must be positive");
    if (d < 1) throw Error("lattice dimension must be positive");
    std::vector<std::uint64_t> g(static_cast<std::size_t>(d), 1);
    if (n < 3) return g;
    auto a = static_cast<std::uint64_t>(std::llround(static_cast<double>(n) * 0.6180339887498949));
    a = std::clamp<std::uint64_t>(a, 1, n - 1);
    for (std::uint64_t off = 0; off < n; ++off) {
        if (a + off < n && std::gcd(a + off, n) == 1) { a += off; break; }
        if (a > off && std::gcd(a - off, n) == 1) { a -= off; break; }
    }
    for (std::size_t j = 1; j < g.size(); ++j)
        g[j] = static_cast<std::uint64_t>((static_cast<unsigned __int128>(g[j - 1]) * a) % n);
    return g;
}

/// {index * g / n + shift}, coordinatewise.
inline Point lattice_point(std::uint64_t index, std::uint64_t n, std::span<const std::uint64_t> g,
                           std::span<const double> shift) {
    if (index >= n) throw Error("lattice index " + std::to_string(index) + " >= n=" + std::to_string(n));
    if (shift.size() != g.size()) throw Error("lattice shift has wrong dimension");
    Point x(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) {
        const auto num = static_cast<std::uint64_t>((static_cast<unsigned __int128>(index) * g[j]) % n);
        x[j] = wrap_unit(static_cast<double>(num) / static_cast<double>(n) + shift[j]);
    }
    return x;
}

inline Point lattice_point(std::uint64_t index, std::uint64_t n, int d, std::span<const double> shift) {
    const auto g = korobov_generator(n, d);
    return lattice_point(index, n, g, shift);
}

// ---------------------------------------------------------------------------
// UniformSource: replicate-indexed blocks of variates
// ---------------------------------------------------------------------------

enum class PointSet { monte_carlo, shifted_lattice };

/// Replicate i receives `width` variates that depend only on (seed, i).  The
/// Monte Carlo source draws them from stream i; the lattice source uses
/// point i of an n-point rank-1 lattice in dimension `width`, shifted by a
/// uniform vector drawn from the seed.
class UniformSource {
public:
    UniformSource() = default;

    UniformSource(PointSet kind, std::uint64_t seed, std::uint64_t n, std::size_t width)
        : kind_(kind), seed_(seed), n_(n), width_(width) {
        if (kind_ == PointSet::shifted_lattice) {
            generator_ = korobov_generator(n_, static_cast<int>(std::max<std::size_t>(width_, 1)));
            SampleStream s(splitmix64(seed_ ^ 0x5eed1a77ce5u), 0);
            shift_.resize(generator_.size());
            s.fill(shift_);
        }
    }

    PointSet kind() const noexcept { return kind_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t size() const noexcept { return n_; }
    std::size_t width() const noexcept { return width_; }

    void fill(std::uint64_t replicate, std::span<double> out) const {
        if (out.size() != width_) throw Error("UniformSource::fill: wrong block width");
        if (kind_ == PointSet::monte_carlo) {
            SampleStream s(seed_, replicate);
            s.fill(out);
            return;
        }
        for (std::size_t j = 0; j < width_; ++j) {
            const auto num = static_cast<std::uint64_t>(
                (static_cast<unsigned __int128>(replicate % n_) * generator_[j]) % n_);
            out[j] = wrap_unit(static_cast<double>(num) / static_cast<double>(n_) + shift_[j]);
        }
    }

private:
    PointSet kind_ = PointSet::monte_carlo;
    std::uint64_t seed_ = 0;
    std::uint64_t n_ = 0;
    std::size_t width_ = 0;
    std::vector<std::uint64_t> generator_;
    std::vector<double> shift_;
};

// ---------------------------------------------------------------------------
// Pick-freeze design
// ---------------------------------------------------------------------------

/// One replicate: the shared x_u block and p complement blocks z^(1..p).
/// Each z block is a full d-dimensional point so that f(z^(k)) can also be
/// evaluated.
struct PickFreezeReplicate {
    std::vector<double> x_u;  // |u| coordinates, ascending variable order
    std::vector<double> z;    // p * d, block k at [k*d, (k+1)*d)

    std::span<const double> z_block(int k, int d) const {
        return std::span<const double>(z).subspan(static_cast<std::size_t>(k * d),
                                                  static_cast<std::size_t>(d));
    }
};

/// Pick-freeze design for ul-tau_u^(p): n replicates, each with one shared
/// x_u and p independent complement blocks.  Replicates are generated on
/// demand from the seed, so the design is a pure function of
/// (seed, n, d, p, u, point set).
class PickFreezeDesign {
public:
    PickFreezeDesign(std::uint64_t seed, std::uint64_t n, int d, int p, VarSubset u,
                     PointSet points = PointSet::monte_carlo)
        : seed_(seed), n_(n), d_(d), p_(p), u_(u) {
        if (n < 1) throw Error("pick-freeze design needs n >= 1");
        if (p < 1) throw Error("pick-freeze design needs p >= 1");
        if (u.dim() != d) throw Error("subset dimension does not match design dimension");
        source_ = UniformSource(points, seed, n, width());
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t n() const noexcept { return n_; }
    int d() const noexcept { return d_; }
    int p() const noexcept { return p_; }
    const VarSubset& subset() const noexcept { return u_; }
    PointSet point_set() const noexcept { return source_.kind(); }

    /// Variates consumed per replicate: |u| + p*d.
    std::size_t width() const noexcept {
        return static_cast<std::size_t>(u_.size()) + static_cast<std::size_t>(p_ * d_);
    }

    void replicate(std::uint64_t i, PickFreezeReplicate& out) const {
        std::vector<double> buf(width());
        source_.fill(i, buf);
        const auto k = static_cast<std::size_t>(u_.size());
        out.x_u.assign(buf.begin(), buf.begin() + static_cast<std::ptrdiff_t>(k));
        out.z.assign(buf.begin() + static_cast<std::ptrdiff_t>(k), buf.end());
    }
    PickFreezeReplicate replicate(std::uint64_t i) const {
        PickFreezeReplicate r;
        replicate(i, r);
        return r;
    }

    /// Raw variates of replicate i, laid out as x_u then z blocks.
    void fill(std::uint64_t i, std::span<double> buf) const { source_.fill(i, buf); }

    /// Point x_u : z^(k)_{-u} written into out (length d).  `buf` is a
    /// replicate block from fill().
    void glued_point(std::span<const double> buf, int k, std::span<double> out) const {
        const auto nu = static_cast<std::size_t>(u_.size());
        const auto z = buf.subspan(nu + static_cast<std::size_t>(k * d_), static_cast<std::size_t>(d_));
        std::size_t next_u = 0;
        for (int j = 0; j < d_; ++j)
            out[static_cast<std::size_t>(j)] =
                ((u_.mask() >> j) & 1u) ? buf[next_u++] : z[static_cast<std::size_t>(j)];
    }
    /// The complement block z^(k) itself.
    std::span<const double> z_point(std::span<const double> buf, int k) const {
        const auto nu = static_cast<std::size_t>(u_.size());
        return buf.subspan(nu + static_cast<std::size_t>(k * d_), static_cast<std::size_t>(d_));
    }

private:
    std::uint64_t seed_;
    std::uint64_t n_;
    int d_;
    int p_;
    VarSubset u_;
    UniformSource source_;
};

inline PickFreezeDesign build_pickfreeze(std::uint64_t seed, std::uint64_t n, int d, int p,
                                         const VarSubset& u,
                                         PointSet points = PointSet::monte_carlo) {
    if (n < 1) throw Error("pick-freeze design needs n >= 1 replicates");
    if (p < 2) throw Error("pick-freeze design needs order p >= 2");
    return PickFreezeDesign(seed, n, d, p, u, points);
}

}  // namespace hosi
