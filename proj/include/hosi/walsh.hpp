#pragma once

// Base-b digit arithmetic on [0,1), Walsh functions and the Chrestenson
// (base-b Walsh) transform of functions that are constant on b-adic cells.

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "hosi/core.hpp"

namespace hosi {

inline constexpr int kMaxWalshBase = 64;

inline void check_base(int b) {
    if (b < 2 || b > kMaxWalshBase)
        throw Error("Walsh base " + std::to_string(b) + " outside [2, " + std::to_string(kMaxWalshBase) + "]");
}

/// ceil(52 / log2 b): enough base-b digits to exhaust a double mantissa.
inline int default_precision(int b) {
    check_base(b);
    int t = 0;
    long double scale = 1.0L;
    while (scale < 0x1.0p52L) {
        scale *= b;
        ++t;
    }
    return t;
}

inline std::uint64_t ipow(std::uint64_t b, int e) {
    std::uint64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

/// Fixed-precision base-b expansion x = sum_i digits[i] b^-(i+1).
struct DigitVector {
    int base = 2;
    int precision = 0;
    std::array<std::uint8_t, 64> digits{};

    friend bool operator==(const DigitVector&, const DigitVector&) = default;
};

/// Encodes [0,1) coordinates as the integer floor(x * b^t), whose base-b
/// digits are the first t digits of x.  Conversion truncates.
class DigitCodec {
public:
    explicit DigitCodec(int base) : DigitCodec(base, default_precision(base)) {}
    DigitCodec(int base, int precision) : base_(base), t_(precision) {
        check_base(base);
        if (precision < 1 || precision > 64) throw Error("digit precision outside [1, 64]");
        long double s = 1.0L;
        for (int i = 0; i < precision; ++i) s *= base;
        if (s > 0x1.0p63L) throw Error("b^t exceeds 63 bits");
        scale_ = ipow(static_cast<std::uint64_t>(base), precision);
        pow_.resize(static_cast<std::size_t>(precision) + 1);
        pow_[0] = 1;
        for (int i = 1; i <= precision; ++i) pow_[static_cast<std::size_t>(i)] = pow_[static_cast<std::size_t>(i - 1)] * static_cast<std::uint64_t>(base);
    }

    int base() const noexcept { return base_; }
    int precision() const noexcept { return t_; }
    std::uint64_t scale() const noexcept { return scale_; }

    std::uint64_t encode(double x) const {
        if (!(x >= 0.0 && x < 1.0)) x = wrap_unit(x);
        if (x == 0.0) return 0;
        int e = 0;
        const double m = std::frexp(x, &e);  // x = m 2^e, m in [0.5, 1)
        const auto mant = static_cast<std::uint64_t>(std::ldexp(m, 53));
        const int shift = 53 - e;
        if (shift >= 128) return 0;
        const unsigned __int128 prod = static_cast<unsigned __int128>(mant) * scale_;
        return static_cast<std::uint64_t>(prod >> shift);
    }

    double decode(std::uint64_t n) const {
        const long double v = static_cast<long double>(n) / static_cast<long double>(scale_);
        double out = static_cast<double>(v);
        if (out >= 1.0) out = std::nextafter(1.0, 0.0);
        return out;
    }

    /// Digit i (1-based, most significant first) of an encoded value.
    int digit(std::uint64_t n, int i) const {
        return static_cast<int>((n / pow_[static_cast<std::size_t>(t_ - i)]) % static_cast<std::uint64_t>(base_));
    }

    std::uint64_t add(std::uint64_t x, std::uint64_t y) const { return combine(x, y, +1); }
    std::uint64_t sub(std::uint64_t x, std::uint64_t y) const { return combine(x, y, -1); }
    std::uint64_t neg(std::uint64_t x) const { return combine(0, x, -1); }

    double add(double x, double y) const { return decode(add(encode(x), encode(y))); }
    double sub(double x, double y) const { return decode(sub(encode(x), encode(y))); }
    double neg(double x) const { return decode(neg(encode(x))); }

    DigitVector to_digits(double x) const {
        DigitVector dv;
        dv.base = base_;
        dv.precision = t_;
        const std::uint64_t n = encode(x);
        for (int i = 1; i <= t_; ++i) dv.digits[static_cast<std::size_t>(i - 1)] = static_cast<std::uint8_t>(digit(n, i));
        return dv;
    }

private:
    std::uint64_t combine(std::uint64_t x, std::uint64_t y, int sign) const {
        if (base_ == 2) return x ^ y;
        const auto b = static_cast<std::uint64_t>(base_);
        std::uint64_t out = 0, place = 1;
        for (int i = 0; i < t_; ++i) {
            const std::uint64_t xd = x % b, yd = y % b;
            x /= b;
            y /= b;
            const std::uint64_t zd = sign > 0 ? (xd + yd) % b : (xd + b - yd) % b;
            out += zd * place;
            place *= b;
        }
        return out;
    }

    int base_;
    int t_;
    std::uint64_t scale_ = 1;
    std::vector<std::uint64_t> pow_;
};

inline DigitVector to_digits(double x, int base, int precision = 0) {
    return DigitCodec(base, precision ? precision : default_precision(base)).to_digits(x);
}

inline double to_real(const DigitVector& v) {
    long double s = 0.0L, scale = 1.0L;
    for (int i = 0; i < v.precision; ++i) {
        scale /= v.base;
        s += v.digits[static_cast<std::size_t>(i)] * scale;
    }
    double out = static_cast<double>(s);
    return out >= 1.0 ? std::nextafter(1.0, 0.0) : out;
}

namespace detail {
inline DigitVector digitwise(const DigitVector& x, const DigitVector& y, int sign) {
    if (x.base != y.base) throw Error("digit arithmetic on different bases " + std::to_string(x.base) + " and " + std::to_string(y.base));
    if (x.precision != y.precision) throw Error("digit arithmetic on different precisions");
    DigitVector z = x;
    for (int i = 0; i < x.precision; ++i) {
        const auto k = static_cast<std::size_t>(i);
        const int s = sign > 0 ? x.digits[k] + y.digits[k] : x.digits[k] - y.digits[k] + x.base;
        z.digits[k] = static_cast<std::uint8_t>(s % x.base);
    }
    return z;
}
}  // namespace detail

/// x (+) y: digitwise addition mod b, no carries.
inline DigitVector digit_add(const DigitVector& x, const DigitVector& y) { return detail::digitwise(x, y, +1); }
/// x (-) y: digitwise subtraction mod b, no carries.
inline DigitVector digit_sub(const DigitVector& x, const DigitVector& y) { return detail::digitwise(x, y, -1); }
inline DigitVector digit_neg(const DigitVector& x) {
    DigitVector zero = x;
    zero.digits.fill(0);
    return digit_sub(zero, x);
}

// ---------------------------------------------------------------------------
// Walsh indices and functions
// ---------------------------------------------------------------------------

/// Digitwise operations on nonnegative integer indices k = sum kappa_i b^i.
inline std::uint64_t index_combine(std::uint64_t k, std::uint64_t l, int b, int sign) {
    const auto bb = static_cast<std::uint64_t>(b);
    std::uint64_t out = 0, place = 1;
    while (k || l) {
        const std::uint64_t kd = k % bb, ld = l % bb;
        k /= bb;
        l /= bb;
        out += (sign > 0 ? (kd + ld) % bb : (kd + bb - ld) % bb) * place;
        place *= bb;
    }
    return out;
}
inline std::uint64_t index_add(std::uint64_t k, std::uint64_t l, int b) { return index_combine(k, l, b, +1); }
inline std::uint64_t index_sub(std::uint64_t k, std::uint64_t l, int b) { return index_combine(k, l, b, -1); }
inline std::uint64_t index_neg(std::uint64_t k, int b) { return index_combine(0, k, b, -1); }

using WalshIndex = std::vector<std::uint64_t>;

inline WalshIndex index_neg(const WalshIndex& k, int b) {
    WalshIndex out(k.size());
    for (std::size_t j = 0; j < k.size(); ++j) out[j] = index_neg(k[j], b);
    return out;
}

/// exp(2 pi i s / b) for integer s.
inline std::complex<double> root_of_unity(std::int64_t s, int b) {
    const std::int64_t r = ((s % b) + b) % b;
    if (r == 0) return {1.0, 0.0};
    if (2 * r == b) return {-1.0, 0.0};
    const double a = 2.0 * std::numbers::pi * static_cast<double>(r) / b;
    return {std::cos(a), std::sin(a)};
}

/// Exponent sum_i x_{i+1} kappa_i (mod b) of the one-dimensional Walsh
/// function wal_k at x.
inline std::int64_t walsh_phase(std::uint64_t k, double x, const DigitCodec& codec) {
    const std::uint64_t n = codec.encode(x);
    const auto b = static_cast<std::uint64_t>(codec.base());
    std::int64_t s = 0;
    for (int i = 1; k; ++i, k /= b) {
        if (i > codec.precision()) break;
        s += static_cast<std::int64_t>((k % b) * static_cast<std::uint64_t>(codec.digit(n, i)));
    }
    return s % codec.base();
}

inline std::complex<double> walsh_eval(std::uint64_t k, double x, int b) {
    if (!(x >= 0.0 && x < 1.0)) throw Error("walsh_eval: coordinate outside [0,1)");
    const DigitCodec codec(b);
    return root_of_unity(walsh_phase(k, x, codec), b);
}

/// wal_k(x) = prod_j wal_{k_j}(x_j).
inline std::complex<double> walsh_eval(std::span<const std::uint64_t> k, std::span<const double> x, int b) {
    if (k.size() != x.size()) throw Error("walsh_eval: index and point dimensions differ");
    const DigitCodec codec(b);
    std::int64_t s = 0;
    for (std::size_t j = 0; j < k.size(); ++j) {
        if (!(x[j] >= 0.0 && x[j] < 1.0)) throw Error("walsh_eval: coordinate outside [0,1)");
        s += walsh_phase(k[j], x[j], codec);
    }
    return root_of_unity(s, b);
}

/// Literal sum of wal_k(x) over k in {0..b^m-1}^d.  Equals b^{md} on
/// prod_j [0, b^-m) and 0 elsewhere.
inline double walsh_dirichlet(int m, int b, std::span<const double> x) {
    check_base(b);
    if (m < 0) throw Error("walsh_dirichlet: m must be nonnegative");
    const DigitCodec codec(b);
    double out = 1.0;
    const auto count = ipow(static_cast<std::uint64_t>(b), m);
    for (double xj : x) {
        std::complex<double> s = 0.0;
        for (std::uint64_t k = 0; k < count; ++k) s += root_of_unity(walsh_phase(k, xj, codec), b);
        out *= s.real();
    }
    return out;
}

// ---------------------------------------------------------------------------
// Chrestenson transform on b-adic grids
// ---------------------------------------------------------------------------

/// Number of base-b digits t with b^t = cells, or -1 when cells is not a
/// power of b.
inline int adic_levels(std::uint64_t cells, int b) {
    int t = 0;
    std::uint64_t v = 1;
    while (v < cells) {
        v *= static_cast<std::uint64_t>(b);
        ++t;
    }
    return v == cells ? t : -1;
}

/// Walsh coefficients of a tensor-grid function with b^{t_j} equal cells on
/// axis j (values row-major, last axis fastest).  Coefficients for k_j >=
/// b^{t_j} vanish, so the returned array of the same shape is the full
/// Walsh expansion.
inline std::vector<std::complex<double>> chrestenson_transform(std::span<const double> values,
                                                               std::span<const std::size_t> shape, int b) {
    check_base(b);
    std::size_t total = 1;
    for (auto s : shape) total *= s;
    if (total != values.size()) throw Error("chrestenson_transform: shape does not match value count");
    std::vector<std::complex<double>> data(values.begin(), values.end());

    std::size_t stride = total;
    for (std::size_t axis = 0; axis < shape.size(); ++axis) {
        const std::size_t m = shape[axis];
        const int t = adic_levels(m, b);
        if (t < 0) throw Error("axis with " + std::to_string(m) + " cells is not a power of base " + std::to_string(b));
        stride /= m;
        const std::size_t outer = total / (m * stride);
        const auto bb = static_cast<std::size_t>(b);
        // b-point DFT kernel conj(w^{xy}) / b
        std::vector<std::complex<double>> kern(bb * bb);
        for (std::size_t x = 0; x < bb; ++x)
            for (std::size_t y = 0; y < bb; ++y)
                kern[x * bb + y] = std::conj(root_of_unity(static_cast<std::int64_t>(x * y), b)) / static_cast<double>(b);
        // Digit reversal: kappa_i pairs with the digit of c at place b^{t-1-i}.
        std::vector<std::size_t> rev(m);
        for (std::size_t k = 0; k < m; ++k) {
            std::size_t r = 0, kk = k;
            for (int i = 0; i < t; ++i, kk /= bb) r = r * bb + kk % bb;
            rev[k] = r;
        }
        std::vector<std::complex<double>> line(m), tmp(bb);
        for (std::size_t o = 0; o < outer; ++o)
            for (std::size_t in = 0; in < stride; ++in) {
                const std::size_t base_idx = o * m * stride + in;
                for (std::size_t c = 0; c < m; ++c) line[c] = data[base_idx + c * stride];
                // separable DFT over each base-b digit of the cell index
                for (std::size_t place = 1; place < m; place *= bb)
                    for (std::size_t c0 = 0; c0 < m; ++c0) {
                        if ((c0 / place) % bb != 0) continue;
                        for (std::size_t y = 0; y < bb; ++y) {
                            std::complex<double> acc = 0.0;
                            for (std::size_t x = 0; x < bb; ++x) acc += kern[y * bb + x] * line[c0 + x * place];
                            tmp[y] = acc;
                        }
                        for (std::size_t y = 0; y < bb; ++y) line[c0 + y * place] = tmp[y];
                    }
                for (std::size_t k = 0; k < m; ++k) data[base_idx + k * stride] = line[rev[k]];
            }
    }
    return data;
}

}  // namespace hosi
