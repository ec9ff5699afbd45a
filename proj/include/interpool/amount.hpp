#pragma once

// Fixed-point money arithmetic on a signed 128-bit mantissa with 12 decimal
// fraction digits. Coin kinds are phantom template tags so quantities of
// different coins never mix silently; cross-unit math goes through the named
// conversion helpers at the bottom.
//
// Rounding contract: multiplication and division truncate toward zero,
// amount_sqrt is the exact floor square root, display rounding is half-even.
// Any intermediate that would not fit the signed 128-bit mantissa throws.

#include <compare>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace interpool {

using int128 = __int128;
using uint128 = unsigned __int128;

inline constexpr int kScaleDigits = 12;
inline constexpr int64_t kScale = 1'000'000'000'000LL;

namespace detail {

inline constexpr uint128 kMaxMantissaMag = (uint128(1) << 127) - 1;

// Minimal 256-bit unsigned helper so 128x128-bit products never clip before
// the final divide / square root brings them back into range.
struct U256 {
    uint128 hi = 0;
    uint128 lo = 0;

    static U256 from(uint128 v) { return U256{0, v}; }

    bool operator==(const U256& o) const { return hi == o.hi && lo == o.lo; }
    bool operator<(const U256& o) const {
        return hi != o.hi ? hi < o.hi : lo < o.lo;
    }
    bool operator>=(const U256& o) const { return !(*this < o); }

    bool is_zero() const { return hi == 0 && lo == 0; }

    int bit(int i) const {
        return i < 128 ? int((lo >> i) & 1) : int((hi >> (i - 128)) & 1);
    }
    void set_bit(int i) {
        if (i < 128)
            lo |= uint128(1) << i;
        else
            hi |= uint128(1) << (i - 128);
    }

    U256& operator-=(const U256& o) {
        uint128 borrow = lo < o.lo ? 1 : 0;
        lo -= o.lo;
        hi -= o.hi + borrow;
        return *this;
    }
    U256& operator+=(const U256& o) {
        uint128 old = lo;
        lo += o.lo;
        hi += o.hi + (lo < old ? 1 : 0);
        return *this;
    }
    void shl1() {
        hi = (hi << 1) | (lo >> 127);
        lo <<= 1;
    }
    void shr1() {
        lo = (lo >> 1) | (hi << 127);
        hi >>= 1;
    }
    void shr2() {
        shr1();
        shr1();
    }
};

inline U256 mul_u128(uint128 a, uint128 b) {
    const uint128 mask = (uint128(1) << 64) - 1;
    uint128 a0 = a & mask, a1 = a >> 64;
    uint128 b0 = b & mask, b1 = b >> 64;
    uint128 p00 = a0 * b0;
    uint128 p01 = a0 * b1;
    uint128 p10 = a1 * b0;
    uint128 p11 = a1 * b1;

    U256 r;
    r.lo = p00;
    U256 mid{p01 >> 64, p01 << 64};
    r += mid;
    mid = U256{p10 >> 64, p10 << 64};
    r += mid;
    r.hi += p11;
    return r;
}

// Division with a native 128-bit fast path; mantissa-scale products almost
// always fit one limb. The shift-subtract loop covers the rest.
inline U256 divmod_u256(const U256& num, const U256& den, U256* rem_out) {
    if (den.is_zero()) throw std::domain_error("division by zero");
    if (num.hi == 0 && den.hi == 0) {
        if (rem_out) *rem_out = U256::from(num.lo % den.lo);
        return U256::from(num.lo / den.lo);
    }
    U256 q, rem;
    for (int i = 255; i >= 0; --i) {
        rem.shl1();
        if (num.bit(i)) rem.lo |= 1;
        if (rem >= den) {
            rem -= den;
            q.set_bit(i);
        }
    }
    if (rem_out) *rem_out = rem;
    return q;
}

// floor(sqrt(x)) by the classic digit-by-digit method.
inline uint128 isqrt_u256(U256 x) {
    U256 res;
    U256 bit;
    bit.hi = uint128(1) << 126;  // 1 << 254
    while (x < bit) bit.shr2();
    while (!bit.is_zero()) {
        U256 t = res;
        t += bit;
        if (x >= t) {
            x -= t;
            res.shr1();
            res += bit;
        } else {
            res.shr1();
        }
        bit.shr2();
    }
    return res.lo;
}

inline uint128 mag(int128 v) {
    return v < 0 ? uint128(0) - uint128(v) : uint128(v);
}

inline int128 apply_sign(uint128 magnitude, bool negative) {
    if (magnitude > kMaxMantissaMag) throw std::overflow_error("amount overflow");
    int128 v = int128(magnitude);
    return negative ? -v : v;
}

// a * b / c truncated toward zero, 256-bit intermediate.
inline int128 muldiv(int128 a, int128 b, int128 c) {
    if (c == 0) throw std::domain_error("division by zero");
    bool neg = (a < 0) != (b < 0);
    if (c < 0) neg = !neg;
    U256 num = mul_u128(mag(a), mag(b));
    U256 rem;
    U256 q = divmod_u256(num, U256::from(mag(c)), &rem);
    if (q.hi != 0) throw std::overflow_error("amount overflow");
    return apply_sign(q.lo, neg);
}

// Same as muldiv but rounds the quotient up; positive operands only.
inline int128 muldiv_ceil(int128 a, int128 b, int128 c) {
    if (a < 0 || b < 0 || c <= 0)
        throw std::domain_error("muldiv_ceil expects non-negative operands");
    U256 num = mul_u128(mag(a), mag(b));
    U256 rem;
    U256 q = divmod_u256(num, U256::from(mag(c)), &rem);
    if (!rem.is_zero()) {
        q += U256::from(1);
    }
    if (q.hi != 0 || q.lo > kMaxMantissaMag) throw std::overflow_error("amount overflow");
    return int128(q.lo);
}

inline int128 checked_add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("amount overflow");
    return r;
}

inline int128 checked_sub(int128 a, int128 b) {
    int128 r;
    if (__builtin_sub_overflow(a, b, &r)) throw std::overflow_error("amount overflow");
    return r;
}

// floor(sqrt(m * kScale)): square root of a scale-10^12 mantissa, result at
// the same scale.
inline int128 sqrt_mantissa(int128 m) {
    if (m < 0) throw std::domain_error("sqrt of negative amount");
    U256 radicand = mul_u128(uint128(m), uint128(kScale));
    return int128(isqrt_u256(radicand));
}

int128 parse_fixed(std::string_view text);
std::string format_fixed(int128 m);
std::string format_fixed_2dp(int128 m);

inline int128 parse_fixed(std::string_view text) {
    if (text.empty()) throw std::invalid_argument("empty amount");
    bool neg = false;
    size_t i = 0;
    if (text[0] == '-' || text[0] == '+') {
        neg = text[0] == '-';
        i = 1;
    }
    if (i == text.size()) throw std::invalid_argument("bad amount: " + std::string(text));
    uint128 whole = 0;
    bool saw_digit = false;
    for (; i < text.size() && text[i] != '.'; ++i) {
        char c = text[i];
        if (c < '0' || c > '9') throw std::invalid_argument("bad amount: " + std::string(text));
        whole = whole * 10 + uint128(c - '0');
        if (whole > kMaxMantissaMag / uint128(kScale))
            throw std::overflow_error("amount overflow: " + std::string(text));
        saw_digit = true;
    }
    uint128 frac = 0;
    int frac_digits = 0;
    if (i < text.size()) {
        ++i;  // skip '.'
        for (; i < text.size(); ++i) {
            char c = text[i];
            if (c < '0' || c > '9') throw std::invalid_argument("bad amount: " + std::string(text));
            if (frac_digits == kScaleDigits)
                throw std::invalid_argument("too many fraction digits: " + std::string(text));
            frac = frac * 10 + uint128(c - '0');
            ++frac_digits;
            saw_digit = true;
        }
    }
    if (!saw_digit) throw std::invalid_argument("bad amount: " + std::string(text));
    for (; frac_digits < kScaleDigits; ++frac_digits) frac *= 10;
    uint128 m = whole * uint128(kScale) + frac;
    return apply_sign(m, neg);
}

inline std::string format_fixed(int128 m) {
    bool neg = m < 0;
    uint128 u = mag(m);
    uint128 whole = u / uint128(kScale);
    uint128 frac = u % uint128(kScale);

    std::string digits;
    if (whole == 0) digits = "0";
    while (whole > 0) {
        digits.insert(digits.begin(), char('0' + int(whole % 10)));
        whole /= 10;
    }
    std::string out = neg ? "-" + digits : digits;
    if (frac != 0) {
        std::string f(kScaleDigits, '0');
        for (int i = kScaleDigits - 1; i >= 0; --i) {
            f[i] = char('0' + int(frac % 10));
            frac /= 10;
        }
        while (!f.empty() && f.back() == '0') f.pop_back();
        out += "." + f;
    }
    return out;
}

// Half-even rounding to two decimal places, for tabular display.
inline std::string format_fixed_2dp(int128 m) {
    bool neg = m < 0;
    uint128 u = mag(m);
    const uint128 step = uint128(kScale) / 100;  // 10^10
    uint128 q = u / step;
    uint128 r = u % step;
    const uint128 half = step / 2;
    if (r > half || (r == half && (q & 1))) ++q;
    uint128 whole = q / 100;
    uint128 cents = q % 100;
    std::string digits;
    if (whole == 0) digits = "0";
    while (whole > 0) {
        digits.insert(digits.begin(), char('0' + int(whole % 10)));
        whole /= 10;
    }
    std::string out = neg && q != 0 ? "-" + digits : digits;
    out += ".";
    out += char('0' + int(cents / 10));
    out += char('0' + int(cents % 10));
    return out;
}

}  // namespace detail

enum class Unit : uint8_t { native, intertoken, gas, alien, product };

template <Unit U>
class Amount {
  public:
    constexpr Amount() = default;

    static constexpr Amount from_mantissa(int128 m) {
        Amount a;
        a.m_ = m;
        return a;
    }
    static Amount from_int(int64_t units) {
        return from_mantissa(detail::checked_add(0, int128(units) * kScale));
    }
    static Amount from_string(std::string_view text) {
        return from_mantissa(detail::parse_fixed(text));
    }

    constexpr int128 mantissa() const { return m_; }
    constexpr bool is_zero() const { return m_ == 0; }
    constexpr bool is_negative() const { return m_ < 0; }

    Amount operator+(Amount o) const { return from_mantissa(detail::checked_add(m_, o.m_)); }
    Amount operator-(Amount o) const { return from_mantissa(detail::checked_sub(m_, o.m_)); }
    Amount operator-() const { return from_mantissa(detail::checked_sub(0, m_)); }
    Amount& operator+=(Amount o) { return *this = *this + o; }
    Amount& operator-=(Amount o) { return *this = *this - o; }

    auto operator<=>(const Amount&) const = default;

    std::string to_string() const { return detail::format_fixed(m_); }
    std::string to_display() const { return detail::format_fixed_2dp(m_); }
    double to_double() const { return double(m_) / double(kScale); }

  private:
    int128 m_ = 0;
};

using Native = Amount<Unit::native>;
using Intertoken = Amount<Unit::intertoken>;
using GasAmount = Amount<Unit::gas>;
using AlienCoin = Amount<Unit::alien>;
using PoolCoins = Amount<Unit::product>;  // intertoken x native, constant per position

// Dimension-free scale-10^12 multiplier: pool price (native per intertoken),
// gas price (native per gas unit), fee and penalty rates.
class Ratio {
  public:
    constexpr Ratio() = default;

    static constexpr Ratio from_mantissa(int128 m) {
        Ratio r;
        r.m_ = m;
        return r;
    }
    static Ratio from_string(std::string_view text) {
        return from_mantissa(detail::parse_fixed(text));
    }
    static Ratio from_int(int64_t units) { return from_mantissa(int128(units) * kScale); }

    constexpr int128 mantissa() const { return m_; }
    constexpr bool is_zero() const { return m_ == 0; }

    auto operator<=>(const Ratio&) const = default;

    std::string to_string() const { return detail::format_fixed(m_); }
    std::string to_display() const { return detail::format_fixed_2dp(m_); }
    double to_double() const { return double(m_) / double(kScale); }

  private:
    int128 m_ = 0;
};

// Same-unit scaling by a dimension-free ratio, truncating.
template <Unit U>
Amount<U> mul(Amount<U> a, Ratio r) {
    return Amount<U>::from_mantissa(detail::muldiv(a.mantissa(), r.mantissa(), kScale));
}
template <Unit U>
Amount<U> div(Amount<U> a, Ratio r) {
    return Amount<U>::from_mantissa(detail::muldiv(a.mantissa(), kScale, r.mantissa()));
}

inline Native to_native(Intertoken a, Ratio price) {
    return Native::from_mantissa(detail::muldiv(a.mantissa(), price.mantissa(), kScale));
}
inline Intertoken to_intertoken(Native a, Ratio price) {
    return Intertoken::from_mantissa(detail::muldiv(a.mantissa(), kScale, price.mantissa()));
}
inline Ratio ratio_of(Native num, Intertoken den) {
    return Ratio::from_mantissa(detail::muldiv(num.mantissa(), kScale, den.mantissa()));
}
inline PoolCoins coins_of(Intertoken i, Native n) {
    return PoolCoins::from_mantissa(detail::muldiv(i.mantissa(), n.mantissa(), kScale));
}
inline Native fee_value(GasAmount limit, Ratio gas_price) {
    return Native::from_mantissa(detail::muldiv(limit.mantissa(), gas_price.mantissa(), kScale));
}

// The intertoken pegs 1:1 to the alien coin.
inline AlienCoin to_alien(Intertoken a) { return AlienCoin::from_mantissa(a.mantissa()); }
inline Intertoken from_alien(AlienCoin a) { return Intertoken::from_mantissa(a.mantissa()); }

template <Unit U>
Amount<U> amount_sqrt(Amount<U> a) {
    return Amount<U>::from_mantissa(detail::sqrt_mantissa(a.mantissa()));
}

template <Unit U>
Amount<U> amount_min(Amount<U> a, Amount<U> b) {
    return a < b ? a : b;
}
template <Unit U>
Amount<U> amount_max(Amount<U> a, Amount<U> b) {
    return a < b ? b : a;
}

}  // namespace interpool
