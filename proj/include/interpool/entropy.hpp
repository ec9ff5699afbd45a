#pragma once

// Ordering-freedom analytics for a forged batch. With n transactions split
// evenly over k = 2^locked_digits bit classes and a balanced target consuming
// hash_bits locked slots, the number of admissible orderings is
//
//   omega = [ (n/k)! / ((n - hash_bits)/k)! ]^k * (n - hash_bits)!
//
// and the entropy is log2(omega). locked_digits = 0 means no bit locks, so
// omega collapses to n! whatever hash_bits says.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace interpool {
namespace poe {

struct EntropyParams {
    int64_t n = 0;
    int locked_digits = 0;  // k = 2^locked_digits classes
    int64_t hash_bits = 0;

    int64_t k() const { return int64_t(1) << locked_digits; }

    void validate() const {
        if (n <= 0) throw std::invalid_argument("n must be positive");
        if (locked_digits < 0 || locked_digits > 16)
            throw std::invalid_argument("locked_digits out of range");
        if (hash_bits < 0) throw std::invalid_argument("hash_bits must be non-negative");
        if (hash_bits > n) throw std::invalid_argument("hash_bits exceeds batch size");
        if (n % k() != 0) throw std::invalid_argument("class count must divide n");
        if (hash_bits % k() != 0)
            throw std::invalid_argument("class count must divide hash_bits");
    }
};

// Arbitrary-precision unsigned integer, just big enough for factorial
// products: multiply by machine words, compare, print in decimal.
class BigUint {
  public:
    BigUint() : limbs_{0} {}
    explicit BigUint(uint64_t v) {
        limbs_.push_back(uint32_t(v & 0xffffffffu));
        if (v >> 32) limbs_.push_back(uint32_t(v >> 32));
    }

    BigUint& mul_u64(uint64_t f) {
        if (f == 0) {
            limbs_ = {0};
            return *this;
        }
        uint64_t lo = f & 0xffffffffu, hi = f >> 32;
        std::vector<uint32_t> out(limbs_.size() + 2, 0);
        for (size_t i = 0; i < limbs_.size(); ++i) {
            uint64_t p = uint64_t(limbs_[i]) * lo + out[i];
            out[i] = uint32_t(p);
            uint64_t carry = p >> 32;
            size_t j = i + 1;
            while (carry) {
                uint64_t q = uint64_t(out[j]) + carry;
                out[j] = uint32_t(q);
                carry = q >> 32;
                ++j;
            }
            if (hi) {
                uint64_t p2 = uint64_t(limbs_[i]) * hi + out[i + 1];
                out[i + 1] = uint32_t(p2);
                carry = p2 >> 32;
                j = i + 2;
                while (carry) {
                    uint64_t q = uint64_t(out[j]) + carry;
                    out[j] = uint32_t(q);
                    carry = q >> 32;
                    ++j;
                }
            }
        }
        while (out.size() > 1 && out.back() == 0) out.pop_back();
        limbs_ = std::move(out);
        return *this;
    }

    BigUint& mul_big(const BigUint& o) {
        std::vector<uint32_t> out(limbs_.size() + o.limbs_.size(), 0);
        for (size_t i = 0; i < limbs_.size(); ++i) {
            uint64_t carry = 0;
            for (size_t j = 0; j < o.limbs_.size(); ++j) {
                uint64_t p = uint64_t(limbs_[i]) * o.limbs_[j] + out[i + j] + carry;
                out[i + j] = uint32_t(p);
                carry = p >> 32;
            }
            size_t j = i + o.limbs_.size();
            while (carry) {
                uint64_t q = uint64_t(out[j]) + carry;
                out[j] = uint32_t(q);
                carry = q >> 32;
                ++j;
            }
        }
        while (out.size() > 1 && out.back() == 0) out.pop_back();
        limbs_ = std::move(out);
        return *this;
    }

    bool operator==(const BigUint& o) const { return limbs_ == o.limbs_; }

    bool fits_u64() const { return limbs_.size() <= 2; }
    uint64_t as_u64() const {
        uint64_t v = limbs_[0];
        if (limbs_.size() > 1) v |= uint64_t(limbs_[1]) << 32;
        return v;
    }

    std::string to_decimal() const {
        std::vector<uint32_t> work = limbs_;
        std::string out;
        auto all_zero = [&] {
            for (uint32_t w : work)
                if (w) return false;
            return true;
        };
        if (all_zero()) return "0";
        while (!all_zero()) {
            uint64_t rem = 0;
            for (size_t i = work.size(); i-- > 0;) {
                uint64_t cur = rem << 32 | work[i];
                work[i] = uint32_t(cur / 1'000'000'000u);
                rem = cur % 1'000'000'000u;
            }
            for (int d = 0; d < 9; ++d) {
                out.push_back(char('0' + rem % 10));
                rem /= 10;
            }
        }
        while (out.size() > 1 && out.back() == '0') out.pop_back();
        return std::string(out.rbegin(), out.rend());
    }

  private:
    std::vector<uint32_t> limbs_;  // base 2^32, little-endian
};

inline BigUint factorial_big(int64_t n) {
    BigUint r(1);
    for (int64_t i = 2; i <= n; ++i) r.mul_u64(uint64_t(i));
    return r;
}

inline BigUint count_orderings(const EntropyParams& p) {
    p.validate();
    const int64_t k = p.k();
    const int64_t per_class = p.n / k;
    const int64_t left_per_class = (p.n - p.hash_bits) / k;

    BigUint per(1);
    for (int64_t j = left_per_class + 1; j <= per_class; ++j) per.mul_u64(uint64_t(j));
    BigUint omega(1);
    for (int64_t c = 0; c < k; ++c) omega.mul_big(per);
    omega.mul_big(factorial_big(p.n - p.hash_bits));
    return omega;
}

// log2(omega) via lgamma; matches the exact count to ~1e-12 relative.
inline double entropy_bits(const EntropyParams& p) {
    p.validate();
    const double k = double(p.k());
    const double per_class = double(p.n) / k;
    const double left_per_class = double(p.n - p.hash_bits) / k;
    const double ln2 = std::log(2.0);
    double ln_omega = k * (std::lgamma(per_class + 1.0) - std::lgamma(left_per_class + 1.0)) +
                      std::lgamma(double(p.n - p.hash_bits) + 1.0);
    return ln_omega / ln2;
}

}  // namespace poe
}  // namespace interpool
