#pragma once

// Canonical byte encoding: fixed field order, big-endian integers,
// length-prefixed variable byte fields. Every hash and signature payload in
// the project goes through these writers so two encoders can never disagree.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

#include "interpool/amount.hpp"
#include "interpool/hash.hpp"

namespace interpool {

class ByteWriter {
  public:
    void put_u8(uint8_t v) { buf_.push_back(v); }

    void put_u32(uint32_t v) {
        for (int i = 3; i >= 0; --i) buf_.push_back(uint8_t(v >> (8 * i)));
    }

    void put_u64(uint64_t v) {
        for (int i = 7; i >= 0; --i) buf_.push_back(uint8_t(v >> (8 * i)));
    }

    void put_i64(int64_t v) { put_u64(uint64_t(v)); }

    // 16-byte big-endian two's complement.
    void put_i128(int128 v) {
        uint128 u = uint128(v);
        for (int i = 15; i >= 0; --i) buf_.push_back(uint8_t(u >> (8 * i)));
    }

    template <Unit U>
    void put_amount(Amount<U> a) {
        put_i128(a.mantissa());
    }
    void put_ratio(Ratio r) { put_i128(r.mantissa()); }

    void put_hash(const Hash256& h) { buf_.insert(buf_.end(), h.bytes.begin(), h.bytes.end()); }

    void put_bytes(std::span<const uint8_t> data) {
        put_u32(uint32_t(data.size()));
        buf_.insert(buf_.end(), data.begin(), data.end());
    }

    void put_raw(std::span<const uint8_t> data) {
        buf_.insert(buf_.end(), data.begin(), data.end());
    }

    const std::vector<uint8_t>& bytes() const { return buf_; }
    std::vector<uint8_t> take() { return std::move(buf_); }

  private:
    std::vector<uint8_t> buf_;
};

class ByteReader {
  public:
    explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

    uint8_t get_u8() {
        need(1);
        return data_[pos_++];
    }

    uint32_t get_u32() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_++];
        return v;
    }

    uint64_t get_u64() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_++];
        return v;
    }

    int64_t get_i64() { return int64_t(get_u64()); }

    int128 get_i128() {
        need(16);
        uint128 v = 0;
        for (int i = 0; i < 16; ++i) v = v << 8 | data_[pos_++];
        return int128(v);
    }

    template <Unit U>
    Amount<U> get_amount() {
        return Amount<U>::from_mantissa(get_i128());
    }
    Ratio get_ratio() { return Ratio::from_mantissa(get_i128()); }

    Hash256 get_hash() {
        need(32);
        Hash256 h;
        for (auto& b : h.bytes) b = data_[pos_++];
        return h;
    }

    std::vector<uint8_t> get_bytes() {
        uint32_t n = get_u32();
        need(n);
        std::vector<uint8_t> out(data_.begin() + pos_, data_.begin() + pos_ + n);
        pos_ += n;
        return out;
    }

    bool exhausted() const { return pos_ == data_.size(); }

  private:
    void need(size_t n) {
        if (pos_ + n > data_.size()) throw std::out_of_range("truncated input");
    }

    std::span<const uint8_t> data_;
    size_t pos_ = 0;
};

}  // namespace interpool
