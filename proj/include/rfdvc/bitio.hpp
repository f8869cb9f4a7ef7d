#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rfdvc {

// MSB-first bit writer with Exp-Golomb codes.
class BitWriter {
 public:
  void put_bit(uint32_t b) {
    if (fill_ == 0) {
      bytes_.push_back(0);
      fill_ = 8;
    }
    --fill_;
    if (b) bytes_.back() |= uint8_t(1u << fill_);
  }

  void put_bits(uint32_t value, int n) {
    for (int i = n - 1; i >= 0; --i) put_bit((value >> i) & 1u);
  }

  // ue(v): floor(log2(v+1)) zero bits, then v+1 in binary.
  void put_ue(uint32_t v) {
    if (v == 0xffffffffu) throw std::invalid_argument("ue overflow");
    uint64_t x = uint64_t(v) + 1;
    int nbits = 0;
    for (uint64_t t = x; t > 1; t >>= 1) ++nbits;
    for (int i = 0; i < nbits; ++i) put_bit(0);
    for (int i = nbits; i >= 0; --i) put_bit(uint32_t(x >> i) & 1u);
  }

  // se(v): ue(2v-1) for v > 0, ue(-2v) otherwise.
  void put_se(int32_t v) {
    put_ue(v > 0 ? uint32_t(2 * int64_t(v) - 1) : uint32_t(-2 * int64_t(v)));
  }

  void align() { fill_ = 0; }

  size_t bit_count() const { return bytes_.size() * 8 - fill_; }
  const std::vector<uint8_t>& bytes() const { return bytes_; }
  std::vector<uint8_t> take() { return std::move(bytes_); }

 private:
  std::vector<uint8_t> bytes_;
  uint32_t fill_ = 0;  // unused low bits in the last byte
};

// Bounds-checked reader; throws std::runtime_error on overrun or a
// malformed Exp-Golomb prefix.
class BitReader {
 public:
  BitReader(const uint8_t* data, size_t len) : data_(data), bits_(len * 8) {}

  uint32_t get_bit() {
    if (pos_ >= bits_) throw std::runtime_error("bitstream overrun");
    uint32_t b = (data_[pos_ >> 3] >> (7 - (pos_ & 7))) & 1u;
    ++pos_;
    return b;
  }

  uint32_t get_bits(int n) {
    uint32_t v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | get_bit();
    return v;
  }

  uint32_t get_ue() {
    int zeros = 0;
    while (get_bit() == 0)
      if (++zeros > 31) throw std::runtime_error("malformed exp-golomb prefix");
    uint64_t x = 1;
    for (int i = 0; i < zeros; ++i) x = (x << 1) | get_bit();
    return uint32_t(x - 1);
  }

  int32_t get_se() {
    uint32_t k = get_ue();
    if (k == 0) return 0;
    return (k & 1) ? int32_t((k + 1) / 2) : -int32_t(k / 2);
  }

  size_t bits_left() const { return bits_ - pos_; }

 private:
  const uint8_t* data_;
  size_t bits_;
  size_t pos_ = 0;
};

}  // namespace rfdvc
