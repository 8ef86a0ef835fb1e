#pragma once

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace slsi {

// An l-bit public signature. Bits are stored packed; unused high bits of the
// last word are kept zero so Hamming distance is a plain word-wise popcount.
//
// Hex serialization packs four bits per nibble with bit index 0 as the most
// significant bit of the first nibble.
class BitEmbedding {
 public:
  BitEmbedding() = default;
  BitEmbedding(int length, uint64_t scheme_id)
      : length_(length), scheme_id_(scheme_id), words_((length + 63) / 64, 0) {
    if (length < 1) throw std::invalid_argument("embedding length must be >= 1");
  }

  int length() const noexcept { return length_; }
  uint64_t scheme_id() const noexcept { return scheme_id_; }
  const std::vector<uint64_t>& words() const noexcept { return words_; }

  bool bit(int i) const {
    check_index(i);
    return (words_[i >> 6] >> (i & 63)) & 1;
  }

  void set_bit(int i, bool v) {
    check_index(i);
    uint64_t mask = uint64_t(1) << (i & 63);
    if (v)
      words_[i >> 6] |= mask;
    else
      words_[i >> 6] &= ~mask;
  }

  static BitEmbedding from_words(std::vector<uint64_t> words, int length,
                                 uint64_t scheme_id) {
    BitEmbedding e(length, scheme_id);
    if (words.size() != e.words_.size())
      throw std::invalid_argument("word count does not match length");
    e.words_ = std::move(words);
    e.mask_tail();
    return e;
  }

  std::string to_hex() const {
    static const char* digits = "0123456789abcdef";
    int nibbles = (length_ + 3) / 4;
    std::string out(nibbles, '0');
    for (int n = 0; n < nibbles; ++n) {
      int v = 0;
      for (int j = 0; j < 4; ++j) {
        int i = 4 * n + j;
        if (i < length_ && bit(i)) v |= 8 >> j;  // bit 4n is the nibble MSB
      }
      out[n] = digits[v];
    }
    return out;
  }

  static BitEmbedding from_hex(const std::string& hex, int length,
                               uint64_t scheme_id) {
    BitEmbedding e(length, scheme_id);
    if ((int)hex.size() != (length + 3) / 4)
      throw std::invalid_argument("hex string length does not match l");
    for (int n = 0; n < (int)hex.size(); ++n) {
      int v = nibble_value(hex[n]);
      for (int j = 0; j < 4; ++j) {
        int i = 4 * n + j;
        bool b = (v >> (3 - j)) & 1;
        if (i < length)
          e.set_bit(i, b);
        else if (b)
          throw std::invalid_argument("nonzero padding bits in hex string");
      }
    }
    return e;
  }

  bool operator==(const BitEmbedding&) const = default;

 private:
  void check_index(int i) const {
    if (i < 0 || i >= length_) throw std::out_of_range("bit index out of range");
  }
  void mask_tail() {
    int tail = length_ & 63;
    if (tail) words_.back() &= (uint64_t(1) << tail) - 1;
  }
  static int nibble_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    throw std::invalid_argument("invalid hex digit");
  }

  int length_ = 0;
  uint64_t scheme_id_ = 0;
  std::vector<uint64_t> words_;
};

inline int hamming_distance(const BitEmbedding& a, const BitEmbedding& b) {
  if (a.scheme_id() != b.scheme_id() || a.length() != b.length())
    throw std::invalid_argument("scheme mismatch");
  int d = 0;
  for (size_t w = 0; w < a.words().size(); ++w)
    d += std::popcount(a.words()[w] ^ b.words()[w]);
  return d;
}

// Number of agreeing bit positions: m = l - HammingDistance.
inline int bit_matches(const BitEmbedding& a, const BitEmbedding& b) {
  return a.length() - hamming_distance(a, b);
}

}  // namespace slsi
