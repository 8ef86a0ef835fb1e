#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "slsi/rng.hpp"
#include "slsi/types.hpp"

namespace slsi {

// Full description of an embedding scheme: family, composition order k,
// output width l, and the master seed from which all per-bit seed material
// is derived. k = 1 denotes the vanilla (uncomposed) scheme.
//
// The universal-hash modulus must be prime and exceed every inner hash
// value; inner MinHash values are 48 bits wide, so the default Mersenne
// prime 2^61 - 1 leaves ample headroom.
struct SchemeConfig {
  FamilyKind kind;
  int k = 1;
  int l = 1;
  uint64_t master_seed = 0;
  uint64_t modulus = kMersenne61;

  void validate() const {
    if (k < 1) throw std::invalid_argument("composition order k must be >= 1");
    if (l < 1) throw std::invalid_argument("bit count l must be >= 1");
    if (!is_prime64(modulus)) throw std::invalid_argument("p not prime");
    if (modulus <= (uint64_t(1) << 48))
      throw std::invalid_argument("p must exceed 48-bit hash values");
  }

  // Identifier binding embeddings to the scheme that produced them.
  uint64_t scheme_id() const noexcept {
    uint64_t tag = (uint64_t(kind.family) << 8) | uint64_t(kind.style);
    return prf(master_seed, tag, (uint64_t(k) << 32) | uint64_t(l), modulus);
  }

  // JSON document {master_seed, family, style, k, l, p}.
  std::string to_json_string() const;
  static SchemeConfig from_json_string(const std::string& text);
};

}  // namespace slsi
