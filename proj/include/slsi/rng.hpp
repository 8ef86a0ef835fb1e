#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace slsi {

// SplitMix64 finalizer. All deterministic randomness in the library is built
// on this mixer so results are reproducible across toolchains.
constexpr uint64_t mix64(uint64_t z) noexcept {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// Keyed PRF over up to three words; counter-mode seed derivation.
constexpr uint64_t prf(uint64_t key, uint64_t a, uint64_t b = 0,
                       uint64_t c = 0) noexcept {
  uint64_t h = mix64(key ^ 0x243f6a8885a308d3ull);
  h = mix64(h ^ a);
  h = mix64(h ^ b);
  return mix64(h ^ c);
}

// Domain tags for derived seeds. Every (master_seed, domain, bit, slot)
// tuple yields an independent stream seed.
namespace seed_domain {
constexpr uint64_t kMinHashMap = 1;    // per-(bit, slot) element mapping
constexpr uint64_t kProjection = 2;    // per-(bit, slot) projection vector
constexpr uint64_t kRehash = 3;        // per-bit odd multiplier
constexpr uint64_t kUniversal = 4;     // per-(bit, slot) universal coefficient
constexpr uint64_t kNoiseFlip = 5;     // per-trial corruption draw
constexpr uint64_t kNoiseGauss = 6;    // per-(nonce, bit) projection noise
constexpr uint64_t kTrial = 7;         // per-trial experiment streams
constexpr uint64_t kPad = 8;           // protocol pad generation
constexpr uint64_t kShareMask = 9;     // protocol share masking
}  // namespace seed_domain

constexpr uint64_t derive_seed(uint64_t master, uint64_t domain, uint64_t bit,
                               uint64_t slot = 0) noexcept {
  return prf(master, domain, bit, slot);
}

// Minimal deterministic stream generator (splitmix64 sequence).
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) noexcept : state_(seed) {}

  uint64_t next() noexcept {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1), 53-bit resolution.
  double uniform() noexcept { return double(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller; pair cached.
  double gaussian() noexcept {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = double((next() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(t);
    have_spare_ = true;
    return r * std::cos(t);
  }

  // Uniform direction on the unit sphere in `dim` dimensions.
  std::vector<double> unit_vector(int dim) {
    if (dim < 1) throw std::invalid_argument("dimension must be positive");
    std::vector<double> v(dim);
    double norm2 = 0.0;
    do {
      norm2 = 0.0;
      for (auto& c : v) {
        c = gaussian();
        norm2 += c * c;
      }
    } while (norm2 == 0.0);
    double inv = 1.0 / std::sqrt(norm2);
    for (auto& c : v) c *= inv;
    return v;
  }

 private:
  uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// ---- modular arithmetic over 64-bit operands ----

constexpr uint64_t kMersenne61 = (uint64_t(1) << 61) - 1;

inline uint64_t mulmod(uint64_t a, uint64_t b, uint64_t m) {
  return uint64_t((unsigned __int128)(a) * b % m);
}

inline uint64_t powmod(uint64_t base, uint64_t exp, uint64_t m) {
  uint64_t r = 1 % m;
  base %= m;
  while (exp) {
    if (exp & 1) r = mulmod(r, base, m);
    base = mulmod(base, base, m);
    exp >>= 1;
  }
  return r;
}

// Deterministic Miller-Rabin for 64-bit integers.
inline bool is_prime64(uint64_t n) {
  if (n < 2) return false;
  for (uint64_t p : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                     23ull, 29ull, 31ull, 37ull}) {
    if (n % p == 0) return n == p;
  }
  uint64_t d = n - 1;
  int s = 0;
  while ((d & 1) == 0) {
    d >>= 1;
    ++s;
  }
  for (uint64_t a : {2ull, 3ull, 5ull, 7ull, 11ull, 13ull, 17ull, 19ull,
                     23ull, 29ull, 31ull, 37ull}) {
    uint64_t x = powmod(a, d, n);
    if (x == 1 || x == n - 1) continue;
    bool composite = true;
    for (int i = 1; i < s; ++i) {
      x = mulmod(x, x, n);
      if (x == n - 1) {
        composite = false;
        break;
      }
    }
    if (composite) return false;
  }
  return true;
}

}  // namespace slsi
