#include "slsi/lsh_core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace slsi::lsh {

namespace {

constexpr double kPi = std::numbers::pi;

double clamp(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

}  // namespace

uint64_t minhash(const AttributeVector& x, uint64_t seed) {
  if (!x.is_sparse()) throw std::invalid_argument("incompatible input");
  const auto& ids = x.elements();
  if (ids.empty()) throw std::invalid_argument("empty input set");
  uint64_t mn = UINT64_MAX;
  for (uint64_t id : ids) {
    // 48-bit mapped values keep everything below the universal modulus.
    uint64_t v = prf(seed, id) >> 16;
    mn = std::min(mn, v);
  }
  return mn;
}

double projection_value(const AttributeVector& x, uint64_t seed,
                        ProjectionStyle style) {
  if (!x.is_dense()) throw std::invalid_argument("incompatible input");
  const auto& c = x.coords();
  SplitMix64 g(seed);
  double dot = 0.0;
  bool nonzero = false;
  if (style == ProjectionStyle::Gaussian) {
    for (double xi : c) {
      double w = g.gaussian();
      dot += w * xi;
      nonzero |= (xi != 0.0);
    }
  } else {
    for (double xi : c) {
      double w = (g.next() & 1) ? 1.0 : -1.0;
      dot += w * xi;
      nonzero |= (xi != 0.0);
    }
  }
  if (!nonzero) throw std::invalid_argument("undefined direction");
  return dot;
}

int simhash_bit(const AttributeVector& x, uint64_t seed,
                ProjectionStyle style) {
  return projection_value(x, seed, style) >= 0.0 ? 1 : 0;
}

int one_bit_rehash(uint64_t value, uint64_t odd_seed) {
  if ((odd_seed & 1) == 0) throw std::invalid_argument("seed must be odd");
  return int((odd_seed * value) & 1);  // uint64 product is already mod 2^64
}

int vanilla_bit(const AttributeVector& x, const SchemeConfig& cfg, int bit) {
  if (cfg.kind.family == Family::MinHash) {
    uint64_t s = derive_seed(cfg.master_seed, seed_domain::kMinHashMap, bit, 0);
    uint64_t a = derive_seed(cfg.master_seed, seed_domain::kRehash, bit) | 1;
    return one_bit_rehash(minhash(x, s), a);
  }
  uint64_t s = derive_seed(cfg.master_seed, seed_domain::kProjection, bit, 0);
  return simhash_bit(x, s, cfg.kind.style);
}

BitEmbedding embed(const AttributeVector& x, const SchemeConfig& cfg) {
  cfg.validate();
  if (cfg.k != 1)
    throw std::invalid_argument("vanilla embedding requires k == 1");
  BitEmbedding e(cfg.l, cfg.scheme_id());
  for (int i = 0; i < cfg.l; ++i) e.set_bit(i, vanilla_bit(x, cfg, i));
  return e;
}

double base_collision(FamilyKind kind, double sim) {
  if (kind.family == Family::MinHash) {
    if (sim < 0.0 || sim > 1.0)
      throw std::invalid_argument("resemblance must lie in [0, 1]");
    return sim;
  }
  if (sim < -1.0 || sim > 1.0)
    throw std::invalid_argument("cosine must lie in [-1, 1]");
  return 1.0 - std::acos(sim) / kPi;
}

double collision_model(FamilyKind kind, double sim, int k) {
  if (k < 1) throw std::invalid_argument("composition order k must be >= 1");
  double p = base_collision(kind, sim);
  if (kind.family == Family::SimHash && k == 1) return p;  // raw sign bits
  return (std::pow(p, k) + 1.0) / 2.0;
}

SimilarityEstimate invert_collision_model(double match_fraction,
                                          FamilyKind kind, int k) {
  if (k < 1) throw std::invalid_argument("composition order k must be >= 1");
  double r = clamp(match_fraction, 0.0, 1.0);
  SimilarityEstimate est;
  if (kind.family == Family::SimHash && k == 1) {
    // Invert 1 - theta/pi; defined over the whole range, never saturates.
    est.value = std::cos(kPi * (1.0 - r));
    return est;
  }
  double t = 2.0 * r - 1.0;
  if (t <= 0.0) {
    est.saturated = true;
    t = 0.0;
  }
  double base = t > 0.0 ? std::pow(t, 1.0 / k) : 0.0;
  if (kind.family == Family::MinHash) {
    est.value = base;
  } else {
    est.value = std::cos(kPi * (1.0 - base));
  }
  return est;
}

SimilarityEstimate estimate_similarity(const BitEmbedding& a,
                                       const BitEmbedding& b, FamilyKind kind,
                                       int k) {
  int m = bit_matches(a, b);  // throws on scheme mismatch
  return invert_collision_model(double(m) / a.length(), kind, k);
}

}  // namespace slsi::lsh
