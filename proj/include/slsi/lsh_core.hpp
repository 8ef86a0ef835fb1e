#pragma once

#include <cstdint>

#include "slsi/embedding.hpp"
#include "slsi/scheme.hpp"
#include "slsi/types.hpp"

namespace slsi::lsh {

// MinHash of a sparse set: minimum of a pseudorandom 48-bit mapping of the
// element ids. Collision probability over seeds equals the resemblance.
uint64_t minhash(const AttributeVector& x, uint64_t seed);

// w.x with the projection vector w drawn deterministically from `seed`.
double projection_value(const AttributeVector& x, uint64_t seed,
                        ProjectionStyle style);

// Signed random projection bit: 1 iff w.x >= 0, with w derived from `seed`.
int simhash_bit(const AttributeVector& x, uint64_t seed, ProjectionStyle style);

// Universal 1-bit map (a * v mod 2^64) mod 2 with odd a. Multiplication by
// an odd constant is a bijection on Z/2^64, so this keeps the low bit of v;
// the bit is pseudorandom over the draw of the upstream hash seed.
int one_bit_rehash(uint64_t value, uint64_t odd_seed);

// One vanilla 1-bit hash at bit index `bit`: MinHash followed by the 1-bit
// rehash, or the raw SimHash sign bit. Seeds derive from cfg.master_seed.
int vanilla_bit(const AttributeVector& x, const SchemeConfig& cfg, int bit);

// l-bit vanilla embedding E(x); requires cfg.k == 1.
BitEmbedding embed(const AttributeVector& x, const SchemeConfig& cfg);

// Collision probability of a single base hash draw: R for MinHash, or
// 1 - theta/pi for SimHash where theta = acos(sim).
double base_collision(FamilyKind kind, double sim);

// Closed-form per-bit collision probability of the released scheme.
// MinHash: (R^k + 1)/2 for every k >= 1 (the 1-bit rehash is always applied).
// SimHash: the raw sign-bit law 1 - theta/pi at k = 1, and the composed law
// ((1 - theta/pi)^k + 1)/2 for k >= 2.
double collision_model(FamilyKind kind, double sim, int k);

struct SimilarityEstimate {
  double value = 0.0;
  // m/l carried no information (at or below the random-agreement level of a
  // composed scheme); `value` is clamped to the low end of the curve.
  bool saturated = false;
};

// Invert the collision curve: from the match fraction m/l of two embeddings
// of the same scheme, estimate the similarity the curve would produce.
SimilarityEstimate estimate_similarity(const BitEmbedding& a,
                                       const BitEmbedding& b, FamilyKind kind,
                                       int k);

// The same inversion applied directly to a match fraction in [0, 1].
SimilarityEstimate invert_collision_model(double match_fraction,
                                          FamilyKind kind, int k);

}  // namespace slsi::lsh
