#pragma once

#include <cstdint>

#include "slsi/embedding.hpp"
#include "slsi/lsh_core.hpp"
#include "slsi/scheme.hpp"

namespace slsi::secure {
struct PrivacyBudget;
}

namespace slsi::noise {

enum class NoiseMode : uint8_t { BitFlip, ProjectionNoise };

struct NoiseParams {
  NoiseMode mode = NoiseMode::BitFlip;
  double f = 0.0;      // corruption probability (bit-flip mode)
  double sigma = 0.0;  // Gaussian scale on projections (projection mode)
  uint64_t seed = 0;

  void validate() const;
};

// With probability f, replace b by an independent fair bit; otherwise keep
// it. Deterministic given (params.seed, trial_id).
int corrupt_bit(int b, const NoiseParams& params, uint64_t trial_id);

// Noisy vanilla embedding (cfg.k must be 1). `nonce` identifies the stored
// vector so noise is re-sampled independently per vector per bit.
// Bit-flip mode corrupts each vanilla bit; projection mode adds N(0, sigma^2)
// to each projection of the unit-normalized input before taking the sign
// (SimHash only).
BitEmbedding noisy_embed(const AttributeVector& x, const SchemeConfig& cfg,
                         const NoiseParams& params, uint64_t nonce = 0);

// Collision law of a corrupted bit matched against a clean one:
// (1 - f) P + f/2, with P the vanilla 1-bit law at `sim`.
double noisy_collision(FamilyKind kind, double sim, double f);

// Minimal f making the corrupted scheme epsilon-secure at threshold s0:
// f >= 1 - epsilon / (P(s0) - 1/2). Errors when P(s0) <= 1/2 (the vanilla
// scheme is already at the random level).
double required_f(FamilyKind kind, const secure::PrivacyBudget& budget);

}  // namespace slsi::noise
