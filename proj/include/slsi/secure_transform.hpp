#pragma once

#include <cstdint>

#include "slsi/embedding.hpp"
#include "slsi/lsh_core.hpp"
#include "slsi/scheme.hpp"
#include "slsi/types.hpp"

namespace slsi::secure {

// k-composition of LSH bits through a pairwise-independent universal hash,
// yielding 1-bit hashes whose collision probability is (P^k + 1)/2. Below a
// chosen similarity threshold the released bits agree at a rate within
// epsilon of a fair coin, so pairwise distances of non-neighbors cannot be
// estimated from the public signature.

// (r_{k+1} + sum r_i v_i) mod p, mod 2 with r_i in [1, p-1].
int universal_hash_bit(const uint64_t* values, const uint64_t* coeffs, int k,
                       uint64_t p);

// One secure bit at index `bit`: k independent inner hashes of x folded
// through the universal hash. At k = 1 this is the vanilla bit, so a k = 1
// config reproduces lsh_core::embed exactly.
int secure_bit(const AttributeVector& x, const SchemeConfig& cfg, int bit);

// l-bit public signature S(x).
BitEmbedding secure_embed(const AttributeVector& x, const SchemeConfig& cfg);

// Per-bit collision law of the composed scheme, (base^k + 1)/2, valid for
// every k >= 1. Unlike lsh::collision_model this never special-cases k = 1;
// it describes the universal-hash composition itself.
double composed_collision(FamilyKind kind, double sim, int k);

struct PrivacyBudget {
  double s0 = 0.75;       // neighbor threshold: pairs below are non-neighbors
  double epsilon = 0.05;  // max excess collision probability over 1/2

  void validate(FamilyKind kind) const;
};

// Smallest k such that the released per-bit collision probability stays at
// or below 1/2 + epsilon for every similarity <= s0. Starts from
// ceil(log(2 eps) / log P(s0)) and adjusts by direct evaluation of the
// closed form, which guards boundary rounding in either direction.
int required_k(FamilyKind kind, const PrivacyBudget& budget);

// Upper bound, in bits, on the mutual information between two l-bit secure
// embeddings of inputs at the given similarity: l (2P-1) log2(P/(1-P)) with
// P the composed collision probability. Diverges as sim -> 1.
double mutual_info_bound(FamilyKind kind, double sim, int k, int l);

// Exact mutual information of the symmetric per-bit channel with agreement
// probability p, in bits (two uniform marginals, Pr[equal] = p).
double exact_channel_mi(double p);

// Leakage bound against an adversary holding hashes of m independent
// probes: 2 m epsilon log2((1 + 2 eps)/(1 - 2 eps)).
double triangulation_info_bound(int m, double epsilon);

// Query exponent of the composed scheme,
// log((p1^k + 1)/2) / log((p2^k + 1)/2); strictly increasing in k.
double rho_prime(double p1, double p2, int k);

// Privacy-budget calculus for one (family, s0, epsilon, c) cell. The query
// exponent is reported for both readings of the sensitivity pair: the raw
// base-family probabilities at (s0, c*s0), and the same pair pushed through
// the 1-bit rehash (p+1)/2.
struct TradeoffReport {
  double p1 = 0.0;
  double p2 = 0.0;
  int k = 1;
  double f_noise = 0.0;           // noise floor of the corruption baseline
  double rho_prime_raw = 0.0;
  double rho_prime_rehashed = 0.0;
  double mi_bound_bits_per_bit = 0.0;  // at the budget point, per released bit
};

TradeoffReport budget_report(FamilyKind kind, const PrivacyBudget& budget,
                             double c = 0.5);

}  // namespace slsi::secure
