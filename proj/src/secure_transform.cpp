#include "slsi/secure_transform.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "slsi/noise_baseline.hpp"

namespace slsi::secure {

int universal_hash_bit(const uint64_t* values, const uint64_t* coeffs, int k,
                       uint64_t p) {
  if (k < 1) throw std::invalid_argument("composition order k must be >= 1");
  uint64_t acc = coeffs[k] % p;  // r_{k+1}
  for (int j = 0; j < k; ++j)
    acc = (acc + mulmod(coeffs[j], values[j] % p, p)) % p;
  return int(acc & 1);
}

namespace {

// Universal coefficient r for (bit, slot), uniform in [1, p-1].
uint64_t universal_coeff(const SchemeConfig& cfg, int bit, int slot) {
  uint64_t raw =
      derive_seed(cfg.master_seed, seed_domain::kUniversal, bit, slot);
  return 1 + raw % (cfg.modulus - 1);
}

uint64_t inner_hash(const AttributeVector& x, const SchemeConfig& cfg, int bit,
                    int slot) {
  if (cfg.kind.family == Family::MinHash) {
    uint64_t s =
        derive_seed(cfg.master_seed, seed_domain::kMinHashMap, bit, slot);
    return lsh::minhash(x, s);
  }
  uint64_t s =
      derive_seed(cfg.master_seed, seed_domain::kProjection, bit, slot);
  return uint64_t(lsh::simhash_bit(x, s, cfg.kind.style));
}

}  // namespace

int secure_bit(const AttributeVector& x, const SchemeConfig& cfg, int bit) {
  cfg.validate();
  if (cfg.k == 1) return lsh::vanilla_bit(x, cfg, bit);  // vanilla scheme
  std::vector<uint64_t> values(cfg.k), coeffs(cfg.k + 1);
  for (int j = 0; j < cfg.k; ++j) {
    values[j] = inner_hash(x, cfg, bit, j);
    coeffs[j] = universal_coeff(cfg, bit, j);
  }
  coeffs[cfg.k] = universal_coeff(cfg, bit, cfg.k);
  return universal_hash_bit(values.data(), coeffs.data(), cfg.k, cfg.modulus);
}

BitEmbedding secure_embed(const AttributeVector& x, const SchemeConfig& cfg) {
  cfg.validate();
  BitEmbedding e(cfg.l, cfg.scheme_id());
  for (int i = 0; i < cfg.l; ++i) e.set_bit(i, secure_bit(x, cfg, i));
  return e;
}

double composed_collision(FamilyKind kind, double sim, int k) {
  if (k < 1) throw std::invalid_argument("composition order k must be >= 1");
  double p = lsh::base_collision(kind, sim);
  return (std::pow(p, k) + 1.0) / 2.0;
}

void PrivacyBudget::validate(FamilyKind kind) const {
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("epsilon must lie in (0, 0.5)");
  lsh::base_collision(kind, s0);  // range-checks s0 for the family
}

int required_k(FamilyKind kind, const PrivacyBudget& budget) {
  budget.validate(kind);
  double p = lsh::base_collision(kind, budget.s0);
  if (p <= 0.0 || p >= 1.0)
    throw std::invalid_argument("P(s0) must lie strictly between 0 and 1");

  double cap = 0.5 + budget.epsilon;
  auto passes = [&](int k) {
    return lsh::collision_model(kind, budget.s0, k) <= cap;
  };

  int k = int(std::max(1.0, std::ceil(std::log(2.0 * budget.epsilon) /
                                      std::log(p))));
  // The ceiling formula targets the composed law; direct evaluation settles
  // the boundary cases (and the raw k = 1 law, which the formula ignores).
  while (!passes(k)) ++k;
  while (k > 1 && passes(k - 1)) --k;
  return k;
}

double mutual_info_bound(FamilyKind kind, double sim, int k, int l) {
  if (l < 1) throw std::invalid_argument("bit count l must be >= 1");
  double p = composed_collision(kind, sim, k);
  if (p >= 1.0)
    throw std::invalid_argument("bound diverges at identical inputs");
  return l * (2.0 * p - 1.0) * std::log2(p / (1.0 - p));
}

double exact_channel_mi(double p) {
  if (p < 0.0 || p > 1.0)
    throw std::invalid_argument("probability out of range");
  auto term = [](double q) { return q > 0.0 ? q * std::log2(q) : 0.0; };
  return 1.0 + term(p) + term(1.0 - p);
}

double triangulation_info_bound(int m, double epsilon) {
  if (m < 1) throw std::invalid_argument("probe count must be >= 1");
  if (!(epsilon > 0.0 && epsilon < 0.5))
    throw std::invalid_argument("epsilon must lie in (0, 0.5)");
  return 2.0 * m * epsilon *
         std::log2((1.0 + 2.0 * epsilon) / (1.0 - 2.0 * epsilon));
}

double rho_prime(double p1, double p2, int k) {
  if (k < 1) throw std::invalid_argument("composition order k must be >= 1");
  if (!(p2 > 0.0 && p1 > p2 && p1 < 1.0))
    throw std::invalid_argument("need 0 < p2 < p1 < 1");
  double num = std::log((std::pow(p1, k) + 1.0) / 2.0);
  double den = std::log((std::pow(p2, k) + 1.0) / 2.0);
  return num / den;
}

TradeoffReport budget_report(FamilyKind kind, const PrivacyBudget& budget,
                             double c) {
  if (!(c > 0.0 && c < 1.0))
    throw std::invalid_argument("approximation factor c must lie in (0, 1)");
  TradeoffReport r;
  r.k = required_k(kind, budget);
  r.f_noise = noise::required_f(kind, budget);
  r.p1 = lsh::base_collision(kind, budget.s0);
  r.p2 = lsh::base_collision(kind, c * budget.s0);
  r.rho_prime_raw = rho_prime(r.p1, r.p2, r.k);
  r.rho_prime_rehashed =
      rho_prime((r.p1 + 1.0) / 2.0, (r.p2 + 1.0) / 2.0, r.k);
  r.mi_bound_bits_per_bit = triangulation_info_bound(1, budget.epsilon);
  return r;
}

}  // namespace slsi::secure
