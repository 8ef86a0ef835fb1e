#include "slsi/noise_baseline.hpp"

#include <cmath>
#include <stdexcept>

#include "slsi/secure_transform.hpp"

namespace slsi::noise {

void NoiseParams::validate() const {
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("f must lie in [0, 1]");
  if (sigma < 0.0) throw std::invalid_argument("sigma must be >= 0");
}

int corrupt_bit(int b, const NoiseParams& params, uint64_t trial_id) {
  params.validate();
  uint64_t draw = prf(params.seed, seed_domain::kNoiseFlip, trial_id, 0);
  double u = double(draw >> 11) * 0x1.0p-53;
  if (u < params.f) {
    uint64_t r = prf(params.seed, seed_domain::kNoiseFlip, trial_id, 1);
    return int(r & 1);
  }
  return b;
}

BitEmbedding noisy_embed(const AttributeVector& x, const SchemeConfig& cfg,
                         const NoiseParams& params, uint64_t nonce) {
  cfg.validate();
  params.validate();
  if (cfg.k != 1)
    throw std::invalid_argument("noise baseline requires k == 1");

  BitEmbedding e(cfg.l, cfg.scheme_id());
  if (params.mode == NoiseMode::BitFlip) {
    for (int i = 0; i < cfg.l; ++i) {
      int b = lsh::vanilla_bit(x, cfg, i);
      uint64_t tid = prf(nonce, seed_domain::kTrial, i);
      e.set_bit(i, corrupt_bit(b, params, tid));
    }
    return e;
  }

  // Projection noise. The noise scale is defined against the unit-normalized
  // input, so the perturbation of the raw projection is sigma * |x|; at
  // sigma = 0 the arithmetic is identical to the vanilla sign bit.
  if (cfg.kind.family != Family::SimHash)
    throw std::invalid_argument("mode requires SimHash");
  double scale = params.sigma * norm(x.coords());
  for (int i = 0; i < cfg.l; ++i) {
    uint64_t s = derive_seed(cfg.master_seed, seed_domain::kProjection, i, 0);
    double proj = lsh::projection_value(x, s, cfg.kind.style);
    if (params.sigma > 0.0) {
      SplitMix64 gn(prf(params.seed, seed_domain::kNoiseGauss, nonce, i));
      proj += scale * gn.gaussian();
    }
    e.set_bit(i, proj >= 0.0);
  }
  return e;
}

double noisy_collision(FamilyKind kind, double sim, double f) {
  if (!(f >= 0.0 && f <= 1.0))
    throw std::invalid_argument("f must lie in [0, 1]");
  return (1.0 - f) * lsh::collision_model(kind, sim, 1) + f / 2.0;
}

double required_f(FamilyKind kind, const secure::PrivacyBudget& budget) {
  budget.validate(kind);
  double p = lsh::collision_model(kind, budget.s0, 1);
  if (p <= 0.5)
    throw std::invalid_argument("already secure at f = 0");
  return std::max(0.0, 1.0 - budget.epsilon / (p - 0.5));
}

}  // namespace slsi::noise
