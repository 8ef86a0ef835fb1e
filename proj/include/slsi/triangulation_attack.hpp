#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "slsi/embedding.hpp"
#include "slsi/lsh_core.hpp"
#include "slsi/types.hpp"

namespace slsi::attack {

// Reconstruction of a target attribute vector from its public embedding:
// estimate Euclidean distances to random probe points by inverting the
// collision curve, then intersect the probe-centered spheres by cyclic
// projection.

struct DistanceEstimate {
  double distance = 0.0;  // Euclidean, unit-norm convention, in [0, 2]
  bool saturated = false; // match fraction carried no distance information
};

// d = sqrt(2 - 2 s_hat) with s_hat the estimated cosine similarity.
DistanceEstimate estimate_distance(const BitEmbedding& target,
                                   const BitEmbedding& probe, FamilyKind kind,
                                   int k);

struct Sphere {
  std::vector<double> center;
  double radius = 0.0;
};

// Nearest point on the sphere; the degenerate t == center case resolves to
// a fixed direction along the first axis.
std::vector<double> project_onto_sphere(const std::vector<double>& t,
                                        const std::vector<double>& center,
                                        double radius);

struct ProbeSet {
  std::vector<Sphere> spheres;  // one per usable (non-saturated) probe
  int dim = 0;
};

struct PocsParams {
  int max_iterations = 10000;  // full projection cycles
  double tolerance = 1e-8;     // displacement per cycle
  int restarts = 5;
};

struct PocsResult {
  std::vector<double> point;
  bool converged = false;
  double max_violation = 0.0;  // max_i | |t - X_i| - d_i | at the iterate
  int iterations = 0;          // cycles spent in the winning restart
};

// Cyclic projection onto the probe spheres from random unit starts; keeps
// the restart with the smallest maximum constraint violation. With no
// spheres the start itself is returned.
PocsResult pocs(const ProbeSet& probes, const PocsParams& params,
                uint64_t seed);

// The adversary's interface to the system: it may embed chosen vectors
// (the nonce lets stochastic schemes re-sample noise per call).
using EmbedOracle =
    std::function<BitEmbedding(const std::vector<double>&, uint64_t nonce)>;

struct AttackParams {
  int dim = 50;
  int trials = 100;
  int probes = 0;  // 0 -> dim + 1
  PocsParams pocs;
  uint64_t seed = 1;
  int baseline_samples = 2000;
  // Sampler for targets; defaults to uniform unit vectors.
  std::function<std::vector<double>(uint64_t trial_seed)> target_sampler;
};

struct AttackReport {
  std::string scheme;   // descriptor: family, k or f/sigma, l
  int l = 0;
  int trials = 0;
  std::vector<double> errors;  // per-trial |q_hat - q|, unit-normalized
  double mean_error = 0.0;
  double stddev_error = 0.0;
  double baseline_mean = 0.0;  // random-guess distance between unit vectors
  double baseline_stddev = 0.0;
  int saturated_trials = 0;    // trials where every probe was saturated

  std::string to_json_string() const;
};

// Runs `trials` independent attacks. Per trial: sample a target, embed it,
// embed `probes` random unit probe points through the oracle, estimate the
// distances (dropping saturated ones), run POCS, and record the error of
// the unit-normalized reconstruction. Only the embeddings, the oracle, and
// the model (family, k) are visible to the attacker.
AttackReport run_attack(const EmbedOracle& oracle, FamilyKind model_kind,
                        int model_k, int l, const AttackParams& params,
                        const std::string& scheme_name);

double mean(const std::vector<double>& v);
double stddev(const std::vector<double>& v);

}  // namespace slsi::attack
