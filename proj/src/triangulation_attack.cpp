#include "slsi/triangulation_attack.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include <json.hpp>

#include "slsi/rng.hpp"

namespace slsi::attack {

DistanceEstimate estimate_distance(const BitEmbedding& target,
                                   const BitEmbedding& probe, FamilyKind kind,
                                   int k) {
  auto est = lsh::estimate_similarity(target, probe, kind, k);
  double s = std::clamp(est.value, -1.0, 1.0);
  return {std::sqrt(std::max(0.0, 2.0 - 2.0 * s)), est.saturated};
}

std::vector<double> project_onto_sphere(const std::vector<double>& t,
                                        const std::vector<double>& center,
                                        double radius) {
  if (radius <= 0.0) throw std::invalid_argument("radius must be positive");
  if (t.size() != center.size())
    throw std::invalid_argument("dimension mismatch");
  std::vector<double> d(t.size());
  double n2 = 0.0;
  for (size_t i = 0; i < t.size(); ++i) {
    d[i] = t[i] - center[i];
    n2 += d[i] * d[i];
  }
  std::vector<double> out(center);
  if (n2 == 0.0) {
    out[0] += radius;  // degenerate: pick a fixed direction
    return out;
  }
  double scale = radius / std::sqrt(n2);
  for (size_t i = 0; i < t.size(); ++i) out[i] += d[i] * scale;
  return out;
}

namespace {

double max_violation(const std::vector<double>& t, const ProbeSet& probes) {
  double worst = 0.0;
  for (const auto& s : probes.spheres) {
    double n2 = 0.0;
    for (size_t i = 0; i < t.size(); ++i) {
      double d = t[i] - s.center[i];
      n2 += d * d;
    }
    worst = std::max(worst, std::fabs(std::sqrt(n2) - s.radius));
  }
  return worst;
}

// Linearized multilateration: subtracting sphere equations pairwise turns
// |t - X_i| = d_i into a linear system. Its least-squares solution seeds
// the projection cycle; in shallow intersection valleys a random start can
// take the cyclic projections an impractical number of cycles to traverse.
std::optional<std::vector<double>> least_squares_start(const ProbeSet& probes) {
  const auto& s = probes.spheres;
  const int dim = probes.dim;
  if (s.size() < 2) return std::nullopt;

  auto sqnorm = [&](const std::vector<double>& v) {
    double n = 0.0;
    for (double c : v) n += c * c;
    return n;
  };
  const double c0 = sqnorm(s[0].center);
  const double r0 = s[0].radius * s[0].radius;

  // Normal equations N t = y for rows 2 (X_0 - X_i) . t = rhs_i.
  std::vector<double> N(size_t(dim) * dim, 0.0), y(dim, 0.0), row(dim);
  for (size_t i = 1; i < s.size(); ++i) {
    for (int d = 0; d < dim; ++d)
      row[d] = 2.0 * (s[0].center[d] - s[i].center[d]);
    double rhs = (s[i].radius * s[i].radius - r0) - sqnorm(s[i].center) + c0;
    for (int a = 0; a < dim; ++a) {
      for (int b = 0; b < dim; ++b) N[size_t(a) * dim + b] += row[a] * row[b];
      y[a] += row[a] * rhs;
    }
  }
  double trace = 0.0;
  for (int d = 0; d < dim; ++d) trace += N[size_t(d) * dim + d];
  double ridge = 1e-10 * (trace / dim) + 1e-300;
  for (int d = 0; d < dim; ++d) N[size_t(d) * dim + d] += ridge;

  // Gaussian elimination with partial pivoting.
  std::vector<int> perm(dim);
  for (int d = 0; d < dim; ++d) perm[d] = d;
  for (int col = 0; col < dim; ++col) {
    int pivot = col;
    for (int r = col + 1; r < dim; ++r)
      if (std::fabs(N[size_t(r) * dim + col]) >
          std::fabs(N[size_t(pivot) * dim + col]))
        pivot = r;
    if (std::fabs(N[size_t(pivot) * dim + col]) < 1e-300) return std::nullopt;
    if (pivot != col) {
      for (int c = 0; c < dim; ++c)
        std::swap(N[size_t(pivot) * dim + c], N[size_t(col) * dim + c]);
      std::swap(y[pivot], y[col]);
    }
    for (int r = col + 1; r < dim; ++r) {
      double f = N[size_t(r) * dim + col] / N[size_t(col) * dim + col];
      if (f == 0.0) continue;
      for (int c = col; c < dim; ++c)
        N[size_t(r) * dim + c] -= f * N[size_t(col) * dim + c];
      y[r] -= f * y[col];
    }
  }
  std::vector<double> t(dim);
  for (int r = dim - 1; r >= 0; --r) {
    double acc = y[r];
    for (int c = r + 1; c < dim; ++c) acc -= N[size_t(r) * dim + c] * t[c];
    t[r] = acc / N[size_t(r) * dim + r];
    if (!std::isfinite(t[r])) return std::nullopt;
  }
  return t;
}

}  // namespace

PocsResult pocs(const ProbeSet& probes, const PocsParams& params,
                uint64_t seed) {
  if (params.max_iterations < 1)
    throw std::invalid_argument("max_iterations must be >= 1");
  if (params.tolerance <= 0.0)
    throw std::invalid_argument("tolerance must be positive");
  if (probes.dim < 1) throw std::invalid_argument("dimension must be >= 1");
  for (const auto& s : probes.spheres) {
    if ((int)s.center.size() != probes.dim)
      throw std::invalid_argument("sphere dimension mismatch");
    if (!std::isfinite(s.radius) || s.radius < 0.0)
      throw std::invalid_argument("sphere radius must be finite and >= 0");
  }

  PocsResult best;
  auto ls = least_squares_start(probes);
  int restarts = std::max(1, params.restarts) + (ls ? 1 : 0);
  for (int r = 0; r < restarts; ++r) {
    SplitMix64 g(prf(seed, seed_domain::kTrial, r));
    std::vector<double> t =
        (ls && r == restarts - 1) ? *ls : g.unit_vector(probes.dim);
    bool converged = probes.spheres.empty();
    int cycles = 0;
    for (int it = 0; it < params.max_iterations && !probes.spheres.empty();
         ++it) {
      std::vector<double> prev = t;
      for (const auto& s : probes.spheres) {
        if (s.radius == 0.0) {
          t = s.center;
          continue;
        }
        t = project_onto_sphere(t, s.center, s.radius);
      }
      cycles = it + 1;
      double disp2 = 0.0;
      for (size_t i = 0; i < t.size(); ++i) {
        double d = t[i] - prev[i];
        disp2 += d * d;
      }
      if (std::sqrt(disp2) < params.tolerance) {
        converged = true;
        break;
      }
    }
    double viol = max_violation(t, probes);
    if (r == 0 || viol < best.max_violation) {
      best.point = std::move(t);
      best.converged = converged;
      best.max_violation = viol;
      best.iterations = cycles;
    }
  }
  return best;
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / double(v.size());
}

double stddev(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / double(v.size() - 1));
}

std::string AttackReport::to_json_string() const {
  nlohmann::json j;
  j["scheme"] = scheme;
  j["l"] = l;
  j["trials"] = trials;
  j["mean_error"] = mean_error;
  j["stddev_error"] = stddev_error;
  j["baseline_mean"] = baseline_mean;
  j["baseline_stddev"] = baseline_stddev;
  j["saturated_trials"] = saturated_trials;
  j["errors"] = errors;
  return j.dump(2);
}

AttackReport run_attack(const EmbedOracle& oracle, FamilyKind model_kind,
                        int model_k, int l, const AttackParams& params,
                        const std::string& scheme_name) {
  if (params.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (params.dim < 2) throw std::invalid_argument("dimension must be >= 2");
  int probes = params.probes > 0 ? params.probes : params.dim + 1;
  if (probes < 2) throw std::invalid_argument("need at least two probes");

  AttackReport rep;
  rep.scheme = scheme_name;
  rep.l = l;
  rep.trials = params.trials;

  uint64_t nonce = 0;
  for (int trial = 0; trial < params.trials; ++trial) {
    uint64_t trial_seed = prf(params.seed, seed_domain::kTrial, trial);
    SplitMix64 g(trial_seed);

    std::vector<double> q = params.target_sampler
                                ? params.target_sampler(trial_seed)
                                : g.unit_vector(params.dim);
    BitEmbedding target = oracle(q, nonce++);

    ProbeSet set;
    set.dim = params.dim;
    int usable = 0;
    for (int i = 0; i < probes; ++i) {
      std::vector<double> x = g.unit_vector(params.dim);
      BitEmbedding pe = oracle(x, nonce++);
      auto est = estimate_distance(target, pe, model_kind, model_k);
      if (est.saturated) continue;  // no information below the flat tail
      ++usable;
      set.spheres.push_back({std::move(x), std::max(est.distance, 1e-12)});
    }
    if (usable == 0) ++rep.saturated_trials;

    auto sol = pocs(set, params.pocs, prf(trial_seed, 0x9e37));
    // Only the direction is recoverable; normalize before scoring.
    double n = 0.0;
    for (double c : sol.point) n += c * c;
    std::vector<double> qh = sol.point;
    if (n > 0.0) {
      double inv = 1.0 / std::sqrt(n);
      for (double& c : qh) c *= inv;
    } else {
      qh.assign(params.dim, 0.0);
      qh[0] = 1.0;
    }
    double err2 = 0.0;
    for (int i = 0; i < params.dim; ++i) {
      double d = qh[i] - q[i];
      err2 += d * d;
    }
    rep.errors.push_back(std::sqrt(err2));
  }

  rep.mean_error = mean(rep.errors);
  rep.stddev_error = stddev(rep.errors);

  // Random-guess baseline: distance between two independent unit vectors.
  SplitMix64 g(prf(params.seed, seed_domain::kTrial, 0xba5e));
  std::vector<double> base;
  base.reserve(params.baseline_samples);
  for (int i = 0; i < params.baseline_samples; ++i) {
    auto u = g.unit_vector(params.dim);
    auto v = g.unit_vector(params.dim);
    double d2 = 0.0;
    for (int j = 0; j < params.dim; ++j) {
      double d = u[j] - v[j];
      d2 += d * d;
    }
    base.push_back(std::sqrt(d2));
  }
  rep.baseline_mean = mean(base);
  rep.baseline_stddev = stddev(base);
  return rep;
}

}  // namespace slsi::attack
