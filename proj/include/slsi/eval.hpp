#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "slsi/hamming_index.hpp"
#include "slsi/noise_baseline.hpp"
#include "slsi/scheme.hpp"
#include "slsi/triangulation_attack.hpp"
#include "slsi/types.hpp"

namespace slsi::eval {

struct Dataset {
  std::string name;
  int dim = 0;  // dense attribute count; 0 for set-valued data
  bool normalized = false;
  std::vector<std::pair<uint64_t, AttributeVector>> rows;  // unique ids

  size_t size() const noexcept { return rows.size(); }
};

struct CsvSchema {
  bool set_valued = false;  // second column holds ';'-separated element ids
  bool normalize = false;   // unit-normalize dense rows after parsing
};

// CSV with a header whose first column is `id`. Dense files carry one
// numeric column per attribute; set-valued files a single `elements`
// column. Parse errors name the offending row and column.
Dataset load_csv(const std::string& path, const CsvSchema& schema = {});
void save_csv(const Dataset& ds, const std::string& path);

// One group of planted clusters. Members share a random unit center;
// pairwise intra-cluster cosine is guaranteed >= `cosine`, spread up
// towards `cosine_max`. A group of size 2 with cosine_max == cosine plants
// a pair at that exact cosine.
struct ClusterGroup {
  int count = 1;
  int size = 2;
  double cosine = 0.95;
  double cosine_max = 1.0;
};

struct ClusterSpec {
  std::vector<ClusterGroup> groups;
};

// n unit vectors in `dim` dimensions: planted clusters per the spec, the
// remainder uniform on the sphere. Deterministic given `seed`.
Dataset synth_dataset(int n, int dim, const ClusterSpec& spec, uint64_t seed);

// Exact brute-force gold standard: for each query, the base ids with
// cosine similarity >= threshold (inclusive).
std::map<uint64_t, std::vector<uint64_t>> gold_neighbors(
    const std::vector<std::pair<uint64_t, AttributeVector>>& base,
    const std::vector<std::pair<uint64_t, AttributeVector>>& queries,
    double threshold);

// One scheme under evaluation.
struct SchemeCell {
  enum class Kind { Vanilla, Secure, NoiseSigma, NoiseFlip, TrueSim };
  Kind kind = Kind::Vanilla;
  int k = 1;          // Secure
  double sigma = 0.0; // NoiseSigma
  double f = 0.0;     // NoiseFlip

  std::string label() const;
  double param() const;
};

struct ExperimentSpec {
  FamilyKind family{Family::SimHash, ProjectionStyle::Rademacher};
  std::vector<SchemeCell> cells;
  int l = 64;
  double gold_threshold = 0.95;
  double query_fraction = 0.2;
  std::vector<uint64_t> seeds = {1};
  // Attack-experiment knobs.
  int attack_dim = 50;
  int attack_l = 1024;
  int attack_trials = 100;
  attack::PocsParams attack_pocs{400, 1e-9, 3};

  void validate() const;
  static ExperimentSpec from_config_file(const std::string& path);
};

struct PrPoint {
  size_t depth = 0;
  double recall = 0.0;
  double precision = 0.0;
};

struct PrCurve {
  std::string scheme;
  double param = 0.0;
  uint64_t seed = 0;
  std::vector<PrPoint> points;      // swept over every depth 1..n_train
  double average_precision = 0.0;   // mean AP over queries with gold
  size_t queries_with_gold = 0;
  size_t queries_total = 0;
};

// Full-scan Hamming ranking per query, swept over every depth; macro
// averaged precision/recall over queries with non-empty gold sets.
std::vector<PrCurve> pr_experiment(const Dataset& ds,
                                   const ExperimentSpec& spec);

// Triangulation attacks across the scheme grid, one report per
// (cell, seed), plus the shared random-guess baseline inside each report.
std::vector<attack::AttackReport> attack_experiment(
    const ExperimentSpec& spec);

void write_pr_csv(const std::vector<PrCurve>& curves,
                  const std::string& path);
void write_attack_csv(const std::vector<attack::AttackReport>& reports,
                      const std::string& path);

// Embeddings for one cell over a set of rows. The master seed is derived
// from (seed, cell); noise cells re-sample per row id.
std::vector<std::pair<uint64_t, BitEmbedding>> embed_rows(
    const std::vector<std::pair<uint64_t, AttributeVector>>& rows,
    const SchemeCell& cell, const ExperimentSpec& spec, uint64_t seed);

}  // namespace slsi::eval
