#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "slsi/embedding.hpp"

namespace slsi::index {

// Banded hash tables over l-bit embeddings. Each table keys on a random
// b-subset of bit positions; a query probes one bucket per table and ranks
// the union of candidates by exact Hamming distance.
struct IndexParams {
  int tables = 16;          // T
  int band_bits = 16;       // b, bits per table key
  int top_k = 10;           // result count when no threshold is set
  std::optional<int> hamming_threshold;  // keep all hits within this distance
  size_t candidate_cap = 0;              // 0 -> 10 * top_k

  size_t effective_cap() const {
    return candidate_cap ? candidate_cap : size_t(10) * size_t(top_k);
  }
};

struct QueryHit {
  uint64_t id = 0;
  int distance = 0;
};

struct QueryResult {
  std::vector<QueryHit> hits;     // ascending distance, ties by ascending id
  size_t candidates_examined = 0; // distinct candidates gathered from buckets
  bool overflow = false;          // candidate cap reached before all probes
};

// Exact full-scan ranking with the same (distance, id) tie-break; the
// reference the index is checked against, and the ranking used by the
// precision-recall experiments. top_k = 0 ranks everything.
std::vector<QueryHit> brute_force_rank(
    const std::vector<std::pair<uint64_t, BitEmbedding>>& entries,
    const BitEmbedding& q, size_t top_k);

class HammingIndex {
 public:
  // Builds T tables over the given embeddings. All embeddings must share a
  // scheme and satisfy l >= b. Deterministic given `seed`.
  static HammingIndex build(
      const std::vector<std::pair<uint64_t, BitEmbedding>>& embeddings,
      const IndexParams& params, uint64_t seed);

  void insert(uint64_t id, const BitEmbedding& embedding);

  QueryResult query(const BitEmbedding& q, const IndexParams& params) const;
  QueryResult query(const BitEmbedding& q) const { return query(q, params_); }

  size_t size() const noexcept { return store_.size(); }
  int bit_length() const noexcept { return length_; }
  uint64_t scheme_id() const noexcept { return scheme_id_; }
  const IndexParams& params() const noexcept { return params_; }
  const std::vector<std::vector<int>>& band_positions() const noexcept {
    return positions_;
  }

  // Versioned binary file: header {magic "SLSI", version, l, T, b,
  // scheme_id}, then per-table bit subsets and bucket postings, then the
  // embedding store. Little-endian, 64-bit ids.
  void save(const std::string& path) const;
  static HammingIndex load(const std::string& path);

 private:
  HammingIndex() = default;
  void bind_scheme(const BitEmbedding& e);
  uint64_t band_key(const BitEmbedding& e, int table) const;

  IndexParams params_;
  uint64_t seed_ = 0;
  int length_ = 0;
  uint64_t scheme_id_ = 0;
  bool scheme_bound_ = false;  // set once the first embedding arrives
  std::vector<std::vector<int>> positions_;  // per-table sorted bit subset
  std::vector<std::unordered_map<uint64_t, std::vector<uint64_t>>> tables_;
  std::map<uint64_t, BitEmbedding> store_;
};

}  // namespace slsi::index
