#include "slsi/hamming_index.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "slsi/rng.hpp"

namespace slsi::index {

namespace {

void check_params(const IndexParams& p) {
  if (p.tables < 1) throw std::invalid_argument("table count must be >= 1");
  if (p.band_bits < 1) throw std::invalid_argument("band width must be >= 1");
  if (p.top_k < 1) throw std::invalid_argument("top_k must be >= 1");
}

// Little-endian primitives; the on-disk format is byte-order independent.
void put_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  os.write(b, 4);
}
void put_u64(std::ostream& os, uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = char((v >> (8 * i)) & 0xff);
  os.write(b, 8);
}
uint32_t get_u32(std::istream& is) {
  unsigned char b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw std::runtime_error("truncated index file");
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= uint32_t(b[i]) << (8 * i);
  return v;
}
uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw std::runtime_error("truncated index file");
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= uint64_t(b[i]) << (8 * i);
  return v;
}

}  // namespace

std::vector<QueryHit> brute_force_rank(
    const std::vector<std::pair<uint64_t, BitEmbedding>>& entries,
    const BitEmbedding& q, size_t top_k) {
  std::vector<QueryHit> hits;
  hits.reserve(entries.size());
  for (const auto& [id, e] : entries)
    hits.push_back({id, hamming_distance(e, q)});
  std::sort(hits.begin(), hits.end(), [](const QueryHit& a, const QueryHit& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  });
  if (top_k && hits.size() > top_k) hits.resize(top_k);
  return hits;
}

HammingIndex HammingIndex::build(
    const std::vector<std::pair<uint64_t, BitEmbedding>>& embeddings,
    const IndexParams& params, uint64_t seed) {
  check_params(params);
  HammingIndex idx;
  idx.params_ = params;
  idx.tables_.resize(params.tables);
  idx.seed_ = seed;
  for (const auto& [id, e] : embeddings) idx.insert(id, e);
  return idx;
}

void HammingIndex::bind_scheme(const BitEmbedding& e) {
  if (params_.band_bits > e.length())
    throw std::invalid_argument("band width exceeds embedding length");
  length_ = e.length();
  scheme_id_ = e.scheme_id();
  scheme_bound_ = true;
  // Sample each table's bit subset without replacement.
  positions_.resize(params_.tables);
  std::vector<int> all(length_);
  for (int t = 0; t < params_.tables; ++t) {
    std::iota(all.begin(), all.end(), 0);
    SplitMix64 g(prf(seed_, seed_domain::kTrial, t));
    for (int j = 0; j < params_.band_bits; ++j) {
      int pick = j + int(g.next() % uint64_t(length_ - j));
      std::swap(all[j], all[pick]);
    }
    positions_[t].assign(all.begin(), all.begin() + params_.band_bits);
    std::sort(positions_[t].begin(), positions_[t].end());
  }
}

uint64_t HammingIndex::band_key(const BitEmbedding& e, int table) const {
  const auto& pos = positions_[table];
  if (pos.size() <= 64) {
    uint64_t key = 0;
    for (size_t j = 0; j < pos.size(); ++j)
      key |= uint64_t(e.bit(pos[j])) << j;
    return key;
  }
  // Wide bands: chain the packed words through the mixer.
  uint64_t key = 0x53'4c'53'49;  // arbitrary nonzero start
  uint64_t word = 0;
  int fill = 0;
  for (int p : pos) {
    word |= uint64_t(e.bit(p)) << fill;
    if (++fill == 64) {
      key = prf(key, word);
      word = 0;
      fill = 0;
    }
  }
  if (fill) key = prf(key, word);
  return key;
}

void HammingIndex::insert(uint64_t id, const BitEmbedding& embedding) {
  if (!scheme_bound_) bind_scheme(embedding);
  if (embedding.scheme_id() != scheme_id_ || embedding.length() != length_)
    throw std::invalid_argument("scheme mismatch");
  if (store_.count(id)) throw std::invalid_argument("id exists");
  store_.emplace(id, embedding);
  for (int t = 0; t < params_.tables; ++t)
    tables_[t][band_key(embedding, t)].push_back(id);
}

QueryResult HammingIndex::query(const BitEmbedding& q,
                                const IndexParams& params) const {
  QueryResult res;
  if (!scheme_bound_) return res;  // empty index matches nothing
  if (q.scheme_id() != scheme_id_ || q.length() != length_)
    throw std::invalid_argument("scheme mismatch");

  const size_t cap = params.effective_cap();
  std::vector<uint64_t> candidates;
  std::unordered_set<uint64_t> seen;
  for (int t = 0; t < params_.tables && !res.overflow; ++t) {
    auto it = tables_[t].find(band_key(q, t));
    if (it == tables_[t].end()) continue;
    for (uint64_t id : it->second) {
      if (!seen.insert(id).second) continue;
      if (candidates.size() == cap) {
        res.overflow = true;
        break;
      }
      candidates.push_back(id);
    }
  }
  res.candidates_examined = candidates.size();

  res.hits.reserve(candidates.size());
  for (uint64_t id : candidates)
    res.hits.push_back({id, hamming_distance(store_.at(id), q)});
  std::sort(res.hits.begin(), res.hits.end(),
            [](const QueryHit& a, const QueryHit& b) {
              return a.distance != b.distance ? a.distance < b.distance
                                              : a.id < b.id;
            });
  if (params.hamming_threshold) {
    auto cut = std::partition_point(
        res.hits.begin(), res.hits.end(), [&](const QueryHit& h) {
          return h.distance <= *params.hamming_threshold;
        });
    res.hits.erase(cut, res.hits.end());
  } else if (res.hits.size() > size_t(params.top_k)) {
    res.hits.resize(params.top_k);
  }
  return res;
}

void HammingIndex::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write("SLSI", 4);
  put_u32(os, 1);  // version
  put_u32(os, uint32_t(length_));
  put_u32(os, uint32_t(params_.tables));
  put_u32(os, uint32_t(params_.band_bits));
  put_u64(os, scheme_id_);

  put_u32(os, uint32_t(params_.top_k));
  put_u32(os, params_.hamming_threshold ? 1 : 0);
  put_u32(os, uint32_t(params_.hamming_threshold.value_or(0)));
  put_u64(os, params_.candidate_cap);
  put_u64(os, seed_);
  put_u32(os, scheme_bound_ ? 1 : 0);

  if (scheme_bound_) {
    for (const auto& pos : positions_)
      for (int p : pos) put_u32(os, uint32_t(p));
    for (const auto& table : tables_) {
      // Sorted bucket keys keep the file a deterministic function of content.
      std::vector<uint64_t> keys;
      keys.reserve(table.size());
      for (const auto& [k, v] : table) keys.push_back(k);
      std::sort(keys.begin(), keys.end());
      put_u64(os, keys.size());
      for (uint64_t k : keys) {
        const auto& ids = table.at(k);
        put_u64(os, k);
        put_u64(os, ids.size());
        for (uint64_t id : ids) put_u64(os, id);
      }
    }
  }
  put_u64(os, store_.size());
  for (const auto& [id, e] : store_) {
    put_u64(os, id);
    for (uint64_t w : e.words()) put_u64(os, w);
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

HammingIndex HammingIndex::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::string(magic, 4) != "SLSI")
    throw std::runtime_error("bad magic: not an index file");
  uint32_t version = get_u32(is);
  if (version != 1) throw std::runtime_error("unsupported index version");

  HammingIndex idx;
  idx.length_ = int(get_u32(is));
  idx.params_.tables = int(get_u32(is));
  idx.params_.band_bits = int(get_u32(is));
  idx.scheme_id_ = get_u64(is);

  idx.params_.top_k = int(get_u32(is));
  bool has_threshold = get_u32(is) != 0;
  uint32_t threshold = get_u32(is);
  if (has_threshold) idx.params_.hamming_threshold = int(threshold);
  idx.params_.candidate_cap = get_u64(is);
  idx.seed_ = get_u64(is);
  idx.scheme_bound_ = get_u32(is) != 0;

  idx.tables_.resize(idx.params_.tables);
  if (idx.scheme_bound_) {
    idx.positions_.resize(idx.params_.tables);
    for (auto& pos : idx.positions_) {
      pos.resize(idx.params_.band_bits);
      for (auto& p : pos) p = int(get_u32(is));
    }
    for (auto& table : idx.tables_) {
      uint64_t buckets = get_u64(is);
      table.reserve(buckets);
      for (uint64_t b = 0; b < buckets; ++b) {
        uint64_t key = get_u64(is);
        uint64_t count = get_u64(is);
        auto& ids = table[key];
        ids.resize(count);
        for (auto& id : ids) id = get_u64(is);
      }
    }
  }
  uint64_t n = get_u64(is);
  size_t words = (size_t(idx.length_) + 63) / 64;
  for (uint64_t i = 0; i < n; ++i) {
    uint64_t id = get_u64(is);
    std::vector<uint64_t> w(words);
    for (auto& x : w) x = get_u64(is);
    idx.store_.emplace(
        id, BitEmbedding::from_words(std::move(w), idx.length_, idx.scheme_id_));
  }
  return idx;
}

}  // namespace slsi::index
