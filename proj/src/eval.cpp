#include "slsi/eval.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "slsi/lsh_core.hpp"
#include "slsi/secure_transform.hpp"

namespace slsi::eval {

namespace {

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, size_t row, size_t col) {
  if (s.empty())
    throw std::runtime_error("row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": missing value");
  const char* b = s.data();
  const char* e = b + s.size();
  double v = 0.0;
  auto res = std::from_chars(b, e, v);
  if (res.ec != std::errc() || res.ptr != e)
    throw std::runtime_error("row " + std::to_string(row) + ", column " +
                             std::to_string(col) + ": non-numeric value '" +
                             s + "'");
  return v;
}

uint64_t parse_id(const std::string& s, size_t row) {
  uint64_t v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
    throw std::runtime_error("row " + std::to_string(row) +
                             ", column 1: invalid id '" + s + "'");
  return v;
}

}  // namespace

Dataset load_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  Dataset ds;
  ds.name = path;

  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("empty file: " + path);
  auto header = split_fields(line, ',');
  if (header.empty() || header[0] != "id")
    throw std::runtime_error("row 1: first column must be 'id'");
  size_t fields = header.size();
  if (fields < 2)
    throw std::runtime_error("row 1: need at least one attribute column");
  if (schema.set_valued && fields != 2)
    throw std::runtime_error("row 1: set-valued files have exactly 2 columns");
  ds.dim = schema.set_valued ? 0 : int(fields - 1);

  std::set<uint64_t> seen;
  size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    auto f = split_fields(line, ',');
    if (f.size() != fields)
      throw std::runtime_error("row " + std::to_string(row) + ": expected " +
                               std::to_string(fields) + " fields, got " +
                               std::to_string(f.size()));
    uint64_t id = parse_id(f[0], row);
    if (!seen.insert(id).second)
      throw std::runtime_error("row " + std::to_string(row) +
                               ": duplicate id " + std::to_string(id));
    if (schema.set_valued) {
      std::vector<uint64_t> elems;
      for (const auto& tok : split_fields(f[1], ';')) {
        if (tok.empty()) continue;
        uint64_t e = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), e);
        if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
          throw std::runtime_error("row " + std::to_string(row) +
                                   ", column 2: invalid element '" + tok +
                                   "'");
        elems.push_back(e);
      }
      if (elems.empty())
        throw std::runtime_error("row " + std::to_string(row) +
                                 ", column 2: missing value");
      ds.rows.emplace_back(id, AttributeVector::sparse(std::move(elems)));
    } else {
      std::vector<double> coords(fields - 1);
      for (size_t c = 1; c < fields; ++c)
        coords[c - 1] = parse_double(f[c], row, c + 1);
      if (schema.normalize) {
        double n = 0.0;
        for (double v : coords) n += v * v;
        if (n == 0.0)
          throw std::runtime_error("row " + std::to_string(row) +
                                   ": zero vector cannot be normalized");
        n = 1.0 / std::sqrt(n);
        for (double& v : coords) v *= n;
      }
      ds.rows.emplace_back(id, AttributeVector::dense(std::move(coords)));
    }
  }
  ds.normalized = schema.normalize;
  return ds;
}

void save_csv(const Dataset& ds, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  bool sparse = !ds.rows.empty() && ds.rows.front().second.is_sparse();
  if (sparse) {
    os << "id,elements\n";
    for (const auto& [id, v] : ds.rows) {
      os << id << ',';
      const auto& e = v.elements();
      for (size_t i = 0; i < e.size(); ++i)
        os << (i ? ";" : "") << e[i];
      os << '\n';
    }
  } else {
    os << "id";
    for (int d = 0; d < ds.dim; ++d) os << ",a" << d;
    os << '\n';
    for (const auto& [id, v] : ds.rows) {
      os << id;
      for (double c : v.coords()) os << ',' << fmt_double(c);
      os << '\n';
    }
  }
  if (!os) throw std::runtime_error("write failed: " + path);
}

namespace {

// Unit vector orthogonal to `c`, direction drawn from g.
std::vector<double> orthogonal_direction(const std::vector<double>& c,
                                         SplitMix64& g) {
  for (int attempt = 0; attempt < 64; ++attempt) {
    std::vector<double> r = g.unit_vector(int(c.size()));
    double proj = 0.0;
    for (size_t i = 0; i < c.size(); ++i) proj += r[i] * c[i];
    double n2 = 0.0;
    for (size_t i = 0; i < c.size(); ++i) {
      r[i] -= proj * c[i];
      n2 += r[i] * r[i];
    }
    if (n2 > 1e-12) {
      double inv = 1.0 / std::sqrt(n2);
      for (double& v : r) v *= inv;
      return r;
    }
  }
  throw std::runtime_error("failed to draw an orthogonal direction");
}

std::vector<std::vector<double>> make_cluster(const ClusterGroup& grp,
                                              int dim, SplitMix64& g) {
  std::vector<double> center = g.unit_vector(dim);

  if (grp.size == 2 && grp.cosine_max == grp.cosine) {
    // Planted pair at the exact target cosine.
    std::vector<double> u = orthogonal_direction(center, g);
    double ct = grp.cosine, st = std::sqrt(1.0 - ct * ct);
    std::vector<double> other(dim);
    for (int i = 0; i < dim; ++i) other[i] = ct * center[i] + st * u[i];
    return {center, other};
  }

  // Members at center-cosine sqrt(tau) so pairwise lands near tau; the
  // cross term of two orthogonal offsets is O(1/sqrt(dim)), absorbed by a
  // margin on the low end and checked below.
  double margin = 4.0 / std::sqrt(double(dim));
  double lo = std::min(grp.cosine_max, (grp.cosine + margin) / (1.0 + margin));
  double hi = grp.cosine_max;
  for (int attempt = 0; attempt < 50; ++attempt) {
    std::vector<std::vector<double>> members(grp.size);
    for (auto& m : members) {
      double tau = lo + (hi - lo) * g.uniform();
      double a = std::sqrt(tau), b = std::sqrt(1.0 - tau);
      std::vector<double> u = orthogonal_direction(center, g);
      m.resize(dim);
      for (int i = 0; i < dim; ++i) m[i] = a * center[i] + b * u[i];
    }
    bool ok = true;
    for (size_t i = 0; i < members.size() && ok; ++i)
      for (size_t j = i + 1; j < members.size() && ok; ++j)
        if (dot(members[i], members[j]) < grp.cosine - 1e-9) ok = false;
    if (ok) return members;
  }
  throw std::invalid_argument("infeasible cluster spec");
}

}  // namespace

Dataset synth_dataset(int n, int dim, const ClusterSpec& spec, uint64_t seed) {
  if (n < 1 || dim < 1)
    throw std::invalid_argument("n and dim must be >= 1");
  long planted = 0;
  for (const auto& grp : spec.groups) {
    if (grp.count < 1 || grp.size < 2)
      throw std::invalid_argument("infeasible cluster spec");
    if (!(grp.cosine > 0.0 && grp.cosine < 1.0) ||
        grp.cosine_max < grp.cosine || grp.cosine_max > 1.0)
      throw std::invalid_argument("infeasible cluster spec");
    planted += long(grp.count) * grp.size;
  }
  if (planted > n || (planted > 0 && dim < 2))
    throw std::invalid_argument("infeasible cluster spec");

  Dataset ds;
  ds.name = "synthetic";
  ds.dim = dim;
  ds.normalized = true;
  ds.rows.reserve(n);
  SplitMix64 g(prf(seed, seed_domain::kTrial, 0x5d));
  uint64_t id = 0;
  for (const auto& grp : spec.groups)
    for (int c = 0; c < grp.count; ++c)
      for (auto& m : make_cluster(grp, dim, g))
        ds.rows.emplace_back(id++, AttributeVector::dense(std::move(m)));
  while ((long)ds.rows.size() < n)
    ds.rows.emplace_back(id++, AttributeVector::dense(g.unit_vector(dim)));
  return ds;
}

std::map<uint64_t, std::vector<uint64_t>> gold_neighbors(
    const std::vector<std::pair<uint64_t, AttributeVector>>& base,
    const std::vector<std::pair<uint64_t, AttributeVector>>& queries,
    double threshold) {
  std::map<uint64_t, std::vector<uint64_t>> gold;
  for (const auto& [qid, qv] : queries) {
    auto& out = gold[qid];
    for (const auto& [bid, bv] : base)
      if (cosine_similarity(qv.coords(), bv.coords()) >= threshold)
        out.push_back(bid);
  }
  return gold;
}

std::string SchemeCell::label() const {
  switch (kind) {
    case Kind::Vanilla: return "vanilla";
    case Kind::Secure: return "secure-k";
    case Kind::NoiseSigma: return "noise-sigma";
    case Kind::NoiseFlip: return "noise-f";
    case Kind::TrueSim: return "true-sim";
  }
  return "?";
}

double SchemeCell::param() const {
  switch (kind) {
    case Kind::Secure: return k;
    case Kind::NoiseSigma: return sigma;
    case Kind::NoiseFlip: return f;
    default: return 0.0;
  }
}

void ExperimentSpec::validate() const {
  if (cells.empty()) throw std::invalid_argument("scheme grid is empty");
  if (l < 1) throw std::invalid_argument("l must be >= 1");
  if (!(query_fraction > 0.0 && query_fraction < 1.0))
    throw std::invalid_argument("split fraction must lie in (0, 1)");
  if (seeds.empty()) throw std::invalid_argument("need at least one seed");
}

namespace {

uint64_t cell_stream(const SchemeCell& cell, uint64_t seed) {
  uint64_t h = prf(seed, 0xce11, uint64_t(cell.kind), uint64_t(cell.k));
  uint64_t s, f;
  static_assert(sizeof(double) == 8);
  std::memcpy(&s, &cell.sigma, 8);
  std::memcpy(&f, &cell.f, 8);
  return prf(h, s, f);
}

}  // namespace

std::vector<std::pair<uint64_t, BitEmbedding>> embed_rows(
    const std::vector<std::pair<uint64_t, AttributeVector>>& rows,
    const SchemeCell& cell, const ExperimentSpec& spec, uint64_t seed) {
  SchemeConfig cfg;
  cfg.kind = spec.family;
  cfg.l = spec.l;
  cfg.k = cell.kind == SchemeCell::Kind::Secure ? cell.k : 1;
  cfg.master_seed = cell_stream(cell, seed);

  noise::NoiseParams np;
  np.seed = prf(cfg.master_seed, seed_domain::kNoiseFlip, 1);
  if (cell.kind == SchemeCell::Kind::NoiseSigma) {
    np.mode = noise::NoiseMode::ProjectionNoise;
    np.sigma = cell.sigma;
  } else if (cell.kind == SchemeCell::Kind::NoiseFlip) {
    np.mode = noise::NoiseMode::BitFlip;
    np.f = cell.f;
  }

  std::vector<std::pair<uint64_t, BitEmbedding>> out;
  out.reserve(rows.size());
  for (const auto& [id, v] : rows) {
    switch (cell.kind) {
      case SchemeCell::Kind::Vanilla:
        out.emplace_back(id, lsh::embed(v, cfg));
        break;
      case SchemeCell::Kind::Secure:
        out.emplace_back(id, secure::secure_embed(v, cfg));
        break;
      case SchemeCell::Kind::NoiseSigma:
      case SchemeCell::Kind::NoiseFlip:
        out.emplace_back(id, noise::noisy_embed(v, cfg, np, id));
        break;
      case SchemeCell::Kind::TrueSim:
        throw std::invalid_argument("true-sim control has no embedding");
    }
  }
  return out;
}

namespace {

struct SplitRows {
  std::vector<std::pair<uint64_t, AttributeVector>> train, query;
};

SplitRows split_dataset(const Dataset& ds, double query_fraction,
                        uint64_t seed) {
  std::vector<size_t> idx(ds.rows.size());
  std::iota(idx.begin(), idx.end(), 0);
  SplitMix64 g(prf(seed, seed_domain::kTrial, 0x5911));
  for (size_t i = idx.size() - 1; i > 0; --i)
    std::swap(idx[i], idx[g.next() % (i + 1)]);
  size_t n_query = std::max<size_t>(
      1, std::min(ds.rows.size() - 1,
                  size_t(std::llround(query_fraction * ds.rows.size()))));
  SplitRows s;
  for (size_t i = 0; i < idx.size(); ++i) {
    if (i < idx.size() - n_query)
      s.train.push_back(ds.rows[idx[i]]);
    else
      s.query.push_back(ds.rows[idx[i]]);
  }
  return s;
}

std::vector<uint64_t> true_sim_ranking(
    const std::vector<std::pair<uint64_t, AttributeVector>>& train,
    const AttributeVector& q) {
  std::vector<std::pair<double, uint64_t>> scored;
  scored.reserve(train.size());
  for (const auto& [id, v] : train)
    scored.emplace_back(-cosine_similarity(q.coords(), v.coords()), id);
  std::sort(scored.begin(), scored.end());
  std::vector<uint64_t> ids;
  ids.reserve(scored.size());
  for (auto& [s, id] : scored) ids.push_back(id);
  return ids;
}

}  // namespace

std::vector<PrCurve> pr_experiment(const Dataset& ds,
                                   const ExperimentSpec& spec) {
  spec.validate();
  if (ds.rows.size() < 2) throw std::invalid_argument("dataset too small");

  std::vector<PrCurve> curves;
  for (uint64_t seed : spec.seeds) {
    SplitRows split = split_dataset(ds, spec.query_fraction, seed);
    auto gold = gold_neighbors(split.train, split.query, spec.gold_threshold);
    size_t with_gold = 0;
    for (const auto& [qid, ids] : gold)
      if (!ids.empty()) ++with_gold;
    if (with_gold * 2 < split.query.size())
      std::fprintf(stderr,
                   "warning: only %zu of %zu queries have gold neighbors\n",
                   with_gold, split.query.size());

    const size_t n_train = split.train.size();
    for (const auto& cell : spec.cells) {
      PrCurve curve;
      curve.scheme = cell.label();
      curve.param = cell.param();
      curve.seed = seed;
      curve.queries_total = split.query.size();
      curve.queries_with_gold = with_gold;

      std::vector<std::pair<uint64_t, BitEmbedding>> train_embs, query_embs;
      if (cell.kind != SchemeCell::Kind::TrueSim) {
        train_embs = embed_rows(split.train, cell, spec, seed);
        query_embs = embed_rows(split.query, cell, spec, seed);
      }

      std::vector<double> sum_hits(n_train + 1, 0.0);
      std::vector<double> sum_recall(n_train + 1, 0.0);
      double ap_sum = 0.0;

      for (size_t qi = 0; qi < split.query.size(); ++qi) {
        uint64_t qid = split.query[qi].first;
        const auto& gset = gold.at(qid);
        if (gset.empty()) continue;
        std::set<uint64_t> gs(gset.begin(), gset.end());

        std::vector<uint64_t> ranking;
        if (cell.kind == SchemeCell::Kind::TrueSim) {
          ranking = true_sim_ranking(split.train, split.query[qi].second);
        } else {
          auto hits =
              index::brute_force_rank(train_embs, query_embs[qi].second, 0);
          ranking.reserve(hits.size());
          for (const auto& h : hits) ranking.push_back(h.id);
        }

        size_t cum = 0;
        double ap = 0.0;
        for (size_t d = 1; d <= n_train; ++d) {
          if (gs.count(ranking[d - 1])) {
            ++cum;
            ap += double(cum) / double(d);
          }
          sum_hits[d] += double(cum) / double(d);
          sum_recall[d] += double(cum) / double(gs.size());
        }
        ap_sum += ap / double(gs.size());
      }

      curve.points.resize(n_train);
      for (size_t d = 1; d <= n_train; ++d) {
        curve.points[d - 1] = {d, sum_recall[d] / double(with_gold),
                               sum_hits[d] / double(with_gold)};
      }
      curve.average_precision = ap_sum / double(with_gold);
      curves.push_back(std::move(curve));
    }
  }
  return curves;
}

std::vector<attack::AttackReport> attack_experiment(
    const ExperimentSpec& spec) {
  spec.validate();
  std::vector<attack::AttackReport> reports;
  for (uint64_t seed : spec.seeds) {
    for (const auto& cell : spec.cells) {
      if (cell.kind == SchemeCell::Kind::TrueSim) continue;

      SchemeConfig cfg;
      cfg.kind = spec.family;
      cfg.l = spec.attack_l;
      cfg.k = cell.kind == SchemeCell::Kind::Secure ? cell.k : 1;
      cfg.master_seed = cell_stream(cell, prf(seed, 0xa77ac4));

      noise::NoiseParams np;
      np.seed = prf(cfg.master_seed, seed_domain::kNoiseFlip, 2);
      if (cell.kind == SchemeCell::Kind::NoiseSigma) {
        np.mode = noise::NoiseMode::ProjectionNoise;
        np.sigma = cell.sigma;
      } else if (cell.kind == SchemeCell::Kind::NoiseFlip) {
        np.mode = noise::NoiseMode::BitFlip;
        np.f = cell.f;
      }

      attack::EmbedOracle oracle;
      if (cell.kind == SchemeCell::Kind::Vanilla) {
        oracle = [cfg](const std::vector<double>& v, uint64_t) {
          return lsh::embed(AttributeVector::dense(v), cfg);
        };
      } else if (cell.kind == SchemeCell::Kind::Secure) {
        oracle = [cfg](const std::vector<double>& v, uint64_t) {
          return secure::secure_embed(AttributeVector::dense(v), cfg);
        };
      } else {
        oracle = [cfg, np](const std::vector<double>& v, uint64_t nonce) {
          return noise::noisy_embed(AttributeVector::dense(v), cfg, np, nonce);
        };
      }

      attack::AttackParams ap;
      ap.dim = spec.attack_dim;
      ap.trials = spec.attack_trials;
      ap.pocs = spec.attack_pocs;
      ap.seed = prf(seed, 0xa77ac4, uint64_t(cell.kind), uint64_t(cell.k));

      int model_k = cell.kind == SchemeCell::Kind::Secure ? cell.k : 1;
      std::string name = cell.label();
      reports.push_back(attack::run_attack(oracle, spec.family, model_k,
                                           spec.attack_l, ap, name));
    }
  }
  return reports;
}

void write_pr_csv(const std::vector<PrCurve>& curves,
                  const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "scheme,param,seed,depth,recall,precision\n";
  for (const auto& c : curves)
    for (const auto& p : c.points)
      os << c.scheme << ',' << fmt_double(c.param) << ',' << c.seed << ','
         << p.depth << ',' << fmt_double(p.recall) << ','
         << fmt_double(p.precision) << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

void write_attack_csv(const std::vector<attack::AttackReport>& reports,
                      const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "scheme,l,trial,error,baseline_mean\n";
  for (const auto& r : reports)
    for (size_t t = 0; t < r.errors.size(); ++t)
      os << r.scheme << ',' << r.l << ',' << t << ','
         << fmt_double(r.errors[t]) << ',' << fmt_double(r.baseline_mean)
         << '\n';
  if (!os) throw std::runtime_error("write failed: " + path);
}

ExperimentSpec ExperimentSpec::from_config_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  ExperimentSpec spec;
  spec.cells.clear();
  std::string line;
  size_t row = 0;
  auto parse_list = [](const std::string& v) {
    std::vector<std::string> toks = split_fields(v, ',');
    return toks;
  };
  while (std::getline(is, line)) {
    ++row;
    if (line.empty() || line[0] == '#') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config row " + std::to_string(row) +
                               ": expected key=value");
    std::string key = line.substr(0, eq), val = line.substr(eq + 1);
    if (key == "family") {
      spec.family.family = family_from_string(val);
    } else if (key == "style") {
      spec.family.style = style_from_string(val);
    } else if (key == "l") {
      spec.l = std::stoi(val);
    } else if (key == "gold_threshold") {
      spec.gold_threshold = std::stod(val);
    } else if (key == "query_fraction") {
      spec.query_fraction = std::stod(val);
    } else if (key == "seeds") {
      spec.seeds.clear();
      for (const auto& t : parse_list(val)) spec.seeds.push_back(std::stoull(t));
    } else if (key == "k_list") {
      for (const auto& t : parse_list(val)) {
        int k = std::stoi(t);
        SchemeCell cell;
        cell.kind = k == 1 ? SchemeCell::Kind::Vanilla
                           : SchemeCell::Kind::Secure;
        cell.k = k;
        spec.cells.push_back(cell);
      }
    } else if (key == "sigma_list") {
      for (const auto& t : parse_list(val)) {
        SchemeCell cell;
        cell.kind = SchemeCell::Kind::NoiseSigma;
        cell.sigma = std::stod(t);
        spec.cells.push_back(cell);
      }
    } else if (key == "f_list") {
      for (const auto& t : parse_list(val)) {
        SchemeCell cell;
        cell.kind = SchemeCell::Kind::NoiseFlip;
        cell.f = std::stod(t);
        spec.cells.push_back(cell);
      }
    } else if (key == "true_sim_control") {
      if (val == "1" || val == "true")
        spec.cells.push_back({SchemeCell::Kind::TrueSim, 1, 0.0, 0.0});
    } else if (key == "attack_dim") {
      spec.attack_dim = std::stoi(val);
    } else if (key == "attack_l") {
      spec.attack_l = std::stoi(val);
    } else if (key == "attack_trials") {
      spec.attack_trials = std::stoi(val);
    } else {
      throw std::runtime_error("config row " + std::to_string(row) +
                               ": unknown key '" + key + "'");
    }
  }
  spec.validate();
  return spec;
}

}  // namespace slsi::eval
