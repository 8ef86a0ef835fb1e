#include "slsi/cli.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "slsi/eval.hpp"
#include "slsi/hamming_index.hpp"
#include "slsi/lsh_core.hpp"
#include "slsi/noise_baseline.hpp"
#include "slsi/secure_transform.hpp"
#include "slsi/seed_protocol.hpp"
#include "slsi/triangulation_attack.hpp"

namespace slsi {

namespace {

using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    if (text.empty() || text.back() != '\n') std::cout << '\n';
    return;
  }
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << text;
  if (!os) throw std::runtime_error("write failed: " + path);
}

struct EmbeddingsFile {
  SchemeConfig scheme;
  std::vector<std::pair<uint64_t, BitEmbedding>> embeddings;
};

void save_embeddings(const EmbeddingsFile& ef, const std::string& path) {
  json j;
  j["scheme"] = json::parse(ef.scheme.to_json_string());
  json arr = json::array();
  for (const auto& [id, e] : ef.embeddings)
    arr.push_back({{"id", id}, {"bits", e.to_hex()}});
  j["embeddings"] = std::move(arr);
  write_text(path, j.dump(2) + "\n");
}

EmbeddingsFile load_embeddings(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  json j = json::parse(is);
  EmbeddingsFile ef;
  ef.scheme = SchemeConfig::from_json_string(j.at("scheme").dump());
  uint64_t sid = ef.scheme.scheme_id();
  for (const auto& item : j.at("embeddings")) {
    uint64_t id = item.at("id").get<uint64_t>();
    ef.embeddings.emplace_back(
        id, BitEmbedding::from_hex(item.at("bits").get<std::string>(),
                                   ef.scheme.l, sid));
  }
  return ef;
}

eval::ClusterSpec parse_clusters(const std::vector<std::string>& specs) {
  // COUNTxSIZE@COSINE[:COSINE_MAX], e.g. 40x25@0.9:0.995
  eval::ClusterSpec cs;
  for (const auto& s : specs) {
    eval::ClusterGroup g;
    auto x = s.find('x');
    auto at = s.find('@');
    if (x == std::string::npos || at == std::string::npos || at < x)
      throw std::runtime_error("bad cluster spec '" + s +
                               "', expected COUNTxSIZE@COSINE[:COSINE_MAX]");
    g.count = std::stoi(s.substr(0, x));
    g.size = std::stoi(s.substr(x + 1, at - x - 1));
    auto colon = s.find(':', at);
    if (colon == std::string::npos) {
      g.cosine = std::stod(s.substr(at + 1));
      g.cosine_max = 1.0;
    } else {
      g.cosine = std::stod(s.substr(at + 1, colon - at - 1));
      g.cosine_max = std::stod(s.substr(colon + 1));
    }
    cs.groups.push_back(g);
  }
  return cs;
}

int run(int argc, const char* const* argv) {
  CLI::App app{"secure locality-sensitive indexing toolkit"};
  app.require_subcommand(1);

  // ---- synth ----
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  int sy_n = 1000, sy_dim = 64;
  uint64_t sy_seed = 1;
  std::string sy_out;
  std::vector<std::string> sy_clusters;
  synth->add_option("--n", sy_n, "number of vectors");
  synth->add_option("--dim", sy_dim, "dimensionality");
  synth->add_option("--seed", sy_seed, "rng seed");
  synth->add_option("--clusters", sy_clusters,
                    "planted clusters, COUNTxSIZE@COSINE[:COSINE_MAX]");
  synth->add_option("--out", sy_out, "output CSV path")->required();

  // ---- hash ----
  auto* hash = app.add_subcommand("hash", "embed a CSV dataset");
  std::string h_in, h_out, h_family = "simhash", h_style = "rademacher";
  std::string h_noise_mode;
  int h_k = 1, h_l = 64;
  uint64_t h_seed = 1;
  double h_f = 0.0, h_sigma = 0.0;
  bool h_set_valued = false, h_normalize = false;
  hash->add_option("--in", h_in, "input CSV")->required();
  hash->add_option("--out", h_out, "output embeddings JSON")->required();
  hash->add_option("--family", h_family, "minhash|simhash");
  hash->add_option("--style", h_style, "rademacher|gaussian");
  hash->add_option("--k", h_k, "composition order (1 = vanilla)");
  hash->add_option("--l", h_l, "bits per embedding");
  hash->add_option("--seed", h_seed, "master seed");
  hash->add_flag("--set-valued", h_set_valued, "input rows are id sets");
  hash->add_flag("--normalize", h_normalize, "unit-normalize dense rows");
  hash->add_option("--noise-mode", h_noise_mode,
                   "bitflip|projection (noise baseline, k must be 1)");
  hash->add_option("--f", h_f, "corruption probability (bitflip)");
  hash->add_option("--sigma", h_sigma, "projection noise scale");

  // ---- budget ----
  auto* budget = app.add_subcommand("budget", "privacy-budget calculator");
  std::string b_family = "minhash", b_out;
  double b_s0 = 0.75, b_eps = 0.05, b_c = 0.5;
  budget->add_option("--family", b_family, "minhash|simhash");
  budget->add_option("--s0", b_s0, "neighbor similarity threshold")
      ->required();
  budget->add_option("--epsilon", b_eps, "leakage bound in (0, 0.5)")
      ->required();
  budget->add_option("--c", b_c, "approximation factor for rho' (cS0)");
  budget->add_option("--out", b_out, "output JSON path (default stdout)");

  // ---- index ----
  auto* index_cmd = app.add_subcommand("index", "build a Hamming index");
  std::string ix_in, ix_out;
  int ix_tables = 16, ix_band = 16, ix_topk = 10;
  uint64_t ix_seed = 1;
  index_cmd->add_option("--embeddings", ix_in, "embeddings JSON")->required();
  index_cmd->add_option("--out", ix_out, "output index file")->required();
  index_cmd->add_option("--tables", ix_tables, "number of tables T");
  index_cmd->add_option("--band-bits", ix_band, "bits per table key b");
  index_cmd->add_option("--top-k", ix_topk, "default result count");
  index_cmd->add_option("--seed", ix_seed, "band sampling seed");

  // ---- query ----
  auto* query_cmd = app.add_subcommand("query", "probe a Hamming index");
  std::string q_index, q_in, q_out;
  int q_topk = 0;
  std::optional<int> q_threshold;
  int q_threshold_raw = -1;
  query_cmd->add_option("--index", q_index, "index file")->required();
  query_cmd->add_option("--embeddings", q_in, "query embeddings JSON")
      ->required();
  query_cmd->add_option("--out", q_out, "output JSON path (default stdout)");
  query_cmd->add_option("--top-k", q_topk, "override result count");
  query_cmd->add_option("--threshold", q_threshold_raw,
                        "return all hits within this Hamming distance");

  // ---- eval-pr ----
  auto* evalpr = app.add_subcommand("eval-pr", "precision-recall experiment");
  std::string e_data, e_config, e_out;
  int e_n = 5000, e_dim = 128, e_l = 64;
  double e_gold = 0.95, e_split = 0.2;
  std::vector<std::string> e_clusters = {"120x25@0.85:0.995"};
  std::vector<uint64_t> e_seeds = {1, 2, 3, 4, 5};
  std::vector<int> e_klist;
  std::vector<double> e_sigmas, e_fs;
  bool e_truesim = false;
  uint64_t e_synth_seed = 7;
  evalpr->add_option("--data", e_data, "input CSV (otherwise synthetic)");
  evalpr->add_option("--config", e_config, "flat key=value spec file");
  evalpr->add_option("--n", e_n, "synthetic dataset size");
  evalpr->add_option("--dim", e_dim, "synthetic dimensionality");
  evalpr->add_option("--clusters", e_clusters, "synthetic cluster groups");
  evalpr->add_option("--synth-seed", e_synth_seed, "synthetic dataset seed");
  evalpr->add_option("--l", e_l, "bits per embedding");
  evalpr->add_option("--gold", e_gold, "gold cosine threshold");
  evalpr->add_option("--split", e_split, "query fraction");
  evalpr->add_option("--seeds", e_seeds, "experiment seeds")
      ->delimiter(',');
  evalpr->add_option("--k-list", e_klist, "secure composition orders")
      ->delimiter(',');
  evalpr->add_option("--sigma-list", e_sigmas, "projection noise scales")
      ->delimiter(',');
  evalpr->add_option("--f-list", e_fs, "bit-flip rates")->delimiter(',');
  evalpr->add_flag("--true-sim-control", e_truesim,
                   "include the exact-similarity ranking control");
  evalpr->add_option("--out", e_out, "output CSV")->required();

  // ---- attack ----
  auto* attack_cmd = app.add_subcommand("attack", "triangulation attack");
  std::string a_family = "simhash", a_out;
  int a_k = 1, a_l = 1024, a_dim = 50, a_trials = 100;
  double a_f = -1.0, a_sigma = -1.0;
  uint64_t a_seed = 1;
  attack_cmd->add_option("--family", a_family, "minhash|simhash");
  attack_cmd->add_option("--k", a_k, "composition order of the scheme");
  attack_cmd->add_option("--f", a_f, "attack the bit-flip noise baseline");
  attack_cmd->add_option("--sigma", a_sigma,
                         "attack the projection-noise baseline");
  attack_cmd->add_option("--l", a_l, "bits per embedding");
  attack_cmd->add_option("--dim", a_dim, "attribute dimensionality");
  attack_cmd->add_option("--trials", a_trials, "independent attacks");
  attack_cmd->add_option("--seed", a_seed, "rng seed");
  attack_cmd->add_option("--out", a_out, "report JSON path (default stdout)");

  // ---- protocol-demo ----
  auto* proto = app.add_subcommand("protocol-demo",
                                   "two-server black-box hashing simulation");
  int p_runs = 10, p_dim = 16, p_k = 4, p_l = 64;
  uint64_t p_seed = 1;
  std::string p_trace;
  proto->add_option("--runs", p_runs, "protocol sessions to simulate");
  proto->add_option("--dim", p_dim, "attribute dimensionality");
  proto->add_option("--k", p_k, "composition order");
  proto->add_option("--l", p_l, "bits per signature");
  proto->add_option("--seed", p_seed, "setup seed");
  proto->add_option("--trace", p_trace, "write message trace JSONL here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (synth->parsed()) {
    auto ds = eval::synth_dataset(sy_n, sy_dim, parse_clusters(sy_clusters),
                                  sy_seed);
    eval::save_csv(ds, sy_out);
    return 0;
  }

  if (hash->parsed()) {
    eval::CsvSchema schema{h_set_valued, h_normalize};
    auto ds = eval::load_csv(h_in, schema);
    SchemeConfig cfg;
    cfg.kind = {family_from_string(h_family), style_from_string(h_style)};
    cfg.k = h_k;
    cfg.l = h_l;
    cfg.master_seed = h_seed;
    EmbeddingsFile ef;
    ef.scheme = cfg;
    if (h_noise_mode.empty()) {
      for (const auto& [id, v] : ds.rows)
        ef.embeddings.emplace_back(id, secure::secure_embed(v, cfg));
    } else {
      noise::NoiseParams np;
      np.seed = prf(h_seed, seed_domain::kNoiseFlip, 0);
      if (h_noise_mode == "bitflip") {
        np.mode = noise::NoiseMode::BitFlip;
        np.f = h_f;
      } else if (h_noise_mode == "projection") {
        np.mode = noise::NoiseMode::ProjectionNoise;
        np.sigma = h_sigma;
      } else {
        throw std::runtime_error("unknown noise mode '" + h_noise_mode + "'");
      }
      for (const auto& [id, v] : ds.rows)
        ef.embeddings.emplace_back(id, noise::noisy_embed(v, cfg, np, id));
    }
    save_embeddings(ef, h_out);
    return 0;
  }

  if (budget->parsed()) {
    FamilyKind kind{family_from_string(b_family), ProjectionStyle::Rademacher};
    secure::PrivacyBudget pb{b_s0, b_eps};
    auto rep = secure::budget_report(kind, pb, b_c);
    json j;
    j["k"] = rep.k;
    j["f_noise"] = rep.f_noise;
    j["rho_prime"] = rep.rho_prime_raw;
    j["rho_prime_rehashed"] = rep.rho_prime_rehashed;
    j["mi_bound_bits_per_bit"] = rep.mi_bound_bits_per_bit;
    j["p1"] = rep.p1;
    j["p2"] = rep.p2;
    write_text(b_out, j.dump(2) + "\n");
    return 0;
  }

  if (index_cmd->parsed()) {
    auto ef = load_embeddings(ix_in);
    index::IndexParams params;
    params.tables = ix_tables;
    params.band_bits = ix_band;
    params.top_k = ix_topk;
    auto idx = index::HammingIndex::build(ef.embeddings, params, ix_seed);
    idx.save(ix_out);
    return 0;
  }

  if (query_cmd->parsed()) {
    auto idx = index::HammingIndex::load(q_index);
    auto ef = load_embeddings(q_in);
    index::IndexParams params = idx.params();
    if (q_topk > 0) params.top_k = q_topk;
    if (q_threshold_raw >= 0) params.hamming_threshold = q_threshold_raw;
    json out = json::array();
    for (const auto& [id, e] : ef.embeddings) {
      auto res = idx.query(e, params);
      json hits = json::array();
      for (const auto& h : res.hits)
        hits.push_back({{"id", h.id}, {"distance", h.distance}});
      out.push_back({{"query", id},
                     {"hits", hits},
                     {"candidates_examined", res.candidates_examined},
                     {"overflow", res.overflow}});
    }
    write_text(q_out, out.dump(2) + "\n");
    return 0;
  }

  if (evalpr->parsed()) {
    eval::ExperimentSpec spec;
    if (!e_config.empty()) {
      spec = eval::ExperimentSpec::from_config_file(e_config);
    } else {
      spec.cells.clear();
      for (int k : e_klist) {
        eval::SchemeCell cell;
        cell.kind = k == 1 ? eval::SchemeCell::Kind::Vanilla
                           : eval::SchemeCell::Kind::Secure;
        cell.k = k;
        spec.cells.push_back(cell);
      }
      for (double s : e_sigmas) {
        eval::SchemeCell cell;
        cell.kind = eval::SchemeCell::Kind::NoiseSigma;
        cell.sigma = s;
        spec.cells.push_back(cell);
      }
      for (double f : e_fs) {
        eval::SchemeCell cell;
        cell.kind = eval::SchemeCell::Kind::NoiseFlip;
        cell.f = f;
        spec.cells.push_back(cell);
      }
      if (e_truesim)
        spec.cells.push_back({eval::SchemeCell::Kind::TrueSim, 1, 0.0, 0.0});
      if (spec.cells.empty())
        spec.cells.push_back({eval::SchemeCell::Kind::Vanilla, 1, 0.0, 0.0});
      spec.l = e_l;
      spec.gold_threshold = e_gold;
      spec.query_fraction = e_split;
      spec.seeds = e_seeds;
    }
    eval::Dataset ds = e_data.empty()
                           ? eval::synth_dataset(e_n, e_dim,
                                                 parse_clusters(e_clusters),
                                                 e_synth_seed)
                           : eval::load_csv(e_data, {false, true});
    auto curves = eval::pr_experiment(ds, spec);
    eval::write_pr_csv(curves, e_out);
    for (const auto& c : curves)
      std::fprintf(stdout, "%s param=%g seed=%llu AP=%.4f\n",
                   c.scheme.c_str(), c.param,
                   (unsigned long long)c.seed, c.average_precision);
    return 0;
  }

  if (attack_cmd->parsed()) {
    FamilyKind kind{family_from_string(a_family), ProjectionStyle::Rademacher};
    SchemeConfig cfg;
    cfg.kind = kind;
    cfg.l = a_l;
    cfg.k = a_k;
    cfg.master_seed = prf(a_seed, 0xa77ac4, 0);

    attack::EmbedOracle oracle;
    std::string name;
    if (a_f >= 0.0 || a_sigma >= 0.0) {
      cfg.k = 1;
      noise::NoiseParams np;
      np.seed = prf(a_seed, seed_domain::kNoiseFlip, 3);
      if (a_f >= 0.0) {
        np.mode = noise::NoiseMode::BitFlip;
        np.f = a_f;
        name = "noise-f=" + std::to_string(a_f);
      } else {
        np.mode = noise::NoiseMode::ProjectionNoise;
        np.sigma = a_sigma;
        name = "noise-sigma=" + std::to_string(a_sigma);
      }
      oracle = [cfg, np](const std::vector<double>& v, uint64_t nonce) {
        return noise::noisy_embed(AttributeVector::dense(v), cfg, np, nonce);
      };
    } else {
      name = "k=" + std::to_string(a_k);
      oracle = [cfg](const std::vector<double>& v, uint64_t) {
        return secure::secure_embed(AttributeVector::dense(v), cfg);
      };
    }

    attack::AttackParams ap;
    ap.dim = a_dim;
    ap.trials = a_trials;
    ap.seed = a_seed;
    ap.pocs = {400, 1e-9, 3};
    auto rep = attack::run_attack(oracle, kind, cfg.k, a_l, ap, name);
    write_text(a_out, rep.to_json_string() + "\n");
    return 0;
  }

  if (proto->parsed()) {
    SchemeConfig cfg;
    cfg.kind = {Family::SimHash, ProjectionStyle::Rademacher};
    cfg.k = p_k;
    cfg.l = p_l;
    protocol::TwoServerSimulator sim(cfg, p_seed);
    SplitMix64 g(prf(p_seed, 0xdead, 0));
    std::vector<protocol::SessionRecord> runs;
    for (int i = 0; i < p_runs; ++i)
      runs.push_back(sim.run(AttributeVector::dense(g.unit_vector(p_dim))));
    if (!p_trace.empty()) write_text(p_trace, protocol::trace_to_jsonl(runs));
    auto audit = protocol::audit_views(runs);
    std::fprintf(stdout,
                 "sessions=%d violations=%zu max_corr=%.4f threshold=%.4f\n",
                 p_runs, audit.violations.size(), audit.max_abs_correlation,
                 audit.correlation_threshold);
    for (const auto& v : audit.violations)
      std::fprintf(stdout, "violation: %s\n", v.c_str());
    return audit.passed() ? 0 : 2;
  }

  return 1;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}

}  // namespace slsi
