#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "slsi/eval.hpp"
#include "slsi/secure_transform.hpp"
#include "slsi/seed_protocol.hpp"
#include "test_util.hpp"

using namespace slsi;
using namespace slsi::eval;

namespace {

namespace fs = std::filesystem;

fs::path tmp_file(const std::string& name) {
  return fs::temp_directory_path() / name;
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p);
  os << text;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("load_csv parses dense files") {
  auto p = tmp_file("slsi_eval_toy.csv");
  write_file(p, "id,a0,a1,a2\n1,0.5,-1.25,3\n2,0,1,0.5\n");
  auto ds = load_csv(p.string());
  CHECK(ds.dim == 3);
  REQUIRE(ds.size() == 2);
  CHECK(ds.rows[0].first == 1);
  CHECK(ds.rows[0].second.coords() == std::vector<double>{0.5, -1.25, 3.0});
  fs::remove(p);
}

TEST_CASE("load_csv error reporting names rows and columns") {
  auto p = tmp_file("slsi_eval_bad.csv");

  write_file(p, "id,a0,a1\n1,0.5\n");
  CHECK_THROWS_WITH((void)load_csv(p.string()),
                    "row 2: expected 3 fields, got 2");

  write_file(p, "id,a0,a1\n1,0.5,\n");
  CHECK_THROWS_WITH((void)load_csv(p.string()),
                    "row 2, column 3: missing value");

  write_file(p, "id,a0,a1\n1,0.5,abc\n");
  CHECK_THROWS_WITH((void)load_csv(p.string()),
                    "row 2, column 3: non-numeric value 'abc'");

  write_file(p, "id,a0\n7,1\n7,2\n");
  CHECK_THROWS_WITH((void)load_csv(p.string()), "row 3: duplicate id 7");

  write_file(p, "name,a0\n1,1\n");
  CHECK_THROWS_WITH((void)load_csv(p.string()),
                    "row 1: first column must be 'id'");
  fs::remove(p);
}

TEST_CASE("csv round trip is exact") {
  SplitMix64 g(21);
  Dataset ds;
  ds.dim = 5;
  for (uint64_t i = 0; i < 20; ++i)
    ds.rows.emplace_back(i, AttributeVector::dense(g.unit_vector(5)));
  auto p = tmp_file("slsi_eval_rt.csv");
  save_csv(ds, p.string());
  auto back = load_csv(p.string());
  REQUIRE(back.size() == ds.size());
  for (size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.rows[i].first == ds.rows[i].first);
    CHECK(back.rows[i].second == ds.rows[i].second);  // bit-exact doubles
  }
  fs::remove(p);
}

TEST_CASE("set-valued csv") {
  auto p = tmp_file("slsi_eval_sets.csv");
  write_file(p, "id,elements\n1,3;5;9\n2,5\n");
  auto ds = load_csv(p.string(), {true, false});
  REQUIRE(ds.size() == 2);
  CHECK(ds.rows[0].second.elements() == std::vector<uint64_t>{3, 5, 9});
  save_csv(ds, p.string());
  auto back = load_csv(p.string(), {true, false});
  CHECK(back.rows[0].second == ds.rows[0].second);
  fs::remove(p);
}

TEST_CASE("synthetic background is uniform on the sphere") {
  auto ds = synth_dataset(100, 32, {}, 3);
  CHECK(ds.size() == 100);
  double sum = 0.0;
  int pairs = 0;
  for (size_t i = 0; i < ds.size(); ++i) {
    CHECK(norm(ds.rows[i].second.coords()) == doctest::Approx(1.0));
    for (size_t j = i + 1; j < ds.size(); ++j) {
      sum += dot(ds.rows[i].second.coords(), ds.rows[j].second.coords());
      ++pairs;
    }
  }
  // Pairwise cosines have mean 0 and sd ~ 1/sqrt(dim); the mean over ~5000
  // (correlated) pairs concentrates well inside +-0.02.
  CHECK(std::fabs(sum / pairs) < 0.02);
}

TEST_CASE("planted pair hits its exact cosine") {
  ClusterSpec spec;
  spec.groups.push_back({1, 2, 0.98, 0.98});
  auto ds = synth_dataset(10, 24, spec, 5);
  double c = cosine_similarity(ds.rows[0].second.coords(),
                               ds.rows[1].second.coords());
  CHECK(std::fabs(c - 0.98) < 0.005);
}

TEST_CASE("cluster groups respect the pairwise floor") {
  ClusterSpec spec;
  spec.groups.push_back({4, 6, 0.9, 0.99});
  auto ds = synth_dataset(40, 64, spec, 6);
  for (int c = 0; c < 4; ++c) {
    for (int i = 0; i < 6; ++i)
      for (int j = i + 1; j < 6; ++j) {
        double cs = cosine_similarity(ds.rows[c * 6 + i].second.coords(),
                                      ds.rows[c * 6 + j].second.coords());
        CHECK(cs >= 0.9 - 1e-9);
      }
  }
}

TEST_CASE("synthetic determinism and infeasible specs") {
  ClusterSpec spec;
  spec.groups.push_back({2, 3, 0.95, 1.0});
  auto a = synth_dataset(50, 16, spec, 9);
  auto b = synth_dataset(50, 16, spec, 9);
  REQUIRE(a.size() == b.size());
  for (size_t i = 0; i < a.size(); ++i) CHECK(a.rows[i] == b.rows[i]);

  ClusterSpec too_big;
  too_big.groups.push_back({10, 10, 0.9, 1.0});
  CHECK_THROWS_WITH((void)synth_dataset(50, 16, too_big, 1),
                    "infeasible cluster spec");
  ClusterSpec bad_cos;
  bad_cos.groups.push_back({1, 2, 1.5, 1.5});
  CHECK_THROWS((void)synth_dataset(50, 16, bad_cos, 1));
}

TEST_CASE("gold neighbors by exact cosine") {
  std::vector<std::pair<uint64_t, AttributeVector>> base{
      {1, AttributeVector::dense({1.0, 0.0})},
      {2, AttributeVector::dense({0.0, 1.0})},
      {3, AttributeVector::dense({0.8, 0.6})},
  };
  std::vector<std::pair<uint64_t, AttributeVector>> queries{
      {10, AttributeVector::dense({1.0, 0.0})}};

  auto gold = gold_neighbors(base, queries, 0.95);
  CHECK(gold.at(10) == std::vector<uint64_t>{1});  // identical included

  auto none = gold_neighbors({base[0], base[1]}, queries, 0.95);
  // Orthogonal-only base except the identical one.
  auto strict = gold_neighbors({base[1]}, queries, 0.95);
  CHECK(strict.at(10).empty());

  // Agreement with an independently computed dot product.
  SplitMix64 g(31);
  std::vector<std::pair<uint64_t, AttributeVector>> rb, rq;
  for (uint64_t i = 0; i < 40; ++i)
    rb.emplace_back(i, AttributeVector::dense(g.unit_vector(8)));
  for (uint64_t i = 0; i < 25; ++i)
    rq.emplace_back(100 + i, AttributeVector::dense(g.unit_vector(8)));
  auto got = gold_neighbors(rb, rq, 0.4);
  for (const auto& [qid, qv] : rq) {
    std::vector<uint64_t> expect;
    for (const auto& [bid, bv] : rb) {
      double num = 0.0;
      for (int d = 0; d < 8; ++d) num += qv.coords()[d] * bv.coords()[d];
      if (num >= 0.4) expect.push_back(bid);  // unit vectors: dot == cosine
    }
    CHECK(got.at(qid) == expect);
  }
}

TEST_CASE("pr experiment micro example matches hand computation") {
  // Two tight pairs, mutually near-orthogonal. Whichever row lands in the
  // query split, its gold set is exactly its partner, so the hand-worked
  // exact-ranking curve is precision {1, 1/2, 1/3} at recall 1, AP = 1.
  double ct = 0.99, st = std::sqrt(1.0 - 0.99 * 0.99);
  Dataset ds;
  ds.dim = 2;
  ds.rows = {
      {0, AttributeVector::dense({1.0, 0.0})},
      {1, AttributeVector::dense({ct, st})},
      {2, AttributeVector::dense({0.0, 1.0})},
      {3, AttributeVector::dense({-st, ct})},
  };
  ExperimentSpec spec;
  spec.cells = {{SchemeCell::Kind::TrueSim, 1, 0.0, 0.0}};
  spec.gold_threshold = 0.95;
  spec.query_fraction = 0.25;
  spec.seeds = {4};
  auto curves = pr_experiment(ds, spec);
  REQUIRE(curves.size() == 1);
  const auto& c = curves[0];
  REQUIRE(c.queries_total == 1);
  REQUIRE(c.queries_with_gold == 1);
  REQUIRE(c.points.size() == 3);
  CHECK(c.points[0].precision == doctest::Approx(1.0));
  CHECK(c.points[0].recall == doctest::Approx(1.0));
  CHECK(c.points[1].precision == doctest::Approx(0.5));
  CHECK(c.points[2].precision == doctest::Approx(1.0 / 3));
  CHECK(c.average_precision == doctest::Approx(1.0));
}

TEST_CASE("true-similarity control achieves perfect average precision") {
  ClusterSpec cs;
  cs.groups.push_back({6, 8, 0.96, 1.0});
  auto ds = synth_dataset(150, 32, cs, 77);
  ExperimentSpec spec;
  spec.cells = {{SchemeCell::Kind::TrueSim, 1, 0.0, 0.0}};
  spec.gold_threshold = 0.95;
  spec.query_fraction = 0.2;
  spec.seeds = {2};
  auto curves = pr_experiment(ds, spec);
  REQUIRE(curves.size() == 1);
  CHECK(curves[0].average_precision == doctest::Approx(1.0));
  CHECK(curves[0].points.front().precision == doctest::Approx(1.0));
  // Recall is non-decreasing along the sweep.
  double prev = 0.0;
  for (const auto& pt : curves[0].points) {
    CHECK(pt.recall >= prev - 1e-12);
    prev = pt.recall;
  }
}

TEST_CASE("random bits score near the gold prevalence") {
  ClusterSpec cs;
  cs.groups.push_back({5, 6, 0.96, 1.0});
  auto ds = synth_dataset(120, 32, cs, 31);
  ExperimentSpec spec;
  // f = 1 bit-flip noise produces pure coin-flip embeddings.
  spec.cells = {{SchemeCell::Kind::NoiseFlip, 1, 0.0, 1.0}};
  spec.l = 32;
  spec.gold_threshold = 0.95;
  spec.query_fraction = 0.25;
  spec.seeds = {5};
  auto curves = pr_experiment(ds, spec);
  REQUIRE(curves.size() == 1);

  // Prevalence: mean |gold| / n_train over the evaluated queries.
  double last_recall = curves[0].points.back().recall;
  CHECK(last_recall == doctest::Approx(1.0));  // full depth finds everything
  double prevalence = 0.0;
  {
    size_t n_train = curves[0].points.size();
    // AP of a random ranking concentrates near prevalence = |gold|/n.
    // Bound it loosely above by 4x prevalence.
    double final_precision = curves[0].points.back().precision;
    prevalence = final_precision;
    CHECK(curves[0].average_precision <= 4.0 * prevalence + 0.05);
    CHECK(n_train > 0);
  }
}

TEST_CASE("secure embeddings rank at least as well as vanilla here") {
  ClusterSpec cs;
  cs.groups.push_back({10, 10, 0.85, 0.995});
  auto ds = synth_dataset(400, 64, cs, 13);
  ExperimentSpec spec;
  spec.cells = {{SchemeCell::Kind::Vanilla, 1, 0.0, 0.0},
                {SchemeCell::Kind::Secure, 4, 0.0, 0.0},
                {SchemeCell::Kind::NoiseSigma, 1, 1.5, 0.0}};
  spec.l = 64;
  spec.gold_threshold = 0.95;
  spec.query_fraction = 0.2;
  spec.seeds = {1, 2, 3};
  auto curves = pr_experiment(ds, spec);
  REQUIRE(curves.size() == 9);
  double ap_vanilla = 0, ap_secure = 0, ap_noise = 0;
  for (const auto& c : curves) {
    if (c.scheme == "vanilla") ap_vanilla += c.average_precision;
    if (c.scheme == "secure-k") ap_secure += c.average_precision;
    if (c.scheme == "noise-sigma") ap_noise += c.average_precision;
  }
  // Noise at sigma 1.5 collapses; the composed scheme holds up. Means over
  // three seeds; generous slack on the secure-vs-vanilla comparison, which
  // the acceptance suite pins at full scale.
  CHECK(ap_secure >= ap_vanilla - 0.15);
  CHECK(ap_vanilla > ap_noise + 0.1);
}

TEST_CASE("pr csv output is deterministic") {
  ClusterSpec cs;
  cs.groups.push_back({3, 4, 0.96, 1.0});
  auto ds = synth_dataset(60, 16, cs, 3);
  ExperimentSpec spec;
  spec.cells = {{SchemeCell::Kind::Vanilla, 1, 0.0, 0.0}};
  spec.l = 32;
  spec.seeds = {8};
  auto p1 = tmp_file("slsi_pr_a.csv");
  auto p2 = tmp_file("slsi_pr_b.csv");
  write_pr_csv(pr_experiment(ds, spec), p1.string());
  write_pr_csv(pr_experiment(ds, spec), p2.string());
  CHECK(read_file(p1) == read_file(p2));
  auto text = read_file(p1);
  CHECK(text.rfind("scheme,param,seed,depth,recall,precision\n", 0) == 0);
  fs::remove(p1);
  fs::remove(p2);
}

TEST_CASE("attack experiment produces a report per cell and seed") {
  ExperimentSpec spec;
  spec.cells = {{SchemeCell::Kind::Vanilla, 1, 0.0, 0.0},
                {SchemeCell::Kind::Secure, 8, 0.0, 0.0}};
  spec.seeds = {3};
  spec.attack_dim = 10;
  spec.attack_l = 256;
  spec.attack_trials = 10;
  spec.attack_pocs = {150, 1e-8, 2};
  auto reports = attack_experiment(spec);
  REQUIRE(reports.size() == 2);
  CHECK(reports[0].scheme == "vanilla");
  CHECK(reports[1].scheme == "secure-k");
  CHECK(reports[0].errors.size() == 10);
  CHECK(reports[0].mean_error < reports[1].mean_error);

  auto p = tmp_file("slsi_attack.csv");
  write_attack_csv(reports, p.string());
  auto text = read_file(p);
  CHECK(text.rfind("scheme,l,trial,error,baseline_mean\n", 0) == 0);
  fs::remove(p);
}

TEST_CASE("experiment spec config file") {
  auto p = tmp_file("slsi_spec.cfg");
  write_file(p,
             "# comment\n"
             "family=simhash\n"
             "l=32\n"
             "gold_threshold=0.9\n"
             "query_fraction=0.25\n"
             "seeds=1,2\n"
             "k_list=1,4\n"
             "sigma_list=0.5\n"
             "true_sim_control=1\n");
  auto spec = ExperimentSpec::from_config_file(p.string());
  CHECK(spec.l == 32);
  CHECK(spec.gold_threshold == doctest::Approx(0.9));
  CHECK(spec.seeds == std::vector<uint64_t>{1, 2});
  REQUIRE(spec.cells.size() == 4);
  CHECK(spec.cells[0].kind == SchemeCell::Kind::Vanilla);
  CHECK(spec.cells[1].kind == SchemeCell::Kind::Secure);
  CHECK(spec.cells[2].kind == SchemeCell::Kind::NoiseSigma);
  CHECK(spec.cells[3].kind == SchemeCell::Kind::TrueSim);

  write_file(p, "nonsense\n");
  CHECK_THROWS((void)ExperimentSpec::from_config_file(p.string()));
  fs::remove(p);
}

TEST_CASE("protocol path and direct path embed identically") {
  SchemeConfig cfg;
  cfg.kind = {Family::SimHash, ProjectionStyle::Rademacher};
  cfg.k = 4;
  cfg.l = 64;
  protocol::TwoServerSimulator sim(cfg, 0x717);
  SplitMix64 g(88);
  for (int rep = 0; rep < 10; ++rep) {
    auto x = AttributeVector::dense(protocol::quantize(g.unit_vector(12)));
    auto rec = sim.run(x);
    auto direct = secure::secure_embed(x, sim.effective_config());
    CHECK(rec.signature == direct);
  }
}
