#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "slsi/cli.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

int cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv{"slsi"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return slsi::cli_main(int(argv.size()), argv.data());
}

fs::path tmp(const std::string& name) {
  return fs::temp_directory_path() / name;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p);
  return std::string(std::istreambuf_iterator<char>(is),
                     std::istreambuf_iterator<char>());
}

json read_json(const fs::path& p) { return json::parse(read_file(p)); }

}  // namespace

TEST_CASE("usage errors exit 1, runtime errors exit 2") {
  CHECK(cli({"no-such-command"}) == 1);
  CHECK(cli({"budget"}) == 1);  // missing required flags
  CHECK(cli({"hash", "--in", "/nonexistent.csv", "--out", "x"}) == 2);
}

TEST_CASE("budget emits the calculus as JSON") {
  auto out = tmp("slsi_cli_budget.json");
  CHECK(cli({"budget", "--family", "minhash", "--s0", "0.75", "--epsilon",
             "0.05", "--out", out.string()}) == 0);
  auto j = read_json(out);
  CHECK(j.at("k").get<int>() == 9);
  CHECK(j.at("f_noise").get<double>() == doctest::Approx(0.8667).epsilon(1e-4));
  CHECK(j.contains("rho_prime"));
  CHECK(j.contains("mi_bound_bits_per_bit"));
  fs::remove(out);
}

TEST_CASE("synth is deterministic in the seed") {
  auto a = tmp("slsi_cli_synth_a.csv");
  auto b = tmp("slsi_cli_synth_b.csv");
  CHECK(cli({"synth", "--n", "100", "--dim", "20", "--seed", "7", "--out",
             a.string()}) == 0);
  CHECK(cli({"synth", "--n", "100", "--dim", "20", "--seed", "7", "--out",
             b.string()}) == 0);
  CHECK(read_file(a) == read_file(b));
  CHECK(cli({"synth", "--n", "100", "--dim", "20", "--seed", "8", "--out",
             b.string()}) == 0);
  CHECK(read_file(a) != read_file(b));
  fs::remove(a);
  fs::remove(b);
}

TEST_CASE("hash, index, query pipeline") {
  auto data = tmp("slsi_cli_data.csv");
  auto emb = tmp("slsi_cli_emb.json");
  auto idx = tmp("slsi_cli_index.bin");
  auto res = tmp("slsi_cli_results.json");

  REQUIRE(cli({"synth", "--n", "200", "--dim", "24", "--seed", "5",
               "--clusters", "1x2@0.99:0.99", "--out", data.string()}) == 0);
  REQUIRE(cli({"hash", "--in", data.string(), "--family", "simhash", "--k",
               "2", "--l", "64", "--seed", "11", "--out", emb.string()}) == 0);
  auto j = read_json(emb);
  CHECK(j.at("scheme").at("k").get<int>() == 2);
  CHECK(j.at("embeddings").size() == 200);
  CHECK(j.at("embeddings")[0].at("bits").get<std::string>().size() == 16);

  REQUIRE(cli({"index", "--embeddings", emb.string(), "--tables", "8",
               "--band-bits", "10", "--seed", "3", "--out",
               idx.string()}) == 0);
  REQUIRE(cli({"query", "--index", idx.string(), "--embeddings", emb.string(),
               "--top-k", "3", "--out", res.string()}) == 0);
  auto r = read_json(res);
  CHECK(r.size() == 200);
  // Self-queries return themselves at distance zero.
  for (const auto& item : r) {
    REQUIRE(!item.at("hits").empty());
    CHECK(item.at("hits")[0].at("id") == item.at("query"));
    CHECK(item.at("hits")[0].at("distance").get<int>() == 0);
  }
  for (auto p : {data, emb, idx, res}) fs::remove(p);
}

TEST_CASE("attack subcommand writes a report") {
  auto out = tmp("slsi_cli_attack.json");
  CHECK(cli({"attack", "--family", "simhash", "--k", "1", "--l", "256",
             "--dim", "10", "--trials", "5", "--seed", "2", "--out",
             out.string()}) == 0);
  auto j = read_json(out);
  CHECK(j.at("trials").get<int>() == 5);
  CHECK(j.at("errors").size() == 5);
  CHECK(j.at("baseline_mean").get<double>() > 0.0);
  fs::remove(out);
}

TEST_CASE("eval-pr on a tiny synthetic grid") {
  auto out = tmp("slsi_cli_pr.csv");
  CHECK(cli({"eval-pr", "--n", "120", "--dim", "24", "--clusters",
             "4x6@0.96", "--l", "32", "--seeds", "1", "--k-list", "1,2",
             "--out", out.string()}) == 0);
  auto text = read_file(out);
  CHECK(text.rfind("scheme,param,seed,depth,recall,precision\n", 0) == 0);
  CHECK(text.find("vanilla") != std::string::npos);
  CHECK(text.find("secure-k") != std::string::npos);
  fs::remove(out);
}

TEST_CASE("protocol demo runs and audits clean") {
  auto trace = tmp("slsi_cli_trace.jsonl");
  CHECK(cli({"protocol-demo", "--runs", "20", "--dim", "8", "--k", "2", "--l",
             "32", "--seed", "4", "--trace", trace.string()}) == 0);
  std::ifstream is(trace);
  std::string line;
  int n = 0;
  while (std::getline(is, line)) {
    ++n;
    auto j = json::parse(line);
    CHECK(j.contains("session"));
    CHECK(j.contains("label"));
  }
  CHECK(n == 20 * 6);
  fs::remove(trace);
}
