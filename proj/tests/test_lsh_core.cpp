#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slsi/lsh_core.hpp"
#include "test_util.hpp"

using namespace slsi;
using namespace slsi::lsh;
using testutil::set_pair_with_resemblance;
using testutil::vector_pair_with_cosine;
using testutil::within_binomial_ci;

namespace {

constexpr FamilyKind kMin{Family::MinHash, ProjectionStyle::Rademacher};
constexpr FamilyKind kSimR{Family::SimHash, ProjectionStyle::Rademacher};
constexpr FamilyKind kSimG{Family::SimHash, ProjectionStyle::Gaussian};

SchemeConfig vanilla_cfg(FamilyKind kind, int l, uint64_t seed) {
  SchemeConfig cfg;
  cfg.kind = kind;
  cfg.k = 1;
  cfg.l = l;
  cfg.master_seed = seed;
  return cfg;
}

}  // namespace

TEST_CASE("minhash basics") {
  auto single = AttributeVector::sparse({5});
  CHECK(minhash(single, 42) == prf(42, 5) >> 16);

  auto x = AttributeVector::sparse({1, 2, 3});
  CHECK(minhash(x, 7) == minhash(x, 7));  // deterministic
  CHECK(minhash(x, 7) != minhash(x, 8));

  auto y = AttributeVector::sparse({3, 1, 2});  // same set, any order
  for (uint64_t s = 0; s < 50; ++s) CHECK(minhash(x, s) == minhash(y, s));

  CHECK_THROWS_WITH(minhash(AttributeVector::sparse({}), 1),
                    "empty input set");
  CHECK_THROWS_WITH(minhash(AttributeVector::dense({1.0}), 1),
                    "incompatible input");
}

TEST_CASE("minhash collision rate matches resemblance") {
  auto sp = set_pair_with_resemblance(0.5);
  const int n = 100000;
  int hits = 0;
  for (int t = 0; t < n; ++t) {
    uint64_t s = prf(0xabc, t);
    if (minhash(sp.x, s) == minhash(sp.y, s)) ++hits;
  }
  CHECK(within_binomial_ci(double(hits) / n, 0.5, n, 3.0));
}

TEST_CASE("simhash sign bit properties") {
  auto x = AttributeVector::dense({0.3, -1.2, 0.7, 2.0});
  auto x2 = AttributeVector::dense({0.6, -2.4, 1.4, 4.0});
  std::vector<double> neg(4);
  for (int i = 0; i < 4; ++i) neg[i] = -x.coords()[i];
  auto xm = AttributeVector::dense(neg);

  for (uint64_t s = 0; s < 200; ++s) {
    for (auto style : {ProjectionStyle::Rademacher, ProjectionStyle::Gaussian}) {
      int b = simhash_bit(x, s, style);
      CHECK(simhash_bit(x2, s, style) == b);  // scale invariance
      if (projection_value(x, s, style) != 0.0)
        CHECK(simhash_bit(xm, s, style) == 1 - b);  // antipodal flips
    }
  }

  CHECK_THROWS_WITH(simhash_bit(AttributeVector::dense({0.0, 0.0}), 1,
                                ProjectionStyle::Rademacher),
                    "undefined direction");
  CHECK_THROWS_WITH(simhash_bit(AttributeVector::sparse({1}), 1,
                                ProjectionStyle::Rademacher),
                    "incompatible input");
}

TEST_CASE("simhash collision rate for orthogonal inputs is one half") {
  // The 1 - theta/pi law is exact for Gaussian projections in any
  // dimension; the Rademacher variant only approaches it as the dimension
  // grows, so it gets a wider band at a larger D.
  const int n = 100000;
  {
    auto vp = vector_pair_with_cosine(0.0, 12, 99);
    auto x = AttributeVector::dense(vp.x);
    auto y = AttributeVector::dense(vp.y);
    int hits = 0;
    for (int t = 0; t < n; ++t) {
      uint64_t s = prf(0xdef, t);
      if (simhash_bit(x, s, ProjectionStyle::Gaussian) ==
          simhash_bit(y, s, ProjectionStyle::Gaussian))
        ++hits;
    }
    CHECK(within_binomial_ci(double(hits) / n, 0.5, n, 3.0));
  }
  {
    auto vp = vector_pair_with_cosine(0.0, 128, 99);
    auto x = AttributeVector::dense(vp.x);
    auto y = AttributeVector::dense(vp.y);
    int hits = 0;
    for (int t = 0; t < n; ++t) {
      uint64_t s = prf(0xdef, t);
      if (simhash_bit(x, s, ProjectionStyle::Rademacher) ==
          simhash_bit(y, s, ProjectionStyle::Rademacher))
        ++hits;
    }
    CHECK(std::fabs(double(hits) / n - 0.5) < 0.01);
  }
}

TEST_CASE("one_bit_rehash") {
  CHECK(one_bit_rehash(0, 12345) == 0);
  CHECK(one_bit_rehash(77, 3) == one_bit_rehash(77, 3));
  CHECK_THROWS_WITH(one_bit_rehash(1, 2), "seed must be odd");

  // MinHash + rehash at R = 0.5 collides at (R + 1)/2 = 0.75.
  auto sp = set_pair_with_resemblance(0.5);
  const int n = 100000;
  int hits = 0;
  for (int t = 0; t < n; ++t) {
    uint64_t s = prf(0x123, t);
    uint64_t a = prf(0x456, t) | 1;
    if (one_bit_rehash(minhash(sp.x, s), a) ==
        one_bit_rehash(minhash(sp.y, s), a))
      ++hits;
  }
  CHECK(within_binomial_ci(double(hits) / n, 0.75, n, 3.0));
}

TEST_CASE("embed determinism and self-distance") {
  auto cfg = vanilla_cfg(kMin, 64, 11);
  auto x = AttributeVector::sparse({4, 8, 15, 16, 23, 42});
  auto e1 = embed(x, cfg);
  auto e2 = embed(x, cfg);
  CHECK(e1 == e2);
  CHECK(hamming_distance(e1, e2) == 0);

  auto cfg_sim = vanilla_cfg(kSimR, 64, 11);
  auto v = AttributeVector::dense({1.0, -0.5, 0.25});
  CHECK(hamming_distance(embed(v, cfg_sim), embed(v, cfg_sim)) == 0);

  CHECK_THROWS_WITH((void)embed(v, cfg), "incompatible input");
  SchemeConfig bad = cfg;
  bad.k = 2;
  CHECK_THROWS(embed(x, bad));
}

TEST_CASE("embed match count follows the 1-bit law") {
  // R = 0.8, l = 32: expected matches 32 * 0.9 = 28.8 per draw.
  auto sp = set_pair_with_resemblance(0.8);
  const int draws = 200, l = 32;
  double total = 0;
  for (int d = 0; d < draws; ++d) {
    auto cfg = vanilla_cfg(kMin, l, prf(0x777, d));
    total += bit_matches(embed(sp.x, cfg), embed(sp.y, cfg));
  }
  double mean_matches = total / draws;
  double se = std::sqrt(0.9 * 0.1 / (draws * l)) * l;
  CHECK(std::fabs(mean_matches - 28.8) <= 3.0 * se);
}

TEST_CASE("collision_model closed forms") {
  CHECK(collision_model(kMin, 1.0, 1) == doctest::Approx(1.0));
  CHECK(collision_model(kMin, 1.0, 7) == doctest::Approx(1.0));
  CHECK(collision_model(kMin, 0.0, 3) == doctest::Approx(0.5));
  CHECK(collision_model(kMin, 0.5, 2) == doctest::Approx(0.625));
  CHECK(collision_model(kMin, 0.5, 1) == doctest::Approx(0.75));

  // Raw sign-bit law at k = 1; composed law above.
  CHECK(collision_model(kSimR, 0.0, 1) == doctest::Approx(0.5));
  CHECK(collision_model(kSimR, -1.0, 1) == doctest::Approx(0.0));
  CHECK(collision_model(kSimR, 1.0, 1) == doctest::Approx(1.0));
  double p = 1.0 - std::acos(0.5) / std::numbers::pi;
  CHECK(collision_model(kSimR, 0.5, 3) ==
        doctest::Approx((p * p * p + 1.0) / 2.0));

  CHECK_THROWS(collision_model(kMin, 1.5, 1));
  CHECK_THROWS(collision_model(kMin, -0.1, 1));
  CHECK_THROWS(collision_model(kSimR, -1.01, 1));
  CHECK_THROWS(collision_model(kMin, 0.5, 0));
}

TEST_CASE("collision_model is strictly increasing in similarity") {
  for (int k : {1, 2, 4, 6, 8, 12}) {
    double prev = -1.0;
    for (double r = 0.0; r <= 1.0001; r += 0.05) {
      double v = collision_model(kMin, std::min(r, 1.0), k);
      CHECK(v > prev);
      prev = v;
    }
    prev = -1.0;
    for (double c = -1.0; c <= 1.0001; c += 0.1) {
      double v = collision_model(kSimR, std::min(c, 1.0), k);
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("estimate_similarity inverts the curve") {
  // 65% matches under 1-bit MinHash -> R = 0.65 * 2 - 1 = 0.3.
  auto a = BitEmbedding(100, 9);
  auto b = BitEmbedding(100, 9);
  for (int i = 0; i < 35; ++i) b.set_bit(i, true);  // 65 matches
  auto est = estimate_similarity(a, b, kMin, 1);
  CHECK(est.value == doctest::Approx(0.3));
  CHECK_FALSE(est.saturated);

  // Identical embeddings -> similarity 1 for any family.
  auto c = BitEmbedding(64, 9);
  CHECK(estimate_similarity(c, c, kMin, 4).value == doctest::Approx(1.0));
  CHECK(estimate_similarity(c, c, kSimR, 1).value == doctest::Approx(1.0));

  // Raw SimHash: m/l = 0.75 -> theta = pi/4 -> cosine ~ 0.7071.
  auto est2 = invert_collision_model(0.75, kSimR, 1);
  CHECK(est2.value == doctest::Approx(std::sqrt(0.5)).epsilon(1e-9));

  // Saturation below the invertible regime of composed schemes.
  auto est3 = invert_collision_model(0.5, kMin, 4);
  CHECK(est3.saturated);
  CHECK(est3.value == doctest::Approx(0.0));
  auto est4 = invert_collision_model(0.4, kSimR, 4);
  CHECK(est4.saturated);
  CHECK(est4.value == doctest::Approx(-1.0));
  CHECK_FALSE(invert_collision_model(0.4, kSimR, 1).saturated);

  BitEmbedding other(64, 10);
  CHECK_THROWS_WITH((void)estimate_similarity(c, other, kMin, 1),
                    "scheme mismatch");
}

TEST_CASE("hamming-bit duality against an independent popcount") {
  SplitMix64 g(5);
  for (int rep = 0; rep < 20; ++rep) {
    int l = 1 + int(g.next() % 200);
    BitEmbedding a(l, 1), b(l, 1);
    for (int i = 0; i < l; ++i) {
      a.set_bit(i, g.next() & 1);
      b.set_bit(i, g.next() & 1);
    }
    int manual = 0;
    for (int i = 0; i < l; ++i) manual += a.bit(i) != b.bit(i);
    CHECK(hamming_distance(a, b) == manual);
    CHECK(bit_matches(a, b) == l - manual);
  }
}

TEST_CASE("estimator consistency at l = 4096") {
  const int l = 4096;
  {
    auto sp = set_pair_with_resemblance(0.7);
    auto cfg = vanilla_cfg(kMin, l, 1234);
    auto est = estimate_similarity(embed(sp.x, cfg), embed(sp.y, cfg), kMin, 1);
    CHECK(std::fabs(est.value - 0.7) < 0.05);
  }
  {
    auto vp = vector_pair_with_cosine(0.7071, 16, 77);
    auto cfg = vanilla_cfg(kSimG, l, 4321);
    auto est = estimate_similarity(embed(AttributeVector::dense(vp.x), cfg),
                                   embed(AttributeVector::dense(vp.y), cfg),
                                   kSimG, 1);
    CHECK(std::fabs(est.value - 0.7071) < 0.05);
  }
}

TEST_CASE("hex round trip with bit 0 as the most significant bit") {
  BitEmbedding e(8, 3);
  e.set_bit(0, true);
  e.set_bit(2, true);
  e.set_bit(3, true);
  CHECK(e.to_hex() == "b0");
  CHECK(BitEmbedding::from_hex("b0", 8, 3) == e);

  SplitMix64 g(17);
  for (int rep = 0; rep < 30; ++rep) {
    int l = 1 + int(g.next() % 130);
    BitEmbedding a(l, 2);
    for (int i = 0; i < l; ++i) a.set_bit(i, g.next() & 1);
    CHECK(BitEmbedding::from_hex(a.to_hex(), l, 2) == a);
  }

  CHECK_THROWS(BitEmbedding::from_hex("ff", 7, 1));   // nonzero padding
  CHECK_THROWS(BitEmbedding::from_hex("f", 8, 1));    // wrong length
  CHECK_THROWS(BitEmbedding::from_hex("zz", 8, 1));   // bad digit
}

TEST_CASE("scheme config JSON round trip") {
  SchemeConfig cfg;
  cfg.kind = kSimG;
  cfg.k = 6;
  cfg.l = 128;
  cfg.master_seed = 0xfeedbeef;
  auto back = SchemeConfig::from_json_string(cfg.to_json_string());
  CHECK(back.kind == cfg.kind);
  CHECK(back.k == cfg.k);
  CHECK(back.l == cfg.l);
  CHECK(back.master_seed == cfg.master_seed);
  CHECK(back.modulus == cfg.modulus);
  CHECK(back.scheme_id() == cfg.scheme_id());

  SchemeConfig bad = cfg;
  bad.modulus = 1000;  // composite
  CHECK_THROWS_WITH(bad.validate(), "p not prime");
  CHECK_THROWS(SchemeConfig::from_json_string("{\"master_seed\":1}"));
}
