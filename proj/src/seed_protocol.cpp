#include "slsi/seed_protocol.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "slsi/secure_transform.hpp"

namespace slsi::protocol {

namespace {

constexpr double kFixedPointScale = 65536.0;  // Q15.16

// Bits of a byte string, LSB first within each byte.
inline int byte_bit(const std::vector<uint8_t>& bytes, size_t i) {
  return (bytes[i >> 3] >> (i & 7)) & 1;
}

std::vector<uint8_t> words_to_bytes(const std::vector<uint64_t>& words,
                                    int bits) {
  std::vector<uint8_t> out((bits + 7) / 8, 0);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = uint8_t((words[i / 8] >> (8 * (i % 8))) & 0xff);
  return out;
}

std::string hex_of(const std::vector<uint8_t>& bytes) {
  static const char* d = "0123456789abcdef";
  std::string s;
  s.reserve(bytes.size() * 2);
  for (uint8_t b : bytes) {
    s.push_back(d[b >> 4]);
    s.push_back(d[b & 0xf]);
  }
  return s;
}

bool contains_subsequence(const std::vector<uint8_t>& haystack,
                          const std::vector<uint8_t>& needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  return std::search(haystack.begin(), haystack.end(), needle.begin(),
                     needle.end()) != haystack.end();
}

// Inverse standard normal CDF (Acklam's rational approximation); plenty for
// picking z thresholds.
double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("p out of range");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r +
          a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

}  // namespace

std::string to_string(Party p) {
  switch (p) {
    case Party::Client: return "client";
    case Party::Server1: return "server1";
    case Party::Server2: return "server2";
    case Party::Functionality: return "functionality";
  }
  return "?";
}

std::vector<uint8_t> encode_attributes(const std::vector<double>& x) {
  std::vector<uint8_t> out;
  out.reserve(x.size() * 4);
  for (double v : x) {
    double scaled = v * kFixedPointScale;
    if (!(scaled >= -2147483648.0 && scaled <= 2147483647.0))
      throw std::invalid_argument("value out of fixed-point range");
    auto q = uint32_t(int32_t(std::llround(scaled)));
    for (int i = 0; i < 4; ++i) out.push_back(uint8_t((q >> (8 * i)) & 0xff));
  }
  return out;
}

std::vector<double> decode_attributes(const std::vector<uint8_t>& bytes) {
  if (bytes.size() % 4 != 0)
    throw std::invalid_argument("encoded length must be a multiple of 4");
  std::vector<double> out;
  out.reserve(bytes.size() / 4);
  for (size_t i = 0; i < bytes.size(); i += 4) {
    uint32_t q = 0;
    for (int j = 0; j < 4; ++j) q |= uint32_t(bytes[i + j]) << (8 * j);
    out.push_back(double(int32_t(q)) / kFixedPointScale);
  }
  return out;
}

std::vector<double> quantize(const std::vector<double>& x) {
  return decode_attributes(encode_attributes(x));
}

std::vector<uint8_t> xor_bytes(const std::vector<uint8_t>& a,
                               const std::vector<uint8_t>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
  std::vector<uint8_t> c(a.size());
  for (size_t i = 0; i < a.size(); ++i) c[i] = a[i] ^ b[i];
  return c;
}

ClientShare client_share(const std::vector<uint8_t>& encoded,
                         SplitMix64& rng) {
  ClientShare s;
  s.pad.resize(encoded.size());
  size_t i = 0;
  while (i < s.pad.size()) {
    uint64_t w = rng.next();
    for (int j = 0; j < 8 && i < s.pad.size(); ++j, ++i)
      s.pad[i] = uint8_t((w >> (8 * j)) & 0xff);
  }
  s.ciphertext = xor_bytes(encoded, s.pad);
  return s;
}

HashShares ideal_hash_functionality(const std::vector<uint8_t>& pad,
                                    const std::vector<uint8_t>& ciphertext,
                                    const SeedShare& share1,
                                    const SeedShare& share2,
                                    const SchemeConfig& cfg,
                                    SplitMix64& mask_rng) {
  if (pad.size() != ciphertext.size())
    throw std::invalid_argument("length mismatch");
  std::vector<double> x = decode_attributes(xor_bytes(pad, ciphertext));

  SchemeConfig working = cfg;
  working.master_seed =
      prf(share1.value ^ share2.value, seed_domain::kShareMask, 0);
  BitEmbedding s = secure::secure_embed(AttributeVector::dense(x), working);

  HashShares out;
  out.l = cfg.l;
  out.share2.resize(s.words().size());
  for (auto& w : out.share2) w = mask_rng.next();
  int tail = cfg.l & 63;
  if (tail) out.share2.back() &= (uint64_t(1) << tail) - 1;
  out.share1.resize(s.words().size());
  for (size_t i = 0; i < out.share1.size(); ++i)
    out.share1[i] = s.words()[i] ^ out.share2[i];
  return out;
}

TwoServerSimulator::TwoServerSimulator(const SchemeConfig& template_cfg,
                                       uint64_t setup_seed)
    : cfg_(template_cfg), rng_(prf(setup_seed, seed_domain::kPad, 0)) {
  cfg_.validate();
  // Each server draws its contribution independently at setup.
  share1_.value = prf(setup_seed, seed_domain::kShareMask, 1);
  share2_.value = prf(setup_seed, seed_domain::kShareMask, 2);
  functionality_ = ideal_hash_functionality;
}

SchemeConfig TwoServerSimulator::effective_config() const {
  SchemeConfig working = cfg_;
  working.master_seed = prf(combined_seed(), seed_domain::kShareMask, 0);
  return working;
}

SessionRecord TwoServerSimulator::run(const AttributeVector& x) {
  std::vector<uint8_t> encoded = encode_attributes(x.coords());
  SplitMix64 pad_rng(prf(rng_.next(), seed_domain::kPad, next_session_));
  ClientShare cs = client_share(encoded, pad_rng);
  return run_session(x, std::move(cs.pad));
}

SessionRecord TwoServerSimulator::run_with_pad(
    const AttributeVector& x, const std::vector<uint8_t>& pad) {
  return run_session(x, pad);
}

SessionRecord TwoServerSimulator::run_session(const AttributeVector& x,
                                              std::vector<uint8_t> pad) {
  if (!x.is_dense())
    throw std::invalid_argument("protocol input must be dense");
  std::vector<uint8_t> encoded = encode_attributes(x.coords());
  if (pad.size() != encoded.size())
    throw std::invalid_argument("length mismatch");
  if (!used_pads_.insert(pad).second) throw std::runtime_error("pad reuse");

  SessionRecord rec;
  rec.session = next_session_++;
  rec.plaintext = encoded;
  rec.combined_seed = combined_seed();

  std::vector<uint8_t> ciphertext = xor_bytes(encoded, pad);
  rec.server1.received.push_back(
      {Party::Client, Party::Server1, "pad", pad});
  rec.server2.received.push_back(
      {Party::Client, Party::Server2, "ciphertext", ciphertext});

  SplitMix64 mask_rng(prf(rec.combined_seed ^ rec.session,
                          seed_domain::kShareMask, 3 + rec.session));
  HashShares shares =
      functionality_(pad, ciphertext, share1_, share2_, cfg_, mask_rng);

  auto s1_bytes = words_to_bytes(shares.share1, shares.l);
  auto s2_bytes = words_to_bytes(shares.share2, shares.l);
  rec.server1.received.push_back(
      {Party::Functionality, Party::Server1, "hash-share-1", s1_bytes});
  rec.server2.received.push_back(
      {Party::Functionality, Party::Server2, "hash-share-2", s2_bytes});
  // Faulty functionalities may emit extra messages; route them to views.
  for (const auto& m : shares.emitted) {
    if (m.to == Party::Server1) rec.server1.received.push_back(m);
    if (m.to == Party::Server2) rec.server2.received.push_back(m);
    if (m.to == Party::Client) rec.client.received.push_back(m);
  }

  // Server 2 forwards its share; server 1 reconstructs the signature.
  rec.server1.received.push_back(
      {Party::Server2, Party::Server1, "hash-share-2", s2_bytes});
  std::vector<uint64_t> sig(shares.share1.size());
  for (size_t i = 0; i < sig.size(); ++i)
    sig[i] = shares.share1[i] ^ shares.share2[i];
  rec.signature = BitEmbedding::from_words(std::move(sig), cfg_.l,
                                           effective_config().scheme_id());
  rec.client.received.push_back({Party::Server1, Party::Client, "signature",
                                 words_to_bytes(rec.signature.words(),
                                                cfg_.l)});
  return rec;
}

namespace {

const std::map<Party, std::vector<std::string>>& allowed_labels() {
  static const std::map<Party, std::vector<std::string>> allowed = {
      {Party::Client, {"signature"}},
      {Party::Server1, {"pad", "hash-share-1", "hash-share-2"}},
      {Party::Server2, {"ciphertext", "hash-share-2"}},
  };
  return allowed;
}

void audit_one_view(const PartyView& view, const SessionRecord& rec,
                    const std::vector<uint8_t>& seed_bytes,
                    std::vector<std::string>& violations) {
  const auto& allowed = allowed_labels().at(view.party);
  for (const auto& m : view.received) {
    if (std::find(allowed.begin(), allowed.end(), m.label) == allowed.end())
      violations.push_back("unexpected message '" + m.label + "' in " +
                           to_string(view.party) + " view, session " +
                           std::to_string(rec.session));
    if (contains_subsequence(m.payload, rec.plaintext))
      violations.push_back("plaintext in view: " + to_string(view.party) +
                           ", session " + std::to_string(rec.session));
    if (contains_subsequence(m.payload, seed_bytes))
      violations.push_back("combined seed in view: " + to_string(view.party) +
                           ", session " + std::to_string(rec.session));
  }
}

}  // namespace

AuditReport audit_views(const std::vector<SessionRecord>& runs, double alpha) {
  AuditReport rep;
  if (runs.empty()) return rep;

  std::set<std::vector<uint8_t>> pads;
  for (const auto& rec : runs) {
    std::vector<uint8_t> seed_bytes(8);
    for (int i = 0; i < 8; ++i)
      seed_bytes[i] = uint8_t((rec.combined_seed >> (8 * i)) & 0xff);

    audit_one_view(rec.client, rec, seed_bytes, rep.violations);
    audit_one_view(rec.server1, rec, seed_bytes, rep.violations);
    audit_one_view(rec.server2, rec, seed_bytes, rep.violations);

    for (const auto& m : rec.server1.received) {
      if (m.label == "pad" && !pads.insert(m.payload).second)
        rep.violations.push_back("pad reuse, session " +
                                 std::to_string(rec.session));
    }
  }

  // Share reconstruction: S1 XOR S2 must equal the recorded signature.
  for (const auto& rec : runs) {
    const std::vector<uint8_t>*s1 = nullptr, *s2 = nullptr;
    for (const auto& m : rec.server1.received) {
      if (m.label == "hash-share-1") s1 = &m.payload;
      if (m.label == "hash-share-2") s2 = &m.payload;
    }
    if (s1 && s2) {
      auto sig = words_to_bytes(rec.signature.words(), rec.signature.length());
      if (xor_bytes(*s1, *s2) != sig)
        rep.violations.push_back("share reconstruction mismatch, session " +
                                 std::to_string(rec.session));
    }
  }

  // Statistical independence: correlate every transcript bit of the server
  // views with every plaintext bit across runs. Bonferroni-corrected
  // threshold keeps the familywise false-positive level at alpha.
  size_t n = runs.size();
  if (n >= 16) {
    auto views_of = [](const SessionRecord& r) {
      return std::vector<const PartyView*>{&r.server1, &r.server2};
    };
    auto layout_of = [&](const SessionRecord& r) {
      std::vector<std::pair<std::string, size_t>> layout;
      for (const PartyView* v : views_of(r))
        for (const auto& m : v->received)
          layout.emplace_back(m.label, m.payload.size());
      return layout;
    };
    // The correlation test needs the same transcript shape in every run.
    auto ref_layout = layout_of(runs.front());
    size_t pt_bits = runs.front().plaintext.size() * 8;
    bool uniform = true;
    for (const auto& rec : runs)
      if (layout_of(rec) != ref_layout || rec.plaintext.size() * 8 != pt_bits)
        uniform = false;

    if (uniform && pt_bits > 0) {
      size_t view_bits = 0;
      for (const auto& [label, bytes] : ref_layout) view_bits += bytes * 8;
      size_t pairs = view_bits * pt_bits;
      double z_threshold =
          inverse_normal_cdf(1.0 - alpha / (2.0 * double(pairs)));
      rep.correlation_threshold = z_threshold / std::sqrt(double(n));

      // Per-bit means first, then correlations.
      std::vector<std::vector<int>> view_bit_values(view_bits),
          pt_bit_values(pt_bits);
      for (auto& v : view_bit_values) v.reserve(n);
      for (auto& v : pt_bit_values) v.reserve(n);
      for (const auto& rec : runs) {
        size_t vb = 0;
        for (const PartyView* v : views_of(rec))
          for (const auto& m : v->received)
            for (size_t i = 0; i < m.payload.size() * 8; ++i)
              view_bit_values[vb++].push_back(byte_bit(m.payload, i));
        for (size_t i = 0; i < pt_bits; ++i)
          pt_bit_values[i].push_back(byte_bit(rec.plaintext, i));
      }

      auto center = [&](std::vector<int>& bits, std::vector<double>& out,
                        double& sd) {
        double m = 0.0;
        for (int b : bits) m += b;
        m /= double(n);
        out.resize(n);
        double var = 0.0;
        for (size_t i = 0; i < n; ++i) {
          out[i] = bits[i] - m;
          var += out[i] * out[i];
        }
        sd = std::sqrt(var);
      };

      std::vector<std::vector<double>> pt_centered(pt_bits);
      std::vector<double> pt_sd(pt_bits);
      for (size_t i = 0; i < pt_bits; ++i)
        center(pt_bit_values[i], pt_centered[i], pt_sd[i]);

      double worst = 0.0;
      size_t worst_vb = 0, worst_pb = 0;
      std::vector<double> vc;
      for (size_t vb = 0; vb < view_bits; ++vb) {
        double vsd = 0.0;
        center(view_bit_values[vb], vc, vsd);
        if (vsd == 0.0) continue;  // constant bit carries no information
        for (size_t pb = 0; pb < pt_bits; ++pb) {
          if (pt_sd[pb] == 0.0) continue;
          double dotv = 0.0;
          for (size_t i = 0; i < n; ++i) dotv += vc[i] * pt_centered[pb][i];
          double corr = std::fabs(dotv / (vsd * pt_sd[pb]));
          if (corr > worst) {
            worst = corr;
            worst_vb = vb;
            worst_pb = pb;
          }
        }
      }
      rep.max_abs_correlation = worst;
      if (worst > rep.correlation_threshold)
        rep.violations.push_back(
            "correlation between view bit " + std::to_string(worst_vb) +
            " and plaintext bit " + std::to_string(worst_pb) + ": " +
            std::to_string(worst));
    }
  }
  return rep;
}

std::string trace_to_jsonl(const std::vector<SessionRecord>& runs) {
  std::ostringstream os;
  for (const auto& rec : runs) {
    for (const PartyView* v : {&rec.client, &rec.server1, &rec.server2}) {
      for (const auto& m : v->received) {
        nlohmann::json j;
        j["session"] = rec.session;
        j["from"] = to_string(m.from);
        j["to"] = to_string(m.to);
        j["label"] = m.label;
        j["payload_hex"] = hex_of(m.payload);
        os << j.dump() << "\n";
      }
    }
  }
  return os.str();
}

}  // namespace slsi::protocol
