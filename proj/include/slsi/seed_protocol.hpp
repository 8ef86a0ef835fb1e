#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "slsi/embedding.hpp"
#include "slsi/scheme.hpp"
#include "slsi/types.hpp"

namespace slsi::protocol {

// Simulation of the two-server black-box hash computation. The client
// XOR-shares its encoded input between the servers; each server holds its
// own seed contribution; an ideal functionality stands in for the secure
// two-party evaluation and hands each server a uniformly masked share of
// the final signature. Views record every message a party receives, and an
// audit checks the honest-but-curious contract over completed runs.

enum class Party : uint8_t { Client, Server1, Server2, Functionality };
std::string to_string(Party p);

struct Message {
  Party from = Party::Client;
  Party to = Party::Client;
  std::string label;
  std::vector<uint8_t> payload;
};

struct PartyView {
  Party party = Party::Client;
  std::vector<Message> received;  // append-only transcript
};

// A server's private seed contribution. Never transmitted; the true seed
// material is a pseudorandom function of the XOR of the two contributions.
struct SeedShare {
  uint64_t value = 0;
};

// ---- fixed-point attribute codec (32 bits per attribute, Q15.16) ----

std::vector<uint8_t> encode_attributes(const std::vector<double>& x);
std::vector<double> decode_attributes(const std::vector<uint8_t>& bytes);

// The value the protocol actually hashes: x snapped to the codec grid.
std::vector<double> quantize(const std::vector<double>& x);

std::vector<uint8_t> xor_bytes(const std::vector<uint8_t>& a,
                               const std::vector<uint8_t>& b);

struct ClientShare {
  std::vector<uint8_t> pad;         // v, uniform
  std::vector<uint8_t> ciphertext;  // x XOR v
};

// One-time-pad sharing of the encoded input.
ClientShare client_share(const std::vector<uint8_t>& encoded, SplitMix64& rng);

struct HashShares {
  std::vector<uint64_t> share1, share2;  // S1 XOR S2 = S(x)
  int l = 0;
  // Extra messages the functionality emits into views; empty for the ideal
  // functionality, used by faulty variants in negative-control tests.
  std::vector<Message> emitted;
};

// Ideal functionality: reconstructs x = ciphertext XOR pad internally,
// derives the true master seed from share1 XOR share2, computes S(x), and
// returns (S(x) XOR mask, mask) with a uniform mask. Neither x nor the
// combined seed is written to any view.
HashShares ideal_hash_functionality(const std::vector<uint8_t>& pad,
                                    const std::vector<uint8_t>& ciphertext,
                                    const SeedShare& share1,
                                    const SeedShare& share2,
                                    const SchemeConfig& cfg,
                                    SplitMix64& mask_rng);

struct SessionRecord {
  uint64_t session = 0;
  PartyView client{Party::Client, {}};
  PartyView server1{Party::Server1, {}};
  PartyView server2{Party::Server2, {}};
  BitEmbedding signature;  // reconstructed by server 1

  // Ground truth kept outside every view, for audits only.
  std::vector<uint8_t> plaintext;
  uint64_t combined_seed = 0;
};

class TwoServerSimulator {
 public:
  using Functionality = std::function<HashShares(
      const std::vector<uint8_t>&, const std::vector<uint8_t>&,
      const SeedShare&, const SeedShare&, const SchemeConfig&, SplitMix64&)>;

  // `template_cfg.master_seed` is ignored; the working seed derives from
  // the two server contributions generated at setup.
  TwoServerSimulator(const SchemeConfig& template_cfg, uint64_t setup_seed);

  SessionRecord run(const AttributeVector& x);

  // Same flow with a caller-supplied pad; throws on pad reuse. Exists so
  // the one-time discipline is enforceable and testable.
  SessionRecord run_with_pad(const AttributeVector& x,
                             const std::vector<uint8_t>& pad);

  // Scheme with the true derived master seed, as the functionality uses it.
  // Audit/test access; no protocol party ever sees this.
  SchemeConfig effective_config() const;
  uint64_t combined_seed() const {
    return share1_.value ^ share2_.value;
  }

  void set_functionality(Functionality f) { functionality_ = std::move(f); }

 private:
  SessionRecord run_session(const AttributeVector& x,
                            std::vector<uint8_t> pad);

  SchemeConfig cfg_;
  SeedShare share1_, share2_;
  SplitMix64 rng_;
  uint64_t next_session_ = 0;
  std::set<std::vector<uint8_t>> used_pads_;
  Functionality functionality_;
};

struct AuditReport {
  std::vector<std::string> violations;
  double max_abs_correlation = 0.0;
  double correlation_threshold = 0.0;
  bool passed() const { return violations.empty(); }
};

// Checks over a set of completed runs:
//  - each party's transcript carries only its allowed message labels,
//  - no payload contains the plaintext or the combined seed as a byte
//    substring,
//  - shares reconstruct the signature,
//  - pads are unique across runs,
//  - per-bit correlation between transcript bits and plaintext bits stays
//    below a Bonferroni-corrected z threshold at level `alpha`.
AuditReport audit_views(const std::vector<SessionRecord>& runs,
                        double alpha = 0.01);

// JSON lines {session, from, to, label, payload_hex}, one per message.
std::string trace_to_jsonl(const std::vector<SessionRecord>& runs);

}  // namespace slsi::protocol
