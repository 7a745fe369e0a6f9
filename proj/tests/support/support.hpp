#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include <glass/chaincode.hpp>
#include <glass/credential.hpp>
#include <glass/ledger.hpp>
#include <glass/portal.hpp>
#include <glass/random.hpp>
#include <glass/swarm.hpp>

namespace glass::test {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const noexcept { return path_; }

 private:
  fs::path path_;
};

// Three-org channel with the glass chaincodes installed and a small swarm.
struct GlassNet {
  explicit GlassNet(std::uint64_t seed, std::size_t swarm_nodes = 6);

  SeededRandom rng;
  ledger::Org org1, org2, authority;
  std::unique_ptr<ledger::Channel> channel;
  ledger::MemberIdentity m1, m2, ma;
  swarm::SwarmKey swarm_key;
  std::unique_ptr<swarm::Network> network;
  std::vector<swarm::NodeHandle> nodes;

  const ledger::MemberIdentity& member(std::string_view org) const;
  portal::PortalSession session(std::string_view org, std::size_t node_index);
};

// name:text, award_date:date required; grade:text optional.
registry::CredentialSchema simple_schema(const std::string& type);
// The diploma schema: name, degree, award_date required; grade optional.
registry::CredentialSchema ac_schema();
nlohmann::json diploma_claims();

// GlassNet with student, university and employer onboarded, the AC schema
// registered, the university trusted for AC and the employer a trusted app.
struct DiplomaWorld : GlassNet {
  explicit DiplomaWorld(std::uint64_t seed, std::size_t swarm_nodes = 6);

  portal::Wallet student, university, employer;
};

fs::path source_dir();
fs::path scenario_dir();

}  // namespace glass::test

namespace glass::test {

// Random JSON document: nested maps and lists of text (with escapes and
// multi-byte UTF-8), integers across the full int64/uint64 range, booleans
// and null. Never contains floats.
nlohmann::ordered_json random_document(RandomSource& rng, int max_depth = 4);
// Same value with every object's insertion order shuffled.
nlohmann::ordered_json shuffled(const nlohmann::ordered_json& doc, RandomSource& rng);
std::string random_text(RandomSource& rng, std::size_t max_len);

}  // namespace glass::test

namespace glass::test {

struct DhtOracleResult {
  std::size_t lookups = 0;
  std::size_t mismatches = 0;
  crypto::Digest32 trace_digest;
};

// Random network of node_count members; each of `pairs` rounds provides a
// block from a random node (sometimes re-providing an earlier block from a
// second node) and then looks up a random earlier cid from a random node.
// Every lookup is compared with a brute-force table of who provided what.
DhtOracleResult run_dht_oracle(std::uint64_t seed, std::size_t node_count, std::size_t pairs);

}  // namespace glass::test

namespace glass::test {

// Flips one bit in one randomly chosen field outside "proof" (string
// characters, integers or claim names). Returns the JSON pointer it touched.
std::string mutate_outside_proof(nlohmann::json& doc, RandomSource& rng);

struct TrustMatrixCase {
  std::set<std::string> registered;  // empty: issuer never added to the policy
  std::string presented;
  bool expected = false;
  bool overall = false;
  std::string reason;
};

// Every subset of {AC, TAX, DL} (the empty one included) against every
// presented type, verified through live ledger queries.
std::vector<TrustMatrixCase> run_trust_matrix(std::uint64_t seed);

}  // namespace glass::test
