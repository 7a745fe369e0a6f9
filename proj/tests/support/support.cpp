#include "support.hpp"

#include <atomic>
#include <random>

#include <glass/error.hpp>

#ifndef GLASS_SOURCE_DIR
#error "GLASS_SOURCE_DIR must be defined"
#endif

namespace glass::test {

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("glass-test-" + std::to_string(rd()) + "-" + std::to_string(counter.fetch_add(1)));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

GlassNet::GlassNet(std::uint64_t seed, std::size_t swarm_nodes) : rng(seed, "glass-net") {
  org1 = ledger::Org::generate(std::string(registry::kOrg1), rng);
  org2 = ledger::Org::generate(std::string(registry::kOrg2), rng);
  authority = ledger::Org::generate(std::string(registry::kAuthorityOrg), rng);
  auto info = [](const ledger::Org& o) { return ledger::OrgInfo{o.name, o.root_keys.public_key()}; };
  channel = ledger::Channel::create(registry::glass_channel_config(info(org1), info(org2), info(authority)));
  registry::install_glass_chaincodes(*channel);
  m1 = channel->enroll(org1, crypto::SigningKeypair::generate(rng));
  m2 = channel->enroll(org2, crypto::SigningKeypair::generate(rng));
  ma = channel->enroll(authority, crypto::SigningKeypair::generate(rng));
  swarm_key = swarm::SwarmKey::generate(rng);
  network = std::make_unique<swarm::Network>(swarm_key, seed);
  for (std::size_t i = 0; i < swarm_nodes; ++i) {
    nodes.push_back(network->join(crypto::SigningKeypair::generate(rng), swarm_key));
  }
}

const ledger::MemberIdentity& GlassNet::member(std::string_view org) const {
  if (org == registry::kOrg1) return m1;
  if (org == registry::kOrg2) return m2;
  if (org == registry::kAuthorityOrg) return ma;
  throw Error(Errc::not_found, std::string(org));
}

portal::PortalSession GlassNet::session(std::string_view org, std::size_t node_index) {
  return portal::PortalSession(*channel, nodes.at(node_index), member(org), rng, 4096);
}

registry::CredentialSchema simple_schema(const std::string& type) {
  using registry::AttributeKind;
  std::string id = type;
  for (auto& c : id) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return registry::CredentialSchema{id + "-v1",
                                    type,
                                    {{"name", AttributeKind::text}, {"award_date", AttributeKind::date}},
                                    {{"grade", AttributeKind::text}}};
}

registry::CredentialSchema ac_schema() {
  using registry::AttributeKind;
  return registry::CredentialSchema{
      "ac-diploma-v1",
      "AC",
      {{"name", AttributeKind::text}, {"degree", AttributeKind::text}, {"award_date", AttributeKind::date}},
      {{"grade", AttributeKind::text}}};
}

nlohmann::json diploma_claims() {
  return {{"name", "Alice Schmidt"}, {"degree", "MSc Computer Science"}, {"award_date", "2023-07-14"}};
}

DiplomaWorld::DiplomaWorld(std::uint64_t seed, std::size_t swarm_nodes) : GlassNet(seed, swarm_nodes) {
  student = portal::Wallet::generate(rng);
  university = portal::Wallet::generate(rng);
  employer = portal::Wallet::generate(rng);
  portal::onboard(*channel, m1, student, registry::PersonKind::natural_person);
  portal::onboard(*channel, m1, university, registry::PersonKind::legal_person);
  portal::onboard(*channel, m2, employer, registry::PersonKind::legal_person);
  registry::register_schema(*channel, ma, ac_schema());
  registry::register_trusted_issuer(*channel, ma, {university.did, "DE", {"AC"}});
  registry::register_trusted_app(*channel, ma, employer.did);
}

fs::path source_dir() { return GLASS_SOURCE_DIR; }
fs::path scenario_dir() { return source_dir() / "docs" / "scenarios"; }

}  // namespace glass::test

namespace glass::test {

std::string random_text(RandomSource& rng, std::size_t max_len) {
  static const std::vector<std::string> pieces = {"a",  "Z",  "0",      " ",      "\"",     "\\", "/",
                                                  "\n", "\t", "\x01",   "\x1f",   "\x7f",   "é",  "ß",
                                                  "€",  "中", "\xf0\x9f\x94\x91", "did:", "Qm", "-"};
  std::string out;
  auto n = rng.uniform(max_len + 1);
  for (std::uint64_t i = 0; i < n; ++i) out += pieces[rng.uniform(pieces.size())];
  return out;
}

nlohmann::ordered_json random_document(RandomSource& rng, int max_depth) {
  using OJ = nlohmann::ordered_json;
  const auto pick = rng.uniform(max_depth > 0 ? 8 : 5);
  switch (pick) {
    case 0:
      return OJ(nullptr);
    case 1:
      return OJ(rng.uniform(2) == 1);
    case 2: {
      auto v = static_cast<std::int64_t>(rng.next_u64());
      if (rng.uniform(2) == 0) v %= 1000;
      return OJ(v);
    }
    case 3:
      return OJ(rng.next_u64());
    case 4:
      return OJ(random_text(rng, 12));
    case 5:
    case 6: {
      OJ obj = OJ::object();
      auto n = rng.uniform(6);
      for (std::uint64_t i = 0; i < n; ++i) obj[random_text(rng, 6)] = random_document(rng, max_depth - 1);
      return obj;
    }
    default: {
      OJ arr = OJ::array();
      auto n = rng.uniform(5);
      for (std::uint64_t i = 0; i < n; ++i) arr.push_back(random_document(rng, max_depth - 1));
      return arr;
    }
  }
}

nlohmann::ordered_json shuffled(const nlohmann::ordered_json& doc, RandomSource& rng) {
  using OJ = nlohmann::ordered_json;
  if (doc.is_array()) {
    OJ out = OJ::array();
    for (const auto& v : doc) out.push_back(shuffled(v, rng));
    return out;
  }
  if (!doc.is_object()) return doc;
  std::vector<std::string> keys;
  for (const auto& [k, v] : doc.items()) keys.push_back(k);
  for (std::size_t i = keys.size(); i > 1; --i) std::swap(keys[i - 1], keys[rng.uniform(i)]);
  OJ out = OJ::object();
  for (const auto& k : keys) out[k] = shuffled(doc.at(k), rng);
  return out;
}

}  // namespace glass::test

namespace glass::test {

DhtOracleResult run_dht_oracle(std::uint64_t seed, std::size_t node_count, std::size_t pairs) {
  SeededRandom rng(seed, "dht-oracle/" + std::to_string(node_count));
  auto key = swarm::SwarmKey::generate(rng);
  swarm::Network net(key, seed);
  std::vector<swarm::NodeHandle> nodes;
  for (std::size_t i = 0; i < node_count; ++i) nodes.push_back(net.join(crypto::SigningKeypair::generate(rng), key));

  std::map<ContentId, std::set<swarm::NodeId>> truth;
  std::vector<ContentId> cids;
  DhtOracleResult result;
  for (std::size_t p = 0; p < pairs; ++p) {
    const auto& provider = nodes[rng.uniform(nodes.size())];
    dag::BlockSet blocks;
    if (!cids.empty() && rng.uniform(4) == 0) {
      const auto& cid = cids[rng.uniform(cids.size())];
      // Re-provide an existing block from whoever asks; they must hold it.
      auto holder = *truth.at(cid).begin();
      blocks.insert(cid, net.local_blocks(holder).at(cid));
    } else {
      auto cid = blocks.add(rng.bytes(32));
      cids.push_back(cid);
    }
    net.provide(provider, blocks);
    for (const auto& [cid, bytes] : blocks) truth[cid].insert(provider.id());

    const auto& target = cids[rng.uniform(cids.size())];
    const auto& asker = nodes[rng.uniform(nodes.size())];
    ++result.lookups;
    if (net.find_providers(asker, target) != truth.at(target)) ++result.mismatches;
  }
  result.trace_digest = crypto::sha256(net.trace_jsonl());
  return result;
}

}  // namespace glass::test

namespace glass::test {

namespace {

void collect_leaves(const nlohmann::json& node, const nlohmann::json::json_pointer& at,
                    std::vector<std::pair<nlohmann::json::json_pointer, bool>>& out) {
  if (node.is_object()) {
    for (const auto& [k, v] : node.items()) {
      auto child = at / k;
      if (child.to_string() == "/proof") continue;
      if (at.to_string() == "/claims") out.emplace_back(child, true);
      collect_leaves(v, child, out);
    }
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) collect_leaves(node[i], at / i, out);
  } else if (node.is_string() || node.is_number_integer()) {
    out.emplace_back(at, false);
  }
}

std::string flip_ascii_bit(std::string s, RandomSource& rng) {
  std::vector<std::size_t> ascii;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (static_cast<unsigned char>(s[i]) < 0x80) ascii.push_back(i);
  }
  if (ascii.empty()) return s + "a";
  auto i = ascii[rng.uniform(ascii.size())];
  s[i] = static_cast<char>(s[i] ^ (1 << rng.uniform(7)));
  return s;
}

}  // namespace

std::string mutate_outside_proof(nlohmann::json& doc, RandomSource& rng) {
  std::vector<std::pair<nlohmann::json::json_pointer, bool>> leaves;
  collect_leaves(doc, nlohmann::json::json_pointer(), leaves);
  const auto& [ptr, is_key] = leaves.at(rng.uniform(leaves.size()));
  if (is_key) {
    auto& parent = doc.at(ptr.parent_pointer());
    const auto old_key = ptr.back();
    auto value = parent.at(old_key);
    parent.erase(old_key);
    parent[flip_ascii_bit(old_key, rng)] = std::move(value);
    return "key " + ptr.to_string();
  }
  auto& leaf = doc.at(ptr);
  if (leaf.is_string()) {
    leaf = flip_ascii_bit(leaf.get<std::string>(), rng);
  } else if (leaf.is_number_unsigned()) {
    leaf = leaf.get<std::uint64_t>() ^ (std::uint64_t{1} << rng.uniform(20));
  } else {
    leaf = leaf.get<std::int64_t>() ^ (std::int64_t{1} << rng.uniform(20));
  }
  return ptr.to_string();
}

std::vector<TrustMatrixCase> run_trust_matrix(std::uint64_t seed) {
  const std::vector<std::string> types = {"AC", "TAX", "DL"};
  GlassNet net(seed, 3);
  auto holder = portal::Wallet::generate(net.rng);
  auto verifier = portal::Wallet::generate(net.rng);
  portal::onboard(*net.channel, net.m1, holder, registry::PersonKind::natural_person);
  portal::onboard(*net.channel, net.m2, verifier, registry::PersonKind::legal_person);
  registry::register_trusted_app(*net.channel, net.ma, verifier.did);
  std::map<std::string, registry::CredentialSchema> schemas;
  for (const auto& t : types) {
    schemas.emplace(t, simple_schema(t));
    registry::register_schema(*net.channel, net.ma, schemas.at(t));
  }
  const nlohmann::json claims = {{"name", "Holder"}, {"award_date", "2024-02-29"}};

  std::vector<TrustMatrixCase> out;
  for (unsigned mask = 0; mask < 8; ++mask) {
    std::set<std::string> registered;
    for (unsigned b = 0; b < 3; ++b) {
      if (mask & (1u << b)) registered.insert(types[b]);
    }
    auto issuer = portal::Wallet::generate(net.rng);
    portal::onboard(*net.channel, net.m1, issuer, registry::PersonKind::legal_person);
    if (!registered.empty()) registry::register_trusted_issuer(*net.channel, net.ma, {issuer.did, "DE", registered});
    for (const auto& presented : types) {
      auto vc = credential::issue(issuer.signing, issuer.did, holder.did, schemas.at(presented), claims);
      auto report = portal::present_and_verify(*net.channel, net.m2, net.rng, holder, {vc}, verifier);
      out.push_back({registered, presented, registered.contains(presented), report.overall, report.reason});
    }
  }
  return out;
}

}  // namespace glass::test
