#include "glass/ledger.hpp"

#include <algorithm>

#include "glass/base58.hpp"
#include "glass/canonical_json.hpp"
#include "glass/error.hpp"
#include "glass/random.hpp"

namespace glass::ledger {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kConfigChaincode = "_lifecycle";
constexpr std::string_view kConfigFunction = "configure";

std::string status_name(TxStatus s) { return s == TxStatus::valid ? "valid" : "rejected"; }

template <typename F>
auto json_field(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(Errc::format, std::string(what) + ": " + e.what());
  }
}

Transaction config_transaction(const ChannelConfig& config) {
  Transaction tx;
  tx.chaincode = std::string(kConfigChaincode);
  tx.function = std::string(kConfigFunction);
  tx.args = {canon::serialize(config.to_json())};
  tx.logical_time = 0;
  return tx;
}

crypto::Digest32 hash_transient(const std::map<std::string, std::string>& transient) {
  Json j = Json::object();
  for (const auto& [k, v] : transient) j[k] = v;
  return crypto::sha256(canon::serialize(j));
}

void validate_config(const ChannelConfig& config) {
  if (config.orgs.empty()) throw Error(Errc::config, "channel needs at least one org");
  std::set<std::string> orgs;
  for (const auto& org : config.orgs) {
    if (org.name.empty()) throw Error(Errc::config, "empty org name");
    if (!orgs.insert(org.name).second) throw Error(Errc::config, "duplicate org " + org.name);
  }
  std::set<std::string> names;
  for (const auto& c : config.collections) {
    if (c.name.empty()) throw Error(Errc::config, "empty collection name");
    if (!names.insert(c.name).second) throw Error(Errc::config, "duplicate collection " + c.name);
    for (const auto* set : {&c.readers, &c.writers}) {
      for (const auto& org : *set) {
        if (!orgs.contains(org)) throw Error(Errc::config, "collection " + c.name + " names unknown org " + org);
      }
    }
  }
}

VerifyReport bad(std::uint64_t height, std::string reason) {
  return VerifyReport{false, height, std::move(reason)};
}

}  // namespace

Org Org::generate(std::string name, RandomSource& rng) {
  return Org{std::move(name), crypto::SigningKeypair::generate(rng)};
}

Json ChannelConfig::to_json() const {
  Json orgs_json = Json::array();
  for (const auto& org : orgs) orgs_json.push_back({{"name", org.name}, {"root_public", crypto::b58(org.root_public)}});
  Json cols = Json::array();
  for (const auto& c : collections) cols.push_back({{"name", c.name}, {"readers", c.readers}, {"writers", c.writers}});
  return {{"orgs", orgs_json}, {"collections", cols}};
}

ChannelConfig ChannelConfig::from_json(const Json& j) {
  return json_field("channel config", [&] {
    ChannelConfig config;
    for (const auto& o : j.at("orgs")) {
      config.orgs.push_back(
          OrgInfo{o.at("name").get<std::string>(), crypto::fixed_from_b58<32>(o.at("root_public").get<std::string>())});
    }
    for (const auto& c : j.at("collections")) {
      config.collections.push_back(CollectionConfig{c.at("name").get<std::string>(),
                                                    c.at("readers").get<std::set<std::string>>(),
                                                    c.at("writers").get<std::set<std::string>>()});
    }
    return config;
  });
}

const OrgInfo* ChannelConfig::find_org(std::string_view name) const {
  auto it = std::find_if(orgs.begin(), orgs.end(), [&](const OrgInfo& o) { return o.name == name; });
  return it == orgs.end() ? nullptr : &*it;
}

const CollectionConfig* ChannelConfig::find_collection(std::string_view name) const {
  auto it = std::find_if(collections.begin(), collections.end(), [&](const auto& c) { return c.name == name; });
  return it == collections.end() ? nullptr : &*it;
}

Json Invoker::to_json() const {
  return {{"org", org}, {"public", crypto::b58(public_key)}, {"cert", crypto::b58(cert)}};
}

Invoker Invoker::from_json(const Json& j) {
  return json_field("invoker", [&] {
    return Invoker{j.at("org").get<std::string>(), crypto::fixed_from_b58<32>(j.at("public").get<std::string>()),
                   crypto::fixed_from_b58<64>(j.at("cert").get<std::string>())};
  });
}

Json MemberIdentity::to_json() const {
  return {{"org", org}, {"keys", crypto::key_record(keys)}, {"cert", crypto::b58(cert)}};
}

MemberIdentity MemberIdentity::from_json(const Json& j) {
  return json_field("member identity", [&] {
    return MemberIdentity{j.at("org").get<std::string>(), crypto::signing_from_record(j.at("keys")),
                          crypto::fixed_from_b58<64>(j.at("cert").get<std::string>())};
  });
}

Bytes certificate_message(std::string_view org, const crypto::Key32& member_public) {
  return canon::serialize_bytes({{"org", org}, {"public", crypto::b58(member_public)}});
}

Json Transaction::proposal_json() const {
  return {{"chaincode", chaincode},
          {"function", function},
          {"args", args},
          {"transient_hash", transient_hash ? Json(transient_hash->b58()) : Json(nullptr)},
          {"invoker", invoker ? invoker->to_json() : Json(nullptr)},
          {"logical_time", logical_time}};
}

Json Transaction::to_json() const {
  Json j = proposal_json();
  j["signature"] = signature ? Json(crypto::b58(*signature)) : Json(nullptr);
  j["status"] = status_name(status);
  j["error"] = error;
  Json r = Json::array();
  for (const auto& e : reads) r.push_back({{"collection", e.collection}, {"key", e.key}});
  j["reads"] = r;
  Json w = Json::array();
  for (const auto& e : writes) {
    Json entry{{"collection", e.collection}, {"key", e.key}};
    if (e.value) entry["value"] = *e.value;
    if (e.value_hash) entry["hash"] = e.value_hash->b58();
    w.push_back(entry);
  }
  j["writes"] = w;
  return j;
}

Transaction Transaction::from_json(const Json& j) {
  return json_field("transaction", [&] {
    Transaction tx;
    if (!j.at("invoker").is_null()) tx.invoker = Invoker::from_json(j.at("invoker"));
    tx.chaincode = j.at("chaincode").get<std::string>();
    tx.function = j.at("function").get<std::string>();
    tx.args = j.at("args").get<std::vector<std::string>>();
    if (!j.at("transient_hash").is_null()) tx.transient_hash = crypto::Digest32::from_b58(j.at("transient_hash").get<std::string>());
    tx.logical_time = j.at("logical_time").get<std::uint64_t>();
    if (!j.at("signature").is_null()) tx.signature = crypto::fixed_from_b58<64>(j.at("signature").get<std::string>());
    const auto status = j.at("status").get<std::string>();
    if (status != "valid" && status != "rejected") throw Error(Errc::format, "unknown tx status " + status);
    tx.status = status == "valid" ? TxStatus::valid : TxStatus::rejected;
    tx.error = j.at("error").get<std::string>();
    for (const auto& r : j.at("reads")) {
      tx.reads.push_back(ReadEntry{r.at("collection").get<std::string>(), r.at("key").get<std::string>()});
    }
    for (const auto& w : j.at("writes")) {
      WriteEntry e{w.at("collection").get<std::string>(), w.at("key").get<std::string>(), std::nullopt, std::nullopt};
      if (w.contains("value")) e.value = w.at("value").get<std::string>();
      if (w.contains("hash")) e.value_hash = crypto::Digest32::from_b58(w.at("hash").get<std::string>());
      tx.writes.push_back(std::move(e));
    }
    return tx;
  });
}

crypto::Digest32 LedgerBlock::compute_hash() const {
  Json list = Json::array();
  for (const auto& tx : txs) list.push_back(tx.to_json());
  return crypto::sha256(concat(prev_hash.bytes, as_bytes(canon::serialize(list))));
}

Json LedgerBlock::to_json() const {
  Json list = Json::array();
  for (const auto& tx : txs) list.push_back(tx.to_json());
  return {{"height", height}, {"prev_hash", prev_hash.b58()}, {"txs", list}, {"block_hash", block_hash.b58()}};
}

LedgerBlock LedgerBlock::from_json(const Json& j) {
  return json_field("block", [&] {
    LedgerBlock b;
    b.height = j.at("height").get<std::uint64_t>();
    b.prev_hash = crypto::Digest32::from_b58(j.at("prev_hash").get<std::string>());
    for (const auto& tx : j.at("txs")) b.txs.push_back(Transaction::from_json(tx));
    b.block_hash = crypto::Digest32::from_b58(j.at("block_hash").get<std::string>());
    return b;
  });
}

Json ReplayState::to_json() const {
  Json w = Json::object();
  for (const auto& [k, v] : world) w[k] = v;
  Json h = Json::object();
  for (const auto& [collection, entries] : hashes) {
    Json c = Json::object();
    for (const auto& [k, d] : entries) c[k] = d.b58();
    h[collection] = c;
  }
  return {{"world", w}, {"collection_hashes", h}};
}

ReplayState replay(const std::vector<LedgerBlock>& blocks) {
  ReplayState state;
  for (const auto& block : blocks) {
    for (const auto& tx : block.txs) {
      if (tx.status != TxStatus::valid) continue;
      for (const auto& w : tx.writes) {
        if (w.collection.empty()) {
          if (w.value) state.world[w.key] = *w.value;
        } else if (w.value_hash) {
          state.hashes[w.collection][w.key] = *w.value_hash;
        }
      }
    }
  }
  return state;
}

VerifyReport verify_blocks(const std::vector<LedgerBlock>& blocks, const PrivateStore* private_data) {
  if (blocks.empty()) return bad(0, "missing genesis block");

  const auto& genesis = blocks.front();
  if (genesis.height != 0 || genesis.prev_hash != crypto::Digest32{} || genesis.txs.size() != 1) {
    return bad(0, "malformed genesis block");
  }
  const auto& config_tx = genesis.txs.front();
  if (config_tx.chaincode != kConfigChaincode || config_tx.function != kConfigFunction ||
      config_tx.args.size() != 1 || config_tx.invoker || config_tx.signature || !config_tx.writes.empty()) {
    return bad(0, "malformed channel config transaction");
  }
  ChannelConfig config;
  try {
    config = ChannelConfig::from_json(canon::parse(config_tx.args.front()));
    validate_config(config);
  } catch (const Error& e) {
    return bad(0, e.what());
  }
  if (genesis.compute_hash() != genesis.block_hash) return bad(0, "block hash mismatch");

  for (std::size_t i = 1; i < blocks.size(); ++i) {
    const auto& block = blocks[i];
    const auto h = static_cast<std::uint64_t>(i);
    if (block.height != h) return bad(h, "height out of sequence");
    if (block.prev_hash != blocks[i - 1].block_hash) return bad(h, "prev_hash does not link");
    if (block.compute_hash() != block.block_hash) return bad(h, "block hash mismatch");
    if (block.txs.size() != 1) return bad(h, "expected exactly one transaction");
    const auto& tx = block.txs.front();
    if (tx.logical_time != h) return bad(h, "logical time out of sequence");
    if (!tx.invoker || !tx.signature) return bad(h, "unsigned transaction");
    const auto* org = config.find_org(tx.invoker->org);
    if (!org) return bad(h, "unknown org " + tx.invoker->org);
    if (!crypto::verify(org->root_public, certificate_message(org->name, tx.invoker->public_key), tx.invoker->cert)) {
      return bad(h, "certificate does not verify");
    }
    if (!crypto::verify(tx.invoker->public_key, canon::serialize_bytes(tx.proposal_json()), *tx.signature)) {
      return bad(h, "transaction signature does not verify");
    }
    for (const auto& w : tx.writes) {
      if (w.collection.empty() ? !w.value || w.value_hash : w.value || !w.value_hash) {
        return bad(h, "malformed write entry");
      }
      if (!w.collection.empty() && !config.find_collection(w.collection)) return bad(h, "unknown collection");
    }
  }

  if (private_data) {
    auto state = replay(blocks);
    auto last_write = [&](const std::string& collection, const std::string& key) -> std::uint64_t {
      for (std::size_t i = blocks.size(); i-- > 1;) {
        for (const auto& w : blocks[i].txs.front().writes) {
          if (w.collection == collection && w.key == key) return i;
        }
      }
      return blocks.size() - 1;
    };
    for (const auto& [collection, entries] : state.hashes) {
      auto values = private_data->find(collection);
      for (const auto& [key, digest] : entries) {
        if (values == private_data->end() || !values->second.contains(key)) {
          return bad(last_write(collection, key), "off-ledger value missing for " + collection + "/" + key);
        }
        if (crypto::sha256(values->second.at(key)) != digest) {
          return bad(last_write(collection, key), "hash binding broken for " + collection + "/" + key);
        }
      }
    }
    for (const auto& [collection, values] : *private_data) {
      for (const auto& [key, value] : values) {
        auto c = state.hashes.find(collection);
        if (c == state.hashes.end() || !c->second.contains(key)) {
          return bad(blocks.size() - 1, "off-ledger value without on-ledger hash: " + collection + "/" + key);
        }
      }
    }
  }
  return {};
}

std::vector<LedgerBlock> parse_jsonl(std::string_view text) {
  std::vector<LedgerBlock> blocks;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty()) {
      auto block = LedgerBlock::from_json(canon::parse(line));
      if (canon::serialize(block.to_json()) != line) {
        throw Error(Errc::format, "non-canonical ledger line " + std::to_string(blocks.size()));
      }
      blocks.push_back(std::move(block));
    }
    start = end + 1;
  }
  return blocks;
}

VerifyReport verify_jsonl(std::string_view text, const PrivateStore* private_data) {
  std::vector<LedgerBlock> blocks;
  std::size_t start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(start, end - start);
    if (!line.empty()) {
      const auto h = static_cast<std::uint64_t>(blocks.size());
      try {
        auto block = LedgerBlock::from_json(canon::parse(line));
        if (canon::serialize(block.to_json()) != line) return bad(h, "non-canonical ledger line");
        blocks.push_back(std::move(block));
      } catch (const Error& e) {
        return bad(h, e.what());
      }
    }
    start = end + 1;
  }
  return verify_blocks(blocks, private_data);
}

std::vector<AuditRow> audit_rows(const std::vector<LedgerBlock>& blocks) {
  std::vector<AuditRow> rows;
  for (const auto& block : blocks) {
    if (block.height == 0) continue;
    for (const auto& tx : block.txs) {
      rows.push_back(AuditRow{block.height, tx.invoker ? tx.invoker->org : "", tx.chaincode, tx.function,
                              tx.status == TxStatus::valid ? "valid" : "rejected:" + tx.error});
    }
  }
  return rows;
}

ChaincodeContext::ChaincodeContext(const Channel& channel, const Invoker& invoker, std::uint64_t logical_time,
                                   const std::map<std::string, std::string>& transient)
    : channel_(channel), invoker_(invoker), logical_time_(logical_time), transient_(transient) {}

std::optional<std::string> ChaincodeContext::transient(const std::string& key) const {
  auto it = transient_.find(key);
  if (it == transient_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> ChaincodeContext::get_state(const std::string& key) {
  reads_.push_back(ReadEntry{"", key});
  if (auto it = world_writes_.find(key); it != world_writes_.end()) return it->second;
  auto it = channel_.world_.find(key);
  if (it == channel_.world_.end()) return std::nullopt;
  return it->second;
}

void ChaincodeContext::put_state(const std::string& key, std::string value) {
  if (key.empty()) throw Error(Errc::validation, "empty state key");
  world_writes_.insert_or_assign(key, std::move(value));
}

std::vector<std::pair<std::string, std::string>> ChaincodeContext::state_range(const std::string& prefix) {
  reads_.push_back(ReadEntry{"", prefix + "*"});
  std::map<std::string, std::string> merged;
  for (auto it = channel_.world_.lower_bound(prefix); it != channel_.world_.end() && it->first.starts_with(prefix); ++it) {
    merged.insert(*it);
  }
  for (auto it = world_writes_.lower_bound(prefix); it != world_writes_.end() && it->first.starts_with(prefix); ++it) {
    merged.insert_or_assign(it->first, it->second);
  }
  return {merged.begin(), merged.end()};
}

const CollectionConfig& ChaincodeContext::collection(const std::string& name) const {
  const auto* c = channel_.config_.find_collection(name);
  if (!c) throw Error(Errc::not_found, "collection " + name);
  return *c;
}

bool ChaincodeContext::can_read(const std::string& name) const { return collection(name).readers.contains(invoker_.org); }

bool ChaincodeContext::can_write(const std::string& name) const { return collection(name).writers.contains(invoker_.org); }

std::optional<std::string> ChaincodeContext::collection_get(const std::string& name, const std::string& key) {
  if (!can_read(name)) throw Error(Errc::access_denied, invoker_.org + ", " + name);
  reads_.push_back(ReadEntry{name, key});
  if (auto it = private_writes_.find({name, key}); it != private_writes_.end()) return it->second;
  auto c = channel_.private_.find(name);
  if (c == channel_.private_.end()) return std::nullopt;
  auto it = c->second.find(key);
  if (it == c->second.end()) return std::nullopt;
  return it->second;
}

void ChaincodeContext::collection_put(const std::string& name, const std::string& key, std::string value) {
  if (!can_write(name)) throw Error(Errc::access_denied, invoker_.org + ", " + name);
  if (key.empty()) throw Error(Errc::validation, "empty collection key");
  private_writes_.insert_or_assign({name, key}, std::move(value));
}

bool ChaincodeContext::collection_has(const std::string& name, const std::string& key) const {
  collection(name);
  if (private_writes_.contains({name, key})) return true;
  auto c = channel_.hashes_.find(name);
  return c != channel_.hashes_.end() && c->second.contains(key);
}

Channel::Channel(ChannelConfig config) : config_(std::move(config)) {}

std::unique_ptr<Channel> Channel::create(ChannelConfig config) {
  validate_config(config);
  std::unique_ptr<Channel> channel(new Channel(std::move(config)));
  LedgerBlock genesis;
  genesis.txs.push_back(config_transaction(channel->config_));
  genesis.block_hash = genesis.compute_hash();
  channel->blocks_.push_back(std::move(genesis));
  return channel;
}

std::unique_ptr<Channel> Channel::restore(std::vector<LedgerBlock> blocks, PrivateStore private_data) {
  auto report = verify_blocks(blocks, &private_data);
  if (!report.ok) {
    throw Error(Errc::config, "ledger does not verify at height " + std::to_string(report.first_bad_height.value_or(0)) +
                                  ": " + report.reason);
  }
  auto config = ChannelConfig::from_json(canon::parse(blocks.front().txs.front().args.front()));
  std::unique_ptr<Channel> channel(new Channel(std::move(config)));
  auto state = replay(blocks);
  channel->blocks_ = std::move(blocks);
  channel->world_ = std::move(state.world);
  channel->hashes_ = std::move(state.hashes);
  channel->private_ = std::move(private_data);
  return channel;
}

void Channel::install(const std::string& name, std::shared_ptr<Chaincode> chaincode) {
  std::lock_guard lock(mutex_);
  chaincodes_.insert_or_assign(name, std::move(chaincode));
}

MemberIdentity Channel::enroll(const Org& org, const crypto::SigningKeypair& keys) const {
  const auto* info = config_.find_org(org.name);
  if (!info) throw Error(Errc::enrollment, "unknown org " + org.name);
  if (info->root_public != org.root_keys.public_key()) throw Error(Errc::enrollment, "root key mismatch for " + org.name);
  return MemberIdentity{org.name, keys, org.root_keys.sign(certificate_message(org.name, keys.public_key()))};
}

void Channel::check_identity(const MemberIdentity& identity) const {
  const auto* org = config_.find_org(identity.org);
  if (!org) throw Error(Errc::auth, "unknown org " + identity.org);
  if (!crypto::verify(org->root_public, certificate_message(identity.org, identity.keys.public_key()), identity.cert)) {
    throw Error(Errc::auth, "certificate does not verify under " + identity.org);
  }
}

void Channel::append(Transaction tx) {
  LedgerBlock block;
  block.height = blocks_.size();
  block.prev_hash = blocks_.back().block_hash;
  block.txs.push_back(std::move(tx));
  block.block_hash = block.compute_hash();
  blocks_.push_back(std::move(block));
}

Receipt Channel::submit(const MemberIdentity& identity, const std::string& chaincode, const std::string& function,
                        std::vector<std::string> args, const std::map<std::string, std::string>& transient) {
  std::lock_guard lock(mutex_);
  check_identity(identity);

  Transaction tx;
  tx.invoker = identity.invoker();
  tx.chaincode = chaincode;
  tx.function = function;
  tx.args = std::move(args);
  if (!transient.empty()) tx.transient_hash = hash_transient(transient);
  tx.logical_time = blocks_.size();
  tx.signature = identity.keys.sign(canon::serialize_bytes(tx.proposal_json()));

  ChaincodeContext ctx(*this, *tx.invoker, tx.logical_time, transient);
  Json result;
  try {
    auto it = chaincodes_.find(chaincode);
    if (it == chaincodes_.end()) throw Error(Errc::not_found, "chaincode " + chaincode);
    result = it->second->invoke(ctx, function, tx.args);
    // Results are JSON; floats would make receipts non-canonical.
    canon::serialize(result);
  } catch (const Error& e) {
    tx.status = TxStatus::rejected;
    tx.error = std::string(to_string(e.code()));
    tx.reads = ctx.reads();
    append(std::move(tx));
    throw;
  } catch (const std::exception& e) {
    tx.status = TxStatus::rejected;
    tx.error = std::string(to_string(Errc::internal));
    tx.reads = ctx.reads();
    append(std::move(tx));
    throw Error(Errc::internal, e.what());
  }

  tx.reads = ctx.reads();
  for (const auto& [key, value] : ctx.pending_world()) tx.writes.push_back(WriteEntry{"", key, value, std::nullopt});
  for (const auto& [ck, value] : ctx.pending_private()) {
    tx.writes.push_back(WriteEntry{ck.first, ck.second, std::nullopt, crypto::sha256(value)});
  }
  for (const auto& [key, value] : ctx.pending_world()) world_[key] = value;
  for (const auto& [ck, value] : ctx.pending_private()) {
    hashes_[ck.first][ck.second] = crypto::sha256(value);
    private_[ck.first][ck.second] = value;
  }
  append(std::move(tx));
  return Receipt{blocks_.size() - 1, 0, std::move(result)};
}

std::uint64_t Channel::height() const {
  std::lock_guard lock(mutex_);
  return blocks_.size() - 1;
}

std::vector<LedgerBlock> Channel::blocks() const {
  std::lock_guard lock(mutex_);
  return blocks_;
}

LedgerBlock Channel::block(std::uint64_t height) const {
  std::lock_guard lock(mutex_);
  if (height >= blocks_.size()) throw Error(Errc::not_found, "block " + std::to_string(height));
  return blocks_[height];
}

VerifyReport Channel::verify() const {
  std::lock_guard lock(mutex_);
  auto report = verify_blocks(blocks_, &private_);
  if (!report.ok) return report;
  auto state = replay(blocks_);
  if (state.world != world_ || state.hashes != hashes_) {
    return bad(blocks_.size() - 1, "world state diverges from ledger replay");
  }
  return report;
}

ReplayState Channel::state() const {
  std::lock_guard lock(mutex_);
  return ReplayState{world_, hashes_};
}

WorldState Channel::world_state() const {
  std::lock_guard lock(mutex_);
  return world_;
}

std::optional<std::string> Channel::world_value(const std::string& key) const {
  std::lock_guard lock(mutex_);
  auto it = world_.find(key);
  if (it == world_.end()) return std::nullopt;
  return it->second;
}

PrivateStore Channel::private_store() const {
  std::lock_guard lock(mutex_);
  return private_;
}

std::string Channel::export_jsonl() const {
  std::lock_guard lock(mutex_);
  std::string out;
  for (const auto& block : blocks_) {
    out += canon::serialize(block.to_json());
    out += '\n';
  }
  return out;
}

void Channel::tamper_block(std::uint64_t height, const std::function<void(LedgerBlock&)>& edit) {
  std::lock_guard lock(mutex_);
  edit(blocks_.at(height));
}

void Channel::tamper_private(const std::string& collection, const std::string& key, std::string value) {
  std::lock_guard lock(mutex_);
  private_[collection][key] = std::move(value);
}

}  // namespace glass::ledger
