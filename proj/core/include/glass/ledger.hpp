#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "glass/crypto.hpp"

namespace glass {
class RandomSource;
}

namespace glass::ledger {

// An organisation and its root signing key; only the root public key is
// part of the channel configuration.
struct Org {
  std::string name;
  crypto::SigningKeypair root_keys;

  static Org generate(std::string name, RandomSource& rng);
};

struct OrgInfo {
  std::string name;
  crypto::Key32 root_public{};

  bool operator==(const OrgInfo&) const = default;
};

struct CollectionConfig {
  std::string name;
  std::set<std::string> readers;
  std::set<std::string> writers;

  bool operator==(const CollectionConfig&) const = default;
};

struct ChannelConfig {
  std::vector<OrgInfo> orgs;
  std::vector<CollectionConfig> collections;

  nlohmann::json to_json() const;
  static ChannelConfig from_json(const nlohmann::json& j);
  const OrgInfo* find_org(std::string_view name) const;
  const CollectionConfig* find_collection(std::string_view name) const;
};

// Public part of an enrolled member: org, key and the org root's certificate.
struct Invoker {
  std::string org;
  crypto::Key32 public_key{};
  crypto::Signature cert{};

  nlohmann::json to_json() const;
  static Invoker from_json(const nlohmann::json& j);
  bool operator==(const Invoker&) const = default;
};

struct MemberIdentity {
  std::string org;
  crypto::SigningKeypair keys;
  crypto::Signature cert{};

  Invoker invoker() const { return Invoker{org, keys.public_key(), cert}; }
  nlohmann::json to_json() const;  // includes the secret; keystore use only
  static MemberIdentity from_json(const nlohmann::json& j);
};

// Bytes the org root signs when enrolling a member.
Bytes certificate_message(std::string_view org, const crypto::Key32& member_public);

enum class TxStatus { valid, rejected };

struct ReadEntry {
  std::string collection;  // empty for world state
  std::string key;
  bool operator==(const ReadEntry&) const = default;
};

// World-state writes carry the value; private-collection writes carry only
// the value hash, the value itself stays off-ledger.
struct WriteEntry {
  std::string collection;  // empty for world state
  std::string key;
  std::optional<std::string> value;
  std::optional<crypto::Digest32> value_hash;
  bool operator==(const WriteEntry&) const = default;
};

struct Transaction {
  std::optional<Invoker> invoker;  // absent only for the genesis config tx
  std::string chaincode;
  std::string function;
  std::vector<std::string> args;
  std::optional<crypto::Digest32> transient_hash;
  std::uint64_t logical_time = 0;
  std::optional<crypto::Signature> signature;
  TxStatus status = TxStatus::valid;
  std::string error;
  std::vector<ReadEntry> reads;
  std::vector<WriteEntry> writes;

  // The signed proposal: everything decided before execution.
  nlohmann::json proposal_json() const;
  nlohmann::json to_json() const;
  static Transaction from_json(const nlohmann::json& j);
  bool operator==(const Transaction&) const = default;
};

struct LedgerBlock {
  std::uint64_t height = 0;
  crypto::Digest32 prev_hash;
  std::vector<Transaction> txs;
  crypto::Digest32 block_hash;

  // sha256(prev_hash || canonical JSON of txs)
  crypto::Digest32 compute_hash() const;
  nlohmann::json to_json() const;
  static LedgerBlock from_json(const nlohmann::json& j);
};

struct Receipt {
  std::uint64_t block_height = 0;
  std::size_t tx_index = 0;
  nlohmann::json result;
};

using PrivateStore = std::map<std::string, std::map<std::string, std::string>>;
using HashStore = std::map<std::string, std::map<std::string, crypto::Digest32>>;
using WorldState = std::map<std::string, std::string>;

// State derivable from the ledger alone.
struct ReplayState {
  WorldState world;
  HashStore hashes;

  nlohmann::json to_json() const;
  bool operator==(const ReplayState&) const = default;
};

// Applies the write sets of every valid transaction from genesis.
ReplayState replay(const std::vector<LedgerBlock>& blocks);

struct VerifyReport {
  bool ok = true;
  std::optional<std::uint64_t> first_bad_height;
  std::string reason;
};

// Checks hash linkage, certificates, signatures and (when private_data is
// given) that every off-ledger value matches its on-ledger hash.
VerifyReport verify_blocks(const std::vector<LedgerBlock>& blocks, const PrivateStore* private_data);

// Parses a ledger.jsonl export. Lines that fail to parse, or that are not
// the canonical encoding of the block they decode to, are reported as the
// first bad height.
VerifyReport verify_jsonl(std::string_view text, const PrivateStore* private_data);
std::vector<LedgerBlock> parse_jsonl(std::string_view text);

struct AuditRow {
  std::uint64_t height;
  std::string org;
  std::string chaincode;
  std::string function;
  std::string status;  // "valid" or "rejected:<error>"
};

std::vector<AuditRow> audit_rows(const std::vector<LedgerBlock>& blocks);

class Channel;

// Execution context handed to chaincode. Writes are buffered and committed
// only when the invocation succeeds.
class ChaincodeContext {
 public:
  ChaincodeContext(const Channel& channel, const Invoker& invoker, std::uint64_t logical_time,
                   const std::map<std::string, std::string>& transient);

  const std::string& invoker_org() const noexcept { return invoker_.org; }
  const crypto::Key32& invoker_public() const noexcept { return invoker_.public_key; }
  std::uint64_t logical_time() const noexcept { return logical_time_; }

  std::optional<std::string> transient(const std::string& key) const;

  std::optional<std::string> get_state(const std::string& key);
  void put_state(const std::string& key, std::string value);
  // Committed world-state entries whose key starts with prefix, plus
  // this invocation's pending writes.
  std::vector<std::pair<std::string, std::string>> state_range(const std::string& prefix);

  bool can_read(const std::string& collection) const;
  bool can_write(const std::string& collection) const;
  // Errors: Errc::access_denied "org, collection" (nothing is returned).
  std::optional<std::string> collection_get(const std::string& collection, const std::string& key);
  void collection_put(const std::string& collection, const std::string& key, std::string value);
  // Existence via the on-ledger hash; allowed for every channel org.
  bool collection_has(const std::string& collection, const std::string& key) const;

  const std::vector<ReadEntry>& reads() const noexcept { return reads_; }
  const std::map<std::string, std::string>& pending_world() const noexcept { return world_writes_; }
  const std::map<std::pair<std::string, std::string>, std::string>& pending_private() const noexcept {
    return private_writes_;
  }

 private:
  const CollectionConfig& collection(const std::string& name) const;

  const Channel& channel_;
  Invoker invoker_;
  std::uint64_t logical_time_;
  const std::map<std::string, std::string>& transient_;
  std::vector<ReadEntry> reads_;
  std::map<std::string, std::string> world_writes_;
  std::map<std::pair<std::string, std::string>, std::string> private_writes_;
};

class Chaincode {
 public:
  virtual ~Chaincode() = default;
  // Throw glass::Error to reject; the returned JSON is the receipt result.
  virtual nlohmann::json invoke(ChaincodeContext& ctx, std::string_view function,
                                const std::vector<std::string>& args) = 0;
};

// Single-peer permissioned ledger: one transaction per block, a world state
// and private data collections whose values stay off-ledger.
//
// Thread-safety: submissions are serialized by an internal mutex; accessors
// return snapshots. Chaincode runs under that mutex and must not call back
// into submit().
class Channel {
 public:
  // Errors: Errc::config for zero orgs, duplicate names, or collection
  // policies naming unknown orgs.
  static std::unique_ptr<Channel> create(ChannelConfig config);
  // Rebuilds a channel from persisted blocks and the off-ledger store.
  // Errors: Errc::config when the genesis block is malformed or the chain
  // does not verify.
  static std::unique_ptr<Channel> restore(std::vector<LedgerBlock> blocks, PrivateStore private_data);

  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  const ChannelConfig& config() const noexcept { return config_; }
  void install(const std::string& name, std::shared_ptr<Chaincode> chaincode);

  // Errors: Errc::enrollment when the org is not in the channel or its root
  // key differs from the configured one.
  MemberIdentity enroll(const Org& org, const crypto::SigningKeypair& keys) const;

  // Errors: Errc::auth for an invalid certificate (nothing is appended).
  // Chaincode errors are rethrown after a rejected transaction is appended.
  Receipt submit(const MemberIdentity& identity, const std::string& chaincode, const std::string& function,
                 std::vector<std::string> args, const std::map<std::string, std::string>& transient = {});

  std::uint64_t height() const;
  std::vector<LedgerBlock> blocks() const;
  LedgerBlock block(std::uint64_t height) const;
  VerifyReport verify() const;
  bool verify_chain() const { return verify().ok; }

  ReplayState state() const;
  WorldState world_state() const;
  std::optional<std::string> world_value(const std::string& key) const;
  PrivateStore private_store() const;
  std::string export_jsonl() const;

  // Fault injection for tamper-evidence tests.
  void tamper_block(std::uint64_t height, const std::function<void(LedgerBlock&)>& edit);
  void tamper_private(const std::string& collection, const std::string& key, std::string value);

 private:
  friend class ChaincodeContext;
  explicit Channel(ChannelConfig config);
  void check_identity(const MemberIdentity& identity) const;
  void append(Transaction tx);

  ChannelConfig config_;
  std::map<std::string, std::shared_ptr<Chaincode>> chaincodes_;
  std::vector<LedgerBlock> blocks_;
  WorldState world_;
  HashStore hashes_;
  PrivateStore private_;
  mutable std::mutex mutex_;
};

}  // namespace glass::ledger
