#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include <glass/dag.hpp>
#include <glass/ledger.hpp>
#include <glass/portal.hpp>
#include <glass/random.hpp>
#include <glass/swarm.hpp>

namespace glass::cli {

namespace fs = std::filesystem;

struct InitOptions {
  std::uint64_t seed = 0;
  std::size_t swarm_nodes = 8;
  std::size_t chunk_size = dag::kDefaultChunkSize;

  // Errors: Errc::config for unknown keys or out-of-range values.
  static InitOptions from_json(const nlohmann::json& j);
};

// Errors: Errc::config with the parser's line/column, or Errc::io.
nlohmann::json read_json_file(const fs::path& path);
std::string read_text_file(const fs::path& path);
// Writes through a temporary file and rename.
void write_text_file(const fs::path& path, std::string_view text);

// Exclusive lock file held for the lifetime of the object.
class WorkspaceLock {
 public:
  // Errors: Errc::config when another writer holds the lock.
  explicit WorkspaceLock(fs::path path);
  ~WorkspaceLock();
  WorkspaceLock(const WorkspaceLock&) = delete;
  WorkspaceLock& operator=(const WorkspaceLock&) = delete;

 private:
  fs::path path_;
};

// On-disk layout:
//   manifest.json     seed, channel config, swarm fingerprint
//   ledger.jsonl      one canonical block per line
//   collections.json  off-ledger private collection values
//   registry.json     registry dump derived from world state
//   blocks/<cid>      raw swarm blocks
//   keystore/         org roots, member identities, swarm key, wallets
// The swarm is rebuilt on open from the seed and blocks/.
class Workspace {
 public:
  static bool exists(const fs::path& dir);
  // Errors: Errc::already_exists when dir already holds a manifest.
  static void init(const fs::path& dir, const InitOptions& options);
  // Errors: Errc::config for a missing or unreadable workspace.
  static std::unique_ptr<Workspace> open(const fs::path& dir);

  Workspace(const Workspace&) = delete;
  Workspace& operator=(const Workspace&) = delete;

  const fs::path& dir() const noexcept { return dir_; }
  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t chunk_size() const noexcept { return chunk_size_; }
  ledger::Channel& channel() { return *channel_; }
  swarm::Network& network() { return *network_; }

  // Errors: Errc::not_found for an org outside the channel.
  const ledger::MemberIdentity& member(const std::string& org) const;
  swarm::NodeHandle node_for(const std::string& org);

  // Stream derived from the seed, a purpose label and the current ledger
  // height, so reruns of the same command sequence repeat exactly.
  SeededRandom rng(std::string_view purpose) const;

  bool has_wallet(const std::string& name) const;
  // Errors: Errc::not_found.
  portal::Wallet& wallet(const std::string& name);
  // Deterministic in (seed, name). Errors: Errc::already_exists.
  portal::Wallet& create_wallet(const std::string& name);
  portal::Wallet& ensure_wallet(const std::string& name);

  // Persists ledger, collections, registry, blocks and wallets.
  void save();

 private:
  explicit Workspace(fs::path dir);

  fs::path dir_;
  std::unique_ptr<WorkspaceLock> lock_;
  std::uint64_t seed_ = 0;
  std::size_t chunk_size_ = dag::kDefaultChunkSize;
  std::map<std::string, ledger::MemberIdentity> members_;
  std::map<std::string, std::size_t> org_nodes_;
  std::vector<swarm::NodeId> nodes_;
  std::unique_ptr<ledger::Channel> channel_;
  std::unique_ptr<swarm::Network> network_;
  std::map<std::string, portal::Wallet> wallets_;
};

}  // namespace glass::cli
