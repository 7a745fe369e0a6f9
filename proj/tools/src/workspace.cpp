#include "glass_cli/workspace.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <fstream>
#include <regex>
#include <sstream>

#include <glass/canonical_json.hpp>
#include <glass/chaincode.hpp>
#include <glass/error.hpp>

namespace glass::cli {

using Json = nlohmann::json;

namespace {

constexpr std::string_view kFormat = "glass-workspace/1";

const std::vector<std::string>& channel_orgs() {
  static const std::vector<std::string> orgs = {std::string(registry::kOrg1), std::string(registry::kOrg2),
                                                std::string(registry::kAuthorityOrg)};
  return orgs;
}

void check_name(const std::string& name) {
  static const std::regex pattern("[A-Za-z0-9_.-]{1,64}");
  if (!std::regex_match(name, pattern) || name == "." || name == "..") {
    throw Error(Errc::validation, "bad wallet name " + name);
  }
}

fs::path wallet_path(const fs::path& dir, const std::string& name) {
  return dir / "keystore" / "wallets" / (name + ".json");
}

}  // namespace

InitOptions InitOptions::from_json(const Json& j) {
  if (!j.is_object()) throw Error(Errc::config, "config must be a JSON object");
  InitOptions o;
  for (const auto& [key, value] : j.items()) {
    if (key != "seed" && key != "swarm_nodes" && key != "chunk_size") throw Error(Errc::config, "unknown key " + key);
    if (!value.is_number_unsigned()) throw Error(Errc::config, key + " must be a non-negative integer");
  }
  o.seed = j.value("seed", o.seed);
  o.swarm_nodes = j.value("swarm_nodes", o.swarm_nodes);
  o.chunk_size = j.value("chunk_size", o.chunk_size);
  if (o.swarm_nodes < channel_orgs().size() || o.swarm_nodes > 256) {
    throw Error(Errc::config, "swarm_nodes must be between 3 and 256");
  }
  if (o.chunk_size == 0) throw Error(Errc::config, "chunk_size must be positive");
  return o;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Json read_json_file(const fs::path& path) {
  auto text = read_text_file(path);
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::config, path.string() + ": " + e.what());
  }
}

void write_text_file(const fs::path& path, std::string_view text) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io, "cannot write " + tmp.string());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::io, "short write to " + tmp.string());
  }
  fs::rename(tmp, path);
}

WorkspaceLock::WorkspaceLock(fs::path path) : path_(std::move(path)) {
  int fd = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
  if (fd < 0) throw Error(Errc::config, "workspace is locked by another writer (" + path_.string() + ")");
  auto pid = std::to_string(::getpid()) + "\n";
  [[maybe_unused]] auto n = ::write(fd, pid.data(), pid.size());
  ::close(fd);
}

WorkspaceLock::~WorkspaceLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

bool Workspace::exists(const fs::path& dir) { return fs::exists(dir / "manifest.json"); }

void Workspace::init(const fs::path& dir, const InitOptions& options) {
  if (exists(dir)) throw Error(Errc::already_exists, "workspace " + dir.string());
  fs::create_directories(dir / "blocks");
  fs::create_directories(dir / "keystore" / "wallets");
  WorkspaceLock lock(dir / ".lock");

  std::map<std::string, ledger::Org> orgs;
  std::vector<ledger::OrgInfo> infos;
  for (const auto& name : channel_orgs()) {
    SeededRandom rng(options.seed, "org/" + name);
    auto org = ledger::Org::generate(name, rng);
    infos.push_back({name, org.root_keys.public_key()});
    orgs.emplace(name, std::move(org));
  }
  auto config = registry::glass_channel_config(infos[0], infos[1], infos[2]);
  auto channel = ledger::Channel::create(config);

  Json org_store = Json::object();
  for (const auto& [name, org] : orgs) {
    SeededRandom rng(options.seed, "member/" + name);
    auto member = channel->enroll(org, crypto::SigningKeypair::generate(rng));
    org_store[name] = {{"root", crypto::key_record(org.root_keys)}, {"member", member.to_json()}};
  }
  SeededRandom swarm_rng(options.seed, "swarm-key");
  auto swarm_key = swarm::SwarmKey::generate(swarm_rng);

  Json manifest = {{"format", kFormat},
                   {"seed", options.seed},
                   {"chunk_size", options.chunk_size},
                   {"swarm", {{"nodes", options.swarm_nodes}, {"fingerprint", swarm_key.fingerprint()}}},
                   {"channel", config.to_json()}};
  write_text_file(dir / "keystore" / "orgs.json", canon::serialize(org_store));
  write_text_file(dir / "keystore" / "swarm.json", canon::serialize(Json{{"key", crypto::b58(swarm_key.key)}}));
  write_text_file(dir / "ledger.jsonl", channel->export_jsonl());
  write_text_file(dir / "collections.json", canon::serialize(Json(channel->private_store())));
  write_text_file(dir / "registry.json", canon::serialize(registry::registry_dump(channel->world_state())));
  write_text_file(dir / "manifest.json", canon::serialize(manifest));
}

Workspace::Workspace(fs::path dir) : dir_(std::move(dir)) {}

std::unique_ptr<Workspace> Workspace::open(const fs::path& dir) {
  if (!exists(dir)) throw Error(Errc::config, "no workspace at " + dir.string() + " (run init)");
  std::unique_ptr<Workspace> ws(new Workspace(dir));
  ws->lock_ = std::make_unique<WorkspaceLock>(dir / ".lock");

  auto manifest = read_json_file(dir / "manifest.json");
  auto org_store = read_json_file(dir / "keystore" / "orgs.json");
  auto swarm_store = read_json_file(dir / "keystore" / "swarm.json");
  std::size_t node_count = 0;
  swarm::SwarmKey swarm_key;
  try {
    if (manifest.at("format") != kFormat) throw Error(Errc::config, "unsupported workspace format");
    ws->seed_ = manifest.at("seed").get<std::uint64_t>();
    ws->chunk_size_ = manifest.at("chunk_size").get<std::size_t>();
    node_count = manifest.at("swarm").at("nodes").get<std::size_t>();
    for (const auto& [name, entry] : org_store.items()) {
      ws->members_.emplace(name, ledger::MemberIdentity::from_json(entry.at("member")));
    }
    swarm_key.key = crypto::fixed_from_b58<32>(swarm_store.at("key").get<std::string>());
  } catch (const Json::exception& e) {
    throw Error(Errc::config, std::string("manifest: ") + e.what());
  }

  auto blocks = ledger::parse_jsonl(read_text_file(dir / "ledger.jsonl"));
  auto private_data = read_json_file(dir / "collections.json").get<ledger::PrivateStore>();
  ws->channel_ = ledger::Channel::restore(std::move(blocks), std::move(private_data));
  registry::install_glass_chaincodes(*ws->channel_);

  ws->network_ = std::make_unique<swarm::Network>(swarm_key, ws->seed_);
  for (std::size_t i = 0; i < node_count; ++i) {
    SeededRandom rng(ws->seed_, "node/" + std::to_string(i));
    ws->nodes_.push_back(ws->network_->join(crypto::SigningKeypair::generate(rng), swarm_key).id());
  }
  const auto& orgs = ws->channel_->config().orgs;
  for (std::size_t i = 0; i < orgs.size(); ++i) ws->org_nodes_[orgs[i].name] = i % node_count;

  dag::BlockSet stored;
  for (const auto& entry : fs::directory_iterator(dir / "blocks")) {
    if (!entry.is_regular_file() || entry.path().extension() == ".tmp") continue;
    auto cid = ContentId::parse(entry.path().filename().string());
    auto text = read_text_file(entry.path());
    stored.insert(cid, to_bytes(text));
  }
  if (!stored.empty()) ws->network_->provide(swarm::NodeHandle(*ws->network_, ws->nodes_.front()), stored);

  for (const auto& entry : fs::directory_iterator(dir / "keystore" / "wallets")) {
    if (entry.path().extension() != ".json") continue;
    auto wallet = portal::Wallet::from_keystore(read_json_file(entry.path()));
    ws->wallets_.emplace(entry.path().stem().string(), std::move(wallet));
  }
  return ws;
}

const ledger::MemberIdentity& Workspace::member(const std::string& org) const {
  auto it = members_.find(org);
  if (it == members_.end()) throw Error(Errc::not_found, "org " + org);
  return it->second;
}

swarm::NodeHandle Workspace::node_for(const std::string& org) {
  auto it = org_nodes_.find(org);
  if (it == org_nodes_.end()) throw Error(Errc::not_found, "org " + org);
  return swarm::NodeHandle(*network_, nodes_.at(it->second));
}

SeededRandom Workspace::rng(std::string_view purpose) const {
  return SeededRandom(seed_, std::string(purpose) + "/" + std::to_string(channel_->height()));
}

bool Workspace::has_wallet(const std::string& name) const { return wallets_.contains(name); }

portal::Wallet& Workspace::wallet(const std::string& name) {
  auto it = wallets_.find(name);
  if (it == wallets_.end()) throw Error(Errc::not_found, "wallet " + name);
  return it->second;
}

portal::Wallet& Workspace::create_wallet(const std::string& name) {
  check_name(name);
  if (has_wallet(name)) throw Error(Errc::already_exists, "wallet " + name);
  SeededRandom rng(seed_, "wallet/" + name);
  return wallets_.emplace(name, portal::Wallet::generate(rng)).first->second;
}

portal::Wallet& Workspace::ensure_wallet(const std::string& name) {
  return has_wallet(name) ? wallet(name) : create_wallet(name);
}

void Workspace::save() {
  write_text_file(dir_ / "ledger.jsonl", channel_->export_jsonl());
  write_text_file(dir_ / "collections.json", canon::serialize(Json(channel_->private_store())));
  write_text_file(dir_ / "registry.json", canon::serialize(registry::registry_dump(channel_->world_state())));
  for (const auto& id : nodes_) {
    for (const auto& [cid, bytes] : network_->local_blocks(id)) {
      auto path = dir_ / "blocks" / cid.text();
      if (!fs::exists(path)) write_text_file(path, to_string(bytes));
    }
  }
  for (const auto& [name, wallet] : wallets_) {
    write_text_file(wallet_path(dir_, name), canon::serialize(wallet.keystore_json()));
  }
}

}  // namespace glass::cli
