#include "glass/swarm.hpp"

#include <algorithm>

#include "glass/canonical_json.hpp"
#include "glass/error.hpp"

namespace glass::swarm {
namespace {

nlohmann::json id_list(const auto& ids) {
  auto out = nlohmann::json::array();
  for (const auto& id : ids) out.push_back(id.text());
  return out;
}

}  // namespace

crypto::Digest32 dht_key(const ContentId& cid) { return crypto::sha256(cid.multihash()); }

void Scheduler::schedule(std::uint64_t delay, std::function<void()> action) {
  queue_.push(Event{now_ + delay, seq_++, std::move(action)});
}

void Scheduler::run() {
  while (!queue_.empty()) {
    // priority_queue::top is const; move the action out before popping.
    auto event = std::move(const_cast<Event&>(queue_.top()));
    queue_.pop();
    now_ = event.time;
    ++delivered_;
    event.action();
  }
}

std::vector<ContentId> NodeHandle::provide(const dag::BlockSet& blocks) const {
  return network_->provide(*this, blocks);
}

std::set<NodeId> NodeHandle::find_providers(const ContentId& cid) const {
  return network_->find_providers(*this, cid);
}

Bytes NodeHandle::fetch(const ContentId& root) const { return network_->fetch(*this, root); }

Network::Network(const SwarmKey& swarm_key, std::uint64_t seed, Config config)
    : key_(swarm_key), fingerprint_(swarm_key.fingerprint()), config_(config), rng_(seed, "glass/swarm") {
  if (config_.k == 0 || config_.alpha == 0) throw Error(Errc::config, "k and alpha must be positive");
  if (config_.max_latency < config_.min_latency) throw Error(Errc::config, "latency range is empty");
}

Network::Node& Network::member(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end() || !it->second.active) throw Error(Errc::swarm_rejected, id.text());
  return it->second;
}

const Network::Node& Network::member(const NodeId& id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end() || !it->second.active) throw Error(Errc::swarm_rejected, id.text());
  return it->second;
}

bool Network::is_member(const NodeId& id) const {
  auto it = nodes_.find(id);
  return it != nodes_.end() && it->second.active;
}

std::size_t Network::member_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const auto& kv) { return kv.second.active; }));
}

std::vector<NodeId> Network::members() const {
  std::vector<NodeId> out;
  for (const auto& [id, node] : nodes_) {
    if (node.active) out.push_back(id);
  }
  return out;
}

std::size_t Network::provider_record_count() const {
  std::size_t n = 0;
  for (const auto& [id, node] : nodes_) {
    for (const auto& [cid, providers] : node.provider_store) n += providers.size();
  }
  return n;
}

std::uint64_t Network::latency() {
  return config_.min_latency + rng_.uniform(config_.max_latency - config_.min_latency + 1);
}

NodeHandle Network::join(const crypto::SigningKeypair& node_keys, const SwarmKey& presented) {
  if (presented.fingerprint() != fingerprint_) throw Error(Errc::swarm_rejected, "swarm key fingerprint mismatch");
  const NodeId id = node_id_of(node_keys.public_key());
  if (auto it = nodes_.find(id); it != nodes_.end()) {
    if (!it->second.active) throw Error(Errc::swarm_rejected, id.text());
    return NodeHandle(*this, id);
  }

  auto existing = members();
  // Deterministic partial Fisher-Yates for the bootstrap sample.
  const std::size_t take = std::min(config_.k, existing.size());
  for (std::size_t i = 0; i < take; ++i) {
    auto j = i + static_cast<std::size_t>(rng_.uniform(existing.size() - i));
    std::swap(existing[i], existing[j]);
  }
  existing.resize(take);

  Node node{id, RoutingTable(id, config_.k), {}, {}, true};
  for (const auto& peer : existing) {
    node.table.observe(peer);
    nodes_.at(peer).table.observe(id);
  }
  nodes_.emplace(id, std::move(node));

  auto stats = iterative_lookup(id, id.value, std::nullopt);
  trace_.push_back({{"op", "join"},
                    {"node", id.text()},
                    {"bootstrap", id_list(existing)},
                    {"visited", stats.visited},
                    {"time", scheduler_.now()}});
  return NodeHandle(*this, id);
}

void Network::revoke(const NodeId& id) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) return;
  it->second.active = false;
  trace_.push_back({{"op", "revoke"}, {"node", id.text()}, {"time", scheduler_.now()}});
}

void Network::send_find(const NodeId& from, const NodeId& to, const crypto::Digest32& target,
                        std::optional<ContentId> cid, std::function<void(const Reply&)> on_reply) {
  scheduler_.schedule(latency(), [this, from, to, target, cid, on_reply = std::move(on_reply)] {
    auto it = nodes_.find(to);
    if (it == nodes_.end() || !it->second.active) return;
    Node& responder = it->second;
    if (is_member(from)) responder.table.observe(from);
    Reply reply;
    reply.closer = responder.table.closest(target, config_.k);
    if (cid) {
      if (auto p = responder.provider_store.find(*cid); p != responder.provider_store.end()) {
        reply.providers = p->second;
      }
    }
    scheduler_.schedule(latency(), [on_reply, reply = std::move(reply)] { on_reply(reply); });
  });
}

LookupStats Network::iterative_lookup(const NodeId& self_id, const crypto::Digest32& target,
                                      std::optional<ContentId> cid) {
  Node& self = member(self_id);
  std::map<crypto::Digest32, NodeId> shortlist;  // ordered by XOR distance
  std::set<NodeId> queried{self_id};
  std::set<NodeId> responded{self_id};
  LookupStats stats;

  shortlist.emplace(xor_distance(self_id.value, target), self_id);
  if (cid) {
    if (auto p = self.provider_store.find(*cid); p != self.provider_store.end()) {
      stats.providers.insert(p->second.begin(), p->second.end());
    }
  }
  for (const auto& id : self.table.closest(target, config_.k)) {
    shortlist.emplace(xor_distance(id.value, target), id);
  }

  for (;;) {
    std::vector<NodeId> batch;
    std::size_t rank = 0;
    for (const auto& [dist, id] : shortlist) {
      if (rank++ >= config_.k || batch.size() >= config_.alpha) break;
      if (!queried.contains(id)) batch.push_back(id);
    }
    if (batch.empty()) break;

    for (const auto& peer : batch) {
      queried.insert(peer);
      ++stats.visited;
      send_find(self_id, peer, target, cid, [&, peer](const Reply& reply) {
        responded.insert(peer);
        nodes_.at(self_id).table.observe(peer);
        for (const auto& c : reply.closer) shortlist.emplace(xor_distance(c.value, target), c);
        stats.providers.insert(reply.providers.begin(), reply.providers.end());
      });
    }
    scheduler_.run();
    for (const auto& peer : batch) {
      if (!responded.contains(peer)) {
        shortlist.erase(xor_distance(peer.value, target));
        nodes_.at(self_id).table.remove(peer);
      }
    }
  }

  for (const auto& [dist, id] : shortlist) {
    if (stats.closest.size() >= config_.k) break;
    stats.closest.push_back(id);
  }
  return stats;
}

void Network::publish(const NodeId& self_id, const ContentId& cid) {
  auto stats = iterative_lookup(self_id, dht_key(cid), std::nullopt);
  const std::size_t n = std::min(config_.alpha, stats.closest.size());
  std::vector<NodeId> holders(stats.closest.begin(), stats.closest.begin() + static_cast<std::ptrdiff_t>(n));
  for (const auto& holder : holders) {
    if (holder == self_id) {
      nodes_.at(self_id).provider_store[cid].insert(self_id);
      continue;
    }
    scheduler_.schedule(latency(), [this, holder, self_id, cid] {
      auto it = nodes_.find(holder);
      if (it == nodes_.end() || !it->second.active) return;
      it->second.table.observe(self_id);
      it->second.provider_store[cid].insert(self_id);
    });
  }
  scheduler_.run();
  trace_.push_back({{"op", "provide"},
                    {"node", self_id.text()},
                    {"cid", cid.text()},
                    {"holders", id_list(holders)},
                    {"time", scheduler_.now()}});
}

std::vector<ContentId> Network::provide(const NodeHandle& node, const dag::BlockSet& blocks) {
  member(node.id());
  std::vector<ContentId> stored;
  for (const auto& [cid, bytes] : blocks) {
    nodes_.at(node.id()).blocks.insert_or_assign(cid, bytes);
    publish(node.id(), cid);
    stored.push_back(cid);
  }
  return stored;
}

LookupStats Network::find_providers_detailed(const NodeHandle& node, const ContentId& cid) {
  member(node.id());
  auto stats = iterative_lookup(node.id(), dht_key(cid), cid);
  trace_.push_back({{"op", "lookup"},
                    {"node", node.id().text()},
                    {"cid", cid.text()},
                    {"visited", stats.visited},
                    {"providers", id_list(stats.providers)},
                    {"time", scheduler_.now()}});
  return stats;
}

std::set<NodeId> Network::find_providers(const NodeHandle& node, const ContentId& cid) {
  return find_providers_detailed(node, cid).providers;
}

std::map<ContentId, Bytes> Network::want(const NodeId& self_id, const NodeId& peer,
                                         const std::vector<ContentId>& cids) {
  std::map<ContentId, Bytes> received;
  scheduler_.schedule(latency(), [this, self_id, peer, cids, &received] {
    auto it = nodes_.find(peer);
    if (it == nodes_.end() || !it->second.active) return;
    it->second.table.observe(self_id);
    std::map<ContentId, Bytes> have;
    for (const auto& cid : cids) {
      if (auto b = it->second.blocks.find(cid); b != it->second.blocks.end()) have.emplace(cid, b->second);
    }
    scheduler_.schedule(latency(), [&received, have = std::move(have)] { received = have; });
  });
  scheduler_.run();
  return received;
}

Bytes Network::fetch(const NodeHandle& node, const ContentId& root) {
  const NodeId self_id = node.id();
  member(self_id);

  std::map<ContentId, Bytes> got;
  std::set<NodeId> session_peers;
  std::set<NodeId> sources;
  auto rejected = nlohmann::json::array();
  std::vector<ContentId> wanted{root};
  std::size_t rounds = 0;

  auto accept = [&](const ContentId& cid, Bytes bytes, const NodeId& from) {
    if (cid_of_block(bytes) != cid) {
      rejected.push_back({{"cid", cid.text()}, {"peer", from.text()}});
      return false;
    }
    got.insert_or_assign(cid, std::move(bytes));
    sources.insert(from);
    session_peers.insert(from);
    return true;
  };

  while (!wanted.empty()) {
    ++rounds;
    std::vector<ContentId> missing;
    const auto& local = nodes_.at(self_id).blocks;
    for (const auto& cid : wanted) {
      auto it = local.find(cid);
      if (it != local.end() && cid_of_block(it->second) == cid) {
        got.insert_or_assign(cid, it->second);
      } else {
        missing.push_back(cid);
      }
    }

    // Want-list broadcast to peers that already served this session.
    for (const auto& peer : std::set<NodeId>(session_peers)) {
      if (missing.empty()) break;
      for (auto& [cid, bytes] : want(self_id, peer, missing)) accept(cid, std::move(bytes), peer);
      std::erase_if(missing, [&](const ContentId& c) { return got.contains(c); });
    }

    for (const auto& cid : missing) {
      bool corrupt = false;
      auto providers = iterative_lookup(self_id, dht_key(cid), cid).providers;
      providers.erase(self_id);
      for (const auto& peer : providers) {
        auto reply = want(self_id, peer, {cid});
        auto it = reply.find(cid);
        if (it == reply.end()) continue;
        if (accept(cid, std::move(it->second), peer)) break;
        corrupt = true;
      }
      if (!got.contains(cid)) {
        trace_.push_back({{"op", "fetch"},
                          {"node", self_id.text()},
                          {"root", root.text()},
                          {"status", corrupt ? "block-corrupt" : "content-unavailable"},
                          {"cid", cid.text()},
                          {"rejected", rejected},
                          {"time", scheduler_.now()}});
        throw Error(corrupt ? Errc::block_corrupt : Errc::content_unavailable, cid.text());
      }
    }

    std::vector<ContentId> next;
    for (const auto& cid : wanted) {
      if (auto interior = dag::decode_interior(got.at(cid))) {
        for (const auto& link : interior->links) {
          if (!got.contains(link)) next.push_back(link);
        }
      }
    }
    wanted = std::move(next);
  }

  Bytes data = dag::reassemble(root, [&](const ContentId& cid) -> std::optional<Bytes> {
    auto it = got.find(cid);
    if (it == got.end()) return std::nullopt;
    return it->second;
  });

  // A node that downloads content becomes a distributor of it.
  for (const auto& [cid, bytes] : got) {
    nodes_.at(self_id).blocks.insert_or_assign(cid, bytes);
    publish(self_id, cid);
  }

  trace_.push_back({{"op", "fetch"},
                    {"node", self_id.text()},
                    {"root", root.text()},
                    {"status", "ok"},
                    {"blocks", got.size()},
                    {"rounds", rounds},
                    {"sources", id_list(sources)},
                    {"rejected", rejected},
                    {"time", scheduler_.now()}});
  return data;
}

std::vector<NodeId> Network::record_holders(const ContentId& cid) const {
  std::vector<NodeId> out;
  for (const auto& [id, node] : nodes_) {
    if (node.provider_store.contains(cid)) out.push_back(id);
  }
  return out;
}

const RoutingTable& Network::routing_table(const NodeId& id) const { return member(id).table; }

bool Network::has_block(const NodeId& id, const ContentId& cid) const {
  auto it = nodes_.find(id);
  return it != nodes_.end() && it->second.blocks.contains(cid);
}

const std::map<ContentId, Bytes>& Network::local_blocks(const NodeId& id) const { return member(id).blocks; }

void Network::tamper_block(const NodeId& id, const ContentId& cid, Bytes bytes) {
  nodes_.at(id).blocks.insert_or_assign(cid, std::move(bytes));
}

std::string Network::trace_jsonl() const {
  std::string out;
  for (const auto& event : trace_) {
    out += canon::serialize(event);
    out += '\n';
  }
  return out;
}

crypto::Digest32 Network::state_digest() const {
  canon::Json state = canon::Json::object();
  for (const auto& [id, node] : nodes_) {
    canon::Json blocks = canon::Json::object();
    for (const auto& [cid, bytes] : node.blocks) blocks[cid.text()] = crypto::sha256(bytes).b58();
    canon::Json providers = canon::Json::object();
    for (const auto& [cid, set] : node.provider_store) providers[cid.text()] = id_list(set);
    state[id.text()] = {{"active", node.active},
                        {"table", id_list(node.table.all())},
                        {"blocks", blocks},
                        {"providers", providers}};
  }
  return crypto::sha256(canon::serialize(state));
}

}  // namespace glass::swarm
