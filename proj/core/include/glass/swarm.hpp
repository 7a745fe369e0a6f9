#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glass/cid.hpp"
#include "glass/crypto.hpp"
#include "glass/dag.hpp"
#include "glass/random.hpp"
#include "glass/routing_table.hpp"

namespace glass::swarm {

// Shared secret gating membership in a private swarm.
struct SwarmKey {
  crypto::Key32 key{};

  crypto::Digest32 fingerprint() const { return crypto::sha256(key); }
  static SwarmKey generate(RandomSource& rng) { return SwarmKey{rng.array<32>()}; }
  bool operator==(const SwarmKey&) const = default;
};

struct Config {
  std::size_t k = 20;
  std::size_t alpha = 3;
  std::uint64_t min_latency = 1;
  std::uint64_t max_latency = 40;
};

// Lookup key of a cid in the XOR metric space.
crypto::Digest32 dht_key(const ContentId& cid);

// Single-threaded discrete-event queue. Ties on time break by insertion order.
class Scheduler {
 public:
  void schedule(std::uint64_t delay, std::function<void()> action);
  // Runs events until the queue is empty.
  void run();
  std::uint64_t now() const noexcept { return now_; }
  std::uint64_t delivered() const noexcept { return delivered_; }

 private:
  struct Event {
    std::uint64_t time;
    std::uint64_t seq;
    std::function<void()> action;
    bool operator>(const Event& other) const {
      return time != other.time ? time > other.time : seq > other.seq;
    }
  };
  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
  std::uint64_t delivered_ = 0;
};

class Network;

// Address of a node inside one Network. A handle may name a node that was
// never admitted; every operation through it then fails with swarm-rejected.
class NodeHandle {
 public:
  NodeHandle(Network& network, NodeId id) : network_(&network), id_(id) {}

  const NodeId& id() const noexcept { return id_; }
  Network& network() const noexcept { return *network_; }

  std::vector<ContentId> provide(const dag::BlockSet& blocks) const;
  std::set<NodeId> find_providers(const ContentId& cid) const;
  Bytes fetch(const ContentId& root) const;

 private:
  Network* network_;
  NodeId id_;
};

struct LookupStats {
  std::size_t visited = 0;
  std::vector<NodeId> closest;
  std::set<NodeId> providers;
};

// In-process simulation of a private content swarm: swarm-key gated
// membership, Kademlia provider records and want-list block exchange. Message
// delivery is ordered by a seeded scheduler, so a fixed seed replays the same
// trace. Not thread-safe; drive one Network from one thread.
class Network {
 public:
  Network(const SwarmKey& swarm_key, std::uint64_t seed, Config config = {});

  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  const Config& config() const noexcept { return config_; }
  const crypto::Digest32& fingerprint() const noexcept { return fingerprint_; }

  // Admits the node iff presented.fingerprint() matches. Errors:
  // Errc::swarm_rejected (nothing about the network is revealed or changed).
  NodeHandle join(const crypto::SigningKeypair& node_keys, const SwarmKey& presented);
  // Later operations by the node fail with swarm-rejected.
  void revoke(const NodeId& id);

  bool is_member(const NodeId& id) const;
  std::size_t member_count() const;
  std::vector<NodeId> members() const;
  std::size_t provider_record_count() const;

  std::vector<ContentId> provide(const NodeHandle& node, const dag::BlockSet& blocks);
  std::set<NodeId> find_providers(const NodeHandle& node, const ContentId& cid);
  LookupStats find_providers_detailed(const NodeHandle& node, const ContentId& cid);
  Bytes fetch(const NodeHandle& node, const ContentId& root);

  // Nodes currently storing a provider record for cid.
  std::vector<NodeId> record_holders(const ContentId& cid) const;
  const RoutingTable& routing_table(const NodeId& id) const;
  bool has_block(const NodeId& id, const ContentId& cid) const;
  const std::map<ContentId, Bytes>& local_blocks(const NodeId& id) const;

  // Fault injection: replaces the bytes a node serves for cid.
  void tamper_block(const NodeId& id, const ContentId& cid, Bytes bytes);

  // Ordered canonical JSON events (join/provide/lookup/fetch).
  const std::vector<nlohmann::json>& trace() const noexcept { return trace_; }
  std::string trace_jsonl() const;

  // Digest over every node's routing table, blocks and provider store.
  crypto::Digest32 state_digest() const;
  std::uint64_t now() const noexcept { return scheduler_.now(); }
  std::uint64_t messages_delivered() const noexcept { return scheduler_.delivered(); }

 private:
  struct Node {
    NodeId id;
    RoutingTable table;
    std::map<ContentId, Bytes> blocks;
    std::map<ContentId, std::set<NodeId>> provider_store;
    bool active = true;
  };

  struct Reply {
    std::vector<NodeId> closer;
    std::set<NodeId> providers;
  };

  Node& member(const NodeId& id);
  const Node& member(const NodeId& id) const;
  std::uint64_t latency();

  // Request/response through the scheduler. on_reply is not invoked when the
  // target is no longer an active member.
  void send_find(const NodeId& from, const NodeId& to, const crypto::Digest32& target,
                 std::optional<ContentId> cid, std::function<void(const Reply&)> on_reply);
  LookupStats iterative_lookup(const NodeId& self, const crypto::Digest32& target,
                               std::optional<ContentId> cid);
  void publish(const NodeId& self, const ContentId& cid);
  std::map<ContentId, Bytes> want(const NodeId& self, const NodeId& peer, const std::vector<ContentId>& cids);

  SwarmKey key_;
  crypto::Digest32 fingerprint_;
  Config config_;
  SeededRandom rng_;
  Scheduler scheduler_;
  std::map<NodeId, Node> nodes_;
  std::vector<nlohmann::json> trace_;
};

}  // namespace glass::swarm
