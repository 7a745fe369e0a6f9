#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "glass/crypto.hpp"

namespace glass::swarm {

struct NodeId {
  crypto::Digest32 value;

  std::string text() const { return value.b58(); }
  auto operator<=>(const NodeId&) const = default;
};

// sha256 of the node's signing public key.
NodeId node_id_of(const crypto::Key32& signing_public);

crypto::Digest32 xor_distance(const crypto::Digest32& a, const crypto::Digest32& b);

// Index of the highest set bit of the XOR distance, 255 for the most
// significant bit of byte 0; -1 when a == b.
int bucket_index(const crypto::Digest32& a, const crypto::Digest32& b);

// 256 k-buckets ordered least- to most-recently seen. A full bucket keeps its
// existing contacts (every simulated node stays reachable, so the oldest
// contact would always answer the liveness ping).
class RoutingTable {
 public:
  static constexpr std::size_t kBuckets = 256;

  RoutingTable(NodeId self, std::size_t k);

  const NodeId& self() const noexcept { return self_; }
  std::size_t k() const noexcept { return k_; }

  // Returns true when id is present after the call.
  bool observe(const NodeId& id);
  void remove(const NodeId& id);
  bool contains(const NodeId& id) const;

  // Up to n known ids sorted by XOR distance to target (self excluded).
  std::vector<NodeId> closest(const crypto::Digest32& target, std::size_t n) const;

  const std::deque<NodeId>& bucket(std::size_t index) const { return buckets_.at(index); }
  std::size_t size() const noexcept { return size_; }
  std::vector<NodeId> all() const;

 private:
  NodeId self_;
  std::size_t k_;
  std::size_t size_ = 0;
  std::array<std::deque<NodeId>, kBuckets> buckets_;
};

}  // namespace glass::swarm
