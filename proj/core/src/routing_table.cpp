#include "glass/routing_table.hpp"

#include <algorithm>
#include <bit>

namespace glass::swarm {

NodeId node_id_of(const crypto::Key32& signing_public) { return NodeId{crypto::sha256(signing_public)}; }

crypto::Digest32 xor_distance(const crypto::Digest32& a, const crypto::Digest32& b) {
  crypto::Digest32 d;
  for (std::size_t i = 0; i < d.bytes.size(); ++i) d.bytes[i] = a.bytes[i] ^ b.bytes[i];
  return d;
}

int bucket_index(const crypto::Digest32& a, const crypto::Digest32& b) {
  for (std::size_t i = 0; i < a.bytes.size(); ++i) {
    auto x = static_cast<std::uint8_t>(a.bytes[i] ^ b.bytes[i]);
    if (x != 0) {
      int top = 7 - std::countl_zero(x);
      return static_cast<int>((31 - i) * 8) + top;
    }
  }
  return -1;
}

RoutingTable::RoutingTable(NodeId self, std::size_t k) : self_(self), k_(k) {}

bool RoutingTable::observe(const NodeId& id) {
  int index = bucket_index(self_.value, id.value);
  if (index < 0) return false;
  auto& bucket = buckets_[static_cast<std::size_t>(index)];
  auto it = std::find(bucket.begin(), bucket.end(), id);
  if (it != bucket.end()) {
    bucket.erase(it);
    bucket.push_back(id);
    return true;
  }
  if (bucket.size() >= k_) return false;
  bucket.push_back(id);
  ++size_;
  return true;
}

void RoutingTable::remove(const NodeId& id) {
  int index = bucket_index(self_.value, id.value);
  if (index < 0) return;
  auto& bucket = buckets_[static_cast<std::size_t>(index)];
  auto it = std::find(bucket.begin(), bucket.end(), id);
  if (it != bucket.end()) {
    bucket.erase(it);
    --size_;
  }
}

bool RoutingTable::contains(const NodeId& id) const {
  int index = bucket_index(self_.value, id.value);
  if (index < 0) return false;
  const auto& bucket = buckets_[static_cast<std::size_t>(index)];
  return std::find(bucket.begin(), bucket.end(), id) != bucket.end();
}

std::vector<NodeId> RoutingTable::closest(const crypto::Digest32& target, std::size_t n) const {
  std::vector<std::pair<crypto::Digest32, NodeId>> scored;
  scored.reserve(size_);
  for (const auto& bucket : buckets_) {
    for (const auto& id : bucket) scored.emplace_back(xor_distance(id.value, target), id);
  }
  const auto keep = std::min(n, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<std::ptrdiff_t>(keep), scored.end());
  std::vector<NodeId> out;
  out.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) out.push_back(scored[i].second);
  return out;
}

std::vector<NodeId> RoutingTable::all() const {
  std::vector<NodeId> out;
  out.reserve(size_);
  for (const auto& bucket : buckets_) out.insert(out.end(), bucket.begin(), bucket.end());
  return out;
}

}  // namespace glass::swarm
