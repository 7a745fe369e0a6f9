#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "glass/bytes.hpp"
#include "glass/cid.hpp"

namespace glass::dag {

inline constexpr std::size_t kDefaultChunkSize = 262144;
inline constexpr std::size_t kMaxLinks = 174;

// An interior node is stored as canonical JSON
//   {"kind":"interior","links":[cid...],"sizes":[bytes...]}
// and a raw leaf is stored as its payload bytes verbatim.
struct DagNode {
  enum class Kind { raw_leaf, interior };

  Kind kind = Kind::raw_leaf;
  std::vector<ContentId> links;
  std::vector<std::uint64_t> sizes;
  Bytes payload;

  std::uint64_t total_size() const;
  Bytes encode() const;
};

// Returns the interior node when block is a byte-exact canonical interior
// encoding with at least two links; nullopt means the block is a raw leaf.
std::optional<DagNode> decode_interior(ByteView block);

// Map from cid to block bytes. Every entry satisfies cid_of_block(value) == key.
class BlockSet {
 public:
  using Map = std::map<ContentId, Bytes>;

  ContentId add(Bytes block);
  // Throws Error(Errc::block_corrupt) when the bytes do not hash to cid.
  void insert(const ContentId& cid, Bytes block);

  const Bytes* find(const ContentId& cid) const;
  bool contains(const ContentId& cid) const { return blocks_.contains(cid); }
  std::size_t size() const noexcept { return blocks_.size(); }
  bool empty() const noexcept { return blocks_.empty(); }
  std::uint64_t byte_count() const;

  Map::const_iterator begin() const { return blocks_.begin(); }
  Map::const_iterator end() const { return blocks_.end(); }

 private:
  Map blocks_;
};

struct DagBuild {
  ContentId root;
  BlockSet blocks;
};

// Data up to chunk_size becomes a single raw leaf whose cid is
// cid_of_block(data). Larger inputs are split into ceil(n / chunk_size) leaves
// joined by interior nodes of at most max_links children, in a balanced tree.
DagBuild build_dag(ByteView data, std::size_t chunk_size = kDefaultChunkSize,
                   std::size_t max_links = kMaxLinks);

using BlockLookup = std::function<std::optional<Bytes>(const ContentId&)>;

// Verifies every block before use. Errors: Errc::block_not_found,
// Errc::block_corrupt (detail is the offending cid text).
Bytes reassemble(const ContentId& root, const BlockLookup& lookup);

// Directory of files named by cid text plus manifest.json
// {"blocks":[cid...],"root":cid}.
nlohmann::json manifest(const ContentId& root, const BlockSet& blocks);
void export_blocks(const DagBuild& dag, const std::filesystem::path& dir);
DagBuild import_blocks(const std::filesystem::path& dir);

}  // namespace glass::dag
