#include "glass/dag.hpp"

#include <fstream>
#include <iterator>
#include <numeric>

#include "glass/canonical_json.hpp"
#include "glass/error.hpp"

namespace glass::dag {
namespace {

struct Child {
  ContentId cid;
  std::uint64_t size;
};

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot read " + path.string());
  return Bytes(std::istreambuf_iterator<char>(in), {});
}

void write_file(const std::filesystem::path& path, ByteView bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

Bytes fetch_verified(const ContentId& cid, const BlockLookup& lookup) {
  auto block = lookup(cid);
  if (!block) throw Error(Errc::block_not_found, cid.text());
  if (cid_of_block(*block) != cid) throw Error(Errc::block_corrupt, cid.text());
  return std::move(*block);
}

std::uint64_t append_subtree(const ContentId& cid, const BlockLookup& lookup, Bytes& out) {
  Bytes block = fetch_verified(cid, lookup);
  auto node = decode_interior(block);
  if (!node) {
    out.insert(out.end(), block.begin(), block.end());
    return block.size();
  }
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < node->links.size(); ++i) {
    auto got = append_subtree(node->links[i], lookup, out);
    if (got != node->sizes[i]) throw Error(Errc::block_corrupt, cid.text());
    total += got;
  }
  return total;
}

}  // namespace

std::uint64_t DagNode::total_size() const {
  if (kind == Kind::raw_leaf) return payload.size();
  return std::accumulate(sizes.begin(), sizes.end(), std::uint64_t{0});
}

Bytes DagNode::encode() const {
  if (kind == Kind::raw_leaf) return payload;
  canon::Json links_json = canon::Json::array();
  for (const auto& l : links) links_json.push_back(l.text());
  return canon::serialize_bytes({{"kind", "interior"}, {"links", links_json}, {"sizes", sizes}});
}

std::optional<DagNode> decode_interior(ByteView block) {
  if (block.empty() || block.front() != '{') return std::nullopt;
  const auto text = to_string(block);
  canon::Json j;
  try {
    j = canon::parse(text);
  } catch (const Error&) {
    return std::nullopt;
  }
  if (!j.is_object() || j.size() != 3 || !j.contains("kind") || j["kind"] != "interior") return std::nullopt;
  const auto& links = j["links"];
  const auto& sizes = j["sizes"];
  if (!links.is_array() || !sizes.is_array() || links.size() != sizes.size() || links.size() < 2) {
    return std::nullopt;
  }
  DagNode node;
  node.kind = DagNode::Kind::interior;
  try {
    for (const auto& l : links) node.links.push_back(ContentId::parse(l.get<std::string>()));
    for (const auto& s : sizes) {
      if (!s.is_number_unsigned()) return std::nullopt;
      node.sizes.push_back(s.get<std::uint64_t>());
    }
  } catch (const std::exception&) {
    return std::nullopt;
  }
  if (!canon::is_canonical(text)) return std::nullopt;
  return node;
}

ContentId BlockSet::add(Bytes block) {
  auto cid = cid_of_block(block);
  blocks_.try_emplace(cid, std::move(block));
  return cid;
}

void BlockSet::insert(const ContentId& cid, Bytes block) {
  if (cid_of_block(block) != cid) throw Error(Errc::block_corrupt, cid.text());
  blocks_.insert_or_assign(cid, std::move(block));
}

const Bytes* BlockSet::find(const ContentId& cid) const {
  auto it = blocks_.find(cid);
  return it == blocks_.end() ? nullptr : &it->second;
}

std::uint64_t BlockSet::byte_count() const {
  std::uint64_t n = 0;
  for (const auto& [cid, bytes] : blocks_) n += bytes.size();
  return n;
}

DagBuild build_dag(ByteView data, std::size_t chunk_size, std::size_t max_links) {
  if (chunk_size == 0) throw Error(Errc::validation, "chunk_size must be positive");
  if (max_links < 2) throw Error(Errc::validation, "max_links must be at least 2");

  DagBuild out;
  if (data.size() <= chunk_size) {
    out.root = out.blocks.add(Bytes(data.begin(), data.end()));
    return out;
  }

  std::vector<Child> level;
  for (std::size_t off = 0; off < data.size(); off += chunk_size) {
    auto piece = data.subspan(off, std::min(chunk_size, data.size() - off));
    level.push_back({out.blocks.add(Bytes(piece.begin(), piece.end())), piece.size()});
  }

  while (level.size() > 1) {
    // Balanced grouping: every group has floor or ceil of n / groups members.
    // That is >= 2 once max_links >= 3; with max_links == 2 a lone child is
    // promoted to the next level instead of getting a one-link node.
    const std::size_t groups = (level.size() + max_links - 1) / max_links;
    const std::size_t base = level.size() / groups;
    const std::size_t extra = level.size() % groups;
    std::vector<Child> next;
    std::size_t pos = 0;
    for (std::size_t g = 0; g < groups; ++g) {
      const std::size_t count = base + (g < extra ? 1 : 0);
      if (count == 1) {
        next.push_back(level[pos++]);
        continue;
      }
      DagNode node;
      node.kind = DagNode::Kind::interior;
      for (std::size_t i = 0; i < count; ++i, ++pos) {
        node.links.push_back(level[pos].cid);
        node.sizes.push_back(level[pos].size);
      }
      next.push_back({out.blocks.add(node.encode()), node.total_size()});
    }
    level = std::move(next);
  }
  out.root = level.front().cid;
  return out;
}

Bytes reassemble(const ContentId& root, const BlockLookup& lookup) {
  Bytes out;
  append_subtree(root, lookup, out);
  return out;
}

nlohmann::json manifest(const ContentId& root, const BlockSet& blocks) {
  canon::Json list = canon::Json::array();
  for (const auto& [cid, bytes] : blocks) list.push_back(cid.text());
  return {{"blocks", list}, {"root", root.text()}};
}

void export_blocks(const DagBuild& dag, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [cid, bytes] : dag.blocks) write_file(dir / cid.text(), bytes);
  write_file(dir / "manifest.json", as_bytes(canon::serialize(manifest(dag.root, dag.blocks))));
}

DagBuild import_blocks(const std::filesystem::path& dir) {
  auto text = read_file(dir / "manifest.json");
  canon::Json m = canon::parse(to_string(text));
  DagBuild out;
  try {
    out.root = ContentId::parse(m.at("root").get<std::string>());
    for (const auto& c : m.at("blocks")) {
      auto cid = ContentId::parse(c.get<std::string>());
      out.blocks.insert(cid, read_file(dir / cid.text()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("block manifest: ") + e.what());
  }
  return out;
}

}  // namespace glass::dag
