#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "glass/bytes.hpp"
#include "glass/crypto.hpp"

namespace glass {

// CIDv0-shaped identifier: multihash(sha2-256) rendered base58btc. Every text
// form is 46 characters and starts with "Qm".
class ContentId {
 public:
  static constexpr std::uint8_t kSha256Code = 0x12;
  static constexpr std::uint8_t kDigestLength = 0x20;
  static constexpr std::size_t kTextLength = 46;

  ContentId() = default;
  explicit ContentId(const crypto::Digest32& digest) : digest_(digest) {}

  // Throws Error(Errc::format) for anything that is not a sha2-256 multihash.
  static ContentId parse(std::string_view text);

  const crypto::Digest32& digest() const noexcept { return digest_; }
  Bytes multihash() const;
  std::string text() const;

  auto operator<=>(const ContentId&) const = default;

 private:
  crypto::Digest32 digest_;
};

ContentId cid_of_block(ByteView data);

void to_json(nlohmann::json& j, const ContentId& cid);
void from_json(const nlohmann::json& j, ContentId& cid);

}  // namespace glass

template <>
struct std::hash<glass::ContentId> {
  std::size_t operator()(const glass::ContentId& cid) const noexcept {
    std::size_t h = 0;
    for (int i = 0; i < 8; ++i) h = (h << 8) | cid.digest().bytes[i];
    return h;
  }
};
