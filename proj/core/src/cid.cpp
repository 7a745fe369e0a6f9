#include "glass/cid.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "glass/base58.hpp"
#include "glass/error.hpp"

namespace glass {

ContentId ContentId::parse(std::string_view text) {
  Bytes raw = base58::decode(text);
  if (raw.size() != 34 || raw[0] != kSha256Code || raw[1] != kDigestLength) {
    throw Error(Errc::format, "not a sha2-256 multihash: " + std::string(text));
  }
  crypto::Digest32 d;
  std::copy(raw.begin() + 2, raw.end(), d.bytes.begin());
  return ContentId(d);
}

Bytes ContentId::multihash() const {
  Bytes out(2 + digest_.bytes.size());
  out[0] = kSha256Code;
  out[1] = kDigestLength;
  std::copy(digest_.bytes.begin(), digest_.bytes.end(), out.begin() + 2);
  return out;
}

std::string ContentId::text() const { return base58::encode(multihash()); }

ContentId cid_of_block(ByteView data) { return ContentId(crypto::sha256(data)); }

void to_json(nlohmann::json& j, const ContentId& cid) { j = cid.text(); }

void from_json(const nlohmann::json& j, ContentId& cid) {
  if (!j.is_string()) throw Error(Errc::format, "cid must be a string");
  cid = ContentId::parse(j.get<std::string>());
}

}  // namespace glass
