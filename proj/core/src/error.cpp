#include "glass/error.hpp"

#include <array>
#include <utility>

namespace glass {
namespace {

constexpr std::array<std::pair<Errc, std::string_view>, 21> kNames{{
    {Errc::format, "format"},
    {Errc::authentication_failed, "tampered-or-wrong-key"},
    {Errc::canonicalization, "canonicalization"},
    {Errc::block_not_found, "block-not-found"},
    {Errc::block_corrupt, "block-corrupt"},
    {Errc::swarm_rejected, "swarm-rejected"},
    {Errc::content_unavailable, "content-unavailable"},
    {Errc::config, "config"},
    {Errc::enrollment, "enrollment"},
    {Errc::auth, "auth"},
    {Errc::access_denied, "access-denied"},
    {Errc::already_exists, "already-exists"},
    {Errc::not_found, "not-found"},
    {Errc::invalid_did, "invalid-did"},
    {Errc::validation, "validation"},
    {Errc::holder_mismatch, "holder-mismatch"},
    {Errc::issuer_untrusted, "issuer-untrusted"},
    {Errc::signature_invalid, "signature-invalid"},
    {Errc::unsupported_uri, "unsupported-uri"},
    {Errc::io, "io"},
    {Errc::internal, "internal"},
}};

std::string compose(Errc code, const std::string& detail) {
  std::string out(to_string(code));
  if (!detail.empty()) {
    out += "(";
    out += detail;
    out += ")";
  }
  return out;
}

}  // namespace

std::string_view to_string(Errc code) noexcept {
  for (const auto& [c, name] : kNames) {
    if (c == code) return name;
  }
  return "unknown";
}

bool errc_from_string(std::string_view name, Errc& out) noexcept {
  for (const auto& [c, n] : kNames) {
    if (n == name) {
      out = c;
      return true;
    }
  }
  return false;
}

Error::Error(Errc code, const std::string& detail)
    : std::runtime_error(compose(code, detail)), code_(code), detail_(detail) {}

}  // namespace glass
