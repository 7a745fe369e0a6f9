#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace glass {

// Stable error kinds. The kebab-case names returned by to_string() are part
// of the CLI and scenario contract (expect_error matches on them).
enum class Errc {
  format,                 // malformed encoding (base58, cid text, json shape)
  authentication_failed,  // AEAD tag mismatch: tampered-or-wrong-key
  canonicalization,
  block_not_found,
  block_corrupt,
  swarm_rejected,
  content_unavailable,
  config,
  enrollment,
  auth,                   // ledger submit with an invalid member certificate
  access_denied,
  already_exists,
  not_found,
  invalid_did,
  validation,
  holder_mismatch,
  issuer_untrusted,
  signature_invalid,
  unsupported_uri,
  io,
  internal,
};

std::string_view to_string(Errc code) noexcept;

// Returns false when the name is not a known error kind.
bool errc_from_string(std::string_view name, Errc& out) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& detail);

  Errc code() const noexcept { return code_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace glass
