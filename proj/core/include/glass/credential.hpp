#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glass/bytes.hpp"
#include "glass/chaincode.hpp"
#include "glass/crypto.hpp"

namespace glass::credential {

using registry::CredentialSchema;
using registry::Did;
using registry::DidDocument;

// Claim map: attribute name -> text | integer | date ("YYYY-MM-DD" text).
using Claims = nlohmann::json;

struct Proof {
  crypto::Signature signature{};
  Did verification_did;
  bool operator==(const Proof&) const = default;
};

struct VerifiableCredential {
  std::string credential_id;
  std::string schema_id;
  std::string credential_type;
  Did issuer;
  Did subject;
  Claims claims = Claims::object();
  std::int64_t issued_at = 0;
  Proof proof;

  // Everything except "proof"; this is what the issuer signs.
  nlohmann::json unsigned_json() const;
  Bytes signing_bytes() const;
  nlohmann::json to_json() const;
  static VerifiableCredential from_json(const nlohmann::json& j);
  bool operator==(const VerifiableCredential&) const = default;
};

struct VerifiablePresentation {
  Did holder;
  std::vector<VerifiableCredential> credentials;
  Bytes challenge;
  crypto::Signature proof{};

  nlohmann::json unsigned_json() const;
  Bytes signing_bytes() const;
  nlohmann::json to_json() const;
  static VerifiablePresentation from_json(const nlohmann::json& j);
};

struct SchemaViolation {
  enum class Kind { missing, unknown, wrong_kind, type_mismatch };
  Kind kind;
  std::string attribute;

  std::string describe() const;
  bool operator==(const SchemaViolation&) const = default;
};

bool is_iso_date(std::string_view text);

// Required attributes present with matching kinds; extras only from the
// optional list. Never throws.
std::vector<SchemaViolation> validate_schema(const Claims& claims, const CredentialSchema& schema);
// Also checks that the credential names this schema and its type code.
std::vector<SchemaViolation> validate_schema(const VerifiableCredential& vc, const CredentialSchema& schema);

// Errors: Errc::validation naming every missing/unknown/mistyped attribute.
VerifiableCredential issue(const crypto::SigningKeypair& issuer_keys, const Did& issuer_did, const Did& subject_did,
                           const CredentialSchema& schema, const Claims& claims, std::int64_t issued_at = 0);

bool verify_credential_signature(const VerifiableCredential& vc, const crypto::Key32& issuer_public);

// Errors: Errc::holder_mismatch when holder_did is not every vc's subject,
// Errc::validation for an empty credential list.
VerifiablePresentation present(const crypto::SigningKeypair& holder_keys, const Did& holder_did,
                               std::vector<VerifiableCredential> vcs, Bytes challenge);

// Lookups a verifier needs. Implementations: live ledger queries (audited) or
// an offline registry dump.
class RegistryView {
 public:
  virtual ~RegistryView() = default;
  virtual std::optional<DidDocument> resolve_did(const Did& did) = 0;
  virtual bool is_trusted_issuer(const Did& did, const std::string& credential_type) = 0;
  virtual std::optional<CredentialSchema> schema(const std::string& schema_id) = 0;
};

// Answers from a registry_dump() document.
class DumpRegistryView final : public RegistryView {
 public:
  explicit DumpRegistryView(nlohmann::json dump) : dump_(std::move(dump)) {}

  std::optional<DidDocument> resolve_did(const Did& did) override;
  bool is_trusted_issuer(const Did& did, const std::string& credential_type) override;
  std::optional<CredentialSchema> schema(const std::string& schema_id) override;

 private:
  nlohmann::json dump_;
};

struct CredentialCheck {
  std::string credential_id;
  bool issuer_trusted = false;
  bool signature_valid = false;
  bool schema_valid = false;
  std::string reason;  // first failing check, empty when all pass
};

struct VerificationReport {
  bool overall = false;
  bool challenge_ok = false;
  bool holder_signature_valid = false;
  bool holder_matches = false;
  std::string reason;  // first failure across the whole presentation
  std::vector<CredentialCheck> per_credential;

  nlohmann::json to_json() const;
};

// Checks, in order: challenge, holder signature, then per credential issuer
// resolution, trust policy, schema, issuer signature. All failures land in
// the report; nothing throws for a bad presentation.
VerificationReport verify_presentation(const VerifiablePresentation& vp, ByteView expected_challenge,
                                       RegistryView& registry);

}  // namespace glass::credential
