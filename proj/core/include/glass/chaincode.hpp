#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "glass/cid.hpp"
#include "glass/crypto.hpp"
#include "glass/ledger.hpp"

namespace glass::registry {

inline constexpr std::string_view kGlassIpfs = "glass-ipfs";
inline constexpr std::string_view kTrustRegistry = "trust-registry";
inline constexpr std::string_view kPublicCollection = "public";
inline constexpr std::string_view kPrivateCollection = "private";
inline constexpr std::string_view kOrg1 = "org1.org";
inline constexpr std::string_view kOrg2 = "org2.org";
inline constexpr std::string_view kAuthorityOrg = "accreditation.org";

// "did:glass:" + base58btc(0x12 0x20 || sha256(signing public key)).
class Did {
 public:
  static constexpr std::string_view kPrefix = "did:glass:";

  Did() = default;
  static Did from_signing_key(const crypto::Key32& signing_public);
  // Syntactic check only. Errors: Errc::invalid_did.
  static Did parse(std::string_view text);

  const std::string& text() const noexcept { return text_; }
  bool derives_from(const crypto::Key32& signing_public) const;

  auto operator<=>(const Did&) const = default;

 private:
  explicit Did(std::string text) : text_(std::move(text)) {}
  std::string text_;
};

enum class PersonKind { natural_person, legal_person };
std::string_view to_string(PersonKind kind);
PersonKind person_kind_from_string(std::string_view text);

struct Triplet {
  ContentId cid;
  crypto::WrappedKey wrapped_key;
  std::string uri;
};

struct DidDocument {
  Did did;
  crypto::Key32 signing_public{};
  crypto::Key32 agreement_public{};
  PersonKind kind = PersonKind::natural_person;

  nlohmann::json to_json() const;
  static DidDocument from_json(const nlohmann::json& j);
  bool operator==(const DidDocument&) const = default;
};

enum class AttributeKind { text, integer, date };
std::string_view to_string(AttributeKind kind);
AttributeKind attribute_kind_from_string(std::string_view text);

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::text;
  bool operator==(const Attribute&) const = default;
};

struct CredentialSchema {
  std::string schema_id;
  std::string credential_type;  // short code, e.g. "AC"
  std::vector<Attribute> required_attributes;
  std::vector<Attribute> optional_attributes;

  // Errors: Errc::validation (duplicate attribute names, bad type code).
  void validate() const;
  const Attribute* find(std::string_view name) const;
  nlohmann::json to_json() const;
  static CredentialSchema from_json(const nlohmann::json& j);
  bool operator==(const CredentialSchema&) const = default;
};

struct TrustPolicyEntry {
  Did issuer;
  std::string country_domain;  // "DE", "DE.DE_Dept_Justice"
  std::set<std::string> permitted_types;

  // Errors: Errc::validation.
  void validate() const;
  nlohmann::json to_json() const;
  static TrustPolicyEntry from_json(const nlohmann::json& j);
  bool operator==(const TrustPolicyEntry&) const = default;
};

bool valid_country_domain(std::string_view domain);

// Triplet store: (cid, uri) in the public collection, wrapped key in the
// private one. The wrapped key travels in the transient map under
// "wrapped_key" so it never appears in the ledger itself.
class GlassIpfsChaincode final : public ledger::Chaincode {
 public:
  nlohmann::json invoke(ledger::ChaincodeContext& ctx, std::string_view function,
                        const std::vector<std::string>& args) override;
};

// DIDs, schemas, trusted issuers and trusted apps in world state. Only the
// authority org may write schemas, issuers and apps; anyone may register or
// resolve a DID.
class TrustRegistryChaincode final : public ledger::Chaincode {
 public:
  explicit TrustRegistryChaincode(std::string authority_org = std::string(kAuthorityOrg))
      : authority_org_(std::move(authority_org)) {}

  nlohmann::json invoke(ledger::ChaincodeContext& ctx, std::string_view function,
                        const std::vector<std::string>& args) override;

 private:
  void require_authority(const ledger::ChaincodeContext& ctx, std::string_view registry) const;
  std::string authority_org_;
};

// Registry dump derived from world state:
// {"apps":[did...],"dids":{did:doc},"schemas":{id:schema},"trust_policy":[entry...]}
nlohmann::json registry_dump(const ledger::WorldState& world);

// org1 reads and writes both collections, org2 writes both but reads only
// the public one, the authority org touches neither.
ledger::ChannelConfig glass_channel_config(const ledger::OrgInfo& org1, const ledger::OrgInfo& org2,
                                           const ledger::OrgInfo& authority);
void install_glass_chaincodes(ledger::Channel& channel, std::string authority_org = std::string(kAuthorityOrg));

// Client wrappers: one ledger transaction each.
ledger::Receipt create_glass_resource(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                      const ContentId& cid, const std::string& uri,
                                      const crypto::WrappedKey& wrapped_key);
std::pair<ContentId, std::string> read_glass_resource(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                                      const ContentId& cid);
crypto::WrappedKey read_glass_resource_key(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                           const ContentId& cid);

ledger::Receipt register_did(ledger::Channel& channel, const ledger::MemberIdentity& who, const DidDocument& doc);
DidDocument resolve_did(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did);
ledger::Receipt register_schema(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                const CredentialSchema& schema);
CredentialSchema get_schema(ledger::Channel& channel, const ledger::MemberIdentity& who, const std::string& schema_id);
ledger::Receipt register_trusted_issuer(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                        const TrustPolicyEntry& entry);
ledger::Receipt register_trusted_app(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did);
bool is_trusted_issuer(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did,
                       const std::string& credential_type);
bool is_trusted_app(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did);

}  // namespace glass::registry
