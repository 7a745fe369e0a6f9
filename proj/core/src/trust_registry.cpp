#include <algorithm>
#include <regex>

#include <nlohmann/json.hpp>

#include "glass/base58.hpp"
#include "glass/canonical_json.hpp"
#include "glass/chaincode.hpp"
#include "glass/error.hpp"

namespace glass::registry {
namespace {

using Json = nlohmann::json;

constexpr std::string_view kDidPrefix = "did/";
constexpr std::string_view kSchemaPrefix = "schema/";
constexpr std::string_view kIssuerPrefix = "issuer/";
constexpr std::string_view kAppPrefix = "app/";

template <typename F>
auto json_field(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(Errc::format, std::string(what) + ": " + e.what());
  }
}

std::string key(std::string_view prefix, std::string_view id) { return std::string(prefix) + std::string(id); }

std::string issuer_key(const TrustPolicyEntry& e) {
  return key(kIssuerPrefix, e.issuer.text()) + "/" + e.country_domain;
}

const std::string& arg(const std::vector<std::string>& args, std::size_t i, const char* name) {
  if (args.size() <= i) throw Error(Errc::validation, std::string("missing argument ") + name);
  return args[i];
}

bool valid_type_code(std::string_view code) {
  static const std::regex pattern("^[A-Z][A-Z0-9]{0,15}$");
  return std::regex_match(code.begin(), code.end(), pattern);
}

void check_attributes(const std::vector<Attribute>& attrs, std::set<std::string>& seen) {
  for (const auto& a : attrs) {
    if (a.name.empty()) throw Error(Errc::validation, "empty attribute name");
    if (!seen.insert(a.name).second) throw Error(Errc::validation, "duplicate attribute " + a.name);
  }
}

Json attributes_json(const std::vector<Attribute>& attrs) {
  Json out = Json::array();
  for (const auto& a : attrs) out.push_back({{"name", a.name}, {"kind", to_string(a.kind)}});
  return out;
}

std::vector<Attribute> attributes_from(const Json& j) {
  std::vector<Attribute> out;
  for (const auto& a : j) {
    out.push_back(Attribute{a.at("name").get<std::string>(), attribute_kind_from_string(a.at("kind").get<std::string>())});
  }
  return out;
}

}  // namespace

Did Did::from_signing_key(const crypto::Key32& signing_public) {
  auto digest = crypto::sha256(signing_public);
  return Did(std::string(kPrefix) + ContentId(digest).text());
}

Did Did::parse(std::string_view text) {
  if (!text.starts_with(kPrefix)) throw Error(Errc::invalid_did, std::string(text));
  try {
    ContentId::parse(text.substr(kPrefix.size()));
  } catch (const Error&) {
    throw Error(Errc::invalid_did, std::string(text));
  }
  return Did(std::string(text));
}

bool Did::derives_from(const crypto::Key32& signing_public) const { return *this == from_signing_key(signing_public); }

std::string_view to_string(PersonKind kind) {
  return kind == PersonKind::natural_person ? "natural_person" : "legal_person";
}

PersonKind person_kind_from_string(std::string_view text) {
  if (text == "natural_person") return PersonKind::natural_person;
  if (text == "legal_person") return PersonKind::legal_person;
  throw Error(Errc::validation, "unknown person kind " + std::string(text));
}

std::string_view to_string(AttributeKind kind) {
  switch (kind) {
    case AttributeKind::text:
      return "text";
    case AttributeKind::integer:
      return "integer";
    case AttributeKind::date:
      return "date";
  }
  return "text";
}

AttributeKind attribute_kind_from_string(std::string_view text) {
  if (text == "text") return AttributeKind::text;
  if (text == "integer") return AttributeKind::integer;
  if (text == "date") return AttributeKind::date;
  throw Error(Errc::validation, "unknown attribute kind " + std::string(text));
}

Json DidDocument::to_json() const {
  return {{"did", did.text()},
          {"signing_public", crypto::b58(signing_public)},
          {"agreement_public", crypto::b58(agreement_public)},
          {"kind", to_string(kind)}};
}

DidDocument DidDocument::from_json(const Json& j) {
  return json_field("did document", [&] {
    return DidDocument{Did::parse(j.at("did").get<std::string>()),
                       crypto::fixed_from_b58<32>(j.at("signing_public").get<std::string>()),
                       crypto::fixed_from_b58<32>(j.at("agreement_public").get<std::string>()),
                       person_kind_from_string(j.at("kind").get<std::string>())};
  });
}

void CredentialSchema::validate() const {
  if (schema_id.empty()) throw Error(Errc::validation, "empty schema_id");
  if (!valid_type_code(credential_type)) throw Error(Errc::validation, "bad credential type code " + credential_type);
  std::set<std::string> seen;
  check_attributes(required_attributes, seen);
  check_attributes(optional_attributes, seen);
}

const Attribute* CredentialSchema::find(std::string_view name) const {
  for (const auto* list : {&required_attributes, &optional_attributes}) {
    for (const auto& a : *list) {
      if (a.name == name) return &a;
    }
  }
  return nullptr;
}

Json CredentialSchema::to_json() const {
  return {{"schema_id", schema_id},
          {"credential_type", credential_type},
          {"required_attributes", attributes_json(required_attributes)},
          {"optional_attributes", attributes_json(optional_attributes)}};
}

CredentialSchema CredentialSchema::from_json(const Json& j) {
  return json_field("credential schema", [&] {
    return CredentialSchema{j.at("schema_id").get<std::string>(), j.at("credential_type").get<std::string>(),
                            attributes_from(j.at("required_attributes")),
                            attributes_from(j.value("optional_attributes", Json::array()))};
  });
}

bool valid_country_domain(std::string_view domain) {
  static const std::regex pattern(R"(^[A-Z]{2}(\.[A-Za-z_]+)*$)");
  return std::regex_match(domain.begin(), domain.end(), pattern);
}

void TrustPolicyEntry::validate() const {
  if (permitted_types.empty()) throw Error(Errc::validation, "permitted_types is empty");
  for (const auto& t : permitted_types) {
    if (!valid_type_code(t)) throw Error(Errc::validation, "bad credential type code " + t);
  }
  if (!valid_country_domain(country_domain)) throw Error(Errc::validation, "bad country domain " + country_domain);
}

Json TrustPolicyEntry::to_json() const {
  return {{"issuer", issuer.text()}, {"country_domain", country_domain}, {"permitted_types", permitted_types}};
}

TrustPolicyEntry TrustPolicyEntry::from_json(const Json& j) {
  return json_field("trust policy entry", [&] {
    return TrustPolicyEntry{Did::parse(j.at("issuer").get<std::string>()), j.at("country_domain").get<std::string>(),
                            j.at("permitted_types").get<std::set<std::string>>()};
  });
}

void TrustRegistryChaincode::require_authority(const ledger::ChaincodeContext& ctx, std::string_view registry) const {
  if (ctx.invoker_org() != authority_org_) {
    throw Error(Errc::access_denied, ctx.invoker_org() + ", " + std::string(registry));
  }
}

Json TrustRegistryChaincode::invoke(ledger::ChaincodeContext& ctx, std::string_view function,
                                    const std::vector<std::string>& args) {
  if (function == "register_did") {
    auto doc = DidDocument::from_json(canon::parse(arg(args, 0, "document")));
    if (!doc.did.derives_from(doc.signing_public)) throw Error(Errc::invalid_did, doc.did.text());
    const auto k = key(kDidPrefix, doc.did.text());
    if (ctx.get_state(k)) throw Error(Errc::already_exists, doc.did.text());
    ctx.put_state(k, canon::serialize(doc.to_json()));
    return {{"did", doc.did.text()}, {"status", "registered"}};
  }
  if (function == "resolve_did") {
    auto did = Did::parse(arg(args, 0, "did"));
    auto value = ctx.get_state(key(kDidPrefix, did.text()));
    if (!value) throw Error(Errc::not_found, did.text());
    return canon::parse(*value);
  }
  if (function == "register_schema") {
    require_authority(ctx, "schemas");
    auto schema = CredentialSchema::from_json(canon::parse(arg(args, 0, "schema")));
    schema.validate();
    const auto k = key(kSchemaPrefix, schema.schema_id);
    if (ctx.get_state(k)) throw Error(Errc::already_exists, schema.schema_id);
    ctx.put_state(k, canon::serialize(schema.to_json()));
    return {{"schema_id", schema.schema_id}, {"status", "registered"}};
  }
  if (function == "get_schema") {
    const auto& id = arg(args, 0, "schema_id");
    auto value = ctx.get_state(key(kSchemaPrefix, id));
    if (!value) throw Error(Errc::not_found, "schema " + id);
    return canon::parse(*value);
  }
  if (function == "register_trusted_issuer") {
    require_authority(ctx, "trusted-issuers");
    auto entry = TrustPolicyEntry::from_json(canon::parse(arg(args, 0, "entry")));
    entry.validate();
    if (!ctx.get_state(key(kDidPrefix, entry.issuer.text()))) throw Error(Errc::not_found, entry.issuer.text());
    const auto k = issuer_key(entry);
    if (ctx.get_state(k)) throw Error(Errc::already_exists, k);
    ctx.put_state(k, canon::serialize(entry.to_json()));
    return {{"issuer", entry.issuer.text()}, {"status", "registered"}};
  }
  if (function == "is_trusted_issuer") {
    auto did = Did::parse(arg(args, 0, "did"));
    const auto& type = arg(args, 1, "credential_type");
    for (const auto& [k, v] : ctx.state_range(key(kIssuerPrefix, did.text()) + "/")) {
      auto entry = TrustPolicyEntry::from_json(canon::parse(v));
      if (entry.issuer == did && entry.permitted_types.contains(type)) return true;
    }
    return false;
  }
  if (function == "register_trusted_app") {
    require_authority(ctx, "trusted-apps");
    auto did = Did::parse(arg(args, 0, "did"));
    if (!ctx.get_state(key(kDidPrefix, did.text()))) throw Error(Errc::not_found, did.text());
    const auto k = key(kAppPrefix, did.text());
    if (ctx.get_state(k)) throw Error(Errc::already_exists, did.text());
    ctx.put_state(k, canon::serialize(Json{{"did", did.text()}}));
    return {{"did", did.text()}, {"status", "registered"}};
  }
  if (function == "is_trusted_app") {
    auto did = Did::parse(arg(args, 0, "did"));
    return ctx.get_state(key(kAppPrefix, did.text())).has_value();
  }
  throw Error(Errc::not_found, "function " + std::string(function));
}

Json registry_dump(const ledger::WorldState& world) {
  Json dids = Json::object();
  Json schemas = Json::object();
  Json policy = Json::array();
  Json apps = Json::array();
  for (const auto& [k, v] : world) {
    if (k.starts_with(kDidPrefix)) {
      dids[k.substr(kDidPrefix.size())] = canon::parse(v);
    } else if (k.starts_with(kSchemaPrefix)) {
      schemas[k.substr(kSchemaPrefix.size())] = canon::parse(v);
    } else if (k.starts_with(kIssuerPrefix)) {
      policy.push_back(canon::parse(v));
    } else if (k.starts_with(kAppPrefix)) {
      apps.push_back(k.substr(kAppPrefix.size()));
    }
  }
  return {{"apps", apps}, {"dids", dids}, {"schemas", schemas}, {"trust_policy", policy}};
}

ledger::Receipt register_did(ledger::Channel& channel, const ledger::MemberIdentity& who, const DidDocument& doc) {
  return channel.submit(who, std::string(kTrustRegistry), "register_did", {canon::serialize(doc.to_json())});
}

DidDocument resolve_did(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did) {
  auto receipt = channel.submit(who, std::string(kTrustRegistry), "resolve_did", {did.text()});
  return DidDocument::from_json(receipt.result);
}

ledger::Receipt register_schema(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                const CredentialSchema& schema) {
  return channel.submit(who, std::string(kTrustRegistry), "register_schema", {canon::serialize(schema.to_json())});
}

CredentialSchema get_schema(ledger::Channel& channel, const ledger::MemberIdentity& who, const std::string& schema_id) {
  auto receipt = channel.submit(who, std::string(kTrustRegistry), "get_schema", {schema_id});
  return CredentialSchema::from_json(receipt.result);
}

ledger::Receipt register_trusted_issuer(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                        const TrustPolicyEntry& entry) {
  return channel.submit(who, std::string(kTrustRegistry), "register_trusted_issuer",
                        {canon::serialize(entry.to_json())});
}

ledger::Receipt register_trusted_app(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did) {
  return channel.submit(who, std::string(kTrustRegistry), "register_trusted_app", {did.text()});
}

bool is_trusted_issuer(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did,
                       const std::string& credential_type) {
  auto receipt = channel.submit(who, std::string(kTrustRegistry), "is_trusted_issuer", {did.text(), credential_type});
  return receipt.result.get<bool>();
}

bool is_trusted_app(ledger::Channel& channel, const ledger::MemberIdentity& who, const Did& did) {
  auto receipt = channel.submit(who, std::string(kTrustRegistry), "is_trusted_app", {did.text()});
  return receipt.result.get<bool>();
}

}  // namespace glass::registry
