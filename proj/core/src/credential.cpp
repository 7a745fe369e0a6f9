#include "glass/credential.hpp"

#include <algorithm>

#include "glass/base58.hpp"
#include "glass/canonical_json.hpp"
#include "glass/error.hpp"

namespace glass::credential {
namespace {

using Json = nlohmann::json;

template <typename F>
auto json_field(const char* what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(Errc::format, std::string(what) + ": " + e.what());
  }
}

bool matches_kind(const Json& value, registry::AttributeKind kind) {
  switch (kind) {
    case registry::AttributeKind::text:
      return value.is_string();
    case registry::AttributeKind::integer:
      return value.is_number_integer();
    case registry::AttributeKind::date:
      return value.is_string() && is_iso_date(value.get<std::string>());
  }
  return false;
}

std::string describe_all(const std::vector<SchemaViolation>& violations) {
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += v.describe();
  }
  return out;
}

std::string first_failure(const CredentialCheck& c, bool resolvable) {
  if (!resolvable) return "issuer-unresolvable";
  if (!c.issuer_trusted) return "issuer-untrusted";
  if (!c.schema_valid) return "schema-invalid";
  if (!c.signature_valid) return "signature-invalid";
  return "";
}

}  // namespace

Json VerifiableCredential::unsigned_json() const {
  return {{"credential_id", credential_id}, {"schema_id", schema_id}, {"credential_type", credential_type},
          {"issuer", issuer.text()},        {"subject", subject.text()},  {"claims", claims},
          {"issued_at", issued_at}};
}

Bytes VerifiableCredential::signing_bytes() const { return canon::serialize_bytes(unsigned_json()); }

Json VerifiableCredential::to_json() const {
  Json j = unsigned_json();
  j["proof"] = {{"signature", crypto::b58(proof.signature)}, {"verification_did", proof.verification_did.text()}};
  return j;
}

VerifiableCredential VerifiableCredential::from_json(const Json& j) {
  return json_field("verifiable credential", [&] {
    VerifiableCredential vc;
    vc.credential_id = j.at("credential_id").get<std::string>();
    vc.schema_id = j.at("schema_id").get<std::string>();
    vc.credential_type = j.at("credential_type").get<std::string>();
    vc.issuer = Did::parse(j.at("issuer").get<std::string>());
    vc.subject = Did::parse(j.at("subject").get<std::string>());
    vc.claims = j.at("claims");
    if (!vc.claims.is_object()) throw Error(Errc::format, "claims must be an object");
    vc.issued_at = j.at("issued_at").get<std::int64_t>();
    const auto& proof = j.at("proof");
    vc.proof.signature = crypto::fixed_from_b58<64>(proof.at("signature").get<std::string>());
    vc.proof.verification_did = Did::parse(proof.at("verification_did").get<std::string>());
    return vc;
  });
}

Json VerifiablePresentation::unsigned_json() const {
  Json creds = Json::array();
  for (const auto& vc : credentials) creds.push_back(vc.to_json());
  return {{"holder", holder.text()}, {"credentials", creds}, {"challenge", crypto::b58(challenge)}};
}

Bytes VerifiablePresentation::signing_bytes() const { return canon::serialize_bytes(unsigned_json()); }

Json VerifiablePresentation::to_json() const {
  Json j = unsigned_json();
  j["proof"] = {{"signature", crypto::b58(proof)}};
  return j;
}

VerifiablePresentation VerifiablePresentation::from_json(const Json& j) {
  return json_field("verifiable presentation", [&] {
    VerifiablePresentation vp;
    vp.holder = Did::parse(j.at("holder").get<std::string>());
    for (const auto& c : j.at("credentials")) vp.credentials.push_back(VerifiableCredential::from_json(c));
    vp.challenge = base58::decode(j.at("challenge").get<std::string>());
    vp.proof = crypto::fixed_from_b58<64>(j.at("proof").at("signature").get<std::string>());
    return vp;
  });
}

std::string SchemaViolation::describe() const {
  switch (kind) {
    case Kind::missing:
      return "missing required attribute " + attribute;
    case Kind::unknown:
      return "unknown attribute " + attribute;
    case Kind::wrong_kind:
      return "wrong kind for attribute " + attribute;
    case Kind::type_mismatch:
      return "credential does not match schema " + attribute;
  }
  return attribute;
}

bool is_iso_date(std::string_view text) {
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9}) {
    if (text[i] < '0' || text[i] > '9') return false;
  }
  auto num = [&](std::size_t pos, std::size_t len) {
    int v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) v = v * 10 + (text[i] - '0');
    return v;
  };
  const int year = num(0, 4);
  const int month = num(5, 2);
  const int day = num(8, 2);
  if (month < 1 || month > 12 || day < 1) return false;
  static constexpr int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  const bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
  const int limit = kDays[month - 1] + (month == 2 && leap ? 1 : 0);
  return day <= limit;
}

std::vector<SchemaViolation> validate_schema(const Claims& claims, const CredentialSchema& schema) {
  std::vector<SchemaViolation> out;
  if (!claims.is_object()) {
    out.push_back({SchemaViolation::Kind::wrong_kind, "claims"});
    return out;
  }
  for (const auto& attr : schema.required_attributes) {
    auto it = claims.find(attr.name);
    if (it == claims.end()) {
      out.push_back({SchemaViolation::Kind::missing, attr.name});
    } else if (!matches_kind(*it, attr.kind)) {
      out.push_back({SchemaViolation::Kind::wrong_kind, attr.name});
    }
  }
  for (auto it = claims.begin(); it != claims.end(); ++it) {
    const auto* attr = schema.find(it.key());
    if (!attr) {
      out.push_back({SchemaViolation::Kind::unknown, it.key()});
      continue;
    }
    const bool optional = std::any_of(schema.optional_attributes.begin(), schema.optional_attributes.end(),
                                      [&](const auto& a) { return a.name == it.key(); });
    if (optional && !matches_kind(it.value(), attr->kind)) {
      out.push_back({SchemaViolation::Kind::wrong_kind, it.key()});
    }
  }
  return out;
}

std::vector<SchemaViolation> validate_schema(const VerifiableCredential& vc, const CredentialSchema& schema) {
  std::vector<SchemaViolation> out;
  if (vc.schema_id != schema.schema_id) out.push_back({SchemaViolation::Kind::type_mismatch, "schema_id"});
  if (vc.credential_type != schema.credential_type) {
    out.push_back({SchemaViolation::Kind::type_mismatch, "credential_type"});
  }
  auto claims = validate_schema(vc.claims, schema);
  out.insert(out.end(), claims.begin(), claims.end());
  return out;
}

VerifiableCredential issue(const crypto::SigningKeypair& issuer_keys, const Did& issuer_did, const Did& subject_did,
                           const CredentialSchema& schema, const Claims& claims, std::int64_t issued_at) {
  if (auto violations = validate_schema(claims, schema); !violations.empty()) {
    throw Error(Errc::validation, describe_all(violations));
  }
  VerifiableCredential vc;
  vc.schema_id = schema.schema_id;
  vc.credential_type = schema.credential_type;
  vc.issuer = issuer_did;
  vc.subject = subject_did;
  vc.claims = claims;
  vc.issued_at = issued_at;
  auto id_source = vc.unsigned_json();
  id_source.erase("credential_id");
  vc.credential_id = "urn:glass:vc:" + crypto::sha256(canon::serialize(id_source)).b58();
  vc.proof.verification_did = issuer_did;
  vc.proof.signature = issuer_keys.sign(vc.signing_bytes());
  return vc;
}

bool verify_credential_signature(const VerifiableCredential& vc, const crypto::Key32& issuer_public) {
  if (vc.proof.verification_did != vc.issuer) return false;
  try {
    return crypto::verify(issuer_public, vc.signing_bytes(), vc.proof.signature);
  } catch (const Error&) {
    return false;
  }
}

VerifiablePresentation present(const crypto::SigningKeypair& holder_keys, const Did& holder_did,
                               std::vector<VerifiableCredential> vcs, Bytes challenge) {
  if (vcs.empty()) throw Error(Errc::validation, "presentation needs at least one credential");
  for (const auto& vc : vcs) {
    if (vc.subject != holder_did) throw Error(Errc::holder_mismatch, vc.credential_id);
  }
  VerifiablePresentation vp;
  vp.holder = holder_did;
  vp.credentials = std::move(vcs);
  vp.challenge = std::move(challenge);
  vp.proof = holder_keys.sign(vp.signing_bytes());
  return vp;
}

std::optional<DidDocument> DumpRegistryView::resolve_did(const Did& did) {
  const auto& dids = dump_.at("dids");
  auto it = dids.find(did.text());
  if (it == dids.end()) return std::nullopt;
  return DidDocument::from_json(*it);
}

bool DumpRegistryView::is_trusted_issuer(const Did& did, const std::string& credential_type) {
  for (const auto& e : dump_.at("trust_policy")) {
    auto entry = registry::TrustPolicyEntry::from_json(e);
    if (entry.issuer == did && entry.permitted_types.contains(credential_type)) return true;
  }
  return false;
}

std::optional<CredentialSchema> DumpRegistryView::schema(const std::string& schema_id) {
  const auto& schemas = dump_.at("schemas");
  auto it = schemas.find(schema_id);
  if (it == schemas.end()) return std::nullopt;
  return CredentialSchema::from_json(*it);
}

Json VerificationReport::to_json() const {
  Json creds = Json::array();
  for (const auto& c : per_credential) {
    creds.push_back({{"credential_id", c.credential_id},
                     {"issuer_trusted", c.issuer_trusted},
                     {"signature_valid", c.signature_valid},
                     {"schema_valid", c.schema_valid},
                     {"reason", c.reason}});
  }
  return {{"overall", overall},
          {"challenge_ok", challenge_ok},
          {"holder_signature_valid", holder_signature_valid},
          {"holder_matches", holder_matches},
          {"reason", reason},
          {"per_credential", creds}};
}

VerificationReport verify_presentation(const VerifiablePresentation& vp, ByteView expected_challenge,
                                       RegistryView& registry) {
  VerificationReport report;
  std::vector<std::string> failures;

  report.challenge_ok = std::equal(vp.challenge.begin(), vp.challenge.end(), expected_challenge.begin(),
                                   expected_challenge.end());
  if (!report.challenge_ok) failures.push_back("challenge-mismatch");

  if (auto holder = registry.resolve_did(vp.holder)) {
    report.holder_signature_valid = crypto::verify(holder->signing_public, vp.signing_bytes(), vp.proof);
    if (!report.holder_signature_valid) failures.push_back("holder-signature-invalid");
  } else {
    failures.push_back("holder-unresolvable");
  }

  report.holder_matches = !vp.credentials.empty() &&
                          std::all_of(vp.credentials.begin(), vp.credentials.end(),
                                      [&](const VerifiableCredential& vc) { return vc.subject == vp.holder; });
  if (!report.holder_matches) failures.push_back("holder-mismatch");

  bool all_credentials = true;
  for (const auto& vc : vp.credentials) {
    CredentialCheck check;
    check.credential_id = vc.credential_id;
    auto issuer = registry.resolve_did(vc.issuer);
    if (issuer) {
      check.issuer_trusted = registry.is_trusted_issuer(vc.issuer, vc.credential_type);
      if (auto schema = registry.schema(vc.schema_id)) check.schema_valid = validate_schema(vc, *schema).empty();
      check.signature_valid = verify_credential_signature(vc, issuer->signing_public);
    }
    check.reason = first_failure(check, issuer.has_value());
    if (!check.reason.empty()) {
      all_credentials = false;
      failures.push_back(check.reason);
    }
    report.per_credential.push_back(std::move(check));
  }

  report.overall = report.challenge_ok && report.holder_signature_valid && report.holder_matches && all_credentials;
  if (!failures.empty()) report.reason = failures.front();
  return report;
}

}  // namespace glass::credential
