#include "glass/portal.hpp"

#include <algorithm>

#include "glass/canonical_json.hpp"
#include "glass/error.hpp"

namespace glass::portal {

using Json = nlohmann::json;

namespace {

constexpr std::string_view kIpfsScheme = "ipfs://";

ContentId cid_from_uri(std::string_view uri) {
  if (!uri.starts_with(kIpfsScheme)) throw Error(Errc::unsupported_uri, std::string(uri));
  return ContentId::parse(uri.substr(kIpfsScheme.size()));
}

}  // namespace

std::string ipfs_uri(const ContentId& cid) { return std::string(kIpfsScheme) + cid.text(); }

Json DistributionRecord::to_json() const {
  return {{"credential_id", credential_id},
          {"cid", cid.text()},
          {"uri", uri},
          {"wrapped_key", wrapped_key},
          {"receipt", {{"block_height", receipt.block_height}, {"tx_index", receipt.tx_index}}}};
}

void StagingStore::put(const std::string& name, Bytes bytes) { entries_[name] = std::move(bytes); }

void StagingStore::purge(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) return;
  std::fill(it->second.begin(), it->second.end(), std::uint8_t{0});
  tombstones_.push_back({name, crypto::sha256(it->second)});
  entries_.erase(it);
}

bool StagingStore::scan(ByteView marker) const {
  if (marker.empty()) return false;
  return std::any_of(entries_.begin(), entries_.end(), [&](const auto& entry) {
    return std::search(entry.second.begin(), entry.second.end(), marker.begin(), marker.end()) != entry.second.end();
  });
}

Did onboard(ledger::Channel& channel, const ledger::MemberIdentity& who, const Wallet& wallet,
            registry::PersonKind kind) {
  registry::register_did(channel, who, wallet.document(kind));
  return wallet.did;
}

DistributionRecord issue_and_distribute(PortalSession& session, Wallet& issuer, const Did& subject_did,
                                        const std::string& schema_id, const Claims& claims) {
  auto& channel = session.channel();
  // Pre-checks read committed world state without submitting a transaction,
  // so a refused issuance leaves the ledger untouched.
  credential::DumpRegistryView registry(registry::registry_dump(channel.world_state()));
  auto schema = registry.schema(schema_id);
  if (!schema) throw Error(Errc::not_found, "schema " + schema_id);
  if (!registry.resolve_did(issuer.did) || !registry.is_trusted_issuer(issuer.did, schema->credential_type)) {
    throw Error(Errc::issuer_untrusted, issuer.did.text() + " for " + schema->credential_type);
  }
  auto subject = registry.resolve_did(subject_did);
  if (!subject) throw Error(Errc::not_found, subject_did.text());

  auto vc = credential::issue(issuer.signing, issuer.did, subject_did, *schema, claims,
                              static_cast<std::int64_t>(channel.height()));

  auto& staging = session.staging();
  staging.put(vc.credential_id, canon::serialize_bytes(vc.to_json()));
  auto key = crypto::ContentKey::generate(session.rng());
  auto sealed = crypto::encrypt_content(staging.entries().at(vc.credential_id), key);
  staging.purge(vc.credential_id);

  auto dag = dag::build_dag(sealed, session.chunk_size());
  for (const auto& [cid, bytes] : dag.blocks) staging.put(cid.text(), bytes);
  session.node().provide(dag.blocks);

  DistributionRecord record;
  record.credential_id = vc.credential_id;
  record.cid = dag.root;
  record.uri = ipfs_uri(dag.root);
  record.wrapped_key = crypto::wrap_key(key, subject->agreement_public, session.rng());
  record.receipt = registry::create_glass_resource(channel, session.identity(), record.cid, record.uri,
                                                   record.wrapped_key);
  record.credential = std::move(vc);
  return record;
}

VerifiableCredential retrieve_credential(PortalSession& session, Wallet& subject, const ContentId& cid) {
  auto& channel = session.channel();
  auto [stored_cid, uri] = registry::read_glass_resource(channel, session.identity(), cid);
  auto target = cid_from_uri(uri);
  if (target != stored_cid) throw Error(Errc::validation, "uri does not name " + stored_cid.text());
  auto wrapped = registry::read_glass_resource_key(channel, session.identity(), cid);

  auto sealed = session.node().fetch(target);
  auto key = crypto::unwrap_key(wrapped, subject.agreement.secret());
  auto plaintext = crypto::decrypt_content(sealed, key);
  auto vc = VerifiableCredential::from_json(canon::parse(to_string(plaintext)));

  credential::DumpRegistryView registry(registry::registry_dump(channel.world_state()));
  auto issuer = registry.resolve_did(vc.issuer);
  if (!issuer || !credential::verify_credential_signature(vc, issuer->signing_public)) {
    throw Error(Errc::signature_invalid, vc.credential_id);
  }
  Holding holding{vc.credential_id, cid, uri};
  if (std::find(subject.holdings.begin(), subject.holdings.end(), holding) == subject.holdings.end()) {
    subject.holdings.push_back(std::move(holding));
  }
  return vc;
}

std::optional<registry::DidDocument> LedgerRegistryView::resolve_did(const Did& did) {
  try {
    return registry::resolve_did(*channel_, who_, did);
  } catch (const Error& e) {
    if (e.code() == Errc::not_found) return std::nullopt;
    throw;
  }
}

bool LedgerRegistryView::is_trusted_issuer(const Did& did, const std::string& credential_type) {
  return registry::is_trusted_issuer(*channel_, who_, did, credential_type);
}

std::optional<registry::CredentialSchema> LedgerRegistryView::schema(const std::string& schema_id) {
  try {
    return registry::get_schema(*channel_, who_, schema_id);
  } catch (const Error& e) {
    if (e.code() == Errc::not_found) return std::nullopt;
    throw;
  }
}

VerificationReport present_and_verify(ledger::Channel& channel, const ledger::MemberIdentity& verifier_member,
                                      RandomSource& rng, const Wallet& holder,
                                      std::vector<VerifiableCredential> vcs, const Wallet& verifier) {
  if (!registry::is_trusted_app(channel, verifier_member, verifier.did)) {
    throw Error(Errc::access_denied, "trusted apps registry: " + verifier.did.text());
  }
  auto challenge = rng.bytes(32);
  auto vp = credential::present(holder.signing, holder.did, std::move(vcs), challenge);
  LedgerRegistryView view(channel, verifier_member);
  return credential::verify_presentation(vp, challenge, view);
}

}  // namespace glass::portal
