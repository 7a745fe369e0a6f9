#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "glass/chaincode.hpp"
#include "glass/cid.hpp"
#include "glass/credential.hpp"
#include "glass/crypto.hpp"
#include "glass/dag.hpp"
#include "glass/ledger.hpp"
#include "glass/random.hpp"
#include "glass/swarm.hpp"

namespace glass::portal {

using credential::Claims;
using credential::VerifiableCredential;
using credential::VerificationReport;
using registry::Did;

struct Holding {
  std::string credential_id;
  ContentId cid;
  std::string uri;
  bool operator==(const Holding&) const = default;
};

struct Wallet {
  Did did;
  crypto::SigningKeypair signing;
  crypto::AgreementKeypair agreement;
  std::vector<Holding> holdings;

  static Wallet generate(RandomSource& rng);
  registry::DidDocument document(registry::PersonKind kind) const;

  // The keystore file is the only artifact that carries the secrets.
  nlohmann::json keystore_json() const;
  // Errors: Errc::format, or Errc::invalid_did when the did does not derive
  // from the signing key.
  static Wallet from_keystore(const nlohmann::json& j);
};

struct DistributionRecord {
  std::string credential_id;
  ContentId cid;
  std::string uri;
  crypto::WrappedKey wrapped_key;
  ledger::Receipt receipt;
  // Issuer-side copy of the signed credential; to_json() leaves it out.
  VerifiableCredential credential;

  nlohmann::json to_json() const;
};

std::string ipfs_uri(const ContentId& cid);

// Portal-side scratch space. Plaintext is staged here only while it is being
// encrypted; purge() drops it and leaves a tombstone with its digest.
class StagingStore {
 public:
  struct Tombstone {
    std::string name;
    crypto::Digest32 digest;
  };

  void put(const std::string& name, Bytes bytes);
  void purge(const std::string& name);
  bool contains(const std::string& name) const { return entries_.contains(name); }
  // True when any retained entry contains marker as a substring.
  bool scan(ByteView marker) const;

  const std::map<std::string, Bytes>& entries() const noexcept { return entries_; }
  const std::vector<Tombstone>& tombstones() const noexcept { return tombstones_; }

 private:
  std::map<std::string, Bytes> entries_;
  std::vector<Tombstone> tombstones_;
};

// Single-owner; do not share across threads.
class PortalSession {
 public:
  PortalSession(ledger::Channel& channel, swarm::NodeHandle node, ledger::MemberIdentity identity, RandomSource& rng,
                std::size_t chunk_size = dag::kDefaultChunkSize)
      : channel_(&channel), node_(node), identity_(std::move(identity)), rng_(&rng), chunk_size_(chunk_size) {}

  ledger::Channel& channel() const noexcept { return *channel_; }
  const swarm::NodeHandle& node() const noexcept { return node_; }
  const ledger::MemberIdentity& identity() const noexcept { return identity_; }
  RandomSource& rng() const noexcept { return *rng_; }
  std::size_t chunk_size() const noexcept { return chunk_size_; }
  StagingStore& staging() noexcept { return staging_; }
  const StagingStore& staging() const noexcept { return staging_; }

 private:
  ledger::Channel* channel_;
  swarm::NodeHandle node_;
  ledger::MemberIdentity identity_;
  RandomSource* rng_;
  std::size_t chunk_size_;
  StagingStore staging_;
};

// Errors: Errc::already_exists.
Did onboard(ledger::Channel& channel, const ledger::MemberIdentity& who, const Wallet& wallet,
            registry::PersonKind kind);

// Errors: Errc::issuer_untrusted (checked before anything is encrypted),
// Errc::not_found for an unknown schema or subject, Errc::validation for bad
// claims, swarm errors from provide. Nothing reaches the ledger unless the
// blocks were provided.
DistributionRecord issue_and_distribute(PortalSession& session, Wallet& issuer, const Did& subject_did,
                                        const std::string& schema_id, const Claims& claims);

// Errors: Errc::access_denied, Errc::unsupported_uri, Errc::content_unavailable,
// Errc::block_corrupt, Errc::authentication_failed, Errc::signature_invalid.
VerifiableCredential retrieve_credential(PortalSession& session, Wallet& subject, const ContentId& cid);

// Registry answers backed by live, audited ledger queries.
class LedgerRegistryView final : public credential::RegistryView {
 public:
  LedgerRegistryView(ledger::Channel& channel, ledger::MemberIdentity who)
      : channel_(&channel), who_(std::move(who)) {}

  std::optional<registry::DidDocument> resolve_did(const Did& did) override;
  bool is_trusted_issuer(const Did& did, const std::string& credential_type) override;
  std::optional<registry::CredentialSchema> schema(const std::string& schema_id) override;

 private:
  ledger::Channel* channel_;
  ledger::MemberIdentity who_;
};

// The verifier (acting through verifier_member) issues a 32-byte challenge,
// the holder signs a presentation over it, and the verifier checks it
// against the live registry. Errors: Errc::access_denied when the verifier is
// not a trusted app.
VerificationReport present_and_verify(ledger::Channel& channel, const ledger::MemberIdentity& verifier_member,
                                      RandomSource& rng, const Wallet& holder,
                                      std::vector<VerifiableCredential> vcs, const Wallet& verifier);

}  // namespace glass::portal
