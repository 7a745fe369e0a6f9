#include "glass/canonical_json.hpp"
#include "glass/error.hpp"
#include "glass/portal.hpp"

namespace glass::portal {

using Json = nlohmann::json;

Wallet Wallet::generate(RandomSource& rng) {
  Wallet w;
  w.signing = crypto::SigningKeypair::generate(rng);
  w.agreement = crypto::AgreementKeypair::generate(rng);
  w.did = Did::from_signing_key(w.signing.public_key());
  return w;
}

registry::DidDocument Wallet::document(registry::PersonKind kind) const {
  return registry::DidDocument{did, signing.public_key(), agreement.public_key(), kind};
}

Json Wallet::keystore_json() const {
  Json holdings_json = Json::array();
  for (const auto& h : holdings) {
    holdings_json.push_back({{"credential_id", h.credential_id}, {"cid", h.cid.text()}, {"uri", h.uri}});
  }
  return {{"did", did.text()},
          {"signing", crypto::key_record(signing)},
          {"agreement", crypto::key_record(agreement)},
          {"holdings", holdings_json}};
}

Wallet Wallet::from_keystore(const Json& j) {
  Wallet w;
  try {
    w.did = Did::parse(j.at("did").get<std::string>());
    w.signing = crypto::signing_from_record(j.at("signing"));
    w.agreement = crypto::agreement_from_record(j.at("agreement"));
    for (const auto& h : j.at("holdings")) {
      w.holdings.push_back(Holding{h.at("credential_id").get<std::string>(),
                                   ContentId::parse(h.at("cid").get<std::string>()), h.at("uri").get<std::string>()});
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::format, std::string("keystore: ") + e.what());
  }
  if (!w.did.derives_from(w.signing.public_key())) throw Error(Errc::invalid_did, w.did.text());
  return w;
}

}  // namespace glass::portal
