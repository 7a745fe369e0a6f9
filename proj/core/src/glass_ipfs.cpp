#include <nlohmann/json.hpp>

#include "glass/canonical_json.hpp"
#include "glass/chaincode.hpp"
#include "glass/error.hpp"

namespace glass::registry {
namespace {

using Json = nlohmann::json;

const std::string kPublic(kPublicCollection);
const std::string kPrivate(kPrivateCollection);

ContentId parse_cid_arg(const std::vector<std::string>& args, std::size_t index) {
  if (args.size() <= index) throw Error(Errc::validation, "missing cid argument");
  return ContentId::parse(args[index]);
}

Json create(ledger::ChaincodeContext& ctx, const std::vector<std::string>& args) {
  if (args.size() != 2) throw Error(Errc::validation, "create_glass_resource expects cid, uri");
  const auto cid = parse_cid_arg(args, 0);
  const auto& uri = args[1];
  if (uri.empty()) throw Error(Errc::validation, "empty uri");
  auto wrapped = ctx.transient("wrapped_key");
  if (!wrapped) throw Error(Errc::validation, "wrapped_key missing from transient data");
  crypto::WrappedKey key = canon::parse(*wrapped).get<crypto::WrappedKey>();

  if (!ctx.can_write(kPublic)) throw Error(Errc::access_denied, ctx.invoker_org() + ", " + kPublic);
  if (!ctx.can_write(kPrivate)) throw Error(Errc::access_denied, ctx.invoker_org() + ", " + kPrivate);
  const auto key_text = cid.text();
  if (ctx.collection_has(kPublic, key_text) || ctx.collection_has(kPrivate, key_text)) {
    throw Error(Errc::already_exists, key_text);
  }
  ctx.collection_put(kPublic, key_text, canon::serialize(Json{{"cid", key_text}, {"uri", uri}}));
  ctx.collection_put(kPrivate, key_text, canon::serialize(Json(key)));
  return {{"cid", key_text}, {"status", "created"}};
}

Json read_resource(ledger::ChaincodeContext& ctx, const std::vector<std::string>& args) {
  const auto cid = parse_cid_arg(args, 0);
  auto value = ctx.collection_get(kPublic, cid.text());
  if (!value) throw Error(Errc::not_found, cid.text());
  return canon::parse(*value);
}

Json read_key(ledger::ChaincodeContext& ctx, const std::vector<std::string>& args) {
  const auto cid = parse_cid_arg(args, 0);
  auto value = ctx.collection_get(kPrivate, cid.text());
  if (!value) throw Error(Errc::not_found, cid.text());
  return canon::parse(*value);
}

}  // namespace

Json GlassIpfsChaincode::invoke(ledger::ChaincodeContext& ctx, std::string_view function,
                                const std::vector<std::string>& args) {
  if (function == "create_glass_resource") return create(ctx, args);
  if (function == "read_glass_resource") return read_resource(ctx, args);
  if (function == "read_glass_resource_key") return read_key(ctx, args);
  throw Error(Errc::not_found, "function " + std::string(function));
}

ledger::ChannelConfig glass_channel_config(const ledger::OrgInfo& org1, const ledger::OrgInfo& org2,
                                           const ledger::OrgInfo& authority) {
  ledger::ChannelConfig config;
  config.orgs = {org1, org2, authority};
  config.collections = {
      ledger::CollectionConfig{kPublic, {org1.name, org2.name}, {org1.name, org2.name}},
      ledger::CollectionConfig{kPrivate, {org1.name}, {org1.name, org2.name}},
  };
  return config;
}

void install_glass_chaincodes(ledger::Channel& channel, std::string authority_org) {
  channel.install(std::string(kGlassIpfs), std::make_shared<GlassIpfsChaincode>());
  channel.install(std::string(kTrustRegistry), std::make_shared<TrustRegistryChaincode>(std::move(authority_org)));
}

ledger::Receipt create_glass_resource(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                      const ContentId& cid, const std::string& uri,
                                      const crypto::WrappedKey& wrapped_key) {
  return channel.submit(who, std::string(kGlassIpfs), "create_glass_resource", {cid.text(), uri},
                        {{"wrapped_key", canon::serialize(Json(wrapped_key))}});
}

std::pair<ContentId, std::string> read_glass_resource(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                                      const ContentId& cid) {
  auto receipt = channel.submit(who, std::string(kGlassIpfs), "read_glass_resource", {cid.text()});
  return {ContentId::parse(receipt.result.at("cid").get<std::string>()), receipt.result.at("uri").get<std::string>()};
}

crypto::WrappedKey read_glass_resource_key(ledger::Channel& channel, const ledger::MemberIdentity& who,
                                           const ContentId& cid) {
  auto receipt = channel.submit(who, std::string(kGlassIpfs), "read_glass_resource_key", {cid.text()});
  return receipt.result.get<crypto::WrappedKey>();
}

}  // namespace glass::registry
