#include <gtest/gtest.h>

#include <glass/chaincode.hpp>
#include <glass/error.hpp>

#include "support/support.hpp"

namespace glass {
namespace {

using registry::Did;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::internal;
}

TEST(Did, DerivedFromSigningKey) {
  auto pk = from_hex("d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a");
  crypto::Key32 key{};
  std::copy(pk.begin(), pk.end(), key.begin());
  auto did = Did::from_signing_key(key);
  EXPECT_EQ(did.text(), "did:glass:QmQdLyVK6Df2XQfexRd1LJr3zdu4uZV6dBm6kQHnXKrLdW");
  EXPECT_TRUE(did.derives_from(key));
  key[0] ^= 1;
  EXPECT_FALSE(did.derives_from(key));
  EXPECT_EQ(Did::parse(did.text()), did);
}

TEST(Did, ParseRejectsMalformed) {
  for (const char* bad : {"", "did:glass:", "did:other:QmQdLyVK6Df2XQfexRd1LJr3zdu4uZV6dBm6kQHnXKrLdW",
                          "did:glass:QmQdLyVK6Df2XQfexRd1LJr3zdu4uZV6dBm6kQHnXKrLd", "did:glass:0000"}) {
    EXPECT_EQ(code_of([&] { Did::parse(bad); }), Errc::invalid_did) << bad;
  }
}

TEST(Schema, Validation) {
  auto s = test::ac_schema();
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.find("grade")->kind, registry::AttributeKind::text);
  EXPECT_EQ(s.find("shoe_size"), nullptr);
  auto dup = s;
  dup.optional_attributes.push_back({"degree", registry::AttributeKind::text});
  EXPECT_EQ(code_of([&] { dup.validate(); }), Errc::validation);
  auto bad_type = s;
  bad_type.credential_type = "ac";
  EXPECT_EQ(code_of([&] { bad_type.validate(); }), Errc::validation);
  EXPECT_EQ(registry::CredentialSchema::from_json(s.to_json()), s);
}

TEST(TrustPolicy, Validation) {
  SeededRandom rng(3);
  auto did = Did::from_signing_key(crypto::SigningKeypair::generate(rng).public_key());
  registry::TrustPolicyEntry e{did, "DE.DE_Dept_Justice", {"AC", "TAX"}};
  EXPECT_NO_THROW(e.validate());
  EXPECT_EQ(registry::TrustPolicyEntry::from_json(e.to_json()), e);
  EXPECT_TRUE(registry::valid_country_domain("IT"));
  EXPECT_FALSE(registry::valid_country_domain("de"));
  EXPECT_FALSE(registry::valid_country_domain("DEU"));
  EXPECT_FALSE(registry::valid_country_domain("DE."));
  e.permitted_types.clear();
  EXPECT_EQ(code_of([&] { e.validate(); }), Errc::validation);
}

class TrustRegistryTest : public ::testing::Test {
 protected:
  TrustRegistryTest() : net(606) {
    alice = portal::Wallet::generate(net.rng);
    uni = portal::Wallet::generate(net.rng);
  }
  test::GlassNet net;
  portal::Wallet alice, uni;
};

TEST_F(TrustRegistryTest, RegisterAndResolveDid) {
  auto doc = alice.document(registry::PersonKind::natural_person);
  registry::register_did(*net.channel, net.m2, doc);
  EXPECT_EQ(registry::resolve_did(*net.channel, net.m1, alice.did), doc);
  EXPECT_EQ(code_of([&] { registry::register_did(*net.channel, net.m1, doc); }), Errc::already_exists);
  EXPECT_EQ(code_of([&] { registry::resolve_did(*net.channel, net.m1, uni.did); }), Errc::not_found);
}

TEST_F(TrustRegistryTest, DidMustDeriveFromKey) {
  auto doc = alice.document(registry::PersonKind::natural_person);
  doc.signing_public = uni.signing.public_key();
  EXPECT_EQ(code_of([&] { registry::register_did(*net.channel, net.m1, doc); }), Errc::invalid_did);
}

TEST_F(TrustRegistryTest, OnlyAuthorityWritesPolicy) {
  portal::onboard(*net.channel, net.m1, uni, registry::PersonKind::legal_person);
  auto schema = test::ac_schema();
  for (const auto* who : {&net.m1, &net.m2}) {
    EXPECT_EQ(code_of([&] { registry::register_schema(*net.channel, *who, schema); }), Errc::access_denied);
    EXPECT_EQ(code_of([&] { registry::register_trusted_issuer(*net.channel, *who, {uni.did, "DE", {"AC"}}); }),
              Errc::access_denied);
    EXPECT_EQ(code_of([&] { registry::register_trusted_app(*net.channel, *who, uni.did); }), Errc::access_denied);
  }
  registry::register_schema(*net.channel, net.ma, schema);
  EXPECT_EQ(registry::get_schema(*net.channel, net.m2, schema.schema_id), schema);
  EXPECT_EQ(code_of([&] { registry::register_schema(*net.channel, net.ma, schema); }), Errc::already_exists);
  EXPECT_EQ(code_of([&] { registry::get_schema(*net.channel, net.m1, "missing"); }), Errc::not_found);
}

TEST_F(TrustRegistryTest, TrustedIssuerLookup) {
  portal::onboard(*net.channel, net.m1, uni, registry::PersonKind::legal_person);
  EXPECT_EQ(code_of([&] { registry::register_trusted_issuer(*net.channel, net.ma, {alice.did, "DE", {"AC"}}); }),
            Errc::not_found);
  registry::register_trusted_issuer(*net.channel, net.ma, {uni.did, "DE", {"AC"}});
  registry::register_trusted_issuer(*net.channel, net.ma, {uni.did, "IT", {"DL"}});
  EXPECT_TRUE(registry::is_trusted_issuer(*net.channel, net.m2, uni.did, "AC"));
  EXPECT_TRUE(registry::is_trusted_issuer(*net.channel, net.m2, uni.did, "DL"));
  EXPECT_FALSE(registry::is_trusted_issuer(*net.channel, net.m2, uni.did, "TAX"));
  EXPECT_FALSE(registry::is_trusted_issuer(*net.channel, net.m2, alice.did, "AC"));
  EXPECT_EQ(code_of([&] { registry::register_trusted_issuer(*net.channel, net.ma, {uni.did, "DE", {"TAX"}}); }),
            Errc::already_exists);
  EXPECT_EQ(code_of([&] { registry::register_trusted_issuer(*net.channel, net.ma, {uni.did, "de", {"TAX"}}); }),
            Errc::validation);
}

TEST_F(TrustRegistryTest, DumpReflectsWorldState) {
  portal::onboard(*net.channel, net.m1, uni, registry::PersonKind::legal_person);
  portal::onboard(*net.channel, net.m1, alice, registry::PersonKind::natural_person);
  registry::register_schema(*net.channel, net.ma, test::ac_schema());
  registry::register_trusted_issuer(*net.channel, net.ma, {uni.did, "DE", {"AC"}});
  registry::register_trusted_app(*net.channel, net.ma, alice.did);
  EXPECT_TRUE(registry::is_trusted_app(*net.channel, net.m1, alice.did));
  EXPECT_FALSE(registry::is_trusted_app(*net.channel, net.m1, uni.did));
  auto dump = registry::registry_dump(net.channel->world_state());
  EXPECT_EQ(dump.at("dids").size(), 2u);
  EXPECT_EQ(dump.at("schemas").size(), 1u);
  EXPECT_EQ(dump.at("trust_policy").size(), 1u);
  EXPECT_EQ(dump.at("apps"), nlohmann::json::array({alice.did.text()}));
  auto replayed = ledger::replay(net.channel->blocks());
  EXPECT_EQ(registry::registry_dump(replayed.world), dump);
}

}  // namespace
}  // namespace glass
