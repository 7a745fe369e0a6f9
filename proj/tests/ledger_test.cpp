#include <gtest/gtest.h>

#include <thread>

#include <glass/canonical_json.hpp>
#include <glass/chaincode.hpp>
#include <glass/error.hpp>
#include <glass/ledger.hpp>

#include "support/support.hpp"

namespace glass {
namespace {

using Json = nlohmann::json;

// put(key, value), get(key), fail(code), boom(): exercise the ledger without
// the glass chaincodes.
class KvChaincode final : public ledger::Chaincode {
 public:
  Json invoke(ledger::ChaincodeContext& ctx, std::string_view function, const std::vector<std::string>& args) override {
    if (function == "put") {
      ctx.put_state(args.at(0), args.at(1));
      return {{"ok", true}};
    }
    if (function == "put_then_fail") {
      ctx.put_state(args.at(0), args.at(1));
      throw Error(Errc::validation, "after write");
    }
    if (function == "get") {
      auto v = ctx.get_state(args.at(0));
      return v ? Json(*v) : Json(nullptr);
    }
    if (function == "stash") {
      ctx.collection_put("private", args.at(0), ctx.transient("secret").value_or(""));
      return {{"ok", true}};
    }
    if (function == "boom") throw std::runtime_error("boom");
    throw Error(Errc::not_found, std::string(function));
  }
};

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::internal;
}

class LedgerTest : public ::testing::Test {
 protected:
  LedgerTest() : net(404) { net.channel->install("kv", std::make_shared<KvChaincode>()); }
  ledger::Channel& ch() { return *net.channel; }
  test::GlassNet net;
};

TEST_F(LedgerTest, GenesisHoldsChannelConfig) {
  EXPECT_EQ(ch().height(), 0u);
  auto genesis = ch().block(0);
  ASSERT_EQ(genesis.txs.size(), 1u);
  EXPECT_FALSE(genesis.txs[0].invoker);
  auto config = ledger::ChannelConfig::from_json(canon::parse(genesis.txs[0].args.at(0)));
  EXPECT_EQ(config.orgs.size(), 3u);
  EXPECT_TRUE(ch().verify_chain());
  EXPECT_TRUE(ledger::audit_rows(ch().blocks()).empty());
}

TEST_F(LedgerTest, OneTransactionPerBlockAndLinkage) {
  for (int i = 0; i < 5; ++i) {
    auto r = ch().submit(net.m1, "kv", "put", {"k" + std::to_string(i), "v"});
    EXPECT_EQ(r.block_height, static_cast<std::uint64_t>(i + 1));
  }
  auto blocks = ch().blocks();
  ASSERT_EQ(blocks.size(), 6u);
  for (std::size_t h = 1; h < blocks.size(); ++h) {
    EXPECT_EQ(blocks[h].prev_hash, blocks[h - 1].block_hash);
    EXPECT_EQ(blocks[h].txs.at(0).logical_time, h);
  }
  EXPECT_TRUE(ch().verify_chain());
  EXPECT_EQ(ch().world_value("k3"), "v");
}

TEST_F(LedgerTest, JsonlRoundTrip) {
  ch().submit(net.m1, "kv", "put", {"a", "1"});
  ch().submit(net.m2, "kv", "stash", {"s"}, {{"secret", "hidden"}});
  auto text = ch().export_jsonl();
  auto parsed = ledger::parse_jsonl(text);
  ASSERT_EQ(parsed.size(), ch().blocks().size());
  for (std::size_t i = 0; i < parsed.size(); ++i) EXPECT_EQ(parsed[i].block_hash, ch().block(i).block_hash);
  auto priv = ch().private_store();
  EXPECT_TRUE(ledger::verify_jsonl(text, &priv).ok);
}

TEST_F(LedgerTest, PrivateValuesStayOffLedger) {
  ch().submit(net.m1, "kv", "stash", {"s"}, {{"secret", "the-private-value-xyz"}});
  EXPECT_EQ(ch().export_jsonl().find("the-private-value-xyz"), std::string::npos);
  auto tx = ch().block(1).txs.at(0);
  ASSERT_EQ(tx.writes.size(), 1u);
  EXPECT_FALSE(tx.writes[0].value);
  EXPECT_EQ(tx.writes[0].value_hash, crypto::sha256(std::string_view("the-private-value-xyz")));
  EXPECT_TRUE(tx.transient_hash);
  EXPECT_EQ(ch().private_store().at("private").at("s"), "the-private-value-xyz");
}

TEST_F(LedgerTest, ReplayMatchesLiveState) {
  ch().submit(net.m1, "kv", "put", {"a", "1"});
  ch().submit(net.m2, "kv", "put", {"a", "2"});
  EXPECT_THROW(ch().submit(net.m1, "kv", "put_then_fail", {"b", "3"}), Error);
  ch().submit(net.m1, "kv", "stash", {"s"}, {{"secret", "x"}});
  auto replayed = ledger::replay(ledger::parse_jsonl(ch().export_jsonl()));
  EXPECT_EQ(replayed, ch().state());
  EXPECT_EQ(canon::serialize(replayed.to_json()), canon::serialize(ch().state().to_json()));
  EXPECT_EQ(replayed.world.at("a"), "2");
  EXPECT_FALSE(replayed.world.contains("b"));
}

TEST_F(LedgerTest, RejectedCallIsRecordedWithoutEffects) {
  const auto h = ch().height();
  EXPECT_EQ(code_of([&] { ch().submit(net.m1, "kv", "put_then_fail", {"b", "3"}); }), Errc::validation);
  EXPECT_EQ(ch().height(), h + 1);
  auto tx = ch().block(h + 1).txs.at(0);
  EXPECT_EQ(tx.status, ledger::TxStatus::rejected);
  EXPECT_EQ(tx.error, "validation");
  EXPECT_TRUE(tx.writes.empty());
  EXPECT_FALSE(ch().world_value("b"));
  EXPECT_TRUE(ch().verify_chain());
  auto rows = ledger::audit_rows(ch().blocks());
  EXPECT_EQ(rows.back().status, "rejected:validation");
}

TEST_F(LedgerTest, NonGlassExceptionsBecomeInternal) {
  EXPECT_EQ(code_of([&] { ch().submit(net.m1, "kv", "boom", {}); }), Errc::internal);
  EXPECT_EQ(ch().block(ch().height()).txs.at(0).status, ledger::TxStatus::rejected);
  EXPECT_EQ(code_of([&] { ch().submit(net.m1, "nope", "x", {}); }), Errc::not_found);
  EXPECT_TRUE(ch().verify_chain());
}

TEST_F(LedgerTest, BadCertificateAppendsNothing) {
  auto forged = net.m1;
  forged.cert[0] ^= 1;
  const auto h = ch().height();
  EXPECT_EQ(code_of([&] { ch().submit(forged, "kv", "put", {"a", "1"}); }), Errc::auth);
  auto stranger = net.m1;
  stranger.org = "elsewhere.org";
  EXPECT_EQ(code_of([&] { ch().submit(stranger, "kv", "put", {"a", "1"}); }), Errc::auth);
  // Org2's certificate presented under org1's name.
  auto swapped = net.m2;
  swapped.org = net.m1.org;
  EXPECT_EQ(code_of([&] { ch().submit(swapped, "kv", "put", {"a", "1"}); }), Errc::auth);
  EXPECT_EQ(ch().height(), h);
}

TEST_F(LedgerTest, EnrollmentRequiresConfiguredRoot) {
  SeededRandom rng(1, "imposter");
  auto imposter = ledger::Org::generate(net.org1.name, rng);
  EXPECT_EQ(code_of([&] { ch().enroll(imposter, crypto::SigningKeypair::generate(rng)); }), Errc::enrollment);
  auto outsider = ledger::Org::generate("outsider.org", rng);
  EXPECT_EQ(code_of([&] { ch().enroll(outsider, crypto::SigningKeypair::generate(rng)); }), Errc::enrollment);
}

TEST_F(LedgerTest, ChannelConfigValidation) {
  EXPECT_EQ(code_of([] { ledger::Channel::create({}); }), Errc::config);
  ledger::ChannelConfig dup;
  dup.orgs = {{"a", {}}, {"a", {}}};
  EXPECT_EQ(code_of([&] { ledger::Channel::create(dup); }), Errc::config);
  ledger::ChannelConfig unknown;
  unknown.orgs = {{"a", {}}};
  unknown.collections = {{"c", {"b"}, {"a"}}};
  EXPECT_EQ(code_of([&] { ledger::Channel::create(unknown); }), Errc::config);
}

TEST_F(LedgerTest, TamperedBlocksAreLocated) {
  for (int i = 0; i < 6; ++i) ch().submit(net.m1, "kv", "put", {"k", std::to_string(i)});
  ch().tamper_block(3, [](ledger::LedgerBlock& b) { b.txs[0].args[1] = "forged"; });
  auto report = ch().verify();
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.first_bad_height, 3u);
}

TEST_F(LedgerTest, RehashedTamperStillBreaksSignatureOrLink) {
  for (int i = 0; i < 4; ++i) ch().submit(net.m1, "kv", "put", {"k", std::to_string(i)});
  ch().tamper_block(2, [](ledger::LedgerBlock& b) {
    b.txs[0].args[1] = "forged";
    b.block_hash = b.compute_hash();
  });
  auto report = ch().verify();
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.first_bad_height, 2u);
}

TEST_F(LedgerTest, TamperedPrivateValueDetected) {
  ch().submit(net.m1, "kv", "stash", {"s"}, {{"secret", "original"}});
  ch().submit(net.m1, "kv", "put", {"a", "1"});
  ch().tamper_private("private", "s", "altered");
  auto report = ch().verify();
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.first_bad_height, 1u);
}

TEST_F(LedgerTest, HandEditedJsonlDetected) {
  ch().submit(net.m1, "kv", "put", {"a", "1"});
  ch().submit(net.m1, "kv", "put", {"b", "2"});
  auto text = ch().export_jsonl();
  auto pos = text.find("\"b\"");
  ASSERT_NE(pos, std::string::npos);
  text[pos + 1] = 'c';
  auto report = ledger::verify_jsonl(text, nullptr);
  EXPECT_FALSE(report.ok);
  EXPECT_EQ(report.first_bad_height, 2u);
  // Whitespace changes are caught too: every line must be canonical.
  auto spaced = ch().export_jsonl();
  spaced.insert(spaced.find("\n") + 2, " ");
  EXPECT_FALSE(ledger::verify_jsonl(spaced, nullptr).ok);
}

TEST_F(LedgerTest, RestoreRebuildsState) {
  ch().submit(net.m1, "kv", "put", {"a", "1"});
  ch().submit(net.m1, "kv", "stash", {"s"}, {{"secret", "x"}});
  auto restored = ledger::Channel::restore(ch().blocks(), ch().private_store());
  EXPECT_EQ(restored->state(), ch().state());
  EXPECT_EQ(restored->height(), ch().height());
  auto blocks = ch().blocks();
  blocks[1].txs[0].args[1] = "forged";
  EXPECT_EQ(code_of([&] { ledger::Channel::restore(blocks, {}); }), Errc::config);
}

TEST_F(LedgerTest, ConcurrentSubmitsSerialize) {
  std::vector<std::thread> threads;
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      const auto& who = t % 2 == 0 ? net.m1 : net.m2;
      for (int i = 0; i < 25; ++i) ch().submit(who, "kv", "put", {"t" + std::to_string(t), std::to_string(i)});
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(ch().height(), 100u);
  EXPECT_TRUE(ch().verify_chain());
  for (int t = 0; t < 4; ++t) EXPECT_EQ(ch().world_value("t" + std::to_string(t)), "24");
}

// org1 has full access, org2 may create and read the public half only.
class AccessMatrix : public ::testing::Test {
 protected:
  AccessMatrix() : net(505) {}

  crypto::WrappedKey some_key() {
    auto agreement = crypto::AgreementKeypair::generate(net.rng);
    return crypto::wrap_key(crypto::ContentKey::generate(net.rng), agreement.public_key(), net.rng);
  }

  test::GlassNet net;
};

TEST_F(AccessMatrix, CreateReadReadKey) {
  struct Row {
    const ledger::MemberIdentity* who;
    bool create, read, read_key;
  };
  const Row rows[] = {{&net.m1, true, true, true}, {&net.m2, true, true, false}, {&net.ma, false, false, false}};
  for (const auto& row : rows) {
    SCOPED_TRACE(row.who->org);
    auto wrapped = some_key();
    auto cid = cid_of_block(net.rng.bytes(16));
    auto uri = "ipfs://" + cid.text();
    if (row.create) {
      EXPECT_NO_THROW(registry::create_glass_resource(*net.channel, *row.who, cid, uri, wrapped));
    } else {
      EXPECT_EQ(code_of([&] { registry::create_glass_resource(*net.channel, *row.who, cid, uri, wrapped); }),
                Errc::access_denied);
      registry::create_glass_resource(*net.channel, net.m1, cid, uri, wrapped);
    }
    if (row.read) {
      auto [got_cid, got_uri] = registry::read_glass_resource(*net.channel, *row.who, cid);
      EXPECT_EQ(got_cid, cid);
      EXPECT_EQ(got_uri, uri);
    } else {
      EXPECT_EQ(code_of([&] { registry::read_glass_resource(*net.channel, *row.who, cid); }), Errc::access_denied);
    }
    const auto h = net.channel->height();
    if (row.read_key) {
      EXPECT_EQ(registry::read_glass_resource_key(*net.channel, *row.who, cid), wrapped);
    } else {
      std::string message;
      try {
        registry::read_glass_resource_key(*net.channel, *row.who, cid);
        ADD_FAILURE() << "key read allowed";
      } catch (const Error& e) {
        EXPECT_EQ(e.code(), Errc::access_denied);
        message = e.what();
      }
      // Nothing about the key leaks into the error or the audit record.
      const auto ct = crypto::b58(wrapped.ciphertext);
      EXPECT_EQ(message.find(ct), std::string::npos);
      auto block_text = canon::serialize(net.channel->block(h + 1).to_json());
      EXPECT_EQ(block_text.find(ct), std::string::npos);
      EXPECT_EQ(net.channel->block(h + 1).txs[0].status, ledger::TxStatus::rejected);
      EXPECT_TRUE(net.channel->block(h + 1).txs[0].writes.empty());
    }
  }
  EXPECT_TRUE(net.channel->verify_chain());
}

TEST_F(AccessMatrix, WrappedKeyNeverOnLedger) {
  auto wrapped = some_key();
  auto cid = cid_of_block(to_bytes("x"));
  registry::create_glass_resource(*net.channel, net.m1, cid, "ipfs://" + cid.text(), wrapped);
  registry::read_glass_resource_key(*net.channel, net.m1, cid);
  auto text = net.channel->export_jsonl();
  EXPECT_EQ(text.find(crypto::b58(wrapped.ciphertext)), std::string::npos);
  EXPECT_EQ(text.find(crypto::b58(wrapped.ephemeral_public)), std::string::npos);
}

TEST_F(AccessMatrix, DuplicateAndMissing) {
  auto wrapped = some_key();
  auto cid = cid_of_block(to_bytes("dup"));
  registry::create_glass_resource(*net.channel, net.m1, cid, "ipfs://" + cid.text(), wrapped);
  EXPECT_EQ(code_of([&] { registry::create_glass_resource(*net.channel, net.m2, cid, "ipfs://x", wrapped); }),
            Errc::already_exists);
  auto missing = cid_of_block(to_bytes("missing"));
  EXPECT_EQ(code_of([&] { registry::read_glass_resource(*net.channel, net.m1, missing); }), Errc::not_found);
  EXPECT_EQ(code_of([&] { registry::read_glass_resource_key(*net.channel, net.m2, missing); }), Errc::access_denied);
}

}  // namespace
}  // namespace glass
