#include <gtest/gtest.h>

#include <glass/bytes.hpp>
#include <glass/crypto.hpp>
#include <glass/error.hpp>
#include <glass/random.hpp>

#include <nlohmann/json.hpp>

namespace glass {
namespace {

using crypto::Key32;

template <std::size_t N>
std::array<std::uint8_t, N> fixed(std::string_view hex) {
  auto b = from_hex(hex);
  std::array<std::uint8_t, N> out{};
  std::copy(b.begin(), b.end(), out.begin());
  return out;
}

// Replays a fixed byte string, then fails loudly.
class ScriptedRandom final : public RandomSource {
 public:
  explicit ScriptedRandom(Bytes bytes) : bytes_(std::move(bytes)) {}
  void fill(std::span<std::uint8_t> out) override {
    if (pos_ + out.size() > bytes_.size()) throw std::logic_error("scripted random exhausted");
    std::copy_n(bytes_.begin() + static_cast<std::ptrdiff_t>(pos_), out.size(), out.begin());
    pos_ += out.size();
  }

 private:
  Bytes bytes_;
  std::size_t pos_ = 0;
};

TEST(Sha256, FipsVectors) {
  EXPECT_EQ(crypto::sha256(std::string_view("")).hex(),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  EXPECT_EQ(crypto::sha256(std::string_view("abc")).hex(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(crypto::sha256(std::string_view("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq")).hex(),
            "248d6a61d20638b8e5c026930c3e6039a33ce45964ff2167f6ecedd419db06c1");
}

TEST(Sha256, MillionA) {
  std::string a(1000000, 'a');
  EXPECT_EQ(crypto::sha256(std::string_view(a)).hex(),
            "cdc76e5c9914fb9281a1c7e284d73e67f1809a48a497200e046d39ccc7112cd0");
}

TEST(Hkdf, Rfc5869Case1) {
  Bytes ikm(22, 0x0b);
  auto salt = from_hex("000102030405060708090a0b0c");
  auto info = from_hex("f0f1f2f3f4f5f6f7f8f9");
  EXPECT_EQ(to_hex(crypto::hkdf_sha256(ikm, salt, info, 42)),
            "3cb25f25faacd57a90434f64d0362f2a2d2d0a90cf1a5a4c5db02d56ecc4c5bf34007208d5b887185865");
}

TEST(AesGcm, NistZeroKeyVectors) {
  Key32 key{};
  crypto::Nonce12 iv{};
  EXPECT_EQ(to_hex(crypto::aead_seal(key, iv, {}, {})), "530f8afbc74536b9a963b4f1c4cb738b");
  Bytes p(16, 0);
  EXPECT_EQ(to_hex(crypto::aead_seal(key, iv, {}, p)),
            "cea7403d4d606b6e074ec5d3baf39d18d0d1c8a799996bf0265b98b5d48ab919");
}

TEST(AesGcm, NistCase15And16) {
  auto key = fixed<32>("feffe9928665731c6d6a8f9467308308feffe9928665731c6d6a8f9467308308");
  auto iv = fixed<12>("cafebabefacedbaddecaf888");
  auto p = from_hex(
      "d9313225f88406e5a55909c5aff5269a86a7a9531534f7da2e4c303d8a318a721c3c0c95956809532fcf0e2449a6b525b16aedf5aa0de65"
      "7ba637b391aafd255");
  EXPECT_EQ(to_hex(crypto::aead_seal(key, iv, {}, p)),
            "522dc1f099567d07f47f37a32a84427d643a8cdcbfe5c0c97598a2bd2555d1aa8cb08e48590dbb3da7b08b1056828838c5f61e6393b"
            "a7a0abcc9f662898015ad"
            "b094dac5d93471bdec1a502270e3cc6c");
  auto aad = from_hex("feedfacedeadbeeffeedfacedeadbeefabaddad2");
  Bytes p60(p.begin(), p.begin() + 60);
  auto sealed = crypto::aead_seal(key, iv, aad, p60);
  EXPECT_EQ(to_hex(ByteView(sealed).last(16)), "76fc6ece0f4e1768cddf8853bb2d551b");
  EXPECT_EQ(crypto::aead_open(key, iv, aad, sealed), p60);
}

TEST(AesGcm, OpenRejectsAnyFlippedBit) {
  SeededRandom rng(7, "gcm");
  auto key = rng.array<32>();
  auto iv = rng.array<12>();
  auto msg = rng.bytes(48);
  auto sealed = crypto::aead_seal(key, iv, as_bytes("aad"), msg);
  for (std::size_t bit = 0; bit < sealed.size() * 8; bit += 7) {
    auto bad = sealed;
    bad[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    try {
      crypto::aead_open(key, iv, as_bytes("aad"), bad);
      FAIL() << "bit " << bit << " accepted";
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::authentication_failed);
    }
  }
  EXPECT_THROW(crypto::aead_open(key, iv, as_bytes("aab"), sealed), Error);
  try {
    crypto::aead_open(key, iv, {}, Bytes(5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::format);
  }
}

struct Rfc8032Case {
  const char* secret;
  const char* public_key;
  const char* message;
  const char* signature;
};

TEST(Ed25519, Rfc8032Vectors) {
  const Rfc8032Case cases[] = {
      {"9d61b19deffd5a60ba844af492ec2cc44449c5697b326919703bac031cae7f60",
       "d75a980182b10ab7d54bfed3c964073a0ee172f3daa62325af021a68f707511a", "",
       "e5564300c360ac729086e2cc806e828a84877f1eb8e5d974d873e065224901555fb8821590a33bacc61e39701cf9b46bd25bf5f0595bbe"
       "24655141438e7a100b"},
      {"4ccd089b28ff96da9db6c346ec114e0f5b8a319f35aba624da8cf6ed4fb8a6fb",
       "3d4017c3e843895a92b70aa74d1b7ebc9c982ccf2ec4968cc0cd55f12af4660c", "72",
       "92a009a9f0d4cab8720e820b5f642540a2b27b5416503f8fb3762223ebdb69da085ac1e43e15996e458f3613d0f11d8c387b2eaeb4302a"
       "eeb00d291612bb0c00"},
      {"c5aa8df43f9f837bedb7442f31dcb7b166d38535076f094b85ce3a2e0b4458f7",
       "fc51cd8e6218a1a38da47ed00230f0580816ed13ba3303ac5deb911548908025", "af82",
       "6291d657deec24024827e69c3abe01a30ce548a284743a445e3680d7db5ac3ac18ff9b538d16f290ae67f760984dc6594a7c15e9716ed2"
       "8dc027beceea1ec40a"},
  };
  for (const auto& c : cases) {
    auto kp = crypto::SigningKeypair::from_seed(fixed<32>(c.secret));
    EXPECT_EQ(to_hex(kp.public_key()), c.public_key);
    auto msg = from_hex(c.message);
    auto sig = kp.sign(msg);
    EXPECT_EQ(to_hex(sig), c.signature);
    EXPECT_TRUE(crypto::verify(kp.public_key(), msg, sig));
    sig[10] ^= 0x01;
    EXPECT_FALSE(crypto::verify(kp.public_key(), msg, sig));
  }
}

TEST(Ed25519, VerifyRejectsMalformedInput) {
  SeededRandom rng(1);
  auto kp = crypto::SigningKeypair::generate(rng);
  auto sig = kp.sign(as_bytes("m"));
  EXPECT_FALSE(crypto::verify(kp.public_key(), as_bytes("m"), ByteView(sig).first(63)));
  EXPECT_FALSE(crypto::verify(kp.public_key(), as_bytes("n"), sig));
}

TEST(X25519, Rfc7748Vector) {
  auto alice = crypto::AgreementKeypair::from_secret(
      fixed<32>("77076d0a7318a57d3c16c17251b26645df4c2f87ebc0992ab177fba51db92c2a"));
  auto bob = crypto::AgreementKeypair::from_secret(
      fixed<32>("5dab087e624a8a4b79e17f8b83800ee66f3bb1292618b6fd1c2f8b27ff88e0eb"));
  EXPECT_EQ(to_hex(alice.public_key()), "8520f0098930a754748b7ddcb43ef75a0dbf3a0d26381af4eba4a98eaa9b4e6a");
  EXPECT_EQ(to_hex(bob.public_key()), "de9edb7d7b7dc1b4d35b61c2ece435373f8343c85b78674dadfc7e146f882b4f");
  const auto expected = "4a5d9d5ba4ce2de1728e3bf480350f25e07e21c947d19e3376f09b3c1e161742";
  EXPECT_EQ(to_hex(crypto::diffie_hellman(alice.secret(), bob.public_key())), expected);
  EXPECT_EQ(to_hex(crypto::diffie_hellman(bob.secret(), alice.public_key())), expected);
}

TEST(X25519, LowOrderPointRejected) {
  SeededRandom rng(3);
  auto kp = crypto::AgreementKeypair::generate(rng);
  Key32 zero{};
  EXPECT_THROW(crypto::diffie_hellman(kp.secret(), zero), Error);
}

TEST(SeededRandom, StreamMatchesReference) {
  SeededRandom rng(42, "oracle");
  EXPECT_EQ(to_hex(rng.bytes(40)), "ed0d2313d7b33004a16e0080d56a162f830c9ec1aa2f2923863fc431fdffe4cc70507a550be3c58f");
}

TEST(SeededRandom, DeriveIsIndependentAndStable) {
  SeededRandom a(9);
  auto child1 = a.derive("x").bytes(16);
  a.bytes(100);
  auto child2 = a.derive("x").bytes(16);
  EXPECT_EQ(child1, child2);
  EXPECT_NE(SeededRandom(9).derive("y").bytes(16), child1);
}

TEST(SeededRandom, UniformStaysInRange) {
  SeededRandom rng(5);
  std::array<int, 7> hist{};
  for (int i = 0; i < 7000; ++i) hist[rng.uniform(7)]++;
  for (int h : hist) EXPECT_GT(h, 800);
}

TEST(KeyWrap, MatchesReferenceConstruction) {
  Bytes script;
  for (int i = 1; i <= 32; ++i) script.push_back(static_cast<std::uint8_t>(i));
  ScriptedRandom eph(script);
  Key32 rec_secret{};
  for (int i = 0; i < 32; ++i) rec_secret[i] = static_cast<std::uint8_t>(33 + i);
  auto recipient = crypto::AgreementKeypair::from_secret(rec_secret);
  crypto::ContentKey ck;
  ck.key.fill(0xaa);
  ck.nonce.fill(0xbb);

  auto w = crypto::wrap_key(ck, recipient.public_key(), eph);
  EXPECT_EQ(to_hex(w.ephemeral_public), "07a37cbc142093c8b755dc1b10e86cb426374ad16aa853ed0bdfc0b2b86d1c7c");
  EXPECT_EQ(to_hex(recipient.public_key()), "5869aff450549732cbaaed5e5df9b30a6da31cb0e5742bad5ad4a1a768f1a67b");
  EXPECT_EQ(to_hex(w.ciphertext),
            "ab92e61efd8d919faa23ccb4c5479add01c0641d42cb7b1f719b1b9456c9472be08a28b96da8e1702af707c2");
  EXPECT_EQ(to_hex(w.tag), "8d374e61f1eff812221f16d89f2c9766");
  EXPECT_EQ(w.recipient_hint, crypto::sha256(recipient.public_key()));
  EXPECT_EQ(crypto::unwrap_key(w, rec_secret), ck);
}

TEST(KeyWrap, OnlyTheAddresseeUnwraps) {
  SeededRandom rng(11);
  auto alice = crypto::AgreementKeypair::generate(rng);
  auto mallory = crypto::AgreementKeypair::generate(rng);
  auto ck = crypto::ContentKey::generate(rng);
  auto w = crypto::wrap_key(ck, alice.public_key(), rng);
  EXPECT_EQ(crypto::unwrap_key(w, alice.secret()), ck);
  try {
    crypto::unwrap_key(w, mallory.secret());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::authentication_failed);
  }
  // A forged hint gets past the addressee check but not the tag.
  auto forged = w;
  forged.recipient_hint = crypto::sha256(mallory.public_key());
  EXPECT_THROW(crypto::unwrap_key(forged, mallory.secret()), Error);
  auto flipped = w;
  flipped.ciphertext[0] ^= 1;
  EXPECT_THROW(crypto::unwrap_key(flipped, alice.secret()), Error);
}

TEST(KeyWrap, JsonRoundTrip) {
  SeededRandom rng(12);
  auto alice = crypto::AgreementKeypair::generate(rng);
  auto w = crypto::wrap_key(crypto::ContentKey::generate(rng), alice.public_key(), rng);
  nlohmann::json j = w;
  EXPECT_EQ(j.get<crypto::WrappedKey>(), w);
}

TEST(ContentEncryption, RoundTripAndWrongKey) {
  SeededRandom rng(13);
  auto ck = crypto::ContentKey::generate(rng);
  auto msg = rng.bytes(1000);
  auto sealed = crypto::encrypt_content(msg, ck);
  EXPECT_EQ(sealed.size(), msg.size() + 16);
  EXPECT_EQ(crypto::decrypt_content(sealed, ck), msg);
  auto other = crypto::ContentKey::generate(rng);
  EXPECT_THROW(crypto::decrypt_content(sealed, other), Error);
}

TEST(KeyRecords, RoundTrip) {
  SeededRandom rng(14);
  auto s = crypto::SigningKeypair::generate(rng);
  auto a = crypto::AgreementKeypair::generate(rng);
  EXPECT_EQ(crypto::signing_from_record(crypto::key_record(s)), s);
  EXPECT_EQ(crypto::agreement_from_record(crypto::key_record(a)), a);
  EXPECT_THROW(crypto::signing_from_record(crypto::key_record(a)), Error);
}

}  // namespace
}  // namespace glass
