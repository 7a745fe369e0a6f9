#include "glass/crypto.hpp"

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/kdf.h>

#include <algorithm>
#include <memory>

#include <nlohmann/json.hpp>

#include "glass/base58.hpp"
#include "glass/error.hpp"
#include "glass/random.hpp"

namespace glass::crypto {
namespace {

struct PkeyDeleter {
  void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct PkeyCtxDeleter {
  void operator()(EVP_PKEY_CTX* p) const { EVP_PKEY_CTX_free(p); }
};
struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* p) const { EVP_CIPHER_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using PkeyCtxPtr = std::unique_ptr<EVP_PKEY_CTX, PkeyCtxDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
using CipherCtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

[[noreturn]] void fail(const char* what) { throw Error(Errc::internal, what); }

PkeyPtr private_key(int type, const Key32& secret) {
  PkeyPtr key(EVP_PKEY_new_raw_private_key(type, nullptr, secret.data(), secret.size()));
  if (!key) fail("EVP_PKEY_new_raw_private_key");
  return key;
}

Key32 raw_public(EVP_PKEY* key) {
  Key32 out{};
  std::size_t len = out.size();
  if (EVP_PKEY_get_raw_public_key(key, out.data(), &len) != 1 || len != out.size()) {
    fail("EVP_PKEY_get_raw_public_key");
  }
  return out;
}

constexpr std::string_view kWrapInfo = "glass/key-wrap/v1";

struct WrapMaterial {
  Key32 key{};
  Nonce12 nonce{};
};

WrapMaterial derive_wrap_material(const Key32& shared, const Key32& ephemeral_public,
                                  const Key32& recipient_public) {
  Bytes salt = concat(ephemeral_public, recipient_public);
  Bytes okm = hkdf_sha256(shared, salt, as_bytes(kWrapInfo), 44);
  WrapMaterial m;
  std::copy_n(okm.begin(), 32, m.key.begin());
  std::copy_n(okm.begin() + 32, 12, m.nonce.begin());
  return m;
}

}  // namespace

std::string Digest32::b58() const { return base58::encode(bytes); }
std::string Digest32::hex() const { return to_hex(bytes); }
Digest32 Digest32::from_b58(std::string_view text) { return Digest32{fixed_from_b58<32>(text)}; }

std::string b58(ByteView bytes) { return base58::encode(bytes); }

template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_b58(std::string_view text) {
  Bytes raw = base58::decode(text);
  if (raw.size() != N) {
    throw Error(Errc::format, "expected " + std::to_string(N) + " bytes, got " + std::to_string(raw.size()));
  }
  std::array<std::uint8_t, N> out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

template std::array<std::uint8_t, 12> fixed_from_b58<12>(std::string_view);
template std::array<std::uint8_t, 16> fixed_from_b58<16>(std::string_view);
template std::array<std::uint8_t, 32> fixed_from_b58<32>(std::string_view);
template std::array<std::uint8_t, 64> fixed_from_b58<64>(std::string_view);

Digest32 sha256(ByteView data) {
  Digest32 out;
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) != 1) {
    fail("EVP_Digest");
  }
  return out;
}

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length) {
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_HKDF, nullptr));
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 ||
      EVP_PKEY_CTX_set_hkdf_md(ctx.get(), EVP_sha256()) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_salt(ctx.get(), salt.data(), static_cast<int>(salt.size())) != 1 ||
      EVP_PKEY_CTX_set1_hkdf_key(ctx.get(), ikm.data(), static_cast<int>(ikm.size())) != 1 ||
      EVP_PKEY_CTX_add1_hkdf_info(ctx.get(), info.data(), static_cast<int>(info.size())) != 1) {
    fail("HKDF setup");
  }
  Bytes out(length);
  std::size_t out_len = length;
  if (EVP_PKEY_derive(ctx.get(), out.data(), &out_len) != 1 || out_len != length) fail("HKDF derive");
  return out;
}

SigningKeypair SigningKeypair::from_seed(const Key32& seed) {
  SigningKeypair kp;
  kp.secret_ = seed;
  kp.public_ = raw_public(private_key(EVP_PKEY_ED25519, seed).get());
  return kp;
}

SigningKeypair SigningKeypair::generate(RandomSource& rng) { return from_seed(rng.array<32>()); }

Signature SigningKeypair::sign(ByteView message) const {
  auto key = private_key(EVP_PKEY_ED25519, secret_);
  MdCtxPtr ctx(EVP_MD_CTX_new());
  Signature sig{};
  std::size_t len = sig.size();
  if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1 ||
      EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1 ||
      len != sig.size()) {
    fail("Ed25519 sign");
  }
  return sig;
}

bool verify(const Key32& public_key, ByteView message, ByteView signature) {
  if (signature.size() != 64) return false;
  PkeyPtr key(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, public_key.data(), public_key.size()));
  if (!key) return false;
  MdCtxPtr ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, key.get()) != 1) return false;
  return EVP_DigestVerify(ctx.get(), signature.data(), signature.size(), message.data(), message.size()) == 1;
}

AgreementKeypair AgreementKeypair::from_secret(const Key32& secret) {
  AgreementKeypair kp;
  kp.secret_ = secret;
  kp.public_ = raw_public(private_key(EVP_PKEY_X25519, secret).get());
  return kp;
}

AgreementKeypair AgreementKeypair::generate(RandomSource& rng) { return from_secret(rng.array<32>()); }

Key32 diffie_hellman(const Key32& secret, const Key32& peer_public) {
  auto own = private_key(EVP_PKEY_X25519, secret);
  PkeyPtr peer(EVP_PKEY_new_raw_public_key(EVP_PKEY_X25519, nullptr, peer_public.data(), peer_public.size()));
  if (!peer) throw Error(Errc::format, "invalid X25519 public key");
  PkeyCtxPtr ctx(EVP_PKEY_CTX_new(own.get(), nullptr));
  Key32 shared{};
  std::size_t len = shared.size();
  if (!ctx || EVP_PKEY_derive_init(ctx.get()) != 1 || EVP_PKEY_derive_set_peer(ctx.get(), peer.get()) != 1 ||
      EVP_PKEY_derive(ctx.get(), shared.data(), &len) != 1 || len != shared.size()) {
    throw Error(Errc::format, "X25519 agreement failed");
  }
  if (std::all_of(shared.begin(), shared.end(), [](auto b) { return b == 0; })) {
    throw Error(Errc::format, "low-order X25519 public key");
  }
  return shared;
}

ContentKey ContentKey::generate(RandomSource& rng) {
  ContentKey ck;
  rng.fill(ck.key);
  rng.fill(ck.nonce);
  return ck;
}

Bytes aead_seal(const Key32& key, const Nonce12& nonce, ByteView aad, ByteView plaintext) {
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) != 1 ||
      EVP_EncryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
    fail("AES-GCM init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_EncryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    fail("AES-GCM aad");
  }
  Bytes out(plaintext.size() + 16);
  int written = 0;
  if (!plaintext.empty()) {
    if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(), static_cast<int>(plaintext.size())) != 1) {
      fail("AES-GCM update");
    }
    written = len;
  }
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) fail("AES-GCM final");
  written += len;
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, 16, out.data() + written) != 1) fail("AES-GCM tag");
  return out;
}

Bytes aead_open(const Key32& key, const Nonce12& nonce, ByteView aad, ByteView sealed) {
  if (sealed.size() < 16) throw Error(Errc::format, "sealed input shorter than tag");
  const std::size_t body = sealed.size() - 16;
  CipherCtxPtr ctx(EVP_CIPHER_CTX_new());
  if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, nullptr, nullptr) != 1 ||
      EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_IVLEN, static_cast<int>(nonce.size()), nullptr) != 1 ||
      EVP_DecryptInit_ex(ctx.get(), nullptr, nullptr, key.data(), nonce.data()) != 1) {
    fail("AES-GCM init");
  }
  int len = 0;
  if (!aad.empty() &&
      EVP_DecryptUpdate(ctx.get(), nullptr, &len, aad.data(), static_cast<int>(aad.size())) != 1) {
    fail("AES-GCM aad");
  }
  Bytes out(body);
  int written = 0;
  if (body > 0) {
    if (EVP_DecryptUpdate(ctx.get(), out.data(), &len, sealed.data(), static_cast<int>(body)) != 1) {
      fail("AES-GCM update");
    }
    written = len;
  }
  Tag16 tag{};
  std::copy_n(sealed.begin() + static_cast<std::ptrdiff_t>(body), 16, tag.begin());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, 16, tag.data()) != 1) fail("AES-GCM set tag");
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + written, &len) != 1) {
    std::fill(out.begin(), out.end(), 0);
    throw Error(Errc::authentication_failed, "aes-256-gcm");
  }
  return out;
}

Bytes encrypt_content(ByteView plaintext, const ContentKey& ck) { return aead_seal(ck.key, ck.nonce, {}, plaintext); }

Bytes decrypt_content(ByteView sealed, const ContentKey& ck) { return aead_open(ck.key, ck.nonce, {}, sealed); }

WrappedKey wrap_key(const ContentKey& ck, const Key32& recipient_public, RandomSource& rng) {
  auto ephemeral = AgreementKeypair::generate(rng);
  Key32 shared = diffie_hellman(ephemeral.secret(), recipient_public);
  auto material = derive_wrap_material(shared, ephemeral.public_key(), recipient_public);

  WrappedKey w;
  w.ephemeral_public = ephemeral.public_key();
  w.recipient_hint = sha256(recipient_public);
  Bytes payload = concat(ck.key, ck.nonce);
  Bytes sealed = aead_seal(material.key, material.nonce, w.recipient_hint.bytes, payload);
  std::fill(payload.begin(), payload.end(), 0);
  w.ciphertext.assign(sealed.begin(), sealed.end() - 16);
  std::copy(sealed.end() - 16, sealed.end(), w.tag.begin());
  return w;
}

ContentKey unwrap_key(const WrappedKey& wrapped, const Key32& recipient_secret) {
  auto self = AgreementKeypair::from_secret(recipient_secret);
  if (sha256(self.public_key()) != wrapped.recipient_hint) {
    throw Error(Errc::authentication_failed, "not the addressee");
  }
  Key32 shared{};
  try {
    shared = diffie_hellman(recipient_secret, wrapped.ephemeral_public);
  } catch (const Error&) {
    throw Error(Errc::authentication_failed, "invalid ephemeral key");
  }
  auto material = derive_wrap_material(shared, wrapped.ephemeral_public, self.public_key());
  Bytes sealed = wrapped.ciphertext;
  sealed.insert(sealed.end(), wrapped.tag.begin(), wrapped.tag.end());
  Bytes payload = aead_open(material.key, material.nonce, wrapped.recipient_hint.bytes, sealed);
  if (payload.size() != 44) throw Error(Errc::format, "wrapped payload has wrong length");
  ContentKey ck;
  std::copy_n(payload.begin(), 32, ck.key.begin());
  std::copy_n(payload.begin() + 32, 12, ck.nonce.begin());
  std::fill(payload.begin(), payload.end(), 0);
  return ck;
}

void to_json(nlohmann::json& j, const Digest32& d) { j = d.b58(); }

void from_json(const nlohmann::json& j, Digest32& d) {
  if (!j.is_string()) throw Error(Errc::format, "digest must be a base58 string");
  d = Digest32::from_b58(j.get<std::string>());
}

void to_json(nlohmann::json& j, const WrappedKey& w) {
  j = nlohmann::json{{"ephemeral_public", b58(w.ephemeral_public)},
                     {"ciphertext", b58(w.ciphertext)},
                     {"tag", b58(w.tag)},
                     {"recipient_hint", w.recipient_hint.b58()}};
}

void from_json(const nlohmann::json& j, WrappedKey& w) {
  try {
    w.ephemeral_public = fixed_from_b58<32>(j.at("ephemeral_public").get<std::string>());
    w.ciphertext = base58::decode(j.at("ciphertext").get<std::string>());
    w.tag = fixed_from_b58<16>(j.at("tag").get<std::string>());
    w.recipient_hint = Digest32::from_b58(j.at("recipient_hint").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("wrapped key: ") + e.what());
  }
}

nlohmann::json key_record(const SigningKeypair& keys) {
  return {{"kind", "signing"}, {"public_b58", b58(keys.public_key())}, {"secret_b58", b58(keys.secret())}};
}

nlohmann::json key_record(const AgreementKeypair& keys) {
  return {{"kind", "agreement"}, {"public_b58", b58(keys.public_key())}, {"secret_b58", b58(keys.secret())}};
}

namespace {

Key32 checked_secret(const nlohmann::json& j, std::string_view kind) {
  try {
    if (j.at("kind").get<std::string>() != kind) {
      throw Error(Errc::format, "key record kind is not " + std::string(kind));
    }
    return fixed_from_b58<32>(j.at("secret_b58").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::format, std::string("key record: ") + e.what());
  }
}

void check_public(const nlohmann::json& j, const Key32& derived) {
  if (j.contains("public_b58") && j.at("public_b58") != b58(derived)) {
    throw Error(Errc::format, "key record public key does not match secret");
  }
}

}  // namespace

SigningKeypair signing_from_record(const nlohmann::json& j) {
  auto kp = SigningKeypair::from_seed(checked_secret(j, "signing"));
  check_public(j, kp.public_key());
  return kp;
}

AgreementKeypair agreement_from_record(const nlohmann::json& j) {
  auto kp = AgreementKeypair::from_secret(checked_secret(j, "agreement"));
  check_public(j, kp.public_key());
  return kp;
}

}  // namespace glass::crypto
