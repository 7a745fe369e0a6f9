#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

#include <nlohmann/json_fwd.hpp>

#include "glass/bytes.hpp"

namespace glass {
class RandomSource;
}

namespace glass::crypto {

using Key32 = std::array<std::uint8_t, 32>;
using Nonce12 = std::array<std::uint8_t, 12>;
using Tag16 = std::array<std::uint8_t, 16>;
using Signature = std::array<std::uint8_t, 64>;

struct Digest32 {
  std::array<std::uint8_t, 32> bytes{};

  std::string b58() const;
  std::string hex() const;
  static Digest32 from_b58(std::string_view text);

  auto operator<=>(const Digest32&) const = default;
};

Digest32 sha256(ByteView data);
inline Digest32 sha256(std::string_view text) { return sha256(as_bytes(text)); }

Bytes hkdf_sha256(ByteView ikm, ByteView salt, ByteView info, std::size_t length);

// Ed25519. The public key is derived from the 32-byte seed.
class SigningKeypair {
 public:
  static SigningKeypair from_seed(const Key32& seed);
  static SigningKeypair generate(RandomSource& rng);

  const Key32& secret() const noexcept { return secret_; }
  const Key32& public_key() const noexcept { return public_; }

  Signature sign(ByteView message) const;

  bool operator==(const SigningKeypair& other) const noexcept { return secret_ == other.secret_; }

 private:
  Key32 secret_{};
  Key32 public_{};
};

// Returns false for any malformed key/signature as well as a plain mismatch.
bool verify(const Key32& public_key, ByteView message, ByteView signature);

// X25519.
class AgreementKeypair {
 public:
  static AgreementKeypair from_secret(const Key32& secret);
  static AgreementKeypair generate(RandomSource& rng);

  const Key32& secret() const noexcept { return secret_; }
  const Key32& public_key() const noexcept { return public_; }

  bool operator==(const AgreementKeypair& other) const noexcept { return secret_ == other.secret_; }

 private:
  Key32 secret_{};
  Key32 public_{};
};

// Throws Error(Errc::format) for low-order peer points (all-zero output).
Key32 diffie_hellman(const Key32& secret, const Key32& peer_public);

struct ContentKey {
  Key32 key{};
  Nonce12 nonce{};

  static ContentKey generate(RandomSource& rng);
  bool operator==(const ContentKey&) const = default;
};

// AES-256-GCM. Output is ciphertext || 16-byte tag.
Bytes aead_seal(const Key32& key, const Nonce12& nonce, ByteView aad, ByteView plaintext);
// Throws Error(Errc::authentication_failed) on tag mismatch and
// Error(Errc::format) when the input is shorter than a tag. Never returns
// partial plaintext.
Bytes aead_open(const Key32& key, const Nonce12& nonce, ByteView aad, ByteView sealed);

Bytes encrypt_content(ByteView plaintext, const ContentKey& ck);
Bytes decrypt_content(ByteView sealed, const ContentKey& ck);

struct WrappedKey {
  Key32 ephemeral_public{};
  Bytes ciphertext;
  Tag16 tag{};
  Digest32 recipient_hint;

  bool operator==(const WrappedKey&) const = default;
};

// ECIES-style: fresh ephemeral X25519 key, HKDF-SHA256 to a wrapping key and
// nonce, AES-256-GCM over key || nonce.
WrappedKey wrap_key(const ContentKey& ck, const Key32& recipient_public, RandomSource& rng);
// Throws Error(Errc::authentication_failed) when recipient_secret is not the
// addressee.
ContentKey unwrap_key(const WrappedKey& wrapped, const Key32& recipient_secret);

void to_json(nlohmann::json& j, const Digest32& d);
void from_json(const nlohmann::json& j, Digest32& d);
void to_json(nlohmann::json& j, const WrappedKey& w);
void from_json(const nlohmann::json& j, WrappedKey& w);

// Key material records: {"kind", "public_b58", "secret_b58"}.
nlohmann::json key_record(const SigningKeypair& keys);
nlohmann::json key_record(const AgreementKeypair& keys);
SigningKeypair signing_from_record(const nlohmann::json& j);
AgreementKeypair agreement_from_record(const nlohmann::json& j);

// Decodes base58 into exactly N bytes; Error(Errc::format) otherwise.
template <std::size_t N>
std::array<std::uint8_t, N> fixed_from_b58(std::string_view text);

std::string b58(ByteView bytes);

}  // namespace glass::crypto
