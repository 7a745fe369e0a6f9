#include "glass/random.hpp"

#include <openssl/rand.h>

#include <algorithm>

#include "glass/crypto.hpp"
#include "glass/error.hpp"

namespace glass {

std::uint64_t RandomSource::next_u64() {
  auto raw = array<8>();
  std::uint64_t v = 0;
  for (auto b : raw) v = (v << 8) | b;
  return v;
}

std::uint64_t RandomSource::uniform(std::uint64_t bound) {
  // Rejection sampling keeps the result unbiased.
  const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
  std::uint64_t v = 0;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % bound;
}

Bytes RandomSource::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

void SystemRandom::fill(std::span<std::uint8_t> out) {
  if (out.empty()) return;
  if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
    throw Error(Errc::internal, "RAND_bytes failed");
  }
}

SeededRandom::SeededRandom(std::uint64_t seed, std::string_view label) {
  Bytes material(8);
  for (int i = 0; i < 8; ++i) material[i] = static_cast<std::uint8_t>(seed >> (56 - 8 * i));
  material.insert(material.end(), label.begin(), label.end());
  state_ = crypto::sha256(material).bytes;
}

SeededRandom::SeededRandom(ByteView seed_material)
    : state_(crypto::sha256(seed_material).bytes) {}

SeededRandom SeededRandom::derive(std::string_view label) const {
  Bytes material(state_.begin(), state_.end());
  material.push_back(0xff);
  material.insert(material.end(), label.begin(), label.end());
  return SeededRandom(ByteView(material));
}

void SeededRandom::refill() {
  Bytes input(state_.begin(), state_.end());
  for (int i = 0; i < 8; ++i) input.push_back(static_cast<std::uint8_t>(counter_ >> (56 - 8 * i)));
  ++counter_;
  block_ = crypto::sha256(input).bytes;
  used_ = 0;
}

void SeededRandom::fill(std::span<std::uint8_t> out) {
  std::size_t pos = 0;
  while (pos < out.size()) {
    if (used_ == block_.size()) refill();
    std::size_t n = std::min(out.size() - pos, block_.size() - used_);
    std::copy_n(block_.begin() + static_cast<std::ptrdiff_t>(used_), n,
                out.begin() + static_cast<std::ptrdiff_t>(pos));
    used_ += n;
    pos += n;
  }
}

}  // namespace glass
