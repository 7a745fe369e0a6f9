#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "glass/bytes.hpp"

namespace glass {

// Source of key material and nonces. Production code uses SystemRandom;
// tests and scenario runs pass a SeededRandom so every output is reproducible.
class RandomSource {
 public:
  virtual ~RandomSource() = default;
  virtual void fill(std::span<std::uint8_t> out) = 0;

  std::uint64_t next_u64();
  // Uniform in [0, bound). bound must be > 0.
  std::uint64_t uniform(std::uint64_t bound);

  template <std::size_t N>
  std::array<std::uint8_t, N> array() {
    std::array<std::uint8_t, N> out{};
    fill(out);
    return out;
  }
  Bytes bytes(std::size_t n);
};

class SystemRandom final : public RandomSource {
 public:
  void fill(std::span<std::uint8_t> out) override;
};

// SHA-256 in counter mode over (seed, label). Identical seeds and labels
// produce identical streams on every platform.
class SeededRandom final : public RandomSource {
 public:
  explicit SeededRandom(std::uint64_t seed, std::string_view label = {});
  explicit SeededRandom(ByteView seed_material);

  void fill(std::span<std::uint8_t> out) override;

  // Independent child stream; does not advance this generator.
  SeededRandom derive(std::string_view label) const;

 private:
  void refill();

  std::array<std::uint8_t, 32> state_{};
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = 32;
  std::uint64_t counter_ = 0;
};

}  // namespace glass
