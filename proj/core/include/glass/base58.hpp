#pragma once

#include <string>
#include <string_view>

#include "glass/bytes.hpp"

namespace glass::base58 {

// Bitcoin (base58btc) alphabet. Leading zero bytes map to leading '1's.
std::string encode(ByteView data);

// Throws Error(Errc::format) on any character outside the alphabet.
Bytes decode(std::string_view text);

}  // namespace glass::base58
