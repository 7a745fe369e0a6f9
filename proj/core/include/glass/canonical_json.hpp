#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "glass/bytes.hpp"

namespace glass::canon {

using Json = nlohmann::json;

// UTF-8 JSON, object keys sorted by code point, no insignificant whitespace,
// integers in shortest decimal form. Floating-point numbers, binary values and
// invalid UTF-8 raise Error(Errc::canonicalization).
std::string serialize(const Json& value);
std::string serialize(const nlohmann::ordered_json& value);
Bytes serialize_bytes(const Json& value);

// Parses any JSON text. Error(Errc::format) carries line/column on failure.
Json parse(std::string_view text);

// True iff text parses and re-serializes to exactly the same bytes.
bool is_canonical(std::string_view text);

}  // namespace glass::canon
