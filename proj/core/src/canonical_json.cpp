#include "glass/canonical_json.hpp"

#include "glass/error.hpp"

namespace glass::canon {
namespace {

template <typename J>
void reject_non_canonical(const J& value, std::string& path) {
  switch (value.type()) {
    case nlohmann::json::value_t::number_float:
      throw Error(Errc::canonicalization, "floating-point value at " + (path.empty() ? "/" : path));
    case nlohmann::json::value_t::binary:
      throw Error(Errc::canonicalization, "binary value at " + (path.empty() ? "/" : path));
    case nlohmann::json::value_t::discarded:
      throw Error(Errc::canonicalization, "discarded value");
    case nlohmann::json::value_t::object:
      for (auto it = value.begin(); it != value.end(); ++it) {
        const auto mark = path.size();
        path += "/" + it.key();
        reject_non_canonical(it.value(), path);
        path.resize(mark);
      }
      break;
    case nlohmann::json::value_t::array: {
      std::size_t i = 0;
      for (const auto& item : value) {
        const auto mark = path.size();
        path += "/" + std::to_string(i++);
        reject_non_canonical(item, path);
        path.resize(mark);
      }
      break;
    }
    default:
      break;
  }
}

}  // namespace

std::string serialize(const Json& value) {
  std::string path;
  reject_non_canonical(value, path);
  try {
    // Json's object_t is a std::map, so keys are already in byte order, which
    // for UTF-8 coincides with code point order.
    return value.dump(-1, ' ', false, Json::error_handler_t::strict);
  } catch (const Json::type_error& e) {
    throw Error(Errc::canonicalization, e.what());
  }
}

std::string serialize(const nlohmann::ordered_json& value) {
  std::string path;
  reject_non_canonical(value, path);
  return serialize(Json::parse(value.dump(-1, ' ', false, nlohmann::ordered_json::error_handler_t::strict)));
}

Bytes serialize_bytes(const Json& value) { return to_bytes(serialize(value)); }

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(Errc::format, e.what());
  }
}

bool is_canonical(std::string_view text) {
  try {
    return serialize(parse(text)) == text;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace glass::canon
