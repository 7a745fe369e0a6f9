#include <gtest/gtest.h>

#include <glass/canonical_json.hpp>
#include <glass/error.hpp>
#include <glass/random.hpp>

#include "support/support.hpp"

namespace glass {
namespace {

using canon::Json;

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return Errc::internal;
}

TEST(CanonicalJson, SortsKeys) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  doc["b"] = 1;
  doc["a"] = 2;
  EXPECT_EQ(canon::serialize(doc), R"({"a":2,"b":1})");
  EXPECT_EQ(canon::serialize(Json::parse(R"({"b":1,"a":2})")), R"({"a":2,"b":1})");
}

TEST(CanonicalJson, SortsByCodePoint) {
  Json doc = Json::parse(R"({"中":1,"z":2,"é":3,"€":4,"Z":5,"🔑":6})");
  EXPECT_EQ(canon::serialize(doc), R"({"Z":5,"z":2,"é":3,"€":4,"中":1,"🔑":6})");
}

TEST(CanonicalJson, CompactIntegersAndEscapes) {
  Json doc = {{"n", -0}, {"big", 18446744073709551615ull}, {"neg", -9223372036854775807ll - 1},
              {"s", "tab\tquote\"nl\n\x01"}, {"list", Json::array({true, false, nullptr})}};
  EXPECT_EQ(canon::serialize(doc),
            "{\"big\":18446744073709551615,\"list\":[true,false,null],\"n\":0,\"neg\":-9223372036854775808,"
            "\"s\":\"tab\\tquote\\\"nl\\n\\u0001\"}");
}

TEST(CanonicalJson, RejectsFloats) {
  EXPECT_EQ(code_of([] { canon::serialize(Json{{"x", 1.5}}); }), Errc::canonicalization);
  EXPECT_EQ(code_of([] { canon::serialize(Json::array({1, Json::array({2.0})})); }), Errc::canonicalization);
  EXPECT_EQ(code_of([] { canon::serialize(canon::parse("[1e3]")); }), Errc::canonicalization);
}

TEST(CanonicalJson, RejectsInvalidUtf8) {
  Json doc = std::string("\xff\xfe");
  EXPECT_EQ(code_of([&] { canon::serialize(doc); }), Errc::canonicalization);
}

TEST(CanonicalJson, ParseErrorsCarryPosition) {
  try {
    canon::parse("{\n  \"a\": ,\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::format);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
  }
}

TEST(CanonicalJson, IsCanonical) {
  EXPECT_TRUE(canon::is_canonical(R"({"a":[1,2],"b":"x"})"));
  EXPECT_FALSE(canon::is_canonical(R"({"b":"x","a":[1,2]})"));
  EXPECT_FALSE(canon::is_canonical(R"({"a": 1})"));
  EXPECT_FALSE(canon::is_canonical("not json"));
  EXPECT_FALSE(canon::is_canonical(R"({"a":1.0})"));
}

TEST(CanonicalJsonProperty, IdempotentAndOrderIndependent) {
  SeededRandom rng(20231, "canon-property");
  for (int trial = 0; trial < 300; ++trial) {
    auto doc = test::random_document(rng);
    const auto once = canon::serialize(doc);
    ASSERT_EQ(canon::serialize(canon::parse(once)), once) << "trial " << trial;
    ASSERT_TRUE(canon::is_canonical(once));
    for (int s = 0; s < 3; ++s) {
      ASSERT_EQ(canon::serialize(test::shuffled(doc, rng)), once) << "trial " << trial;
    }
  }
}

}  // namespace
}  // namespace glass
