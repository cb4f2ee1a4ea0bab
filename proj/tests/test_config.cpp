#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "convexnet/config.hpp"

using namespace convexnet;

namespace {

// Problems reported for `text`, or empty if it parses.
std::vector<std::string> problems_of(const std::string& text) {
  try {
    ConfigTable::parse(text);
  } catch (const ConfigError& e) {
    return e.problems();
  }
  return {};
}

}  // namespace

TEST(ConfigTable, SectionsTypesAndComments) {
  const auto t = ConfigTable::parse(
      "# header\n"
      "experiment = \"fit\"   # trailing\n"
      "net.directions = 12\n"
      "\n"
      "[optimizer]\n"
      "grad_tol = 1e-7\n"
      "verbose = true\n"
      "[stats]\n"
      "values = [0, 0.01, -2.5e-3]\n"
      "names = [\"a\", \"b#c\"]\n"
      "empty = []\n"
      "[text]\n"
      "s = \"quote \\\" back \\\\ nl \\n\"\n");
  EXPECT_EQ(t.find("experiment")->text, "fit");
  EXPECT_EQ(t.find("net.directions")->number, 12.0);
  EXPECT_EQ(t.find("net.directions")->line, 3);
  EXPECT_EQ(t.find("optimizer.grad_tol")->number, 1e-7);
  EXPECT_TRUE(t.find("optimizer.verbose")->boolean);
  const auto* v = t.find("stats.values");
  ASSERT_EQ(v->type, ConfigValue::Type::Array);
  ASSERT_EQ(v->items.size(), 3u);
  EXPECT_EQ(v->items[2].number, -2.5e-3);
  EXPECT_EQ(t.find("stats.names")->items[1].text, "b#c");
  EXPECT_TRUE(t.find("stats.empty")->items.empty());
  EXPECT_EQ(t.find("text.s")->text, "quote \" back \\ nl \n");
  EXPECT_EQ(t.find("missing"), nullptr);
  EXPECT_EQ(t.entries().size(), 8u);
}

TEST(ConfigTable, CollectsEveryProblemWithLineNumbers) {
  const auto p = problems_of(
      "a = 1\n"
      "b = bare\n"
      "c\n"
      "[bad section\n"
      "a = 2\n"
      "d = [1, [2]]\n"
      "e = \"open\n"
      "f = nan\n"
      "g = 1 2\n"
      "bad key = 3\n");
  ASSERT_EQ(p.size(), 9u);
  EXPECT_NE(p[0].find("line 2"), std::string::npos);
  EXPECT_NE(p[0].find("'b'"), std::string::npos);
  EXPECT_NE(p[1].find("line 3"), std::string::npos);
  EXPECT_NE(p[2].find("section"), std::string::npos);
  EXPECT_NE(p[3].find("duplicate key 'a'"), std::string::npos);
  EXPECT_NE(p[3].find("line 1"), std::string::npos);
  EXPECT_NE(p[4].find("nested"), std::string::npos);
  EXPECT_NE(p[5].find("unterminated"), std::string::npos);
  EXPECT_NE(p[6].find("non-finite"), std::string::npos);
  EXPECT_NE(p[7].find("after value"), std::string::npos);
  EXPECT_NE(p[8].find("malformed key"), std::string::npos);
}

TEST(ConfigTable, SectionAndDottedKeyCollide) {
  const auto p = problems_of("net.seed = 1\n[net]\nseed = 2\n");
  ASSERT_EQ(p.size(), 1u);
  EXPECT_NE(p[0].find("duplicate key 'net.seed'"), std::string::npos);
}

TEST(ConfigTable, MissingFile) {
  EXPECT_THROW(ConfigTable::load("/nonexistent/config.toml"), ConfigError);
}

TEST(FormatNumber, ShortestRoundTrip) {
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(300), "300");
  EXPECT_EQ(format_number(1e-7), "1e-07");
  for (double x : {1.0 / 3.0, std::numbers::pi, 6.02214076e23, -2.5e-300,
                   std::numeric_limits<double>::denorm_min()}) {
    const auto s = format_number(x);
    EXPECT_EQ(ConfigTable::parse("x = " + s).find("x")->number, x) << s;
  }
}

TEST(Quote, RoundTripsThroughParser) {
  const std::string s = "a \"b\" \\ c\nd";
  EXPECT_EQ(ConfigTable::parse("x = " + quote(s)).find("x")->text, s);
}
