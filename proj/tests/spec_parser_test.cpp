#include <gtest/gtest.h>

#include "anonet/spec_parser.hpp"

using namespace anonet;

namespace {

SpecParseError parse_error(const std::string& text) {
  try {
    parse_spec(text);
  } catch (const SpecParseError& e) {
    return e;
  }
  ADD_FAILURE() << "no error for: " << text;
  return SpecParseError(SpecParseError::Kind::kSyntax, 0, 0, "");
}

}  // namespace

TEST(Parse, Majority) {
  auto spec = parse_spec("alphabet 2;\noutput yes: 1 p1 <= 1/2;\noutput no: -1 p1 < -1/2;\n");
  EXPECT_EQ(spec.letters, 2u);
  ASSERT_EQ(spec.levels.size(), 2u);
  EXPECT_EQ(spec.levels[0].label, "yes");
  const auto& q = spec.levels[0].clauses[0][0];
  EXPECT_EQ(q.coeffs, (std::vector<Rational>{Rational(0), Rational(1)}));
  EXPECT_EQ(q.bound, Rational(1, 2));
  EXPECT_FALSE(q.strict);
  const auto& r = spec.levels[1].clauses[0][0];
  EXPECT_EQ(r.coeffs[1], Rational(-1));
  EXPECT_EQ(r.bound, Rational(-1, 2));
  EXPECT_TRUE(r.strict);
}

TEST(Parse, GreaterIsNegated) {
  auto spec = parse_spec("alphabet 3; output a: 2/3 p0 - p2 >= 1/4 & p1 > 0 | p0 + p0 <= 1;");
  const auto& c = spec.levels[0].clauses;
  ASSERT_EQ(c.size(), 2u);
  ASSERT_EQ(c[0].size(), 2u);
  EXPECT_EQ(c[0][0].coeffs, (std::vector<Rational>{Rational(-2, 3), Rational(0), Rational(1)}));
  EXPECT_EQ(c[0][0].bound, Rational(-1, 4));
  EXPECT_FALSE(c[0][0].strict);
  EXPECT_TRUE(c[0][1].strict);
  EXPECT_EQ(c[1][0].coeffs[0], Rational(2));  // repeated letters add up
}

TEST(Parse, CommentsAndSpacing) {
  auto spec = parse_spec("# header\nalphabet   2 ;\n output  x :\n  p 0<=1 ; # tail\n");
  EXPECT_EQ(spec.levels[0].clauses[0][0].coeffs[0], Rational(1));
}

TEST(Errors, IndexOutsideAlphabet) {
  auto e = parse_error("alphabet 2;\noutput a: p0 + p2 <= 1;");
  EXPECT_EQ(e.kind(), SpecParseError::Kind::kIndex);
  EXPECT_EQ(e.line(), 2u);
  EXPECT_EQ(e.column(), 16u);
}

TEST(Errors, ZeroDenominator) {
  auto e = parse_error("alphabet 2; output a: 1/0 p0 <= 1;");
  EXPECT_EQ(e.kind(), SpecParseError::Kind::kZeroDenominator);
  EXPECT_EQ(e.line(), 1u);
  EXPECT_EQ(e.column(), 25u);
}

TEST(Errors, OutOfClass) {
  for (const char* text : {"alphabet 2; output a: p0 * p1 <= 1;", "alphabet 2; output a: p0 p1 <= 1;",
                           "alphabet 2; output a: p0^2 <= 1;", "alphabet 2; output a: 0.5 p0 <= 1;",
                           "alphabet 2; output a: p0 <= pi;", "alphabet 2; output a: sqrt p0 <= 1;",
                           "alphabet 2; output a: p0 <= 1/e;", "alphabet 2; output a: (p0) <= 1;"}) {
    auto e = parse_error(text);
    EXPECT_EQ(e.kind(), SpecParseError::Kind::kOutOfClass) << text << ": " << e.what();
  }
}

TEST(Errors, Syntax) {
  EXPECT_EQ(parse_error("alphabet 2; output a p0 <= 1;").kind(), SpecParseError::Kind::kSyntax);
  EXPECT_EQ(parse_error("alphabet 2; output a: p0 = 1;").kind(), SpecParseError::Kind::kSyntax);
  EXPECT_EQ(parse_error("alphabet 2;").kind(), SpecParseError::Kind::kSyntax);
  EXPECT_EQ(parse_error("alphabet 0; output a: p0 <= 1;").kind(), SpecParseError::Kind::kSyntax);
  auto dup = parse_error("alphabet 2; output a: p0 <= 1;\noutput a: p1 <= 1;");
  EXPECT_EQ(dup.kind(), SpecParseError::Kind::kDuplicateLabel);
  EXPECT_EQ(dup.line(), 2u);
}

TEST(Errors, AreSpecErrors) {
  EXPECT_THROW(parse_spec("alphabet 1; output a: p3 <= 1;"), SpecError);
}
