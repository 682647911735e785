#pragma once

#include <cctype>
#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "anonet/compiler.hpp"

namespace anonet {

/// Parse failure with a 1-based location. `kind` separates plain syntax
/// errors from inputs that name a function outside the rational class.
class SpecParseError : public SpecError {
 public:
  enum class Kind { kSyntax, kIndex, kZeroDenominator, kOutOfClass, kDuplicateLabel };

  SpecParseError(Kind kind, std::size_t line, std::size_t column, const std::string& what)
      : SpecError(std::to_string(line) + ":" + std::to_string(column) + ": " + what),
        kind_(kind), line_(line), column_(column) {}

  Kind kind() const { return kind_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  Kind kind_;
  std::size_t line_, column_;
};

namespace detail {

struct Token {
  enum class Type { kInt, kWord, kSymbol, kForeign, kEnd };
  Type type;
  std::string text;
  std::size_t line, column;
};

inline std::vector<Token> lex_spec(std::string_view src) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1, i = 0;
  auto advance = [&](std::size_t count) {
    for (std::size_t k = 0; k < count; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < src.size()) {
    const char c = src[i];
    if (c == '#') {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    const std::size_t l = line, cl = col, start = i;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      std::size_t j = i;
      while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      if (j < src.size() && src[j] == '.' && j + 1 < src.size() && std::isdigit(static_cast<unsigned char>(src[j + 1]))) {
        while (++j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) {}
        out.push_back({Token::Type::kForeign, std::string(src.substr(start, j - start)), l, cl});
      } else {
        out.push_back({Token::Type::kInt, std::string(src.substr(start, j - start)), l, cl});
      }
      advance(j - i);
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
      out.push_back({Token::Type::kWord, std::string(src.substr(start, j - start)), l, cl});
      advance(j - i);
      continue;
    }
    if ((c == '<' || c == '>') && i + 1 < src.size() && src[i + 1] == '=') {
      out.push_back({Token::Type::kSymbol, std::string(src.substr(i, 2)), l, cl});
      advance(2);
      continue;
    }
    if (std::string_view(";:|&+-/<>").find(c) != std::string_view::npos) {
      out.push_back({Token::Type::kSymbol, std::string(1, c), l, cl});
    } else {
      out.push_back({Token::Type::kForeign, std::string(1, c), l, cl});
    }
    advance(1);
  }
  out.push_back({Token::Type::kEnd, "", line, col});
  return out;
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view src) : toks_(lex_spec(src)) {}

  FrequencyFunctionSpec parse() {
    FrequencyFunctionSpec spec;
    expect_word("alphabet");
    const auto& at = peek();
    const auto letters = integer();
    if (letters < 1) fail(SpecParseError::Kind::kSyntax, at, "alphabet needs at least one letter");
    spec.letters = static_cast<std::size_t>(letters);
    expect_symbol(";");
    letters_ = spec.letters;
    do spec.levels.push_back(level(spec));
    while (peek().type != Token::Type::kEnd);
    return spec;
  }

 private:
  Level level(const FrequencyFunctionSpec& spec) {
    expect_word("output");
    const auto& name = peek();
    if (name.type != Token::Type::kWord) fail(SpecParseError::Kind::kSyntax, name, "expected a label");
    for (const auto& l : spec.levels)
      if (l.label == name.text) fail(SpecParseError::Kind::kDuplicateLabel, name, "label `" + name.text + "` already defined");
    Level lv{name.text, {}};
    ++pos_;
    expect_symbol(":");
    lv.clauses.push_back(clause());
    while (accept_symbol("|")) lv.clauses.push_back(clause());
    expect_symbol(";");
    return lv;
  }

  Clause clause() {
    Clause c{inequality()};
    while (accept_symbol("&")) c.push_back(inequality());
    return c;
  }

  LinearInequality inequality() {
    LinearInequality q{std::vector<Rational>(letters_, 0), 0, false};
    bool negative = accept_symbol("-");
    if (!negative) accept_symbol("+");
    while (true) {
      Rational coeff = 1;
      if (peek().type == Token::Type::kInt) coeff = rational();
      reject_foreign();
      const auto& var = peek();
      const auto k = variable();
      if (peek().type == Token::Type::kWord && is_variable(peek().text))
        fail(SpecParseError::Kind::kOutOfClass, peek(), "product of frequencies is not a linear inequality");
      reject_foreign();
      if (k >= letters_)
        fail(SpecParseError::Kind::kIndex, var, "p" + std::to_string(k) + " is outside an alphabet of " +
                                                    std::to_string(letters_) + " letters");
      q.coeffs[k] += negative ? -coeff : coeff;
      if (accept_symbol("+")) negative = false;
      else if (accept_symbol("-")) negative = true;
      else break;
    }
    const auto& rel = peek();
    if (rel.type != Token::Type::kSymbol || (rel.text != "<=" && rel.text != "<" && rel.text != ">=" && rel.text != ">"))
      fail(SpecParseError::Kind::kSyntax, rel, "expected <=, <, >= or >");
    ++pos_;
    const bool neg_bound = accept_symbol("-");
    reject_foreign();
    if (peek().type == Token::Type::kWord)
      fail(SpecParseError::Kind::kOutOfClass, peek(), "`" + peek().text + "` is not a rational bound");
    if (peek().type != Token::Type::kInt) fail(SpecParseError::Kind::kSyntax, peek(), "expected a rational bound");
    q.bound = rational();
    reject_foreign();
    if (neg_bound) q.bound = -q.bound;
    q.strict = rel.text == "<" || rel.text == ">";
    if (rel.text[0] == '>') {
      for (auto& c : q.coeffs) c = -c;
      q.bound = -q.bound;
    }
    return q;
  }

  static bool is_variable(const std::string& w) {
    if (w.size() < 2 || w[0] != 'p') return false;
    for (std::size_t k = 1; k < w.size(); ++k)
      if (!std::isdigit(static_cast<unsigned char>(w[k]))) return false;
    return true;
  }

  std::size_t variable() {
    const auto& t = peek();
    if (t.type == Token::Type::kWord && is_variable(t.text)) {
      ++pos_;
      std::size_t k = 0;
      auto [p, ec] = std::from_chars(t.text.data() + 1, t.text.data() + t.text.size(), k);
      if (ec != std::errc{}) fail(SpecParseError::Kind::kIndex, t, "letter index too large");
      return k;
    }
    if (t.type == Token::Type::kWord && t.text == "p" && toks_[pos_ + 1].type == Token::Type::kInt) {
      ++pos_;
      return static_cast<std::size_t>(integer());
    }
    if (t.type == Token::Type::kWord && (t.text == "pi" || t.text == "sqrt" || t.text == "e" || t.text == "exp" ||
                                         t.text == "log"))
      fail(SpecParseError::Kind::kOutOfClass, t, "`" + t.text + "` is not rational");
    fail(SpecParseError::Kind::kSyntax, t, "expected a frequency p<k>");
  }

  Rational rational() {
    const std::int64_t num = integer();
    std::int64_t den = 1;
    if (accept_symbol("/")) {
      const auto& d = peek();
      if (d.type == Token::Type::kWord)
        fail(SpecParseError::Kind::kOutOfClass, d, "`" + d.text + "` is not rational");
      den = integer();
      if (den == 0) fail(SpecParseError::Kind::kZeroDenominator, d, "zero denominator");
    }
    return Rational(num, den);
  }

  std::int64_t integer() {
    const auto& t = peek();
    if (t.type != Token::Type::kInt) fail(SpecParseError::Kind::kSyntax, t, "expected an integer");
    std::int64_t v = 0;
    auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
    if (ec != std::errc{}) fail(SpecParseError::Kind::kSyntax, t, "integer out of range");
    ++pos_;
    return v;
  }

  void reject_foreign() {
    const auto& t = peek();
    if (t.type != Token::Type::kForeign) return;
    const char c = t.text[0];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '^' || c == '*' || c == '.' || c == '(' || c == ')')
      fail(SpecParseError::Kind::kOutOfClass, t, "`" + t.text + "` leaves the class of rational linear inequalities");
    fail(SpecParseError::Kind::kSyntax, t, "unexpected `" + t.text + "`");
  }

  const Token& peek() const { return toks_[pos_]; }

  bool accept_symbol(std::string_view s) {
    if (peek().type == Token::Type::kSymbol && peek().text == s) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect_symbol(std::string_view s) {
    reject_foreign();
    if (!accept_symbol(s)) fail(SpecParseError::Kind::kSyntax, peek(), "expected `" + std::string(s) + "`");
  }

  void expect_word(std::string_view w) {
    if (peek().type == Token::Type::kWord && peek().text == w) {
      ++pos_;
      return;
    }
    fail(SpecParseError::Kind::kSyntax, peek(), "expected `" + std::string(w) + "`");
  }

  [[noreturn]] static void fail(SpecParseError::Kind kind, const Token& at, const std::string& what) {
    throw SpecParseError(kind, at.line, at.column, what);
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  std::size_t letters_ = 0;
};

}  // namespace detail

/// Grammar (whitespace-insensitive, `#` comments):
///   spec   := "alphabet" INT ";" level+
///   level  := "output" IDENT ":" clause ("|" clause)* ";"
///   clause := ineq ("&" ineq)*
///   ineq   := ["-"] term (("+"|"-") term)* REL ["-"] rational
///   term   := [rational] "p" INT
/// `>=` and `>` are stored as `<=` and `<` with every coefficient negated.
inline FrequencyFunctionSpec parse_spec(std::string_view text) { return detail::SpecParser(text).parse(); }

}  // namespace anonet
