#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "anonet/averaging.hpp"

namespace anonet {

using Rational = boost::rational<std::int64_t>;

inline std::string render(const Rational& r) {
  if (r.denominator() == 1) return std::to_string(r.numerator());
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

/// sum_k coeffs[k] p_k <= bound (or < when strict).
struct LinearInequality {
  std::vector<Rational> coeffs;
  Rational bound;
  bool strict = false;

  bool holds(const std::vector<Rational>& p) const {
    Rational lhs = 0;
    for (std::size_t k = 0; k < coeffs.size(); ++k) lhs += coeffs[k] * p[k];
    return strict ? lhs < bound : lhs <= bound;
  }
  friend bool operator==(const LinearInequality&, const LinearInequality&) = default;
};

using Clause = std::vector<LinearInequality>;

struct Level {
  std::string label;
  std::vector<Clause> clauses;
};

/// Function of the frequency vector (p_0..p_K); `letters` = K+1.
struct FrequencyFunctionSpec {
  std::size_t letters = 0;
  std::vector<Level> levels;
};

class SpecError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string render(const LinearInequality& q) {
  std::string s;
  for (std::size_t k = 0; k < q.coeffs.size(); ++k) {
    if (q.coeffs[k].numerator() == 0) continue;
    const Rational c = q.coeffs[k];
    if (s.empty()) s += (c.numerator() < 0 ? "-" : "");
    else s += (c.numerator() < 0 ? " - " : " + ");
    s += render(boost::abs(c)) + " p" + std::to_string(k);
  }
  if (s.empty()) s = "0";
  return s + (q.strict ? " < " : " <= ") + render(q.bound);
}

/// Exact frequencies of the letters in x.
inline std::vector<Rational> frequencies(const std::vector<int>& x, std::size_t letters) {
  std::vector<std::int64_t> count(letters, 0);
  for (int v : x) {
    if (v < 0 || static_cast<std::size_t>(v) >= letters) throw std::out_of_range("input outside the alphabet");
    ++count[static_cast<std::size_t>(v)];
  }
  std::vector<Rational> p;
  for (auto c : count) p.emplace_back(c, static_cast<std::int64_t>(x.size()));
  return p;
}

/// Label of the first clause, in document order, that p satisfies.
inline std::optional<std::string> label_at(const FrequencyFunctionSpec& spec, const std::vector<Rational>& p) {
  for (const auto& level : spec.levels)
    for (const auto& clause : level.clauses)
      if (std::all_of(clause.begin(), clause.end(), [&](const auto& q) { return q.holds(p); })) return level.label;
  return std::nullopt;
}

/// Centralized oracle: evaluates the spec on the exact frequencies of x.
inline std::optional<std::string> evaluate_reference(const FrequencyFunctionSpec& spec, const std::vector<int>& x) {
  return label_at(spec, frequencies(x, spec.letters));
}

// ---------------------------------------------------------------------------
// Integer form

/// An inequality over the frequencies rewritten as "average of q_i <= q*"
/// (or <). Letters in P (coefficient >= 0) contribute beta_k when present,
/// the others contribute beta_k when absent.
struct CompiledInequality {
  std::vector<std::int64_t> beta;
  std::vector<bool> in_p;
  std::int64_t bound = 0;      // cleared right-hand side, before the shift
  std::int64_t threshold = 0;  // q*
  std::int64_t range = 0;      // K' = sum beta_k
  bool strict = false;

  friend bool operator==(const CompiledInequality&, const CompiledInequality&) = default;
};

inline CompiledInequality normalize(const LinearInequality& q) {
  std::int64_t lcd = q.bound.denominator();
  for (const auto& c : q.coeffs) lcd = std::lcm(lcd, c.denominator());
  CompiledInequality ci;
  ci.strict = q.strict;
  for (const auto& c : q.coeffs) {
    const std::int64_t a = (c * lcd).numerator();
    ci.in_p.push_back(a >= 0);
    ci.beta.push_back(a >= 0 ? a : -a);
  }
  ci.bound = (q.bound * lcd).numerator();
  ci.threshold = ci.bound;
  for (std::size_t k = 0; k < ci.beta.size(); ++k) {
    if (!ci.in_p[k]) ci.threshold += ci.beta[k];
    ci.range += ci.beta[k];
  }
  return ci;
}

inline std::int64_t encode_input(int x, const CompiledInequality& ci) {
  if (x < 0 || static_cast<std::size_t>(x) >= ci.beta.size()) throw std::out_of_range("input outside the alphabet");
  std::int64_t q = 0;
  for (std::size_t k = 0; k < ci.beta.size(); ++k) {
    const bool present = static_cast<std::size_t>(x) == k;
    if (ci.in_p[k] ? present : !present) q += ci.beta[k];
  }
  return q;
}

/// Whether the average, known to lie in `y`, satisfies avg <= q* (avg < q*
/// when strict). Exact because q* is an integer.
inline bool decide(const IntervalOutput& y, std::int64_t threshold, bool strict) {
  if (y.kind == IntervalOutput::Kind::kOpen) return y.lo + 1 <= threshold;
  return strict ? y.lo < threshold : y.lo <= threshold;
}

// ---------------------------------------------------------------------------
// Programs

/// Reference to an averaging instance; `negated` flips its verdict.
struct Literal {
  std::size_t instance = 0;
  bool negated = false;
};

struct CompiledLevel {
  std::string label;
  std::vector<std::vector<Literal>> clauses;
};

struct CompiledProgram {
  std::size_t letters = 0;
  std::vector<LinearInequality> sources;  // canonical inequality per instance
  std::vector<CompiledInequality> instances;
  std::vector<CompiledLevel> levels;

  std::optional<std::string> label_for(const std::vector<bool>& truth) const {
    for (const auto& level : levels)
      for (const auto& clause : level.clauses)
        if (std::all_of(clause.begin(), clause.end(),
                        [&](const Literal& l) { return truth[l.instance] != l.negated; }))
          return level.label;
    return std::nullopt;
  }

  /// Every verdict vector with its label, in binary counting order.
  std::vector<std::pair<std::vector<bool>, std::optional<std::string>>> decision_table() const {
    std::vector<std::pair<std::vector<bool>, std::optional<std::string>>> rows;
    const std::size_t m = instances.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      std::vector<bool> truth(m);
      for (std::size_t k = 0; k < m; ++k) truth[k] = mask >> k & 1;
      rows.emplace_back(truth, label_for(truth));
    }
    return rows;
  }
};

namespace detail {

inline LinearInequality negation(const LinearInequality& q) {
  LinearInequality r{q.coeffs, -q.bound, !q.strict};
  for (auto& c : r.coeffs) c = -c;
  return r;
}

/// Integer coefficients with no common factor and the first nonzero
/// coefficient positive; `flipped` reports that the result is the negation.
inline LinearInequality canonical(const LinearInequality& q, bool& flipped) {
  std::int64_t lcd = q.bound.denominator();
  for (const auto& c : q.coeffs) lcd = std::lcm(lcd, c.denominator());
  std::int64_t g = (q.bound * lcd).numerator();
  for (const auto& c : q.coeffs) g = std::gcd(g, (c * lcd).numerator());
  if (g == 0) g = 1;
  LinearInequality r{q.coeffs, q.bound * lcd / g, q.strict};
  for (auto& c : r.coeffs) c = c * lcd / g;
  flipped = false;
  auto lead = std::find_if(r.coeffs.begin(), r.coeffs.end(), [](const Rational& c) { return c.numerator() != 0; });
  if (lead != r.coeffs.end() && lead->numerator() < 0) {
    flipped = true;
    return negation(r);
  }
  return r;
}

/// Frequency vectors with denominators 1..max_den (repeats included),
/// stopping once `budget` points have been visited or `visit` says so.
inline void for_each_grid_point(std::size_t letters, std::int64_t max_den, std::size_t budget,
                                const std::function<bool(const std::vector<Rational>&)>& visit) {
  std::size_t seen = 0;
  std::vector<std::int64_t> parts(letters, 0);
  std::function<bool(std::size_t, std::int64_t, std::int64_t)> fill = [&](std::size_t k, std::int64_t left,
                                                                         std::int64_t den) {
    if (k + 1 == letters) {
      parts[k] = left;
      std::vector<Rational> p;
      for (auto a : parts) p.emplace_back(a, den);
      return visit(p) && ++seen < budget;
    }
    for (std::int64_t a = 0; a <= left; ++a) {
      parts[k] = a;
      if (!fill(k + 1, left - a, den)) return false;
    }
    return true;
  };
  for (std::int64_t den = 1; den <= max_den; ++den)
    if (!fill(0, den, den)) return;
}

}  // namespace detail

/// Spots two labels claiming one frequency vector, on a rational grid.
/// Returns the first such point.
inline std::optional<std::vector<Rational>> find_overlap(const FrequencyFunctionSpec& spec,
                                                         std::int64_t max_den = 24,
                                                         std::size_t budget = 200000) {
  std::optional<std::vector<Rational>> hit;
  detail::for_each_grid_point(spec.letters, max_den, budget, [&](const std::vector<Rational>& p) {
    std::optional<std::string> first;
    for (const auto& level : spec.levels)
      for (const auto& clause : level.clauses)
        if (std::all_of(clause.begin(), clause.end(), [&](const auto& q) { return q.holds(p); })) {
          if (first && *first != level.label) {
            hit = p;
            return false;
          }
          first = level.label;
        }
    return true;
  });
  return hit;
}

/// One averaging instance per distinct inequality (an inequality and its
/// negation share an instance).
inline CompiledProgram compile(const FrequencyFunctionSpec& spec) {
  if (spec.letters == 0) throw SpecError("empty alphabet");
  if (auto p = find_overlap(spec)) {
    std::string where;
    for (std::size_t k = 0; k < p->size(); ++k) where += (k ? "," : "") + render((*p)[k]);
    throw SpecError("levels overlap at p=(" + where + ")");
  }
  CompiledProgram prog;
  prog.letters = spec.letters;
  for (const auto& level : spec.levels) {
    CompiledLevel cl{level.label, {}};
    for (const auto& clause : level.clauses) {
      std::vector<Literal> lits;
      for (const auto& q : clause) {
        if (q.coeffs.size() != spec.letters) throw SpecError("inequality arity differs from the alphabet");
        bool flipped = false;
        auto c = detail::canonical(q, flipped);
        auto it = std::find(prog.sources.begin(), prog.sources.end(), c);
        std::size_t id = static_cast<std::size_t>(it - prog.sources.begin());
        if (it == prog.sources.end()) {
          prog.sources.push_back(c);
          prog.instances.push_back(normalize(c));
        }
        lits.push_back({id, flipped});
      }
      cl.clauses.push_back(std::move(lits));
    }
    prog.levels.push_back(std::move(cl));
  }
  return prog;
}

// ---------------------------------------------------------------------------
// Boxes

/// Open interval (lo, hi) on coordinate `letter`.
struct BoxSide {
  std::size_t letter = 0;
  Rational lo, hi;
};

struct LabeledBox {
  std::string label;
  std::vector<BoxSide> sides;  // unlisted coordinates are unconstrained
};

inline bool boxes_overlap(const LabeledBox& a, const LabeledBox& b) {
  for (const auto& sa : a.sides)
    for (const auto& sb : b.sides)
      if (sa.letter == sb.letter && std::max(sa.lo, sb.lo) >= std::min(sa.hi, sb.hi)) return false;
  for (const auto& s : a.sides)
    if (s.lo >= s.hi) return false;
  for (const auto& s : b.sides)
    if (s.lo >= s.hi) return false;
  return true;
}

/// Each box becomes one clause of strict inequalities -p_k < -lo, p_k < hi;
/// boxes with the same label join one level.
inline FrequencyFunctionSpec boxes_to_spec(std::size_t letters, const std::vector<LabeledBox>& boxes) {
  for (std::size_t a = 0; a < boxes.size(); ++a)
    for (std::size_t b = a + 1; b < boxes.size(); ++b)
      if (boxes_overlap(boxes[a], boxes[b]))
        throw SpecError("boxes " + std::to_string(a) + " and " + std::to_string(b) + " overlap");
  FrequencyFunctionSpec spec{letters, {}};
  for (const auto& box : boxes) {
    Clause clause;
    for (const auto& s : box.sides) {
      if (s.letter >= letters) throw SpecError("box side on a letter outside the alphabet");
      LinearInequality lower{std::vector<Rational>(letters, 0), -s.lo, true};
      lower.coeffs[s.letter] = -1;
      LinearInequality upper{std::vector<Rational>(letters, 0), s.hi, true};
      upper.coeffs[s.letter] = 1;
      clause.push_back(lower);
      clause.push_back(upper);
    }
    auto level = std::find_if(spec.levels.begin(), spec.levels.end(),
                              [&](const Level& l) { return l.label == box.label; });
    if (level == spec.levels.end()) spec.levels.push_back({box.label, {clause}});
    else level->clauses.push_back(clause);
  }
  return spec;
}

}  // namespace anonet
