#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anonet/averaging.hpp"
#include "anonet/compiler.hpp"
#include "anonet/engine.hpp"

namespace anonet {

/// Instance advanced during slot t under the schedule
/// Q1 | Q1 Q2 | Q1 Q2 Q3 | ... whose blocks stop growing at length m_max.
/// Returns a 1-based instance number.
inline std::size_t scheduled_instance(std::size_t t, std::size_t m_max) {
  std::size_t block = 1;
  while (block < m_max) {
    if (t < block) return t + 1;
    t -= block;
    ++block;
  }
  return t % m_max + 1;
}

/// Output-stability window for the stop rule: 4n slots of every instance,
/// and an instance advances at least once every m_max slots.
inline std::size_t default_window(std::size_t n, std::size_t m_max) { return 4 * n * m_max; }

struct ExactFrequencyState {
  std::size_t clock = 0;
  std::vector<AveragingState> instances;  // Q_1..Q_m started so far
  std::vector<std::vector<std::optional<AvgMessage>>> last_out;  // per instance, per slot

  friend bool operator==(const ExactFrequencyState&, const ExactFrequencyState&) = default;
};

inline std::string render(const ExactFrequencyState& s) {
  return "clock=" + std::to_string(s.clock) + ";instances=" + std::to_string(s.instances.size());
}

/// Output of the exact-frequency program; empty until some instance shows
/// a singleton.
struct FrequencyEstimate {
  std::optional<Rational> value;

  friend bool operator==(const FrequencyEstimate&, const FrequencyEstimate&) = default;
};

inline std::string render(const FrequencyEstimate& f) { return f.value ? render(*f.value) : std::string("-"); }

/// Recovers p_k, the share of nodes whose value is `target`. Instance Q_m
/// averages m * [x == target]; the output is v/m for the smallest m whose
/// Q_m shows the singleton {v}. Every node carries the newest message of
/// each instance, so an instance resumes exactly where it paused.
struct ExactFrequencyAutomaton {
  using Input = int;
  using Memory = ExactFrequencyState;
  using Output = FrequencyEstimate;
  using Message = std::vector<std::optional<AvgMessage>>;

  int target = 1;
  std::size_t m_max = 8;

  LocalOf<ExactFrequencyAutomaton> initial(const NodeContext<Input>& ctx) const {
    return {ExactFrequencyState{}, FrequencyEstimate{}, std::vector<std::optional<Message>>(ctx.degree)};
  }

  LocalOf<ExactFrequencyAutomaton> transition(const NodeContext<Input>& ctx, const Memory& z, const Output&,
                                              std::span<const std::optional<Message>> in) const {
    ExactFrequencyState next = z;
    const std::size_t m = scheduled_instance(z.clock, m_max);
    const std::size_t idx = m - 1;
    if (idx == next.instances.size()) {
      next.instances.push_back(averaging_initial(ctx.x == target ? static_cast<int>(m) : 0));
      next.last_out.emplace_back(ctx.degree);
    }
    std::vector<std::optional<AvgMessage>> slice(ctx.degree);
    for (std::size_t k = 0; k < ctx.degree; ++k)
      if (in[k] && idx < in[k]->size()) slice[k] = (*in[k])[idx];
    auto step = averaging_transition(next.instances[idx], slice);
    next.instances[idx] = std::move(step.state);
    next.last_out[idx] = std::move(step.out);
    ++next.clock;

    std::vector<std::optional<Message>> out(ctx.degree);
    for (std::size_t k = 0; k < ctx.degree; ++k) {
      Message msg;
      bool any = false;
      for (const auto& per : next.last_out) {
        msg.push_back(per[k]);
        any = any || per[k].has_value();
      }
      if (any) out[k] = std::move(msg);
    }
    auto y = output(next);
    return {std::move(next), std::move(y), std::move(out)};
  }

  static Output output(const ExactFrequencyState& z) {
    for (std::size_t idx = 0; idx < z.instances.size(); ++idx) {
      const auto& s = z.instances[idx];
      const auto y = decode_output(s.value, s.max.estimate, s.min.estimate);
      if (y.kind == IntervalOutput::Kind::kPoint) return {Rational(y.lo, static_cast<std::int64_t>(idx + 1))};
    }
    return {};
  }
};

}  // namespace anonet
