#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anonet/averaging.hpp"
#include "anonet/compiler.hpp"
#include "anonet/engine.hpp"

namespace anonet {

/// Per-instance intervals plus the label they select. `label` is only
/// meaningful once `settled` (every interval is an element of Y).
struct ProgramOutput {
  std::vector<IntervalOutput> intervals;
  bool settled = false;
  std::optional<std::string> label;

  friend bool operator==(const ProgramOutput&, const ProgramOutput&) = default;
};

inline std::string render(const ProgramOutput& y) {
  std::string s = y.settled ? (y.label ? *y.label : std::string("undefined")) : std::string("?");
  for (const auto& i : y.intervals) s += " " + render(i);
  return s;
}

/// Runs one interval-averaging instance per compiled inequality side by
/// side, each on the node's encoded input, and reads the label off the
/// decision table.
struct ProgramAutomaton {
  using Input = int;
  using Memory = std::vector<AveragingState>;
  using Output = ProgramOutput;
  using Message = std::vector<std::optional<AvgMessage>>;

  std::shared_ptr<const CompiledProgram> program;

  explicit ProgramAutomaton(CompiledProgram p) : program(std::make_shared<const CompiledProgram>(std::move(p))) {}

  LocalOf<ProgramAutomaton> initial(const NodeContext<Input>& ctx) const {
    Memory z;
    for (const auto& ci : program->instances) z.push_back(averaging_initial(static_cast<int>(encode_input(ctx.x, ci))));
    auto y = output(z);
    return {std::move(z), std::move(y), std::vector<std::optional<Message>>(ctx.degree)};
  }

  LocalOf<ProgramAutomaton> transition(const NodeContext<Input>& ctx, const Memory& z, const Output&,
                                       std::span<const std::optional<Message>> in) const {
    const std::size_t m = z.size();
    Memory next;
    std::vector<std::optional<Message>> out(ctx.degree);
    std::vector<std::optional<AvgMessage>> slice(ctx.degree);
    for (std::size_t inst = 0; inst < m; ++inst) {
      for (std::size_t k = 0; k < ctx.degree; ++k) slice[k] = in[k] ? (*in[k])[inst] : std::nullopt;
      auto step = averaging_transition(z[inst], slice);
      for (std::size_t k = 0; k < ctx.degree; ++k)
        if (step.out[k]) {
          if (!out[k]) out[k] = Message(m);
          (*out[k])[inst] = std::move(step.out[k]);
        }
      next.push_back(std::move(step.state));
    }
    auto y = output(next);
    return {std::move(next), std::move(y), std::move(out)};
  }

  ProgramOutput output(const Memory& z) const {
    ProgramOutput y;
    y.settled = true;
    std::vector<bool> truth;
    for (std::size_t inst = 0; inst < z.size(); ++inst) {
      const auto& s = z[inst];
      y.intervals.push_back(decode_output(s.value, s.max.estimate, s.min.estimate));
      y.settled = y.settled && y.intervals.back().stable();
      const auto& ci = program->instances[inst];
      truth.push_back(y.intervals.back().stable() && decide(y.intervals.back(), ci.threshold, ci.strict));
    }
    if (y.settled) y.label = program->label_for(truth);
    return y;
  }
};

/// The averaging layer of instance `inst` at one time.
inline AveragingSnapshot instance_snapshot(const Configuration<ProgramAutomaton>& c, std::size_t inst) {
  AveragingSnapshot s;
  s.time = c.time;
  for (const auto& node : c.nodes) {
    s.states.push_back(node.z[inst]);
    std::vector<std::optional<AvgMessage>> out;
    for (const auto& m : node.out) out.push_back(m ? (*m)[inst] : std::nullopt);
    s.out.push_back(std::move(out));
  }
  return s;
}

/// Encoded inputs of instance `inst`.
inline std::vector<int> instance_inputs(const CompiledProgram& p, std::size_t inst, const std::vector<int>& x) {
  std::vector<int> q;
  for (int v : x) q.push_back(static_cast<int>(encode_input(v, p.instances[inst])));
  return q;
}

}  // namespace anonet
