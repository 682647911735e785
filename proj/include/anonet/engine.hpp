#pragma once

#include <algorithm>
#include <concepts>
#include <cstddef>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "anonet/graph.hpp"

namespace anonet {

/// What a node's automaton may look at besides its own state: its degree,
/// its port labels (sorted; slot k carries ports[k]), its initial value x,
/// and the current external input (equal to x unless a schedule changes it).
template <class Input>
struct NodeContext {
  std::size_t degree;
  std::span<const Port> ports;
  const Input& x;
  const Input& input;
};

/// Memory, output and per-slot outgoing messages of one automaton.
/// std::nullopt plays the role of the empty message.
template <class Memory, class Output, class Message>
struct Local {
  Memory z;
  Output y;
  std::vector<std::optional<Message>> out;
};

template <class A>
using LocalOf = Local<typename A::Memory, typename A::Output, typename A::Message>;

template <class A>
concept Automaton = requires(const A& a, const NodeContext<typename A::Input>& ctx,
                             const typename A::Memory& z, const typename A::Output& y,
                             std::span<const std::optional<typename A::Message>> in) {
  { a.initial(ctx) } -> std::same_as<LocalOf<A>>;
  { a.transition(ctx, z, y, in) } -> std::same_as<LocalOf<A>>;
  requires std::equality_comparable<typename A::Memory>;
  requires std::equality_comparable<typename A::Output>;
  requires std::equality_comparable<typename A::Message>;
};

class MalformedAutomaton : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

template <class A>
struct NodeState {
  typename A::Input x;
  typename A::Input input;
  typename A::Memory z;
  typename A::Output y;
  std::vector<std::optional<typename A::Message>> out;

  friend bool operator==(const NodeState&, const NodeState&) = default;
};

/// All node states plus the messages each node placed on its ports at
/// `time`. Equality ignores the clock.
template <class A>
struct Configuration {
  std::size_t time = 0;
  std::vector<NodeState<A>> nodes;

  friend bool operator==(const Configuration& a, const Configuration& b) { return a.nodes == b.nodes; }
};

template <class Input>
struct InputEvent {
  std::size_t time;
  NodeId node;
  Input value;
};

template <class Input>
using InputSchedule = std::vector<InputEvent<Input>>;

enum class RunStatus { kFixedPoint, kOutputsStable, kBudgetExceeded };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::kFixedPoint: return "fixed-point";
    case RunStatus::kOutputsStable: return "outputs-stable";
    case RunStatus::kBudgetExceeded: return "budget-exceeded";
  }
  return "unknown";
}

template <class A>
struct RunResult {
  RunStatus status = RunStatus::kBudgetExceeded;
  std::size_t steps = 0;
  Configuration<A> final;
  std::vector<Configuration<A>> trace;

  bool converged() const { return status != RunStatus::kBudgetExceeded; }
};

struct RunOptions {
  std::size_t max_steps = 1'000'000;
  bool record_trace = false;
};

struct NoObserver {
  template <class C>
  void operator()(const C&) const {}
};

/// Synchronous executor: during slot t every node consumes the time-t
/// messages on the ports leading to it and produces its time-(t+1) state
/// and messages. The graph must outlive the engine.
template <Automaton A>
class Engine {
 public:
  using Input = typename A::Input;
  using Message = typename A::Message;
  using Config = Configuration<A>;

  Engine(const PortLabeledGraph& g, A automaton) : graph_(&g), automaton_(std::move(automaton)) {
    if (auto v = validate(g)) throw std::invalid_argument("invalid network: " + v->describe());
    const std::size_t n = g.size();
    ports_.resize(n);
    routes_.resize(n);
    for (NodeId i = 0; i < n; ++i) {
      ports_[i] = g.ports(i);
      for (const auto& l : g.links(i)) routes_[i].push_back({l.neighbor, *g.slot_of(l.neighbor, i)});
    }
  }

  const PortLabeledGraph& graph() const { return *graph_; }
  const A& automaton() const { return automaton_; }

  Config initial(std::span<const Input> x) const {
    if (x.size() != graph_->size()) throw std::invalid_argument("input vector size != node count");
    Config c;
    c.nodes.reserve(x.size());
    for (NodeId i = 0; i < x.size(); ++i) {
      NodeState<A> s{x[i], x[i], {}, {}, {}};
      auto local = automaton_.initial(context(i, s));
      check_arity(i, local);
      s.z = std::move(local.z);
      s.y = std::move(local.y);
      s.out = std::move(local.out);
      c.nodes.push_back(std::move(s));
    }
    return c;
  }

  Config step(const Config& c) const {
    Config next;
    next.time = c.time + 1;
    next.nodes.reserve(c.nodes.size());
    std::vector<std::optional<Message>> inbox;
    for (NodeId i = 0; i < c.nodes.size(); ++i) {
      gather(c, i, inbox);
      const auto& s = c.nodes[i];
      auto local = automaton_.transition(context(i, s), s.z, s.y, inbox);
      check_arity(i, local);
      next.nodes.push_back(NodeState<A>{s.x, s.input, std::move(local.z), std::move(local.y),
                                        std::move(local.out)});
    }
    return next;
  }

  /// Messages arriving at node i at the configuration's time, by slot.
  void gather(const Config& c, NodeId i, std::vector<std::optional<Message>>& inbox) const {
    inbox.clear();
    for (const auto& r : routes_[i]) inbox.push_back(c.nodes[r.neighbor].out[r.back_slot]);
  }

  const std::optional<Message>& in_flight(const Config& c, NodeId from, std::size_t slot) const {
    return c.nodes[from].out[slot];
  }

  /// Runs until the first time t (at or after the last scheduled input
  /// change) whose configuration is mapped to itself; `steps` is that t.
  template <class Observer = NoObserver>
  RunResult<A> run_to_fixed_point(std::span<const Input> x, const InputSchedule<Input>& schedule,
                                  const RunOptions& opt, Observer&& observe = {}) const {
    auto events = sorted(schedule);
    const std::size_t quiet_from = events.empty() ? 0 : events.back().time;
    RunResult<A> result;
    Config c = initial(x);
    std::size_t next_event = 0;
    while (true) {
      apply_events(c, events, next_event);
      observe(std::as_const(c));
      if (opt.record_trace) result.trace.push_back(c);
      if (c.time >= opt.max_steps) {
        result.status = RunStatus::kBudgetExceeded;
        result.steps = c.time;
        result.final = std::move(c);
        return result;
      }
      Config next = step(c);
      if (c.time >= quiet_from && next == c) {
        result.status = RunStatus::kFixedPoint;
        result.steps = c.time;
        result.final = std::move(c);
        return result;
      }
      c = std::move(next);
    }
  }

  /// Alternate stop rule for automata without a configuration fixed point:
  /// stop once every output has been unchanged for `window` slots. `steps` is
  /// the time the outputs took their final values.
  template <class Observer = NoObserver>
  RunResult<A> run_until_outputs_stable(std::span<const Input> x, std::size_t window,
                                        const RunOptions& opt, Observer&& observe = {}) const {
    RunResult<A> result;
    Config c = initial(x);
    std::size_t since = 0;
    while (true) {
      observe(std::as_const(c));
      if (opt.record_trace) result.trace.push_back(c);
      if (c.time >= since + window) {
        result.status = RunStatus::kOutputsStable;
        result.steps = since;
        result.final = std::move(c);
        return result;
      }
      if (c.time >= opt.max_steps) {
        result.status = RunStatus::kBudgetExceeded;
        result.steps = c.time;
        result.final = std::move(c);
        return result;
      }
      Config next = step(c);
      for (NodeId i = 0; i < c.nodes.size(); ++i)
        if (!(next.nodes[i].y == c.nodes[i].y)) {
          since = next.time;
          break;
        }
      c = std::move(next);
    }
  }

 private:
  struct Route {
    NodeId neighbor;
    std::size_t back_slot;  // slot at `neighbor` of the edge leading here
  };

  NodeContext<Input> context(NodeId i, const NodeState<A>& s) const {
    return NodeContext<Input>{routes_[i].size(), ports_[i], s.x, s.input};
  }

  void check_arity(NodeId i, const LocalOf<A>& local) const {
    if (local.out.size() != routes_[i].size())
      throw MalformedAutomaton("node " + std::to_string(i) + " emitted " +
                               std::to_string(local.out.size()) + " messages for degree " +
                               std::to_string(routes_[i].size()));
  }

  static InputSchedule<Input> sorted(const InputSchedule<Input>& schedule) {
    auto events = schedule;
    std::stable_sort(events.begin(), events.end(),
                     [](const auto& a, const auto& b) { return a.time < b.time; });
    return events;
  }

  void apply_events(Config& c, const InputSchedule<Input>& events, std::size_t& next) const {
    while (next < events.size() && events[next].time <= c.time) {
      const auto& e = events[next++];
      if (e.node >= c.nodes.size()) throw std::out_of_range("schedule names a missing node");
      c.nodes[e.node].input = e.value;
    }
  }

  const PortLabeledGraph* graph_;
  A automaton_;
  std::vector<std::vector<Port>> ports_;
  std::vector<std::vector<Route>> routes_;
};

template <Automaton A>
RunResult<A> run_to_fixed_point(const PortLabeledGraph& g, const A& a,
                                std::span<const typename A::Input> x,
                                const InputSchedule<typename A::Input>& schedule = {},
                                const RunOptions& opt = {}) {
  return Engine<A>(g, a).run_to_fixed_point(x, schedule, opt);
}

// ---------------------------------------------------------------------------
// Composition

/// Product automaton: both components run side by side on the same initial
/// value, each reading only its own half of every message.
template <Automaton First, Automaton Second>
  requires std::same_as<typename First::Input, typename Second::Input>
struct Product {
  using Input = typename First::Input;
  using Memory = std::pair<typename First::Memory, typename Second::Memory>;
  using Output = std::pair<typename First::Output, typename Second::Output>;
  using Message = std::pair<std::optional<typename First::Message>,
                            std::optional<typename Second::Message>>;

  First first;
  Second second;

  LocalOf<Product> initial(const NodeContext<Input>& ctx) const {
    return merge(first.initial(ctx), second.initial(ctx));
  }

  LocalOf<Product> transition(const NodeContext<Input>& ctx, const Memory& z, const Output& y,
                              std::span<const std::optional<Message>> in) const {
    std::vector<std::optional<typename First::Message>> in_a;
    std::vector<std::optional<typename Second::Message>> in_b;
    for (const auto& m : in) {
      in_a.push_back(m ? m->first : std::nullopt);
      in_b.push_back(m ? m->second : std::nullopt);
    }
    return merge(first.transition(ctx, z.first, y.first, in_a),
                 second.transition(ctx, z.second, y.second, in_b));
  }

 private:
  static LocalOf<Product> merge(LocalOf<First> a, LocalOf<Second> b) {
    if (a.out.size() != b.out.size()) throw MalformedAutomaton("product components disagree on arity");
    LocalOf<Product> out{{std::move(a.z), std::move(b.z)}, {std::move(a.y), std::move(b.y)}, {}};
    for (std::size_t k = 0; k < a.out.size(); ++k) {
      if (a.out[k] || b.out[k])
        out.out.emplace_back(Message{std::move(a.out[k]), std::move(b.out[k])});
      else
        out.out.emplace_back(std::nullopt);
    }
    return out;
  }
};

template <Automaton First, Automaton Second>
Product<First, Second> compose(First a, Second b) {
  return Product<First, Second>{std::move(a), std::move(b)};
}

/// Does nothing: keeps its (empty) memory and output, sends nothing.
template <class In>
struct Identity {
  using Input = In;
  using Memory = std::monostate;
  using Output = std::monostate;
  using Message = std::monostate;

  LocalOf<Identity> initial(const NodeContext<Input>& ctx) const { return {{}, {}, std::vector<std::optional<Message>>(ctx.degree)}; }
  LocalOf<Identity> transition(const NodeContext<Input>& ctx, const Memory&, const Output&,
                               std::span<const std::optional<Message>>) const {
    return {{}, {}, std::vector<std::optional<Message>>(ctx.degree)};
  }
};

// ---------------------------------------------------------------------------
// Trace rendering. Field renderings never contain commas.

inline std::string render(int v) { return std::to_string(v); }
inline std::string render(long v) { return std::to_string(v); }
inline std::string render(long long v) { return std::to_string(v); }
inline std::string render(unsigned long v) { return std::to_string(v); }
inline std::string render(bool v) { return v ? "1" : "0"; }
inline std::string render(std::monostate) { return "-"; }

template <class T>
std::string render(const std::optional<T>& v);
template <class T, class U>
std::string render(const std::pair<T, U>& p);
template <class T>
std::string render(const std::vector<T>& v);

template <class T>
std::string render(const std::optional<T>& v) {
  return v ? render(*v) : std::string("-");
}

template <class T, class U>
std::string render(const std::pair<T, U>& p) {
  return "(" + render(p.first) + " " + render(p.second) + ")";
}

template <class T>
std::string render(const std::vector<T>& v) {
  std::string s = "[";
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k) s += ' ';
    s += render(v[k]);
  }
  return s + "]";
}

/// CSV with one row per (time, node): t,node,x,y,z,out where `out` lists the
/// outgoing message on each slot separated by `|`.
template <class A>
void write_trace_csv(std::ostream& os, const std::vector<Configuration<A>>& trace) {
  os << "t,node,x,y,z,out\n";
  for (const auto& c : trace)
    for (NodeId i = 0; i < c.nodes.size(); ++i) {
      const auto& s = c.nodes[i];
      os << c.time << ',' << i << ',' << render(s.x) << ',' << render(s.y) << ',' << render(s.z) << ',';
      for (std::size_t k = 0; k < s.out.size(); ++k) os << (k ? "|" : "") << render(s.out[k]);
      os << '\n';
    }
}

}  // namespace anonet
