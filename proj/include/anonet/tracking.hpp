#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "anonet/engine.hpp"
#include "anonet/graph.hpp"

namespace anonet {

/// Estimate/pointer pair of one tracking node. `pointer` is the slot of the
/// neighbor the estimate came from; nullopt means the node points to itself.
struct TrackingState {
  int estimate = 0;
  std::optional<std::size_t> pointer;
  int previous_input = 0;

  bool points_to_self() const { return !pointer.has_value(); }
  friend bool operator==(const TrackingState&, const TrackingState&) = default;
};

/// Broadcast of the tracking protocol: "Restart!" or "my estimate is v".
struct TrackingMessage {
  enum class Kind { kRestart, kEstimate };
  Kind kind = Kind::kRestart;
  int value = 0;

  static TrackingMessage restart() { return {Kind::kRestart, 0}; }
  static TrackingMessage estimate(int v) { return {Kind::kEstimate, v}; }
  bool is_restart() const { return kind == Kind::kRestart; }
  bool is_estimate() const { return kind == Kind::kEstimate; }
  friend bool operator==(const TrackingMessage&, const TrackingMessage&) = default;
};

/// Which branch of the node procedure fired during a slot.
enum class TrackingOp { kO1, kO2, kO4a, kO3, kO4b, kIdle };

inline const char* to_string(TrackingOp op) {
  switch (op) {
    case TrackingOp::kO1: return "O1";
    case TrackingOp::kO2: return "O2";
    case TrackingOp::kO4a: return "O4a";
    case TrackingOp::kO3: return "O3";
    case TrackingOp::kO4b: return "O4b";
    case TrackingOp::kIdle: return "idle";
  }
  return "?";
}

struct TrackingStep {
  TrackingState state;
  std::optional<TrackingMessage> broadcast;
  TrackingOp op = TrackingOp::kIdle;
};

/// Tracks the maximum.
struct MaxOrder {
  static bool better(int a, int b) { return a > b; }
  static constexpr const char* name = "max";
};

/// Tracks the minimum: the same procedure with every comparison reversed.
struct MinOrder {
  static bool better(int a, int b) { return a < b; }
  static constexpr const char* name = "min";
};

inline TrackingState tracking_initial(int input) { return {input, std::nullopt, input}; }

/// One slot of the tracking procedure. Cases are tried in the order
/// O1 > O2 > O4a > O3 > O4b; exactly one fires (or none, and the node
/// stays silent).
template <class Order>
TrackingStep track(const TrackingState& s, int input_now,
                   std::span<const std::optional<TrackingMessage>> in) {
  TrackingStep r{s, std::nullopt, TrackingOp::kIdle};
  r.state.previous_input = input_now;

  if (input_now != s.previous_input) {
    r.state.estimate = input_now;
    r.state.pointer.reset();
    r.broadcast = TrackingMessage::restart();
    r.op = TrackingOp::kO1;
    return r;
  }

  // Best strictly better estimate; ties go to the smallest slot.
  std::optional<std::size_t> best;
  for (std::size_t k = 0; k < in.size(); ++k) {
    const auto& m = in[k];
    if (!m || !m->is_estimate() || !Order::better(m->value, s.estimate)) continue;
    if (!best || Order::better(m->value, in[*best]->value)) best = k;
  }
  if (best) {
    r.state.estimate = in[*best]->value;
    r.state.pointer = *best;
    r.broadcast = TrackingMessage::restart();
    r.op = TrackingOp::kO2;
    return r;
  }

  if (s.pointer) {
    const auto& from_parent = in[*s.pointer];
    if (from_parent && from_parent->is_restart()) {
      r.state.estimate = input_now;
      r.state.pointer.reset();
      r.broadcast = TrackingMessage::restart();
      r.op = TrackingOp::kO4a;
      return r;
    }
    if (from_parent && from_parent->is_estimate() && from_parent->value == s.estimate) {
      r.broadcast = TrackingMessage::estimate(s.estimate);
      r.op = TrackingOp::kO4b;
    }
    return r;
  }

  r.broadcast = TrackingMessage::estimate(s.estimate);
  r.op = TrackingOp::kO3;
  return r;
}

inline TrackingStep tracking_transition(const TrackingState& s, int input_now,
                                        std::span<const std::optional<TrackingMessage>> in) {
  return track<MaxOrder>(s, input_now, in);
}

inline TrackingStep min_tracking_transition(const TrackingState& s, int input_now,
                                            std::span<const std::optional<TrackingMessage>> in) {
  return track<MinOrder>(s, input_now, in);
}

inline std::string render(const TrackingState& s) {
  return "M=" + std::to_string(s.estimate) + ";P=" +
         (s.pointer ? std::to_string(*s.pointer) : std::string("self")) +
         ";u=" + std::to_string(s.previous_input);
}

inline std::string render(const TrackingMessage& m) {
  return m.is_restart() ? std::string("R") : "E" + std::to_string(m.value);
}

/// Tracking as a standalone automaton: the tracked input is the node's
/// external input, the output is the current estimate.
template <class Order>
struct TrackingAutomaton {
  using Input = int;
  using Memory = TrackingState;
  using Output = int;
  using Message = TrackingMessage;

  LocalOf<TrackingAutomaton> initial(const NodeContext<Input>& ctx) const {
    return {tracking_initial(ctx.input), ctx.input, std::vector<std::optional<Message>>(ctx.degree)};
  }

  LocalOf<TrackingAutomaton> transition(const NodeContext<Input>& ctx, const Memory& z, const Output&,
                                        std::span<const std::optional<Message>> in) const {
    auto step = track<Order>(z, ctx.input, in);
    return {step.state, step.state.estimate,
            std::vector<std::optional<Message>>(ctx.degree, step.broadcast)};
  }
};

using MaxTracking = TrackingAutomaton<MaxOrder>;
using MinTracking = TrackingAutomaton<MinOrder>;

// ---------------------------------------------------------------------------
// Observer side

/// Snapshot of one tracking layer at time t: each node's state and the
/// message it broadcast at t.
struct TrackingSnapshot {
  std::vector<TrackingState> states;
  std::vector<std::optional<TrackingMessage>> broadcasts;
};

/// The pointer graph G(t): edge i -> j when i points at neighbor j and j's
/// time-t broadcast is not a restart.
struct PointerGraphView {
  std::vector<std::optional<NodeId>> parent;
  bool acyclic = true;
  std::vector<bool> valid;  // per node; meaningful only when acyclic

  std::size_t edge_count() const {
    return static_cast<std::size_t>(std::count_if(parent.begin(), parent.end(),
                                                  [](const auto& p) { return p.has_value(); }));
  }
  std::size_t in_degree(NodeId i) const {
    return static_cast<std::size_t>(std::count(parent.begin(), parent.end(), std::optional<NodeId>(i)));
  }
  NodeId root_of(NodeId i) const {
    while (parent[i]) i = *parent[i];
    return i;
  }
};

inline PointerGraphView observe_pointer_graph(const PortLabeledGraph& g, const TrackingSnapshot& snap) {
  const std::size_t n = g.size();
  PointerGraphView v;
  v.parent.assign(n, std::nullopt);
  v.valid.assign(n, false);
  for (NodeId i = 0; i < n; ++i) {
    const auto& s = snap.states[i];
    if (!s.pointer) continue;
    const NodeId j = g.links(i)[*s.pointer].neighbor;
    const auto& m = snap.broadcasts[j];
    if (!(m && m->is_restart())) v.parent[i] = j;
  }
  for (NodeId i = 0; i < n && v.acyclic; ++i) {
    NodeId cur = i;
    for (std::size_t hops = 0; v.parent[cur]; ++hops) {
      if (hops > n) {
        v.acyclic = false;
        break;
      }
      cur = *v.parent[cur];
    }
  }
  if (!v.acyclic) return v;
  for (NodeId i = 0; i < n; ++i) {
    const NodeId r = v.root_of(i);
    const auto& root = snap.states[r];
    v.valid[i] = root.points_to_self() && snap.states[i].estimate == root.previous_input;
  }
  return v;
}

/// Checks, slot after slot, the structural invariants of one tracking layer
/// and records every violation. Feed it consecutive snapshots.
template <class Order>
class TrackingInvariants {
 public:
  /// `quiet_from`: time after which inputs no longer change (for the
  /// monotonicity of the best estimate). `check_window_max`: also require
  /// the n-slot windowed best estimate to never get better, which holds
  /// across input changes produced by averaging but not for arbitrary
  /// scripted inputs.
  TrackingInvariants(const PortLabeledGraph& g, std::size_t quiet_from, bool check_window_max)
      : graph_(&g), quiet_from_(quiet_from), check_window_(check_window_max) {}

  void observe(std::size_t t, const TrackingSnapshot& snap, std::span<const int> initial_inputs) {
    const std::size_t n = graph_->size();
    const auto view = observe_pointer_graph(*graph_, snap);
    if (!view.acyclic) fail(t, "pointer graph has a cycle");
    for (NodeId i = 0; i < n; ++i) {
      const auto& s = snap.states[i];
      if (view.parent[i] && snap.states[*view.parent[i]].estimate != s.estimate)
        fail(t, "estimate differs along pointer edge " + std::to_string(i) + "->" +
                    std::to_string(*view.parent[i]));
      if (s.points_to_self() && s.estimate != s.previous_input)
        fail(t, "self-pointing node " + std::to_string(i) + " holds estimate != previous input");
      if (!s.points_to_self() && !Order::better(s.estimate, s.previous_input))
        fail(t, "node " + std::to_string(i) + " points away but estimate is not better than its input");
    }

    int best = snap.states[0].estimate;
    for (const auto& s : snap.states)
      if (Order::better(s.estimate, best)) best = s.estimate;
    if (t > quiet_from_ + 1 && last_best_ && Order::better(best, *last_best_))
      fail(t, std::string("best ") + Order::name + " estimate got better after inputs settled");
    last_best_ = best;

    if (check_window_) {
      // Window of n+1 slots; times before 0 count as the initial inputs.
      if (window_.empty()) {
        int init = initial_inputs[0];
        for (int x : initial_inputs)
          if (Order::better(x, init)) init = x;
        for (std::size_t k = 0; k < n; ++k) window_.push_back(init);
      }
      window_.push_back(best);
      while (window_.size() > n + 1) window_.pop_front();
      int windowed = window_.front();
      for (int v : window_)
        if (Order::better(v, windowed)) windowed = v;
      if (last_windowed_ && Order::better(windowed, *last_windowed_))
        fail(t, std::string("windowed ") + Order::name + " estimate got better");
      last_windowed_ = windowed;
    }
    last_view_ = view;
  }

  const std::vector<std::string>& violations() const { return violations_; }
  bool ok() const { return violations_.empty(); }
  const PointerGraphView& last_view() const { return last_view_; }

 private:
  void fail(std::size_t t, const std::string& what) {
    if (violations_.size() < 32) violations_.push_back("t=" + std::to_string(t) + ": " + what);
  }

  const PortLabeledGraph* graph_;
  std::size_t quiet_from_;
  bool check_window_;
  std::optional<int> last_best_;
  std::optional<int> last_windowed_;
  std::deque<int> window_;
  PointerGraphView last_view_;
  std::vector<std::string> violations_;
};

/// Converged state of a tracking layer: every estimate equals the true
/// optimum of the inputs and following pointers from any node ends at a
/// node whose input is that optimum.
template <class Order>
bool tracking_settled(const PortLabeledGraph& g, const TrackingSnapshot& snap, std::span<const int> inputs) {
  int best = inputs[0];
  for (int u : inputs)
    if (Order::better(u, best)) best = u;
  const std::size_t n = g.size();
  for (NodeId i = 0; i < n; ++i) {
    if (snap.states[i].estimate != best) return false;
    NodeId cur = i;
    for (std::size_t hops = 0; snap.states[cur].pointer; ++hops) {
      if (hops > n) return false;
      cur = g.links(cur)[*snap.states[cur].pointer].neighbor;
    }
    if (inputs[cur] != best) return false;
  }
  return true;
}

template <class Order>
TrackingSnapshot snapshot(const Configuration<TrackingAutomaton<Order>>& c) {
  TrackingSnapshot s;
  for (const auto& node : c.nodes) {
    s.states.push_back(node.z);
    s.broadcasts.push_back(node.out.empty() ? std::nullopt : node.out.front());
  }
  return s;
}

}  // namespace anonet
