#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <vector>

#include "anonet/engine.hpp"
#include "anonet/graph.hpp"
#include "anonet/tracking.hpp"

namespace anonet {

enum class Mode { kFree, kBlocked };

/// Where the request a blocked node is working on came from.
struct RequestSource {
  enum class Kind { kNone, kSelf, kSlot };
  Kind kind = Kind::kNone;
  std::size_t slot = 0;

  static RequestSource none() { return {}; }
  static RequestSource self() { return {Kind::kSelf, 0}; }
  static RequestSource from(std::size_t k) { return {Kind::kSlot, k}; }
  bool is_none() const { return kind == Kind::kNone; }
  bool is_self() const { return kind == Kind::kSelf; }
  bool is_slot() const { return kind == Kind::kSlot; }
  friend bool operator==(const RequestSource&, const RequestSource&) = default;
};

struct AveragingState {
  int value = 0;  // pebbles held
  Mode mode = Mode::kFree;
  RequestSource rin;
  std::optional<std::size_t> rout;
  TrackingState max;
  TrackingState min;

  bool is_free() const { return mode == Mode::kFree; }
  friend bool operator==(const AveragingState&, const AveragingState&) = default;
};

/// Point-to-point part of a message. Accept(0) is a denial.
struct Exchange {
  enum class Kind { kRequest, kAccept };
  Kind kind = Kind::kRequest;
  int amount = 0;

  static Exchange request(int r) { return {Kind::kRequest, r}; }
  static Exchange accept(int w) { return {Kind::kAccept, w}; }
  bool is_request() const { return kind == Kind::kRequest; }
  bool is_accept() const { return kind == Kind::kAccept; }
  friend bool operator==(const Exchange&, const Exchange&) = default;
};

struct AvgMessage {
  std::optional<TrackingMessage> max;
  std::optional<TrackingMessage> min;
  std::optional<Exchange> exchange;

  bool empty() const { return !max && !min && !exchange; }
  friend bool operator==(const AvgMessage&, const AvgMessage&) = default;
};

/// Element of Y: {lo} when lo == hi, the open interval (lo, lo+1), or a
/// not-yet-converged reading (lo, hi) with hi - lo >= 2.
struct IntervalOutput {
  enum class Kind { kPoint, kOpen, kUnstable };
  Kind kind = Kind::kPoint;
  int lo = 0;
  int hi = 0;

  static IntervalOutput point(int v) { return {Kind::kPoint, v, v}; }
  static IntervalOutput open(int m) { return {Kind::kOpen, m, m + 1}; }
  bool stable() const { return kind != Kind::kUnstable; }
  friend bool operator==(const IntervalOutput&, const IntervalOutput&) = default;
};

inline IntervalOutput decode_output(int u, int max_estimate, int min_estimate) {
  if (max_estimate == min_estimate) return IntervalOutput::point(u);
  if (max_estimate == min_estimate + 1) return IntervalOutput::open(min_estimate);
  return {IntervalOutput::Kind::kUnstable, min_estimate, max_estimate};
}

/// The interval of Y holding sum/n exactly.
inline IntervalOutput true_interval(long long sum, long long n) {
  const long long q = sum / n;  // inputs are nonnegative
  if (q * n == sum) return IntervalOutput::point(static_cast<int>(q));
  return IntervalOutput::open(static_cast<int>(q));
}

inline std::string render(const IntervalOutput& y) {
  switch (y.kind) {
    case IntervalOutput::Kind::kPoint: return "{" + std::to_string(y.lo) + "}";
    case IntervalOutput::Kind::kOpen: return "(" + std::to_string(y.lo) + " " + std::to_string(y.hi) + ")";
    case IntervalOutput::Kind::kUnstable: return "~(" + std::to_string(y.lo) + " " + std::to_string(y.hi) + ")";
  }
  return "?";
}

inline std::string render(const Exchange& e) {
  return (e.is_request() ? "Req" : "Acc") + std::to_string(e.amount);
}

inline std::string render(const AvgMessage& m) {
  return render(m.max) + "/" + render(m.min) + "/" + render(m.exchange);
}

inline std::string render(const AveragingState& s) {
  std::string rin = s.rin.is_none() ? "-" : s.rin.is_self() ? "self" : std::to_string(s.rin.slot);
  return "u=" + std::to_string(s.value) + ";" + (s.is_free() ? "F" : "B") + ";in=" + rin +
         ";out=" + (s.rout ? std::to_string(*s.rout) : std::string("-")) + ";max{" + render(s.max) +
         "};min{" + render(s.min) + "}";
}

/// Raised when a node sees a message the protocol can never produce.
class ProtocolViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `acceptance_skew` corrupts every positive Accept by that many pebbles
/// while the acceptor still gives up the correct amount. Zero for the
/// protocol proper; nonzero only to check that the harness notices.
struct AveragingParams {
  int acceptance_skew = 0;
};

struct AveragingStep {
  AveragingState state;
  std::vector<std::optional<AvgMessage>> out;
};

inline AveragingState averaging_initial(int x) {
  return {x, Mode::kFree, RequestSource::none(), std::nullopt, tracking_initial(x), tracking_initial(x)};
}

inline AveragingStep averaging_transition(const AveragingState& s,
                                          std::span<const std::optional<AvgMessage>> in,
                                          const AveragingParams& params = {}) {
  const std::size_t d = in.size();
  const int u = s.value;
  const bool steady = u == s.max.previous_input;

  std::vector<std::optional<TrackingMessage>> max_in(d), min_in(d);
  std::vector<std::optional<Exchange>> ex_in(d), ex_out(d);
  for (std::size_t k = 0; k < d; ++k)
    if (in[k]) {
      max_in[k] = in[k]->max;
      min_in[k] = in[k]->min;
      ex_in[k] = in[k]->exchange;
    }

  AveragingState next = s;
  const auto max_step = track<MaxOrder>(s.max, u, max_in);
  const auto min_step = track<MinOrder>(s.min, u, min_in);
  next.max = max_step.state;
  next.min = min_step.state;

  auto deny_requests_except = [&](std::optional<std::size_t> keep) {
    for (std::size_t k = 0; k < d; ++k)
      if (ex_in[k] && ex_in[k]->is_request() && k != keep) ex_out[k] = Exchange::accept(0);
  };
  auto block_towards_parent = [&](RequestSource source, int r) {
    if (!s.max.pointer) throw ProtocolViolation("request routed while pointing to self");
    ex_out[*s.max.pointer] = Exchange::request(r);
    next.mode = Mode::kBlocked;
    next.rin = source;
    next.rout = s.max.pointer;
  };

  if (s.is_free()) {
    std::optional<std::size_t> selected;
    for (std::size_t k = 0; k < d; ++k) {
      if (!ex_in[k]) continue;
      if (ex_in[k]->is_accept()) throw ProtocolViolation("accept received while free");
      if (!selected) selected = k;
    }
    if (selected) {
      const std::size_t k = *selected;
      const int r = ex_in[k]->amount;
      deny_requests_except(k);
      // A second request arriving from the parent would need the parent's
      // port twice; that parent is blocked and would deny us anyway.
      const bool parent_port_busy = s.max.pointer && *s.max.pointer != k && ex_out[*s.max.pointer];
      if (u - r >= 2) {
        const int w = (u - r) / 2;
        next.value = u - w;
        ex_out[k] = Exchange::accept(w + params.acceptance_skew);
      } else if (steady && u - 1 <= r && r < s.max.estimate - 1 && !parent_port_busy) {
        block_towards_parent(RequestSource::from(k), r);
      } else {
        ex_out[k] = Exchange::accept(0);
      }
    } else if (steady && s.max.estimate >= u + 2) {
      block_towards_parent(RequestSource::self(), u);
    }
  } else {
    std::optional<int> answer;
    for (std::size_t k = 0; k < d; ++k) {
      if (!ex_in[k] || !ex_in[k]->is_accept()) continue;
      if (k != s.rout) throw ProtocolViolation("accept received from a port other than Rout");
      answer = ex_in[k]->amount;
    }
    deny_requests_except(std::nullopt);
    if (answer) {
      if (s.rin.is_self()) {
        next.value = u + *answer;
      } else {
        if (ex_out[s.rin.slot]) throw ProtocolViolation("answer collides with a denial on Rin");
        ex_out[s.rin.slot] = Exchange::accept(*answer);
      }
      next.mode = Mode::kFree;
      next.rin = RequestSource::none();
      next.rout.reset();
    }
  }

  AveragingStep r{next, std::vector<std::optional<AvgMessage>>(d)};
  for (std::size_t k = 0; k < d; ++k) {
    AvgMessage m{max_step.broadcast, min_step.broadcast, ex_out[k]};
    if (!m.empty()) r.out[k] = m;
  }
  return r;
}

/// Interval averaging on the node's initial value.
struct AveragingAutomaton {
  using Input = int;
  using Memory = AveragingState;
  using Output = IntervalOutput;
  using Message = AvgMessage;

  AveragingParams params;

  LocalOf<AveragingAutomaton> initial(const NodeContext<Input>& ctx) const {
    return {averaging_initial(ctx.x), IntervalOutput::point(ctx.x),
            std::vector<std::optional<Message>>(ctx.degree)};
  }

  LocalOf<AveragingAutomaton> transition(const NodeContext<Input>&, const Memory& z, const Output&,
                                         std::span<const std::optional<Message>> in) const {
    auto step = averaging_transition(z, in, params);
    const auto y = decode_output(step.state.value, step.state.max.estimate, step.state.min.estimate);
    return {std::move(step.state), y, std::move(step.out)};
  }
};

// ---------------------------------------------------------------------------
// Observer side

/// States and outgoing messages of one averaging layer at one time.
struct AveragingSnapshot {
  std::size_t time = 0;
  std::vector<AveragingState> states;
  std::vector<std::vector<std::optional<AvgMessage>>> out;

  std::optional<Exchange> exchange_on(NodeId from, std::size_t slot) const {
    const auto& m = out[from][slot];
    return m ? m->exchange : std::nullopt;
  }

  template <class Order>
  TrackingSnapshot tracking() const {
    TrackingSnapshot t;
    for (std::size_t i = 0; i < states.size(); ++i) {
      t.states.push_back(std::is_same_v<Order, MaxOrder> ? states[i].max : states[i].min);
      std::optional<TrackingMessage> b;
      if (!out[i].empty() && out[i].front())
        b = std::is_same_v<Order, MaxOrder> ? out[i].front()->max : out[i].front()->min;
      t.broadcasts.push_back(b);
    }
    return t;
  }
};

inline AveragingSnapshot snapshot(const Configuration<AveragingAutomaton>& c) {
  AveragingSnapshot s;
  s.time = c.time;
  for (const auto& node : c.nodes) {
    s.states.push_back(node.z);
    s.out.push_back(node.out);
  }
  return s;
}

/// Chain originator -> ... -> tail following the request forward.
struct RequestPath {
  NodeId origin = 0;
  std::vector<NodeId> nodes;
  std::optional<int> answer_at_tail;   // Accept in flight to the tail
  std::optional<int> answer_at_origin; // Accept in flight to the originator
};

struct ExchangeView {
  std::vector<RequestPath> paths;
  std::vector<int> in_transit;       // w_i: accepted amount heading to originator i
  std::vector<int> virtual_value;    // u_i + w_i
  long long total = 0;               // sum of virtual values
  long long scaled_variance = 0;     // n^2 V = sum (n*uhat_i - S)^2 with S the input sum
  std::vector<std::string> problems;

  bool consistent() const { return problems.empty(); }
};

inline std::optional<Exchange> answer_to(const PortLabeledGraph& g, const AveragingSnapshot& s, NodeId i) {
  const auto& st = s.states[i];
  if (st.is_free() || !st.rout) return std::nullopt;
  const NodeId j = g.links(i)[*st.rout].neighbor;
  auto e = s.exchange_on(j, *g.slot_of(j, i));
  if (e && e->is_accept()) return e;
  return std::nullopt;
}

/// `input_sum` is sum x_i; V itself is scaled_variance / n^2.
inline ExchangeView observe_exchange(const PortLabeledGraph& g, const AveragingSnapshot& s, long long input_sum) {
  const std::size_t n = g.size();
  ExchangeView v;
  v.in_transit.assign(n, 0);
  std::vector<int> owner(n, -1);
  auto problem = [&](const std::string& p) { v.problems.push_back("t=" + std::to_string(s.time) + ": " + p); };

  for (NodeId i = 0; i < n; ++i) {
    const auto& st = s.states[i];
    if (st.is_free() != (st.rin.is_none() && !st.rout))
      problem("node " + std::to_string(i) + " mode disagrees with its request pointers");
    if (!st.is_free() && (st.rin.is_none() || !st.rout))
      problem("blocked node " + std::to_string(i) + " lacks Rin or Rout");
  }

  for (NodeId l = 0; l < n; ++l) {
    if (s.states[l].is_free() || !s.states[l].rin.is_self()) continue;
    RequestPath p;
    p.origin = l;
    NodeId cur = l;
    while (true) {
      if (owner[cur] != -1) {
        problem("request paths meet at node " + std::to_string(cur));
        break;
      }
      owner[cur] = static_cast<int>(l);
      p.nodes.push_back(cur);
      std::optional<NodeId> succ;
      for (const auto& link : g.links(cur)) {
        const auto& st = s.states[link.neighbor];
        if (st.is_free() || !st.rin.is_slot()) continue;
        if (g.links(link.neighbor)[st.rin.slot].neighbor != cur) continue;
        if (succ) problem("request path of " + std::to_string(l) + " branches at " + std::to_string(cur));
        succ = link.neighbor;
      }
      if (!succ) break;
      if (s.states[cur].rout != g.slot_of(cur, *succ))
        problem("Rout of " + std::to_string(cur) + " does not lead to the next path node");
      cur = *succ;
    }
    if (auto a = answer_to(g, s, p.nodes.back())) p.answer_at_tail = a->amount;
    if (auto a = answer_to(g, s, l)) p.answer_at_origin = a->amount;
    if (p.answer_at_tail) v.in_transit[l] = *p.answer_at_tail;
    v.paths.push_back(std::move(p));
  }
  for (NodeId i = 0; i < n; ++i)
    if (!s.states[i].is_free() && owner[i] == -1)
      problem("blocked node " + std::to_string(i) + " is on no request path");

  v.virtual_value.resize(n);
  for (NodeId i = 0; i < n; ++i) {
    v.virtual_value[i] = s.states[i].value + v.in_transit[i];
    v.total += v.virtual_value[i];
  }
  const long long nn = static_cast<long long>(n);
  for (int uh : v.virtual_value) {
    const long long dev = nn * uh - input_sum;
    v.scaled_variance += dev * dev;
  }
  return v;
}

/// Slot-by-slot check of every averaging invariant, including both
/// embedded tracking layers.
class AveragingInvariants {
 public:
  AveragingInvariants(const PortLabeledGraph& g, std::vector<int> x)
      : graph_(&g),
        x_(std::move(x)),
        max_(g, 0, true),
        min_(g, 0, true),
        opened_(g.size()),
        tail_answered_(g.size()) {
    for (int v : x_) sum_ += v;
  }

  void observe(const AveragingSnapshot& s) {
    const std::size_t n = graph_->size();
    const long long nn = static_cast<long long>(n);
    const auto view = observe_exchange(*graph_, s, sum_);
    for (const auto& p : view.problems) fail(p);
    if (view.total != sum_)
      fail(at(s) + "virtual values sum to " + std::to_string(view.total) + ", inputs to " + std::to_string(sum_));

    bool accepted = false;
    if (last_) {
      for (NodeId i = 0; i < n; ++i)
        if (s.states[i].value < last_->states[i].value) accepted = true;
      if (view.scaled_variance > last_variance_) fail(at(s) + "variance increased");
      if (accepted && view.scaled_variance > last_variance_ - 2 * nn * nn)
        fail(at(s) + "acceptance decreased the variance by less than 2");
      if (accepted) ++acceptances_slots_;
      for (NodeId i = 0; i < n; ++i) acceptances_ += s.states[i].value < last_->states[i].value;
    } else {
      initial_variance_ = view.scaled_variance;
    }

    for (NodeId l = 0; l < n; ++l) {
      const auto& st = s.states[l];
      const bool originating = !st.is_free() && st.rin.is_self();
      if (!originating) {
        opened_[l].reset();
        tail_answered_[l].reset();
      } else if (!opened_[l]) {
        opened_[l] = s.time - 1;
      }
    }
    // An L-edge request path is answered at its tail L+2 slots after
    // origination and at its originator L more slots later; L <= n-1.
    for (const auto& p : view.paths) {
      const std::size_t since = s.time - *opened_[p.origin];
      if (p.answer_at_tail && !tail_answered_[p.origin]) {
        tail_answered_[p.origin] = s.time;
        worst_tail_ = std::max(worst_tail_, since);
        if (since > n + 1) fail(at(s) + "request of " + std::to_string(p.origin) + " unanswered at its tail after " +
                            std::to_string(since) + " slots");
      }
      if (p.answer_at_origin) {
        worst_origin_ = std::max(worst_origin_, since);
        if (since > 2 * n) fail(at(s) + "request of " + std::to_string(p.origin) + " answered after " +
                                std::to_string(since) + " slots");
      }
      if (!p.answer_at_tail && since > n)
        fail(at(s) + "request of " + std::to_string(p.origin) + " open for " + std::to_string(since) + " slots");
    }

    max_.observe(s.time, s.tracking<MaxOrder>(), x_);
    min_.observe(s.time, s.tracking<MinOrder>(), x_);
    last_variance_ = view.scaled_variance;
    last_ = s;
  }

  std::vector<std::string> violations() const {
    auto all = violations_;
    for (const auto& v : max_.violations()) all.push_back("max tracking " + v);
    for (const auto& v : min_.violations()) all.push_back("min tracking " + v);
    return all;
  }
  bool ok() const { return violations_.empty() && max_.ok() && min_.ok(); }

  long long initial_scaled_variance() const { return initial_variance_; }
  long long scaled_variance() const { return last_variance_; }
  std::size_t acceptances() const { return acceptances_; }
  std::size_t acceptance_slots() const { return acceptances_slots_; }
  std::size_t worst_tail_delay() const { return worst_tail_; }
  std::size_t worst_origin_delay() const { return worst_origin_; }

 private:
  static std::string at(const AveragingSnapshot& s) { return "t=" + std::to_string(s.time) + ": "; }
  void fail(const std::string& what) {
    if (violations_.size() < 32) violations_.push_back(what);
  }

  const PortLabeledGraph* graph_;
  std::vector<int> x_;
  long long sum_ = 0;
  TrackingInvariants<MaxOrder> max_;
  TrackingInvariants<MinOrder> min_;
  std::optional<AveragingSnapshot> last_;
  long long initial_variance_ = 0;
  long long last_variance_ = 0;
  std::size_t acceptances_ = 0;
  std::size_t acceptances_slots_ = 0;
  std::size_t worst_tail_ = 0;
  std::size_t worst_origin_ = 0;
  std::vector<std::optional<std::size_t>> opened_;
  std::vector<std::optional<std::size_t>> tail_answered_;
  std::vector<std::string> violations_;
};

/// n^2 K^2 + (6K+4) n.
inline long long termination_bound(long long n, long long k) { return n * n * k * k + (6 * k + 4) * n; }

}  // namespace anonet
