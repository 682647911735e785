#include <gtest/gtest.h>

#include <queue>
#include <sstream>

#include "anonet/detection.hpp"
#include "anonet/engine.hpp"
#include "anonet/enumerate.hpp"
#include "anonet/graph.hpp"
#include "anonet/tracking.hpp"

using namespace anonet;

namespace {

// Hop distance from i to the nearest node with x = 1 (or n+1 if none).
std::vector<std::size_t> distance_to_ones(const PortLabeledGraph& g, const std::vector<int>& x) {
  const std::size_t n = g.size();
  std::vector<std::size_t> d(n, n + 1);
  std::queue<NodeId> q;
  for (NodeId i = 0; i < n; ++i)
    if (x[i] == 1) {
      d[i] = 0;
      q.push(i);
    }
  while (!q.empty()) {
    auto i = q.front();
    q.pop();
    for (const auto& l : g.links(i))
      if (d[l.neighbor] > d[i] + 1) {
        d[l.neighbor] = d[i] + 1;
        q.push(l.neighbor);
      }
  }
  return d;
}

// Sends 1 on slot k to count arity errors.
struct WrongArity {
  using Input = int;
  using Memory = int;
  using Output = int;
  using Message = int;
  LocalOf<WrongArity> initial(const NodeContext<Input>& ctx) const {
    return {0, 0, std::vector<std::optional<Message>>(ctx.degree)};
  }
  LocalOf<WrongArity> transition(const NodeContext<Input>& ctx, const Memory&, const Output&,
                                 std::span<const std::optional<Message>>) const {
    return {0, 0, std::vector<std::optional<Message>>(ctx.degree + 1)};
  }
};

// Echoes what arrived on slot 0 so routing can be observed.
struct PortEcho {
  using Input = int;
  using Memory = std::vector<int>;
  using Output = int;
  using Message = int;
  LocalOf<PortEcho> initial(const NodeContext<Input>& ctx) const {
    std::vector<std::optional<Message>> out;
    for (auto p : ctx.ports) out.push_back(ctx.x * 100 + p);
    return {{}, 0, out};
  }
  LocalOf<PortEcho> transition(const NodeContext<Input>& ctx, const Memory&, const Output&,
                               std::span<const std::optional<Message>> in) const {
    std::vector<int> seen;
    for (const auto& m : in) seen.push_back(m ? *m : -1);
    return {seen, 0, std::vector<std::optional<Message>>(ctx.degree)};
  }
};

}  // namespace

TEST(Step, SingleNodeDetection) {
  auto g = build_line(1);
  Engine<Detection> e(g, {});
  std::vector<int> x{1};
  auto c = e.step(e.initial(x));
  EXPECT_EQ(c.nodes[0].y, 1);
}

TEST(Step, TwoNodeLineDetection) {
  auto g = build_line(2);
  Engine<Detection> e(g, {});
  std::vector<int> x{0, 1};
  auto c = e.initial(x);
  c = e.step(c);
  EXPECT_EQ(c.nodes[0].y, 0);
  EXPECT_EQ(c.nodes[1].y, 1);
  c = e.step(c);
  EXPECT_EQ(c.nodes[0].y, 1);
  EXPECT_EQ(c.nodes[1].y, 1);
}

TEST(Step, IdentityLeavesConfigurationUnchanged) {
  auto g = build_complete(4);
  Engine<Identity<int>> e(g, {});
  std::vector<int> x{3, 1, 4, 1};
  auto c = e.initial(x);
  auto d = e.step(c);
  EXPECT_EQ(d, c);
  EXPECT_EQ(d.time, 1u);
}

TEST(Step, MessagesArriveOnTheMatchingSlot) {
  auto g = build_labeled_ring(5);
  Engine<PortEcho> e(g, {});
  std::vector<int> x{0, 1, 2, 3, 4};
  auto c = e.step(e.initial(x));
  // Node i's slot k must hold what its k-th neighbor j sent on its port towards i.
  for (NodeId i = 0; i < 5; ++i)
    for (std::size_t k = 0; k < g.degree(i); ++k) {
      const NodeId j = g.links(i)[k].neighbor;
      EXPECT_EQ(c.nodes[i].z[k], x[j] * 100 + *g.port_of(j, i));
    }
}

TEST(Step, ArityMismatchIsFatal) {
  auto g = build_line(3);
  Engine<WrongArity> e(g, {});
  std::vector<int> x{0, 0, 0};
  EXPECT_THROW(e.step(e.initial(x)), MalformedAutomaton);
}

TEST(Step, RejectsInvalidNetwork) {
  PortLabeledGraph g(2);
  EXPECT_THROW(Engine<Detection>(g, {}), std::invalid_argument);
}

TEST(FixedPoint, ThreeLineDetection) {
  auto g = build_line(3);
  std::vector<int> x{0, 0, 1};
  auto r = run_to_fixed_point(g, Detection{}, std::span<const int>(x));
  ASSERT_EQ(r.status, RunStatus::kFixedPoint);
  EXPECT_LE(r.steps, 4u);
  EXPECT_EQ(r.steps, 3u);
  for (const auto& s : r.final.nodes) EXPECT_EQ(s.y, 1);
}

TEST(FixedPoint, AllZerosIsImmediate) {
  auto g = build_line(3);
  std::vector<int> x{0, 0, 0};
  auto r = run_to_fixed_point(g, Detection{}, std::span<const int>(x));
  EXPECT_EQ(r.status, RunStatus::kFixedPoint);
  EXPECT_EQ(r.steps, 0u);
  for (const auto& s : r.final.nodes) EXPECT_EQ(s.y, 0);
}

TEST(FixedPoint, DetectionMatchesDistanceOracle) {
  // y_i(t) = 1 exactly when some 1 lies at distance < t from i.
  for (std::size_t n = 1; n <= 4; ++n)
    for (const auto& g : connected_graphs(n))
      for (const auto& x : all_inputs(n, 1)) {
        const auto dist = distance_to_ones(g, x);
        auto r = Engine<Detection>(g, {}).run_to_fixed_point(std::span<const int>(x), {}, RunOptions{100, true});
        for (const auto& c : r.trace)
          for (NodeId i = 0; i < n; ++i) ASSERT_EQ(c.nodes[i].y, dist[i] < c.time ? 1 : 0);
      }
}

TEST(FixedPoint, BudgetExceeded) {
  auto g = build_line(6);
  std::vector<int> x{1, 0, 0, 0, 0, 0};
  auto r = Engine<Detection>(g, {}).run_to_fixed_point(std::span<const int>(x), {}, RunOptions{2, false});
  EXPECT_EQ(r.status, RunStatus::kBudgetExceeded);
  EXPECT_FALSE(r.converged());
  EXPECT_EQ(r.final.time, 2u);
}

TEST(FixedPoint, WaitsForTheSchedule) {
  auto g = build_line(3);
  std::vector<int> x{2, 2, 2};
  InputSchedule<int> sched{{10, 1, 5}};
  auto r = Engine<MaxTracking>(g, {}).run_to_fixed_point(std::span<const int>(x), sched, RunOptions{});
  ASSERT_EQ(r.status, RunStatus::kFixedPoint);
  EXPECT_GT(r.steps, 10u);
  for (const auto& s : r.final.nodes) EXPECT_EQ(s.y, 5);
}

TEST(Determinism, IdenticalRunsGiveIdenticalTraces) {
  Rng rng(3);
  auto g = random_connected_graph(7, rng);
  std::vector<int> x{4, 1, 7, 7, 0, 2, 3};
  InputSchedule<int> sched{{3, 2, 1}, {5, 4, 9}};
  Engine<MaxTracking> e(g, {});
  auto a = e.run_to_fixed_point(std::span<const int>(x), sched, RunOptions{1000, true});
  auto b = e.run_to_fixed_point(std::span<const int>(x), sched, RunOptions{1000, true});
  EXPECT_EQ(a.trace, b.trace);
  std::ostringstream sa, sb;
  write_trace_csv(sa, a.trace);
  write_trace_csv(sb, b.trace);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Compose, ProductOfDetectionsMatchesEachRun) {
  auto g = build_line(2);
  std::vector<int> x{1, 0};
  auto single = run_to_fixed_point(g, Detection{}, std::span<const int>(x), {}, RunOptions{100, true});
  auto both = run_to_fixed_point(g, compose(Detection{}, Detection{}), std::span<const int>(x), {},
                                 RunOptions{100, true});
  ASSERT_EQ(both.steps, single.steps);
  for (std::size_t t = 0; t < single.trace.size(); ++t)
    for (NodeId i = 0; i < 2; ++i) {
      EXPECT_EQ(both.trace[t].nodes[i].y.first, single.trace[t].nodes[i].y);
      EXPECT_EQ(both.trace[t].nodes[i].y.second, single.trace[t].nodes[i].y);
    }
}

TEST(Compose, WithIdentityBehavesLikeTheFirstComponent) {
  Rng rng(11);
  auto g = random_connected_graph(6, rng);
  std::vector<int> x{5, 3, 8, 1, 8, 2};
  auto a = run_to_fixed_point(g, MaxTracking{}, std::span<const int>(x), {}, RunOptions{1000, true});
  auto b = run_to_fixed_point(g, compose(MaxTracking{}, Identity<int>{}), std::span<const int>(x), {},
                              RunOptions{1000, true});
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t t = 0; t < a.trace.size(); ++t)
    for (NodeId i = 0; i < 6; ++i) {
      EXPECT_EQ(b.trace[t].nodes[i].z.first, a.trace[t].nodes[i].z);
      for (std::size_t k = 0; k < g.degree(i); ++k) {
        const auto& m = b.trace[t].nodes[i].out[k];
        EXPECT_EQ(m ? m->first : std::nullopt, a.trace[t].nodes[i].out[k]);
      }
    }
}

TEST(Compose, MaxAndMinTrackingSideBySide) {
  auto g = build_line(2);
  std::vector<int> x{1, 4};
  auto r = run_to_fixed_point(g, compose(MaxTracking{}, MinTracking{}), std::span<const int>(x));
  ASSERT_EQ(r.status, RunStatus::kFixedPoint);
  for (const auto& s : r.final.nodes) EXPECT_EQ(s.y, (std::pair<int, int>{4, 1}));
}

TEST(Trace, CsvHasOneRowPerNodeAndTime) {
  auto g = build_line(2);
  std::vector<int> x{0, 1};
  auto r = Engine<Detection>(g, {}).run_to_fixed_point(std::span<const int>(x), {}, RunOptions{100, true});
  std::ostringstream os;
  write_trace_csv(os, r.trace);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,node,x,y,z,out");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, r.trace.size() * 2);
  EXPECT_NE(os.str().find("\n0,1,1,0,0,0\n"), std::string::npos);
}

TEST(Outputs, StableWindowStopRule) {
  auto g = build_line(3);
  std::vector<int> x{0, 0, 1};
  auto r = Engine<Detection>(g, {}).run_until_outputs_stable(std::span<const int>(x), 5, RunOptions{});
  EXPECT_EQ(r.status, RunStatus::kOutputsStable);
  EXPECT_EQ(r.steps, 3u);
  EXPECT_EQ(r.final.time, 8u);
}
