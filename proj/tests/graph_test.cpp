#include <gtest/gtest.h>

#include <set>

#include "anonet/enumerate.hpp"
#include "anonet/graph.hpp"
#include "anonet/graph_io.hpp"

using namespace anonet;

namespace {

// Independent edge count: undirected pairs seen from either side.
std::size_t undirected_edges(const PortLabeledGraph& g) {
  std::set<std::pair<NodeId, NodeId>> e;
  for (NodeId i = 0; i < g.size(); ++i)
    for (const auto& l : g.links(i)) e.insert({std::min(i, l.neighbor), std::max(i, l.neighbor)});
  return e.size();
}

}  // namespace

TEST(Validate, CompleteOnThreeIsValid) {
  auto g = build_complete(3);
  EXPECT_FALSE(validate(g));
  for (NodeId i = 0; i < 3; ++i) EXPECT_EQ(g.ports(i), (std::vector<Port>{0, 1}));
}

TEST(Validate, TwoIsolatedNodesAreDisconnected) {
  PortLabeledGraph g(2);
  auto v = validate(g);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, ViolationKind::kDisconnected);
  EXPECT_EQ(std::string(to_string(v->kind)), "disconnected");
}

TEST(Validate, DuplicatePortIsReported) {
  PortLabeledGraph g(3);
  g.connect(0, 0, 1, 0);
  g.connect(0, 0, 2, 0);
  auto v = validate(g);
  ASSERT_TRUE(v);
  EXPECT_EQ(v->kind, ViolationKind::kDuplicatePort);
  EXPECT_EQ(v->node, 0u);
}

TEST(Validate, OtherViolations) {
  PortLabeledGraph one_way(2);
  one_way.add_directed(0, 1, 0);
  EXPECT_EQ(validate(one_way)->kind, ViolationKind::kNotBidirectional);

  PortLabeledGraph loop(1);
  loop.add_directed(0, 0, 0);
  EXPECT_EQ(validate(loop)->kind, ViolationKind::kSelfLoop);

  PortLabeledGraph big(2);
  big.connect(0, 5, 1, 0);
  auto v = validate(big);
  EXPECT_EQ(v->kind, ViolationKind::kPortOutOfRange);
  EXPECT_EQ(v->other, std::optional<NodeId>(1));

  EXPECT_EQ(validate(PortLabeledGraph{})->kind, ViolationKind::kEmpty);
}

TEST(Validate, PaperRingWithSharedLabels) {
  auto g = ring_from_labels({0, 1, 2, 1, 2});
  EXPECT_FALSE(validate(g));
}

TEST(Builders, Complete) {
  EXPECT_EQ(build_complete(1).degree(0), 0u);
  EXPECT_FALSE(validate(build_complete(1)));
  for (std::size_t n : {3u, 5u, 8u}) {
    auto g = build_complete(n);
    EXPECT_FALSE(validate(g));
    EXPECT_EQ(undirected_edges(g), n * (n - 1) / 2);
    // Port order at i follows (i+j) mod n.
    for (NodeId i = 0; i < n; ++i)
      for (NodeId a = 0; a < n; ++a)
        for (NodeId b = 0; b < n; ++b) {
          if (a != i && b != i && a != b && (i + a) % n < (i + b) % n) {
            EXPECT_LT(*g.port_of(i, a), *g.port_of(i, b));
          }
        }
  }
}

TEST(Builders, Line) {
  EXPECT_EQ(build_line(1).size(), 1u);
  auto two = build_line(2);
  EXPECT_EQ(two.port_of(0, 1), std::optional<Port>(0));
  EXPECT_EQ(two.port_of(1, 0), std::optional<Port>(0));
  auto four = build_line(4);
  EXPECT_FALSE(validate(four));
  EXPECT_EQ(four.port_of(1, 0), std::optional<Port>(0));
  EXPECT_EQ(four.port_of(1, 2), std::optional<Port>(1));
  EXPECT_EQ(four.port_of(3, 2), std::optional<Port>(0));
}

TEST(Builders, LabeledRing) {
  EXPECT_EQ(ring_labels(build_labeled_ring(5)), (std::vector<Port>{0, 1, 2, 1, 2}));
  EXPECT_EQ(ring_labels(build_labeled_ring(3)), (std::vector<Port>{0, 1, 2}));
  auto four = build_labeled_ring(4);
  EXPECT_EQ(ring_labels(four), (std::vector<Port>{0, 1, 2, 1}));
  // Each node sees its two incident labels, which must differ.
  for (NodeId i = 0; i < 4; ++i) {
    auto p = four.ports(i);
    ASSERT_EQ(p.size(), 2u);
    EXPECT_NE(p[0], p[1]);
  }
  EXPECT_EQ(four.ports(0), (std::vector<Port>{0, 1}));  // edges 3 (label 1) and 0 (label 0)
  EXPECT_EQ(four.ports(3), (std::vector<Port>{1, 2}));
  EXPECT_THROW(build_labeled_ring(2), std::invalid_argument);
}

TEST(Builders, ReplicatedRing) {
  auto r = replicate_ring(build_labeled_ring(5), 2);
  EXPECT_EQ(ring_labels(r), (std::vector<Port>{0, 1, 2, 1, 2, 0, 1, 2, 1, 2}));
  EXPECT_EQ(replicate_ring(build_labeled_ring(6), 1), build_labeled_ring(6));
  for (std::size_t n : {3u, 4u, 5u})
    for (std::size_t m : {1u, 2u, 3u}) {
      auto base = build_labeled_ring(n);
      auto g = replicate_ring(base, m);
      EXPECT_FALSE(validate(g));
      EXPECT_EQ(g.size(), m * n);
      EXPECT_EQ(undirected_edges(g), m * n);
      for (NodeId j = 0; j < m * n; ++j)
        EXPECT_EQ(g.port_of(j, (j + 1) % (m * n)), base.port_of(j % n, (j % n + 1) % n));
    }
}

TEST(Builders, Dumbbell) {
  auto g = build_dumbbell(9);
  EXPECT_FALSE(validate(g));
  EXPECT_EQ(undirected_edges(g), 10u);  // two triangles, a 2-edge path, two attachments
  EXPECT_THROW(build_dumbbell(8), std::invalid_argument);
  EXPECT_FALSE(validate(build_dumbbell(18)));
  EXPECT_EQ(dumbbell_region(9, 0), 0);
  EXPECT_EQ(dumbbell_region(9, 4), 1);
  EXPECT_EQ(dumbbell_region(9, 8), 2);
}

TEST(Format, RoundTrip) {
  for (const char* fam : {"complete:5", "line:4", "ring:7", "ringrep:5:2", "dumbbell:12"}) {
    auto g = build_family(fam);
    auto text = serialize_graph(g);
    auto back = parse_graph(text);
    EXPECT_EQ(back, g) << fam;
    EXPECT_EQ(serialize_graph(back), text) << fam;
  }
}

TEST(Format, WhitespaceAndComments) {
  auto g = parse_graph("# two nodes\n  n   2\nedge 0 1 0   # a\n\nedge\t1 0 0\n");
  EXPECT_EQ(serialize_graph(g), "n 2\nedge 0 1 0\nedge 1 0 0\n");
}

TEST(Format, ErrorsAreLocated) {
  try {
    parse_graph("n 3\nedge 0 1 0\nedge 1 0 0\nedge 0 2 0\nedge 2 0 0\n");
    FAIL();
  } catch (const GraphParseError& e) {
    EXPECT_EQ(e.line(), 4u);  // second use of port 0 at node 0
    EXPECT_NE(std::string(e.what()).find("duplicate port"), std::string::npos);
  }
  try {
    parse_graph("n 2\nedge 0 1 0\nfoo\n");
    FAIL();
  } catch (const GraphParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  EXPECT_THROW(parse_graph("edge 0 1 0\n"), GraphParseError);
  EXPECT_THROW(parse_graph("n 2\nedge 0 7 0\n"), GraphParseError);
  EXPECT_THROW(build_family("star:5"), std::invalid_argument);
}

TEST(Enumerate, ConnectedGraphCounts) {
  // Connected labeled graphs on n nodes: 1, 1, 4, 38, 728.
  const std::size_t expected[] = {0, 1, 1, 4, 38, 728};
  for (std::size_t n = 1; n <= 5; ++n) EXPECT_EQ(connected_graphs(n).size(), expected[n]) << n;
  EXPECT_EQ(all_inputs(3, 2).size(), 27u);
}

TEST(Enumerate, RelabelKeepsStructure) {
  Rng rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    auto g = random_connected_graph(7, rng);
    EXPECT_FALSE(validate(g));
    auto pi = random_permutation(7, rng);
    auto h = relabel(g, pi);
    EXPECT_FALSE(validate(h));
    for (NodeId i = 0; i < 7; ++i)
      for (const auto& l : g.links(i)) EXPECT_EQ(h.port_of(pi[i], pi[l.neighbor]), std::optional<Port>(l.port));
  }
}
