#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace anonet {

using NodeId = std::size_t;
using Port = int;

/// One outgoing edge as seen from its tail: the node at the other end and
/// the local port number the tail uses for it.
struct Link {
  NodeId neighbor = 0;
  Port port = 0;

  friend bool operator==(const Link&, const Link&) = default;
};

/// Static network (n, G, L). Node ids exist for the harness only; automata
/// see a node's degree and its sorted port list, nothing else.
///
/// Links at every node are kept sorted by port, so "slot k" of a node means
/// its k-th smallest port. Engines address messages by slot.
class PortLabeledGraph {
 public:
  PortLabeledGraph() = default;
  explicit PortLabeledGraph(std::size_t n) : adjacency_(n) {}

  std::size_t size() const { return adjacency_.size(); }
  std::size_t degree(NodeId i) const { return adjacency_.at(i).size(); }
  std::span<const Link> links(NodeId i) const { return adjacency_.at(i); }

  std::vector<Port> ports(NodeId i) const {
    std::vector<Port> out;
    out.reserve(degree(i));
    for (const auto& l : adjacency_.at(i)) out.push_back(l.port);
    return out;
  }

  /// Adds the single directed edge (i, j) with port p at i. Used by the
  /// parser; builders use connect().
  void add_directed(NodeId i, NodeId j, Port p) {
    if (i >= size() || j >= size()) throw std::out_of_range("node id out of range");
    auto& adj = adjacency_[i];
    auto pos = std::upper_bound(adj.begin(), adj.end(), p,
                                [](Port v, const Link& l) { return v < l.port; });
    adj.insert(pos, Link{j, p});
  }

  void connect(NodeId i, Port port_at_i, NodeId j, Port port_at_j) {
    add_directed(i, j, port_at_i);
    add_directed(j, i, port_at_j);
  }

  /// Slot index at i of the edge leading to j.
  std::optional<std::size_t> slot_of(NodeId i, NodeId j) const {
    const auto& adj = adjacency_.at(i);
    for (std::size_t k = 0; k < adj.size(); ++k)
      if (adj[k].neighbor == j) return k;
    return std::nullopt;
  }

  std::optional<Port> port_of(NodeId i, NodeId j) const {
    if (auto k = slot_of(i, j)) return adjacency_[i][*k].port;
    return std::nullopt;
  }

  std::size_t directed_edge_count() const {
    std::size_t m = 0;
    for (const auto& adj : adjacency_) m += adj.size();
    return m;
  }
  std::size_t edge_count() const { return directed_edge_count() / 2; }

  friend bool operator==(const PortLabeledGraph&, const PortLabeledGraph&) = default;

 private:
  std::vector<std::vector<Link>> adjacency_;
};

enum class ViolationKind {
  kEmpty,
  kSelfLoop,
  kParallelEdge,
  kNotBidirectional,
  kDisconnected,
  kDuplicatePort,
  kPortOutOfRange,
};

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kEmpty: return "empty";
    case ViolationKind::kSelfLoop: return "self-loop";
    case ViolationKind::kParallelEdge: return "parallel edge";
    case ViolationKind::kNotBidirectional: return "not bidirectional";
    case ViolationKind::kDisconnected: return "disconnected";
    case ViolationKind::kDuplicatePort: return "duplicate port";
    case ViolationKind::kPortOutOfRange: return "port out of range";
  }
  return "unknown";
}

struct GraphViolation {
  ViolationKind kind;
  NodeId node = 0;
  std::optional<NodeId> other;  // offending neighbor, for edge-level violations

  std::string describe() const {
    std::string s = to_string(kind);
    s += " at node " + std::to_string(node);
    if (other) s += " (edge to " + std::to_string(*other) + ")";
    return s;
  }
};

/// Returns the first violated invariant, or nullopt when the graph is a valid
/// network. Order of checks: simple-graph structure, bidirectionality,
/// connectivity, port labels.
inline std::optional<GraphViolation> validate(const PortLabeledGraph& g) {
  const std::size_t n = g.size();
  if (n == 0) return GraphViolation{ViolationKind::kEmpty, 0, std::nullopt};

  for (NodeId i = 0; i < n; ++i) {
    std::vector<NodeId> seen;
    for (const auto& l : g.links(i)) {
      if (l.neighbor == i) return GraphViolation{ViolationKind::kSelfLoop, i, i};
      if (std::find(seen.begin(), seen.end(), l.neighbor) != seen.end())
        return GraphViolation{ViolationKind::kParallelEdge, i, l.neighbor};
      seen.push_back(l.neighbor);
    }
  }
  for (NodeId i = 0; i < n; ++i)
    for (const auto& l : g.links(i))
      if (!g.slot_of(l.neighbor, i))
        return GraphViolation{ViolationKind::kNotBidirectional, i, l.neighbor};

  std::vector<bool> reached(n, false);
  std::queue<NodeId> frontier;
  frontier.push(0);
  reached[0] = true;
  while (!frontier.empty()) {
    NodeId i = frontier.front();
    frontier.pop();
    for (const auto& l : g.links(i))
      if (!reached[l.neighbor]) {
        reached[l.neighbor] = true;
        frontier.push(l.neighbor);
      }
  }
  for (NodeId i = 0; i < n; ++i)
    if (!reached[i]) return GraphViolation{ViolationKind::kDisconnected, i, std::nullopt};

  // Ports lie in {0, ..., d(i)}: d(i)+1 admissible values for d(i) edges.
  for (NodeId i = 0; i < n; ++i) {
    const auto links = g.links(i);
    const Port d = static_cast<Port>(links.size());
    for (std::size_t k = 0; k < links.size(); ++k) {
      if (links[k].port < 0 || links[k].port > d)
        return GraphViolation{ViolationKind::kPortOutOfRange, i, links[k].neighbor};
      if (k > 0 && links[k].port == links[k - 1].port)
        return GraphViolation{ViolationKind::kDuplicatePort, i, links[k].neighbor};
    }
  }
  return std::nullopt;
}

/// Builds a graph from undirected edges, numbering each node's ports
/// 0..d-1 in increasing neighbor-id order.
inline PortLabeledGraph from_edges(std::size_t n,
                                   const std::vector<std::pair<NodeId, NodeId>>& edges) {
  std::vector<std::vector<NodeId>> nbrs(n);
  for (auto [a, b] : edges) {
    nbrs.at(a).push_back(b);
    nbrs.at(b).push_back(a);
  }
  PortLabeledGraph g(n);
  for (NodeId i = 0; i < n; ++i) {
    std::sort(nbrs[i].begin(), nbrs[i].end());
    for (std::size_t k = 0; k < nbrs[i].size(); ++k)
      g.add_directed(i, nbrs[i][k], static_cast<Port>(k));
  }
  return g;
}

/// Complete graph; node i labels the edge to j by the rank of (i+j) mod n
/// among its own values, which keeps the edge labeling's order.
inline PortLabeledGraph build_complete(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_complete: n must be >= 1");
  PortLabeledGraph g(n);
  for (NodeId i = 0; i < n; ++i) {
    std::vector<std::pair<std::size_t, NodeId>> keyed;
    for (NodeId j = 0; j < n; ++j)
      if (j != i) keyed.emplace_back((i + j) % n, j);
    std::sort(keyed.begin(), keyed.end());
    for (std::size_t k = 0; k < keyed.size(); ++k)
      g.add_directed(i, keyed[k].second, static_cast<Port>(k));
  }
  return g;
}

/// Path 0-1-...-(n-1). Interior nodes use port 0 leftwards and 1 rightwards;
/// endpoints use port 0.
inline PortLabeledGraph build_line(std::size_t n) {
  if (n == 0) throw std::invalid_argument("build_line: n must be >= 1");
  PortLabeledGraph g(n);
  for (NodeId i = 0; i + 1 < n; ++i) {
    const Port right = (i == 0) ? 0 : 1;
    g.connect(i, right, i + 1, 0);
  }
  return g;
}

/// Label of ring edge e (joining e and e+1 mod n): 0 for the first edge,
/// then alternating 1, 2.
inline Port ring_edge_label(std::size_t e) {
  if (e == 0) return 0;
  return (e % 2 == 1) ? 1 : 2;
}

inline PortLabeledGraph ring_from_labels(const std::vector<Port>& labels) {
  const std::size_t n = labels.size();
  PortLabeledGraph g(n);
  for (NodeId e = 0; e < n; ++e) g.connect(e, labels[e], (e + 1) % n, labels[e]);
  return g;
}

/// Edge-labeled ring: both endpoints use the edge's label as their port.
inline PortLabeledGraph build_labeled_ring(std::size_t n) {
  if (n < 3) throw std::invalid_argument("build_labeled_ring: n must be >= 3");
  std::vector<Port> labels(n);
  for (std::size_t e = 0; e < n; ++e) labels[e] = ring_edge_label(e);
  return ring_from_labels(labels);
}

/// Edge labels of a ring whose edge e joins e and e+1 (mod n) with the same
/// port at both ends.
inline std::vector<Port> ring_labels(const PortLabeledGraph& ring) {
  const std::size_t n = ring.size();
  if (n < 3 || ring.edge_count() != n)
    throw std::invalid_argument("ring_labels: not a ring");
  std::vector<Port> labels(n);
  for (NodeId e = 0; e < n; ++e) {
    auto a = ring.port_of(e, (e + 1) % n);
    auto b = ring.port_of((e + 1) % n, e);
    if (!a || !b || *a != *b)
      throw std::invalid_argument("ring_labels: not an edge-labeled ring");
    labels[e] = *a;
  }
  return labels;
}

/// Ring of m*n nodes repeating the edge labels of `ring` m times; node j
/// plays the role of node j mod n.
inline PortLabeledGraph replicate_ring(const PortLabeledGraph& ring, std::size_t m) {
  if (m == 0) throw std::invalid_argument("replicate_ring: m must be >= 1");
  const auto base = ring_labels(ring);
  std::vector<Port> labels;
  labels.reserve(base.size() * m);
  for (std::size_t r = 0; r < m; ++r) labels.insert(labels.end(), base.begin(), base.end());
  return ring_from_labels(labels);
}

/// Two (n/3)-cliques joined by an (n/3)-node path. The path's ends attach to
/// the smallest id of each clique. Layout: clique A = [0, k), path = [k, 2k),
/// clique B = [2k, 3k).
inline PortLabeledGraph build_dumbbell(std::size_t n) {
  if (n < 9 || n % 3 != 0)
    throw std::invalid_argument("build_dumbbell: n must be a multiple of 3 and >= 9");
  const std::size_t k = n / 3;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t base : {std::size_t{0}, 2 * k})
    for (NodeId a = base; a < base + k; ++a)
      for (NodeId b = a + 1; b < base + k; ++b) edges.emplace_back(a, b);
  for (NodeId p = k; p + 1 < 2 * k; ++p) edges.emplace_back(p, p + 1);
  edges.emplace_back(0, k);
  edges.emplace_back(2 * k - 1, 2 * k);
  return from_edges(n, edges);
}

/// Region of a dumbbell node: 0 for the first clique, 1 for the path, 2 for
/// the second clique.
inline int dumbbell_region(std::size_t n, NodeId i) { return static_cast<int>(i / (n / 3)); }

}  // namespace anonet
