#pragma once

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <utility>
#include <vector>

#include "anonet/graph.hpp"
#include "anonet/rng.hpp"

namespace anonet {

/// Every connected graph on n labeled nodes (every connected edge subset of
/// K_n), ports numbered by neighbor id. Distinct labelings of one shape give
/// distinct port assignments, so this also varies the ports.
inline std::vector<PortLabeledGraph> connected_graphs(std::size_t n) {
  std::vector<std::pair<NodeId, NodeId>> all;
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b) all.emplace_back(a, b);
  std::vector<PortLabeledGraph> out;
  const std::size_t subsets = std::size_t{1} << all.size();
  for (std::size_t mask = 0; mask < subsets; ++mask) {
    std::vector<std::pair<NodeId, NodeId>> edges;
    for (std::size_t e = 0; e < all.size(); ++e)
      if (mask >> e & 1) edges.push_back(all[e]);
    if (n > 1 && edges.size() + 1 < n) continue;
    auto g = from_edges(n, edges);
    if (!validate(g)) out.push_back(std::move(g));
  }
  return out;
}

/// All vectors over {0..k}^n in lexicographic order.
inline std::vector<std::vector<int>> all_inputs(std::size_t n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> x(n, 0);
  while (true) {
    out.push_back(x);
    std::size_t i = n;
    while (i > 0 && x[i - 1] == k) x[--i] = 0;
    if (i == 0) break;
    ++x[i - 1];
  }
  return out;
}

/// Random spanning tree plus each remaining pair with probability 1/3.
inline PortLabeledGraph random_connected_graph(std::size_t n, Rng& rng) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::vector<std::vector<bool>> has(n, std::vector<bool>(n, false));
  for (NodeId i = 1; i < n; ++i) {
    const auto j = static_cast<NodeId>(rng.uniform(0, static_cast<std::int64_t>(i) - 1));
    edges.emplace_back(j, i);
    has[i][j] = has[j][i] = true;
  }
  for (NodeId a = 0; a < n; ++a)
    for (NodeId b = a + 1; b < n; ++b)
      if (!has[a][b] && rng.uniform(0, 2) == 0) edges.emplace_back(a, b);
  return from_edges(n, edges);
}

/// Random permutation of 0..n-1 (Fisher-Yates).
inline std::vector<NodeId> random_permutation(std::size_t n, Rng& rng) {
  std::vector<NodeId> p(n);
  std::iota(p.begin(), p.end(), NodeId{0});
  for (std::size_t i = n; i > 1; --i)
    std::swap(p[i - 1], p[static_cast<std::size_t>(rng.uniform(0, static_cast<std::int64_t>(i) - 1))]);
  return p;
}

/// The same network with node i renamed pi[i]; every port keeps its label.
inline PortLabeledGraph relabel(const PortLabeledGraph& g, const std::vector<NodeId>& pi) {
  PortLabeledGraph h(g.size());
  for (NodeId i = 0; i < g.size(); ++i)
    for (const auto& l : g.links(i)) h.add_directed(pi[i], pi[l.neighbor], l.port);
  return h;
}

template <class T>
std::vector<T> permute(const std::vector<T>& x, const std::vector<NodeId>& pi) {
  std::vector<T> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) y[pi[i]] = x[i];
  return y;
}

}  // namespace anonet
