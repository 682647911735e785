#pragma once

#include <charconv>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "anonet/graph.hpp"

namespace anonet {

class GraphParseError : public std::runtime_error {
 public:
  GraphParseError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

inline std::vector<std::string> split_ws(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string tok; in >> tok;) out.push_back(tok);
  return out;
}

template <class Int>
bool parse_int(std::string_view s, Int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Text form:
///   n <count>
///   edge <i> <j> <port-at-i>      (one line per directed edge, ids 0-based)
/// `#` starts a comment. The result is validated; invariant violations are
/// reported against the line of the offending edge.
inline PortLabeledGraph parse_graph(std::string_view text) {
  std::optional<PortLabeledGraph> g;
  std::map<std::pair<NodeId, NodeId>, std::size_t> edge_line;
  std::size_t header_line = 0;
  std::size_t lineno = 0;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok[0] == "n") {
      std::size_t n = 0;
      if (g) throw GraphParseError(lineno, "duplicate header");
      if (tok.size() != 2 || !detail::parse_int(tok[1], n))
        throw GraphParseError(lineno, "expected `n <count>`");
      g.emplace(n);
      header_line = lineno;
    } else if (tok[0] == "edge") {
      if (!g) throw GraphParseError(lineno, "edge before `n` header");
      NodeId i = 0, j = 0;
      Port p = 0;
      if (tok.size() != 4 || !detail::parse_int(tok[1], i) || !detail::parse_int(tok[2], j) ||
          !detail::parse_int(tok[3], p))
        throw GraphParseError(lineno, "expected `edge <i> <j> <port>`");
      if (i >= g->size() || j >= g->size()) throw GraphParseError(lineno, "node id out of range");
      g->add_directed(i, j, p);
      edge_line.emplace(std::pair{i, j}, lineno);
    } else {
      throw GraphParseError(lineno, "unknown directive `" + tok[0] + "`");
    }
  }
  if (!g) throw GraphParseError(lineno, "missing `n` header");
  if (auto v = validate(*g)) {
    std::size_t where = header_line;
    if (v->other) {
      if (auto it = edge_line.find({v->node, *v->other}); it != edge_line.end()) where = it->second;
    } else {
      for (const auto& [e, l] : edge_line)
        if (e.first == v->node) {
          where = l;
          break;
        }
    }
    throw GraphParseError(where, v->describe());
  }
  return *g;
}

/// Canonical text: header, then edges by tail id and port.
inline std::string serialize_graph(const PortLabeledGraph& g) {
  std::ostringstream out;
  out << "n " << g.size() << '\n';
  for (NodeId i = 0; i < g.size(); ++i)
    for (const auto& l : g.links(i)) out << "edge " << i << ' ' << l.neighbor << ' ' << l.port << '\n';
  return out.str();
}

/// `complete:n`, `line:n`, `ring:n`, `ringrep:n:m`, `dumbbell:n`.
inline PortLabeledGraph build_family(std::string_view spec) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (true) {
    auto colon = spec.find(':', start);
    parts.emplace_back(spec.substr(start, colon - start));
    if (colon == std::string_view::npos) break;
    start = colon + 1;
  }
  std::vector<std::size_t> args;
  for (std::size_t k = 1; k < parts.size(); ++k) {
    std::size_t v = 0;
    if (!detail::parse_int(parts[k], v))
      throw std::invalid_argument("bad size in graph family `" + std::string(spec) + "`");
    args.push_back(v);
  }
  const auto& name = parts[0];
  auto need = [&](std::size_t count) {
    if (args.size() != count)
      throw std::invalid_argument("graph family `" + name + "` takes " + std::to_string(count) +
                                  " size argument(s)");
  };
  if (name == "complete") return need(1), build_complete(args[0]);
  if (name == "line") return need(1), build_line(args[0]);
  if (name == "ring") return need(1), build_labeled_ring(args[0]);
  if (name == "ringrep") return need(2), replicate_ring(build_labeled_ring(args[0]), args[1]);
  if (name == "dumbbell") return need(1), build_dumbbell(args[0]);
  throw std::invalid_argument("unknown graph family `" + name + "`");
}

}  // namespace anonet
