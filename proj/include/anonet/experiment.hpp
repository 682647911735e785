#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "anonet/averaging.hpp"
#include "anonet/engine.hpp"
#include "anonet/enumerate.hpp"
#include "anonet/graph.hpp"
#include "anonet/graph_io.hpp"
#include "anonet/rng.hpp"

namespace anonet {

/// `a,b,c` (exactly n values), `uniform:lo:hi`, or `dumbbell` (each node's
/// dumbbell region: 0, 1, 2).
inline std::vector<int> make_inputs(std::string_view spec, std::size_t n, std::uint64_t seed) {
  std::vector<int> x;
  if (spec.rfind("uniform:", 0) == 0) {
    const auto rest = spec.substr(8);
    const auto colon = rest.find(':');
    int lo = 0, hi = 0;
    if (colon == std::string_view::npos || !detail::parse_int(rest.substr(0, colon), lo) ||
        !detail::parse_int(rest.substr(colon + 1), hi) || lo > hi || lo < 0)
      throw std::invalid_argument("expected uniform:<lo>:<hi> with 0 <= lo <= hi");
    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) x.push_back(static_cast<int>(rng.uniform(lo, hi)));
    return x;
  }
  if (spec == "dumbbell") {
    for (NodeId i = 0; i < n; ++i) x.push_back(dumbbell_region(n, i));
    return x;
  }
  std::size_t start = 0;
  while (start <= spec.size()) {
    auto comma = spec.find(',', start);
    if (comma == std::string_view::npos) comma = spec.size();
    int v = 0;
    if (!detail::parse_int(spec.substr(start, comma - start), v) || v < 0)
      throw std::invalid_argument("bad input value in `" + std::string(spec) + "`");
    x.push_back(v);
    start = comma + 1;
  }
  if (x.size() != n)
    throw std::invalid_argument("got " + std::to_string(x.size()) + " inputs for " + std::to_string(n) + " nodes");
  return x;
}

/// splitmix64: derives independent per-run seeds from one sweep seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

struct AveragingReport {
  std::string graph;
  std::size_t n = 0;
  int k = 0;
  std::uint64_t seed = 0;
  RunStatus status = RunStatus::kBudgetExceeded;
  std::size_t steps = 0;
  std::size_t acceptances = 0;
  long long scaled_v_initial = 0;  // n^2 V
  long long scaled_v_final = 0;
  int final_max = 0;
  int final_min = 0;
  std::optional<IntervalOutput> output;  // shared by every node, else empty
  std::vector<std::string> violations;
  std::size_t worst_tail_delay = 0;
  std::size_t worst_origin_delay = 0;

  bool within_bound() const { return static_cast<long long>(steps) <= termination_bound(n, k); }
  bool ok() const { return status == RunStatus::kFixedPoint && violations.empty() && within_bound(); }
  double v_initial() const { return static_cast<double>(scaled_v_initial) / static_cast<double>(n * n); }
  double v_final() const { return static_cast<double>(scaled_v_final) / static_cast<double>(n * n); }
};

/// Runs interval averaging to its fixed point while checking every
/// invariant each slot, then checks the final configuration against the
/// exact average.
inline AveragingReport run_averaging(const PortLabeledGraph& g, const std::string& name, const std::vector<int>& x,
                                     std::uint64_t seed, const RunOptions& opt, const AveragingParams& params = {},
                                     std::vector<Configuration<AveragingAutomaton>>* trace = nullptr) {
  AveragingReport r;
  r.graph = name;
  r.n = g.size();
  r.seed = seed;
  r.k = x.empty() ? 0 : *std::max_element(x.begin(), x.end());
  const long long sum = std::accumulate(x.begin(), x.end(), 0LL);

  Engine<AveragingAutomaton> engine(g, AveragingAutomaton{params});
  AveragingInvariants inv(g, x);
  RunOptions o = opt;
  o.record_trace = trace != nullptr;
  RunResult<AveragingAutomaton> run;
  try {
    run = engine.run_to_fixed_point(std::span<const int>(x), {}, o,
                                    [&](const auto& c) { inv.observe(snapshot(c)); });
  } catch (const ProtocolViolation& e) {
    r.violations.push_back(std::string("protocol violation: ") + e.what());
    for (const auto& v : inv.violations()) r.violations.push_back(v);
    r.status = RunStatus::kBudgetExceeded;
    return r;
  }
  if (trace) *trace = std::move(run.trace);
  r.status = run.status;
  r.steps = run.steps;
  r.violations = inv.violations();
  r.acceptances = inv.acceptances();
  r.scaled_v_initial = inv.initial_scaled_variance();
  r.scaled_v_final = inv.scaled_variance();
  r.worst_tail_delay = inv.worst_tail_delay();
  r.worst_origin_delay = inv.worst_origin_delay();

  const auto& nodes = run.final.nodes;
  r.final_max = std::numeric_limits<int>::min();
  r.final_min = std::numeric_limits<int>::max();
  long long final_sum = 0;
  for (const auto& s : nodes) {
    r.final_max = std::max(r.final_max, s.z.value);
    r.final_min = std::min(r.final_min, s.z.value);
    final_sum += s.z.value;
  }
  r.output = nodes.front().y;
  for (const auto& s : nodes)
    if (!(s.y == *r.output)) r.output.reset();

  if (r.status == RunStatus::kFixedPoint) {
    if (final_sum != sum) r.violations.push_back("final values do not sum to the input sum");
    if (r.final_max - r.final_min > 1) r.violations.push_back("final values differ by more than 1");
    const auto truth = true_interval(sum, static_cast<long long>(r.n));
    for (NodeId i = 0; i < nodes.size(); ++i)
      if (!(nodes[i].y == truth))
        r.violations.push_back("node " + std::to_string(i) + " outputs " + render(nodes[i].y) + ", average is in " +
                               render(truth));
  }
  if (!r.within_bound())
    r.violations.push_back("took " + std::to_string(r.steps) + " steps, bound is " +
                           std::to_string(termination_bound(static_cast<long long>(r.n), r.k)));
  return r;
}

inline const char* summary_header() {
  return "graph,n,K,seed,steps,acceptance_count,V_initial,V_final,final_max,final_min,output_interval,status";
}

inline std::string status_of(const AveragingReport& r) {
  if (!r.violations.empty()) return "violation";
  return to_string(r.status);
}

inline void write_summary_row(std::ostream& os, const AveragingReport& r) {
  std::ostringstream v;
  v << std::fixed << std::setprecision(6) << r.v_initial() << ',' << r.v_final();
  os << r.graph << ',' << r.n << ',' << r.k << ',' << r.seed << ',' << r.steps << ',' << r.acceptances << ','
     << v.str() << ',' << r.final_max << ',' << r.final_min << ',' << (r.output ? render(*r.output) : "mixed") << ','
     << status_of(r) << '\n';
}

/// Comment lines at the top of every CSV this library writes.
inline void write_csv_preamble(std::ostream& os, std::uint64_t seed) {
  os << "# rng=" << kRngName << " seed=" << seed << '\n'
     << "# steps = first time t whose configuration is a fixed point of one synchronous step\n";
}

// ---------------------------------------------------------------------------
// Sweeps

struct SweepConfig {
  std::string family = "complete";
  std::vector<std::size_t> sizes;
  std::size_t runs = 1;
  std::string inputs = "uniform:1:30";
  std::uint64_t seed = 1;
  std::size_t max_steps = 1'000'000;
};

struct SweepPoint {
  std::string family;
  std::size_t n = 0;
  std::size_t runs = 0;
  double mean_steps = 0;
  std::size_t min_steps = 0;
  std::size_t max_steps = 0;
  std::size_t failures = 0;
};

struct SweepResult {
  std::vector<AveragingReport> rows;
  std::vector<SweepPoint> points;
};

/// Mean, min and max steps per size, computed from the rows alone.
inline std::vector<SweepPoint> aggregate(const std::vector<AveragingReport>& rows, const std::string& family) {
  std::vector<SweepPoint> points;
  for (const auto& r : rows) {
    auto it = std::find_if(points.begin(), points.end(), [&](const SweepPoint& p) { return p.n == r.n; });
    if (it == points.end()) {
      points.push_back({family, r.n, 0, 0, r.steps, r.steps, 0});
      it = points.end() - 1;
    }
    ++it->runs;
    it->mean_steps += static_cast<double>(r.steps);
    it->min_steps = std::min(it->min_steps, r.steps);
    it->max_steps = std::max(it->max_steps, r.steps);
    it->failures += !r.ok();
  }
  for (auto& p : points) p.mean_steps /= static_cast<double>(p.runs);
  return points;
}

/// Runs are seeded with derive_seed(seed, index) in (size, run) order, so a
/// row can be replayed on its own from its seed column.
inline SweepResult sweep(const SweepConfig& cfg) {
  SweepResult out;
  std::uint64_t index = 0;
  for (std::size_t n : cfg.sizes) {
    const std::string name = cfg.family + ":" + std::to_string(n);
    const auto g = build_family(name);
    for (std::size_t run = 0; run < cfg.runs; ++run) {
      const auto seed = derive_seed(cfg.seed, index++);
      const auto x = make_inputs(cfg.inputs, n, seed);
      out.rows.push_back(run_averaging(g, name, x, seed, RunOptions{cfg.max_steps, false}));
    }
  }
  out.points = aggregate(out.rows, cfg.family);
  return out;
}

inline void write_aggregate_csv(std::ostream& os, const std::vector<SweepPoint>& points) {
  os << "family,n,runs,mean_steps,min_steps,max_steps,failures\n";
  for (const auto& p : points)
    os << p.family << ',' << p.n << ',' << p.runs << ',' << std::fixed << std::setprecision(3) << p.mean_steps << ','
       << p.min_steps << ',' << p.max_steps << ',' << p.failures << '\n';
}

/// Least-squares slope of log(mean steps) against log(n).
inline double loglog_slope(const std::vector<SweepPoint>& points) {
  double mx = 0, my = 0;
  for (const auto& p : points) {
    mx += std::log(static_cast<double>(p.n));
    my += std::log(p.mean_steps);
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxy = 0, sxx = 0;
  for (const auto& p : points) {
    const double dx = std::log(static_cast<double>(p.n)) - mx;
    sxy += dx * (std::log(p.mean_steps) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Exhaustive check

struct CheckConfig {
  std::size_t max_n = 5;
  int max_k = 2;
  AveragingParams params;
};

struct CheckReport {
  std::size_t graphs = 0;
  std::size_t runs = 0;
  std::size_t failures = 0;
  std::size_t max_steps = 0;
  double worst_bound_ratio = 0;
  std::size_t worst_tail_delay = 0;
  std::size_t worst_origin_delay = 0;
  std::optional<std::string> first_failure;  // graph text, inputs and violations

  bool ok() const { return failures == 0; }
};

/// Every connected graph on up to max_n labeled nodes, every input vector
/// over {0..max_k}. Instances are visited by increasing n, so the first
/// failure recorded is a smallest one.
inline CheckReport check_exhaustive(const CheckConfig& cfg) {
  CheckReport rep;
  for (std::size_t n = 1; n <= cfg.max_n; ++n) {
    const auto graphs = connected_graphs(n);
    const auto inputs = all_inputs(n, cfg.max_k);
    rep.graphs += graphs.size();
    for (const auto& g : graphs)
      for (const auto& x : inputs) {
        const auto r = run_averaging(g, "enumerated", x, 0, RunOptions{100'000, false}, cfg.params);
        ++rep.runs;
        rep.max_steps = std::max(rep.max_steps, r.steps);
        if (r.k > 0)
          rep.worst_bound_ratio = std::max(
              rep.worst_bound_ratio, static_cast<double>(r.steps) / static_cast<double>(termination_bound(r.n, r.k)));
        rep.worst_tail_delay = std::max(rep.worst_tail_delay, r.worst_tail_delay);
        rep.worst_origin_delay = std::max(rep.worst_origin_delay, r.worst_origin_delay);
        if (r.ok()) continue;
        ++rep.failures;
        if (!rep.first_failure) {
          std::ostringstream os;
          os << serialize_graph(g) << "# inputs";
          for (int v : x) os << ' ' << v;
          os << '\n';
          for (const auto& v : r.violations) os << "# " << v << '\n';
          rep.first_failure = os.str();
        }
      }
  }
  return rep;
}

}  // namespace anonet
