// anonet: simulate anonymous port-labeled networks.
//
// Exit status: 0 ok, 1 usage error, 2 invariant violation, 3 step budget
// exhausted.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "anonet/averaging.hpp"
#include "anonet/detection.hpp"
#include "anonet/exact_frequency.hpp"
#include "anonet/experiment.hpp"
#include "anonet/graph_io.hpp"
#include "anonet/program.hpp"
#include "anonet/spec_parser.hpp"
#include "anonet/tracking.hpp"

namespace {

using namespace anonet;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;
constexpr int kBudget = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// A file path, or a family such as `complete:5`.
PortLabeledGraph load_graph(const std::string& arg) {
  if (std::filesystem::exists(arg)) return parse_graph(slurp(arg));
  try {
    return build_family(arg);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
}

/// Writes to `path`, or stdout when empty.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw UsageError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

 private:
  std::ofstream file_;
};

template <class A>
void dump_trace(const std::string& path, const std::vector<Configuration<A>>& trace) {
  if (path.empty()) return;
  Sink sink(path);
  write_trace_csv(sink.stream(), trace);
}

std::vector<std::size_t> parse_sizes(const std::string& s) {
  std::vector<std::size_t> out;
  if (std::count(s.begin(), s.end(), ':') == 2) {
    std::size_t lo = 0, hi = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(s);
    if (!(in >> lo >> c1 >> hi >> c2 >> step) || step == 0) throw UsageError("expected --sizes lo:hi:step");
    for (std::size_t n = lo; n <= hi; n += step) out.push_back(n);
    return out;
  }
  std::istringstream in(s);
  for (std::string tok; std::getline(in, tok, ',');) out.push_back(std::stoul(tok));
  return out;
}

struct Common {
  std::string graph;
  std::string inputs;
  std::uint64_t seed = 1;
  std::size_t max_steps = 1'000'000;
  std::string trace;
  std::string out;
};

int cmd_gen(const Common& c) {
  const auto g = load_graph(c.graph);
  Sink sink(c.out);
  sink.stream() << serialize_graph(g);
  return kOk;
}

int cmd_validate(const Common& c) {
  try {
    const auto g = load_graph(c.graph);
    std::cout << "ok: " << g.size() << " nodes, " << g.edge_count() << " edges\n";
    return kOk;
  } catch (const GraphParseError& e) {
    std::cout << "violation: " << e.what() << '\n';
    return kViolation;
  }
}

template <class A>
int run_plain(const PortLabeledGraph& g, A a, const std::vector<int>& x, const Common& c) {
  auto r = Engine<A>(g, a).run_to_fixed_point(std::span<const int>(x), {},
                                              RunOptions{c.max_steps, !c.trace.empty()});
  dump_trace(c.trace, r.trace);
  Sink sink(c.out);
  sink.stream() << "status,steps,outputs\n" << to_string(r.status) << ',' << r.steps << ',';
  for (std::size_t i = 0; i < r.final.nodes.size(); ++i) sink.stream() << (i ? " " : "") << render(r.final.nodes[i].y);
  sink.stream() << '\n';
  return r.converged() ? kOk : kBudget;
}

int cmd_run(const Common& c, const std::string& algo, int skew) {
  const auto g = load_graph(c.graph);
  const auto x = make_inputs(c.inputs, g.size(), c.seed);
  if (algo == "detect") return run_plain(g, Detection{}, x, c);
  if (algo == "maxtrack") return run_plain(g, MaxTracking{}, x, c);
  if (algo == "mintrack") return run_plain(g, MinTracking{}, x, c);
  if (algo != "avg") throw UsageError("unknown --algo " + algo);

  std::vector<Configuration<AveragingAutomaton>> trace;
  const auto r = run_averaging(g, c.graph, x, c.seed, RunOptions{c.max_steps, false}, AveragingParams{skew},
                               c.trace.empty() ? nullptr : &trace);
  dump_trace(c.trace, trace);
  Sink sink(c.out);
  write_csv_preamble(sink.stream(), c.seed);
  sink.stream() << summary_header() << '\n';
  write_summary_row(sink.stream(), r);
  for (const auto& v : r.violations) std::cerr << "violation: " << v << '\n';
  if (!r.violations.empty()) return kViolation;
  return r.status == RunStatus::kBudgetExceeded ? kBudget : kOk;
}

int cmd_sweep(const SweepConfig& cfg, const std::string& out, const std::string& aggregate_path) {
  const auto result = sweep(cfg);
  {
    Sink sink(out);
    write_csv_preamble(sink.stream(), cfg.seed);
    sink.stream() << summary_header() << '\n';
    for (const auto& r : result.rows) write_summary_row(sink.stream(), r);
  }
  {
    Sink sink(aggregate_path.empty() ? std::string() : aggregate_path);
    if (aggregate_path.empty()) std::cout << '\n';
    write_csv_preamble(sink.stream(), cfg.seed);
    write_aggregate_csv(sink.stream(), result.points);
  }
  if (result.points.size() >= 2) std::cerr << "log-log slope of mean steps: " << loglog_slope(result.points) << '\n';
  bool budget = false, violation = false;
  for (const auto& r : result.rows) {
    violation = violation || !r.violations.empty();
    budget = budget || r.status == RunStatus::kBudgetExceeded;
  }
  return violation ? kViolation : budget ? kBudget : kOk;
}

int cmd_check(const CheckConfig& cfg, const std::string& out) {
  const auto rep = check_exhaustive(cfg);
  Sink sink(out);
  auto& os = sink.stream();
  os << "graphs " << rep.graphs << "\nruns " << rep.runs << "\nfailures " << rep.failures << "\nmax_steps "
     << rep.max_steps << "\nworst_steps_over_bound " << rep.worst_bound_ratio << "\nworst_tail_answer_delay "
     << rep.worst_tail_delay << "\nworst_originator_answer_delay " << rep.worst_origin_delay << '\n';
  if (rep.first_failure) os << "# first failing instance\n" << *rep.first_failure;
  return rep.ok() ? kOk : kViolation;
}

int cmd_compile(const Common& c, const std::string& spec_path) {
  const auto spec = parse_spec(slurp(spec_path));
  const auto prog = compile(spec);
  Sink sink(c.out);
  auto& os = sink.stream();
  os << "# letters " << prog.letters << ", " << prog.instances.size() << " averaging instance(s)\n";
  for (std::size_t i = 0; i < prog.instances.size(); ++i) {
    const auto& ci = prog.instances[i];
    os << "instance " << i << ": " << render(prog.sources[i]) << "  beta=[";
    for (std::size_t k = 0; k < ci.beta.size(); ++k) os << (k ? " " : "") << (ci.in_p[k] ? "" : "~") << ci.beta[k];
    os << "] q*=" << ci.threshold << " K'=" << ci.range << (ci.strict ? " strict" : "") << '\n';
  }
  os << "# decision table\n";
  for (const auto& [truth, label] : prog.decision_table()) {
    for (bool b : truth) os << (b ? '1' : '0');
    os << " -> " << (label ? *label : "undefined") << '\n';
  }
  if (c.graph.empty()) return kOk;

  const auto g = load_graph(c.graph);
  const auto x = make_inputs(c.inputs, g.size(), c.seed);
  const auto r = Engine<ProgramAutomaton>(g, ProgramAutomaton(prog))
                     .run_to_fixed_point(std::span<const int>(x), {}, RunOptions{c.max_steps, !c.trace.empty()});
  dump_trace(c.trace, r.trace);
  const auto reference = evaluate_reference(spec, x);
  os << "# run: " << to_string(r.status) << " after " << r.steps << " steps\n";
  bool agree = r.converged();
  for (std::size_t i = 0; i < r.final.nodes.size(); ++i) {
    const auto& y = r.final.nodes[i].y;
    os << "node " << i << ": " << render(y) << '\n';
    agree = agree && y.settled && y.label == reference;
  }
  os << "reference: " << (reference ? *reference : "undefined") << '\n';
  if (!r.converged()) return kBudget;
  return agree ? kOk : kViolation;
}

int cmd_exactfreq(const Common& c, int target, std::size_t m_max, std::size_t window) {
  const auto g = load_graph(c.graph);
  const auto x = make_inputs(c.inputs, g.size(), c.seed);
  if (m_max == 0) m_max = 2 * g.size();
  if (window == 0) window = default_window(g.size(), m_max);
  ExactFrequencyAutomaton a;
  a.target = target;
  a.m_max = m_max;
  const auto r = Engine<ExactFrequencyAutomaton>(g, a).run_until_outputs_stable(
      std::span<const int>(x), window, RunOptions{c.max_steps, !c.trace.empty()});
  dump_trace(c.trace, r.trace);
  Sink sink(c.out);
  auto& os = sink.stream();
  os << "status,settled_at,window,m_max,estimate\n"
     << to_string(r.status) << ',' << r.steps << ',' << window << ',' << m_max << ','
     << render(r.final.nodes.front().y) << '\n';
  if (!r.converged()) return kBudget;
  for (const auto& s : r.final.nodes)
    if (!s.y.value) {
      std::cerr << "no instance up to m_max=" << m_max << " produced a singleton\n";
      return kBudget;
    }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deterministic simulation of anonymous port-labeled networks"};
  app.require_subcommand(1);

  Common common;
  auto add_graph = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--graph", common.graph, "graph file or family:n (complete, line, ring, ringrep:n:m, dumbbell)");
    if (required) opt->required();
  };
  auto add_run_flags = [&](CLI::App* sub) {
    sub->add_option("--inputs", common.inputs, "a,b,c | uniform:lo:hi | dumbbell")->required();
    sub->add_option("--seed", common.seed, "seed for sampled inputs");
    sub->add_option("--max-steps", common.max_steps, "step budget");
    sub->add_option("--trace", common.trace, "write a per-slot trace CSV here");
  };

  auto* gen = app.add_subcommand("gen", "print a graph in text form");
  add_graph(gen, true);
  gen->add_option("--out", common.out);

  auto* val = app.add_subcommand("validate", "check a graph file");
  add_graph(val, true);

  std::string algo = "avg";
  int skew = 0;
  auto* run = app.add_subcommand("run", "run one instance to its fixed point");
  add_graph(run, true);
  add_run_flags(run);
  run->add_option("--algo", algo, "avg | detect | maxtrack | mintrack");
  run->add_option("--out", common.out, "summary CSV (default stdout)");
  run->add_option("--acceptance-skew", skew, "corrupt accepted amounts (fault injection)")->group("");

  SweepConfig sweep_cfg;
  std::string sizes = "10:60:10", aggregate_path;
  auto* sw = app.add_subcommand("sweep", "many runs per size; per-run and aggregate CSV");
  sw->add_option("--family", sweep_cfg.family, "complete | line | ring | dumbbell");
  sw->add_option("--sizes", sizes, "lo:hi:step or a comma list");
  sw->add_option("--runs", sweep_cfg.runs, "runs per size")->check(CLI::PositiveNumber);
  sw->add_option("--inputs", sweep_cfg.inputs, "uniform:lo:hi | dumbbell | a,b,...");
  sw->add_option("--seed", sweep_cfg.seed);
  sw->add_option("--max-steps", sweep_cfg.max_steps);
  sw->add_option("--out", common.out, "per-run CSV (default stdout)");
  sw->add_option("--aggregate", aggregate_path, "aggregate CSV (default stdout)");

  CheckConfig check_cfg;
  auto* chk = app.add_subcommand("check", "exhaustive invariant check on small networks");
  chk->add_option("--max-n", check_cfg.max_n);
  chk->add_option("--max-k", check_cfg.max_k);
  chk->add_option("--acceptance-skew", check_cfg.params.acceptance_skew)->group("");
  chk->add_option("--out", common.out);

  std::string spec_path;
  auto* cmp = app.add_subcommand("compile", "compile a frequency spec; optionally run it");
  cmp->add_option("--spec", spec_path)->required();
  add_graph(cmp, false);
  cmp->add_option("--inputs", common.inputs);
  cmp->add_option("--seed", common.seed);
  cmp->add_option("--max-steps", common.max_steps);
  cmp->add_option("--trace", common.trace);
  cmp->add_option("--out", common.out);

  int target = 1;
  std::size_t m_max = 0, window = 0;
  auto* ef = app.add_subcommand("exactfreq", "recover the exact share of nodes holding --target");
  add_graph(ef, true);
  add_run_flags(ef);
  ef->add_option("--target", target);
  ef->add_option("--m-max", m_max, "largest instance (default 2n)");
  ef->add_option("--window", window, "output-stability window (default 4n*m_max)");
  ef->add_option("--out", common.out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen) return cmd_gen(common);
    if (*val) return cmd_validate(common);
    if (*run) return cmd_run(common, algo, skew);
    if (*sw) {
      sweep_cfg.sizes = parse_sizes(sizes);
      return cmd_sweep(sweep_cfg, common.out, aggregate_path);
    }
    if (*chk) return cmd_check(check_cfg, common.out);
    if (*cmp) {
      if (!common.graph.empty() && common.inputs.empty()) throw UsageError("--graph needs --inputs");
      return cmd_compile(common, spec_path);
    }
    if (*ef) return cmd_exactfreq(common, target, m_max, window);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const GraphParseError& e) {
    std::cerr << "graph: " << e.what() << '\n';
    return kUsage;
  } catch (const SpecParseError& e) {
    const bool out_of_class = e.kind() == SpecParseError::Kind::kOutOfClass;
    std::cerr << "spec: " << e.what() << (out_of_class ? " (out of class)" : "") << '\n';
    return kUsage;
  } catch (const SpecError& e) {
    std::cerr << "spec: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ProtocolViolation& e) {
    std::cerr << "violation: " << e.what() << '\n';
    return kViolation;
  }
  return kUsage;
}
