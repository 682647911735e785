#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "anonet/enumerate.hpp"
#include "anonet/exact_frequency.hpp"
#include "anonet/program.hpp"
#include "anonet/spec_parser.hpp"

using namespace anonet;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(ANONET_SPECS_DIR) + "/" + name);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Share of ones in x, reduced.
Rational share_of_ones(const std::vector<int>& x) {
  std::int64_t ones = 0;
  for (int v : x) ones += v == 1;
  return Rational(ones, static_cast<std::int64_t>(x.size()));
}

}  // namespace

TEST(Program, MajorityOnCompleteFour) {
  auto prog = compile(parse_spec(slurp("majority.spec")));
  auto g = build_complete(4);
  std::vector<int> x{1, 1, 0, 0};
  auto r = run_to_fixed_point(g, ProgramAutomaton(prog), std::span<const int>(x));
  ASSERT_EQ(r.status, RunStatus::kFixedPoint);
  for (const auto& s : r.final.nodes) {
    EXPECT_TRUE(s.y.settled);
    EXPECT_EQ(s.y.label, std::optional<std::string>("yes"));
  }
}

TEST(Program, InstanceInputsAreEncoded) {
  auto prog = compile(parse_spec(slurp("majority.spec")));
  EXPECT_EQ(instance_inputs(prog, 0, {1, 0, 1}), (std::vector<int>{2, 0, 2}));
}

TEST(Program, EveryInstanceKeepsItsInvariants) {
  auto spec = parse_spec(slurp("second_of_4.spec"));
  auto prog = compile(spec);
  Rng rng(17);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = 2 + rng.uniform(0, 5);
    auto g = random_connected_graph(n, rng);
    std::vector<int> x(n);
    for (auto& v : x) v = static_cast<int>(rng.uniform(0, 3));
    std::vector<AveragingInvariants> inv;
    for (std::size_t i = 0; i < prog.instances.size(); ++i) inv.emplace_back(g, instance_inputs(prog, i, x));
    auto r = Engine<ProgramAutomaton>(g, ProgramAutomaton(prog))
                 .run_to_fixed_point(std::span<const int>(x), {}, RunOptions{200000, false}, [&](const auto& c) {
                   for (std::size_t i = 0; i < inv.size(); ++i) inv[i].observe(instance_snapshot(c, i));
                 });
    ASSERT_EQ(r.status, RunStatus::kFixedPoint);
    for (const auto& v : inv) ASSERT_TRUE(v.ok()) << v.violations().front();
    for (const auto& s : r.final.nodes) ASSERT_EQ(s.y.label, evaluate_reference(spec, x));
  }
}

TEST(Program, UnsettledOutputHasNoLabel) {
  auto prog = compile(parse_spec(slurp("majority.spec")));
  ProgramAutomaton a(prog);
  std::vector<AveragingState> z{averaging_initial(2)};
  z[0].max.estimate = 5;
  auto y = a.output(z);
  EXPECT_FALSE(y.settled);
  EXPECT_FALSE(y.label);
  EXPECT_EQ(render(y).substr(0, 1), "?");
}

TEST(Schedule, BlocksGrowThenCycle) {
  std::vector<std::size_t> got;
  for (std::size_t t = 0; t < 12; ++t) got.push_back(scheduled_instance(t, 3));
  EXPECT_EQ(got, (std::vector<std::size_t>{1, 1, 2, 1, 2, 3, 1, 2, 3, 1, 2, 3}));
  EXPECT_EQ(scheduled_instance(100, 1), 1u);
}

TEST(ExactFrequency, RecoversTheShareOfOnes) {
  for (std::size_t n = 1; n <= 4; ++n)
    for (const auto& g : connected_graphs(n))
      for (const auto& x : all_inputs(n, 1)) {
        ExactFrequencyAutomaton a{1, 2 * n};
        auto r = Engine<ExactFrequencyAutomaton>(g, a).run_until_outputs_stable(
            std::span<const int>(x), default_window(n, 2 * n), RunOptions{1'000'000, false});
        ASSERT_EQ(r.status, RunStatus::kOutputsStable);
        for (const auto& s : r.final.nodes) {
          ASSERT_TRUE(s.y.value);
          ASSERT_EQ(*s.y.value, share_of_ones(x));
        }
      }
}

TEST(ExactFrequency, LineOfFour) {
  auto g = build_line(4);
  std::vector<int> x{1, 0, 1, 0};
  auto r = Engine<ExactFrequencyAutomaton>(g, {1, 8})
               .run_until_outputs_stable(std::span<const int>(x), default_window(4, 8), RunOptions{1'000'000, false});
  for (const auto& s : r.final.nodes) EXPECT_EQ(render(s.y), "1/2");
}
