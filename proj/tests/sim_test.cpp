#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gts/error.hpp"
#include "gts/sim.hpp"
#include "support.hpp"

using namespace gts;
using namespace gts::testing;

namespace {

SimConfig bounded(std::uint64_t seed = 7) {
  SimConfig c;
  c.seed = seed;
  c.firing_limit = 1000;
  return c;
}

// Chi-square survival function for two degrees of freedom.
double chi2_sf_df2(double x) { return std::exp(-x / 2.0); }

}  // namespace

// Reference values from an independent implementation of the published
// splitmix64 / xoshiro256** / FNV-1a algorithms.
TEST(Rng, SplitmixReference) {
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xe220a8397b1dcdafULL);
}

TEST(Rng, XoshiroReferenceSeed0) {
  Rng r(0);
  EXPECT_EQ(r.next(), 0x99ec5f36cb75f2b4ULL);
  EXPECT_EQ(r.next(), 0xbf6e1f784956452aULL);
  EXPECT_EQ(r.next(), 0x1a5f849d4933e6e0ULL);
}

TEST(Rng, XoshiroReferenceSeed42) {
  Rng r(42);
  EXPECT_EQ(r.next(), 0x15780b2e0c2ec716ULL);
  EXPECT_EQ(r.next(), 0x6104d9866d113a7eULL);
  EXPECT_EQ(r.next(), 0xae17533239e499a1ULL);
}

TEST(Rng, FnvReference) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ULL);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cULL);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ULL);
  EXPECT_EQ(hex64(0xabcULL), "0000000000000abc");
}

TEST(Rng, MixSeedIsOrderSensitive) {
  EXPECT_NE(mix_seed(1, "ab"), mix_seed(1, "ba"));
  EXPECT_NE(mix_seed(1, "ab"), mix_seed(2, "ab"));
  EXPECT_EQ(mix_seed(1, "ab"), mix_seed(1, "ab"));
}

TEST(Rng, UniformAndBelowStayInRange) {
  Rng r(3);
  for (int i = 0; i < 10000; ++i) {
    double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    ASSERT_LT(r.below(7), 7u);
  }
}

TEST(Rng, DelayMomentsMatchParameters) {
  Rng r(11);
  const int n = 20000;
  auto mean_of = [&](const DelaySpec& d) {
    double s = 0;
    for (int i = 0; i < n; ++i) s += r.sample(d);
    return s / n;
  };
  EXPECT_NEAR(mean_of(DelaySpec::constant(5)), 5.0, 1e-12);
  EXPECT_NEAR(mean_of(DelaySpec::exponential(0.5)), 2.0, 0.1);
  EXPECT_NEAR(mean_of(DelaySpec::uniform(10, 20)), 15.0, 0.1);
  EXPECT_NEAR(mean_of(DelaySpec::normal(100, 25)), 100.0, 0.2);
  // Pareto with shape 3 has mean scale * 3 / 2.
  EXPECT_NEAR(mean_of(DelaySpec::pareto(2, 3)), 3.0, 0.1);
}

TEST(Rng, DelaysAreClampedAtZero) {
  Rng r(5);
  for (int i = 0; i < 2000; ++i) ASSERT_GE(r.sample(DelaySpec::normal(0, 100)), 0.0);
}

TEST(Sampling, IndexFrequenciesPassChiSquare) {
  Rng r(2024);
  const std::vector<double> w{1, 1, 2};
  std::vector<double> count(3, 0);
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++count[sample_index(w, r)];
  double chi2 = 0;
  for (std::size_t i = 0; i < 3; ++i) {
    double expected = n * w[i] / 4.0;
    chi2 += (count[i] - expected) * (count[i] - expected) / expected;
  }
  EXPECT_GT(chi2_sf_df2(chi2), 0.001);
}

TEST(Sampling, ZeroWeightNeverChosen) {
  Rng r(1);
  for (int i = 0; i < 1000; ++i) ASSERT_NE(sample_index({1, 0, 1}, r), 1u);
  EXPECT_THROW(sample_index({0, 0}, r), Error);
  EXPECT_THROW(sample_index({}, r), Error);
}

TEST(Sampling, TransitionChosenBeforeBinding) {
  // Three bindings of "a" against one of "b": equal transition weights still
  // split the draws evenly between the two transitions.
  std::vector<Firing> enabled;
  for (const char* x : {"1", "2", "3"}) enabled.push_back({"a", Binding{{{"x", x}}, {}}});
  enabled.push_back({"b", Binding{{{"x", "4"}}, {}}});
  Rng r(9);
  int a = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) a += sample_firing(enabled, [](const std::string&, double) { return 1.0; }, 0, r).transition == "a";
  EXPECT_NEAR(a / double(n), 0.5, 3 * std::sqrt(0.25 / n));
}

TEST(Config, JsonRoundTrip) {
  SimConfig c = bounded();
  c.weights["serve"] = {{0, 1}, {100, 2.5}};
  c.deviation_weight = 0.3;
  c.delays["serve"] = DelaySpec::normal(10, 4);
  c.delays["serve->p_busy"] = DelaySpec::pareto(1, 2);
  c.default_delay = DelaySpec::exponential(0.1);
  c.arrivals.push_back({"customer", "p_new", DelaySpec::uniform(1, 2), 5, 3});
  c.schedules.push_back({"p_idle", "s9", 10, 50});
  c.time_horizon = 1e5;
  EXPECT_EQ(sim_config_from_json(to_json(c)), c);
  EXPECT_EQ(config_digest(sim_config_from_json(to_json(c))), config_digest(c));
}

TEST(Config, RejectsBadDelays) {
  EXPECT_THROW(delay_from_json({{"kind", "gamma"}}), ConfigInvalid);
  EXPECT_THROW(delay_from_json({{"kind", "exponential"}, {"rate", 0}}), ConfigInvalid);
  auto j = to_json(bounded());
  j["schema_version"] = 99;
  EXPECT_THROW(sim_config_from_json(j), SchemaVersionMismatch);
}

TEST(Config, ValidationDiagnostics) {
  const Net n = service_net();
  SimConfig c;
  auto codes = [&] {
    std::set<std::string> out;
    for (const auto& d : validate_config(n, c)) out.insert(d.code);
    return out;
  };
  EXPECT_EQ(codes(), std::set<std::string>{"NoTermination"});
  c.firing_limit = 10;
  c.weights["nope"] = {{0, 1}};
  c.weights["serve"] = {{5, 1}, {5, -1}};
  c.delays["serve->p_nowhere"] = DelaySpec::constant(1);
  EXPECT_EQ(codes(), (std::set<std::string>{"UnresolvedElement", "NegativeWeight", "UnsortedWeights"}));
  EXPECT_THROW(run(n, c), ConfigInvalid);

  SimConfig shared = bounded();
  shared.weights["tau_skip-serve#a9"] = {{0, 0.5}};
  shared.delays["tau_skip-serve#a9->p_done"] = DelaySpec::constant(1);
  EXPECT_TRUE(validate_config(n, shared).empty());
}

TEST(Run, DeadlockAfterAllCustomersServed) {
  const Net n = service_net(3, 1);
  auto t = run(n, bounded());
  EXPECT_EQ(t.meta.termination, "deadlock");
  EXPECT_EQ(t.firings.size(), 9u);
  for (const auto& f : t.firings) EXPECT_TRUE(f.label.has_value());
}

TEST(Run, FiringLimitStopsEarly) {
  SimConfig c = bounded();
  c.firing_limit = 4;
  auto t = run(service_net(3, 1), c);
  EXPECT_EQ(t.meta.termination, "firing_limit");
  EXPECT_EQ(t.firings.size(), 4u);
}

TEST(Run, FinalMarkingStops) {
  Net n = service_net(1, 1);
  Marking fin;
  fin.add("p_done", {"c1"});
  fin.add("p_idle", {"s1"});
  n.final_marking = fin;
  SimConfig c;
  auto t = run(n, c);
  EXPECT_EQ(t.meta.termination, "final_marking");
  EXPECT_EQ(t.firings.size(), 3u);
}

TEST(Run, TimeHorizonStops) {
  SimConfig c = bounded();
  c.delays["serve"] = DelaySpec::constant(100);
  c.time_horizon = 150;
  auto t = run(service_net(3, 1), c);
  EXPECT_EQ(t.meta.termination, "time_horizon");
  EXPECT_LE(t.meta.end_time, 150.0);
}

TEST(Run, ConstantDelaysSerializeTheServer) {
  SimConfig c = bounded();
  c.delays["serve"] = DelaySpec::constant(100);
  auto t = run(service_net(3, 1), c);
  std::vector<double> finishes;
  for (const auto& f : t.firings)
    if (f.transition == "finish") finishes.push_back(f.time);
  EXPECT_EQ(finishes, (std::vector<double>{100, 200, 300}));
}

TEST(Run, SameSeedSameTrace) {
  SimConfig c = bounded(17);
  c.delays["serve"] = DelaySpec::exponential(0.01);
  c.arrivals.push_back({"customer", "p_new", DelaySpec::exponential(0.02), 20, 0});
  const Net n = service_net(0, 2);
  EXPECT_EQ(run(n, c), run(n, c));
  SimConfig other = c;
  other.seed = 18;
  EXPECT_NE(run(n, c).firings, run(n, other).firings);
}

TEST(Run, EveryTraceReplays) {
  const Net n = service_net(0, 2);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig c = bounded(seed);
    c.delays["serve"] = DelaySpec::exponential(0.01);
    c.arrivals.push_back({"customer", "p_new", DelaySpec::exponential(0.02), 8, 0});
    c.schedules.push_back({"p_idle", "s7", 50, 400});
    auto t = run(n, c);
    ASSERT_TRUE(replay(n, t.steps())) << "seed " << seed;
    for (std::size_t i = 1; i < t.firings.size(); ++i) ASSERT_LE(t.firings[i - 1].time, t.firings[i].time);
  }
}

TEST(Run, ArrivalsAreEnvironmentSteps) {
  SimConfig c = bounded();
  c.arrivals.push_back({"customer", "p_new", DelaySpec::constant(10), 4, 5});
  auto t = run(service_net(0, 1), c);
  ASSERT_EQ(t.environment.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_DOUBLE_EQ(t.environment[i].time, 5.0 + 10.0 * i);
    EXPECT_EQ(t.environment[i].step.token.place, "p_new");
  }
  EXPECT_EQ(t.firings.size(), 12u);
}

TEST(Run, ScheduledResourceLeavesWhenIdle) {
  SimConfig c = bounded();
  c.delays["serve"] = DelaySpec::constant(100);
  c.schedules.push_back({"p_idle", "s1", 0, 50});
  auto t = run(service_net(2, 0), c);
  // s1 starts serving at 0, is removed after finishing at 100.
  ASSERT_EQ(t.environment.size(), 2u);
  EXPECT_EQ(t.environment[1].step.kind, EnvironmentStep::Kind::remove);
  EXPECT_DOUBLE_EQ(t.environment[1].time, 100.0);
  EXPECT_EQ(t.meta.termination, "deadlock");
  EXPECT_EQ(t.firings.size(), 4u);  // two orders, one serve, one finish
}

TEST(Run, WeightPiecesGateTransitionsInTime) {
  SimConfig c = bounded();
  c.weights["serve"] = {{0, 0}, {500, 1}};
  auto t = run(service_net(1, 1), c);
  for (const auto& f : t.firings)
    if (f.transition == "serve") EXPECT_DOUBLE_EQ(f.time, 500.0);
}

TEST(Run, WeightHookMultiplies) {
  RunOptions opts;
  opts.weight_hook = [](const std::string& t, double, const Marking&) { return t == "finish" ? 0.0 : 1.0; };
  auto t = run(service_net(2, 2), bounded(), opts);
  for (const auto& f : t.firings) EXPECT_NE(f.transition, "finish");
  EXPECT_EQ(t.meta.termination, "deadlock");
}

TEST(Run, CoarsenedTimestampsAreFloored) {
  Net n = service_net(1, 1);
  TimingOverride o;
  o.kind = TimingOverride::Kind::coarsen_timestamps;
  o.application_id = "c1";
  o.pattern_code = "RI_gr^t";
  o.transitions = {"finish"};
  o.window = 3600;
  n.annotations.timing_overrides.push_back(o);
  SimConfig c = bounded();
  c.delays["serve"] = DelaySpec::constant(5000);
  auto t = run(n, c);
  const auto& fin = t.firings.back();
  ASSERT_EQ(fin.transition, "finish");
  EXPECT_DOUBLE_EQ(fin.time, 5000.0);
  EXPECT_DOUBLE_EQ(fin.recorded_time, 3600.0);
  EXPECT_EQ(fin.tags, std::vector<std::string>{"c1"});
  EXPECT_EQ(t.meta.timing_patterns.at("c1"), "RI_gr^t");
}

TEST(Run, LongDurationReplacesDelay) {
  Net n = service_net(1, 1);
  TimingOverride o;
  o.kind = TimingOverride::Kind::long_duration;
  o.application_id = "l1";
  o.pattern_code = "BI_11";
  o.transitions = {"serve"};
  o.probability = 1.0;
  o.delay = DelaySpec::constant(9999);
  n.annotations.timing_overrides.push_back(o);
  SimConfig c = bounded();
  c.delays["serve"] = DelaySpec::constant(1);
  auto t = run(n, c);
  EXPECT_DOUBLE_EQ(t.firings.back().time, 9999.0);
  EXPECT_EQ(t.firings[1].tags, std::vector<std::string>{"l1"});
}

TEST(Run, ObserverSeesChosenAmongEnabled) {
  RunOptions opts;
  std::size_t calls = 0;
  opts.observer = [&](const std::vector<std::string>& enabled, const std::string& chosen) {
    ++calls;
    EXPECT_NE(std::find(enabled.begin(), enabled.end(), chosen), enabled.end());
  };
  auto t = run(service_net(2, 1), bounded(), opts);
  EXPECT_EQ(calls, t.firings.size());
}
