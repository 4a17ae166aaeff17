#include <gtest/gtest.h>

#include "rclab/engine.hpp"

using namespace rclab;

namespace {

DiGraph complete(int n) {
  DiGraph g(n);
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i)
      if (i != j) g.add_edge(j, i);
  return g;
}

// Seven nodes, leaders 1..3, complete graph.
Scenario base(Algorithm alg = Algorithm::mw_msr) {
  Scenario s;
  s.name = "unit";
  s.schedule = TopologySchedule::single(complete(7));
  s.leaders = NodeSet{1, 2, 3};
  s.algorithm = alg;
  s.f = 1;
  s.l = 1;
  s.reference = {ReferenceFunction(1.0)};
  s.init_x = {{0, 1, 1, 1, 4.0, -2.0, 3.0, 0.5}};
  if (alg == Algorithm::mdp_msr) {
    s.T = 0.8;
    s.beta = 1.65;
  }
  s.options.max_rounds = 3000;
  return s;
}

AttackScript wild(NodeId node, double center) {
  AttackScript a;
  a.node = node;
  a.groups.push_back({NodeSet{}, Oscillation{Waveform::square, center, 0.3, 2}});
  return a;
}

}  // namespace

TEST(Validation, CollectsEveryIssue) {
  Scenario s = base(Algorithm::mdp_msr);
  s.beta = 1.0;
  s.init_x[0].pop_back();
  s.reference.clear();
  const auto issues = validate_scenario(s);
  EXPECT_GE(issues.size(), 3u);
  EXPECT_THROW(run(s), std::invalid_argument);
}

TEST(Validation, RejectsNonLocalAdversaries) {
  Scenario s = base();
  s.adversaries = {wild(6, 5.0), wild(7, 5.0)};
  const auto issues = validate_scenario(s);
  ASSERT_EQ(issues.size(), 1u);
  EXPECT_NE(issues[0].find("not 1-local"), std::string::npos);
  s.f = 2;
  EXPECT_TRUE(validate_scenario(s).empty());
}

TEST(Validation, RejectsDuplicateScriptsAndSecureAdversarialLeaders) {
  Scenario s = base(Algorithm::mw_msr_secure);
  s.adversaries = {wild(6, 5.0), wild(6, 4.0)};
  EXPECT_FALSE(validate_scenario(s).empty());
  s.adversaries = {wild(1, 5.0)};
  EXPECT_FALSE(validate_scenario(s).empty());
}

TEST(Run, FaultFreeFirstOrderConverges) {
  Scenario s = base();
  s.f = 0;
  const Trace t = run(s);
  const auto rep = convergence_report(t, s.options.tol, s.options.window);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.residual, 1e-6);
  EXPECT_TRUE(envelope_nesting(t).holds);
  EXPECT_TRUE(contraction_oracle(t).holds);
  // Stops once the window is filled.
  EXPECT_EQ(t.rounds(), *rep.round + s.options.window - 1);
}

TEST(Run, LeadersFollowTheReference) {
  Scenario s = base();
  s.reference = {ReferenceFunction({{0, 1.0}, {5, 2.0}})};
  s.options.rounds = 8;
  const Trace t = run(s);
  EXPECT_EQ(t.rounds(), 8);
  const auto& x = t.axes[0].x;
  EXPECT_DOUBLE_EQ(x[0][1], 1.0);
  EXPECT_DOUBLE_EQ(x[5][1], 1.0);
  EXPECT_DOUBLE_EQ(x[6][1], 2.0);
  EXPECT_DOUBLE_EQ(t.axes[0].reference[5], 2.0);
}

TEST(Run, ByzantineFollowerIsFilteredOut) {
  Scenario s = base();
  s.adversaries = {wild(7, 50.0)};
  const Trace t = run(s);
  const auto rep = convergence_report(t, s.options.tol, s.options.window);
  EXPECT_TRUE(rep.converged);
  EXPECT_TRUE(envelope_nesting(t).holds);
  EXPECT_EQ(t.adversaries, NodeSet{7});
  EXPECT_EQ(t.followers, (NodeSet{4, 5, 6}));
  // Adversary state is never updated.
  EXPECT_DOUBLE_EQ(t.axes[0].x.back()[7], 0.5);
}

TEST(Run, IsDeterministic) {
  Scenario s = base();
  s.adversaries = {wild(7, 50.0)};
  const Trace a = run(s);
  const Trace b = run(s);
  EXPECT_EQ(a.axes[0].x, b.axes[0].x);
}

TEST(Run, ObserverSeesEveryRound) {
  Scenario s = base();
  s.adversaries = {wild(7, 50.0)};
  s.options.rounds = 5;
  long long calls = 0;
  bool trimmed_adversary = false;
  run(s, [&](long long k, int axis, const std::vector<MessageSet>& delivered, const std::vector<TrimResult>& trims) {
    EXPECT_EQ(k, calls);
    EXPECT_EQ(axis, 0);
    EXPECT_EQ(delivered.size(), 8u);
    const auto& ms = delivered[4];
    for (std::size_t m = 0; m < ms.size(); ++m)
      if (ms.messages()[m].source() == 7 && !trims[4].keep[m]) trimmed_adversary = true;
    ++calls;
  });
  EXPECT_EQ(calls, 5);
  EXPECT_TRUE(trimmed_adversary);
}

TEST(Run, SecureModeAdoptsReferenceForFedFollowers) {
  Scenario s = base(Algorithm::mw_msr_secure);
  DiGraph g = complete(7);
  s.schedule = TopologySchedule::single(g);
  s.options.rounds = 2;
  const Trace t = run(s);
  for (NodeId i : {4, 5, 6, 7}) EXPECT_DOUBLE_EQ(t.axes[0].x[1][static_cast<std::size_t>(i)], 1.0);
  EXPECT_EQ(leader_fed_followers(s.schedule, s.leaders), (NodeSet{4, 5, 6, 7}));
}

TEST(Run, StalledStatusWhenHeldAway) {
  // Followers 4 and 5 only hear each other and adversary 6, which tells them 3.
  DiGraph g(6, {{1, 6}, {2, 6}, {3, 6}, {6, 4}, {6, 5}, {4, 5}, {5, 4}});
  Scenario s = base();
  s.schedule = TopologySchedule::single(g);
  s.init_x = {{0, 1, 1, 1, 3.0, 3.0, 1.0}};
  AttackScript a;
  a.node = 6;
  a.groups.push_back({NodeSet{}, Oscillation::constant(3.0)});
  s.adversaries = {a};
  s.options.max_rounds = 300;
  const Trace t = run(s);
  const auto rep = convergence_report(t, s.options.tol, s.options.window);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.status, RunStatus::stalled);
  EXPECT_DOUBLE_EQ(rep.residual, 2.0);
}

TEST(Run, SecondOrderConvergesAndSatisfiesIdentity) {
  Scenario s = base(Algorithm::mdp_msr);
  s.adversaries = {wild(7, 50.0)};
  s.axes = 2;
  s.reference = {ReferenceFunction(1.0), ReferenceFunction(-1.0)};
  s.init_x.push_back({0, -1, -1, -1, 2.0, 0.0, -3.0, 0.0});
  s.init_v = {std::vector<double>(8, 0.2), std::vector<double>(8, -0.1)};
  const Trace t = run(s);
  const auto rep = convergence_report(t, s.options.tol, s.options.window);
  EXPECT_TRUE(rep.converged);
  EXPECT_LT(rep.velocity_residual, 1e-6);
  for (int a = 0; a < 2; ++a) {
    EXPECT_TRUE(two_step_identity(t, a).holds) << two_step_identity(t, a).detail;
    EXPECT_TRUE(two_step_envelope_nesting(t, a).holds);
    EXPECT_TRUE(contraction_oracle(t, a).holds);
  }
}

TEST(Run, FormationOffsetsAreHeld) {
  Scenario s = base(Algorithm::mdp_msr);
  s.delta = {{0, 0, 0, 0, 0.5, -0.5, 1.0, 0.0}};
  const Trace t = run(s);
  ASSERT_TRUE(convergence_report(t, s.options.tol, s.options.window).converged);
  const auto pos = positions(s, t, 0, t.rounds());
  EXPECT_NEAR(pos[4], 1.5, 1e-6);
  EXPECT_NEAR(pos[5], 0.5, 1e-6);
  EXPECT_NEAR(pos[6], 2.0, 1e-6);
}

TEST(Run, StaircaseSegmentsReconverge) {
  Scenario s = base();
  s.reference = {ReferenceFunction({{0, 1.0}, {150, 3.0}})};
  const Trace t = run(s);
  const auto segs = segment_reports(t, s.reference[0], s.options.tol, s.options.window);
  ASSERT_EQ(segs.size(), 2u);
  EXPECT_TRUE(segs[0].converged);
  EXPECT_TRUE(segs[1].converged);
  EXPECT_TRUE(envelope_nesting(t).holds);
  EXPECT_GE(t.rounds(), 150 + s.options.window);
}

TEST(Oracles, DetectViolations) {
  Trace t;
  t.leaders = NodeSet{1};
  t.followers = NodeSet{2};
  t.max_message_set = 2;
  AxisTrace ax;
  ax.x = {{0, 0.0, 1.0}, {0, 0.0, 2.0}, {0, 0.0, 1.0}};
  ax.reference = {0.0, 0.0, 0.0};
  // Stride (1 + 1) * 1 with alpha 1/2 demands V[2] <= 0.75 V[0].
  ax.V = {1.0, 2.0, 1.0};
  t.axes = {ax};
  EXPECT_FALSE(envelope_nesting(t).holds);
  EXPECT_FALSE(contraction_oracle(t).holds);
  EXPECT_FALSE(two_step_identity(t).holds);
}

TEST(Budget, GrowsWithPrecision) {
  const long long a = default_round_budget(2, 1, 0.5, 1.0, 1e-3, 1'000'000'000);
  const long long b = default_round_budget(2, 1, 0.5, 1.0, 1e-6, 1'000'000'000);
  EXPECT_LT(a, b);
  EXPECT_EQ(default_round_budget(6, 3, 0.01, 1.0, 1e-6, 5000), 5000);
  EXPECT_EQ(default_round_budget(6, 3, 0.5, 1e-9, 1e-6, 5000), 1);
}

TEST(Reports, RejectBadArguments) {
  Scenario s = base();
  s.options.rounds = 3;
  const Trace t = run(s);
  EXPECT_THROW(convergence_report(t, 0.0, 1), std::domain_error);
  EXPECT_THROW(convergence_report(t, 1e-6, 0), std::domain_error);
}
