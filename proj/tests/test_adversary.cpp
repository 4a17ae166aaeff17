#include <gtest/gtest.h>

#include "rclab/adversary.hpp"

using namespace rclab;

TEST(Oscillation, Waveforms) {
  Oscillation sq{Waveform::square, 4.0, 0.3, 2};
  EXPECT_DOUBLE_EQ(sq.at(0), 4.3);
  EXPECT_DOUBLE_EQ(sq.at(1), 3.7);
  EXPECT_DOUBLE_EQ(sq.at(2), 4.3);
  Oscillation slow{Waveform::square, 0.0, 1.0, 4};
  EXPECT_DOUBLE_EQ(slow.at(1), 1.0);
  EXPECT_DOUBLE_EQ(slow.at(2), -1.0);
  Oscillation sine{Waveform::sine, 1.0, 2.0, 4};
  EXPECT_NEAR(sine.at(1), 3.0, 1e-12);
  EXPECT_NEAR(sine.at(3), -1.0, 1e-12);
  EXPECT_DOUBLE_EQ(Oscillation::constant(7.5).at(123), 7.5);
  EXPECT_THROW((Oscillation{Waveform::square, 0.0, 1.0, 0}.validate()), std::domain_error);
}

TEST(AttackScript, FirstMatchingGroupWins) {
  AttackScript s;
  s.node = 5;
  s.groups.push_back({NodeSet{1, 3}, Oscillation::constant(4.5)});
  s.groups.push_back({NodeSet{}, Oscillation::constant(1.0)});
  EXPECT_DOUBLE_EQ(s.emit(0, 1, 0.0), 4.5);
  EXPECT_DOUBLE_EQ(s.emit(0, 2, 0.0), 1.0);
  AttackScript partial;
  partial.node = 5;
  partial.groups.push_back({NodeSet{1}, Oscillation::constant(4.5)});
  EXPECT_DOUBLE_EQ(partial.emit(0, 2, 9.0), 9.0);
  partial.relay = RelayMode::identity;
  EXPECT_DOUBLE_EQ(partial.relay_value(0, 1, 9.0), 9.0);
}

TEST(AttackScript, MaliciousSendsOneValue) {
  AttackScript s;
  s.node = 2;
  s.model = AdversaryModel::malicious;
  s.groups.push_back({NodeSet{}, Oscillation::constant(3.0)});
  EXPECT_NO_THROW(s.validate());
  EXPECT_DOUBLE_EQ(s.emit(0, 1, 0.0), 3.0);
  EXPECT_DOUBLE_EQ(s.emit(0, 4, 0.0), 3.0);
  s.groups.push_back({NodeSet{1}, Oscillation::constant(2.0)});
  EXPECT_THROW(s.validate(), std::domain_error);
}

TEST(Hooks, NextHopVersusDestinationKeys) {
  // 1 -> 2 -> 3, adversary 2; also 2 -> 3 directly.
  DiGraph g(3, {{1, 2}, {2, 3}});
  AttackScript s;
  s.node = 2;
  s.groups.push_back({NodeSet{3}, Oscillation::constant(-5.0)});
  std::vector<double> x{0, 1.0, 2.0, 3.0};
  auto out = relay_round(g, x, make_relay_hooks({s}), 2);
  for (const auto& m : out[3]) {
    if (m.path == Path{1, 2, 3}) {
      EXPECT_DOUBLE_EQ(m.value, -5.0);
    }
    if (m.path == Path{2, 3}) {
      EXPECT_DOUBLE_EQ(m.value, -5.0);
    }
  }
  s.relay = RelayMode::identity;
  out = relay_round(g, x, make_relay_hooks({s}), 2);
  for (const auto& m : out[3])
    if (m.path == Path{1, 2, 3}) {
      EXPECT_DOUBLE_EQ(m.value, 1.0);
    }

  // Source 1 is the adversary; next hop is 2 but destination is 3.
  AttackScript src;
  src.node = 1;
  src.groups.push_back({NodeSet{3}, Oscillation::constant(9.0)});
  out = relay_round(g, x, make_relay_hooks({src}), 2);
  for (const auto& m : out[3])
    if (m.path == Path{1, 2, 3}) {
      EXPECT_DOUBLE_EQ(m.value, 1.0);
    }
  src.key = GroupKey::destination;
  out = relay_round(g, x, make_relay_hooks({src}), 2);
  for (const auto& m : out[3])
    if (m.path == Path{1, 2, 3}) {
      EXPECT_DOUBLE_EQ(m.value, 9.0);
    }
  EXPECT_DOUBLE_EQ(out[2].messages()[1].value, 1.0);
}

TEST(FLocalCheck, ReportsWitness) {
  DiGraph g(4, {{1, 3}, {2, 3}, {3, 4}});
  const auto s = TopologySchedule::single(g);
  const auto ok = validate_f_local(NodeSet{1, 2}, s, 1, 2);
  EXPECT_TRUE(ok.f_local);
  EXPECT_TRUE(ok.f_total);
  const auto bad = validate_f_local(NodeSet{1, 2}, s, 1, 1);
  EXPECT_FALSE(bad.f_local);
  EXPECT_FALSE(bad.f_total);
  EXPECT_EQ(bad.witness->node, 3);
}

TEST(Necessity, AttackTargetsStalledSet) {
  const auto scripts = necessity_attack(NodeSet{5, 6}, NodeSet{1, 2}, 3.5, 2.0);
  ASSERT_EQ(scripts.size(), 2u);
  for (const auto& s : scripts) {
    EXPECT_EQ(s.key, GroupKey::destination);
    EXPECT_EQ(s.relay, RelayMode::same);
    EXPECT_DOUBLE_EQ(s.emit(10, 1, 0.0), 3.5);
    EXPECT_DOUBLE_EQ(s.emit(10, 2, 0.0), 3.5);
    EXPECT_DOUBLE_EQ(s.emit(10, 4, 0.0), 2.0);
    EXPECT_NO_THROW(s.validate());
  }
}
