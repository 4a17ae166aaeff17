#include <gtest/gtest.h>

#include <filesystem>

#include "rclab/config.hpp"

using namespace rclab;
namespace fs = std::filesystem;

namespace {

std::vector<fs::path> files_in(const std::string& sub) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(fs::path(RCLAB_CORPUS_DIR) / sub))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

RobustnessQuery query_for(const Topology& t, const RobustnessClaim& c) {
  RobustnessQuery q;
  q.schedule = t.schedule;
  q.leaders = t.leaders;
  q.r = c.r;
  q.l = c.l;
  q.f = c.f;
  return q;
}

}  // namespace

TEST(Corpus, HasTopologiesAndScenarios) {
  EXPECT_GE(files_in("topologies").size(), 3u);
  EXPECT_GE(files_in("scenarios").size(), 6u);
}

TEST(Corpus, TopologyClaimsHold) {
  for (const auto& p : files_in("topologies")) {
    const Topology t = load_topology(p);
    EXPECT_FALSE(t.claims.empty()) << p;
    for (const auto& c : t.claims) {
      const auto q = query_for(t, c);
      const auto v = is_jointly_robust_following(q);
      EXPECT_EQ(v.holds, c.holds) << p << " r=" << c.r << " l=" << c.l << " f=" << c.f;
      if (!v.holds) {
        ASSERT_TRUE(v.certificate);
        EXPECT_TRUE(certificate_is_valid(q, *v.certificate));
        if (c.removed) {
          EXPECT_EQ(v.certificate->removed, *c.removed) << p;
        }
        if (c.followers) {
          EXPECT_EQ(v.certificate->followers, *c.followers) << p;
        }
      } else {
        for (const auto& cond : necessary_conditions(q)) EXPECT_TRUE(cond.passed) << p << " condition " << cond.id;
      }
    }
  }
}

TEST(Corpus, FilesRoundTripCanonically) {
  for (const auto& p : files_in("topologies")) {
    const json once = serialize(load_topology(p));
    EXPECT_EQ(serialize(parse_topology(once)), once) << p;
  }
  for (const auto& p : files_in("scenarios")) {
    const auto ls = load_scenario(p);
    const json once = serialize(ls);
    const auto again = parse_scenario(once);
    EXPECT_EQ(serialize(again), once) << p;
    EXPECT_EQ(fingerprint(again), ls.scenario.fingerprint) << p;
  }
}

TEST(Corpus, ScenariosValidateAndBehaveAsPromised) {
  for (const auto& p : files_in("scenarios")) {
    const auto ls = load_scenario(p);
    const auto& sc = ls.scenario;
    EXPECT_TRUE(validate_scenario(sc).empty()) << p;
    ASSERT_TRUE(ls.expect) << p;
    const Trace t = run(sc);
    long long settle = 0;
    for (const auto& r : sc.reference) settle = std::max(settle, r.last_change());
    const auto rep = convergence_report(t, sc.options.tol, sc.options.window, settle);
    EXPECT_EQ(rep.status, *ls.expect) << p << " residual " << rep.residual;
    if (rep.converged) {
      for (int a = 0; a < sc.axes; ++a) {
        if (sc.algorithm == Algorithm::mdp_msr) {
          EXPECT_TRUE(two_step_identity(t, a).holds) << p;
          EXPECT_TRUE(two_step_envelope_nesting(t, a).holds) << p;
        } else {
          EXPECT_TRUE(envelope_nesting(t, a).holds) << p;
        }
        EXPECT_TRUE(contraction_oracle(t, a).holds) << p;
      }
    } else {
      EXPECT_GT(rep.residual, 0.1) << p;
    }
  }
}
