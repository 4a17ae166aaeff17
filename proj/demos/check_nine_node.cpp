// Checks the shipped nine-node schedules at one and two hops and prints the
// verdicts, certificates and necessary-condition results.

#include <iostream>

#include "rclab/rclab.hpp"

using namespace rclab;

int main(int argc, char** argv) {
  const std::string dir = argc > 1 ? argv[1] : RCLAB_CORPUS_DIR;
  for (const char* name : {"nine_node_sparse", "nine_node_augmented"}) {
    const Topology t = load_topology(dir + "/topologies/" + name + ".json");
    std::cout << "== " << name << " (" << t.schedule.period() << " graphs, leaders " << t.leaders.to_string() << ")\n";
    for (int l : {1, 2}) {
      RobustnessQuery q;
      q.schedule = t.schedule;
      q.leaders = t.leaders;
      q.r = 2;
      q.l = l;
      q.f = 1;
      std::cout << format_verdict(q, is_jointly_robust_following(q));
      for (const auto& c : necessary_conditions(q))
        std::cout << "  condition " << c.id << ": " << (c.passed ? "pass" : "fail " + c.detail) << '\n';
    }
    const DiGraph u = union_graph(t.schedule, {0, t.schedule.period()});
    std::cout << "union strongly 3-robust w.r.t. leaders: " << (strongly_robust_wrt_leaders(u, t.leaders, 3) ? "yes" : "no")
              << "\n\n";
  }
}
