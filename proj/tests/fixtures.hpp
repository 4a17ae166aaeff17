#pragma once

// Small hand-built instances shared by the unit tests and the acceptance run.

#include <vector>

#include "rclab/graph.hpp"

namespace fixtures {

using namespace rclab;

// A static graph that fails exactly one necessary condition (and possibly
// later ones) for r = 2, f = 1, l = 1.
struct ConditionViolation {
  int condition;
  DiGraph graph;
  NodeSet leaders;
};

inline std::vector<ConditionViolation> condition_violations() {
  std::vector<ConditionViolation> out;
  {
    // Two leaders where three are needed.
    DiGraph g(5, {{1, 3}, {2, 3}, {1, 4}, {2, 4}, {1, 5}, {2, 5}, {3, 4}, {4, 5}, {5, 3}, {4, 3}, {5, 4}, {3, 5}});
    out.push_back({1, g, NodeSet{1, 2}});
  }
  {
    // Leader 3 is silent, so no follower sees three leaders.
    DiGraph g(6);
    for (int i = 4; i <= 6; ++i) {
      g.add_edge(1, i);
      g.add_edge(2, i);
      for (int j = 4; j <= 6; ++j)
        if (i != j) g.add_edge(j, i);
    }
    out.push_back({2, g, NodeSet{1, 2, 3}});
  }
  {
    // Only follower 4 hears the leaders.
    DiGraph g(6, {{1, 4}, {2, 4}, {3, 4}, {4, 5}, {4, 6}, {5, 6}, {6, 5}, {5, 4}});
    out.push_back({3, g, NodeSet{1, 2, 3}});
  }
  {
    // Follower 7 has in-degree two.
    DiGraph g(7);
    for (int j = 1; j <= 6; ++j)
      for (int i = 4; i <= 6; ++i)
        if (i != j) g.add_edge(j, i);
    g.add_edge(4, 7);
    g.add_edge(5, 7);
    out.push_back({4, g, NodeSet{1, 2, 3}});
  }
  return out;
}

}  // namespace fixtures
