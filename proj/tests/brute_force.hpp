#pragma once

// Slow reference implementations for cross-checking the robustness checker.
// They share no code with it beyond the graph primitives.

#include <optional>
#include <random>
#include <vector>

#include "rclab/graph.hpp"
#include "rclab/robustness.hpp"

namespace bf {

using namespace rclab;

// Largest family of paths that pairwise share only the destination.
inline int max_internally_disjoint(const std::vector<Path>& paths, std::size_t from = 0, NodeSet used = {}) {
  int best = 0;
  for (std::size_t k = from; k < paths.size(); ++k) {
    NodeSet inner = paths[k].node_set();
    inner.erase(paths[k].destination());
    if (inner.intersects(used)) continue;
    best = std::max(best, 1 + max_internally_disjoint(paths, k + 1, used | inner));
  }
  return best;
}

inline std::vector<Path> paths_from_outside(const DiGraph& g, NodeSet S, NodeId i, int l, bool relays_outside) {
  std::vector<Path> out;
  for (NodeId j = 1; j <= g.node_count(); ++j) {
    if (S.contains(j) || j == i) continue;
    for (auto& p : paths_to(g, j, i, l)) {
      NodeSet relays = p.node_set();
      relays.erase(i);
      relays.erase(j);
      if (relays_outside && relays.intersects(S)) continue;
      out.push_back(p);
    }
  }
  return out;
}

inline bool f_local(const TopologySchedule& s, NodeSet F, int l, int f) {
  for (int k = 0; k < s.period(); ++k)
    for (NodeId i = 1; i <= s.node_count(); ++i) {
      if (F.contains(i)) continue;
      int c = 0;
      for (NodeId j : F)
        if (!paths_to(s.at(k), j, i, l).empty()) ++c;
      if (c > f) return false;
    }
  return true;
}

struct Result {
  bool holds = true;
  NodeSet F;
  NodeSet S;
  int interval = 0;
  NodeSet union_of_violating;  // for the first failing F and interval
};

// Direct transcription of the definition: every f-local F, every interval,
// every nonempty follower subset.
inline Result check(const RobustnessQuery& q) {
  const auto& s = q.schedule;
  const int n = s.node_count();
  const NodeSet all = NodeSet::range(1, n);
  const bool strict = q.relay == RelayPolicy::outside_set;
  Result res;
  for (int size = 0; size <= n; ++size) {
    bool failed = false;
    for_each_subset_of_size(all, size, [&](NodeSet F) {
      if (!f_local(s, F, q.l, q.f)) return true;
      const NodeSet W = all - F - q.leaders;
      std::vector<DiGraph> gh;
      for (int k = 0; k < s.period(); ++k) gh.push_back(s.at(k).induced(all - F));
      for (std::size_t t = 0; t < s.intervals().size(); ++t) {
        const auto iv = s.intervals()[t];
        std::optional<NodeSet> first;
        NodeSet uni;
        for (int ssize = 1; ssize <= W.size(); ++ssize) {
          for_each_subset_of_size(W, ssize, [&](NodeSet S) {
            for (NodeId i : S)
              for (int k = iv.begin; k < iv.end; ++k)
                if (max_internally_disjoint(paths_from_outside(gh[static_cast<std::size_t>(k)], S, i, q.l, strict)) >=
                    q.r)
                  return true;
            if (!first) first = S;
            uni |= S;
            return true;
          });
        }
        if (first) {
          res = {false, F, *first, static_cast<int>(t), uni};
          failed = true;
          return false;
        }
      }
      return true;
    });
    if (failed) return res;
    if (q.f == 0) break;
  }
  return res;
}

inline DiGraph random_graph(std::mt19937& rng, int n, double p) {
  std::bernoulli_distribution coin(p);
  DiGraph g(n);
  for (int j = 1; j <= n; ++j)
    for (int i = 1; i <= n; ++i)
      if (i != j && coin(rng)) g.add_edge(j, i);
  return g;
}

}  // namespace bf
