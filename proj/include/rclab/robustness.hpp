#pragma once

// Exact verification of jointly r-robust following graphs with l hops under
// the f-local removal model, plus the cheap necessary conditions used as a
// pre-filter and the strong-robustness comparison condition.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "rclab/graph.hpp"

namespace rclab {

// Which nodes may relay on an independent path. `unrestricted` only forbids
// reuse of nodes across paths; `outside_set` also keeps relays out of S.
enum class RelayPolicy { unrestricted, outside_set };

// Which violating follower set a certificate reports once a failing removal
// set is found: the first by (size, lexicographic) order, or the union of all
// violating sets.
enum class CertificateForm { smallest, maximal };

// A path into some destination, stored without the destination itself.
struct PathCandidate {
  NodeId source = 0;
  NodeId last_hop = 0;  // the in-neighbor of the destination on this path
  NodeSet nodes;        // source and relays
};

// All simple paths of at most l hops ending at dst, as candidates.
inline std::vector<PathCandidate> candidate_paths(const DiGraph& g, NodeId dst, int l) {
  g.require_node(dst);
  if (l < 1) throw std::domain_error("hop count must be >= 1");
  std::vector<PathCandidate> out;
  struct Frame {
    NodeId head;
    NodeId last_hop;
    NodeSet used;
    int depth;
  };
  std::vector<Frame> stack{{dst, 0, NodeSet{}, 0}};
  while (!stack.empty()) {
    Frame fr = stack.back();
    stack.pop_back();
    for (NodeId j : g.in_neighbors(fr.head)) {
      if (j == dst || fr.used.contains(j)) continue;
      NodeSet used = fr.used;
      used.insert(j);
      const NodeId last = fr.depth == 0 ? j : fr.last_hop;
      out.push_back({j, last, used});
      if (fr.depth + 1 < l) stack.push_back({j, last, used, fr.depth + 1});
    }
  }
  return out;
}

namespace detail {

inline void pack_search(const std::vector<PathCandidate>& paths, std::size_t idx, NodeSet used, int count, int cap,
                        int& best) {
  if (count > best) best = count;
  if (best >= cap || idx >= paths.size()) return;
  // Each path enters the destination through its own last hop, so the number
  // of distinct usable last hops bounds what the remainder can add.
  NodeSet hops;
  for (std::size_t t = idx; t < paths.size(); ++t)
    if (!paths[t].nodes.intersects(used)) hops.insert(paths[t].last_hop);
  if (count + hops.size() <= best) return;
  for (std::size_t t = idx; t < paths.size(); ++t) {
    if (paths[t].nodes.intersects(used)) continue;
    pack_search(paths, t + 1, used | paths[t].nodes, count + 1, cap, best);
    if (best >= cap) return;
  }
}

}  // namespace detail

// Maximum number of candidates whose node sets are pairwise disjoint,
// saturating at `cap`.
inline int max_disjoint_paths(std::vector<PathCandidate> paths, int cap = std::numeric_limits<int>::max()) {
  if (cap <= 0 || paths.empty()) return 0;
  std::sort(paths.begin(), paths.end(), [](const PathCandidate& a, const PathCandidate& b) {
    if (a.nodes.size() != b.nodes.size()) return a.nodes.size() < b.nodes.size();
    return a.nodes.bits() < b.nodes.bits();
  });
  // A path whose node set contains another's can always be swapped for it.
  std::vector<PathCandidate> kept;
  for (const auto& p : paths) {
    bool dominated = false;
    for (const auto& q : kept)
      if (q.nodes.is_subset_of(p.nodes)) {
        dominated = true;
        break;
      }
    if (!dominated) kept.push_back(p);
  }
  int best = 0;
  detail::pack_search(kept, 0, NodeSet{}, 0, cap, best);
  return std::min(best, cap);
}

namespace detail {

inline std::vector<PathCandidate> usable_paths(const std::vector<PathCandidate>& all, NodeSet S, RelayPolicy policy) {
  std::vector<PathCandidate> out;
  out.reserve(all.size());
  for (const auto& p : all) {
    if (S.contains(p.source)) continue;
    if (policy == RelayPolicy::outside_set && p.nodes.intersects(S)) continue;
    out.push_back(p);
  }
  return out;
}

}  // namespace detail

// Maximum number of paths of at most l hops ending at i, each starting outside
// S, pairwise sharing only i.
inline int independent_path_count(const DiGraph& g, NodeSet S, NodeId i, int l,
                                  RelayPolicy policy = RelayPolicy::unrestricted) {
  g.require_node(i);
  if (!S.contains(i)) throw std::domain_error("independent_path_count: node " + std::to_string(i) + " is not in S");
  return max_disjoint_paths(detail::usable_paths(candidate_paths(g, i, l), S, policy));
}

// First step K in `range` at which i has at least r independent paths from
// outside S in the schedule with `removed` deleted; nullopt if none.
inline std::optional<int> jointly_reachable(const TopologySchedule& s, StepRange range, NodeSet S, NodeId i, int r,
                                            int l, RelayPolicy policy = RelayPolicy::unrestricted,
                                            NodeSet removed = {}) {
  if (!S.contains(i)) throw std::domain_error("jointly_reachable: node " + std::to_string(i) + " is not in S");
  const NodeSet keep = s.at(0).nodes() - removed;
  for (int k = range.begin; k < range.end; ++k) {
    const DiGraph g = s.at(k).induced(keep);
    const auto usable = detail::usable_paths(candidate_paths(g, i, l), S, policy);
    if (max_disjoint_paths(usable, r) >= r) return k;
  }
  return std::nullopt;
}

// |N_i^{l-}[k] ∩ F| <= f for every i outside F and every step of the period.
// On failure reports the first witnessing (node, step).
struct FLocalWitness {
  NodeId node = 0;
  int step = 0;
  int count = 0;
};

inline std::optional<FLocalWitness> f_local_violation(const TopologySchedule& s, NodeSet F, int l, int f) {
  for (int k = 0; k < s.period(); ++k) {
    const auto& g = s.at(k);
    for (NodeId i = 1; i <= g.node_count(); ++i) {
      if (F.contains(i)) continue;
      const int c = (in_neighbors_l(g, i, l) & F).size();
      if (c > f) return FLocalWitness{i, k, c};
    }
  }
  return std::nullopt;
}

inline bool is_f_local(const TopologySchedule& s, NodeSet F, int l, int f) {
  return !f_local_violation(s, F, l, f).has_value();
}

struct RobustnessQuery {
  TopologySchedule schedule;
  NodeSet leaders;
  int r = 1;
  int l = 1;
  int f = 0;
  RelayPolicy relay = RelayPolicy::unrestricted;
  CertificateForm certificate_form = CertificateForm::smallest;
  // Largest removal set considered; defaults to n - 1.
  std::optional<int> max_removed;
  bool prefilter = true;
  // After a prefilter rejection, enumerate the removal sets that precede the
  // suggested one so the reported certificate is the canonical first.
  bool canonical_certificate = true;
  // 0 picks RCLAB_THREADS or the hardware concurrency.
  int threads = 0;

  void validate() const {
    if (r < 1) throw std::domain_error("r must be >= 1");
    if (l < 1) throw std::domain_error("l must be >= 1");
    if (f < 0) throw std::domain_error("f must be >= 0");
    if (!leaders.is_subset_of(schedule.at(0).nodes())) throw std::domain_error("leader id outside the node set");
  }
};

// A removal set F, a follower set S in V \ F \ L, and the interval over which
// no member of S is jointly r-reachable.
struct Certificate {
  NodeSet removed;
  NodeSet followers;
  int interval = 0;
  friend bool operator==(const Certificate&, const Certificate&) = default;
};

struct RobustnessVerdict {
  bool holds = true;
  std::optional<Certificate> certificate;
  // Set when a failed necessary condition produced the certificate.
  std::optional<int> prefilter_condition;
  std::size_t removal_sets_checked = 0;
};

namespace detail {

inline int worker_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RCLAB_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

// Paths into every candidate follower at every step of the period, computed
// in the subgraph with F removed.
class RemovalContext {
 public:
  RemovalContext(const RobustnessQuery& q, NodeSet removed) : q_(q), removed_(removed) {
    const auto& s = q.schedule;
    const NodeSet keep = s.at(0).nodes() - removed;
    followers_ = keep - q.leaders;
    paths_.resize(static_cast<std::size_t>(s.period()));
    for (int k = 0; k < s.period(); ++k) {
      const DiGraph g = s.at(k).induced(keep);
      auto& per_node = paths_[static_cast<std::size_t>(k)];
      per_node.resize(static_cast<std::size_t>(g.node_count()) + 1);
      for (NodeId i : followers_) per_node[static_cast<std::size_t>(i)] = candidate_paths(g, i, q.l);
    }
  }

  NodeSet followers() const { return followers_; }

  bool reachable(NodeId i, NodeSet S, StepRange range) const {
    for (int k = range.begin; k < range.end; ++k) {
      const auto& all = paths_[static_cast<std::size_t>(k % q_.schedule.period())][static_cast<std::size_t>(i)];
      if (max_disjoint_paths(usable_paths(all, S, q_.relay), q_.r) >= q_.r) return true;
    }
    return false;
  }

  // The largest S inside `pool` with no jointly r-reachable member. Reachability
  // only gets easier as S shrinks, so a member that reaches from some superset
  // can never belong to a violating set; pruning such members to a fixpoint
  // leaves the union of all violating subsets, which is itself violating.
  NodeSet maximal_violating_set(NodeSet pool, StepRange range) const {
    NodeSet S = pool;
    bool changed = true;
    while (changed && !S.empty()) {
      changed = false;
      for (NodeId i : S) {
        if (reachable(i, S, range)) {
          S.erase(i);
          changed = true;
        }
      }
    }
    return S;
  }

 private:
  const RobustnessQuery& q_;
  NodeSet removed_;
  NodeSet followers_;
  std::vector<std::vector<std::vector<PathCandidate>>> paths_;
};

// Above this size the maximal violating set is reported as is instead of
// searching it for the smallest violating subset.
inline constexpr int kSmallestSearchLimit = 20;

inline std::optional<Certificate> check_removal(const RobustnessQuery& q, NodeSet removed) {
  RemovalContext ctx(q, removed);
  const auto& ivs = q.schedule.intervals();
  for (std::size_t t = 0; t < ivs.size(); ++t) {
    const NodeSet M = ctx.maximal_violating_set(ctx.followers(), ivs[t]);
    if (M.empty()) continue;
    Certificate cert{removed, M, static_cast<int>(t)};
    if (q.certificate_form == CertificateForm::smallest && M.size() <= kSmallestSearchLimit) {
      // Every violating set lies inside M.
      for (int size = 1; size < M.size(); ++size) {
        bool hit = false;
        for_each_subset_of_size(M, size, [&](NodeSet S) {
          for (NodeId i : S)
            if (ctx.reachable(i, S, ivs[t])) return true;
          cert.followers = S;
          hit = true;
          return false;
        });
        if (hit) break;
      }
    }
    return cert;
  }
  return std::nullopt;
}

}  // namespace detail

// True when the certificate is a genuine violation: F is f-local, S is a
// nonempty set of non-leaders outside F, and no member of S is jointly
// r-reachable in the certificate's interval.
inline bool certificate_is_valid(const RobustnessQuery& q, const Certificate& c) {
  if (c.followers.empty()) return false;
  if (c.followers.intersects(c.removed) || c.followers.intersects(q.leaders)) return false;
  if (!c.followers.is_subset_of(q.schedule.at(0).nodes())) return false;
  if (c.interval < 0 || c.interval >= static_cast<int>(q.schedule.intervals().size())) return false;
  if (!is_f_local(q.schedule, c.removed, q.l, q.f)) return false;
  const auto range = q.schedule.intervals()[static_cast<std::size_t>(c.interval)];
  for (NodeId i : c.followers)
    if (jointly_reachable(q.schedule, range, c.followers, i, q.r, q.l, q.relay, c.removed)) return false;
  return true;
}

struct ConditionResult {
  int id = 0;
  bool passed = true;
  std::string detail;
};

// Necessary conditions for a jointly r-robust following graph under the
// f-local model, with threshold r + f (2f + 1 when r = f + 1):
//  1. at least r + f leaders;
//  2. per interval, some follower sees r + f leaders within l hops at one step;
//  3. per interval, at least r + f followers have a direct leader in-edge in
//     the interval's union graph;
//  4. per interval, every follower has in-degree >= r + f at some step, so the
//     union graph carries at least (r + f)|W| edges into followers.
inline std::vector<ConditionResult> necessary_conditions(const RobustnessQuery& q) {
  q.validate();
  const auto& s = q.schedule;
  const int need = q.r + q.f;
  const NodeSet followers = s.at(0).nodes() - q.leaders;
  std::vector<ConditionResult> out;

  {
    const bool ok = q.leaders.size() >= need;
    out.push_back({1, ok, "leaders=" + std::to_string(q.leaders.size()) + " need>=" + std::to_string(need)});
  }
  {
    ConditionResult c{2, true, ""};
    for (std::size_t t = 0; t < s.intervals().size() && c.passed; ++t) {
      const auto iv = s.intervals()[t];
      bool found = false;
      for (int k = iv.begin; k < iv.end && !found; ++k)
        for (NodeId i : followers)
          if ((in_neighbors_l(s.at(k), i, q.l) & q.leaders).size() >= need) {
            found = true;
            break;
          }
      if (!found) {
        c.passed = false;
        c.detail = "interval " + std::to_string(t) + ": no follower sees " + std::to_string(need) + " leaders";
      }
    }
    out.push_back(c);
  }
  {
    ConditionResult c{3, true, ""};
    for (std::size_t t = 0; t < s.intervals().size() && c.passed; ++t) {
      const DiGraph u = union_graph(s, s.intervals()[t]);
      int fed = 0;
      for (NodeId i : followers)
        if (u.in_neighbors(i).intersects(q.leaders)) ++fed;
      if (fed < need) {
        c.passed = false;
        c.detail = "interval " + std::to_string(t) + ": " + std::to_string(fed) + " followers fed by leaders";
      }
    }
    out.push_back(c);
  }
  {
    ConditionResult c{4, true, ""};
    for (std::size_t t = 0; t < s.intervals().size() && c.passed; ++t) {
      const auto iv = s.intervals()[t];
      for (NodeId i : followers) {
        int best = 0;
        for (int k = iv.begin; k < iv.end; ++k) best = std::max(best, s.at(k).in_degree(i));
        if (best < need) {
          c.passed = false;
          c.detail = "interval " + std::to_string(t) + ": follower " + std::to_string(i) + " max in-degree " +
                     std::to_string(best);
          break;
        }
      }
      if (c.passed) {
        const DiGraph u = union_graph(s, iv);
        std::size_t into = 0;
        for (NodeId i : followers) into += static_cast<std::size_t>(u.in_degree(i));
        if (into < static_cast<std::size_t>(need) * static_cast<std::size_t>(followers.size())) {
          c.passed = false;
          c.detail = "interval " + std::to_string(t) + ": union has " + std::to_string(into) + " edges into followers";
        }
      }
    }
    out.push_back(c);
  }
  return out;
}

namespace detail {

// Candidate violations suggested by a failed necessary condition. Each is
// verified before use, so an unsound suggestion only costs the enumeration.
inline std::vector<Certificate> prefilter_candidates(const RobustnessQuery& q, int condition) {
  const auto& s = q.schedule;
  const NodeSet followers = s.at(0).nodes() - q.leaders;
  std::vector<Certificate> out;
  const int nint = static_cast<int>(s.intervals().size());
  auto first_k = [](NodeSet pool, int k) {
    NodeSet r;
    for (NodeId id : pool) {
      if (r.size() >= k) break;
      r.insert(id);
    }
    return r;
  };
  switch (condition) {
    case 1:
    case 2:
      for_each_subset_of_size(q.leaders, std::min(q.f, q.leaders.size()), [&](NodeSet F) {
        for (int t = 0; t < nint; ++t) out.push_back({F, followers, t});
        return out.size() < 256;
      });
      break;
    case 3:
      for (int t = 0; t < nint; ++t) {
        const DiGraph u = union_graph(s, s.intervals()[static_cast<std::size_t>(t)]);
        NodeSet fed;
        for (NodeId i : followers)
          if (u.in_neighbors(i).intersects(q.leaders)) fed.insert(i);
        const NodeSet F = first_k(fed, q.f);
        const NodeSet S = followers - fed;
        if (!S.empty()) out.push_back({F, S, t});
        out.push_back({F, followers - F, t});
      }
      break;
    case 4:
      for (int t = 0; t < nint; ++t) {
        const auto iv = s.intervals()[static_cast<std::size_t>(t)];
        for (NodeId i : followers) {
          int best = 0;
          NodeSet F;
          for (int k = iv.begin; k < iv.end; ++k) {
            best = std::max(best, s.at(k).in_degree(i));
            F |= first_k(s.at(k).in_neighbors(i), q.f);
          }
          if (best < q.r + q.f) out.push_back({F, NodeSet{i}, t});
        }
      }
      break;
    default:
      break;
  }
  return out;
}

}  // namespace detail

// Removal sets are tried by size, then lexicographically; the first one that
// admits a violation is reported with a violating follower set (smallest or
// maximal, per the query) in the earliest failing interval. A failed necessary
// condition decides the verdict up front and bounds the enumeration.
inline RobustnessVerdict is_jointly_robust_following(const RobustnessQuery& q) {
  q.validate();
  RobustnessVerdict verdict;
  const int n = q.schedule.node_count();

  std::optional<NodeSet> stop_after;
  if (q.prefilter) {
    for (const auto& c : necessary_conditions(q)) {
      if (c.passed) continue;
      for (const auto& cert : detail::prefilter_candidates(q, c.id)) {
        if (certificate_is_valid(q, cert)) {
          verdict.holds = false;
          verdict.certificate = cert;
          verdict.prefilter_condition = c.id;
          break;
        }
      }
      if (verdict.prefilter_condition) break;
    }
    if (verdict.prefilter_condition) {
      if (!q.canonical_certificate) return verdict;
      stop_after = verdict.certificate->removed;
    }
  }

  const int max_removed = std::min(q.max_removed.value_or(n - 1), n);
  std::vector<NodeSet> candidates;
  const NodeSet all = q.schedule.at(0).nodes();
  bool reached = false;
  for (int size = 0; size <= max_removed && !reached; ++size) {
    for_each_subset_of_size(all, size, [&](NodeSet F) {
      if (is_f_local(q.schedule, F, q.l, q.f)) candidates.push_back(F);
      reached = stop_after && F == *stop_after;
      return !reached;
    });
    // f = 0 admits only the empty set.
    if (q.f == 0) break;
  }
  verdict.removal_sets_checked = candidates.size();

  // Workers claim candidates in order; the smallest failing index wins, so
  // the result does not depend on scheduling.
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> best{candidates.size()};
  std::vector<std::optional<Certificate>> found(candidates.size());
  auto work = [&] {
    while (true) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= candidates.size() || idx >= best.load()) return;
      if (auto cert = detail::check_removal(q, candidates[idx])) {
        found[idx] = cert;
        std::size_t cur = best.load();
        while (idx < cur && !best.compare_exchange_weak(cur, idx)) {
        }
      }
    }
  };
  const int nthreads = std::min<int>(detail::worker_count(q.threads), static_cast<int>(std::max<std::size_t>(1, candidates.size())));
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(work);
  }
  if (best.load() < candidates.size()) {
    verdict.holds = false;
    verdict.certificate = found[best.load()];
  }
  return verdict;
}

// Static graph with unit intervals.
inline RobustnessVerdict is_robust_following_static(const DiGraph& g, NodeSet leaders, int r, int l, int f,
                                                    RelayPolicy relay = RelayPolicy::unrestricted) {
  RobustnessQuery q;
  q.schedule = TopologySchedule::single(g);
  q.leaders = leaders;
  q.r = r;
  q.l = l;
  q.f = f;
  q.relay = relay;
  return is_jointly_robust_following(q);
}

// Largest S inside V \ L in which no node has r in-neighbors outside S; empty
// iff the graph is strongly r-robust with respect to the leaders.
inline NodeSet strong_robustness_violation(const DiGraph& g, NodeSet leaders, int r) {
  NodeSet S = g.nodes() - leaders;
  bool changed = true;
  while (changed && !S.empty()) {
    changed = false;
    for (NodeId i : S) {
      if ((g.in_neighbors(i) - S).size() >= r) {
        S.erase(i);
        changed = true;
      }
    }
  }
  return S;
}

inline bool strongly_robust_wrt_leaders(const DiGraph& g, NodeSet leaders, int r) {
  return strong_robustness_violation(g, leaders, r).empty();
}

}  // namespace rclab
