#pragma once

// Multi-hop relaying with path provenance, and exact minimum message covers.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rclab/graph.hpp"

namespace rclab {

struct Message {
  double value = 0.0;
  Path path;  // source first, destination last; a single node for the self-message
  long long origin_time = 0;
  bool tampered = false;

  NodeId source() const { return path.source(); }
  NodeId destination() const { return path.destination(); }
  bool is_self() const { return path.size() == 1; }
};

class MessageSet {
 public:
  MessageSet() = default;
  explicit MessageSet(NodeId destination) : destination_(destination) {}

  void add(Message m) {
    if (m.destination() != destination_)
      throw std::domain_error("message for node " + std::to_string(m.destination()) + " added to the set of node " +
                              std::to_string(destination_));
    if (!std::isfinite(m.value)) throw std::domain_error("message value is not finite");
    messages_.push_back(std::move(m));
  }

  NodeId destination() const { return destination_; }
  const std::vector<Message>& messages() const { return messages_; }
  std::vector<Message>& messages() { return messages_; }
  std::size_t size() const { return messages_.size(); }
  bool empty() const { return messages_.empty(); }
  auto begin() const { return messages_.begin(); }
  auto end() const { return messages_.end(); }

  const Message* self_message() const {
    for (const auto& m : messages_)
      if (m.is_self()) return &m;
    return nullptr;
  }

  // Ascending by value; ties keep insertion order.
  std::vector<Message> sorted_by_value() const {
    auto out = messages_;
    std::stable_sort(out.begin(), out.end(), [](const Message& a, const Message& b) { return a.value < b.value; });
    return out;
  }

 private:
  NodeId destination_ = 0;
  std::vector<Message> messages_;
};

namespace detail {
inline void collect_paths_into(const DiGraph& g, std::vector<NodeId>& rev, NodeSet used, int hops_left,
                               std::vector<Path>& out) {
  for (NodeId j : g.in_neighbors(rev.back())) {
    if (used.contains(j)) continue;
    rev.push_back(j);
    out.emplace_back(std::vector<NodeId>(rev.rbegin(), rev.rend()));
    if (hops_left > 1) collect_paths_into(g, rev, used | NodeSet{j}, hops_left - 1, out);
    rev.pop_back();
  }
}
}  // namespace detail

// Every simple path of 1..l hops ending at i, sorted lexicographically.
inline std::vector<Path> all_paths_into(const DiGraph& g, NodeId i, int l) {
  g.require_node(i);
  if (l < 1) throw std::domain_error("hop count must be >= 1");
  std::vector<Path> out;
  std::vector<NodeId> rev{i};
  detail::collect_paths_into(g, rev, NodeSet{i}, l, out);
  std::sort(out.begin(), out.end());
  return out;
}

// Per-destination path lists for one graph; they depend only on the graph and
// l, so the engine computes them once per scheduled graph.
class RelayPlan {
 public:
  RelayPlan() = default;
  RelayPlan(const DiGraph& g, int l) : n_(g.node_count()), l_(l), paths_(static_cast<std::size_t>(g.node_count()) + 1) {
    for (NodeId i = 1; i <= n_; ++i) paths_[static_cast<std::size_t>(i)] = all_paths_into(g, i, l);
  }
  int node_count() const { return n_; }
  int hops() const { return l_; }
  const std::vector<Path>& into(NodeId i) const { return paths_.at(static_cast<std::size_t>(i)); }

 private:
  int n_ = 0;
  int l_ = 0;
  std::vector<std::vector<Path>> paths_;
};

// Adversarial rewriting of values in flight. `tamper` is consulted for every
// node in `adversaries` that sits on a path, in path order: position 0 is the
// source emitting its own value, later positions are relays forwarding what
// they received. Paths themselves are never altered.
struct RelayHooks {
  NodeSet adversaries;
  std::function<double(NodeId self, const Path& path, std::size_t position, long long round, double incoming)> tamper;
};

// Synchronous delivery over g: each node receives its self-message plus one
// message per simple path of at most l hops that ends at it.
inline std::vector<MessageSet> relay_round(const RelayPlan& plan, const std::vector<double>& states,
                                           const RelayHooks& hooks, long long round) {
  const int n = plan.node_count();
  if (static_cast<int>(states.size()) != n + 1)
    throw std::domain_error("state vector must hold one entry per node plus an unused slot 0");
  std::vector<MessageSet> out;
  out.reserve(static_cast<std::size_t>(n) + 1);
  out.emplace_back(0);
  for (NodeId i = 1; i <= n; ++i) {
    MessageSet ms(i);
    ms.add({states[static_cast<std::size_t>(i)], Path{i}, round, false});
    for (const Path& p : plan.into(i)) {
      double w = states[static_cast<std::size_t>(p.source())];
      bool tampered = false;
      if (hooks.tamper && p.node_set().intersects(hooks.adversaries)) {
        for (std::size_t pos = 0; pos + 1 < p.size(); ++pos) {
          if (!hooks.adversaries.contains(p[pos])) continue;
          const double next = hooks.tamper(p[pos], p, pos, round, w);
          if (next != w) tampered = true;
          w = next;
        }
      }
      ms.add({w, p, round, tampered});
    }
    out.push_back(std::move(ms));
  }
  return out;
}

inline std::vector<MessageSet> relay_round(const DiGraph& g, const std::vector<double>& states,
                                           const RelayHooks& hooks, int l, long long round = 0) {
  return relay_round(RelayPlan(g, l), states, hooks, round);
}

struct MessageCover {
  NodeSet nodes;
  int cardinality = 0;
};

namespace detail {

inline void cover_search(const std::vector<NodeSet>& sets, NodeSet chosen, int depth, int& best, NodeSet& best_set) {
  if (depth >= best) return;
  // Pairwise disjoint un-hit sets each need their own cover node.
  int packed = 0;
  NodeSet pack_used;
  const NodeSet* branch = nullptr;
  for (const auto& s : sets) {
    if (s.intersects(chosen)) continue;
    if (!branch || s.size() < branch->size()) branch = &s;
    if (!s.intersects(pack_used)) {
      pack_used |= s;
      ++packed;
    }
  }
  if (!branch) {
    best = depth;
    best_set = chosen;
    return;
  }
  if (depth + packed >= best) return;
  for (NodeId v : *branch) cover_search(sets, chosen | NodeSet{v}, depth + 1, best, best_set);
}

inline std::vector<NodeSet> cover_targets(const std::vector<const Message*>& msgs, NodeId dst) {
  std::vector<NodeSet> sets;
  sets.reserve(msgs.size());
  for (const Message* m : msgs) {
    if (m->destination() != dst) throw std::domain_error("messages in a cover query must share one destination");
    if (m->is_self()) throw std::domain_error("a node's own value has no cover");
    sets.push_back(m->path.node_set() - NodeSet{dst});
  }
  std::sort(sets.begin(), sets.end(), [](NodeSet a, NodeSet b) { return canonical_less(a, b); });
  sets.erase(std::unique(sets.begin(), sets.end()), sets.end());
  // Hitting a subset hits every superset.
  std::vector<NodeSet> minimal;
  for (const auto& s : sets) {
    bool redundant = false;
    for (const auto& t : minimal)
      if (t.is_subset_of(s)) {
        redundant = true;
        break;
      }
    if (!redundant) minimal.push_back(s);
  }
  return minimal;
}

inline MessageCover minimum_cover_of(const std::vector<const Message*>& msgs, NodeId dst) {
  if (msgs.empty()) return {};
  const auto sets = cover_targets(msgs, dst);
  int best = static_cast<int>(sets.size()) + 1;
  NodeSet best_set;
  cover_search(sets, NodeSet{}, 0, best, best_set);
  return {best_set, best};
}

}  // namespace detail

// Smallest node set, excluding the destination, meeting every message path.
inline MessageCover minimum_message_cover(const std::vector<Message>& msgs) {
  if (msgs.empty()) throw std::domain_error("minimum_message_cover needs at least one message");
  std::vector<const Message*> ptrs;
  for (const auto& m : msgs) ptrs.push_back(&m);
  return detail::minimum_cover_of(ptrs, msgs.front().destination());
}

inline MessageCover minimum_message_cover(const MessageSet& ms) { return minimum_message_cover(ms.messages()); }

}  // namespace rclab
