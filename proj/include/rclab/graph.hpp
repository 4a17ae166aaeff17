#pragma once

// Time-varying directed graphs on a fixed node set, bounded-length paths,
// l-hop neighborhoods, unions and powers.
//
// Node ids are 1-based. An edge (j, i) means node i receives from node j.

#include <algorithm>
#include <bit>
#include <compare>
#include <cstdint>
#include <initializer_list>
#include <iterator>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rclab {

using NodeId = int;

// Node sets are 64-bit masks; bit 0 is unused so ids map to bits directly.
inline constexpr int kMaxNodes = 63;

class NodeSet {
 public:
  class iterator {
   public:
    using iterator_category = std::forward_iterator_tag;
    using value_type = NodeId;
    using difference_type = std::ptrdiff_t;
    using pointer = const NodeId*;
    using reference = NodeId;

    constexpr iterator() = default;
    constexpr explicit iterator(std::uint64_t rest) : rest_(rest) {}
    NodeId operator*() const { return std::countr_zero(rest_); }
    iterator& operator++() {
      rest_ &= rest_ - 1;
      return *this;
    }
    iterator operator++(int) {
      auto copy = *this;
      ++*this;
      return copy;
    }
    friend constexpr bool operator==(iterator a, iterator b) { return a.rest_ == b.rest_; }

   private:
    std::uint64_t rest_ = 0;
  };

  constexpr NodeSet() = default;
  constexpr explicit NodeSet(std::uint64_t bits) : bits_(bits & ~std::uint64_t{1}) {}
  NodeSet(std::initializer_list<NodeId> ids) {
    for (NodeId id : ids) insert(id);
  }
  template <typename Range>
  static NodeSet from(const Range& ids) {
    NodeSet s;
    for (NodeId id : ids) s.insert(id);
    return s;
  }
  // All ids in [first, last].
  static NodeSet range(NodeId first, NodeId last) {
    NodeSet s;
    for (NodeId id = first; id <= last; ++id) s.insert(id);
    return s;
  }

  bool contains(NodeId id) const { return id >= 1 && id <= kMaxNodes && ((bits_ >> id) & 1U); }
  void insert(NodeId id) {
    if (id < 1 || id > kMaxNodes) throw std::domain_error("node id out of range: " + std::to_string(id));
    bits_ |= std::uint64_t{1} << id;
  }
  void erase(NodeId id) {
    if (id >= 1 && id <= kMaxNodes) bits_ &= ~(std::uint64_t{1} << id);
  }

  int size() const { return std::popcount(bits_); }
  bool empty() const { return bits_ == 0; }
  std::uint64_t bits() const { return bits_; }
  NodeId min() const { return empty() ? 0 : std::countr_zero(bits_); }

  bool is_subset_of(NodeSet other) const { return (bits_ & ~other.bits_) == 0; }
  bool intersects(NodeSet other) const { return (bits_ & other.bits_) != 0; }

  iterator begin() const { return iterator{bits_}; }
  iterator end() const { return iterator{0}; }

  std::vector<NodeId> to_vector() const { return {begin(), end()}; }

  std::string to_string() const {
    std::ostringstream os;
    os << '{';
    bool first = true;
    for (NodeId id : *this) {
      if (!first) os << ',';
      os << id;
      first = false;
    }
    os << '}';
    return os.str();
  }

  NodeSet& operator|=(NodeSet o) {
    bits_ |= o.bits_;
    return *this;
  }
  NodeSet& operator&=(NodeSet o) {
    bits_ &= o.bits_;
    return *this;
  }
  NodeSet& operator-=(NodeSet o) {
    bits_ &= ~o.bits_;
    return *this;
  }
  friend NodeSet operator|(NodeSet a, NodeSet b) { return a |= b; }
  friend NodeSet operator&(NodeSet a, NodeSet b) { return a &= b; }
  friend NodeSet operator-(NodeSet a, NodeSet b) { return a -= b; }
  friend bool operator==(NodeSet a, NodeSet b) = default;

  // Size first, then lexicographic on the sorted id sequence. This is the
  // order in which checkers enumerate subsets.
  friend bool canonical_less(NodeSet a, NodeSet b) {
    if (a.size() != b.size()) return a.size() < b.size();
    auto x = a.bits_, y = b.bits_;
    while (x != 0 && y != 0) {
      int ax = std::countr_zero(x), by = std::countr_zero(y);
      if (ax != by) return ax < by;
      x &= x - 1;
      y &= y - 1;
    }
    return false;
  }

 private:
  std::uint64_t bits_ = 0;
};

// Calls fn(subset) for every k-element subset of `pool`, in lexicographic order
// of the sorted id sequences. Stops early when fn returns false; returns
// whether the enumeration ran to completion.
template <typename Fn>
bool for_each_subset_of_size(NodeSet pool, int k, Fn&& fn) {
  const auto ids = pool.to_vector();
  const int n = static_cast<int>(ids.size());
  if (k < 0 || k > n) return true;
  std::vector<int> idx(static_cast<std::size_t>(k));
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    NodeSet s;
    for (int p : idx) s.insert(ids[static_cast<std::size_t>(p)]);
    if (!fn(s)) return false;
    int pos = k - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == n - k + pos) --pos;
    if (pos < 0) return true;
    ++idx[static_cast<std::size_t>(pos)];
    for (int q = pos + 1; q < k; ++q) idx[static_cast<std::size_t>(q)] = idx[static_cast<std::size_t>(q - 1)] + 1;
  }
}

struct Edge {
  NodeId from = 0;
  NodeId to = 0;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

class DiGraph {
 public:
  DiGraph() = default;
  explicit DiGraph(int n) : n_(n), in_(static_cast<std::size_t>(n) + 1), out_(static_cast<std::size_t>(n) + 1) {
    if (n < 0 || n > kMaxNodes) throw std::domain_error("node count out of range: " + std::to_string(n));
  }
  DiGraph(int n, std::initializer_list<Edge> edges) : DiGraph(n) {
    for (const auto& e : edges) add_edge(e.from, e.to);
  }

  int node_count() const { return n_; }
  NodeSet nodes() const { return n_ == 0 ? NodeSet{} : NodeSet::range(1, n_); }
  bool valid(NodeId id) const { return id >= 1 && id <= n_; }
  void require_node(NodeId id) const {
    if (!valid(id)) throw std::domain_error("invalid node id " + std::to_string(id) + " for graph on " + std::to_string(n_) + " nodes");
  }

  // Adding an edge twice is a no-op.
  void add_edge(NodeId from, NodeId to) {
    require_node(from);
    require_node(to);
    if (from == to) throw std::domain_error("self-loop on node " + std::to_string(from));
    in_[static_cast<std::size_t>(to)].insert(from);
    out_[static_cast<std::size_t>(from)].insert(to);
  }
  void add_undirected(NodeId a, NodeId b) {
    add_edge(a, b);
    add_edge(b, a);
  }

  bool has_edge(NodeId from, NodeId to) const { return valid(to) && in_[static_cast<std::size_t>(to)].contains(from); }
  NodeSet in_neighbors(NodeId i) const {
    require_node(i);
    return in_[static_cast<std::size_t>(i)];
  }
  NodeSet out_neighbors(NodeId i) const {
    require_node(i);
    return out_[static_cast<std::size_t>(i)];
  }
  int in_degree(NodeId i) const { return in_neighbors(i).size(); }

  std::size_t edge_count() const {
    std::size_t c = 0;
    for (NodeId i = 1; i <= n_; ++i) c += static_cast<std::size_t>(in_[static_cast<std::size_t>(i)].size());
    return c;
  }

  std::vector<Edge> edges() const {
    std::vector<Edge> out;
    for (NodeId j = 1; j <= n_; ++j)
      for (NodeId i : out_[static_cast<std::size_t>(j)]) out.push_back({j, i});
    return out;
  }

  // Subgraph induced by `keep`; removed nodes stay as isolated ids.
  DiGraph induced(NodeSet keep) const {
    DiGraph g(n_);
    for (NodeId i = 1; i <= n_; ++i) {
      if (!keep.contains(i)) continue;
      g.in_[static_cast<std::size_t>(i)] = in_[static_cast<std::size_t>(i)] & keep;
      g.out_[static_cast<std::size_t>(i)] = out_[static_cast<std::size_t>(i)] & keep;
    }
    return g;
  }

  DiGraph reversed() const {
    DiGraph g(n_);
    g.in_ = out_;
    g.out_ = in_;
    return g;
  }

  friend bool operator==(const DiGraph&, const DiGraph&) = default;

 private:
  int n_ = 0;
  std::vector<NodeSet> in_;
  std::vector<NodeSet> out_;
};

// A simple directed path, source first and destination last.
class Path {
 public:
  Path() = default;
  explicit Path(std::vector<NodeId> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw std::domain_error("empty path");
    NodeSet seen;
    for (NodeId id : nodes_) {
      if (seen.contains(id)) throw std::domain_error("path repeats node " + std::to_string(id));
      seen.insert(id);
    }
    set_ = seen;
  }
  Path(std::initializer_list<NodeId> nodes) : Path(std::vector<NodeId>(nodes)) {}

  const std::vector<NodeId>& nodes() const { return nodes_; }
  NodeId source() const { return nodes_.front(); }
  NodeId destination() const { return nodes_.back(); }
  int hops() const { return static_cast<int>(nodes_.size()) - 1; }
  NodeSet node_set() const { return set_; }
  NodeId operator[](std::size_t k) const { return nodes_[k]; }
  std::size_t size() const { return nodes_.size(); }

  std::string to_string(char sep = ',') const {
    std::ostringstream os;
    os << '(';
    for (std::size_t k = 0; k < nodes_.size(); ++k) os << (k ? std::string(1, sep) : std::string()) << nodes_[k];
    os << ')';
    return os.str();
  }

  friend bool operator==(const Path& a, const Path& b) { return a.nodes_ == b.nodes_; }
  friend auto operator<=>(const Path& a, const Path& b) { return a.nodes_ <=> b.nodes_; }

 private:
  std::vector<NodeId> nodes_;
  NodeSet set_;
};

// Nodes that reach i through paths of at most l hops; includes i.
inline NodeSet in_neighbors_l(const DiGraph& g, NodeId i, int l) {
  g.require_node(i);
  if (l < 1) throw std::domain_error("hop count must be >= 1");
  NodeSet reached{i};
  NodeSet frontier{i};
  for (int hop = 0; hop < l && !frontier.empty(); ++hop) {
    NodeSet next;
    for (NodeId v : frontier) next |= g.in_neighbors(v);
    frontier = next - reached;
    reached |= frontier;
  }
  return reached;
}

// Nodes reachable from i through paths of at most l hops; includes i.
inline NodeSet out_neighbors_l(const DiGraph& g, NodeId i, int l) {
  g.require_node(i);
  if (l < 1) throw std::domain_error("hop count must be >= 1");
  NodeSet reached{i};
  NodeSet frontier{i};
  for (int hop = 0; hop < l && !frontier.empty(); ++hop) {
    NodeSet next;
    for (NodeId v : frontier) next |= g.out_neighbors(v);
    frontier = next - reached;
    reached |= frontier;
  }
  return reached;
}

namespace detail {
inline void extend_paths(const DiGraph& g, std::vector<NodeId>& prefix, NodeSet used, NodeId dst, int hops_left,
                         std::vector<Path>& out) {
  const NodeId tail = prefix.back();
  for (NodeId next : g.out_neighbors(tail)) {
    if (used.contains(next)) continue;
    prefix.push_back(next);
    if (next == dst) {
      out.emplace_back(prefix);
    } else if (hops_left > 1) {
      NodeSet u = used;
      u.insert(next);
      extend_paths(g, prefix, u, dst, hops_left - 1, out);
    }
    prefix.pop_back();
  }
}
}  // namespace detail

// All simple paths of at most l hops from src to dst, in lexicographic order.
inline std::vector<Path> paths_to(const DiGraph& g, NodeId src, NodeId dst, int l) {
  g.require_node(src);
  g.require_node(dst);
  if (src == dst) throw std::domain_error("paths_to requires distinct endpoints");
  if (l < 1) throw std::domain_error("hop count must be >= 1");
  std::vector<Path> out;
  std::vector<NodeId> prefix{src};
  detail::extend_paths(g, prefix, NodeSet{src}, dst, l, out);
  std::sort(out.begin(), out.end());
  return out;
}

// Edge (j, i) present iff g has a path of at most l hops from j to i.
inline DiGraph graph_power(const DiGraph& g, int l) {
  if (l < 1) throw std::domain_error("hop count must be >= 1");
  DiGraph p(g.node_count());
  for (NodeId i = 1; i <= g.node_count(); ++i)
    for (NodeId j : in_neighbors_l(g, i, l))
      if (j != i) p.add_edge(j, i);
  return p;
}

struct StepRange {
  int begin = 0;  // inclusive
  int end = 0;    // exclusive
  int length() const { return end - begin; }
  friend bool operator==(const StepRange&, const StepRange&) = default;
};

// A finite list of graphs replayed cyclically. The interval partition covers
// one period and repeats with it.
class TopologySchedule {
 public:
  TopologySchedule() = default;
  TopologySchedule(std::vector<DiGraph> graphs, std::vector<int> interval_lengths, std::vector<std::string> names = {})
      : graphs_(std::move(graphs)), names_(std::move(names)) {
    if (graphs_.empty()) throw std::domain_error("schedule needs at least one graph");
    const int n = graphs_.front().node_count();
    for (const auto& g : graphs_)
      if (g.node_count() != n) throw std::domain_error("all scheduled graphs must share the node set");
    if (interval_lengths.empty()) interval_lengths.assign(graphs_.size(), 1);
    int start = 0;
    for (int len : interval_lengths) {
      if (len < 1) throw std::domain_error("interval lengths must be positive");
      intervals_.push_back({start, start + len});
      start += len;
    }
    if (start != period())
      throw std::domain_error("interval lengths sum to " + std::to_string(start) + " but the schedule has " +
                              std::to_string(period()) + " graphs");
    if (names_.empty())
      for (std::size_t k = 0; k < graphs_.size(); ++k) names_.push_back("g" + std::to_string(k));
    if (names_.size() != graphs_.size()) throw std::domain_error("one name per scheduled graph");
  }

  static TopologySchedule single(DiGraph g, std::string name = "static") {
    return TopologySchedule({std::move(g)}, {1}, {std::move(name)});
  }

  int node_count() const { return graphs_.empty() ? 0 : graphs_.front().node_count(); }
  int period() const { return static_cast<int>(graphs_.size()); }
  const DiGraph& at(long long k) const {
    if (k < 0) throw std::domain_error("negative time step");
    return graphs_[static_cast<std::size_t>(k % period())];
  }
  const std::vector<DiGraph>& graphs() const { return graphs_; }
  const std::vector<std::string>& names() const { return names_; }
  const std::vector<StepRange>& intervals() const { return intervals_; }
  int max_interval_length() const {
    int m = 0;
    for (const auto& iv : intervals_) m = std::max(m, iv.length());
    return m;
  }
  std::vector<int> interval_lengths() const {
    std::vector<int> out;
    for (const auto& iv : intervals_) out.push_back(iv.length());
    return out;
  }

 private:
  std::vector<DiGraph> graphs_;
  std::vector<std::string> names_;
  std::vector<StepRange> intervals_;
};

// Union of the graphs at steps [range.begin, range.end).
inline DiGraph union_graph(const TopologySchedule& s, StepRange range) {
  if (range.length() <= 0) throw std::domain_error("empty step range");
  if (range.begin < 0) throw std::domain_error("negative time step");
  DiGraph u(s.node_count());
  for (int k = range.begin; k < range.end; ++k)
    for (const auto& e : s.at(k).edges()) u.add_edge(e.from, e.to);
  return u;
}

}  // namespace rclab
