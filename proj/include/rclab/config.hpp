#pragma once

// JSON topology and scenario files: parsing with located errors, canonical
// serialization and fingerprints.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rclab/engine.hpp"
#include "rclab/robustness.hpp"

namespace rclab {

using json = nlohmann::json;

inline constexpr const char* kTopologyFormat = "rclab-topology/1";
inline constexpr const char* kScenarioFormat = "rclab-scenario/1";

// Parse or validation failure; `where` is a file name, optionally followed by
// a JSON pointer or a line/column.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(std::move(where)) {}
  const std::string& where() const { return where_; }

 private:
  std::string where_;
};

// A robustness statement recorded next to a topology and checked by tests.
struct RobustnessClaim {
  int r = 1;
  int l = 1;
  int f = 0;
  bool holds = true;
  std::optional<NodeSet> removed;    // expected certificate F
  std::optional<NodeSet> followers;  // expected certificate S
};

struct Topology {
  std::string name;
  std::string description;
  NodeSet leaders;
  TopologySchedule schedule;
  std::vector<RobustnessClaim> claims;
};

namespace detail {

struct Cursor {
  const json& j;
  std::string file;
  std::string ptr;

  Cursor at(const std::string& key) const {
    if (!j.is_object()) fail("expected an object");
    if (!j.contains(key)) fail("missing field '" + key + "'");
    return {j.at(key), file, ptr + "/" + key};
  }
  Cursor at(std::size_t idx) const { return {j.at(idx), file, ptr + "/" + std::to_string(idx)}; }
  bool has(const std::string& key) const { return j.is_object() && j.contains(key); }
  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(file + ":" + (ptr.empty() ? "/" : ptr), what); }

  int integer() const {
    if (!j.is_number_integer()) fail("expected an integer");
    return j.get<int>();
  }
  double number() const {
    if (!j.is_number()) fail("expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail("number is not finite");
    return v;
  }
  std::string string() const {
    if (!j.is_string()) fail("expected a string");
    return j.get<std::string>();
  }
  bool boolean() const {
    if (!j.is_boolean()) fail("expected true or false");
    return j.get<bool>();
  }
  const json& array() const {
    if (!j.is_array()) fail("expected a list");
    return j;
  }
  NodeId node(int n) const {
    const int id = integer();
    if (id < 1 || id > n) fail("node id " + std::to_string(id) + " outside 1.." + std::to_string(n));
    return id;
  }
  NodeSet nodes(int n) const {
    array();
    NodeSet s;
    for (std::size_t k = 0; k < j.size(); ++k) s.insert(at(k).node(n));
    return s;
  }
  std::vector<double> numbers() const {
    array();
    std::vector<double> out;
    for (std::size_t k = 0; k < j.size(); ++k) out.push_back(at(k).number());
    return out;
  }
};

inline json read_json_file(const std::filesystem::path& p) {
  std::ifstream in(p);
  if (!in) throw ConfigError(p.string(), "cannot open file");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    // Translate the byte offset into line and column.
    std::size_t line = 1, col = 1;
    for (std::size_t k = 0; k + 1 < e.byte && k < text.size(); ++k) {
      if (text[k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(p.string() + ":" + std::to_string(line) + ":" + std::to_string(col), "malformed JSON");
  }
}

inline json nodes_json(NodeSet s) { return json(s.to_vector()); }

inline void add_edge_checked(DiGraph& g, const Cursor& c, NodeId from, NodeId to) {
  if (from == to) c.fail("self-loop on node " + std::to_string(from));
  g.add_edge(from, to);
}

inline DiGraph parse_graph(const Cursor& c, int n) {
  DiGraph g(n);
  if (c.has("edges")) {
    const Cursor edges = c.at("edges");
    edges.array();
    for (std::size_t k = 0; k < edges.j.size(); ++k) {
      const Cursor e = edges.at(k);
      if (e.j.is_array()) {
        if (e.j.size() != 2) e.fail("an edge is [from, to]");
        add_edge_checked(g, e, e.at(std::size_t{0}).node(n), e.at(std::size_t{1}).node(n));
      } else {
        const NodeId a = e.at("from").node(n);
        const NodeId b = e.at("to").node(n);
        add_edge_checked(g, e, a, b);
        if (e.has("undirected") && e.at("undirected").boolean()) add_edge_checked(g, e, b, a);
      }
    }
  }
  if (c.has("undirected")) {
    const Cursor und = c.at("undirected");
    und.array();
    for (std::size_t k = 0; k < und.j.size(); ++k) {
      const Cursor e = und.at(k);
      if (!e.j.is_array() || e.j.size() != 2) e.fail("an undirected edge is [a, b]");
      const NodeId a = e.at(std::size_t{0}).node(n), b = e.at(std::size_t{1}).node(n);
      add_edge_checked(g, e, a, b);
      add_edge_checked(g, e, b, a);
    }
  }
  return g;
}

}  // namespace detail

// `pointer` locates j inside a larger document, for error messages.
inline Topology parse_topology(const json& j, const std::string& file = "<topology>", const std::string& pointer = "") {
  detail::Cursor root{j, file, pointer};
  if (!j.is_object()) root.fail("expected an object");
  if (root.has("format") && root.at("format").string() != kTopologyFormat)
    root.at("format").fail("unsupported format, expected " + std::string(kTopologyFormat));
  Topology t;
  t.name = root.has("name") ? root.at("name").string() : "";
  t.description = root.has("description") ? root.at("description").string() : "";
  const int n = root.at("n").integer();
  if (n < 1 || n > kMaxNodes) root.at("n").fail("node count must be in 1.." + std::to_string(kMaxNodes));
  t.leaders = root.at("leaders").nodes(n);

  std::vector<DiGraph> graphs;
  std::vector<std::string> names;
  if (root.has("schedule")) {
    const auto sc = root.at("schedule");
    sc.array();
    if (sc.j.empty()) sc.fail("schedule needs at least one graph");
    for (std::size_t k = 0; k < sc.j.size(); ++k) {
      const auto g = sc.at(k);
      graphs.push_back(detail::parse_graph(g, n));
      names.push_back(g.has("name") ? g.at("name").string() : "g" + std::to_string(k));
    }
  } else {
    graphs.push_back(detail::parse_graph(root, n));
    names.push_back("static");
  }
  std::vector<int> lengths;
  if (root.has("intervals")) {
    const auto iv = root.at("intervals");
    iv.array();
    for (std::size_t k = 0; k < iv.j.size(); ++k) {
      const int len = iv.at(k).integer();
      if (len < 1) iv.at(k).fail("interval lengths must be positive");
      lengths.push_back(len);
    }
  }
  try {
    t.schedule = TopologySchedule(std::move(graphs), std::move(lengths), std::move(names));
  } catch (const std::domain_error& e) {
    (root.has("intervals") ? root.at("intervals") : root).fail(e.what());
  }
  if (root.has("claims")) {
    const auto cl = root.at("claims");
    cl.array();
    for (std::size_t k = 0; k < cl.j.size(); ++k) {
      const auto c = cl.at(k);
      RobustnessClaim claim;
      claim.r = c.at("r").integer();
      claim.l = c.at("l").integer();
      claim.f = c.at("f").integer();
      claim.holds = c.at("holds").boolean();
      if (c.has("certificate")) {
        const auto cert = c.at("certificate");
        if (cert.has("F")) claim.removed = cert.at("F").nodes(n);
        if (cert.has("S")) claim.followers = cert.at("S").nodes(n);
      }
      t.claims.push_back(claim);
    }
  }
  return t;
}

inline Topology load_topology(const std::filesystem::path& p) { return parse_topology(detail::read_json_file(p), p.string()); }

inline json serialize(const TopologySchedule& s) {
  json sched = json::array();
  for (int k = 0; k < s.period(); ++k) {
    json edges = json::array();
    for (const auto& e : s.at(k).edges()) edges.push_back({e.from, e.to});
    sched.push_back({{"name", s.names()[static_cast<std::size_t>(k)]}, {"edges", edges}});
  }
  return sched;
}

inline json serialize(const Topology& t) {
  json j;
  j["format"] = kTopologyFormat;
  j["name"] = t.name;
  if (!t.description.empty()) j["description"] = t.description;
  j["n"] = t.schedule.node_count();
  j["leaders"] = detail::nodes_json(t.leaders);
  j["schedule"] = serialize(t.schedule);
  j["intervals"] = t.schedule.interval_lengths();
  if (!t.claims.empty()) {
    json cl = json::array();
    for (const auto& c : t.claims) {
      json o{{"r", c.r}, {"l", c.l}, {"f", c.f}, {"holds", c.holds}};
      if (c.removed || c.followers) {
        json cert = json::object();
        if (c.removed) cert["F"] = detail::nodes_json(*c.removed);
        if (c.followers) cert["S"] = detail::nodes_json(*c.followers);
        o["certificate"] = cert;
      }
      cl.push_back(o);
    }
    j["claims"] = cl;
  }
  return j;
}

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace detail {

inline const char* wave_name(Waveform w) {
  switch (w) {
    case Waveform::constant:
      return "constant";
    case Waveform::square:
      return "square";
    case Waveform::sine:
      return "sine";
  }
  return "?";
}

inline ReferenceFunction parse_reference(const Cursor& c) {
  if (c.j.is_number()) return ReferenceFunction(c.number());
  c.array();
  std::vector<ReferenceFunction::Piece> pieces;
  for (std::size_t k = 0; k < c.j.size(); ++k) {
    const auto p = c.at(k);
    pieces.push_back({p.at("start").integer(), p.at("value").number()});
  }
  try {
    return ReferenceFunction(std::move(pieces));
  } catch (const std::domain_error& e) {
    c.fail(e.what());
  }
}

inline json reference_json(const ReferenceFunction& r) {
  json a = json::array();
  for (const auto& p : r.pieces()) a.push_back({{"start", p.start}, {"value", p.value}});
  return a;
}

// Per-axis rows of per-node values; a flat list is accepted for one axis.
inline std::vector<std::vector<double>> parse_table(const Cursor& c, int axes, int n) {
  c.array();
  std::vector<std::vector<double>> rows;
  const bool flat = !c.j.empty() && c.j.front().is_number();
  auto row_of = [&](const Cursor& r) {
    auto vals = r.numbers();
    if (static_cast<int>(vals.size()) != n) r.fail("expected " + std::to_string(n) + " values, one per node");
    vals.insert(vals.begin(), 0.0);
    return vals;
  };
  if (flat) {
    rows.push_back(row_of(c));
  } else {
    for (std::size_t k = 0; k < c.j.size(); ++k) rows.push_back(row_of(c.at(k)));
  }
  if (static_cast<int>(rows.size()) != axes) c.fail("expected one row per axis (" + std::to_string(axes) + ")");
  return rows;
}

inline json table_json(const std::vector<std::vector<double>>& t) {
  json a = json::array();
  for (const auto& row : t) a.push_back(std::vector<double>(row.begin() + 1, row.end()));
  return a;
}

inline Oscillation parse_oscillation(const Cursor& c) {
  Oscillation o;
  if (c.has("wave")) {
    const std::string w = c.at("wave").string();
    if (w == "constant")
      o.wave = Waveform::constant;
    else if (w == "square")
      o.wave = Waveform::square;
    else if (w == "sine")
      o.wave = Waveform::sine;
    else
      c.at("wave").fail("unknown waveform '" + w + "' (constant, square or sine)");
  }
  o.center = c.at("center").number();
  if (c.has("amplitude")) o.amplitude = c.at("amplitude").number();
  if (c.has("period")) o.period = c.at("period").integer();
  if (o.wave == Waveform::constant) o.amplitude = 0.0;
  if (o.period < 1) c.at("period").fail("period must be >= 1");
  return o;
}

inline AttackScript parse_attack(const Cursor& c, int n) {
  AttackScript s;
  s.node = c.at("node").node(n);
  if (c.has("model")) {
    const std::string m = c.at("model").string();
    if (m == "byzantine")
      s.model = AdversaryModel::byzantine;
    else if (m == "malicious")
      s.model = AdversaryModel::malicious;
    else
      c.at("model").fail("unknown model '" + m + "' (byzantine or malicious)");
  }
  if (c.has("relay")) {
    const std::string r = c.at("relay").string();
    if (r == "same")
      s.relay = RelayMode::same;
    else if (r == "identity")
      s.relay = RelayMode::identity;
    else
      c.at("relay").fail("unknown relay mode '" + r + "' (same or identity)");
  }
  if (c.has("key")) {
    const std::string k = c.at("key").string();
    if (k == "next-hop")
      s.key = GroupKey::next_hop;
    else if (k == "destination")
      s.key = GroupKey::destination;
    else
      c.at("key").fail("unknown group key '" + k + "' (next-hop or destination)");
  }
  const auto emit = c.at("emit");
  emit.array();
  for (std::size_t k = 0; k < emit.j.size(); ++k) {
    const auto g = emit.at(k);
    EmitGroup grp;
    if (g.has("to")) grp.receivers = g.at("to").nodes(n);
    grp.value = parse_oscillation(g);
    s.groups.push_back(grp);
  }
  try {
    s.validate();
  } catch (const std::domain_error& e) {
    c.fail(e.what());
  }
  return s;
}

inline json attack_json(const AttackScript& s) {
  json emit = json::array();
  for (const auto& g : s.groups) {
    json o{{"wave", wave_name(g.value.wave)}, {"center", g.value.center}};
    if (g.value.wave != Waveform::constant) {
      o["amplitude"] = g.value.amplitude;
      o["period"] = g.value.period;
    }
    if (!g.receivers.empty()) o["to"] = nodes_json(g.receivers);
    emit.push_back(o);
  }
  return {{"node", s.node},
          {"model", s.model == AdversaryModel::byzantine ? "byzantine" : "malicious"},
          {"relay", s.relay == RelayMode::same ? "same" : "identity"},
          {"key", s.key == GroupKey::next_hop ? "next-hop" : "destination"},
          {"emit", emit}};
}

}  // namespace detail

struct LoadedScenario {
  Scenario scenario;
  Topology topology;
  std::string description;
  // Outcome the corpus promises for this scenario; not part of the fingerprint.
  std::optional<RunStatus> expect;
};

// `base` resolves a topology given as a relative file name.
inline LoadedScenario parse_scenario(const json& j, const std::string& file = "<scenario>",
                                     const std::filesystem::path& base = {}) {
  detail::Cursor root{j, file, ""};
  if (!j.is_object()) root.fail("expected an object");
  if (root.has("format") && root.at("format").string() != kScenarioFormat)
    root.at("format").fail("unsupported format, expected " + std::string(kScenarioFormat));
  LoadedScenario out;
  Scenario& s = out.scenario;
  s.name = root.has("name") ? root.at("name").string() : "";
  out.description = root.has("description") ? root.at("description").string() : "";
  if (root.has("expect")) {
    const std::string e = root.at("expect").string();
    if (e == "converged")
      out.expect = RunStatus::converged;
    else if (e == "stalled")
      out.expect = RunStatus::stalled;
    else if (e == "budget-exhausted")
      out.expect = RunStatus::budget_exhausted;
    else
      root.at("expect").fail("unknown outcome '" + e + "' (converged, stalled or budget-exhausted)");
  }

  const auto topo = root.at("topology");
  if (topo.j.is_string()) {
    const std::filesystem::path p = base / topo.string();
    try {
      out.topology = load_topology(p);
    } catch (const ConfigError& e) {
      topo.fail(std::string("in referenced topology: ") + e.what());
    }
  } else {
    out.topology = parse_topology(topo.j, file, "/topology");
  }
  s.schedule = out.topology.schedule;
  s.leaders = out.topology.leaders;
  const int n = s.schedule.node_count();

  const std::string alg = root.at("algorithm").string();
  if (alg == "mw-msr")
    s.algorithm = Algorithm::mw_msr;
  else if (alg == "mdp-msr")
    s.algorithm = Algorithm::mdp_msr;
  else if (alg == "mw-msr-secure")
    s.algorithm = Algorithm::mw_msr_secure;
  else
    root.at("algorithm").fail("unknown algorithm '" + alg + "' (mw-msr, mdp-msr or mw-msr-secure)");
  s.f = root.at("f").integer();
  s.l = root.at("l").integer();
  if (root.has("T")) s.T = root.at("T").number();
  if (root.has("beta")) s.beta = root.at("beta").number();
  s.axes = root.has("axes") ? root.at("axes").integer() : 1;
  if (s.axes < 1) root.at("axes").fail("axes must be >= 1");

  const auto ref = root.at("reference");
  if (ref.j.is_array() && !ref.j.empty() && ref.j.front().is_array()) {
    for (std::size_t k = 0; k < ref.j.size(); ++k) s.reference.push_back(detail::parse_reference(ref.at(k)));
    if (static_cast<int>(s.reference.size()) != s.axes) ref.fail("expected one reference per axis");
  } else {
    s.reference.assign(static_cast<std::size_t>(s.axes), detail::parse_reference(ref));
  }
  s.init_x = detail::parse_table(root.at("init"), s.axes, n);
  if (root.has("velocity")) s.init_v = detail::parse_table(root.at("velocity"), s.axes, n);
  if (root.has("delta")) s.delta = detail::parse_table(root.at("delta"), s.axes, n);
  if (root.has("adversaries")) {
    const auto adv = root.at("adversaries");
    adv.array();
    for (std::size_t k = 0; k < adv.j.size(); ++k) s.adversaries.push_back(detail::parse_attack(adv.at(k), n));
  }
  if (root.has("engine")) {
    const auto e = root.at("engine");
    if (e.has("tol")) s.options.tol = e.at("tol").number();
    if (e.has("window")) s.options.window = e.at("window").integer();
    if (e.has("max_rounds")) s.options.max_rounds = e.at("max_rounds").integer();
    if (e.has("rounds")) s.options.rounds = e.at("rounds").integer();
  }
  return out;
}

// Canonical form with the topology inlined.
inline json serialize(const LoadedScenario& ls) {
  const Scenario& s = ls.scenario;
  json j;
  j["format"] = kScenarioFormat;
  j["name"] = s.name;
  if (!ls.description.empty()) j["description"] = ls.description;
  if (ls.expect) j["expect"] = to_string(*ls.expect);
  Topology topo = ls.topology;
  topo.schedule = s.schedule;
  topo.leaders = s.leaders;
  j["topology"] = serialize(topo);
  j["algorithm"] = to_string(s.algorithm);
  j["f"] = s.f;
  j["l"] = s.l;
  if (s.algorithm == Algorithm::mdp_msr) {
    j["T"] = s.T;
    j["beta"] = s.beta;
  }
  j["axes"] = s.axes;
  json refs = json::array();
  for (const auto& r : s.reference) refs.push_back(detail::reference_json(r));
  j["reference"] = refs;
  j["init"] = detail::table_json(s.init_x);
  if (!s.init_v.empty()) j["velocity"] = detail::table_json(s.init_v);
  if (!s.delta.empty()) j["delta"] = detail::table_json(s.delta);
  json adv = json::array();
  for (const auto& a : s.adversaries) adv.push_back(detail::attack_json(a));
  j["adversaries"] = adv;
  json eng{{"tol", s.options.tol}, {"window", s.options.window}, {"max_rounds", s.options.max_rounds}};
  if (s.options.rounds) eng["rounds"] = *s.options.rounds;
  j["engine"] = eng;
  return j;
}

inline std::string fingerprint(const LoadedScenario& ls) {
  json j = serialize(ls);
  j.erase("expect");
  return fnv1a_hex(j.dump());
}

inline LoadedScenario load_scenario(const std::filesystem::path& p) {
  auto ls = parse_scenario(detail::read_json_file(p), p.string(), p.parent_path());
  ls.scenario.fingerprint = fingerprint(ls);
  return ls;
}

}  // namespace rclab
