#pragma once

// Synchronous round loop, consensus error envelopes, convergence detection
// and the trace-level oracles used by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rclab/adversary.hpp"
#include "rclab/agents.hpp"
#include "rclab/messaging.hpp"

namespace rclab {

enum class Algorithm { mw_msr, mdp_msr, mw_msr_secure };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::mw_msr:
      return "mw-msr";
    case Algorithm::mdp_msr:
      return "mdp-msr";
    case Algorithm::mw_msr_secure:
      return "mw-msr-secure";
  }
  return "?";
}

struct EngineOptions {
  double tol = 1e-6;
  int window = 50;
  long long max_rounds = 20000;
  // Run exactly this many rounds, ignoring convergence.
  std::optional<long long> rounds;
};

struct Scenario {
  std::string name;
  std::string fingerprint;
  TopologySchedule schedule;
  NodeSet leaders;
  Algorithm algorithm = Algorithm::mw_msr;
  int f = 0;
  int l = 1;
  double T = 1.0;
  double beta = 0.0;
  int axes = 1;
  std::vector<ReferenceFunction> reference;  // one per axis
  // Indexed [axis][node]; slot 0 unused.
  std::vector<std::vector<double>> init_x;
  std::vector<std::vector<double>> init_v;
  std::vector<std::vector<double>> delta;
  std::vector<AttackScript> adversaries;
  EngineOptions options;

  int node_count() const { return schedule.node_count(); }
  NodeSet adversary_set() const {
    NodeSet a;
    for (const auto& s : adversaries) a.insert(s.node);
    return a;
  }
  NodeSet normal_leaders() const { return leaders - adversary_set(); }
  NodeSet normal_followers() const { return schedule.at(0).nodes() - leaders - adversary_set(); }
};

// Followers with a direct leader in-edge somewhere in the period.
inline NodeSet leader_fed_followers(const TopologySchedule& s, NodeSet leaders) {
  const DiGraph u = union_graph(s, {0, s.period()});
  NodeSet out;
  for (NodeId i : u.nodes() - leaders)
    if (u.in_neighbors(i).intersects(leaders)) out.insert(i);
  return out;
}

// Every cross-check a scenario must pass before round 0; empty when valid.
inline std::vector<std::string> validate_scenario(const Scenario& s) {
  std::vector<std::string> issues;
  const int n = s.node_count();
  if (n < 1) return {"topology has no nodes"};
  const NodeSet all = s.schedule.at(0).nodes();
  if (!s.leaders.is_subset_of(all)) issues.push_back("leader id outside 1.." + std::to_string(n));
  if (s.leaders.empty()) issues.push_back("at least one leader is required");
  if (s.f < 0) issues.push_back("f must be >= 0");
  if (s.l < 1) issues.push_back("l must be >= 1");
  if (s.axes < 1) issues.push_back("axes must be >= 1");
  if (static_cast<int>(s.reference.size()) != s.axes) issues.push_back("one reference per axis is required");
  auto check_table = [&](const std::vector<std::vector<double>>& t, const char* what, bool required) {
    if (t.empty() && !required) return;
    if (static_cast<int>(t.size()) != s.axes) {
      issues.push_back(std::string(what) + ": one row per axis is required");
      return;
    }
    for (const auto& row : t) {
      if (static_cast<int>(row.size()) != n + 1) {
        issues.push_back(std::string(what) + ": one value per node is required");
        return;
      }
      for (std::size_t i = 1; i < row.size(); ++i)
        if (!std::isfinite(row[i])) issues.push_back(std::string(what) + ": value for node " + std::to_string(i) + " is not finite");
    }
  };
  check_table(s.init_x, "init", true);
  check_table(s.init_v, "velocity", false);
  check_table(s.delta, "delta", false);

  NodeSet seen;
  for (const auto& a : s.adversaries) {
    if (!all.contains(a.node)) {
      issues.push_back("adversary id " + std::to_string(a.node) + " outside 1.." + std::to_string(n));
      continue;
    }
    if (seen.contains(a.node)) issues.push_back("node " + std::to_string(a.node) + " has two attack scripts");
    seen.insert(a.node);
    try {
      a.validate();
    } catch (const std::exception& e) {
      issues.push_back(e.what());
    }
  }
  if (issues.empty()) {
    const auto chk = validate_f_local(s.adversary_set(), s.schedule, s.l, s.f);
    if (!chk.f_local)
      issues.push_back("adversary set " + s.adversary_set().to_string() + " is not " + std::to_string(s.f) +
                       "-local: node " + std::to_string(chk.witness->node) + " has " +
                       std::to_string(chk.witness->count) + " adversaries within " + std::to_string(s.l) +
                       " hops at step " + std::to_string(chk.witness->step));
  }
  if (s.algorithm == Algorithm::mdp_msr) {
    if (auto v = damping_gate_violation(s.T, s.beta)) issues.push_back("damping gate: " + *v);
  }
  if (s.algorithm == Algorithm::mw_msr_secure && s.adversary_set().intersects(s.leaders))
    issues.push_back("secure-leader mode forbids adversarial leaders");
  if (s.options.tol <= 0) issues.push_back("tolerance must be positive");
  if (s.options.window < 1) issues.push_back("window must be >= 1");
  if (s.options.max_rounds < 1) issues.push_back("max rounds must be >= 1");
  return issues;
}

struct AxisTrace {
  // [round][node]; for second-order runs x holds the offset-free estimate.
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> v;
  std::vector<std::vector<double>> c;  // consensus term applied at each round
  std::vector<double> reference;       // r[k]
  std::vector<double> V;
  std::vector<double> V_hat;
  std::vector<double> residual;
  std::vector<double> velocity_residual;
};

struct Trace {
  std::string scenario;
  std::string fingerprint;
  Algorithm algorithm = Algorithm::mw_msr;
  double T = 1.0;
  double beta = 0.0;
  NodeSet leaders;           // normal leaders
  NodeSet followers;         // normal followers
  NodeSet adversaries;
  int max_interval_length = 1;
  std::size_t max_message_set = 1;
  std::vector<AxisTrace> axes;
  long long rounds() const { return axes.empty() ? 0 : static_cast<long long>(axes.front().x.size()) - 1; }
};

// Observer for every delivered message set; trims are indexed by node and
// empty for nodes that did not filter.
using RoundObserver = std::function<void(long long k, int axis, const std::vector<MessageSet>& delivered,
                                         const std::vector<TrimResult>& trims)>;

struct Envelope {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

// Envelope of the given nodes' values.
inline Envelope consensus_error(const std::vector<double>& states, NodeSet nodes) {
  if (nodes.empty()) throw std::domain_error("consensus error over an empty node set");
  Envelope e{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
  for (NodeId i : nodes) {
    e.lo = std::min(e.lo, states[static_cast<std::size_t>(i)]);
    e.hi = std::max(e.hi, states[static_cast<std::size_t>(i)]);
  }
  return e;
}

// Two-step envelope used for double integrators: rounds k and k - 1 together.
inline Envelope consensus_error_two_step(const std::vector<double>& now, const std::vector<double>& prev,
                                         NodeSet nodes) {
  Envelope a = consensus_error(now, nodes);
  const Envelope b = consensus_error(prev, nodes);
  a.lo = std::min(a.lo, b.lo);
  a.hi = std::max(a.hi, b.hi);
  return a;
}

inline double max_abs_offset(const std::vector<double>& states, NodeSet nodes, double target) {
  double r = 0.0;
  for (NodeId i : nodes) r = std::max(r, std::abs(states[static_cast<std::size_t>(i)] - target));
  return r;
}

// Rounds suggested by the geometric contraction bound, capped.
inline long long default_round_budget(int followers, int K, double alpha, double V0, double tol, long long cap) {
  if (V0 <= tol) return std::min<long long>(cap, 1);
  const double rate = std::pow(alpha, static_cast<double>((followers + 1) * K));
  if (!(rate > 0.0) || rate >= 1.0) return cap;
  const double per = -std::log1p(-rate);
  if (!(per > 0.0)) return cap;
  const double steps = std::ceil(std::log(V0 / tol) / per);
  const double total = 10.0 * (followers + 1) * K * steps;
  if (!std::isfinite(total) || total >= static_cast<double>(cap)) return cap;
  return std::max<long long>(1, static_cast<long long>(total));
}

enum class RunStatus { converged, stalled, budget_exhausted };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::converged:
      return "converged";
    case RunStatus::stalled:
      return "stalled";
    case RunStatus::budget_exhausted:
      return "budget-exhausted";
  }
  return "?";
}

struct ConvergenceReport {
  bool converged = false;
  std::optional<long long> round;  // first round of the qualifying window
  double residual = 0.0;           // at the last round, max over axes
  double velocity_residual = 0.0;
  RunStatus status = RunStatus::budget_exhausted;
  long long rounds = 0;
};

namespace detail {

inline bool window_ok(const Trace& t, long long k, double tol) {
  for (const auto& ax : t.axes) {
    if (ax.residual[static_cast<std::size_t>(k)] > tol) return false;
    if (!ax.velocity_residual.empty() && ax.velocity_residual[static_cast<std::size_t>(k)] > tol) return false;
  }
  return true;
}

}  // namespace detail

// Converged once every axis stays within tol for `window` consecutive rounds
// after the reference's final change.
inline ConvergenceReport convergence_report(const Trace& t, double tol, int window, long long settle_from = 0) {
  if (tol <= 0) throw std::domain_error("tolerance must be positive");
  if (window < 1) throw std::domain_error("window must be >= 1");
  ConvergenceReport rep;
  rep.rounds = t.rounds();
  long long run = 0;
  for (long long k = settle_from; k <= t.rounds(); ++k) {
    run = detail::window_ok(t, k, tol) ? run + 1 : 0;
    if (run >= window) {
      rep.converged = true;
      rep.round = k - window + 1;
      break;
    }
  }
  for (const auto& ax : t.axes) {
    rep.residual = std::max(rep.residual, ax.residual.back());
    if (!ax.velocity_residual.empty()) rep.velocity_residual = std::max(rep.velocity_residual, ax.velocity_residual.back());
  }
  if (rep.converged) {
    rep.status = RunStatus::converged;
  } else {
    // A plateaued error envelope means the run is stuck rather than slow.
    bool flat = t.rounds() >= window;
    for (const auto& ax : t.axes) {
      if (!flat) break;
      const auto& V = ax.V_hat.empty() ? ax.V : ax.V_hat;
      const double now = V.back();
      const double before = V[V.size() - 1 - static_cast<std::size_t>(window)];
      flat = std::abs(now - before) <= 1e-12 * std::max(std::abs(before), std::numeric_limits<double>::min());
    }
    rep.status = flat ? RunStatus::stalled : RunStatus::budget_exhausted;
  }
  return rep;
}

struct SegmentReport {
  long long start = 0;
  long long end = 0;  // exclusive, clipped to the trace
  double value = 0.0;
  bool converged = false;
  std::optional<long long> round;
  double final_residual = 0.0;
};

// Convergence checked separately inside each constant piece of the reference.
inline std::vector<SegmentReport> segment_reports(const Trace& t, const ReferenceFunction& ref, double tol,
                                                  int window) {
  std::vector<SegmentReport> out;
  const auto& pieces = ref.pieces();
  for (std::size_t p = 0; p < pieces.size(); ++p) {
    SegmentReport seg;
    seg.start = pieces[p].start;
    seg.end = std::min(p + 1 < pieces.size() ? pieces[p + 1].start : t.rounds() + 1, t.rounds() + 1);
    seg.value = pieces[p].value;
    if (seg.start >= seg.end) break;
    long long run = 0;
    for (long long k = seg.start; k < seg.end; ++k) {
      run = detail::window_ok(t, k, tol) ? run + 1 : 0;
      if (run >= window && !seg.converged) {
        seg.converged = true;
        seg.round = k - window + 1;
      }
    }
    for (const auto& ax : t.axes) seg.final_residual = std::max(seg.final_residual, ax.residual[static_cast<std::size_t>(seg.end - 1)]);
    out.push_back(seg);
  }
  return out;
}

// Runs a validated scenario. Throws std::invalid_argument listing every
// validation issue.
inline Trace run(const Scenario& sc, const RoundObserver& observer = {}) {
  if (auto issues = validate_scenario(sc); !issues.empty()) {
    std::string msg = "invalid scenario:";
    for (const auto& i : issues) msg += "\n  " + i;
    throw std::invalid_argument(msg);
  }
  const int n = sc.node_count();
  const auto& sched = sc.schedule;
  const bool second = sc.algorithm == Algorithm::mdp_msr;
  const bool secure = sc.algorithm == Algorithm::mw_msr_secure;
  const NodeSet advs = sc.adversary_set();
  const NodeSet normal_leaders = sc.normal_leaders();
  const NodeSet followers = sc.normal_followers();
  const NodeSet normal = normal_leaders | followers;
  const NodeSet fed = secure ? leader_fed_followers(sched, sc.leaders) : NodeSet{};

  std::vector<RelayPlan> plans;
  for (const auto& g : sched.graphs()) plans.emplace_back(secure ? g.induced(g.nodes() - sc.leaders) : g, sc.l);
  const RelayHooks hooks = make_relay_hooks(sc.adversaries);

  Trace t;
  t.scenario = sc.name;
  t.fingerprint = sc.fingerprint;
  t.algorithm = sc.algorithm;
  t.T = sc.T;
  t.beta = sc.beta;
  t.leaders = normal_leaders;
  t.followers = followers;
  t.adversaries = advs;
  t.max_interval_length = sched.max_interval_length();
  t.axes.resize(static_cast<std::size_t>(sc.axes));

  struct AxisState {
    std::vector<double> x;  // offset-free estimate for double integrators
    std::vector<double> v;
    std::vector<double> delta;
  };
  std::vector<AxisState> st(static_cast<std::size_t>(sc.axes));
  for (int a = 0; a < sc.axes; ++a) {
    auto& s = st[static_cast<std::size_t>(a)];
    const auto& ref = sc.reference[static_cast<std::size_t>(a)];
    s.delta = sc.delta.empty() ? std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)
                               : sc.delta[static_cast<std::size_t>(a)];
    s.x = sc.init_x[static_cast<std::size_t>(a)];
    for (std::size_t i = 1; i < s.x.size(); ++i) s.x[i] -= s.delta[i];
    s.v = sc.init_v.empty() ? std::vector<double>(static_cast<std::size_t>(n) + 1, 0.0)
                            : sc.init_v[static_cast<std::size_t>(a)];
    for (NodeId d : normal_leaders) {
      s.x[static_cast<std::size_t>(d)] = ref.at(0);
      s.v[static_cast<std::size_t>(d)] = 0.0;
    }
  }

  auto record = [&](int a, long long k, const std::vector<double>& c) {
    auto& ax = t.axes[static_cast<std::size_t>(a)];
    const auto& s = st[static_cast<std::size_t>(a)];
    const double r = sc.reference[static_cast<std::size_t>(a)].at(k);
    ax.x.push_back(s.x);
    ax.reference.push_back(r);
    ax.V.push_back(consensus_error(s.x, normal).width());
    ax.residual.push_back(followers.empty() ? 0.0 : max_abs_offset(s.x, followers, r));
    if (second) {
      ax.v.push_back(s.v);
      ax.c.push_back(c);
      const auto& prev = ax.x.size() >= 2 ? ax.x[ax.x.size() - 2] : s.x;
      ax.V_hat.push_back(consensus_error_two_step(s.x, prev, normal).width());
      ax.velocity_residual.push_back(followers.empty() ? 0.0 : max_abs_offset(s.v, followers, 0.0));
    }
  };

  const std::vector<double> zeros(static_cast<std::size_t>(n) + 1, 0.0);
  for (int a = 0; a < sc.axes; ++a) record(a, 0, zeros);

  const auto& opt = sc.options;
  long long settle = 0;
  for (const auto& ref : sc.reference) settle = std::max(settle, ref.last_change());
  const long long budget = opt.rounds.value_or(opt.max_rounds);
  long long calm = 0;  // consecutive rounds within tolerance after the last reference change

  std::vector<TrimResult> trims(static_cast<std::size_t>(n) + 1);
  for (long long k = 0; k < budget; ++k) {
    const RelayPlan& plan = plans[static_cast<std::size_t>(k % sched.period())];
    for (int a = 0; a < sc.axes; ++a) {
      auto& s = st[static_cast<std::size_t>(a)];
      const auto& ref = sc.reference[static_cast<std::size_t>(a)];
      const auto delivered = relay_round(plan, s.x, hooks, k);
      std::vector<double> next_x = s.x;
      std::vector<double> next_v = s.v;
      std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
      for (NodeId i : followers) {
        const auto& ms = delivered[static_cast<std::size_t>(i)];
        t.max_message_set = std::max(t.max_message_set, ms.size());
        const std::size_t ii = static_cast<std::size_t>(i);
        if (secure && fed.contains(i)) {
          next_x[ii] = ref.at(k);
          continue;
        }
        trims[ii] = mw_msr_trim(ms, s.x[ii], sc.f);
        const auto kept = trims[ii].retained_values(ms);
        if (second) {
          SecondOrderState own{s.x[ii], s.v[ii], 0.0};
          c[ii] = consensus_term(kept, own.x);
          const auto nxt = second_order_step(own, c[ii] - sc.beta * own.v, sc.T);
          next_x[ii] = nxt.x;
          next_v[ii] = nxt.v;
        } else {
          next_x[ii] = mw_msr_update(kept);
        }
      }
      if (observer) observer(k, a, delivered, trims);
      for (NodeId d : normal_leaders) {
        next_x[static_cast<std::size_t>(d)] = leader_step(ref, k);
        next_v[static_cast<std::size_t>(d)] = 0.0;
      }
      s.x = std::move(next_x);
      s.v = std::move(next_v);
      auto& prev_c = t.axes[static_cast<std::size_t>(a)];
      if (second) prev_c.c.back() = c;  // c[k] belongs to the round that used it
      record(a, k + 1, zeros);
      for (auto& tr : trims) tr = TrimResult{};
    }
    if (!opt.rounds) {
      calm = (k + 1 >= settle && detail::window_ok(t, k + 1, opt.tol)) ? calm + 1 : 0;
      if (calm >= opt.window) break;
    }
  }
  return t;
}

// Absolute positions of a second-order trace: estimate plus formation offset.
inline std::vector<double> positions(const Scenario& sc, const Trace& t, int axis, long long k) {
  auto x = t.axes.at(static_cast<std::size_t>(axis)).x.at(static_cast<std::size_t>(k));
  if (!sc.delta.empty())
    for (std::size_t i = 1; i < x.size(); ++i) x[i] += sc.delta[static_cast<std::size_t>(axis)][i];
  return x;
}

// ---- trace oracles ----

struct OracleResult {
  bool holds = true;
  long long checked = 0;
  std::string detail;
};

// The normal envelope never widens while the reference stays constant.
// Exact comparisons.
inline OracleResult envelope_nesting(const Trace& t, int axis = 0) {
  OracleResult res;
  const auto& ax = t.axes.at(static_cast<std::size_t>(axis));
  const NodeSet normal = t.leaders | t.followers;
  for (std::size_t k = 0; k + 1 < ax.x.size(); ++k) {
    // Leaders still carry the previous piece until one round after a change.
    if (k > 0 && ax.reference[k] != ax.reference[k - 1]) continue;
    if (k + 1 < ax.reference.size() && ax.reference[k + 1] != ax.reference[k]) continue;
    const Envelope now = consensus_error(ax.x[k], normal);
    const Envelope nxt = consensus_error(ax.x[k + 1], normal);
    ++res.checked;
    if (nxt.lo < now.lo || nxt.hi > now.hi) {
      res.holds = false;
      res.detail = "round " + std::to_string(k + 1) + " leaves the envelope of round " + std::to_string(k);
      return res;
    }
  }
  return res;
}

// Second-order counterpart on two-round envelopes, with a rounding allowance.
inline OracleResult two_step_envelope_nesting(const Trace& t, int axis = 0, double slack = 1e-12) {
  OracleResult res;
  const auto& ax = t.axes.at(static_cast<std::size_t>(axis));
  const NodeSet normal = t.leaders | t.followers;
  for (std::size_t k = 1; k + 1 < ax.x.size(); ++k) {
    bool constant = true;
    for (std::size_t j = k - 1; j <= k + 1 && j < ax.reference.size(); ++j)
      if (ax.reference[j] != ax.reference[k - 1]) constant = false;
    if (!constant || (k >= 2 && ax.reference[k - 2] != ax.reference[k - 1])) continue;
    const Envelope now = consensus_error_two_step(ax.x[k], ax.x[k - 1], normal);
    const Envelope nxt = consensus_error_two_step(ax.x[k + 1], ax.x[k], normal);
    const double tol = slack * std::max(1.0, std::max(std::abs(now.lo), std::abs(now.hi)));
    ++res.checked;
    if (nxt.lo < now.lo - tol || nxt.hi > now.hi + tol) {
      res.holds = false;
      res.detail = "two-step envelope widens at round " + std::to_string(k + 1);
      return res;
    }
  }
  return res;
}

// x[k+1] = (2 - T beta) x[k] - (1 - T beta) x[k-1] + T^2/2 (c[k] + c[k-1])
// for every normal follower.
inline OracleResult two_step_identity(const Trace& t, int axis = 0, double tol = 1e-10) {
  OracleResult res;
  const auto& ax = t.axes.at(static_cast<std::size_t>(axis));
  if (ax.c.empty()) return {false, 0, "trace has no second-order data"};
  const double T = t.T, b = t.beta;
  for (std::size_t k = 1; k + 1 < ax.x.size(); ++k) {
    for (NodeId i : t.followers) {
      const auto ii = static_cast<std::size_t>(i);
      const double pred = (2 - T * b) * ax.x[k][ii] - (1 - T * b) * ax.x[k - 1][ii] +
                          T * T / 2 * (ax.c[k][ii] + ax.c[k - 1][ii]);
      ++res.checked;
      if (std::abs(pred - ax.x[k + 1][ii]) > tol) {
        res.holds = false;
        res.detail = "node " + std::to_string(i) + " round " + std::to_string(k + 1) + " off by " +
                     std::to_string(std::abs(pred - ax.x[k + 1][ii]));
        return res;
      }
    }
  }
  return res;
}

// V[k1 + (|W|+1) delta K] <= (1 - alpha^((|W|+1) K))^delta V[k1] for every
// delta that fits in the trace, with alpha = 1 / (largest message set) and k1
// the last reference change.
inline OracleResult contraction_oracle(const Trace& t, int axis = 0) {
  OracleResult res;
  const auto& ax = t.axes.at(static_cast<std::size_t>(axis));
  const auto& V = ax.V_hat.empty() ? ax.V : ax.V_hat;
  long long k1 = 0;
  for (std::size_t k = 1; k < ax.reference.size(); ++k)
    if (ax.reference[k] != ax.reference[k - 1]) k1 = static_cast<long long>(k) + 1;
  const double alpha = 1.0 / static_cast<double>(t.max_message_set);
  const long long W = t.followers.size();
  const long long stride = (W + 1) * t.max_interval_length;
  const double rate = 1.0 - std::pow(alpha, static_cast<double>(stride));
  if (k1 >= static_cast<long long>(V.size())) return res;
  const double base = V[static_cast<std::size_t>(k1)];
  for (long long delta = 0; k1 + stride * delta < static_cast<long long>(V.size()); ++delta) {
    const double bound = std::pow(rate, static_cast<double>(delta)) * base;
    const double v = V[static_cast<std::size_t>(k1 + stride * delta)];
    ++res.checked;
    if (v > bound) {
      res.holds = false;
      res.detail = "delta " + std::to_string(delta) + ": " + std::to_string(v) + " > " + std::to_string(bound);
      return res;
    }
  }
  return res;
}

}  // namespace rclab
