#pragma once

// CSV emission for traces and delivered messages, and the plain-text
// summaries printed by the command-line tool.

#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>

#include "rclab/engine.hpp"
#include "rclab/robustness.hpp"

namespace rclab {

inline void write_states_csv(std::ostream& os, const Trace& t) {
  const bool second = !t.axes.empty() && !t.axes.front().v.empty();
  os << "round,axis,node,role,x";
  if (second) os << ",v";
  os << ",reference,V";
  if (second) os << ",V_hat";
  os << '\n';
  os << std::setprecision(17);
  for (std::size_t a = 0; a < t.axes.size(); ++a) {
    const auto& ax = t.axes[a];
    for (std::size_t k = 0; k < ax.x.size(); ++k) {
      for (std::size_t i = 1; i < ax.x[k].size(); ++i) {
        const NodeId id = static_cast<NodeId>(i);
        const char* role = t.adversaries.contains(id) ? "adversary" : t.leaders.contains(id) ? "leader" : "follower";
        os << k << ',' << a << ',' << i << ',' << role << ',' << ax.x[k][i];
        if (second) os << ',' << ax.v[k][i];
        os << ',' << ax.reference[k] << ',' << ax.V[k];
        if (second) os << ',' << ax.V_hat[k];
        os << '\n';
      }
    }
  }
}

// Observer streaming every delivered message of normal followers.
inline RoundObserver messages_csv_writer(std::ostream& os) {
  os << "round,axis,src,dst,path,value,tampered,retained\n";
  return [&os](long long k, int axis, const std::vector<MessageSet>& delivered, const std::vector<TrimResult>& trims) {
    os << std::setprecision(17);
    for (std::size_t i = 1; i < delivered.size(); ++i) {
      const auto& keep = trims[i].keep;
      if (keep.empty()) continue;
      const auto& msgs = delivered[i].messages();
      for (std::size_t m = 0; m < msgs.size(); ++m) {
        os << k << ',' << axis << ',' << msgs[m].source() << ',' << i << ',' << msgs[m].path.to_string(' ') << ','
           << msgs[m].value << ',' << (msgs[m].tampered ? 1 : 0) << ',' << (keep[m] ? 1 : 0) << '\n';
      }
    }
  };
}

inline std::string format_verdict(const RobustnessQuery& q, const RobustnessVerdict& v) {
  std::ostringstream os;
  os << "query: r=" << q.r << " l=" << q.l << " f=" << q.f << " leaders=" << q.leaders.to_string() << '\n';
  os << "holds: " << (v.holds ? "true" : "false") << '\n';
  os << "removal_sets_checked: " << v.removal_sets_checked << '\n';
  if (v.certificate) {
    const auto& c = *v.certificate;
    const auto iv = q.schedule.intervals()[static_cast<std::size_t>(c.interval)];
    os << "certificate:\n";
    os << "  F: " << c.removed.to_string() << '\n';
    os << "  S: " << c.followers.to_string() << '\n';
    os << "  interval: " << c.interval << " [" << iv.begin << ", " << iv.end << ")\n";
    if (v.prefilter_condition) os << "  rejected_by_necessary_condition: " << *v.prefilter_condition << '\n';
  }
  return os.str();
}

inline std::string format_report(const Trace& t, const ConvergenceReport& r) {
  std::ostringstream os;
  os << std::setprecision(6);
  os << "scenario: " << t.scenario << '\n';
  os << "fingerprint: " << t.fingerprint << '\n';
  os << "algorithm: " << to_string(t.algorithm) << '\n';
  os << "status: " << to_string(r.status) << '\n';
  os << "converged: " << (r.converged ? "true" : "false") << '\n';
  if (r.round) os << "convergence_round: " << *r.round << '\n';
  os << "rounds: " << r.rounds << '\n';
  os << "residual: " << r.residual << '\n';
  if (!t.axes.empty() && !t.axes.front().v.empty()) os << "velocity_residual: " << r.velocity_residual << '\n';
  for (std::size_t a = 0; a < t.axes.size(); ++a) os << "final_V[axis " << a << "]: " << t.axes[a].V.back() << '\n';
  return os.str();
}

}  // namespace rclab
