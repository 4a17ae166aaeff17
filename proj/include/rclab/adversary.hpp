#pragma once

// Scripted Byzantine and malicious behaviour. Adversaries rewrite the values
// they emit and relay; they never touch message paths.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rclab/messaging.hpp"
#include "rclab/robustness.hpp"

namespace rclab {

enum class Waveform { constant, square, sine };

// Closed-form value generator: k -> center +- amplitude.
struct Oscillation {
  Waveform wave = Waveform::square;
  double center = 0.0;
  double amplitude = 0.3;
  int period = 2;

  static Oscillation constant(double v) { return {Waveform::constant, v, 0.0, 1}; }

  double at(long long k) const {
    switch (wave) {
      case Waveform::constant:
        return center;
      case Waveform::square: {
        const long long phase = k % period;
        return center + (2 * phase < period ? amplitude : -amplitude);
      }
      case Waveform::sine:
        return center + amplitude * std::sin(2.0 * std::numbers::pi * static_cast<double>(k % period) / period);
    }
    return center;
  }

  void validate() const {
    if (period < 1) throw std::domain_error("oscillation period must be >= 1");
    if (!std::isfinite(center) || !std::isfinite(amplitude)) throw std::domain_error("oscillation is not finite");
  }
};

enum class AdversaryModel { byzantine, malicious };

// Relayed values are either rewritten like the node's own emissions or
// forwarded untouched.
enum class RelayMode { same, identity };

// Receiver groups are matched against the next hop of a message, or against
// its final destination.
enum class GroupKey { next_hop, destination };

struct EmitGroup {
  NodeSet receivers;  // empty matches every receiver
  Oscillation value;
};

struct AttackScript {
  NodeId node = 0;
  AdversaryModel model = AdversaryModel::byzantine;
  std::vector<EmitGroup> groups;  // first matching group wins
  RelayMode relay = RelayMode::same;
  GroupKey key = GroupKey::next_hop;

  void validate() const {
    if (node < 1) throw std::domain_error("attack script without a node");
    for (const auto& g : groups) g.value.validate();
    if (model == AdversaryModel::malicious && groups.size() > 1)
      throw std::domain_error("malicious node " + std::to_string(node) + " must send one value to every receiver");
  }

  const EmitGroup* group_for(NodeId receiver) const {
    for (const auto& g : groups)
      if (g.receivers.empty() || g.receivers.contains(receiver)) return &g;
    return nullptr;
  }

  // Value sent at round k towards `receiver`; `honest` when no group matches.
  double emit(long long k, NodeId receiver, double honest) const {
    if (model == AdversaryModel::malicious) return groups.empty() ? honest : groups.front().value.at(k);
    const EmitGroup* g = group_for(receiver);
    return g ? g->value.at(k) : honest;
  }

  double relay_value(long long k, NodeId receiver, double incoming) const {
    if (relay == RelayMode::identity) return incoming;
    return emit(k, receiver, incoming);
  }
};

// Hooks for relay_round that apply every script. Normal relays forward
// unchanged, so only scripted nodes are listed as adversaries.
inline RelayHooks make_relay_hooks(const std::vector<AttackScript>& scripts) {
  RelayHooks hooks;
  std::vector<const AttackScript*> by_node;
  for (const auto& s : scripts) {
    hooks.adversaries.insert(s.node);
    if (static_cast<std::size_t>(s.node) >= by_node.size()) by_node.resize(static_cast<std::size_t>(s.node) + 1);
    by_node[static_cast<std::size_t>(s.node)] = &s;
  }
  hooks.tamper = [by_node](NodeId self, const Path& path, std::size_t pos, long long k, double incoming) {
    const AttackScript& s = *by_node[static_cast<std::size_t>(self)];
    const NodeId receiver = s.key == GroupKey::next_hop ? path[pos + 1] : path.destination();
    return pos == 0 ? s.emit(k, receiver, incoming) : s.relay_value(k, receiver, incoming);
  };
  return hooks;
}

struct AdversaryCheck {
  bool f_local = true;
  bool f_total = true;  // |A| <= f
  std::optional<FLocalWitness> witness;
};

inline AdversaryCheck validate_f_local(NodeSet adversaries, const TopologySchedule& s, int l, int f) {
  AdversaryCheck c;
  c.witness = f_local_violation(s, adversaries, l, f);
  c.f_local = !c.witness.has_value();
  c.f_total = adversaries.size() <= f;
  return c;
}

// The attack behind a robustness certificate: every node of F tells the
// members of S the value `a` and everyone else the reference, on its own
// messages and on everything it relays.
inline std::vector<AttackScript> necessity_attack(NodeSet removed, NodeSet stalled, double a, double reference) {
  std::vector<AttackScript> out;
  for (NodeId j : removed) {
    AttackScript s;
    s.node = j;
    s.key = GroupKey::destination;
    s.relay = RelayMode::same;
    s.groups.push_back({stalled, Oscillation::constant(a)});
    s.groups.push_back({NodeSet{}, Oscillation::constant(reference)});
    out.push_back(s);
  }
  return out;
}

}  // namespace rclab
