#pragma once

// Exhaustive reference solvers, used to cross-check the fast ones.

#include <stdexcept>
#include <string>

#include "rclab/messaging.hpp"

namespace rclab {

inline constexpr int kBruteForceCandidateLimit = 20;

// Minimum message cover by trying candidate subsets in increasing size.
inline int mmc_brute_force_oracle(const std::vector<Message>& msgs) {
  if (msgs.empty()) throw std::domain_error("empty message set");
  const NodeId dst = msgs.front().destination();
  NodeSet candidates;
  for (const auto& m : msgs) {
    if (m.is_self()) throw std::domain_error("a node's own value has no cover");
    candidates |= m.path.node_set();
  }
  candidates.erase(dst);
  if (candidates.size() > kBruteForceCandidateLimit)
    throw std::length_error("brute-force cover refuses " + std::to_string(candidates.size()) + " candidate nodes");
  for (int k = 0; k <= candidates.size(); ++k) {
    bool found = false;
    for_each_subset_of_size(candidates, k, [&](NodeSet T) {
      for (const auto& m : msgs)
        if (!m.path.node_set().intersects(T)) return true;
      found = true;
      return false;
    });
    if (found) return k;
  }
  return candidates.size();
}

inline int mmc_brute_force_oracle(const MessageSet& ms) { return mmc_brute_force_oracle(ms.messages()); }

}  // namespace rclab
