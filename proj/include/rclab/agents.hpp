#pragma once

// Leader reference propagation, the multi-hop weighted MSR follower update,
// the double-integrator variant and the secure-leader modification.

#include <algorithm>
#include <cmath>
#include <iterator>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "rclab/messaging.hpp"

namespace rclab {

// Piecewise-constant reference. The first piece starts at round 0.
class ReferenceFunction {
 public:
  struct Piece {
    long long start = 0;
    double value = 0.0;
    friend bool operator==(const Piece&, const Piece&) = default;
  };

  ReferenceFunction() : pieces_{{0, 0.0}} {}
  explicit ReferenceFunction(double constant) : pieces_{{0, constant}} {}
  explicit ReferenceFunction(std::vector<Piece> pieces) : pieces_(std::move(pieces)) {
    if (pieces_.empty()) throw std::domain_error("reference needs at least one piece");
    if (pieces_.front().start != 0) throw std::domain_error("reference must start at round 0");
    for (std::size_t p = 0; p < pieces_.size(); ++p) {
      if (!std::isfinite(pieces_[p].value)) throw std::domain_error("reference value is not finite");
      if (p > 0 && pieces_[p].start <= pieces_[p - 1].start)
        throw std::domain_error("reference start rounds must be strictly increasing");
    }
  }

  double at(long long k) const {
    if (k < 0) throw std::domain_error("negative round");
    auto it = std::upper_bound(pieces_.begin(), pieces_.end(), k,
                               [](long long key, const Piece& p) { return key < p.start; });
    return std::prev(it)->value;
  }

  // First round from which the reference never changes again.
  long long last_change() const { return pieces_.back().start; }
  const std::vector<Piece>& pieces() const { return pieces_; }
  friend bool operator==(const ReferenceFunction&, const ReferenceFunction&) = default;

 private:
  std::vector<Piece> pieces_;
};

// Leader state after round k: x_d[k + 1] = r[k].
inline double leader_step(const ReferenceFunction& ref, long long k) { return ref.at(k); }

struct FirstOrderState {
  double x = 0.0;
};

struct SecondOrderState {
  double x = 0.0;  // absolute position
  double v = 0.0;
  double delta = 0.0;  // formation offset
  double x_hat() const { return x - delta; }
};

struct ControlParams {
  double T = 1.0;
  double beta = 0.0;
  int f = 0;
  int l = 1;
  double alpha = 1.0;
};

// Relative slack for the sampling-period/damping gate; the published
// parameters sit exactly on its lower edge.
inline constexpr double kGateSlack = 1e-12;

// Empty when 1 + T^2/2 <= beta*T <= 2 - T^2/2, otherwise a description.
inline std::optional<std::string> damping_gate_violation(double T, double beta) {
  if (!(T > 0)) return "sampling period T must be positive";
  const double bt = beta * T;
  const double lo = 1.0 + T * T / 2.0;
  const double hi = 2.0 - T * T / 2.0;
  const double slack = kGateSlack * std::max(1.0, std::abs(bt));
  if (bt < lo - slack || bt > hi + slack) {
    return "beta*T = " + std::to_string(bt) + " outside [" + std::to_string(lo) + ", " + std::to_string(hi) +
           "] (requires 1 + T^2/2 <= beta*T <= 2 - T^2/2)";
  }
  return std::nullopt;
}

struct TrimResult {
  std::vector<char> keep;  // parallel to the input messages
  int removed_above = 0;
  int removed_below = 0;
  int cover_above = 0;  // cover size of the removed messages on each side
  int cover_below = 0;

  std::vector<double> retained_values(const MessageSet& ms) const {
    std::vector<double> out;
    for (std::size_t m = 0; m < ms.size(); ++m)
      if (keep[m]) out.push_back(ms.messages()[m].value);
    return out;
  }
};

namespace detail {

// Removes from `side` (ordered most extreme first) the longest prefix whose
// cover size is exactly f, or everything if the whole side is coverable by
// fewer than f nodes.
inline std::pair<int, int> trim_side(const MessageSet& ms, const std::vector<std::size_t>& side, int f,
                                     std::vector<char>& keep) {
  if (side.empty() || f == 0) return {0, 0};
  auto cover_of_prefix = [&](std::size_t len) {
    std::vector<const Message*> ptrs;
    for (std::size_t t = 0; t < len; ++t) ptrs.push_back(&ms.messages()[side[t]]);
    return minimum_cover_of(ptrs, ms.destination()).cardinality;
  };
  const int whole = cover_of_prefix(side.size());
  std::size_t len = side.size();
  int cover = whole;
  if (whole >= f) {
    // Cover size grows by at most one per message, so the longest prefix
    // with cover <= f has cover exactly f.
    std::size_t lo = 0, hi = side.size();
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (cover_of_prefix(mid) <= f)
        lo = mid;
      else
        hi = mid - 1;
    }
    len = lo;
    cover = cover_of_prefix(len);
    if (cover != f) throw std::logic_error("trim invariant broken: prefix cover " + std::to_string(cover));
  }
  for (std::size_t t = 0; t < len; ++t) keep[side[t]] = 0;
  return {static_cast<int>(len), cover};
}

}  // namespace detail

// Drops the extreme values that up to f nodes could account for. The
// self-message and values equal to `own` always survive.
inline TrimResult mw_msr_trim(const MessageSet& ms, double own, int f) {
  if (f < 0) throw std::domain_error("f must be >= 0");
  TrimResult res;
  res.keep.assign(ms.size(), 1);
  std::vector<std::size_t> above, below;
  for (std::size_t m = 0; m < ms.size(); ++m) {
    const auto& msg = ms.messages()[m];
    if (msg.is_self()) continue;
    if (msg.value > own) above.push_back(m);
    if (msg.value < own) below.push_back(m);
  }
  const auto& msgs = ms.messages();
  std::stable_sort(above.begin(), above.end(),
                   [&](std::size_t a, std::size_t b) { return msgs[a].value > msgs[b].value; });
  std::stable_sort(below.begin(), below.end(),
                   [&](std::size_t a, std::size_t b) { return msgs[a].value < msgs[b].value; });
  std::tie(res.removed_above, res.cover_above) = detail::trim_side(ms, above, f, res.keep);
  std::tie(res.removed_below, res.cover_below) = detail::trim_side(ms, below, f, res.keep);
  return res;
}

// Uniformly weighted mean of the retained values, clamped to their range so
// rounding cannot leave the convex hull.
inline double mw_msr_update(const std::vector<double>& retained) {
  if (retained.empty()) throw std::domain_error("nothing retained");
  double sum = 0.0;
  for (double v : retained) sum += v;
  const auto [lo, hi] = std::minmax_element(retained.begin(), retained.end());
  return std::clamp(sum / static_cast<double>(retained.size()), *lo, *hi);
}

// Mean offset of the retained values from the node's own estimate.
inline double consensus_term(const std::vector<double>& retained, double own_x_hat) {
  if (retained.empty()) throw std::domain_error("nothing retained");
  double sum = 0.0;
  for (double v : retained) sum += v - own_x_hat;
  return sum / static_cast<double>(retained.size());
}

inline double mdp_msr_control(const std::vector<double>& retained, const SecondOrderState& own,
                              const ControlParams& p) {
  return consensus_term(retained, own.x_hat()) - p.beta * own.v;
}

inline SecondOrderState second_order_step(SecondOrderState s, double u, double T) {
  s.x += T * s.v + T * T / 2.0 * u;
  s.v += T * u;
  return s;
}

// Followers fed directly by a trusted leader adopt the reference; the rest
// run the ordinary update on messages relayed among followers only.
inline double secure_leader_follower_step(const MessageSet& ms, double own, const ReferenceFunction& ref,
                                          long long k, bool fed_by_leader, int f) {
  if (fed_by_leader) return ref.at(k);
  return mw_msr_update(mw_msr_trim(ms, own, f).retained_values(ms));
}

}  // namespace rclab
