#pragma once

// Exhaustive-search oracle for the tokenization optimizer, written from the
// validity rules directly. It shares only data types with the library: the
// search enumerates raw boundary assignments and all 128 interior cut
// patterns per byte instead of per-bit thresholding.

#include <array>
#include <limits>
#include <optional>

#include "cand/boundary.hpp"
#include "cand/can_model.hpp"
#include "cand/endian_opt.hpp"
#include "cand/rng.hpp"

namespace cand::test {

/// Cut likelihoods with bytes [0, nbytes) active and everything else
/// behaving like constant bits (mandatory cuts).
inline BoundaryProbabilities random_probabilities(int nbytes, SplitMix64& rng) {
  BoundaryProbabilities f;
  const auto is_const = [&](int i) { return byte_of_bit(i) >= nbytes; };
  for (Endianness e : {Endianness::Big, Endianness::Little}) {
    auto& lane = f.lane(e);
    for (int i = 0; i < kPayloadBits; ++i) {
      const auto nxt = successor(i, e);
      lane.mandatory[i] = is_const(i) || !nxt || is_const(*nxt);
      if (!lane.mandatory[i]) lane.value[i] = rng.next_double();
    }
  }
  return f;
}

namespace oracle_detail {

constexpr int kCut = 0, kJoinBig = 1, kJoinLittle = 2;

inline bool combo_valid(const std::array<int, 8>& c) {
  if (c[0] == kJoinLittle || c[7] == kJoinBig) return false;
  for (int j = 0; j < 8; ++j) {
    if (c[j] != kJoinBig) continue;
    if (j + 1 < 8 && c[j + 1] == kJoinLittle) return false;
    if (j + 2 < 8 && c[j + 2] == kJoinLittle) return false;
  }
  return true;
}

/// Byte orders implied by the joins; unconstrained bytes default to big.
inline std::array<Endianness, 8> combo_orders(const std::array<int, 8>& c) {
  std::array<Endianness, 8> e;
  e.fill(Endianness::Big);
  for (int j = 0; j < 8; ++j)
    if (c[j] == kJoinLittle) {
      e[j] = Endianness::Little;
      if (j > 0) e[j - 1] = Endianness::Little;
    }
  return e;
}

/// Boundary-bit cost of a combo; nullopt when a join crosses a mandatory cut.
inline std::optional<double> boundary_cost(const std::array<int, 8>& c,
                                           const BoundaryProbabilities& f,
                                           double beta) {
  double cost = 0.0;
  for (int j = 0; j < 8; ++j) {
    const int bit = 8 * j + 7;
    if (c[j] == kCut) {
      cost += beta;
    } else if (c[j] == kJoinBig) {
      if (f.big.mandatory[bit]) return std::nullopt;
      cost += f.big.value[bit];
    } else {
      if (f.little.mandatory[bit]) return std::nullopt;
      cost += f.little.value[bit];
    }
  }
  return cost;
}

/// Cost accumulated in the same order the optimizer uses (boundary bits
/// first, then interiors in ascending index order), so that equal
/// tokenizations produce bit-identical doubles.
inline double ordered_cost(const std::array<int, 8>& combo,
                           const std::array<int, 8>& patterns,
                           const BoundaryProbabilities& f, double beta) {
  const auto orders = combo_orders(combo);
  double cost = *boundary_cost(combo, f, beta);
  for (int i = 0; i < kPayloadBits; ++i) {
    if ((i & 7) == 7) continue;
    const int j = byte_of_bit(i);
    const bool cut = (patterns[j] >> (i & 7)) & 1;
    const auto& lane = f.lane(orders[j]);
    cost += cut ? beta : lane.value[i];
  }
  return cost;
}

}  // namespace oracle_detail

/// Minimum tokenization cost by exhaustive enumeration: all raw boundary
/// assignments filtered by the validity rules, times all 2^7 interior cut
/// patterns of every byte.
inline double oracle_min_cost(const BoundaryProbabilities& f, double beta) {
  using namespace oracle_detail;
  double best = std::numeric_limits<double>::infinity();
  std::array<int, 8> best_combo{};
  std::array<int, 8> best_patterns{};
  for (int code = 0; code < 6561; ++code) {
    std::array<int, 8> combo;
    int rest = code;
    for (int j = 0; j < 8; ++j) {
      combo[j] = rest % 3;
      rest /= 3;
    }
    if (!combo_valid(combo)) continue;
    const auto bcost = boundary_cost(combo, f, beta);
    if (!bcost) continue;
    const auto orders = combo_orders(combo);
    double total = *bcost;
    std::array<int, 8> patterns{};
    for (int j = 0; j < 8; ++j) {
      const auto& lane = f.lane(orders[j]);
      double sub_best = std::numeric_limits<double>::infinity();
      int sub_pattern = 127;
      for (int pat = 0; pat < 128; ++pat) {
        double s = 0.0;
        bool feasible = true;
        for (int b = 0; b < 7 && feasible; ++b) {
          const int i = 8 * j + b;
          const bool cut = (pat >> b) & 1;
          if (!cut && lane.mandatory[i]) feasible = false;
          else s += cut ? beta : lane.value[i];
        }
        if (feasible && s < sub_best) {
          sub_best = s;
          sub_pattern = pat;
        }
      }
      total += sub_best;
      patterns[j] = sub_pattern;
    }
    if (total < best) {
      best = total;
      best_combo = combo;
      best_patterns = patterns;
    }
  }
  return ordered_cost(best_combo, best_patterns, f, beta);
}

/// Phi of the per-bit-thresholded pattern for one configuration (the
/// pattern Theorem-style local optimality predicts), or nullopt when the
/// configuration joins across a mandatory cut.
inline std::optional<double> config_cost_thresholded(
    const ByteBoundaryConfig& cfg, const BoundaryProbabilities& f,
    double beta) {
  using namespace oracle_detail;
  std::array<int, 8> combo;
  for (int j = 0; j < 8; ++j) combo[j] = static_cast<int>(cfg.v[j]);
  if (!boundary_cost(combo, f, beta)) return std::nullopt;
  const auto orders = combo_orders(combo);
  std::array<int, 8> patterns{};
  for (int j = 0; j < 8; ++j) {
    const auto& lane = f.lane(orders[j]);
    for (int b = 0; b < 7; ++b) {
      const int i = 8 * j + b;
      if (lane.mandatory[i] || lane.value[i] > beta) patterns[j] |= 1 << b;
    }
  }
  return ordered_cost(combo, patterns, f, beta);
}

/// Phi of a uniformly random valid cut pattern for one configuration.
inline std::optional<double> config_cost_random_pattern(
    const ByteBoundaryConfig& cfg, const BoundaryProbabilities& f, double beta,
    SplitMix64& rng) {
  using namespace oracle_detail;
  std::array<int, 8> combo;
  for (int j = 0; j < 8; ++j) combo[j] = static_cast<int>(cfg.v[j]);
  if (!boundary_cost(combo, f, beta)) return std::nullopt;
  const auto orders = combo_orders(combo);
  const std::uint64_t bits = rng.next_u64();
  std::array<int, 8> patterns{};
  int used = 0;
  for (int j = 0; j < 8; ++j) {
    const auto& lane = f.lane(orders[j]);
    for (int b = 0; b < 7; ++b) {
      const int i = 8 * j + b;
      const bool cut = lane.mandatory[i] || ((bits >> used) & 1);
      ++used;
      if (cut) patterns[j] |= 1 << b;
    }
  }
  return ordered_cost(combo, patterns, f, beta);
}

}  // namespace cand::test
