#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/features.hpp"

namespace cand {

/// Cut-after flags under big endian ordering; position 63 is always a cut.
struct BoundaryPrediction {
  std::string algorithm;
  std::array<bool, kPayloadBits> cut_after{};
};

/// Per-bit flip probabilities over the full trace (constant bits give 0).
inline std::array<double, kPayloadBits> flip_probabilities(const IdTrace& trace) {
  std::array<double, kPayloadBits> p{};
  if (trace.size() < 2) return p;
  std::array<std::uint64_t, kPayloadBits> counts{};
  for (std::size_t j = 0; j + 1 < trace.size(); ++j) {
    const PayloadBits x = trace.rows[j] ^ trace.rows[j + 1];
    for (int i = 0; i < kPayloadBits; ++i)
      counts[i] += (x >> (63 - i)) & 1u;
  }
  for (int i = 0; i < kPayloadBits; ++i)
    p[i] = static_cast<double>(counts[i]) /
           static_cast<double>(trace.size() - 1);
  return p;
}

/// Obvious cuts, applied uniformly to every method: after the last bit and
/// on both sides of each constant bit.
inline void apply_mandatory_cuts(std::array<bool, kPayloadBits>& cut_after,
                                 const std::array<bool, kPayloadBits>& constant) {
  for (int i = 0; i < kPayloadBits; ++i) {
    if (constant[i]) cut_after[i] = true;
    if (i + 1 < kPayloadBits && constant[i + 1]) cut_after[i] = true;
  }
  cut_after[63] = true;
}

// --- core predicates over an arbitrary run of adjacent positions ---------
// (used both on the full 64-bit field and on condensed traces)

/// Constant-bit baseline: cuts only where a constant bit abuts the gap.
inline std::vector<std::uint8_t> constant_cut_flags(
    const std::vector<std::uint8_t>& is_constant) {
  const std::size_t m = is_constant.size();
  std::vector<std::uint8_t> flags(m, 0);
  if (m == 0) return flags;
  for (std::size_t i = 0; i < m; ++i) {
    if (is_constant[i]) flags[i] = 1;
    if (i + 1 < m && is_constant[i + 1]) flags[i] = 1;
  }
  flags[m - 1] = 1;
  return flags;
}

/// Marchetti & Stabili: cut where the flip probability magnitude
/// ceil(log10 P) drops from one bit to the next.
inline std::vector<std::uint8_t> read_cut_flags(
    const std::vector<double>& flip_probs) {
  const std::size_t m = flip_probs.size();
  std::vector<std::uint8_t> flags(m, 0);
  if (m == 0) return flags;
  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> mag(m);
  for (std::size_t i = 0; i < m; ++i)
    mag[i] = flip_probs[i] > 0.0 ? std::ceil(std::log10(flip_probs[i])) : kNegInf;
  for (std::size_t i = 0; i + 1 < m; ++i) flags[i] = mag[i] > mag[i + 1] ? 1 : 0;
  flags[m - 1] = 1;
  return flags;
}

/// Nolan et al.: repeatedly seed a signal at the highest remaining flip
/// count and absorb leftward while the count strictly decreases. Forward
/// bit order only.
inline std::vector<std::uint8_t> tang_cut_flags(
    const std::vector<std::uint64_t>& flip_counts) {
  const std::size_t m = flip_counts.size();
  std::vector<std::uint8_t> flags(m, 0);
  if (m == 0) return flags;
  std::vector<std::uint8_t> assigned(m, 0);
  for (std::size_t i = 0; i < m; ++i)
    if (flip_counts[i] == 0) assigned[i] = 1;  // constants are not seeds
  for (;;) {
    std::size_t seed = m;
    std::uint64_t best = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (assigned[i]) continue;
      if (seed == m || flip_counts[i] >= best) {  // rightmost max
        seed = i;
        best = flip_counts[i];
      }
    }
    if (seed == m) break;
    assigned[seed] = 1;
    std::size_t msb = seed;
    while (msb > 0 && !assigned[msb - 1] &&
           flip_counts[msb - 1] < flip_counts[msb]) {
      --msb;
      assigned[msb] = 1;
    }
    flags[seed] = 1;                    // cut after the signal's LSB
    if (msb > 0) flags[msb - 1] = 1;    // and before its MSB
  }
  flags[m - 1] = 1;
  return flags;
}

/// LibreCAN phase 0: cut where the next bit's flip probability drops below
/// a fraction T of this bit's. A zero probability on the left never cuts.
inline std::vector<std::uint8_t> librecan_cut_flags(
    const std::vector<double>& flip_probs, double T = 0.2) {
  const std::size_t m = flip_probs.size();
  std::vector<std::uint8_t> flags(m, 0);
  if (m == 0) return flags;
  for (std::size_t i = 0; i + 1 < m; ++i)
    flags[i] = (flip_probs[i] > 0.0 && flip_probs[i + 1] < T * flip_probs[i]) ? 1 : 0;
  flags[m - 1] = 1;
  return flags;
}

// --- full-trace wrappers --------------------------------------------------

inline BoundaryPrediction baseline_constant(const IdTrace& trace) {
  BoundaryPrediction pred;
  pred.algorithm = "constant";
  const auto constant = trace.constant_mask();
  apply_mandatory_cuts(pred.cut_after, constant);
  return pred;
}

inline BoundaryPrediction read_boundaries(const IdTrace& trace) {
  BoundaryPrediction pred;
  pred.algorithm = "read";
  const auto p = flip_probabilities(trace);
  const auto flags = read_cut_flags({p.begin(), p.end()});
  for (int i = 0; i < kPayloadBits; ++i) pred.cut_after[i] = flags[i] != 0;
  apply_mandatory_cuts(pred.cut_after, trace.constant_mask());
  return pred;
}

inline BoundaryPrediction tang_boundaries(const IdTrace& trace) {
  BoundaryPrediction pred;
  pred.algorithm = "tang";
  std::vector<std::uint64_t> counts(kPayloadBits, 0);
  for (std::size_t j = 0; j + 1 < trace.size(); ++j) {
    const PayloadBits x = trace.rows[j] ^ trace.rows[j + 1];
    for (int i = 0; i < kPayloadBits; ++i) counts[i] += (x >> (63 - i)) & 1u;
  }
  const auto flags = tang_cut_flags(counts);
  for (int i = 0; i < kPayloadBits; ++i) pred.cut_after[i] = flags[i] != 0;
  apply_mandatory_cuts(pred.cut_after, trace.constant_mask());
  return pred;
}

inline BoundaryPrediction librecan_boundaries(const IdTrace& trace,
                                              double T = 0.2) {
  BoundaryPrediction pred;
  pred.algorithm = "librecan";
  const auto p = flip_probabilities(trace);
  const auto flags = librecan_cut_flags({p.begin(), p.end()}, T);
  for (int i = 0; i < kPayloadBits; ++i) pred.cut_after[i] = flags[i] != 0;
  apply_mandatory_cuts(pred.cut_after, trace.constant_mask());
  return pred;
}

}  // namespace cand
