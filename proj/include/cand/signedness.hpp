#pragma once

#include <cstdint>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/endian_opt.hpp"
#include "cand/errors.hpp"

namespace cand {

/// Time series of a signal's two most significant bits.
struct MsbPairTrace {
  std::vector<std::uint8_t> msb;   // b0
  std::vector<std::uint8_t> next;  // b1

  std::size_t size() const { return msb.size(); }
};

inline MsbPairTrace msb_pair_trace(const IdTrace& trace, const SignalSpec& spec) {
  MsbPairTrace t;
  t.msb.reserve(trace.size());
  t.next.reserve(trace.size());
  const int b0 = spec.bit_indices[0];
  const int b1 = spec.bit_indices[1];
  for (const PayloadBits row : trace.rows) {
    t.msb.push_back(static_cast<std::uint8_t>(payload_bit(row, b0)));
    t.next.push_back(static_cast<std::uint8_t>(payload_bit(row, b1)));
  }
  return t;
}

/// Two's-complement detector on the two MSBs. Rules fire in order:
///  1. the extreme-value pairs (1,0)/(0,1) never occur        -> signed
///  2. no (0,0) -> (1,1) step between consecutive frames      -> unsigned
///  3. extreme-value pairs are rare (summed probability < gamma) -> signed
///  4. otherwise                                              -> unsigned
inline bool classify_signedness(const MsbPairTrace& t, double gamma = 0.2) {
  const std::size_t n = t.size();
  if (n < 2) throw InsufficientData("signedness needs at least 2 samples");
  std::size_t c10 = 0, c01 = 0, jumps = 0;
  for (std::size_t j = 0; j < n; ++j) {
    c10 += t.msb[j] == 1 && t.next[j] == 0;
    c01 += t.msb[j] == 0 && t.next[j] == 1;
    if (j + 1 < n && t.msb[j] == 0 && t.next[j] == 0 && t.msb[j + 1] == 1 &&
        t.next[j + 1] == 1)
      ++jumps;
  }
  const double p_extremes = static_cast<double>(c10 + c01) / static_cast<double>(n);
  const double p_jump = static_cast<double>(jumps) / static_cast<double>(n - 1);
  if (p_extremes == 0.0) return true;
  if (p_jump == 0.0) return false;
  return p_extremes < gamma;
}

/// Per-signal signedness for a tokenization. Signals of length 1 or 2 are
/// unsigned by rule; longer signals are classified from their two MSBs.
inline std::vector<bool> apply_signedness(const Tokenization& tok,
                                          const IdTrace& trace,
                                          double gamma = 0.2) {
  std::vector<bool> out(tok.signals.size(), false);
  for (std::size_t k = 0; k < tok.signals.size(); ++k) {
    const SignalSpec& spec = tok.signals[k];
    if (spec.length() <= 2) continue;
    out[k] = classify_signedness(msb_pair_trace(trace, spec), gamma);
  }
  return out;
}

}  // namespace cand
