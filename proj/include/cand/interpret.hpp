#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/errors.hpp"
#include "cand/ingest.hpp"

namespace cand {

/// Raw translated signal: one integer per frame. Values are exact for
/// signals up to 53 bits; wider ones lose only sub-integer precision.
struct SignalTimeSeries {
  SignalSpec spec;
  Endianness endianness = Endianness::Big;
  bool is_signed = false;
  std::vector<double> timestamps;
  std::vector<double> values;

  std::size_t size() const { return timestamps.size(); }
};

struct Interpretation {
  std::string did_label;
  std::string unit;
  double scale = 1.0;   // a
  double offset = 0.0;  // b
  double r_squared = 0.0;
};

/// Concatenate the spec's bits per frame, MSB first. Unsigned is plain
/// base 2; signed is the two's complement reading of the same bit string.
inline std::uint64_t translate_frame_raw(PayloadBits payload,
                                         const SignalSpec& spec) {
  std::uint64_t raw = 0;
  for (int i : spec.bit_indices)
    raw = raw << 1 | static_cast<std::uint64_t>(payload_bit(payload, i));
  return raw;
}

inline double raw_to_number(std::uint64_t raw, int length, bool is_signed) {
  if (!is_signed || length == 0) return static_cast<double>(raw);
  const std::uint64_t sign_mask = std::uint64_t{1} << (length - 1);
  if (raw & sign_mask) {
    // sign-extend: value = raw - 2^length
    return static_cast<double>(raw) - std::ldexp(1.0, length);
  }
  return static_cast<double>(raw);
}

/// Inverse of the above for packing: the low `length` bits of the integer.
inline std::uint64_t number_to_raw(long long value, int length) {
  const std::uint64_t mask =
      length >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << length) - 1;
  return static_cast<std::uint64_t>(value) & mask;
}

inline SignalTimeSeries translate(const IdTrace& trace, const SignalSpec& spec,
                                  Endianness e, bool is_signed) {
  SignalTimeSeries s;
  s.spec = spec;
  s.endianness = e;
  s.is_signed = is_signed;
  s.timestamps = trace.timestamps;
  s.values.reserve(trace.size());
  const int L = spec.length();
  for (const PayloadBits row : trace.rows)
    s.values.push_back(raw_to_number(translate_frame_raw(row, spec), L, is_signed));
  return s;
}

/// Piecewise-linear interpolation with endpoint clamping. Zero-length
/// segments (duplicate timestamps) take the later sample's value.
inline std::vector<double> interpolate_at(const SignalTimeSeries& s,
                                          const std::vector<double>& query) {
  if (s.size() < 2)
    throw InsufficientData("interpolation needs at least 2 samples");
  std::vector<double> out;
  out.reserve(query.size());
  for (const double t : query) {
    if (t <= s.timestamps.front()) {
      out.push_back(s.values.front());
      continue;
    }
    if (t >= s.timestamps.back()) {
      out.push_back(s.values.back());
      continue;
    }
    const auto it =
        std::upper_bound(s.timestamps.begin(), s.timestamps.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - s.timestamps.begin());
    const std::size_t lo = hi - 1;
    const double dt = s.timestamps[hi] - s.timestamps[lo];
    if (dt <= 0.0) {
      out.push_back(s.values[hi]);
      continue;
    }
    const double w = (t - s.timestamps[lo]) / dt;
    out.push_back(s.values[lo] + w * (s.values[hi] - s.values[lo]));
  }
  return out;
}

/// Zero-order-hold alternative, kept behind a flag for sensitivity checks.
inline std::vector<double> sample_and_hold_at(const SignalTimeSeries& s,
                                              const std::vector<double>& query) {
  if (s.size() < 2)
    throw InsufficientData("interpolation needs at least 2 samples");
  std::vector<double> out;
  out.reserve(query.size());
  for (const double t : query) {
    const auto it =
        std::upper_bound(s.timestamps.begin(), s.timestamps.end(), t);
    const std::size_t hi = static_cast<std::size_t>(it - s.timestamps.begin());
    out.push_back(s.values[hi == 0 ? 0 : hi - 1]);
  }
  return out;
}

struct LinearFit {
  double a = 0.0;
  double b = 0.0;
  double r_squared = 0.0;
};

/// Least squares of y on x. A constant y fits the horizontal line with
/// R^2 defined as 0; a constant x carries no information and is an error.
inline LinearFit fit_linear(const std::vector<double>& x,
                            const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw InsufficientData("fit needs two equal-length series");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double dx = x[k] - mx;
    const double dy = y[k] - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw ValidationError("regressor is constant");
  LinearFit fit;
  fit.a = sxy / sxx;
  fit.b = my - fit.a * mx;
  if (syy == 0.0) {
    fit.a = 0.0;
    fit.b = my;
    fit.r_squared = 0.0;
    return fit;
  }
  double ss_res = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double e = fit.a * x[k] + fit.b - y[k];
    ss_res += e * e;
  }
  fit.r_squared = 1.0 - ss_res / syy;
  return fit;
}

struct MatchOptions {
  double delta = 0.5;           // minimum R^2 to accept a match
  bool sample_and_hold = false; // interpolation flavor
};

/// Best fit per signal regardless of threshold: regress every DID trace
/// onto the signal over their overlapping time span, keep the max R^2.
inline std::vector<std::optional<Interpretation>> best_fits(
    const std::vector<SignalTimeSeries>& signals,
    const std::vector<DidTrace>& dids, const MatchOptions& opt = {}) {
  std::vector<std::optional<Interpretation>> out(signals.size());
  for (std::size_t si = 0; si < signals.size(); ++si) {
    const SignalTimeSeries& s = signals[si];
    if (s.size() < 2) continue;
    std::optional<Interpretation> best;
    for (const DidTrace& did : dids) {
      if (did.size() < 2) continue;
      const double lo = std::max(s.timestamps.front(), did.timestamps.front());
      const double hi = std::min(s.timestamps.back(), did.timestamps.back());
      if (lo >= hi) continue;  // no overlap
      std::vector<double> qt, qy;
      for (std::size_t k = 0; k < did.size(); ++k) {
        if (did.timestamps[k] < lo || did.timestamps[k] > hi) continue;
        qt.push_back(did.timestamps[k]);
        qy.push_back(did.values[k]);
      }
      if (qt.size() < 2) continue;
      const std::vector<double> qx =
          opt.sample_and_hold ? sample_and_hold_at(s, qt) : interpolate_at(s, qt);
      LinearFit fit;
      try {
        fit = fit_linear(qx, qy);
      } catch (const ValidationError&) {
        continue;  // signal constant over the window
      }
      if (!best || fit.r_squared > best->r_squared)
        best = Interpretation{did.label, did.unit, fit.a, fit.b, fit.r_squared};
    }
    out[si] = std::move(best);
  }
  return out;
}

/// A match is attached when its R^2 strictly exceeds delta; an exact fit
/// (R^2 = 1) always qualifies, so delta = 1 keeps exactly the perfect ones.
inline bool match_accepted(double r_squared, double delta) {
  return r_squared > delta || r_squared >= 1.0;
}

inline std::vector<std::optional<Interpretation>> match_signals(
    const std::vector<SignalTimeSeries>& signals,
    const std::vector<DidTrace>& dids, const MatchOptions& opt = {}) {
  auto out = best_fits(signals, dids, opt);
  for (auto& m : out)
    if (m && !match_accepted(m->r_squared, opt.delta)) m.reset();
  return out;
}

}  // namespace cand
