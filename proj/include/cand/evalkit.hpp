#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cand/baselines.hpp"
#include "cand/can_model.hpp"
#include "cand/dbc.hpp"
#include "cand/features.hpp"
#include "cand/interpret.hpp"

namespace cand {

enum class Regime { Condensed, FullNonobvious, FullAll };  // c, f-, f+

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::Condensed: return "c";
    case Regime::FullNonobvious: return "f-";
    default: return "f+";
  }
}

/// Ground truth adjusted to what a log can support: constant MSBs are
/// trimmed off each signal (a signed signal reduced to two bits or fewer
/// loses its signedness), and signals constant over the whole log drop out.
inline MessageDefinition trim_to_log(const MessageDefinition& msg,
                                     const IdTrace& trace) {
  MessageDefinition out = msg;
  out.signals.clear();
  const auto constant = trace.constant_mask();
  for (const SignalDefinition& def : msg.signals) {
    const SignalSpec spec = def.spec();
    std::size_t first = 0;
    while (first < spec.bit_indices.size() && constant[spec.bit_indices[first]])
      ++first;
    if (first == spec.bit_indices.size()) continue;  // unobserved signal
    SignalDefinition trimmed = def;
    trimmed.start_bit_internal = spec.bit_indices[first];
    trimmed.length = static_cast<int>(spec.bit_indices.size() - first);
    if (trimmed.length <= 2) trimmed.is_signed = false;
    out.signals.push_back(std::move(trimmed));
  }
  return out;
}

struct BinaryCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  void account(bool predicted, bool truth) {
    if (predicted && truth) ++tp;
    else if (predicted && !truth) ++fp;
    else if (!predicted && truth) ++fn;
    else ++tn;
  }
  void merge(const BinaryCounts& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
  }
};

struct BinaryMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f_score = 0.0;
};

/// Standard P/R/F with zero denominators mapping to 0.
inline BinaryMetrics boundary_metrics(const BinaryCounts& c) {
  BinaryMetrics m;
  m.precision = (c.tp + c.fp) ? double(c.tp) / double(c.tp + c.fp) : 0.0;
  m.recall = (c.tp + c.fn) ? double(c.tp) / double(c.tp + c.fn) : 0.0;
  m.f_score = (m.precision + m.recall) > 0.0
                  ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                  : 0.0;
  return m;
}

/// Scored bit positions of a full-trace regime. A gap decision after bit i
/// is scored when bit i is nonconstant; f- additionally requires a
/// nonconstant successor (message end counts as obvious).
inline std::vector<int> regime_positions(const IdTrace& trace, Regime regime) {
  const auto constant = trace.constant_mask();
  std::vector<int> out;
  for (int i = 0; i < kPayloadBits; ++i) {
    if (constant[i]) continue;
    if (regime == Regime::FullNonobvious &&
        (i == kPayloadBits - 1 || constant[i + 1]))
      continue;
    out.push_back(i);
  }
  return out;
}

/// Accumulate one ID's full-trace scoring: predictions are cut-after flags
/// under big endian ordering; truth labels come from the split convention.
inline void score_full_trace(const IdTrace& trace,
                             const MessageDefinition& trimmed_truth,
                             const std::array<bool, kPayloadBits>& cut_after,
                             Regime regime, BinaryCounts& counts) {
  if (regime == Regime::Condensed)
    throw ValidationError("condensed regime needs condensed scoring");
  const auto lsbs = fragment_lsb_set(trimmed_truth);
  for (int i : regime_positions(trace, regime))
    counts.account(cut_after[i], lsbs.count(i) > 0);
}

/// Accumulate one ID's condensed-regime scoring: predictions are per-gap
/// flags over adjacent condensed pairs (width-1 decisions).
inline void score_condensed(const CondensedTrace& ct,
                            const MessageDefinition& trimmed_truth,
                            const std::vector<std::uint8_t>& gap_pred,
                            BinaryCounts& counts) {
  const auto labels = label_vector(ct, trimmed_truth);
  if (ct.width() < 2) return;
  if (gap_pred.size() < ct.width() - 1)
    throw ValidationError("condensed prediction length mismatch");
  for (std::size_t k = 0; k + 1 < ct.width(); ++k)
    counts.account(gap_pred[k] != 0, labels[k] != 0);
}

// --- translated-signal error ----------------------------------------------

namespace detail {

/// Min-max normalization to [0,1]; constant series become all zeros.
inline std::vector<double> normalize(const std::vector<double>& v) {
  if (v.empty()) return {};
  double lo = v[0], hi = v[0];
  for (double x : v) {
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  std::vector<double> out(v.size());
  if (hi <= lo) return out;
  const double span = hi - lo;
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = (v[k] - lo) / span;
  return out;
}

inline double mean_abs(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s / static_cast<double>(v.size());
}

inline double mean_abs_diff(const std::vector<double>& a,
                            const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return a.empty() ? 0.0 : s / static_cast<double>(a.size());
}

}  // namespace detail

struct SignalErrorReport {
  double raw_sum = 0.0;    // numerator of the error equation
  double mean_error = 0.0; // raw_sum / (|S| + |unmatched predictions|)
  std::size_t true_count = 0;
  std::size_t unmatched_predictions = 0;
  struct Pair {
    std::string true_name;
    std::string matched_pred_name;  // empty for the unmatched-prediction rows
    double l1 = 0.0;
  };
  std::vector<Pair> pairs;
};

/// Mean l1 error between translated truth and translated predictions on one
/// trace. Each true signal pairs with the prediction containing its MSB;
/// predictions left unmatched pair with the zero vector. Series are min-max
/// normalized; predictions constant over the log are not counted as signals.
inline SignalErrorReport mean_l1_error(const MessageDefinition& truth,
                                       const MessageDefinition& predicted,
                                       const IdTrace& trace) {
  SignalErrorReport report;
  struct Pred {
    const SignalDefinition* def;
    std::vector<double> norm;
    std::array<bool, kPayloadBits> owns{};
    bool matched = false;
  };
  std::vector<Pred> preds;
  for (const SignalDefinition& def : predicted.signals) {
    const SignalSpec spec = def.spec();
    const SignalTimeSeries series =
        translate(trace, spec, def.endianness, def.is_signed);
    bool constant = true;
    for (double v : series.values)
      if (v != series.values.front()) {
        constant = false;
        break;
      }
    if (constant) continue;
    Pred p;
    p.def = &def;
    p.norm = detail::normalize(series.values);
    for (int i : spec.bit_indices) p.owns[i] = true;
    preds.push_back(std::move(p));
  }
  for (const SignalDefinition& def : truth.signals) {
    const SignalSpec spec = def.spec();
    const SignalTimeSeries series =
        translate(trace, spec, def.endianness, def.is_signed);
    const auto norm = detail::normalize(series.values);
    ++report.true_count;
    Pred* container = nullptr;
    for (Pred& p : preds)
      if (p.owns[spec.msb()]) {
        container = &p;
        break;
      }
    double l1 = detail::mean_abs(norm);  // no container: compare against zero
    std::string pred_name;
    if (container) {
      container->matched = true;
      l1 = detail::mean_abs_diff(norm, container->norm);
      pred_name = container->def->name;
    }
    report.raw_sum += l1;
    report.pairs.push_back({def.name, pred_name, l1});
  }
  for (const Pred& p : preds) {
    if (p.matched) continue;
    ++report.unmatched_predictions;
    const double l1 = detail::mean_abs(p.norm);
    report.raw_sum += l1;
    report.pairs.push_back({"", p.def->name, l1});
  }
  const std::size_t denom = report.true_count + report.unmatched_predictions;
  report.mean_error = denom ? report.raw_sum / static_cast<double>(denom) : 0.0;
  return report;
}

/// Turn cut-after flags into big endian, unsigned signal definitions (how
/// the baseline methods' outputs are translated for the error metric).
inline MessageDefinition definitions_from_cuts(
    const IdTrace& trace, const std::array<bool, kPayloadBits>& cut_after,
    const std::string& name_prefix) {
  MessageDefinition msg;
  msg.arbitration_id = trace.arbitration_id;
  msg.extended_id = trace.extended_id;
  msg.message_name = name_prefix;
  msg.dlc = kPayloadBytes;
  int start = 0;
  int index = 0;
  for (int i = 0; i < kPayloadBits; ++i) {
    if (!cut_after[i]) continue;
    SignalDefinition def;
    def.name = name_prefix + "_SIG" + std::to_string(index++);
    def.start_bit_internal = start;
    def.length = i - start + 1;
    msg.signals.push_back(std::move(def));
    start = i + 1;
  }
  return msg;
}

}  // namespace cand
