#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cand/baselines.hpp"
#include "cand/boundary.hpp"
#include "cand/dbc.hpp"
#include "cand/endian_opt.hpp"
#include "cand/evalkit.hpp"
#include "cand/forest.hpp"
#include "cand/ingest.hpp"
#include "cand/interpret.hpp"
#include "cand/signedness.hpp"

namespace cand {

inline constexpr const char* kVersion = "0.1.0";

struct RunConfig {
  double alpha1 = 0.01;
  double alpha2 = 0.5;
  double beta = 0.6;
  double gamma = 0.2;
  double delta = 0.5;
  std::uint64_t seed = 0;
  bool strip_diagnostics = false;
  bool sample_and_hold = false;
  std::optional<ForestModel> forest;  // heuristic when absent

  BoundaryClassifier classifier() const {
    if (forest) return BoundaryClassifier(&*forest);
    return BoundaryClassifier(HeuristicParams{alpha1, alpha2});
  }
  std::string classifier_name() const { return forest ? "forest" : "heuristic"; }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[64];
  const auto rc = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, rc.ptr);
}

inline std::string hex_id(std::uint32_t id, bool extended) {
  char buf[16];
  std::snprintf(buf, sizeof buf, extended ? "%08X" : "%03X", id);
  return buf;
}

inline std::string sanitize_name(std::string s) {
  for (char& c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') c = '_';
  if (s.empty() || std::isdigit(static_cast<unsigned char>(s[0])))
    s.insert(s.begin(), 'S');
  return s;
}

}  // namespace detail

inline std::string config_header(const RunConfig& cfg, const std::string& command) {
  std::ostringstream ss;
  ss << "cand v" << kVersion << ' ' << command << " seed=" << cfg.seed
     << " classifier=" << cfg.classifier_name() << " alpha1=" << detail::fmt(cfg.alpha1)
     << " alpha2=" << detail::fmt(cfg.alpha2) << " beta=" << detail::fmt(cfg.beta)
     << " gamma=" << detail::fmt(cfg.gamma) << " delta=" << detail::fmt(cfg.delta);
  return ss.str();
}

// --- decode -----------------------------------------------------------------

struct DecodedId {
  std::uint32_t arbitration_id = 0;
  bool extended_id = false;
  std::size_t frames = 0;
  bool low_confidence = false;  // fewer than 100 frames
  bool skipped = false;         // fewer than 2 frames: nothing to learn
  Tokenization tokenization;    // valid unless skipped
  std::vector<bool> signed_flags;
  MessageDefinition learned;    // nonconstant tokens only
  std::vector<std::pair<int, int>> constant_ranges;  // inclusive bit ranges
};

struct MatchRow {
  std::uint32_t arbitration_id = 0;
  std::string signal;
  std::string did_label;
  double a = 0.0, b = 0.0, r2 = 0.0;
  bool matched = false;
};

struct DecodeResult {
  std::vector<DecodedId> ids;
  std::vector<MessageDefinition> messages;  // one per id, possibly empty
  std::vector<MatchRow> matches;
  std::size_t malformed_lines = 0;
  std::size_t stripped_frames = 0;
};

namespace detail {

inline std::vector<std::pair<int, int>> constant_ranges_of(
    const std::array<bool, kPayloadBits>& constant) {
  std::vector<std::pair<int, int>> out;
  int start = -1;
  for (int i = 0; i <= kPayloadBits; ++i) {
    const bool c = i < kPayloadBits && constant[i];
    if (c && start < 0) start = i;
    if (!c && start >= 0) {
      out.emplace_back(start, i - 1);
      start = -1;
    }
  }
  return out;
}

}  // namespace detail

/// Steps 1-3 for one trace: boundary probabilities under both orderings,
/// tokenization, signedness. Constant bits come out as unused ranges, the
/// remaining tokens as unnamed signal definitions.
inline DecodedId decode_trace(const IdTrace& trace, const RunConfig& cfg) {
  DecodedId out;
  out.arbitration_id = trace.arbitration_id;
  out.extended_id = trace.extended_id;
  out.frames = trace.size();
  out.low_confidence = trace.size() < 100;
  out.learned.arbitration_id = trace.arbitration_id;
  out.learned.extended_id = trace.extended_id;
  out.learned.message_name =
      "MSG_" + detail::hex_id(trace.arbitration_id, trace.extended_id);
  out.learned.dlc = trace.max_length;

  if (trace.size() < 2) {
    out.skipped = true;
    out.constant_ranges.emplace_back(0, kPayloadBits - 1);
    return out;
  }
  const auto constant = trace.constant_mask();
  out.constant_ranges = detail::constant_ranges_of(constant);

  const BoundaryProbabilities f = boundary_probabilities(trace, cfg.classifier());
  out.tokenization = optimize(f, cfg.beta);
  out.signed_flags = apply_signedness(out.tokenization, trace, cfg.gamma);

  int index = 0;
  for (std::size_t k = 0; k < out.tokenization.signals.size(); ++k) {
    const SignalSpec& spec = out.tokenization.signals[k];
    if (constant[spec.msb()]) continue;  // constant 1-bit token
    SignalDefinition def;
    def.name = "ID" + detail::hex_id(trace.arbitration_id, trace.extended_id) +
               "_SIG" + std::to_string(index++);
    def.start_bit_internal = spec.msb();
    def.length = spec.length();
    def.endianness = out.tokenization.signal_endianness[k];
    def.is_signed = out.signed_flags[k];
    out.learned.signals.push_back(std::move(def));
  }
  return out;
}

/// Full decode of a log: per-ID steps 1-3, then DID matching when traces
/// are supplied. IDs are processed in ascending order.
inline DecodeResult decode_log(const CanLog& log, const RunConfig& cfg,
                               const std::vector<DidTrace>& dids = {}) {
  DecodeResult result;
  result.malformed_lines = log.malformed_lines;
  const auto traces = partition_traces(log);
  for (const auto& [id, trace] : traces) {
    DecodedId decoded = decode_trace(trace, cfg);
    if (!decoded.skipped && !dids.empty()) {
      std::vector<SignalTimeSeries> series;
      series.reserve(decoded.learned.signals.size());
      for (const SignalDefinition& def : decoded.learned.signals)
        series.push_back(
            translate(trace, def.spec(), def.endianness, def.is_signed));
      const MatchOptions opt{cfg.delta, cfg.sample_and_hold};
      const auto fits = best_fits(series, dids, opt);
      std::map<std::string, int> name_uses;
      for (std::size_t k = 0; k < fits.size(); ++k) {
        if (!fits[k]) continue;
        SignalDefinition& def = decoded.learned.signals[k];
        const bool matched = match_accepted(fits[k]->r_squared, cfg.delta);
        result.matches.push_back({id, def.name, fits[k]->did_label, fits[k]->scale,
                                  fits[k]->offset, fits[k]->r_squared, matched});
        if (matched) {
          std::string name = detail::sanitize_name(fits[k]->did_label);
          const int uses = name_uses[name]++;
          if (uses > 0) name += "_" + std::to_string(uses + 1);
          def.name = name;
          def.unit = fits[k]->unit;
          def.scale = fits[k]->scale;
          def.offset = fits[k]->offset;
          def.comment = "matched R2=" + detail::fmt(fits[k]->r_squared);
        }
      }
    }
    result.messages.push_back(decoded.learned);
    result.ids.push_back(std::move(decoded));
  }
  return result;
}

inline std::string decode_report(const DecodeResult& result, const RunConfig& cfg) {
  std::ostringstream ss;
  ss << "# " << config_header(cfg, "decode") << '\n';
  ss << "# ids=" << result.ids.size()
     << " malformed_lines=" << result.malformed_lines
     << " stripped_frames=" << result.stripped_frames << '\n';
  for (const DecodedId& d : result.ids) {
    ss << "id " << detail::hex_id(d.arbitration_id, d.extended_id)
       << " frames=" << d.frames;
    if (d.skipped) ss << " skipped=insufficient-data";
    if (d.low_confidence) ss << " low-confidence";
    ss << '\n';
    for (const auto& [lo, hi] : d.constant_ranges)
      ss << "  unused bits " << lo << ".." << hi << '\n';
    for (const SignalDefinition& def : d.learned.signals) {
      ss << "  signal " << def.name << " msb=" << def.start_bit_internal
         << " len=" << def.length << ' ' << to_string(def.endianness)
         << (def.is_signed ? " signed" : " unsigned");
      if (!def.comment.empty()) ss << ' ' << def.comment;
      ss << '\n';
    }
  }
  if (!result.matches.empty()) {
    ss << "match table:\n";
    ss << "  id,signal,did_label,a,b,r2,matched\n";
    for (const MatchRow& m : result.matches)
      ss << "  " << m.arbitration_id << ',' << m.signal << ',' << m.did_label
         << ',' << detail::fmt(m.a) << ',' << detail::fmt(m.b) << ','
         << detail::fmt(m.r2) << ',' << (m.matched ? 1 : 0) << '\n';
  }
  return ss.str();
}

inline std::string match_csv(const DecodeResult& result) {
  std::ostringstream ss;
  ss << "id,signal,did_label,a,b,r2,matched\n";
  for (const MatchRow& m : result.matches)
    ss << m.arbitration_id << ',' << m.signal << ',' << m.did_label << ','
       << detail::fmt(m.a) << ',' << detail::fmt(m.b) << ',' << detail::fmt(m.r2)
       << ',' << (m.matched ? 1 : 0) << '\n';
  return ss.str();
}

// --- training ----------------------------------------------------------------

struct LabeledLog {
  CanLog log;
  std::vector<MessageDefinition> truth;
  std::string name;
};

/// Gap samples from every truth-covered ID, big endian ordering, labels per
/// the byte-split convention, 8:4:1 weights.
inline TrainingSet build_training_set(const std::vector<LabeledLog>& pairs) {
  TrainingSet set;
  for (const LabeledLog& pair : pairs) {
    const auto traces = partition_traces(pair.log);
    for (const MessageDefinition& truth : pair.truth) {
      const auto it = traces.find(truth.arbitration_id);
      if (it == traces.end())
        throw ValidationError("truth id " + std::to_string(truth.arbitration_id) +
                              " missing from log " + pair.name);
      const IdTrace& trace = it->second;
      if (trace.size() < 2) continue;
      const CondensedTrace ct = condense(trace, Endianness::Big);
      if (ct.width() < 2) continue;
      const auto fvs = feature_matrix(ct);
      const MessageDefinition trimmed = trim_to_log(truth, trace);
      const auto labels = label_vector(ct, trimmed);
      append_training_samples(ct, fvs, labels, trace, set);
    }
  }
  return set;
}

/// Offline-inspection dump of the gap features built for training:
/// id,bit,ordering,f1..f15,label.
inline void dump_training_features(const std::vector<LabeledLog>& pairs,
                                   std::ostream& out) {
  out << "id,bit,ordering";
  for (int k = 1; k <= 15; ++k) out << ",f" << k;
  out << ",label\n";
  for (const LabeledLog& pair : pairs) {
    const auto traces = partition_traces(pair.log);
    for (const MessageDefinition& truth : pair.truth) {
      const auto it = traces.find(truth.arbitration_id);
      if (it == traces.end() || it->second.size() < 2) continue;
      const CondensedTrace ct = condense(it->second, Endianness::Big);
      if (ct.width() < 2) continue;
      const auto fvs = feature_matrix(ct);
      const auto labels = label_vector(ct, trim_to_log(truth, it->second));
      dump_feature_csv(out, ct, fvs, &labels);
    }
  }
}

struct FoldMetrics {
  std::string held_out;
  BinaryMetrics metrics;  // f- regime
  BinaryCounts counts;
};

/// Full-trace cut flags from a classifier's boundary probabilities under
/// big endian ordering (forest probabilities thresholded at 1/2).
inline std::array<bool, kPayloadBits> classifier_cut_flags(
    const IdTrace& trace, const BoundaryClassifier& clf) {
  const BoundaryProbabilities f = boundary_probabilities(trace, clf);
  std::array<bool, kPayloadBits> flags{};
  for (int i = 0; i < kPayloadBits; ++i)
    flags[i] = f.big.mandatory[i] || f.big.value[i] > 0.5;
  return flags;
}

/// Leave-one-log-out cross validation, scoring the nonobvious (f-) set.
inline std::vector<FoldMetrics> loocv_by_log(const std::vector<LabeledLog>& pairs,
                                             const ForestHyperparams& params,
                                             std::uint64_t seed) {
  std::vector<FoldMetrics> folds;
  if (pairs.size() < 2) return folds;
  for (std::size_t held = 0; held < pairs.size(); ++held) {
    std::vector<LabeledLog> rest;
    for (std::size_t k = 0; k < pairs.size(); ++k)
      if (k != held) rest.push_back(pairs[k]);
    const TrainingSet set = build_training_set(rest);
    const ForestModel model = train_forest(set, params, seed);
    FoldMetrics fold;
    fold.held_out = pairs[held].name;
    const auto traces = partition_traces(pairs[held].log);
    for (const MessageDefinition& truth : pairs[held].truth) {
      const auto it = traces.find(truth.arbitration_id);
      if (it == traces.end() || it->second.size() < 2) continue;
      const auto flags = classifier_cut_flags(it->second, &model);
      score_full_trace(it->second, trim_to_log(truth, it->second), flags,
                       Regime::FullNonobvious, fold.counts);
    }
    fold.metrics = boundary_metrics(fold.counts);
    folds.push_back(std::move(fold));
  }
  return folds;
}

// --- comparative evaluation ---------------------------------------------------

enum class Algorithm {
  CandHeuristic,
  CandForest,
  Read,
  Tang,
  Librecan,
  Constant,
};

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::CandHeuristic: return "cand-heuristic";
    case Algorithm::CandForest: return "cand-forest";
    case Algorithm::Read: return "read";
    case Algorithm::Tang: return "tang";
    case Algorithm::Librecan: return "librecan";
    default: return "constant";
  }
}

inline std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  for (Algorithm a : {Algorithm::CandHeuristic, Algorithm::CandForest,
                      Algorithm::Read, Algorithm::Tang, Algorithm::Librecan,
                      Algorithm::Constant})
    if (s == to_string(a)) return a;
  return std::nullopt;
}

namespace detail {

inline std::array<bool, kPayloadBits> algorithm_full_flags(
    Algorithm algo, const IdTrace& trace, const RunConfig& cfg) {
  switch (algo) {
    case Algorithm::CandHeuristic:
    case Algorithm::CandForest:
      return classifier_cut_flags(trace, cfg.classifier());
    case Algorithm::Read: return read_boundaries(trace).cut_after;
    case Algorithm::Tang: return tang_boundaries(trace).cut_after;
    case Algorithm::Librecan: return librecan_boundaries(trace).cut_after;
    default: return baseline_constant(trace).cut_after;
  }
}

/// Per-gap predictions over a condensed trace (width-1 decisions).
inline std::vector<std::uint8_t> algorithm_condensed_flags(
    Algorithm algo, const CondensedTrace& ct, const RunConfig& cfg) {
  const std::size_t m = ct.width();
  std::vector<std::uint8_t> gaps(m > 0 ? m - 1 : 0, 0);
  if (m < 2) return gaps;
  switch (algo) {
    case Algorithm::CandHeuristic:
    case Algorithm::CandForest: {
      const auto fvs = feature_matrix(ct);
      const BoundaryClassifier clf = cfg.classifier();
      for (std::size_t k = 0; k + 1 < m; ++k)
        gaps[k] = classify_gap(clf, fvs, k) > 0.5 ? 1 : 0;
      return gaps;
    }
    case Algorithm::Read:
    case Algorithm::Librecan: {
      std::vector<double> probs(m);
      for (std::size_t k = 0; k < m; ++k) {
        double s = 0.0;
        for (std::uint8_t b : ct.columns[k]) s += b;
        probs[k] = s / static_cast<double>(ct.columns[k].size());
      }
      const auto flags = algo == Algorithm::Read ? read_cut_flags(probs)
                                                 : librecan_cut_flags(probs);
      for (std::size_t k = 0; k + 1 < m; ++k) gaps[k] = flags[k];
      return gaps;
    }
    case Algorithm::Tang: {
      std::vector<std::uint64_t> counts(m);
      for (std::size_t k = 0; k < m; ++k) {
        std::uint64_t s = 0;
        for (std::uint8_t b : ct.columns[k]) s += b;
        counts[k] = s;
      }
      const auto flags = tang_cut_flags(counts);
      for (std::size_t k = 0; k + 1 < m; ++k) gaps[k] = flags[k];
      return gaps;
    }
    default: {
      // nothing is constant in a condensed trace, so no cuts to claim
      return gaps;
    }
  }
}

/// Steps 1-3 as this algorithm would tokenize the trace: the full optimizer
/// for the two CAN-D variants, big endian unsigned runs for everyone else.
inline MessageDefinition algorithm_definitions(Algorithm algo,
                                               const IdTrace& trace,
                                               const RunConfig& cfg) {
  if (algo == Algorithm::CandHeuristic || algo == Algorithm::CandForest)
    return decode_trace(trace, cfg).learned;
  const auto flags = algorithm_full_flags(algo, trace, cfg);
  MessageDefinition msg = definitions_from_cuts(
      trace, flags,
      "ID" + hex_id(trace.arbitration_id, trace.extended_id));
  // constant runs are not signals
  const auto constant = trace.constant_mask();
  std::vector<SignalDefinition> kept;
  for (SignalDefinition& def : msg.signals) {
    bool all_const = true;
    for (int i : def.spec().bit_indices)
      if (!constant[i]) all_const = false;
    if (!all_const) kept.push_back(std::move(def));
  }
  msg.signals = std::move(kept);
  return msg;
}

}  // namespace detail

struct EvalCell {
  Algorithm algorithm;
  Regime regime;
  BinaryCounts counts;
  BinaryMetrics metrics;
};

struct EvalL1Row {
  Algorithm algorithm;
  double raw_sum = 0.0;
  std::size_t denom = 0;
  double mean_error = 0.0;
};

struct EvalResult {
  std::vector<EvalCell> boundary;
  std::vector<EvalL1Row> l1;
};

/// Boundary metrics per regime per algorithm, and the translated-signal
/// error, against one log's ground truth.
inline EvalResult evaluate_algorithms(const CanLog& log,
                                      const std::vector<MessageDefinition>& truth,
                                      const std::vector<Algorithm>& algorithms,
                                      const std::vector<Regime>& regimes,
                                      const RunConfig& cfg) {
  EvalResult result;
  const auto traces = partition_traces(log);
  for (Algorithm algo : algorithms) {
    std::map<Regime, BinaryCounts> counts;
    double raw_sum = 0.0;
    std::size_t denom = 0;
    for (const MessageDefinition& msg : truth) {
      const auto it = traces.find(msg.arbitration_id);
      if (it == traces.end() || it->second.size() < 2) continue;
      const IdTrace& trace = it->second;
      const MessageDefinition trimmed = trim_to_log(msg, trace);
      for (Regime regime : regimes) {
        if (regime == Regime::Condensed) {
          const CondensedTrace ct = condense(trace, Endianness::Big);
          const auto gaps = detail::algorithm_condensed_flags(algo, ct, cfg);
          score_condensed(ct, trimmed, gaps, counts[regime]);
        } else {
          const auto flags = detail::algorithm_full_flags(algo, trace, cfg);
          score_full_trace(trace, trimmed, flags, regime, counts[regime]);
        }
      }
      const MessageDefinition predicted =
          detail::algorithm_definitions(algo, trace, cfg);
      const SignalErrorReport report = mean_l1_error(trimmed, predicted, trace);
      raw_sum += report.raw_sum;
      denom += report.true_count + report.unmatched_predictions;
    }
    for (Regime regime : regimes) {
      EvalCell cell;
      cell.algorithm = algo;
      cell.regime = regime;
      cell.counts = counts[regime];
      cell.metrics = boundary_metrics(cell.counts);
      result.boundary.push_back(cell);
    }
    EvalL1Row row;
    row.algorithm = algo;
    row.raw_sum = raw_sum;
    row.denom = denom;
    row.mean_error = denom ? raw_sum / static_cast<double>(denom) : 0.0;
    result.l1.push_back(row);
  }
  return result;
}

inline std::string eval_table_text(const EvalResult& result) {
  std::ostringstream ss;
  char buf[160];
  ss << "boundary classification (P/R/F by regime)\n";
  std::snprintf(buf, sizeof buf, "%-16s %4s %9s %9s %9s\n", "algorithm", "set",
                "P", "R", "F");
  ss << buf;
  for (const EvalCell& cell : result.boundary) {
    std::snprintf(buf, sizeof buf, "%-16s %4s %9.3f %9.3f %9.3f\n",
                  to_string(cell.algorithm), to_string(cell.regime),
                  cell.metrics.precision, cell.metrics.recall,
                  cell.metrics.f_score);
    ss << buf;
  }
  ss << "\nmean l1 signal error\n";
  std::snprintf(buf, sizeof buf, "%-16s %12s %8s %12s\n", "algorithm", "raw_sum",
                "pairs", "mean");
  ss << buf;
  for (const EvalL1Row& row : result.l1) {
    std::snprintf(buf, sizeof buf, "%-16s %12.4f %8zu %12.4f\n",
                  to_string(row.algorithm), row.raw_sum, row.denom,
                  row.mean_error);
    ss << buf;
  }
  return ss.str();
}

inline std::string eval_csv(const EvalResult& result) {
  std::ostringstream ss;
  ss << "kind,algorithm,set,precision,recall,f_score,tp,fp,fn,tn\n";
  for (const EvalCell& cell : result.boundary)
    ss << "boundary," << to_string(cell.algorithm) << ',' << to_string(cell.regime)
       << ',' << detail::fmt(cell.metrics.precision) << ','
       << detail::fmt(cell.metrics.recall) << ',' << detail::fmt(cell.metrics.f_score)
       << ',' << cell.counts.tp << ',' << cell.counts.fp << ',' << cell.counts.fn
       << ',' << cell.counts.tn << '\n';
  ss << "kind,algorithm,raw_sum,pairs,mean_error\n";
  for (const EvalL1Row& row : result.l1)
    ss << "l1," << to_string(row.algorithm) << ',' << detail::fmt(row.raw_sum)
       << ',' << row.denom << ',' << detail::fmt(row.mean_error) << '\n';
  return ss.str();
}

}  // namespace cand
