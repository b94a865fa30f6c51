// Acceptance suite: one pass/fail line per criterion. Exit code is the
// number of failing criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cand/pipeline.hpp"
#include "cand/synth.hpp"
#include "gen_dbc.hpp"
#include "oracle_endian.hpp"
#include "test_util.hpp"

using namespace cand;

namespace {

struct Criterion {
  std::string name;
  bool pass = false;
  std::string note;
};

std::vector<Criterion> g_results;

void record(const std::string& name, bool pass, const std::string& note = "") {
  g_results.push_back({name, pass, note});
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
      .count();
}

SynthOutput default_corpus(std::uint64_t seed) {
  std::istringstream in(default_recipe_text());
  return generate_corpus(parse_recipe(in), seed);
}

// --- 1: configuration enumeration -------------------------------------------

void criterion_enumeration() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& configs = enumerate_valid_configs();
  const double elapsed = seconds_since(t0);
  bool pass = configs.size() == 577;
  // 577 * 2^56 written out exactly
  unsigned __int128 total = 577;
  total <<= 56;
  std::string digits;
  for (unsigned __int128 v = total; v > 0; v /= 10)
    digits.insert(digits.begin(), static_cast<char>('0' + int(v % 10)));
  pass = pass && digits == "41577231759884419072";
  pass = pass && elapsed < 1.0;
  std::set<int> keys;
  for (const auto& c : configs) keys.insert(c.key());
  pass = pass && keys.size() == 577;
  record("1 enumeration: 577 configs, 577*2^56 tokenizations", pass,
         "count=" + std::to_string(configs.size()) + " total=" + digits);
}

// --- 2: optimizer equals exhaustive brute force ------------------------------

void criterion_optimizer_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(1001);
  std::size_t checked = 0, failures = 0;
  for (int nbytes : {2, 3}) {
    for (int draw = 0; draw < 100; ++draw) {
      const BoundaryProbabilities f =
          cand::test::random_probabilities(nbytes, rng);
      for (double beta : {0.3, 0.6, 0.9}) {
        const Tokenization tok = optimize(f, beta);
        const double oracle = cand::test::oracle_min_cost(f, beta);
        ++checked;
        if (tok.cost != oracle) ++failures;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  record("2 optimizer oracle equivalence on 2/3-byte payloads",
         failures == 0 && elapsed < 120.0,
         std::to_string(checked) + " instances, " +
             std::to_string(failures) + " mismatches, " +
             std::to_string(elapsed) + "s");
}

// --- 3: per-bit thresholding local optimality --------------------------------

void criterion_theorem_local_optimality() {
  const auto t0 = std::chrono::steady_clock::now();
  SplitMix64 rng(2002);
  const auto& configs = enumerate_valid_configs();
  std::size_t violations = 0;
  std::size_t comparisons = 0;
  const double beta = 0.6;
  for (int draw = 0; draw < 1000; ++draw) {
    const BoundaryProbabilities f = cand::test::random_probabilities(8, rng);
    for (const ByteBoundaryConfig& cfg : configs) {
      const auto thresholded =
          cand::test::config_cost_thresholded(cfg, f, beta);
      if (!thresholded) continue;
      // table of [join, cut] contributions per interior bit, in the same
      // ascending order the thresholded cost uses
      const auto forced = forced_endianness(cfg);
      double boundary = 0.0;
      for (int j = 0; j < 8; ++j) {
        const int bit = 8 * j + 7;
        switch (cfg.v[j]) {
          case BoundaryChoice::Cut: boundary += beta; break;
          case BoundaryChoice::JoinBig: boundary += f.big.value[bit]; break;
          case BoundaryChoice::JoinLittle: boundary += f.little.value[bit]; break;
        }
      }
      double table[56][2];
      std::uint64_t mandatory_mask = 0;
      int k = 0;
      for (int i = 0; i < kPayloadBits; ++i) {
        if ((i & 7) == 7) continue;
        const auto& lane =
            f.lane(forced[byte_of_bit(i)] == ByteOrderConstraint::Little
                       ? Endianness::Little
                       : Endianness::Big);
        table[k][0] = lane.value[i];
        table[k][1] = beta;
        if (lane.mandatory[i]) mandatory_mask |= std::uint64_t{1} << k;
        ++k;
      }
      for (int alt = 0; alt < 1000; ++alt) {
        const std::uint64_t pattern = rng.next_u64() | mandatory_mask;
        double cost = boundary;
        for (int b = 0; b < 56; ++b)
          cost += table[b][(pattern >> b) & 1];
        ++comparisons;
        if (*thresholded > cost) ++violations;
      }
    }
  }
  const double elapsed = seconds_since(t0);
  record("3 thresholded pattern is locally optimal in every config",
         violations == 0 && elapsed < 300.0,
         std::to_string(comparisons) + " comparisons, " +
             std::to_string(violations) + " violations, " +
             std::to_string(elapsed) + "s");
}

// --- 4: end-to-end recovery on the shipped corpus ----------------------------

struct CorpusDecode {
  SynthOutput corpus;
  std::map<std::uint32_t, IdTrace> traces;
  std::map<std::uint32_t, DecodedId> decoded;
  std::map<std::uint32_t, MessageDefinition> trimmed;
};

CorpusDecode decode_default_corpus(std::uint64_t seed) {
  CorpusDecode out;
  out.corpus = default_corpus(seed);
  out.traces = partition_traces(out.corpus.log);
  RunConfig cfg;
  for (const auto& [id, trace] : out.traces)
    out.decoded.emplace(id, decode_trace(trace, cfg));
  for (const MessageDefinition& truth : out.corpus.truth)
    out.trimmed.emplace(truth.arbitration_id,
                        trim_to_log(truth, out.traces.at(truth.arbitration_id)));
  return out;
}

void criterion_end_to_end(const CorpusDecode& cd) {
  // boundary F on the nonobvious set with the heuristic classifier
  RunConfig cfg;
  BinaryCounts counts;
  for (const auto& [id, trace] : cd.traces) {
    const auto flags = classifier_cut_flags(trace, cfg.classifier());
    score_full_trace(trace, cd.trimmed.at(id), flags, Regime::FullNonobvious,
                     counts);
  }
  const BinaryMetrics metrics = boundary_metrics(counts);

  // endianness: every multi-byte trimmed truth signal whose bytes are all
  // exercised must land in a container with the same byte order
  std::size_t endian_total = 0, endian_ok = 0;
  std::size_t sign_total = 0, sign_ok = 0;
  for (const auto& [id, trimmed] : cd.trimmed) {
    const IdTrace& trace = cd.traces.at(id);
    const auto constant = trace.constant_mask();
    const DecodedId& dec = cd.decoded.at(id);
    for (const SignalDefinition& truth_sig : trimmed.signals) {
      const SignalSpec spec = truth_sig.spec();
      // locate the decoded signal containing the truth MSB
      const SignalDefinition* container = nullptr;
      for (const SignalDefinition& cand_sig : dec.learned.signals) {
        const SignalSpec cspec = cand_sig.spec();
        for (int i : cspec.bit_indices)
          if (i == spec.msb()) container = &cand_sig;
      }
      if (spec.multi_byte()) {
        std::set<int> bytes;
        bool all_exercised = true;
        for (int i : spec.bit_indices) bytes.insert(byte_of_bit(i));
        for (int b : bytes) {
          bool any = false;
          for (int i : spec.bit_indices)
            if (byte_of_bit(i) == b && !constant[i]) any = true;
          all_exercised = all_exercised && any;
        }
        if (all_exercised) {
          ++endian_total;
          if (container && container->endianness == truth_sig.endianness &&
              container->spec().multi_byte())
            ++endian_ok;
        }
      }
      if (truth_sig.is_signed) {
        // signals crossing zero: the MSB flips by construction of the corpus
        ++sign_total;
        if (container && container->is_signed) ++sign_ok;
      }
    }
  }
  const double sign_acc =
      sign_total ? double(sign_ok) / double(sign_total) : 1.0;
  const bool pass = metrics.f_score >= 0.90 && endian_ok == endian_total &&
                    sign_acc >= 0.97;
  char note[160];
  std::snprintf(note, sizeof note,
                "f- F=%.3f (P=%.3f R=%.3f), endianness %zu/%zu, signedness "
                "%.3f (%zu/%zu)",
                metrics.f_score, metrics.precision, metrics.recall, endian_ok,
                endian_total, sign_acc, sign_ok, sign_total);
  record("4 end-to-end recovery on the shipped corpus", pass, note);
}

// --- 5: translated-signal error bounds ----------------------------------------

void criterion_l1(const CorpusDecode& cd) {
  bool self_zero = true;
  double raw_sum = 0.0;
  std::size_t denom = 0;
  for (const auto& [id, trimmed] : cd.trimmed) {
    const IdTrace& trace = cd.traces.at(id);
    if (mean_l1_error(trimmed, trimmed, trace).mean_error != 0.0)
      self_zero = false;
    const SignalErrorReport r =
        mean_l1_error(trimmed, cd.decoded.at(id).learned, trace);
    raw_sum += r.raw_sum;
    denom += r.true_count + r.unmatched_predictions;
  }
  const double decode_error = denom ? raw_sum / double(denom) : 0.0;
  const bool pass = self_zero && decode_error <= 0.05;
  char note[96];
  std::snprintf(note, sizeof note, "self-error zero=%s, decode error=%.4f",
                self_zero ? "yes" : "no", decode_error);
  record("5 mean l1 error: zero on self, <= 0.05 for decode", pass, note);
}

// --- 6: interpretation exactness ---------------------------------------------

void criterion_interpretation() {
  SignalTimeSeries s;
  for (int k = 0; k < 2000; ++k) {
    s.timestamps.push_back(0.05 * k);
    s.values.push_back(double((11 * k) % 4096));
  }
  DidTrace did;
  did.label = "D";
  did.unit = "u";
  for (int k = 10; k < 1990; k += 9)
    did.timestamps.push_back(0.05 * k + 0.021);
  did.values = interpolate_at(s, did.timestamps);
  const double a = 0.125, b = -17.5;
  for (double& v : did.values) v = a * v + b;

  bool pass = true;
  const auto m = match_signals({s}, {did}, MatchOptions{0.5, false});
  pass = pass && m[0].has_value();
  if (m[0]) {
    pass = pass && std::abs(m[0]->scale - a) <= 1e-6 * std::abs(a);
    pass = pass && std::abs(m[0]->offset - b) <= 1e-6 * std::abs(b);
    pass = pass && m[0]->r_squared >= 1.0 - 1e-9;
  }
  // delta semantics: the exact pair survives delta = 1, a noisy one does not
  const auto exact_at_one = match_signals({s}, {did}, MatchOptions{1.0, false});
  pass = pass && exact_at_one[0].has_value();
  DidTrace noisy = did;
  SplitMix64 rng(6);
  for (double& v : noisy.values) v += rng.next_double() - 0.5;
  const auto noisy_at_one =
      match_signals({s}, {noisy}, MatchOptions{1.0, false});
  pass = pass && !noisy_at_one[0].has_value();
  const auto noisy_at_half =
      match_signals({s}, {noisy}, MatchOptions{0.5, false});
  pass = pass && noisy_at_half[0].has_value();
  record("6 interpretation recovers exact affine maps", pass);
}

// --- 7: translation bijectivity ----------------------------------------------

void criterion_translation() {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = true;
  for (int L = 1; L <= 12 && pass; ++L) {
    for (Endianness e : {Endianness::Big, Endianness::Little}) {
      // choose a placement that crosses a byte boundary when possible
      const int msb = e == Endianness::Big ? 4 : 12;
      SignalSpec spec;
      try {
        spec = make_spec(msb, L, e);
      } catch (const ValidationError&) {
        spec = make_spec(0, L, Endianness::Big);
      }
      for (int is_signed = 0; is_signed < 2; ++is_signed) {
        if (is_signed && L <= 2) continue;
        for (std::uint64_t raw = 0; raw < (std::uint64_t{1} << L); ++raw) {
          PayloadBits p = 0;
          for (int b = 0; b < L; ++b)
            p = with_payload_bit(p, spec.bit_indices[b],
                                 int(raw >> (L - 1 - b) & 1));
          if (translate_frame_raw(p, spec) != raw) pass = false;
          const double num = raw_to_number(raw, L, is_signed != 0);
          if (number_to_raw(static_cast<long long>(num), L) != raw)
            pass = false;
        }
      }
    }
  }
  const double elapsed = seconds_since(t0);
  record("7 translation bijective for all widths to 12", pass && elapsed < 10.0,
         std::to_string(elapsed) + "s");
}

// --- 8: format round trips -----------------------------------------------------

void criterion_round_trips(const CorpusDecode& cd) {
  bool pass = true;
  SplitMix64 rng(8088);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<MessageDefinition> defs;
    const int messages = 1 + int(rng.next_below(3));
    for (int m = 0; m < messages; ++m)
      defs.push_back(cand::test::random_message(rng));
    for (std::size_t m = 1; m < defs.size(); ++m) {
      defs[m].arbitration_id =
          defs[0].arbitration_id + static_cast<std::uint32_t>(m) + 1;
      defs[m].message_name = "MSG_" + std::to_string(defs[m].arbitration_id);
    }
    if (read_dbc_text(write_dbc(defs, "acceptance")) != defs) pass = false;
  }
  // candump round trip over the corpus
  std::ostringstream first;
  serialize_candump(cd.corpus.log, first);
  std::istringstream back_in(first.str());
  const CanLog back = parse_candump(back_in);
  std::ostringstream second;
  serialize_candump(back, second);
  pass = pass && back.frames.size() == cd.corpus.log.frames.size();
  pass = pass && first.str() == second.str();
  record("8 DBC and candump round trips", pass);
}

// --- 9: baseline sanity ---------------------------------------------------------

void criterion_baselines(const CorpusDecode& cd) {
  bool pass = true;
  // READ finds the exact MSB edge of a unit counter
  {
    IdTrace t = cand::test::counter_trace(8, 8, 4 * 256);
    for (std::size_t r = 0; r < t.rows.size(); ++r)
      t.rows[r] = with_payload_bit(t.rows[r], 7, int(r & 1));
    const BoundaryPrediction pred = read_boundaries(t);
    pass = pass && pred.cut_after[7];
    for (int i = 8; i < 15; ++i) pass = pass && !pred.cut_after[i];
  }
  // the constant baseline scores F = 0 on the nonobvious set
  {
    BinaryCounts counts;
    bool any_positive = false;
    for (const auto& [id, trimmed] : cd.trimmed) {
      const IdTrace& trace = cd.traces.at(id);
      const auto flags = baseline_constant(trace).cut_after;
      const auto before = counts;
      score_full_trace(trace, trimmed, flags, Regime::FullNonobvious, counts);
      (void)before;
    }
    any_positive = counts.tp + counts.fn > 0;
    const BinaryMetrics m = boundary_metrics(counts);
    pass = pass && any_positive && m.f_score == 0.0;
  }
  record("9 baseline sanity: READ counter edge, constant baseline F=0", pass);
}

// --- 10: decode determinism ------------------------------------------------------

void criterion_determinism(const CorpusDecode& cd) {
  namespace fs = std::filesystem;
  RunConfig cfg;
  cfg.seed = 42;
  const fs::path dir = fs::temp_directory_path() / "cand_acceptance";
  fs::create_directories(dir);
  std::array<std::string, 2> dbc, report;
  for (int run = 0; run < 2; ++run) {
    const DecodeResult result =
        decode_log(cd.corpus.log, cfg, cd.corpus.did_traces);
    std::ostringstream d;
    write_dbc(result.messages, d, config_header(cfg, "decode"));
    dbc[run] = d.str();
    report[run] = decode_report(result, cfg);
    std::ofstream((dir / ("run" + std::to_string(run) + ".dbc")).string())
        << dbc[run];
    std::ofstream((dir / ("run" + std::to_string(run) + ".report.txt")).string())
        << report[run];
  }
  const auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  };
  const bool pass = slurp(dir / "run0.dbc") == slurp(dir / "run1.dbc") &&
                    slurp(dir / "run0.report.txt") ==
                        slurp(dir / "run1.report.txt") &&
                    !dbc[0].empty() && dbc[0] == dbc[1] && report[0] == report[1];
  fs::remove_all(dir);
  record("10 decode output is byte-identical across runs", pass);
}

}  // namespace

int main() {
  criterion_enumeration();
  criterion_optimizer_oracle();
  criterion_theorem_local_optimality();
  const CorpusDecode cd = decode_default_corpus(42);
  criterion_end_to_end(cd);
  criterion_l1(cd);
  criterion_interpretation();
  criterion_translation();
  criterion_round_trips(cd);
  criterion_baselines(cd);
  criterion_determinism(cd);

  int failures = 0;
  for (const Criterion& c : g_results) {
    std::printf("[%s] %s%s%s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(),
                c.note.empty() ? "" : " -- ", c.note.c_str());
    failures += c.pass ? 0 : 1;
  }
  std::printf("%zu/%zu criteria passed\n", g_results.size() - failures,
              g_results.size());
  return failures;
}
