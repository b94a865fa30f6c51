#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/dbc.hpp"
#include "cand/errors.hpp"
#include "cand/ingest.hpp"
#include "cand/interpret.hpp"
#include "cand/rng.hpp"

namespace cand {

/// Physical-value generator attached to one signal.
struct GeneratorSpec {
  enum class Kind { Counter, Ramp, Sine, Walk, Categorical, Constant };
  Kind kind = Kind::Constant;
  // counter: p1=start(raw) p2=step(raw)
  // ramp:    p1=min p2=max p3=period_s
  // sine:    p1=center p2=amplitude p3=period_s p4=phase_rad
  // walk:    p1=start p2=step p3=min p4=max
  // categorical: p1=p_change, values=set
  // constant: p1=value
  double p1 = 0.0, p2 = 0.0, p3 = 1.0, p4 = 0.0;
  std::vector<double> values;
  std::uint64_t seed = 0;
};

/// A diagnostic trace derived from one signal: D(t) = a * s_phys(t) + b,
/// sampled at its own (lower) rate, with optional gaussian noise.
struct DidGenSpec {
  std::string message;
  std::string signal;
  std::string label;
  std::string unit;
  double a = 1.0;
  double b = 0.0;
  double rate_hz = 1.0;
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

struct CorpusRecipe {
  std::vector<MessageDefinition> definitions;
  // keyed by (message_name, signal_name)
  std::map<std::pair<std::string, std::string>, GeneratorSpec> generators;
  std::map<std::string, double> rates_hz;  // by message name
  double duration_s = 100.0;
  std::vector<DidGenSpec> dids;
};

struct SynthOutput {
  CanLog log;
  std::vector<MessageDefinition> truth;
  std::vector<DidTrace> did_traces;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  SplitMix64 m(a ^ (b + 0x9E3779B97F4A7C15ULL + (a << 6) + (a >> 2)));
  return m.next_u64();
}

inline double gaussian(SplitMix64& rng) {
  // Box-Muller; one value per call keeps the stream layout simple
  double u1 = rng.next_double();
  const double u2 = rng.next_double();
  if (u1 <= 0.0) u1 = 0x1.0p-53;
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace detail

/// Physical values of one generator over the given frame times.
/// Counters run in the raw domain and wrap at the signal's width.
inline std::vector<double> generate_series(const GeneratorSpec& gen,
                                           const SignalDefinition& def,
                                           const std::vector<double>& times,
                                           std::uint64_t global_seed) {
  std::vector<double> out;
  out.reserve(times.size());
  SplitMix64 rng(detail::mix_seed(global_seed, gen.seed));
  const double t0 = times.empty() ? 0.0 : times.front();
  switch (gen.kind) {
    case GeneratorSpec::Kind::Counter: {
      const double wrap = std::ldexp(1.0, def.length);
      double raw = std::fmod(gen.p1, wrap);
      for (std::size_t k = 0; k < times.size(); ++k) {
        out.push_back(def.scale * raw + def.offset);
        raw = std::fmod(raw + gen.p2, wrap);
      }
      break;
    }
    case GeneratorSpec::Kind::Ramp: {
      const double span = gen.p2 - gen.p1;
      for (const double t : times) {
        const double phase = (t - t0) / gen.p3;
        out.push_back(gen.p1 + span * (phase - std::floor(phase)));
      }
      break;
    }
    case GeneratorSpec::Kind::Sine: {
      for (const double t : times)
        out.push_back(gen.p1 +
                      gen.p2 * std::sin(2.0 * std::numbers::pi * (t - t0) / gen.p3 +
                                        gen.p4));
      break;
    }
    case GeneratorSpec::Kind::Walk: {
      double v = gen.p1;
      for (std::size_t k = 0; k < times.size(); ++k) {
        out.push_back(v);
        v += gen.p2 * (2.0 * rng.next_double() - 1.0);
        v = std::clamp(v, gen.p3, gen.p4);
      }
      break;
    }
    case GeneratorSpec::Kind::Categorical: {
      if (gen.values.empty())
        throw ValidationError("categorical generator without values");
      std::size_t idx = 0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        if (k == 0 || rng.next_double() < gen.p1)
          idx = static_cast<std::size_t>(rng.next_below(gen.values.size()));
        out.push_back(gen.values[idx]);
      }
      break;
    }
    case GeneratorSpec::Kind::Constant: {
      out.assign(times.size(), gen.p1);
      break;
    }
  }
  return out;
}

namespace detail {

inline std::uint64_t physical_to_raw(double physical,
                                     const SignalDefinition& def,
                                     const std::string& context) {
  const double raw_d = (physical - def.offset) / def.scale;
  const long long raw = std::llround(raw_d);
  double lo, hi;
  raw_range(def, lo, hi);
  if (static_cast<double>(raw) < lo || static_cast<double>(raw) > hi)
    throw ValidationError("generator for " + context + " produced raw value " +
                          std::to_string(raw) + " outside [" +
                          std::to_string(lo) + ", " + std::to_string(hi) + "]");
  return number_to_raw(raw, def.length);
}

inline void pack_raw(PayloadBits& payload, const SignalSpec& spec,
                     std::uint64_t raw) {
  const int L = spec.length();
  for (int k = 0; k < L; ++k) {
    const int bit_value = static_cast<int>(raw >> (L - 1 - k) & 1u);
    payload = with_payload_bit(payload, spec.bit_indices[k], bit_value);
  }
}

}  // namespace detail

/// Deterministic corpus generation: fixed per-ID frame periods with a
/// seeded +-1% timestamp jitter, signals packed exactly as translate reads
/// them, DID traces sampled from the same physical series.
inline SynthOutput generate_corpus(const CorpusRecipe& recipe,
                                   std::uint64_t seed) {
  SynthOutput out;
  out.truth = recipe.definitions;
  struct SeriesKey {
    std::vector<double> times;
    std::vector<double> physical;
  };
  std::map<std::pair<std::string, std::string>, SeriesKey> physical_series;

  for (const MessageDefinition& msg : recipe.definitions) {
    validate_message(msg);
    const auto rate_it = recipe.rates_hz.find(msg.message_name);
    const double rate = rate_it != recipe.rates_hz.end() ? rate_it->second : 10.0;
    if (rate <= 0.0) throw ValidationError("rate must be positive");
    const double period = 1.0 / rate;
    const auto n_frames = static_cast<std::size_t>(recipe.duration_s * rate);

    SplitMix64 jitter_rng(detail::mix_seed(seed, msg.arbitration_id));
    const double phase = jitter_rng.next_double() * period;
    std::vector<double> times(n_frames);
    for (std::size_t k = 0; k < n_frames; ++k)
      times[k] = phase + static_cast<double>(k) * period +
                 period * 0.01 * (2.0 * jitter_rng.next_double() - 1.0);

    std::vector<PayloadBits> payloads(n_frames, 0);
    for (const SignalDefinition& def : msg.signals) {
      const auto gen_it =
          recipe.generators.find({msg.message_name, def.name});
      if (gen_it == recipe.generators.end())
        throw ValidationError("no generator for signal " + msg.message_name +
                              "." + def.name);
      const auto series = generate_series(gen_it->second, def, times, seed);
      const SignalSpec spec = def.spec();
      for (std::size_t k = 0; k < n_frames; ++k) {
        const std::uint64_t raw = detail::physical_to_raw(
            series[k], def, msg.message_name + "." + def.name);
        detail::pack_raw(payloads[k], spec, raw);
      }
      physical_series[{msg.message_name, def.name}] = {times, series};
    }
    for (std::size_t k = 0; k < n_frames; ++k) {
      CanFrame f;
      f.timestamp = times[k];
      f.arbitration_id = msg.arbitration_id;
      f.extended_id = msg.extended_id;
      f.payload = payloads[k];
      f.original_length = msg.dlc;
      out.log.frames.push_back(f);
    }
  }
  std::stable_sort(out.log.frames.begin(), out.log.frames.end(),
                   [](const CanFrame& a, const CanFrame& b) {
                     return a.timestamp < b.timestamp;
                   });
  out.log.data_lines = out.log.frames.size();
  out.log.source_name = "synthetic";

  for (const DidGenSpec& ds : recipe.dids) {
    const auto key = std::make_pair(ds.message, ds.signal);
    const auto it = physical_series.find(key);
    if (it == physical_series.end())
      throw ValidationError("DID references unknown signal " + ds.message +
                            "." + ds.signal);
    const auto& src = it->second;
    if (src.times.size() < 2) throw ValidationError("source signal too short");
    SplitMix64 rng(detail::mix_seed(seed ^ 0xD1DD1DD1ULL, ds.seed));
    DidTrace trace;
    trace.label = ds.label;
    trace.unit = ds.unit;
    const double t_begin = src.times.front();
    const double t_end = src.times.back();
    const double step = 1.0 / ds.rate_hz;
    for (double t = t_begin + step * 0.5; t < t_end; t += step) {
      // linear interpolation of the physical series at t
      const auto hi_it =
          std::upper_bound(src.times.begin(), src.times.end(), t);
      const std::size_t hi = static_cast<std::size_t>(hi_it - src.times.begin());
      const std::size_t lo = hi == 0 ? 0 : hi - 1;
      double v;
      if (hi == 0)
        v = src.physical.front();
      else if (hi >= src.times.size())
        v = src.physical.back();
      else {
        const double dt = src.times[hi] - src.times[lo];
        const double w = dt > 0.0 ? (t - src.times[lo]) / dt : 1.0;
        v = src.physical[lo] + w * (src.physical[hi] - src.physical[lo]);
      }
      trace.timestamps.push_back(t);
      trace.values.push_back(ds.a * v + ds.b +
                             (ds.sigma > 0.0 ? ds.sigma * detail::gaussian(rng)
                                             : 0.0));
    }
    out.did_traces.push_back(std::move(trace));
  }
  return out;
}

/// Recipe text: the DBC subset plus generator, rate, duration, and DID
/// lines. Generator grammar, one per signal:
///   GEN_ <msg> <signal> counter <start> <step> <seed>
///   GEN_ <msg> <signal> ramp <min> <max> <period_s> <seed>
///   GEN_ <msg> <signal> sine <center> <amplitude> <period_s> <phase> <seed>
///   GEN_ <msg> <signal> walk <start> <step> <min> <max> <seed>
///   GEN_ <msg> <signal> categorical <p_change> <v1,v2,...> <seed>
///   GEN_ <msg> <signal> constant <value> <seed>
///   RATE_ <msg> <hz>
///   DURATION_ <seconds>
///   DID_ <msg> <signal> <label> <unit> <a> <b> <rate_hz> <sigma> <seed>
inline CorpusRecipe parse_recipe(std::istream& in) {
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CorpusRecipe recipe;
  {
    std::istringstream dbc_in(text);
    recipe.definitions = read_dbc(dbc_in);
  }
  std::map<std::string, const MessageDefinition*> by_name;
  for (const MessageDefinition& m : recipe.definitions)
    by_name[m.message_name] = &m;
  const auto find_signal = [&](const std::string& msg, const std::string& sig,
                               std::size_t lineno) {
    const auto it = by_name.find(msg);
    if (it == by_name.end())
      throw ParseError("unknown message " + msg, lineno);
    for (const SignalDefinition& d : it->second->signals)
      if (d.name == sig) return;
    throw ParseError("unknown signal " + msg + "." + sig, lineno);
  };

  std::istringstream lines(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag)) continue;
    if (tag == "GEN_") {
      std::string msg, sig, kind;
      if (!(ss >> msg >> sig >> kind))
        throw ParseError("malformed GEN_ line", lineno);
      find_signal(msg, sig, lineno);
      GeneratorSpec gen;
      bool ok = true;
      if (kind == "counter") {
        gen.kind = GeneratorSpec::Kind::Counter;
        ok = bool(ss >> gen.p1 >> gen.p2 >> gen.seed);
      } else if (kind == "ramp") {
        gen.kind = GeneratorSpec::Kind::Ramp;
        ok = bool(ss >> gen.p1 >> gen.p2 >> gen.p3 >> gen.seed);
      } else if (kind == "sine") {
        gen.kind = GeneratorSpec::Kind::Sine;
        ok = bool(ss >> gen.p1 >> gen.p2 >> gen.p3 >> gen.p4 >> gen.seed);
      } else if (kind == "walk") {
        gen.kind = GeneratorSpec::Kind::Walk;
        ok = bool(ss >> gen.p1 >> gen.p2 >> gen.p3 >> gen.p4 >> gen.seed);
      } else if (kind == "categorical") {
        gen.kind = GeneratorSpec::Kind::Categorical;
        std::string values;
        ok = bool(ss >> gen.p1 >> values >> gen.seed);
        if (ok) {
          std::istringstream vs(values);
          std::string tok;
          while (std::getline(vs, tok, ','))
            gen.values.push_back(std::stod(tok));
          ok = !gen.values.empty();
        }
      } else if (kind == "constant") {
        gen.kind = GeneratorSpec::Kind::Constant;
        ok = bool(ss >> gen.p1 >> gen.seed);
      } else {
        throw ParseError("unknown generator kind " + kind, lineno);
      }
      if (!ok) throw ParseError("malformed GEN_ parameters", lineno);
      recipe.generators[{msg, sig}] = std::move(gen);
    } else if (tag == "RATE_") {
      std::string msg;
      double hz = 0.0;
      if (!(ss >> msg >> hz) || hz <= 0.0)
        throw ParseError("malformed RATE_ line", lineno);
      recipe.rates_hz[msg] = hz;
    } else if (tag == "DURATION_") {
      if (!(ss >> recipe.duration_s) || recipe.duration_s <= 0.0)
        throw ParseError("malformed DURATION_ line", lineno);
    } else if (tag == "DID_") {
      DidGenSpec ds;
      if (!(ss >> ds.message >> ds.signal >> ds.label >> ds.unit >> ds.a >>
            ds.b >> ds.rate_hz >> ds.sigma >> ds.seed) ||
          ds.rate_hz <= 0.0)
        throw ParseError("malformed DID_ line", lineno);
      find_signal(ds.message, ds.signal, lineno);
      recipe.dids.push_back(std::move(ds));
    }
  }
  for (const MessageDefinition& m : recipe.definitions)
    for (const SignalDefinition& d : m.signals)
      if (!recipe.generators.count({m.message_name, d.name}))
        throw ParseError("no GEN_ line for signal " + m.message_name + "." +
                         d.name);
  return recipe;
}

const char* default_recipe_text();

}  // namespace cand

#include "cand/synth_default_recipe.hpp"
