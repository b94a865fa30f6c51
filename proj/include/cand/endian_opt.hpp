#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <tuple>
#include <vector>

#include "cand/boundary.hpp"
#include "cand/can_model.hpp"
#include "cand/errors.hpp"

namespace cand {

/// What happens at byte boundary j (after bit 8j+7): a cut, a big endian
/// join into byte j+1, or a little endian join into byte j-1.
enum class BoundaryChoice : std::uint8_t { Cut = 0, JoinBig = 1, JoinLittle = 2 };

struct ByteBoundaryConfig {
  std::array<BoundaryChoice, kPayloadBytes> v{};

  /// Base-3 encoding; the deterministic final tie-break key.
  int key() const {
    int k = 0;
    for (int j = kPayloadBytes - 1; j >= 0; --j)
      k = k * 3 + static_cast<int>(v[j]);
    return k;
  }

  bool valid() const {
    if (v[0] == BoundaryChoice::JoinLittle) return false;
    if (v[7] == BoundaryChoice::JoinBig) return false;
    for (int j = 0; j < kPayloadBytes; ++j) {
      if (v[j] != BoundaryChoice::JoinBig) continue;
      if (j + 1 < kPayloadBytes && v[j + 1] == BoundaryChoice::JoinLittle)
        return false;
      if (j + 2 < kPayloadBytes && v[j + 2] == BoundaryChoice::JoinLittle)
        return false;
    }
    return true;
  }

  friend bool operator==(const ByteBoundaryConfig&, const ByteBoundaryConfig&) = default;
};

/// All valid byte-boundary configurations; exactly 577 of them.
inline const std::vector<ByteBoundaryConfig>& enumerate_valid_configs() {
  static const std::vector<ByteBoundaryConfig> configs = [] {
    std::vector<ByteBoundaryConfig> out;
    for (int code = 0; code < 6561; ++code) {  // 3^8 raw assignments
      ByteBoundaryConfig c;
      int rest = code;
      for (int j = 0; j < kPayloadBytes; ++j) {
        c.v[j] = static_cast<BoundaryChoice>(rest % 3);
        rest /= 3;
      }
      if (c.valid()) out.push_back(c);
    }
    return out;
  }();
  return configs;
}

enum class ByteOrderConstraint : std::uint8_t { Free, Big, Little };

/// Byte orders implied by the joins of a valid configuration. Joins touch
/// two bytes each; untouched bytes stay free.
inline std::array<ByteOrderConstraint, kPayloadBytes> forced_endianness(
    const ByteBoundaryConfig& cfg) {
  if (!cfg.valid()) throw ValidationError("invalid byte boundary configuration");
  std::array<ByteOrderConstraint, kPayloadBytes> out;
  out.fill(ByteOrderConstraint::Free);
  auto force = [&](int byte, ByteOrderConstraint c) {
    if (out[byte] != ByteOrderConstraint::Free && out[byte] != c)
      throw ValidationError("contradictory byte order");  // unreachable for valid v
    out[byte] = c;
  };
  for (int j = 0; j < kPayloadBytes; ++j) {
    if (cfg.v[j] == BoundaryChoice::JoinBig) {
      force(j, ByteOrderConstraint::Big);
      force(j + 1, ByteOrderConstraint::Big);
    } else if (cfg.v[j] == BoundaryChoice::JoinLittle) {
      force(j - 1, ByteOrderConstraint::Little);
      force(j, ByteOrderConstraint::Little);
    }
  }
  return out;
}

/// A valid tokenization: signals partitioning the 64 bits plus the byte
/// orders they imply, and the cost it accrued.
struct Tokenization {
  std::vector<SignalSpec> signals;
  std::vector<Endianness> signal_endianness;  // parallel to signals
  std::array<Endianness, kPayloadBytes> byte_endianness{};
  double cost = 0.0;
  ByteBoundaryConfig config;

  std::size_t little_spanning_count() const {
    std::size_t c = 0;
    for (std::size_t k = 0; k < signals.size(); ++k)
      c += signals[k].multi_byte() &&
           signal_endianness[k] == Endianness::Little;
    return c;
  }
};

/// Join penalties of every non-LSB bit plus the cut penalty beta.
inline double signal_cost(const SignalSpec& spec, Endianness e,
                          const BoundaryProbabilities& f, double beta) {
  double cost = beta;
  for (std::size_t k = 0; k + 1 < spec.bit_indices.size(); ++k) {
    const int i = spec.bit_indices[k];
    const auto& lane = f.lane(e);
    if (lane.mandatory[i])
      throw ValidationError("signal joins across a mandatory cut at bit " +
                            std::to_string(i));
    cost += lane.value[i];
  }
  return cost;
}

namespace detail {

struct ConfigEvaluation {
  bool feasible = false;
  double cost = 0.0;
  std::array<bool, kPayloadBits> cut_after{};
  std::array<Endianness, kPayloadBytes> byte_e{};
};

/// Cost of the per-bit-optimal tokenization for one configuration. Free
/// bytes default to big endian. Interior bits cut iff their join penalty
/// strictly exceeds beta; mandatory positions cut at cost beta.
inline ConfigEvaluation evaluate_config(const ByteBoundaryConfig& cfg,
                                        const BoundaryProbabilities& f,
                                        double beta) {
  ConfigEvaluation ev;
  const auto forced = forced_endianness(cfg);
  for (int j = 0; j < kPayloadBytes; ++j)
    ev.byte_e[j] = forced[j] == ByteOrderConstraint::Little ? Endianness::Little
                                                            : Endianness::Big;
  double cost = 0.0;
  for (int j = 0; j < kPayloadBytes; ++j) {
    const int i = 8 * j + 7;
    switch (cfg.v[j]) {
      case BoundaryChoice::Cut:
        cost += beta;
        ev.cut_after[i] = true;
        break;
      case BoundaryChoice::JoinBig:
        if (f.big.mandatory[i]) return ev;  // infeasible
        cost += f.big.value[i];
        break;
      case BoundaryChoice::JoinLittle:
        if (f.little.mandatory[i]) return ev;  // infeasible
        cost += f.little.value[i];
        break;
    }
  }
  for (int i = 0; i < kPayloadBits; ++i) {
    if ((i & 7) == 7) continue;
    const auto& lane = f.lane(ev.byte_e[byte_of_bit(i)]);
    if (lane.mandatory[i] || lane.value[i] > beta) {
      cost += beta;
      ev.cut_after[i] = true;
    } else {
      cost += lane.value[i];
    }
  }
  ev.feasible = true;
  ev.cost = cost;
  return ev;
}

inline Tokenization assemble(const ByteBoundaryConfig& cfg,
                             const ConfigEvaluation& ev) {
  Tokenization tok;
  tok.cost = ev.cost;
  tok.config = cfg;
  tok.byte_endianness = ev.byte_e;

  std::array<int, kPayloadBits> next;
  next.fill(-1);
  std::array<bool, kPayloadBits> has_pred{};
  for (int i = 0; i < kPayloadBits; ++i) {
    if ((i & 7) != 7) {
      if (!ev.cut_after[i]) next[i] = i + 1;
    } else {
      const int j = byte_of_bit(i);
      if (cfg.v[j] == BoundaryChoice::JoinBig)
        next[i] = i + 1;
      else if (cfg.v[j] == BoundaryChoice::JoinLittle)
        next[i] = 8 * (j - 1);
    }
    if (next[i] >= 0) has_pred[next[i]] = true;
  }
  for (int start = 0; start < kPayloadBits; ++start) {
    if (has_pred[start]) continue;
    SignalSpec spec;
    bool little_join = false;
    for (int cur = start; cur >= 0; cur = next[cur]) {
      if (!spec.bit_indices.empty() &&
          byte_of_bit(spec.bit_indices.back()) > byte_of_bit(cur))
        little_join = true;
      spec.bit_indices.push_back(cur);
    }
    tok.signals.push_back(std::move(spec));
    tok.signal_endianness.push_back(little_join ? Endianness::Little
                                                : Endianness::Big);
  }
  return tok;
}

/// Def. 1 checks, run on every optimizer result.
inline void assert_valid(const Tokenization& tok) {
  std::array<int, kPayloadBits> owner;
  owner.fill(-1);
  for (std::size_t k = 0; k < tok.signals.size(); ++k) {
    const SignalSpec& s = tok.signals[k];
    if (!spec_valid_under(s, tok.signal_endianness[k]))
      throw ValidationError("tokenization produced an inconsistent signal");
    for (int i : s.bit_indices) {
      if (owner[i] >= 0) throw ValidationError("tokenization overlaps");
      owner[i] = static_cast<int>(k);
    }
  }
  for (int i = 0; i < kPayloadBits; ++i)
    if (owner[i] < 0) throw ValidationError("tokenization does not cover bit " +
                                            std::to_string(i));
  std::array<int, kPayloadBytes> claimed;
  claimed.fill(-1);
  for (std::size_t k = 0; k < tok.signals.size(); ++k) {
    if (!tok.signals[k].multi_byte()) continue;
    const int order = tok.signal_endianness[k] == Endianness::Big ? 0 : 1;
    for (int i : tok.signals[k].bit_indices) {
      int& slot = claimed[byte_of_bit(i)];
      if (slot == -1) slot = order;
      if (slot != order)
        throw ValidationError("byte order conflict in tokenization");
    }
  }
}

}  // namespace detail

/// Lexicographic preference among equal-cost tokenizations: most signals,
/// then fewest byte-spanning little endian signals, then lowest config key.
inline Tokenization tie_break(std::vector<Tokenization> candidates) {
  if (candidates.empty()) throw ValidationError("tie_break on empty candidate set");
  std::size_t best = 0;
  for (std::size_t k = 1; k < candidates.size(); ++k) {
    const auto& a = candidates[k];
    const auto& b = candidates[best];
    const auto rank = [](const Tokenization& t) {
      return std::tuple(-(long long)t.signals.size(),
                        (long long)t.little_spanning_count(),
                        (long long)t.config.key());
    };
    if (rank(a) < rank(b)) best = k;
  }
  return std::move(candidates[best]);
}

/// Grid search over the 577 configurations, per-bit thresholding inside
/// each, exact-cost tie collection, then the tie-break above.
inline Tokenization optimize(const BoundaryProbabilities& f, double beta = 0.6) {
  const auto& configs = enumerate_valid_configs();
  double best_cost = 0.0;
  bool found = false;
  std::vector<std::pair<const ByteBoundaryConfig*, detail::ConfigEvaluation>> ties;
  for (const ByteBoundaryConfig& cfg : configs) {
    const auto ev = detail::evaluate_config(cfg, f, beta);
    if (!ev.feasible) continue;
    if (!found || ev.cost < best_cost) {
      found = true;
      best_cost = ev.cost;
      ties.clear();
      ties.emplace_back(&cfg, ev);
    } else if (ev.cost == best_cost) {
      ties.emplace_back(&cfg, ev);
    }
  }
  if (!found) throw ValidationError("no feasible tokenization");  // unreachable: all-cut is feasible
  std::vector<Tokenization> candidates;
  candidates.reserve(ties.size());
  for (const auto& [cfg, ev] : ties) candidates.push_back(detail::assemble(*cfg, ev));
  Tokenization tok = tie_break(std::move(candidates));
  detail::assert_valid(tok);
  return tok;
}

}  // namespace cand
