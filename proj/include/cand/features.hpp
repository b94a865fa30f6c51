#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <optional>
#include <ostream>
#include <set>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/dbc.hpp"
#include "cand/errors.hpp"

namespace cand {

/// ID trace with constant bit columns removed and the remaining columns
/// re-ordered along one of the two bit orderings.
struct CondensedTrace {
  std::uint32_t source_id = 0;
  Endianness ordering = Endianness::Big;
  std::vector<int> kept_positions;        // original bit indices, sequence order
  std::vector<std::vector<std::uint8_t>> columns;  // one column per kept position
  std::size_t frame_count = 0;

  std::size_t width() const { return kept_positions.size(); }
};

/// The five bit-flip probabilities for a bit and its sequence neighbor.
struct LocalFeatures {
  double p_flip = 0.0;             // P(F_i)
  double p_fi_given_fnext = 0.0;   // P(F_i | F_{i+1})
  double p_fnext_given_fi = 0.0;   // P(F_{i+1} | F_i)
  double p_nfi_given_nfnext = 0.0; // P(!F_i | !F_{i+1})
  double p_nfnext_given_nfi = 0.0; // P(!F_{i+1} | !F_i)

  std::array<double, 5> as_array() const {
    return {p_flip, p_fi_given_fnext, p_fnext_given_fi, p_nfi_given_nfnext,
            p_nfnext_given_nfi};
  }
};

constexpr std::size_t kFeatureCount = 15;

/// Features for one gap decision: the local block for bit i, the local
/// block for bit i+1, and their componentwise difference.
struct FeatureVector {
  LocalFeatures self;
  LocalFeatures next;

  std::array<double, kFeatureCount> flatten() const {
    std::array<double, kFeatureCount> v{};
    const auto a = self.as_array();
    const auto b = next.as_array();
    for (std::size_t k = 0; k < 5; ++k) {
      v[k] = a[k];
      v[5 + k] = b[k];
      v[10 + k] = b[k] - a[k];
    }
    return v;
  }
};

/// Element j true iff the bit changes between frames j and j+1.
inline std::vector<std::uint8_t> flip_series(const IdTrace& trace, int bit) {
  if (trace.size() < 2)
    throw InsufficientData("flip series needs at least 2 frames");
  std::vector<std::uint8_t> flips(trace.size() - 1);
  const PayloadBits mask = PayloadBits{1} << (63 - bit);
  for (std::size_t j = 0; j + 1 < trace.size(); ++j)
    flips[j] = (trace.rows[j] ^ trace.rows[j + 1]) & mask ? 1 : 0;
  return flips;
}

/// Drop constant columns and re-order the rest along ordering_sequence(e).
inline CondensedTrace condense(const IdTrace& trace, Endianness e) {
  if (trace.size() < 2)
    throw InsufficientData("condense needs at least 2 frames");
  CondensedTrace ct;
  ct.source_id = trace.arbitration_id;
  ct.ordering = e;
  ct.frame_count = trace.size();
  const auto constant = trace.constant_mask();
  for (int pos : ordering_sequence(e)) {
    if (constant[pos]) continue;
    ct.kept_positions.push_back(pos);
    ct.columns.push_back(flip_series(trace, pos));
  }
  return ct;
}

/// Empirical estimates from two aligned flip series. A conditional whose
/// conditioning event never occurs is 0. Passing nullptr for `flips_next`
/// (no sequence successor) zeroes every conditional and keeps p_flip.
inline LocalFeatures local_features(const std::vector<std::uint8_t>& flips_i,
                                    const std::vector<std::uint8_t>* flips_next) {
  LocalFeatures f;
  const std::size_t n = flips_i.size();
  if (n == 0) throw InsufficientData("empty flip series");
  std::size_t c_i = 0;
  for (std::uint8_t b : flips_i) c_i += b;
  f.p_flip = static_cast<double>(c_i) / static_cast<double>(n);
  if (!flips_next) return f;
  if (flips_next->size() != n)
    throw InsufficientData("flip series length mismatch");
  std::size_t c_next = 0, c_both = 0, c_neither = 0;
  for (std::size_t j = 0; j < n; ++j) {
    const bool a = flips_i[j] != 0;
    const bool b = (*flips_next)[j] != 0;
    c_next += b;
    c_both += a && b;
    c_neither += !a && !b;
  }
  const std::size_t nc_i = n - c_i;
  const std::size_t nc_next = n - c_next;
  f.p_fi_given_fnext =
      c_next ? static_cast<double>(c_both) / static_cast<double>(c_next) : 0.0;
  f.p_fnext_given_fi =
      c_i ? static_cast<double>(c_both) / static_cast<double>(c_i) : 0.0;
  f.p_nfi_given_nfnext =
      nc_next ? static_cast<double>(c_neither) / static_cast<double>(nc_next) : 0.0;
  f.p_nfnext_given_nfi =
      nc_i ? static_cast<double>(c_neither) / static_cast<double>(nc_i) : 0.0;
  return f;
}

/// One FeatureVector per gap decision: entry k describes the gap between
/// condensed positions k and k+1 (k = 0 .. width-2). The `next` block of the
/// final entry has no second neighbor; its conditionals are zero.
inline std::vector<FeatureVector> feature_matrix(const CondensedTrace& ct) {
  const std::size_t m = ct.width();
  std::vector<FeatureVector> out;
  if (m < 2) return out;
  std::vector<LocalFeatures> pair_local(m);
  for (std::size_t k = 0; k < m; ++k)
    pair_local[k] =
        local_features(ct.columns[k], k + 1 < m ? &ct.columns[k + 1] : nullptr);
  out.resize(m - 1);
  for (std::size_t k = 0; k + 1 < m; ++k) {
    out[k].self = pair_local[k];
    out[k].next = pair_local[k + 1];
  }
  return out;
}

/// Bit indices that end a signal once little endian signals are split into
/// per-byte fragments (each fragment then lies inside one byte, so the big
/// endian gap convention applies to every signal). Big endian signals keep
/// their natural cross-byte adjacency and contribute only their LSB.
inline std::set<int> fragment_lsb_set(const MessageDefinition& truth) {
  std::set<int> lsbs;
  for (const SignalDefinition& def : truth.signals) {
    const SignalSpec spec = def.spec();
    if (def.endianness == Endianness::Little) {
      for (std::size_t k = 0; k < spec.bit_indices.size(); ++k) {
        const bool last = k + 1 == spec.bit_indices.size();
        const bool byte_break =
            !last && byte_of_bit(spec.bit_indices[k + 1]) !=
                         byte_of_bit(spec.bit_indices[k]);
        if (last || byte_break) lsbs.insert(spec.bit_indices[k]);
      }
    } else {
      lsbs.insert(spec.lsb());
    }
  }
  return lsbs;
}

/// Per condensed position: is this bit the LSB of a (split) truth signal.
inline std::vector<std::uint8_t> label_vector(const CondensedTrace& ct,
                                              const MessageDefinition& truth) {
  if (truth.arbitration_id != ct.source_id)
    throw ValidationError("ground truth does not cover id " +
                          std::to_string(ct.source_id));
  const std::set<int> lsbs = fragment_lsb_set(truth);
  std::vector<std::uint8_t> labels(ct.width());
  for (std::size_t k = 0; k < ct.width(); ++k)
    labels[k] = lsbs.count(ct.kept_positions[k]) ? 1 : 0;
  return labels;
}

/// CSV dump for offline inspection: id,bit,ordering,f1..f15,label.
inline void dump_feature_csv(std::ostream& out, const CondensedTrace& ct,
                             const std::vector<FeatureVector>& fvs,
                             const std::vector<std::uint8_t>* labels = nullptr) {
  for (std::size_t k = 0; k < fvs.size(); ++k) {
    out << ct.source_id << ',' << ct.kept_positions[k] << ','
        << to_string(ct.ordering);
    for (double v : fvs[k].flatten()) out << ',' << v;
    out << ',' << (labels ? int((*labels)[k]) : -1) << '\n';
  }
}

}  // namespace cand
