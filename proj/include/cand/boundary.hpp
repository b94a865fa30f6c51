#pragma once

#include <array>
#include <optional>
#include <variant>
#include <vector>

#include "cand/can_model.hpp"
#include "cand/features.hpp"
#include "cand/forest.hpp"

namespace cand {

struct HeuristicParams {
  double alpha1 = 0.01;
  double alpha2 = 0.5;
};

/// Gap rule: cut when the neighbor rarely flips with this bit, or when the
/// conditional flip probability jumps sharply at the next gap. The second
/// clause is skipped when the next gap does not exist.
inline bool heuristic_boundary(double p_next_given_i,
                               std::optional<double> p_nextnext_given_next,
                               const HeuristicParams& hp = {}) {
  if (p_next_given_i < hp.alpha1) return true;
  return p_nextnext_given_next &&
         (*p_nextnext_given_next - p_next_given_i) > hp.alpha2;
}

/// Per-bit cut likelihoods under each ordering. `mandatory[i]` marks the
/// positions where a cut is forced (the bit or its sequence successor is
/// constant, or there is no successor); `value[i]` is meaningful only where
/// the cut is not mandatory.
struct BoundaryProbabilities {
  struct Lane {
    std::array<double, kPayloadBits> value{};
    std::array<bool, kPayloadBits> mandatory{};
  };
  Lane big;
  Lane little;

  Lane& lane(Endianness e) { return e == Endianness::Big ? big : little; }
  const Lane& lane(Endianness e) const {
    return e == Endianness::Big ? big : little;
  }
};

/// Either the unsupervised heuristic or a trained forest.
using BoundaryClassifier = std::variant<HeuristicParams, const ForestModel*>;

namespace detail {

inline double classify_gap(const BoundaryClassifier& clf,
                           const std::vector<FeatureVector>& fvs,
                           std::size_t k) {
  if (std::holds_alternative<HeuristicParams>(clf)) {
    const auto& hp = std::get<HeuristicParams>(clf);
    const FeatureVector& fv = fvs[k];
    std::optional<double> next_cond;
    if (k + 1 < fvs.size()) next_cond = fv.next.p_fnext_given_fi;
    return heuristic_boundary(fv.self.p_fnext_given_fi, next_cond, hp) ? 1.0
                                                                       : 0.0;
  }
  return std::get<const ForestModel*>(clf)->predict_proba(fvs[k]);
}

}  // namespace detail

/// Evaluate the classifier along both orderings of a trace. Gaps are scored
/// on the condensed trace and mapped back to the original index of the gap's
/// left bit; mandatory-cut positions are marked rather than scored.
inline BoundaryProbabilities boundary_probabilities(
    const IdTrace& trace, const BoundaryClassifier& clf) {
  if (trace.size() < 2)
    throw InsufficientData("boundary probabilities need at least 2 frames");
  BoundaryProbabilities out;
  const auto constant = trace.constant_mask();
  for (Endianness e : {Endianness::Big, Endianness::Little}) {
    auto& lane = out.lane(e);
    for (int i = 0; i < kPayloadBits; ++i) {
      const auto nxt = successor(i, e);
      lane.mandatory[i] = constant[i] || !nxt || constant[*nxt];
    }
    const CondensedTrace ct = condense(trace, e);
    const auto fvs = feature_matrix(ct);
    for (std::size_t k = 0; k < fvs.size(); ++k) {
      const int left_bit = ct.kept_positions[k];
      if (!lane.mandatory[left_bit])
        lane.value[left_bit] = detail::classify_gap(clf, fvs, k);
    }
  }
  return out;
}

/// Sample weights for forest training. A positive gap is "obvious" when the
/// original sequence successor of its left bit was removed as constant (the
/// cut would be known without any classifier).
struct GapWeights {
  double nonobvious_positive = 8.0;
  double negative = 4.0;
  double obvious_positive = 1.0;
};

/// Append one ID's gap samples (features, label, weight) to a training set.
/// The condensed trace and labels must come from the same trace and truth.
inline void append_training_samples(const CondensedTrace& ct,
                                    const std::vector<FeatureVector>& fvs,
                                    const std::vector<std::uint8_t>& labels,
                                    const IdTrace& trace, TrainingSet& out,
                                    const GapWeights& w = {}) {
  const auto constant = trace.constant_mask();
  for (std::size_t k = 0; k < fvs.size(); ++k) {
    const bool positive = labels[k] != 0;
    double weight = w.negative;
    if (positive) {
      const auto nxt = successor(ct.kept_positions[k], ct.ordering);
      const bool obvious = !nxt || constant[*nxt];
      weight = obvious ? w.obvious_positive : w.nonobvious_positive;
    }
    out.add(fvs[k].flatten(), positive, weight);
  }
}

}  // namespace cand
