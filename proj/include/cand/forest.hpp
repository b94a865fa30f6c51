#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "cand/errors.hpp"
#include "cand/features.hpp"
#include "cand/rng.hpp"

namespace cand {

struct ForestHyperparams {
  int tree_count = 200;
  int max_depth = 5;
  int min_samples_leaf = 3;
  int features_per_split = 4;  // ceil(sqrt(15))
  bool bootstrap = true;       // off only for oracle-equivalence tests
};

struct TreeNode {
  int feature = -1;      // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double leaf_p = 0.0;
};

struct DecisionTree {
  std::vector<TreeNode> nodes;

  double predict(const std::array<double, kFeatureCount>& x) const {
    int cur = 0;
    while (nodes[cur].feature >= 0)
      cur = x[nodes[cur].feature] <= nodes[cur].threshold ? nodes[cur].left
                                                          : nodes[cur].right;
    return nodes[cur].leaf_p;
  }
};

/// Labeled gap samples with per-sample weights (the 8:4:1 scheme is applied
/// by the caller; this container is weighting-agnostic).
struct TrainingSet {
  std::vector<std::array<double, kFeatureCount>> x;
  std::vector<std::uint8_t> y;
  std::vector<double> weight;

  std::size_t size() const { return x.size(); }
  void add(const std::array<double, kFeatureCount>& xi, bool yi, double wi) {
    x.push_back(xi);
    y.push_back(yi ? 1 : 0);
    weight.push_back(wi);
  }
};

struct ForestModel {
  ForestHyperparams params;
  std::uint64_t seed = 0;
  std::vector<DecisionTree> trees;

  double predict_proba(const std::array<double, kFeatureCount>& x) const {
    double sum = 0.0;
    for (const DecisionTree& t : trees) sum += t.predict(x);
    return trees.empty() ? 0.0 : sum / static_cast<double>(trees.size());
  }
  double predict_proba(const FeatureVector& fv) const {
    return predict_proba(fv.flatten());
  }
};

namespace detail {

/// Weighted draw with replacement: cumulative-sum inversion, one uniform
/// per draw. The drawn multiset is what the tree sees; each draw counts
/// with unit mass thereafter.
inline std::vector<std::size_t> weighted_bootstrap(
    const std::vector<double>& weights, SplitMix64& rng) {
  std::vector<double> cum(weights.size());
  double total = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    total += weights[i];
    cum[i] = total;
  }
  std::vector<std::size_t> draws(weights.size());
  for (std::size_t d = 0; d < weights.size(); ++d) {
    const double u = rng.next_double() * total;
    draws[d] = static_cast<std::size_t>(
        std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (draws[d] >= weights.size()) draws[d] = weights.size() - 1;
  }
  return draws;
}

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  double threshold = 0.0;
};

inline double gini(std::size_t pos, std::size_t total) {
  if (total == 0) return 0.0;
  const double p = static_cast<double>(pos) / static_cast<double>(total);
  return 2.0 * p * (1.0 - p);
}

class TreeBuilder {
 public:
  TreeBuilder(const TrainingSet& data, const ForestHyperparams& params,
              SplitMix64& rng)
      : data_(data), params_(params), rng_(rng) {}

  DecisionTree build(std::vector<std::size_t> indices) {
    tree_.nodes.clear();
    grow(std::move(indices), 0);
    return std::move(tree_);
  }

 private:
  int grow(std::vector<std::size_t> indices, int depth) {
    const int node_id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    std::size_t pos = 0;
    for (std::size_t i : indices) pos += data_.y[i];
    const std::size_t n = indices.size();
    const auto make_leaf = [&] {
      tree_.nodes[node_id].feature = -1;
      tree_.nodes[node_id].leaf_p =
          n ? static_cast<double>(pos) / static_cast<double>(n) : 0.0;
      return node_id;
    };
    if (depth >= params_.max_depth || pos == 0 || pos == n ||
        n < 2 * static_cast<std::size_t>(params_.min_samples_leaf))
      return make_leaf();

    auto feats = sample_without_replacement(
        kFeatureCount, static_cast<std::size_t>(params_.features_per_split),
        rng_);
    std::sort(feats.begin(), feats.end());

    const double parent_gini = gini(pos, n);
    SplitChoice best;
    std::vector<std::pair<double, std::uint8_t>> col(n);
    for (std::size_t f : feats) {
      for (std::size_t k = 0; k < n; ++k)
        col[k] = {data_.x[indices[k]][f], data_.y[indices[k]]};
      std::sort(col.begin(), col.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      std::size_t left_n = 0, left_pos = 0;
      for (std::size_t k = 0; k + 1 < n; ++k) {
        left_n += 1;
        left_pos += col[k].second;
        if (col[k].first == col[k + 1].first) continue;
        const std::size_t right_n = n - left_n;
        if (left_n < static_cast<std::size_t>(params_.min_samples_leaf) ||
            right_n < static_cast<std::size_t>(params_.min_samples_leaf))
          continue;
        const double weighted_child =
            (static_cast<double>(left_n) * gini(left_pos, left_n) +
             static_cast<double>(right_n) * gini(pos - left_pos, right_n)) /
            static_cast<double>(n);
        const double gain = parent_gini - weighted_child;
        const double threshold = (col[k].first + col[k + 1].first) / 2.0;
        // strict improvement keeps the lowest feature index, then the
        // lowest threshold, on ties
        if (gain > best.gain) best = {gain, static_cast<int>(f), threshold};
      }
    }
    if (best.feature < 0 || best.gain <= 0.0) return make_leaf();

    std::vector<std::size_t> left_idx, right_idx;
    left_idx.reserve(n);
    right_idx.reserve(n);
    for (std::size_t i : indices)
      (data_.x[i][best.feature] <= best.threshold ? left_idx : right_idx)
          .push_back(i);
    indices.clear();
    indices.shrink_to_fit();

    tree_.nodes[node_id].feature = best.feature;
    tree_.nodes[node_id].threshold = best.threshold;
    const int left = grow(std::move(left_idx), depth + 1);
    const int right = grow(std::move(right_idx), depth + 1);
    tree_.nodes[node_id].left = left;
    tree_.nodes[node_id].right = right;
    return node_id;
  }

  const TrainingSet& data_;
  const ForestHyperparams& params_;
  SplitMix64& rng_;
  DecisionTree tree_;
};

}  // namespace detail

/// Fit the ensemble. Deterministic for a fixed (data order, params, seed).
inline ForestModel train_forest(const TrainingSet& data,
                                const ForestHyperparams& params,
                                std::uint64_t seed) {
  if (data.size() == 0) throw ValidationError("empty training set");
  {
    bool has0 = false, has1 = false;
    for (std::uint8_t v : data.y) (v ? has1 : has0) = true;
    if (!has0 || !has1)
      throw ValidationError("training set has a single class");
  }
  ForestModel model;
  model.params = params;
  model.seed = seed;
  SplitMix64 master(seed);
  for (int t = 0; t < params.tree_count; ++t) {
    SplitMix64 tree_rng(master.fork(static_cast<std::uint64_t>(t) + 1));
    std::vector<std::size_t> indices;
    if (params.bootstrap) {
      indices = detail::weighted_bootstrap(data.weight, tree_rng);
    } else {
      indices.resize(data.size());
      for (std::size_t i = 0; i < data.size(); ++i) indices[i] = i;
    }
    detail::TreeBuilder builder(data, params, tree_rng);
    model.trees.push_back(builder.build(std::move(indices)));
  }
  return model;
}

/// Versioned line-oriented model format:
///   cand-forest v1
///   params <trees> <max_depth> <min_samples_leaf> <features_per_split> <seed>
///   node <tree>,<node>,<feature>,<threshold>,<left>,<right>,<leaf_p>
inline void save_forest(const ForestModel& model, std::ostream& out) {
  out << "cand-forest v1\n";
  out << "params " << model.params.tree_count << ' ' << model.params.max_depth
      << ' ' << model.params.min_samples_leaf << ' '
      << model.params.features_per_split << ' ' << model.seed << '\n';
  char buf[64];
  for (std::size_t t = 0; t < model.trees.size(); ++t) {
    const DecisionTree& tree = model.trees[t];
    for (std::size_t n = 0; n < tree.nodes.size(); ++n) {
      const TreeNode& node = tree.nodes[n];
      out << "node " << t << ',' << n << ',' << node.feature << ',';
      auto rc = std::to_chars(buf, buf + sizeof buf, node.threshold);
      out.write(buf, rc.ptr - buf);
      out << ',' << node.left << ',' << node.right << ',';
      rc = std::to_chars(buf, buf + sizeof buf, node.leaf_p);
      out.write(buf, rc.ptr - buf);
      out << '\n';
    }
  }
}

inline std::string forest_digest(const ForestModel& model) {
  std::ostringstream ss;
  save_forest(model, ss);
  return ss.str();
}

inline ForestModel load_forest(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "cand-forest v1")
    throw ParseError("not a cand-forest v1 model", 1);
  ForestModel model;
  std::size_t lineno = 1;
  {
    if (!std::getline(in, line)) throw ParseError("missing params line", 2);
    ++lineno;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag >> model.params.tree_count >> model.params.max_depth >>
          model.params.min_samples_leaf >> model.params.features_per_split >>
          model.seed) ||
        tag != "params")
      throw ParseError("malformed params line", lineno);
  }
  model.trees.resize(static_cast<std::size_t>(model.params.tree_count));
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string tag;
    if (!(ss >> tag) || tag != "node")
      throw ParseError("expected node line", lineno);
    std::string rest;
    std::getline(ss, rest);
    std::array<std::string, 7> parts;
    std::size_t start = rest.find_first_not_of(' ');
    std::size_t field = 0;
    while (field < 7 && start != std::string::npos) {
      std::size_t comma = rest.find(',', start);
      parts[field++] = rest.substr(
          start, comma == std::string::npos ? std::string::npos : comma - start);
      start = comma == std::string::npos ? std::string::npos : comma + 1;
    }
    if (field != 7) throw ParseError("malformed node line", lineno);
    try {
      const std::size_t t = std::stoul(parts[0]);
      const std::size_t n = std::stoul(parts[1]);
      if (t >= model.trees.size()) throw ParseError("tree index out of range", lineno);
      auto& nodes = model.trees[t].nodes;
      if (n != nodes.size()) throw ParseError("node lines out of order", lineno);
      TreeNode node;
      node.feature = std::stoi(parts[2]);
      node.threshold = std::stod(parts[3]);
      node.left = std::stoi(parts[4]);
      node.right = std::stoi(parts[5]);
      node.leaf_p = std::stod(parts[6]);
      nodes.push_back(node);
    } catch (const ParseError&) {
      throw;
    } catch (const std::exception&) {
      throw ParseError("malformed node line", lineno);
    }
  }
  for (const DecisionTree& t : model.trees)
    if (t.nodes.empty()) throw ParseError("model is missing trees");
  return model;
}

}  // namespace cand
