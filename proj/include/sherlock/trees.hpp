#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "sherlock/error.hpp"
#include "sherlock/eval.hpp"
#include "sherlock/pipeline.hpp"
#include "sherlock/random.hpp"

namespace sherlock::trees {

/// 1 - sum p_c^2 over class counts.
inline double gini(std::span<const double> counts) {
  double n = 0.0, sq = 0.0;
  for (double c : counts) {
    n += c;
    sq += c * c;
  }
  return n > 0.0 ? 1.0 - sq / (n * n) : 0.0;
}

struct Node {
  int feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double samples = 0.0;
  double impurity = 0.0;
  std::vector<double> counts;  // class histogram of the training samples reaching the node
};

struct TreeOptions {
  std::size_t max_depth = 50;
  // Features examined per split; 0 means all.
  std::size_t max_features = 0;
  std::size_t num_classes = kNumTypes;
  std::uint64_t seed = 0;
};

class DecisionTree {
 public:
  DecisionTree() = default;
  DecisionTree(std::vector<Node> nodes, std::size_t num_features, std::size_t num_classes)
      : nodes_(std::move(nodes)), num_features_(num_features), num_classes_(num_classes) {}

  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t num_features() const { return num_features_; }
  std::size_t num_classes() const { return num_classes_; }

  const Node& leaf_for(std::span<const double> row) const {
    if (row.size() != num_features_) throw DataError("tree input has wrong width");
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
      const auto& n = nodes_[i];
      i = static_cast<std::size_t>(row[static_cast<std::size_t>(n.feature)] <= n.threshold ? n.left : n.right);
    }
    return nodes_[i];
  }

  /// Class fractions of the leaf reached by `row`.
  std::vector<double> predict_proba(std::span<const double> row) const {
    const auto& leaf = leaf_for(row);
    std::vector<double> p(leaf.counts);
    for (double& x : p) x /= leaf.samples;
    return p;
  }

  int predict(std::span<const double> row) const {
    const auto& c = leaf_for(row).counts;
    return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
  }

  std::size_t depth() const {
    std::size_t best = 0;
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto [i, d] = stack.back();
      stack.pop_back();
      best = std::max(best, d);
      if (nodes_[i].feature >= 0) {
        stack.emplace_back(static_cast<std::size_t>(nodes_[i].left), d + 1);
        stack.emplace_back(static_cast<std::size_t>(nodes_[i].right), d + 1);
      }
    }
    return best;
  }

 private:
  std::vector<Node> nodes_;
  std::size_t num_features_ = 0;
  std::size_t num_classes_ = 0;
};

namespace detail {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double decrease = 0.0;
};

class TreeBuilder {
 public:
  TreeBuilder(const FeatureMatrix& m, const TreeOptions& opt) : m_(m), opt_(opt), rng_(derive_seed(opt.seed, 0x7EE)) {}

  DecisionTree build(std::vector<std::size_t> rows) {
    nodes_.clear();
    grow(std::move(rows), 0);
    return DecisionTree(std::move(nodes_), m_.cols, opt_.num_classes);
  }

 private:
  int grow(std::vector<std::size_t> rows, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    Node node;
    node.counts.assign(opt_.num_classes, 0.0);
    for (auto r : rows) node.counts[static_cast<std::size_t>(m_.labels[r])] += 1.0;
    node.samples = static_cast<double>(rows.size());
    node.impurity = gini(node.counts);
    if (node.impurity > 0.0 && depth < opt_.max_depth && rows.size() >= 2) {
      const Split s = best_split(rows, node);
      if (s.feature >= 0) {
        std::vector<std::size_t> left, right;
        for (auto r : rows) (m_.row(r)[static_cast<std::size_t>(s.feature)] <= s.threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        node.feature = s.feature;
        node.threshold = s.threshold;
        nodes_[static_cast<std::size_t>(id)] = node;
        const int l = grow(std::move(left), depth + 1);
        const int r = grow(std::move(right), depth + 1);
        nodes_[static_cast<std::size_t>(id)].left = l;
        nodes_[static_cast<std::size_t>(id)].right = r;
        return id;
      }
    }
    nodes_[static_cast<std::size_t>(id)] = std::move(node);
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t p = m_.cols;
    std::vector<std::size_t> all(p);
    for (std::size_t j = 0; j < p; ++j) all[j] = j;
    if (opt_.max_features == 0 || opt_.max_features >= p) return all;
    shuffle(all.begin(), all.end(), rng_);
    return all;
  }

  // Features are scanned in ascending index order, thresholds ascending; a
  // candidate replaces the incumbent only if strictly better, so ties keep
  // the lowest feature and threshold. With max_features < p the first
  // max_features of a random permutation are scanned, and the rest only if
  // none of them splits the node.
  Split best_split(const std::vector<std::size_t>& rows, const Node& node) {
    auto features = candidate_features();
    Split best;
    const std::size_t k = (opt_.max_features == 0 || opt_.max_features >= features.size()) ? features.size() : opt_.max_features;
    std::vector<std::size_t> head(features.begin(), features.begin() + static_cast<std::ptrdiff_t>(k));
    std::sort(head.begin(), head.end());
    scan(rows, node, head, best);
    if (best.feature < 0 && k < features.size()) {
      std::vector<std::size_t> tail(features.begin() + static_cast<std::ptrdiff_t>(k), features.end());
      std::sort(tail.begin(), tail.end());
      scan(rows, node, tail, best);
    }
    return best;
  }

  void scan(const std::vector<std::size_t>& rows, const Node& node, const std::vector<std::size_t>& features, Split& best) {
    const double n = node.samples;
    double total_sq = 0.0;
    for (double c : node.counts) total_sq += c * c;
    std::vector<std::pair<double, int>> vals(rows.size());
    std::vector<double> left(opt_.num_classes);
    for (auto f : features) {
      for (std::size_t i = 0; i < rows.size(); ++i) vals[i] = {m_.row(rows[i])[f], m_.labels[rows[i]]};
      std::sort(vals.begin(), vals.end());
      if (vals.front().first == vals.back().first) continue;
      std::fill(left.begin(), left.end(), 0.0);
      double left_sq = 0.0, right_sq = total_sq;
      for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
        const auto c = static_cast<std::size_t>(vals[i].second);
        const double right_c = node.counts[c] - left[c];
        left_sq += 2.0 * left[c] + 1.0;
        right_sq -= 2.0 * right_c - 1.0;
        left[c] += 1.0;
        if (vals[i].first == vals[i + 1].first) continue;
        const double nl = static_cast<double>(i + 1), nr = n - nl;
        const double weighted = (nl - left_sq / nl + nr - right_sq / nr) / n;
        const double decrease = node.impurity - weighted;
        if (decrease > 1e-12 && decrease > best.decrease) {
          double t = (vals[i].first + vals[i + 1].first) / 2.0;
          if (t >= vals[i + 1].first) t = vals[i].first;
          best = {static_cast<int>(f), t, decrease};
        }
      }
    }
  }

  const FeatureMatrix& m_;
  TreeOptions opt_;
  Rng rng_;
  std::vector<Node> nodes_;
};

inline void check_training_matrix(const FeatureMatrix& m, std::size_t num_classes) {
  if (m.rows == 0) throw DataError("tree training matrix is empty");
  for (int l : m.labels)
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes) throw DataError("tree training rows need labels in range");
  for (double v : m.values)
    if (std::isnan(v)) throw DataError("tree training matrix must be imputed");
}

}  // namespace detail

/// Greedy CART on Gini impurity. Splits go left when value <= threshold.
inline DecisionTree train_decision_tree(const FeatureMatrix& m, const TreeOptions& opt = {}) {
  detail::check_training_matrix(m, opt.num_classes);
  std::vector<std::size_t> rows(m.rows);
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return detail::TreeBuilder(m, opt).build(std::move(rows));
}

/// Total weighted impurity decrease per feature, scaled so the largest is 1.
inline std::vector<double> feature_importances(const DecisionTree& tree) {
  std::vector<double> imp(tree.num_features(), 0.0);
  const auto& nodes = tree.nodes();
  if (nodes.empty()) return imp;
  const double total = nodes.front().samples;
  for (const auto& n : nodes) {
    if (n.feature < 0) continue;
    const auto& l = nodes[static_cast<std::size_t>(n.left)];
    const auto& r = nodes[static_cast<std::size_t>(n.right)];
    imp[static_cast<std::size_t>(n.feature)] +=
        (n.samples * n.impurity - l.samples * l.impurity - r.samples * r.impurity) / total;
  }
  const double top = *std::max_element(imp.begin(), imp.end());
  if (top > 0.0)
    for (double& x : imp) x /= top;
  return imp;
}

struct ForestOptions {
  std::size_t n_trees = 10;
  std::size_t max_depth = 50;
  // 0 selects floor(sqrt(number of features)).
  std::size_t max_features = 0;
  bool bootstrap = true;
  std::size_t num_classes = kNumTypes;
  std::uint64_t seed = 0;
};

class RandomForest {
 public:
  RandomForest() = default;
  explicit RandomForest(std::vector<DecisionTree> trees) : trees_(std::move(trees)) {}

  const std::vector<DecisionTree>& trees() const { return trees_; }

  /// Mean of the per-tree leaf distributions.
  std::vector<double> predict_proba(std::span<const double> row) const {
    std::vector<double> p(trees_.front().num_classes(), 0.0);
    for (const auto& t : trees_) {
      const auto q = t.predict_proba(row);
      for (std::size_t c = 0; c < p.size(); ++c) p[c] += q[c];
    }
    for (double& x : p) x /= static_cast<double>(trees_.size());
    return p;
  }

  /// Majority vote; ties go to the smaller class index.
  int predict(std::span<const double> row) const {
    std::vector<std::size_t> votes(trees_.front().num_classes(), 0);
    for (const auto& t : trees_) ++votes[static_cast<std::size_t>(t.predict(row))];
    return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
  }

 private:
  std::vector<DecisionTree> trees_;
};

inline RandomForest train_random_forest(const FeatureMatrix& m, const ForestOptions& opt = {}) {
  detail::check_training_matrix(m, opt.num_classes);
  if (opt.n_trees == 0) throw Error("random forest needs at least one tree");
  const std::size_t features =
      opt.max_features ? opt.max_features
                       : std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(m.cols))));
  std::vector<DecisionTree> trees;
  for (std::size_t t = 0; t < opt.n_trees; ++t) {
    const std::uint64_t seed = derive_seed(opt.seed, t);
    std::vector<std::size_t> rows(m.rows);
    if (opt.bootstrap) {
      Rng rng(derive_seed(seed, 0xB007));
      for (auto& r : rows) r = uniform_index(rng, m.rows);
    } else {
      for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
    }
    TreeOptions to{opt.max_depth, features, opt.num_classes, seed};
    trees.push_back(detail::TreeBuilder(m, to).build(std::move(rows)));
  }
  return RandomForest(std::move(trees));
}

/// Flattened form used by model files: per node
/// [feature, threshold, left, right, samples, impurity, counts...].
inline std::vector<double> serialize(const DecisionTree& tree) {
  std::vector<double> out{static_cast<double>(tree.num_features()), static_cast<double>(tree.num_classes()),
                          static_cast<double>(tree.nodes().size())};
  for (const auto& n : tree.nodes()) {
    out.insert(out.end(), {static_cast<double>(n.feature), n.threshold, static_cast<double>(n.left),
                           static_cast<double>(n.right), n.samples, n.impurity});
    out.insert(out.end(), n.counts.begin(), n.counts.end());
  }
  return out;
}

inline DecisionTree deserialize_tree(std::span<const double> data, std::size_t* consumed = nullptr) {
  if (data.size() < 3) throw DataError("tree record truncated");
  const auto features = static_cast<std::size_t>(data[0]);
  const auto classes = static_cast<std::size_t>(data[1]);
  const auto count = static_cast<std::size_t>(data[2]);
  std::size_t pos = 3;
  std::vector<Node> nodes(count);
  for (auto& n : nodes) {
    if (pos + 6 + classes > data.size()) throw DataError("tree record truncated");
    n.feature = static_cast<int>(data[pos]);
    n.threshold = data[pos + 1];
    n.left = static_cast<int>(data[pos + 2]);
    n.right = static_cast<int>(data[pos + 3]);
    n.samples = data[pos + 4];
    n.impurity = data[pos + 5];
    n.counts.assign(data.begin() + static_cast<std::ptrdiff_t>(pos + 6),
                    data.begin() + static_cast<std::ptrdiff_t>(pos + 6 + classes));
    pos += 6 + classes;
    if (n.feature >= 0 && (n.left <= 0 || n.right <= 0 || static_cast<std::size_t>(n.left) >= count ||
                           static_cast<std::size_t>(n.right) >= count || static_cast<std::size_t>(n.feature) >= features))
      throw DataError("tree record has an invalid node");
  }
  if (consumed) *consumed = pos;
  return DecisionTree(std::move(nodes), features, classes);
}

}  // namespace sherlock::trees
