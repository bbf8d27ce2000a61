#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "sherlock/error.hpp"
#include "sherlock/eval.hpp"
#include "sherlock/pipeline.hpp"
#include "sherlock/random.hpp"
#include "sherlock/semantic_types.hpp"

namespace sherlock::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

struct Dense {
  Matrix weights;  // fan_in x fan_out
  RowVector bias;

  Dense() = default;
  Dense(std::size_t fan_in, std::size_t fan_out)
      : weights(Matrix::Zero(static_cast<Eigen::Index>(fan_in), static_cast<Eigen::Index>(fan_out))),
        bias(RowVector::Zero(static_cast<Eigen::Index>(fan_out))) {}

  std::size_t fan_in() const { return static_cast<std::size_t>(weights.rows()); }
  std::size_t fan_out() const { return static_cast<std::size_t>(weights.cols()); }

  // He-style uniform, limit sqrt(6 / fan_in); biases start at 0.
  void init(Rng& rng) {
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in()));
    for (Eigen::Index i = 0; i < weights.size(); ++i) weights.data()[i] = (2.0 * uniform01(rng) - 1.0) * limit;
    bias.setZero();
  }
};

/// Fixed (non-trained) input standardization, fit once on training rows.
struct Standardizer {
  RowVector mean;
  RowVector inv_std;

  static Standardizer fit(const Matrix& x) {
    Standardizer s;
    const double n = static_cast<double>(std::max<Eigen::Index>(1, x.rows()));
    s.mean = x.colwise().sum() / n;
    s.inv_std = RowVector::Ones(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double var = (x.col(j).array() - s.mean(j)).square().sum() / n;
      if (var > 1e-24) s.inv_std(j) = 1.0 / std::sqrt(var);
    }
    return s;
  }
  static Standardizer identity(std::size_t width) {
    return {RowVector::Zero(static_cast<Eigen::Index>(width)), RowVector::Ones(static_cast<Eigen::Index>(width))};
  }
  Matrix apply(const Matrix& x) const {
    return (x.rowwise() - mean).array().rowwise() * inv_std.array();
  }
};

/// ReLU hidden layers with dropout followed by a linear output layer.
class Mlp {
 public:
  struct Cache {
    std::vector<Matrix> inputs;  // input of each layer
    std::vector<Matrix> pre;     // pre-activation of each hidden layer
    std::vector<Matrix> masks;   // scaled dropout masks (empty when inactive)
  };

  Mlp() = default;
  Mlp(std::size_t input, const std::vector<std::size_t>& hidden, std::size_t output, double dropout)
      : dropout_(dropout), norm_(Standardizer::identity(input)) {
    std::size_t prev = input;
    for (auto h : hidden) {
      layers_.emplace_back(prev, h);
      prev = h;
    }
    layers_.emplace_back(prev, output);
  }

  void init(Rng& rng) {
    for (auto& l : layers_) l.init(rng);
  }

  std::size_t input_dim() const { return layers_.front().fan_in(); }
  std::size_t output_dim() const { return layers_.back().fan_out(); }
  double dropout() const { return dropout_; }
  std::vector<Dense>& layers() { return layers_; }
  const std::vector<Dense>& layers() const { return layers_; }
  Standardizer& norm() { return norm_; }
  const Standardizer& norm() const { return norm_; }

  /// `dropout_rng` non-null enables dropout (training mode).
  Matrix forward(const Matrix& x, Cache* cache, Rng* dropout_rng) const {
    Matrix a = norm_.apply(x);
    const std::size_t hidden = layers_.size() - 1;
    if (cache) {
      cache->inputs.assign(layers_.size(), Matrix());
      cache->pre.assign(hidden, Matrix());
      cache->masks.assign(hidden, Matrix());
    }
    for (std::size_t l = 0; l < hidden; ++l) {
      Matrix z = (a * layers_[l].weights).rowwise() + layers_[l].bias;
      if (cache) {
        cache->inputs[l] = std::move(a);
        cache->pre[l] = z;
      }
      a = z.cwiseMax(0.0);
      if (dropout_rng && dropout_ > 0.0) {
        const double keep = 1.0 - dropout_;
        Matrix mask(a.rows(), a.cols());
        for (Eigen::Index i = 0; i < mask.size(); ++i) mask.data()[i] = uniform01(*dropout_rng) < keep ? 1.0 / keep : 0.0;
        a.array() *= mask.array();
        if (cache) cache->masks[l] = std::move(mask);
      }
    }
    Matrix out = (a * layers_.back().weights).rowwise() + layers_.back().bias;
    if (cache) cache->inputs[hidden] = std::move(a);
    return out;
  }

  /// Accumulates parameter gradients into `grads` (same shapes as layers()).
  /// Returns the gradient w.r.t. the raw input when requested.
  Matrix backward(const Cache& cache, Matrix grad_out, std::span<Dense> grads, bool want_input_grad) const {
    for (std::size_t l = layers_.size(); l-- > 0;) {
      grads[l].weights.noalias() += cache.inputs[l].transpose() * grad_out;
      grads[l].bias += grad_out.colwise().sum();
      if (l == 0 && !want_input_grad) return {};
      Matrix g = grad_out * layers_[l].weights.transpose();
      if (l > 0) {
        if (cache.masks[l - 1].size()) g.array() *= cache.masks[l - 1].array();
        g.array() *= (cache.pre[l - 1].array() > 0.0).cast<double>();
      }
      grad_out = std::move(g);
    }
    return grad_out.array().rowwise() * norm_.inv_std.array();
  }

 private:
  double dropout_ = 0.0;
  Standardizer norm_;
  std::vector<Dense> layers_;
};

struct NetworkShape {
  std::size_t chars_hidden = 300;
  std::size_t words_hidden = 200;
  std::size_t paragraph_hidden = 400;
  std::size_t primary_hidden = 500;
  std::size_t num_classes = kNumTypes;
};

struct TrainingConfig {
  double learning_rate = 1e-4;
  std::size_t epochs = 100;
  std::size_t batch_size = 256;
  double dropout = 0.3;
  double weight_decay = 1e-4;
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  NetworkShape shape;
};

/// Branches read slices of the full feature vector. With a primary network,
/// branch outputs and the (standardized) passthrough slice are concatenated
/// and fed to it; without one, the single branch's output is the logits.
class MultiInputNet {
 public:
  struct Branch {
    FeatureRange range;
    Mlp mlp;
  };

  MultiInputNet() = default;

  std::vector<Branch>& branches() { return branches_; }
  const std::vector<Branch>& branches() const { return branches_; }
  std::optional<FeatureRange>& passthrough() { return passthrough_; }
  const std::optional<FeatureRange>& passthrough() const { return passthrough_; }
  Standardizer& passthrough_norm() { return passthrough_norm_; }
  const Standardizer& passthrough_norm() const { return passthrough_norm_; }
  std::optional<Mlp>& primary() { return primary_; }
  const std::optional<Mlp>& primary() const { return primary_; }
  std::size_t input_width() const { return input_width_; }
  void set_input_width(std::size_t w) { input_width_ = w; }
  std::size_t num_classes() const { return primary_ ? primary_->output_dim() : branches_.front().mlp.output_dim(); }

  /// All trainable layers in a fixed order (branches, then primary).
  std::vector<Dense*> dense_layers() {
    std::vector<Dense*> out;
    for (auto& b : branches_)
      for (auto& l : b.mlp.layers()) out.push_back(&l);
    if (primary_)
      for (auto& l : primary_->layers()) out.push_back(&l);
    return out;
  }
  std::vector<const Dense*> dense_layers() const {
    std::vector<const Dense*> out;
    for (const auto& b : branches_)
      for (const auto& l : b.mlp.layers()) out.push_back(&l);
    if (primary_)
      for (const auto& l : primary_->layers()) out.push_back(&l);
    return out;
  }

  /// Zero-valued gradient buffers matching dense_layers().
  std::vector<Dense> zero_gradients() const {
    std::vector<Dense> g;
    for (const Dense* d : dense_layers()) g.emplace_back(d->fan_in(), d->fan_out());
    return g;
  }

  struct Cache {
    std::vector<Mlp::Cache> branch;
    Mlp::Cache primary;
  };

  Matrix logits(const Matrix& x, Cache* cache, Rng* dropout_rng) const {
    if (static_cast<std::size_t>(x.cols()) != input_width_) throw DataError("network input has wrong width");
    if (cache) cache->branch.assign(branches_.size(), Mlp::Cache());
    std::vector<Matrix> outs;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      const auto& br = branches_[b];
      const Matrix slice = x.middleCols(static_cast<Eigen::Index>(br.range.offset), static_cast<Eigen::Index>(br.range.size));
      outs.push_back(br.mlp.forward(slice, cache ? &cache->branch[b] : nullptr, dropout_rng));
    }
    if (!primary_) return outs.front();
    Eigen::Index width = 0;
    for (const auto& o : outs) width += o.cols();
    Matrix pass;
    if (passthrough_) {
      pass = passthrough_norm_.apply(
          x.middleCols(static_cast<Eigen::Index>(passthrough_->offset), static_cast<Eigen::Index>(passthrough_->size)));
      width += pass.cols();
    }
    Matrix joined(x.rows(), width);
    Eigen::Index col = 0;
    for (const auto& o : outs) {
      joined.middleCols(col, o.cols()) = o;
      col += o.cols();
    }
    if (passthrough_) joined.middleCols(col, pass.cols()) = pass;
    return primary_->forward(joined, cache ? &cache->primary : nullptr, dropout_rng);
  }

  void backward(const Cache& cache, const Matrix& grad_logits, std::vector<Dense>& grads) const {
    std::span<Dense> all(grads);
    std::size_t offset = 0;
    for (const auto& b : branches_) offset += b.mlp.layers().size();
    std::vector<Matrix> branch_grads;
    if (primary_) {
      const Matrix gin = primary_->backward(cache.primary, grad_logits, all.subspan(offset), !branches_.empty());
      Eigen::Index col = 0;
      for (const auto& b : branches_) {
        const auto w = static_cast<Eigen::Index>(b.mlp.output_dim());
        branch_grads.push_back(gin.middleCols(col, w));
        col += w;
      }
    } else {
      branch_grads.push_back(grad_logits);
    }
    std::size_t layer = 0;
    for (std::size_t b = 0; b < branches_.size(); ++b) {
      const auto& mlp = branches_[b].mlp;
      mlp.backward(cache.branch[b], branch_grads[b], all.subspan(layer, mlp.layers().size()), false);
      layer += mlp.layers().size();
    }
  }

  /// Fits every standardizer on the (imputed) training rows.
  void fit_standardizers(const Matrix& x) {
    for (auto& b : branches_)
      b.mlp.norm() = Standardizer::fit(
          x.middleCols(static_cast<Eigen::Index>(b.range.offset), static_cast<Eigen::Index>(b.range.size)));
    if (passthrough_)
      passthrough_norm_ = Standardizer::fit(
          x.middleCols(static_cast<Eigen::Index>(passthrough_->offset), static_cast<Eigen::Index>(passthrough_->size)));
  }

  void init(std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x1417));
    for (auto& b : branches_) b.mlp.init(rng);
    if (primary_) primary_->init(rng);
  }

 private:
  std::vector<Branch> branches_;
  std::optional<FeatureRange> passthrough_;
  Standardizer passthrough_norm_;
  std::optional<Mlp> primary_;
  std::size_t input_width_ = kNumFeatures;
};

using SherlockModel = MultiInputNet;

/// Three compressing subnetworks (chars, words, paragraph) whose outputs join
/// the global statistics as input of the primary network.
inline MultiInputNet make_sherlock_network(const TrainingConfig& config) {
  const auto& s = config.shape;
  MultiInputNet net;
  const auto add = [&](FeatureFamily f, std::size_t hidden) {
    const auto r = family_range(f);
    net.branches().push_back({r, Mlp(r.size, {hidden, hidden}, s.num_classes, config.dropout)});
  };
  add(FeatureFamily::Chars, s.chars_hidden);
  add(FeatureFamily::Words, s.words_hidden);
  add(FeatureFamily::Paragraph, s.paragraph_hidden);
  net.passthrough() = family_range(FeatureFamily::Stats);
  net.passthrough_norm() = Standardizer::identity(kNumStatsFeatures);
  const std::size_t joined = 3 * s.num_classes + kNumStatsFeatures;
  net.primary() = Mlp(joined, {s.primary_hidden, s.primary_hidden}, s.num_classes, config.dropout);
  net.init(config.seed);
  return net;
}

/// One feature family on its own. Chars/words/paragraph reuse their subnet
/// shape with the 78-unit output as logits; stats get a plain two-hidden-layer
/// network of the primary width.
inline MultiInputNet make_isolated_network(FeatureFamily family, const TrainingConfig& config) {
  const auto& s = config.shape;
  const auto r = family_range(family);
  std::size_t hidden = s.primary_hidden;
  switch (family) {
    case FeatureFamily::Chars: hidden = s.chars_hidden; break;
    case FeatureFamily::Words: hidden = s.words_hidden; break;
    case FeatureFamily::Paragraph: hidden = s.paragraph_hidden; break;
    case FeatureFamily::Stats: break;
  }
  MultiInputNet net;
  net.branches().push_back({r, Mlp(r.size, {hidden, hidden}, s.num_classes, config.dropout)});
  net.init(config.seed);
  return net;
}

inline RowVector softmax_row(const Eigen::Ref<const RowVector>& z) {
  const double m = z.maxCoeff();
  RowVector e = (z.array() - m).exp();
  return e / e.sum();
}

/// Mean cross-entropy of a batch plus 0.5 * decay * sum of squared weights.
/// Writes d(loss)/d(logits) into `grad_logits` when non-null.
inline double softmax_cross_entropy(const Matrix& logits, std::span<const int> labels, Matrix* grad_logits) {
  const auto n = logits.rows();
  double loss = 0.0;
  if (grad_logits) grad_logits->resize(n, logits.cols());
  for (Eigen::Index i = 0; i < n; ++i) {
    const double m = logits.row(i).maxCoeff();
    const double lse = m + std::log((logits.row(i).array() - m).exp().sum());
    const auto y = static_cast<Eigen::Index>(labels[static_cast<std::size_t>(i)]);
    loss += lse - logits(i, y);
    if (grad_logits) {
      grad_logits->row(i) = (logits.row(i).array() - lse).exp();
      (*grad_logits)(i, y) -= 1.0;
    }
  }
  if (grad_logits) *grad_logits /= static_cast<double>(n);
  return loss / static_cast<double>(n);
}

inline double weight_penalty(const MultiInputNet& net, double decay) {
  if (decay == 0.0) return 0.0;
  double s = 0.0;
  for (const Dense* d : net.dense_layers()) s += d->weights.squaredNorm();
  return 0.5 * decay * s;
}

/// Loss of a batch and its gradient for every dense layer. `dropout_rng`
/// non-null enables dropout; the same seed reproduces the same masks.
inline double loss_and_gradients(const MultiInputNet& net, const Matrix& x, std::span<const int> labels,
                                 double weight_decay, Rng* dropout_rng, std::vector<Dense>& grads) {
  MultiInputNet::Cache cache;
  const Matrix z = net.logits(x, &cache, dropout_rng);
  Matrix gz;
  const double loss = softmax_cross_entropy(z, labels, &gz) + weight_penalty(net, weight_decay);
  grads = net.zero_gradients();
  net.backward(cache, gz, grads);
  if (weight_decay != 0.0) {
    const auto layers = net.dense_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) grads[l].weights += weight_decay * layers[l]->weights;
  }
  return loss;
}

inline Matrix gather_rows(const FeatureMatrix& m, std::span<const std::size_t> rows) {
  Matrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(m.cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto r = m.row(rows[i]);
    std::copy(r.begin(), r.end(), x.row(static_cast<Eigen::Index>(i)).data());
  }
  return x;
}

inline Matrix to_matrix(const FeatureMatrix& m) {
  return Eigen::Map<const Matrix>(m.values.data(), static_cast<Eigen::Index>(m.rows), static_cast<Eigen::Index>(m.cols));
}

/// Adam over a list of dense layers.
class Adam {
 public:
  explicit Adam(const MultiInputNet& net, double lr, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8)
      : lr_(lr), b1_(beta1), b2_(beta2), eps_(eps), m_(net.zero_gradients()), v_(net.zero_gradients()) {}

  void step(MultiInputNet& net, const std::vector<Dense>& grads) {
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    const auto layers = net.dense_layers();
    for (std::size_t l = 0; l < layers.size(); ++l) {
      update(layers[l]->weights.array(), grads[l].weights.array(), m_[l].weights.array(), v_[l].weights.array(), c1, c2);
      update(layers[l]->bias.array(), grads[l].bias.array(), m_[l].bias.array(), v_[l].bias.array(), c1, c2);
    }
  }

 private:
  template <class P, class G, class M, class V>
  void update(P&& p, const G& g, M&& m, V&& v, double c1, double c2) {
    m = b1_ * m + (1.0 - b1_) * g;
    v = b2_ * v + (1.0 - b2_) * g.square();
    p -= lr_ * (m / c1) / ((v / c2).sqrt() + eps_);
  }

  double lr_, b1_, b2_, eps_;
  std::size_t t_ = 0;
  std::vector<Dense> m_, v_;
};

struct EpochLog {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double val_accuracy = 0.0;
};

struct TrainResult {
  MultiInputNet model;
  std::vector<EpochLog> history;
  std::size_t best_epoch = 0;
};

inline std::vector<int> checked_labels(const FeatureMatrix& m, std::size_t num_classes) {
  for (int l : m.labels)
    if (l < 0 || static_cast<std::size_t>(l) >= num_classes) throw DataError("training rows need labels in range");
  return m.labels;
}

/// Cross-entropy (no penalty) and accuracy over a whole matrix, in chunks.
inline std::pair<double, double> evaluate_loss(const MultiInputNet& net, const FeatureMatrix& m) {
  if (m.rows == 0) return {0.0, 0.0};
  const std::size_t chunk = 512;
  double loss = 0.0;
  std::size_t correct = 0;
  std::vector<std::size_t> rows;
  for (std::size_t b = 0; b < m.rows; b += chunk) {
    rows.clear();
    for (std::size_t i = b; i < std::min(m.rows, b + chunk); ++i) rows.push_back(i);
    const Matrix z = net.logits(gather_rows(m, rows), nullptr, nullptr);
    std::span<const int> labels(m.labels.data() + b, rows.size());
    loss += softmax_cross_entropy(z, labels, nullptr) * static_cast<double>(rows.size());
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      Eigen::Index arg = 0;
      z.row(i).maxCoeff(&arg);
      if (arg == labels[static_cast<std::size_t>(i)]) ++correct;
    }
  }
  return {loss / static_cast<double>(m.rows), static_cast<double>(correct) / static_cast<double>(m.rows)};
}

/// Mini-batch Adam on cross-entropy + L2 weight decay with early stopping on
/// validation loss (an empty validation matrix falls back to training loss).
/// The best-epoch weights are returned. `log` receives one JSON object per epoch.
inline TrainResult train_network(MultiInputNet net, const FeatureMatrix& train, const FeatureMatrix& val,
                                 const TrainingConfig& config, std::ostream* log = nullptr) {
  if (train.rows == 0) throw DataError("training matrix is empty");
  if (train.cols != net.input_width() || (val.rows && val.cols != net.input_width()))
    throw DataError("training matrix width does not match the network");
  if (!(config.learning_rate > 0.0) || config.batch_size == 0 || config.epochs == 0 || !(config.dropout >= 0.0 && config.dropout < 1.0) ||
      config.weight_decay < 0.0)
    throw Error("invalid training configuration");
  for (double v : train.values)
    if (!std::isfinite(v)) throw DataError("training matrix must be imputed (non-finite value found)");
  const auto labels = checked_labels(train, net.num_classes());
  if (val.rows) checked_labels(val, net.num_classes());

  net.fit_standardizers(to_matrix(train));
  Adam adam(net, config.learning_rate);
  Rng order_rng(derive_seed(config.seed, 1));
  Rng dropout_rng(derive_seed(config.seed, 2));

  TrainResult result;
  std::vector<std::size_t> order(train.rows);
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::vector<int> batch_labels;
  std::vector<Dense> grads;
  double best = std::numeric_limits<double>::infinity();
  MultiInputNet best_net = net;
  std::size_t stale = 0;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    shuffle(order.begin(), order.end(), order_rng);
    double epoch_loss = 0.0;
    std::size_t batch_no = 0;
    for (std::size_t b = 0; b < order.size(); b += config.batch_size, ++batch_no) {
      std::span<const std::size_t> rows(order.data() + b, std::min(config.batch_size, order.size() - b));
      batch_labels.clear();
      for (auto r : rows) batch_labels.push_back(labels[r]);
      const double loss = loss_and_gradients(net, gather_rows(train, rows), batch_labels, config.weight_decay, &dropout_rng, grads);
      if (!std::isfinite(loss))
        throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch_no));
      epoch_loss += loss * static_cast<double>(rows.size());
      adam.step(net, grads);
    }
    EpochLog entry;
    entry.epoch = epoch;
    entry.train_loss = epoch_loss / static_cast<double>(train.rows);
    const auto [vl, va] = evaluate_loss(net, val.rows ? val : train);
    entry.val_loss = vl;
    entry.val_accuracy = va;
    if (!std::isfinite(vl)) throw TrainingError("non-finite validation loss at epoch " + std::to_string(epoch));
    result.history.push_back(entry);
    if (log) {
      *log << nlohmann::json{{"epoch", entry.epoch}, {"train_loss", entry.train_loss}, {"val_loss", entry.val_loss},
                             {"val_accuracy", entry.val_accuracy}}.dump()
           << '\n';
    }
    if (vl < best) {
      best = vl;
      best_net = net;
      result.best_epoch = epoch;
      stale = 0;
    } else if (++stale >= config.patience) {
      break;
    }
  }
  result.model = std::move(best_net);
  return result;
}

inline TrainResult train_sherlock(const FeatureMatrix& train, const FeatureMatrix& val, const TrainingConfig& config,
                                  std::ostream* log = nullptr) {
  return train_network(make_sherlock_network(config), train, val, config, log);
}

inline std::vector<double> predict_proba(const MultiInputNet& model, std::span<const double> features) {
  if (features.size() != model.input_width())
    throw DataError("feature vector has length " + std::to_string(features.size()) + ", expected " +
                    std::to_string(model.input_width()));
  Matrix x(1, static_cast<Eigen::Index>(features.size()));
  std::copy(features.begin(), features.end(), x.data());
  const RowVector p = softmax_row(model.logits(x, nullptr, nullptr).row(0));
  return {p.data(), p.data() + p.size()};
}

/// Row-wise probabilities for a whole matrix.
inline std::vector<std::vector<double>> predict_proba(const MultiInputNet& model, const FeatureMatrix& m) {
  std::vector<std::vector<double>> out;
  out.reserve(m.rows);
  std::vector<std::size_t> rows;
  for (std::size_t b = 0; b < m.rows; b += 512) {
    rows.clear();
    for (std::size_t i = b; i < std::min(m.rows, b + 512); ++i) rows.push_back(i);
    const Matrix z = model.logits(gather_rows(m, rows), nullptr, nullptr);
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
      const RowVector p = softmax_row(z.row(i));
      out.emplace_back(p.data(), p.data() + p.size());
    }
  }
  return out;
}

/// Argmax with ties to the smaller index.
inline ScoredPrediction argmax(std::span<const double> probabilities) {
  ScoredPrediction best{0, probabilities.empty() ? 0.0 : probabilities[0]};
  for (std::size_t c = 1; c < probabilities.size(); ++c)
    if (probabilities[c] > best.confidence) best = {static_cast<int>(c), probabilities[c]};
  return best;
}

struct Prediction {
  std::optional<SemanticType> type;  // empty when rejected
  double confidence = 0.0;
  bool rejected = false;
};

inline Prediction decide(std::span<const double> probabilities, std::optional<double> reject_below) {
  const auto best = argmax(probabilities);
  Prediction p;
  p.confidence = best.confidence;
  if (reject_below && best.confidence < *reject_below) {
    p.rejected = true;
    return p;
  }
  p.type = SemanticType{best.label};
  return p;
}

inline Prediction predict(const MultiInputNet& model, std::span<const double> features,
                          std::optional<double> reject_below = std::nullopt) {
  return decide(predict_proba(model, features), reject_below);
}

struct IsolatedResult {
  MultiInputNet model;
  double test_f1 = 0.0;
};

/// Trains one feature family alone and scores it on the test rows.
inline IsolatedResult train_subnet_isolated(FeatureFamily family, const FeatureMatrix& train, const FeatureMatrix& val,
                                            const FeatureMatrix& test, const TrainingConfig& config,
                                            std::ostream* log = nullptr) {
  auto trained = train_network(make_isolated_network(family, config), train, val, config, log);
  IsolatedResult r;
  r.model = std::move(trained.model);
  if (test.rows) {
    std::vector<int> preds;
    for (const auto& p : predict_proba(r.model, test)) preds.push_back(argmax(p).label);
    r.test_f1 = weighted_f1(preds, test.labels, r.model.num_classes());
  }
  return r;
}

}  // namespace sherlock::nn
