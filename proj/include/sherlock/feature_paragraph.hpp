#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sherlock/column.hpp"
#include "sherlock/error.hpp"
#include "sherlock/random.hpp"
#include "sherlock/text.hpp"

namespace sherlock {

inline constexpr std::size_t kParagraphDim = 400;

struct ParagraphVectorParams {
  std::size_t dimension = kParagraphDim;
  std::size_t epochs = 20;
  std::size_t window = 5;
  std::size_t negative = 5;
  double alpha = 0.025;
  double min_alpha = 0.0001;
  std::size_t min_count = 2;
  std::uint64_t seed = 0;
};

/// Cell value as a paragraph "word": trimmed and case-folded; empty cells have no token.
inline std::string value_token(std::string_view value) { return to_lower(trim(value)); }

/// Distributed bag-of-words paragraph vectors: each column is a paragraph,
/// each cell value a word. Paragraph vectors are trained to predict their own
/// cell values against unigram^0.75 negative samples.
class ParagraphVectorModel {
 public:
  ParagraphVectorModel() = default;

  const ParagraphVectorParams& params() const { return params_; }
  std::size_t dimension() const { return params_.dimension; }
  std::size_t vocab_size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }
  const std::vector<double>& token_counts() const { return counts_; }
  /// |vocab| x dimension, row-major.
  const std::vector<double>& output_weights() const { return output_; }
  /// (training columns) x dimension, row-major.
  const std::vector<double>& paragraph_vectors() const { return paragraphs_; }
  std::span<const double> paragraph_vector(std::size_t i) const {
    return {paragraphs_.data() + i * dimension(), dimension()};
  }
  /// Mean negative-sampling loss per positive example, one entry per epoch.
  const std::vector<double>& epoch_losses() const { return epoch_losses_; }

  /// -1 if the token is not in the vocabulary.
  std::int64_t token_index(const std::string& token) const {
    auto it = index_.find(token);
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
  }

  /// Rebuilds a model from persisted parts (inference only).
  static ParagraphVectorModel restore(ParagraphVectorParams params, std::vector<std::string> tokens,
                                      std::vector<double> counts, std::vector<double> output_weights) {
    if (counts.size() != tokens.size() || output_weights.size() != tokens.size() * params.dimension)
      throw DataError("paragraph vector model: inconsistent sizes");
    ParagraphVectorModel m;
    m.params_ = params;
    m.tokens_ = std::move(tokens);
    m.counts_ = std::move(counts);
    m.output_ = std::move(output_weights);
    m.build_index();
    return m;
  }

  static ParagraphVectorModel train(std::span<const Column> columns, const ParagraphVectorParams& params) {
    if (columns.size() < 2) throw Error("paragraph vectors: need at least 2 training columns");
    if (params.dimension == 0 || params.epochs == 0 || params.window == 0)
      throw Error("paragraph vectors: dimension, epochs and window must be positive");
    ParagraphVectorModel m;
    m.params_ = params;

    std::unordered_map<std::string, std::size_t> freq;
    for (const auto& col : columns)
      for (const auto& v : col.values) {
        auto tok = value_token(v);
        if (!tok.empty()) ++freq[tok];
      }
    std::vector<std::pair<std::string, std::size_t>> kept;
    for (auto& [tok, count] : freq)
      if (count >= params.min_count) kept.emplace_back(tok, count);
    if (kept.empty()) throw DataError("paragraph vectors: empty vocabulary");
    std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
      return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    for (auto& [tok, count] : kept) {
      m.tokens_.push_back(tok);
      m.counts_.push_back(static_cast<double>(count));
    }
    m.build_index();

    const std::size_t dim = params.dimension;
    m.output_.assign(m.tokens_.size() * dim, 0.0);
    m.paragraphs_.resize(columns.size() * dim);
    Rng rng(params.seed);
    for (double& x : m.paragraphs_) x = (uniform01(rng) - 0.5) / static_cast<double>(dim);

    std::vector<std::vector<std::uint32_t>> docs(columns.size());
    std::size_t total = 0;
    for (std::size_t d = 0; d < columns.size(); ++d) {
      docs[d] = m.encode(columns[d]);
      total += docs[d].size();
    }
    const double total_steps = static_cast<double>(std::max<std::size_t>(1, total * params.epochs));

    std::vector<double> scratch(dim);
    std::vector<std::uint32_t> order;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < params.epochs; ++epoch) {
      double loss = 0.0;
      std::size_t examples = 0;
      for (std::size_t d = 0; d < docs.size(); ++d) {
        m.window_order(docs[d], rng, order);
        std::span<double> doc(m.paragraphs_.data() + d * dim, dim);
        for (auto target : order) {
          const double a = m.learning_rate(static_cast<double>(step++) / total_steps);
          loss += m.sgd_step(doc, target, a, m.output_.data(), rng, scratch);
          ++examples;
        }
      }
      m.epoch_losses_.push_back(examples ? loss / static_cast<double>(examples) : 0.0);
    }
    return m;
  }

  /// Starting point for inference; also the result for columns with no
  /// in-vocabulary values.
  std::vector<double> initial_vector(std::uint64_t seed = 0) const {
    Rng rng(inference_seed(seed));
    std::vector<double> v(dimension());
    for (double& x : v) x = (uniform01(rng) - 0.5) / static_cast<double>(dimension());
    return v;
  }

  /// Fits a fresh paragraph vector for `column` with the output weights frozen.
  std::vector<double> infer(const Column& column, std::uint64_t seed = 0) const {
    Rng rng(inference_seed(seed));
    std::vector<double> v(dimension());
    for (double& x : v) x = (uniform01(rng) - 0.5) / static_cast<double>(dimension());
    const auto doc = encode(column);
    if (doc.empty() || tokens_.empty()) return v;
    const double total_steps = static_cast<double>(doc.size() * params_.epochs);
    std::vector<double> scratch(dimension());
    std::vector<std::uint32_t> order;
    std::size_t step = 0;
    for (std::size_t epoch = 0; epoch < params_.epochs; ++epoch) {
      window_order(doc, rng, order);
      for (auto target : order) {
        const double a = learning_rate(static_cast<double>(step++) / total_steps);
        sgd_step(v, target, a, nullptr, rng, scratch);
      }
    }
    return v;
  }

 private:
  std::uint64_t inference_seed(std::uint64_t seed) const { return derive_seed(params_.seed, 0x1F5Eull + seed); }

  double learning_rate(double progress) const {
    return params_.alpha - (params_.alpha - params_.min_alpha) * std::min(1.0, progress);
  }

  void build_index() {
    index_.clear();
    for (std::size_t i = 0; i < tokens_.size(); ++i) index_.emplace(tokens_[i], static_cast<std::uint32_t>(i));
    noise_cdf_.resize(counts_.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < counts_.size(); ++i) {
      acc += std::pow(counts_[i], 0.75);
      noise_cdf_[i] = acc;
    }
  }

  std::vector<std::uint32_t> encode(const Column& column) const {
    std::vector<std::uint32_t> doc;
    doc.reserve(column.values.size());
    for (const auto& v : column.values) {
      auto it = index_.find(value_token(v));
      if (it != index_.end()) doc.push_back(it->second);
    }
    return doc;
  }

  // Splits the document into windows of `window` values starting at a random
  // offset and returns the targets window by window, windows in random order.
  void window_order(const std::vector<std::uint32_t>& doc, Rng& rng, std::vector<std::uint32_t>& out) const {
    out.clear();
    if (doc.empty()) return;
    const std::size_t w = params_.window;
    const std::size_t offset = static_cast<std::size_t>(uniform_index(rng, std::min(w, doc.size())));
    std::vector<std::pair<std::size_t, std::size_t>> windows;
    if (offset > 0) windows.emplace_back(0, offset);
    for (std::size_t b = offset; b < doc.size(); b += w) windows.emplace_back(b, std::min(doc.size(), b + w));
    shuffle(windows.begin(), windows.end(), rng);
    for (auto [b, e] : windows)
      for (std::size_t i = b; i < e; ++i) out.push_back(doc[i]);
  }

  std::uint32_t sample_noise(Rng& rng) const {
    const double u = uniform01(rng) * noise_cdf_.back();
    auto it = std::upper_bound(noise_cdf_.begin(), noise_cdf_.end(), u);
    if (it == noise_cdf_.end()) --it;
    return static_cast<std::uint32_t>(it - noise_cdf_.begin());
  }

  // One negative-sampling update of `doc` toward `target`; returns the loss
  // evaluated before the update. Output weights are updated only when
  // `writable_outputs` (aliasing output_) is given.
  double sgd_step(std::span<double> doc, std::uint32_t target, double alpha, double* writable_outputs, Rng& rng,
                  std::vector<double>& grad) const {
    const std::size_t dim = dimension();
    std::fill(grad.begin(), grad.end(), 0.0);
    double loss = 0.0;
    for (std::size_t k = 0; k <= params_.negative; ++k) {
      std::uint32_t word = target;
      double label = 1.0;
      if (k > 0) {
        word = sample_noise(rng);
        if (word == target) continue;
        label = 0.0;
      }
      const std::size_t row = static_cast<std::size_t>(word) * dim;
      const double* out = output_.data() + row;
      double dot = 0.0;
      for (std::size_t j = 0; j < dim; ++j) dot += doc[j] * out[j];
      const double p = 1.0 / (1.0 + std::exp(-dot));
      const double clipped = std::clamp(label > 0 ? p : 1.0 - p, 1e-12, 1.0);
      loss -= std::log(clipped);
      const double g = (label - p) * alpha;
      for (std::size_t j = 0; j < dim; ++j) grad[j] += g * out[j];
      if (writable_outputs)
        for (std::size_t j = 0; j < dim; ++j) writable_outputs[row + j] += g * doc[j];
    }
    for (std::size_t j = 0; j < dim; ++j) doc[j] += grad[j];
    return loss;
  }

  ParagraphVectorParams params_;
  std::vector<std::string> tokens_;
  std::vector<double> counts_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<double> noise_cdf_;
  std::vector<double> output_;
  std::vector<double> paragraphs_;
  std::vector<double> epoch_losses_;
};

inline ParagraphVectorModel train_pvdbow(std::span<const Column> columns, const ParagraphVectorParams& params) {
  return ParagraphVectorModel::train(columns, params);
}

inline std::vector<double> infer_paragraph_vector(const ParagraphVectorModel& model, const Column& column,
                                                  std::uint64_t seed = 0) {
  return model.infer(column, seed);
}

}  // namespace sherlock
