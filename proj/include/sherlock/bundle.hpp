#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "sherlock/container.hpp"
#include "sherlock/feature_paragraph.hpp"
#include "sherlock/feature_words.hpp"
#include "sherlock/matching.hpp"
#include "sherlock/nn.hpp"
#include "sherlock/pipeline.hpp"
#include "sherlock/trees.hpp"

namespace sherlock {

enum class ModelKind { NeuralNet, Tree, Forest, Dictionary, Regex };

inline std::string_view kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::NeuralNet: return "nn";
    case ModelKind::Tree: return "tree";
    case ModelKind::Forest: return "forest";
    case ModelKind::Dictionary: return "dictionary";
    case ModelKind::Regex: return "regex";
  }
  return "";
}

inline ModelKind parse_kind(std::string_view s) {
  for (auto k : {ModelKind::NeuralNet, ModelKind::Tree, ModelKind::Forest, ModelKind::Dictionary, ModelKind::Regex})
    if (kind_name(k) == s) return k;
  throw DataError("unknown model kind '" + std::string(s) + "'");
}

inline bool uses_features(ModelKind k) { return k == ModelKind::NeuralNet || k == ModelKind::Tree || k == ModelKind::Forest; }

/// Fitted preprocessing shared by the feature-based models.
struct FeatureState {
  Imputer imputer;
  ParagraphVectorModel paragraphs;
};

/// A trained model of any kind plus whatever it needs at prediction time.
struct ModelBundle {
  ModelKind kind = ModelKind::NeuralNet;
  std::optional<FeatureState> features;
  std::optional<nn::MultiInputNet> net;
  std::optional<trees::DecisionTree> tree;
  std::optional<trees::RandomForest> forest;
  std::optional<matching::DictionaryModel> dictionary;
  std::optional<matching::RegexRuleSet> regex;
  nlohmann::json hyperparameters = nlohmann::json::object();
  std::uint64_t seed = 0;
  // Sampling for the matching models.
  std::size_t sample_size = 1000;
};

namespace detail {

inline void put_mlp(io::ModelContainer& c, nlohmann::json& meta, const std::string& prefix, const nn::Mlp& mlp) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
    const auto& d = mlp.layers()[l];
    layers.push_back({d.fan_in(), d.fan_out()});
    c.put(prefix + ".l" + std::to_string(l) + ".w", {d.weights.data(), d.weights.data() + d.weights.size()});
    c.put(prefix + ".l" + std::to_string(l) + ".b", {d.bias.data(), d.bias.data() + d.bias.size()});
  }
  c.put(prefix + ".norm.mean", {mlp.norm().mean.data(), mlp.norm().mean.data() + mlp.norm().mean.size()});
  c.put(prefix + ".norm.inv_std", {mlp.norm().inv_std.data(), mlp.norm().inv_std.data() + mlp.norm().inv_std.size()});
  meta = {{"layers", layers}, {"dropout", mlp.dropout()}};
}

inline void copy_into(const std::vector<double>& src, double* dst, std::size_t n, const std::string& what) {
  if (src.size() != n) throw DataError("model section '" + what + "' has the wrong size");
  std::copy(src.begin(), src.end(), dst);
}

inline nn::Mlp get_mlp(const io::ModelContainer& c, const nlohmann::json& meta, const std::string& prefix) {
  const auto& layers = meta.at("layers");
  if (layers.empty()) throw DataError("network layer list is empty");
  std::vector<std::size_t> hidden;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) hidden.push_back(layers[l].at(1).get<std::size_t>());
  nn::Mlp mlp(layers.front().at(0).get<std::size_t>(), hidden, layers.back().at(1).get<std::size_t>(),
              meta.at("dropout").get<double>());
  for (std::size_t l = 0; l < mlp.layers().size(); ++l) {
    auto& d = mlp.layers()[l];
    if (d.fan_in() != layers[l].at(0).get<std::size_t>()) throw DataError("inconsistent layer shapes in model file");
    const std::string p = prefix + ".l" + std::to_string(l);
    copy_into(c.doubles(p + ".w"), d.weights.data(), static_cast<std::size_t>(d.weights.size()), p + ".w");
    copy_into(c.doubles(p + ".b"), d.bias.data(), static_cast<std::size_t>(d.bias.size()), p + ".b");
  }
  auto& norm = mlp.norm();
  const auto& mean = c.doubles(prefix + ".norm.mean");
  const auto& inv = c.doubles(prefix + ".norm.inv_std");
  if (mean.size() != mlp.input_dim() || inv.size() != mlp.input_dim()) throw DataError("bad normalization section");
  norm.mean = Eigen::Map<const nn::RowVector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  norm.inv_std = Eigen::Map<const nn::RowVector>(inv.data(), static_cast<Eigen::Index>(inv.size()));
  return mlp;
}

inline nlohmann::json range_json(FeatureRange r) { return {{"offset", r.offset}, {"size", r.size}}; }
inline FeatureRange range_from(const nlohmann::json& j) {
  FeatureRange r{j.at("offset").get<std::size_t>(), j.at("size").get<std::size_t>()};
  if (r.offset + r.size > kNumFeatures) throw DataError("feature range outside the schema");
  return r;
}

inline void put_net(io::ModelContainer& c, const nn::MultiInputNet& net) {
  nlohmann::json meta;
  meta["input_width"] = net.input_width();
  meta["branches"] = nlohmann::json::array();
  for (std::size_t b = 0; b < net.branches().size(); ++b) {
    nlohmann::json m;
    put_mlp(c, m, "net.branch" + std::to_string(b), net.branches()[b].mlp);
    m["range"] = range_json(net.branches()[b].range);
    meta["branches"].push_back(m);
  }
  if (net.passthrough()) {
    meta["passthrough"] = range_json(*net.passthrough());
    const auto& n = net.passthrough_norm();
    c.put("net.pass.mean", {n.mean.data(), n.mean.data() + n.mean.size()});
    c.put("net.pass.inv_std", {n.inv_std.data(), n.inv_std.data() + n.inv_std.size()});
  }
  if (net.primary()) {
    nlohmann::json m;
    put_mlp(c, m, "net.primary", *net.primary());
    meta["primary"] = m;
  }
  c.metadata["network"] = meta;
}

inline nn::MultiInputNet get_net(const io::ModelContainer& c) {
  const auto& meta = c.metadata.at("network");
  nn::MultiInputNet net;
  net.set_input_width(meta.at("input_width").get<std::size_t>());
  const auto& branches = meta.at("branches");
  for (std::size_t b = 0; b < branches.size(); ++b)
    net.branches().push_back({range_from(branches[b].at("range")), get_mlp(c, branches[b], "net.branch" + std::to_string(b))});
  if (meta.contains("passthrough")) {
    net.passthrough() = range_from(meta["passthrough"]);
    const auto& mean = c.doubles("net.pass.mean");
    const auto& inv = c.doubles("net.pass.inv_std");
    if (mean.size() != net.passthrough()->size || inv.size() != mean.size()) throw DataError("bad passthrough section");
    net.passthrough_norm().mean = Eigen::Map<const nn::RowVector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
    net.passthrough_norm().inv_std = Eigen::Map<const nn::RowVector>(inv.data(), static_cast<Eigen::Index>(inv.size()));
  }
  if (meta.contains("primary")) net.primary() = get_mlp(c, meta["primary"], "net.primary");
  if (net.branches().empty() && !net.primary()) throw DataError("network has no layers");
  return net;
}

inline void put_paragraphs(io::ModelContainer& c, const ParagraphVectorModel& pv) {
  const auto& p = pv.params();
  c.metadata["paragraph_vectors"] = {{"dimension", p.dimension}, {"epochs", p.epochs}, {"window", p.window},
                                     {"negative", p.negative},   {"alpha", p.alpha},   {"min_alpha", p.min_alpha},
                                     {"min_count", p.min_count}, {"seed", p.seed}};
  c.put_bytes("pv.tokens", nlohmann::json(pv.tokens()).dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
  c.put("pv.counts", pv.token_counts());
  c.put("pv.output", pv.output_weights());
}

inline ParagraphVectorModel get_paragraphs(const io::ModelContainer& c) {
  const auto& m = c.metadata.at("paragraph_vectors");
  ParagraphVectorParams p;
  p.dimension = m.at("dimension").get<std::size_t>();
  p.epochs = m.at("epochs").get<std::size_t>();
  p.window = m.at("window").get<std::size_t>();
  p.negative = m.at("negative").get<std::size_t>();
  p.alpha = m.at("alpha").get<double>();
  p.min_alpha = m.at("min_alpha").get<double>();
  p.min_count = m.at("min_count").get<std::size_t>();
  p.seed = m.at("seed").get<std::uint64_t>();
  auto tokens = nlohmann::json::parse(c.bytes("pv.tokens")).get<std::vector<std::string>>();
  return ParagraphVectorModel::restore(p, std::move(tokens), c.doubles("pv.counts"), c.doubles("pv.output"));
}

}  // namespace detail

inline io::ModelContainer to_container(const ModelBundle& b) {
  io::ModelContainer c;
  c.metadata["format"] = "sherlock-model";
  c.metadata["model"] = std::string(kind_name(b.kind));
  c.metadata["types"] = std::vector<std::string>(kTypeNames.begin(), kTypeNames.end());
  c.metadata["hyperparameters"] = b.hyperparameters;
  c.metadata["seed"] = b.seed;
  c.metadata["sample_size"] = b.sample_size;
  if (uses_features(b.kind)) {
    if (!b.features) throw Error("feature-based model bundle lacks its feature state");
    c.put("imputer.means", b.features->imputer.means());
    detail::put_paragraphs(c, b.features->paragraphs);
  }
  switch (b.kind) {
    case ModelKind::NeuralNet:
      detail::put_net(c, b.net.value());
      break;
    case ModelKind::Tree:
      c.put("tree", trees::serialize(b.tree.value()));
      break;
    case ModelKind::Forest: {
      const auto& f = b.forest.value();
      c.metadata["trees"] = f.trees().size();
      for (std::size_t t = 0; t < f.trees().size(); ++t) c.put("forest.tree" + std::to_string(t), trees::serialize(f.trees()[t]));
      break;
    }
    case ModelKind::Dictionary:
      c.put_bytes("dictionary", b.dictionary.value().to_json().dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
      break;
    case ModelKind::Regex:
      c.put_bytes("regex", b.regex.value().to_json().dump());
      break;
  }
  return c;
}

inline ModelBundle from_container(const io::ModelContainer& c) {
  ModelBundle b;
  try {
    if (c.metadata.value("format", "") != "sherlock-model") throw DataError("model file has an unknown format tag");
    const auto types = c.metadata.at("types").get<std::vector<std::string>>();
    if (types.size() != kNumTypes || !std::equal(types.begin(), types.end(), kTypeNames.begin()))
      throw SchemaMismatch("model was trained on a different type vocabulary");
    b.kind = parse_kind(c.metadata.at("model").get<std::string>());
    b.hyperparameters = c.metadata.value("hyperparameters", nlohmann::json::object());
    b.seed = c.metadata.value("seed", std::uint64_t{0});
    b.sample_size = c.metadata.value("sample_size", std::size_t{1000});
    if (uses_features(b.kind)) {
      FeatureState fs;
      fs.imputer = Imputer(c.doubles("imputer.means"));
      if (fs.imputer.means().size() != kNumFeatures) throw DataError("imputer has the wrong width");
      fs.paragraphs = detail::get_paragraphs(c);
      b.features = std::move(fs);
    }
    switch (b.kind) {
      case ModelKind::NeuralNet:
        b.net = detail::get_net(c);
        break;
      case ModelKind::Tree:
        b.tree = trees::deserialize_tree(c.doubles("tree"));
        break;
      case ModelKind::Forest: {
        std::vector<trees::DecisionTree> ts;
        const auto n = c.metadata.at("trees").get<std::size_t>();
        for (std::size_t t = 0; t < n; ++t) ts.push_back(trees::deserialize_tree(c.doubles("forest.tree" + std::to_string(t))));
        if (ts.empty()) throw DataError("forest has no trees");
        b.forest = trees::RandomForest(std::move(ts));
        break;
      }
      case ModelKind::Dictionary:
        b.dictionary = matching::DictionaryModel::from_json(nlohmann::json::parse(c.bytes("dictionary")));
        break;
      case ModelKind::Regex:
        b.regex = matching::RegexRuleSet::from_json(nlohmann::json::parse(c.bytes("regex")));
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("model metadata is malformed: ") + e.what());
  }
  return b;
}

/// Stand-alone paragraph vector model file (same container format).
inline void save_paragraph_model(const std::string& path, const ParagraphVectorModel& pv) {
  io::ModelContainer c;
  c.metadata["format"] = "sherlock-paragraph-vectors";
  detail::put_paragraphs(c, pv);
  c.save(path);
}

inline ParagraphVectorModel load_paragraph_model(const std::string& path) {
  const auto c = io::ModelContainer::load(path);
  try {
    if (c.metadata.value("format", "") != "sherlock-paragraph-vectors" && c.metadata.value("format", "") != "sherlock-model")
      throw DataError(path + " is not a paragraph vector file");
    return detail::get_paragraphs(c);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("paragraph vector metadata is malformed: ") + e.what());
  }
}

inline void save_bundle(const std::string& path, const ModelBundle& b) { to_container(b).save(path); }
inline ModelBundle load_bundle(const std::string& path) { return from_container(io::ModelContainer::load(path)); }

/// Label and confidence from an imputed feature row (feature-based kinds).
inline ScoredPrediction score_features(const ModelBundle& b, std::span<const double> row) {
  switch (b.kind) {
    case ModelKind::NeuralNet:
      return nn::argmax(nn::predict_proba(*b.net, row));
    case ModelKind::Tree: {
      const auto p = b.tree->predict_proba(row);
      const int label = b.tree->predict(row);
      return {label, p[static_cast<std::size_t>(label)]};
    }
    case ModelKind::Forest: {
      const auto p = b.forest->predict_proba(row);
      const int label = b.forest->predict(row);
      return {label, p[static_cast<std::size_t>(label)]};
    }
    default:
      throw Error("model kind '" + std::string(kind_name(b.kind)) + "' does not consume feature vectors");
  }
}

/// Raw (un-imputed) feature vector for `column` using the bundle's fitted state.
inline FeatureVector bundle_features(const ModelBundle& b, const Column& column, const WordVectorTable& words) {
  auto v = assemble_features(column, words, b.features->paragraphs);
  b.features->imputer.apply(v);
  return v;
}

/// Classifies a raw column. Matching models report the winner's share of the
/// sampled values as confidence (0 when abstaining). `words` may be null for
/// matching models.
inline ScoredPrediction score_column(const ModelBundle& b, const Column& column, const WordVectorTable* words,
                                     std::uint64_t seed = 0) {
  if (uses_features(b.kind)) {
    if (!words) throw Error("feature-based models need a word vector table");
    return score_features(b, bundle_features(b, column, *words));
  }
  const auto vote = b.kind == ModelKind::Dictionary ? b.dictionary->vote(column, b.sample_size, seed)
                                                    : b.regex->vote(column, b.sample_size, seed);
  ScoredPrediction p{vote.label, 0.0};
  if (vote.label != kAbstain && vote.sampled)
    p.confidence = static_cast<double>(vote.votes[static_cast<std::size_t>(vote.label)]) / static_cast<double>(vote.sampled);
  return p;
}

}  // namespace sherlock
