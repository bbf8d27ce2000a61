#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sherlock/bundle.hpp"
#include "sherlock/corpus.hpp"
#include "sherlock/csv.hpp"
#include "sherlock/eval.hpp"
#include "sherlock/pipeline.hpp"
#include "sherlock/synthetic.hpp"

namespace sherlock::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kInternal = 3 };

/// Bad or inconsistent flags detected after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

namespace detail {

namespace fs = std::filesystem;

/// Flat "key = value" lines ('#' comments) turned into "--key=value"
/// arguments. Underscores in keys map to dashes.
inline std::vector<std::string> config_arguments(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::vector<std::string> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    const auto body = trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw UsageError(path + ":" + std::to_string(no) + ": expected key=value");
    std::string key(trim(body.substr(0, eq)));
    std::replace(key.begin(), key.end(), '_', '-');
    if (key.empty()) throw UsageError(path + ":" + std::to_string(no) + ": empty key");
    out.push_back("--" + key + "=" + std::string(trim(body.substr(eq + 1))));
  }
  return out;
}

/// Removes --config from the arguments and splices its contents in right
/// after the subcommand name, so explicit flags (which come later) win.
inline std::vector<std::string> expand_config(std::vector<std::string> args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
      path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i + 2));
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }
  if (!path) return args;
  const auto extra = config_arguments(*path);
  const std::ptrdiff_t at = args.empty() ? 0 : 1;
  args.insert(args.begin() + at, extra.begin(), extra.end());
  return args;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path);
  return out;
}

inline Corpus read_table(const std::string& path, bool header) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open table: " + path);
  const auto rows = csv::read(in);
  if (rows.empty()) throw DataError("table is empty: " + path);
  std::size_t width = 0;
  for (const auto& r : rows) width = std::max(width, r.size());
  Corpus c;
  c.columns.resize(width);
  for (std::size_t i = header ? 1 : 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) c.columns[j].values.push_back(rows[i][j]);
  if (header)
    for (std::size_t j = 0; j < rows[0].size(); ++j) c.columns[j].source_header = rows[0][j];
  for (std::size_t j = 0; j < width; ++j)
    if (c.columns[j].values.empty()) throw DataError("table column " + std::to_string(j + 1) + " has no cells");
  return c;
}

inline std::vector<int> truths_of(const Corpus& c) {
  std::vector<int> t;
  for (const auto& col : c.columns) {
    if (!col.label) throw DataError("evaluation corpus has an unlabeled column");
    t.push_back(col.label->id);
  }
  return t;
}

/// Normalized split-gain importances; a forest averages its trees.
inline std::vector<double> bundle_importances(const ModelBundle& b) {
  if (b.tree) return trees::feature_importances(*b.tree);
  std::vector<double> sum(kNumFeatures, 0.0);
  for (const auto& t : b.forest->trees()) {
    const auto imp = trees::feature_importances(t);
    for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += imp[j];
  }
  const double top = *std::max_element(sum.begin(), sum.end());
  if (top > 0.0)
    for (double& x : sum) x /= top;
  return sum;
}

inline void write_importances(std::ostream& out, const std::vector<double>& imp) {
  std::vector<std::size_t> order(imp.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return imp[a] > imp[b]; });
  const auto& schema = feature_schema();
  out << "rank,feature,score\n";
  for (std::size_t r = 0; r < order.size(); ++r)
    out << r + 1 << ',' << schema[order[r]].name << ',' << format_double(imp[order[r]]) << '\n';
}

struct Scored {
  std::vector<ScoredPrediction> scored;
  double seconds = 0.0;
};

/// Scores raw columns one by one; timing covers feature extraction.
inline Scored score_corpus(const ModelBundle& b, const Corpus& c, const WordVectorTable* words, std::uint64_t seed) {
  Scored s;
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t i = 0; i < c.columns.size(); ++i) s.scored.push_back(score_column(b, c.columns[i], words, derive_seed(seed, i)));
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

inline Scored score_matrix(const ModelBundle& b, FeatureMatrix m) {
  if (!uses_features(b.kind)) throw UsageError("model '" + std::string(kind_name(b.kind)) + "' needs --corpus, not a matrix");
  Scored s;
  const auto t0 = std::chrono::steady_clock::now();
  b.features->imputer.apply(m);
  for (std::size_t i = 0; i < m.rows; ++i) s.scored.push_back(score_features(b, m.row(i)));
  s.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

inline std::optional<WordVectorTable> maybe_words(const std::string& path, bool needed) {
  if (path.empty()) {
    if (needed) throw UsageError("--words is required for feature-based models");
    return std::nullopt;
  }
  return load_word_vectors(path);
}

}  // namespace detail

/// Entry point of the `sherlock` tool. Returns the process exit code.
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using detail::fs::path;
  CLI::App app{"Semantic type detection for table columns"};
  app.name(argc > 0 ? path(argv[0]).filename().string() : "sherlock");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  std::function<void()> action;
  std::uint64_t seed = 0;
  std::string config_unused;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--seed", seed, "Random seed")->capture_default_str();
    sub->add_option("--config", config_unused, "Flat key=value file with option defaults");
  };

  // synth
  std::string synth_dir;
  synthetic::Options synth_opt;
  {
    auto* s = app.add_subcommand("synth", "Write a synthetic labeled corpus, word vectors and regex rules");
    s->add_option("--out-dir", synth_dir, "Output directory")->required();
    s->add_option("--columns-per-type", synth_opt.columns_per_type)->capture_default_str();
    s->add_option("--min-values", synth_opt.min_values)->capture_default_str();
    s->add_option("--max-values", synth_opt.max_values)->capture_default_str();
    s->add_option("--dirty", synth_opt.dirty_fraction, "Fraction of junk cells")->capture_default_str();
    s->add_option("--overlap", synth_opt.overlap_fraction, "Fraction of cells from another type")->capture_default_str();
    common(s);
    s->callback([&] {
      action = [&] {
        synth_opt.seed = seed;
        detail::fs::create_directories(synth_dir);
        const auto corpus = synthetic::make_corpus(synth_opt);
        save_corpus((path(synth_dir) / "corpus.jsonl").string(), corpus);
        save_word_vectors((path(synth_dir) / "words.txt").string(), synthetic::make_word_vectors(seed));
        detail::open_out((path(synth_dir) / "rules.json").string()) << synthetic::regex_rules().dump(2) << '\n';
        out << nlohmann::json{{"columns", corpus.size()}, {"types", synthetic::kNumKinds}}.dump() << '\n';
      };
    });
  }

  // ingest
  std::string ingest_in, ingest_dir, ingest_words;
  FilterOptions filter;
  bool no_filter = false;
  std::vector<double> ratios{0.6, 0.2, 0.2};
  {
    auto* s = app.add_subcommand("ingest", "Filter a JSONL corpus and split it into train/val/test");
    s->add_option("--input", ingest_in, "Corpus JSONL")->required();
    s->add_option("--out-dir", ingest_dir, "Directory for train/val/test.jsonl")->required();
    s->add_option("--words", ingest_words, "Word vectors (for the vocabulary coverage filter)");
    s->add_option("--cap", filter.cap, "Max columns per type")->capture_default_str();
    s->add_option("--min-count", filter.min_count, "Min columns per type")->capture_default_str();
    s->add_option("--coverage", filter.coverage_threshold, "Max fraction of columns without a vocabulary token")
        ->capture_default_str();
    s->add_flag("--no-filter", no_filter, "Only split");
    s->add_option("--ratios", ratios, "train,val,test fractions")->delimiter(',')->expected(3)->capture_default_str();
    common(s);
    s->callback([&] {
      action = [&] {
        std::size_t dropped = 0;
        Corpus corpus = load_corpus(ingest_in, &dropped);
        const std::size_t loaded = corpus.size();
        if (!no_filter) {
          filter.seed = seed;
          WordVectorTable vocab;
          if (!ingest_words.empty())
            vocab = load_word_vectors(ingest_words);
          else if (filter.coverage_threshold < 1.0)
            throw UsageError("--words is required for the coverage filter (or pass --coverage 1 / --no-filter)");
          corpus = filter_corpus(corpus, filter, vocab);
        }
        const auto parts = split(corpus, SplitSpec{{ratios[0], ratios[1], ratios[2]}, seed});
        detail::fs::create_directories(ingest_dir);
        save_corpus((path(ingest_dir) / "train.jsonl").string(), parts.train);
        save_corpus((path(ingest_dir) / "val.jsonl").string(), parts.val);
        save_corpus((path(ingest_dir) / "test.jsonl").string(), parts.test);
        std::size_t types = 0;
        for (auto n : corpus.per_type_counts()) types += n > 0;
        out << nlohmann::json{{"loaded", loaded},       {"dropped_lines", dropped},      {"kept", corpus.size()},
                              {"types", types},         {"train", parts.train.size()}, {"val", parts.val.size()},
                              {"test", parts.test.size()}}
                   .dump()
            << '\n';
      };
    });
  }

  // features
  std::string feat_corpus, feat_words, feat_out, feat_pv, feat_fit_pv;
  ParagraphVectorParams pv_params;
  {
    auto* s = app.add_subcommand("features", "Extract the feature matrix of a corpus");
    s->add_option("--corpus", feat_corpus, "Corpus JSONL")->required();
    s->add_option("--words", feat_words, "Word vectors (50-d, GloVe text format)")->required();
    s->add_option("--out", feat_out, "Feature matrix CSV")->required();
    auto* pv = s->add_option("--pv", feat_pv, "Existing paragraph vector model");
    auto* fit = s->add_option("--fit-pv", feat_fit_pv, "Train paragraph vectors on this corpus and save them here");
    pv->excludes(fit);
    s->add_option("--pv-epochs", pv_params.epochs)->capture_default_str();
    s->add_option("--pv-window", pv_params.window)->capture_default_str();
    s->add_option("--pv-negative", pv_params.negative)->capture_default_str();
    s->add_option("--pv-min-count", pv_params.min_count)->capture_default_str();
    s->add_option("--pv-alpha", pv_params.alpha)->capture_default_str();
    common(s);
    s->callback([&] {
      action = [&] {
        if (feat_pv.empty() == feat_fit_pv.empty()) throw UsageError("give exactly one of --pv or --fit-pv");
        const auto corpus = load_corpus(feat_corpus);
        const auto words = load_word_vectors(feat_words);
        ParagraphVectorModel model;
        if (!feat_fit_pv.empty()) {
          pv_params.seed = seed;
          model = train_pvdbow(corpus.columns, pv_params);
          save_paragraph_model(feat_fit_pv, model);
        } else {
          model = load_paragraph_model(feat_pv);
        }
        save_feature_matrix(feat_out, assemble_matrix(corpus, words, model));
        out << nlohmann::json{{"rows", corpus.size()}, {"cols", kNumFeatures}, {"pv_vocabulary", model.vocab_size()}}.dump()
            << '\n';
      };
    });
  }

  // train
  std::string train_kind, train_out, train_matrix, val_matrix, train_pv, train_corpus, train_rules, train_log,
      train_importances;
  nn::TrainingConfig nn_cfg;
  trees::ForestOptions forest_opt;
  std::size_t top_k = 1000, sample_size = 1000;
  {
    auto* s = app.add_subcommand("train", "Train a model and write it to a model file");
    s->add_option("--model", train_kind, "nn | tree | forest | dictionary | regex")
        ->required()
        ->check(CLI::IsMember({"nn", "tree", "forest", "dictionary", "regex"}));
    s->add_option("--out", train_out, "Model file")->required();
    s->add_option("--train", train_matrix, "Training feature matrix CSV (nn, tree, forest)");
    s->add_option("--val", val_matrix, "Validation feature matrix CSV (nn early stopping)");
    s->add_option("--pv", train_pv, "Paragraph vector model used to build the matrices");
    s->add_option("--corpus", train_corpus, "Training corpus JSONL (dictionary)");
    s->add_option("--rules", train_rules, "JSON {type: pattern} (regex)");
    s->add_option("--learning-rate", nn_cfg.learning_rate)->capture_default_str();
    s->add_option("--epochs", nn_cfg.epochs)->capture_default_str();
    s->add_option("--batch-size", nn_cfg.batch_size)->capture_default_str();
    s->add_option("--dropout", nn_cfg.dropout)->capture_default_str();
    s->add_option("--weight-decay", nn_cfg.weight_decay)->capture_default_str();
    s->add_option("--patience", nn_cfg.patience)->capture_default_str();
    s->add_option("--chars-hidden", nn_cfg.shape.chars_hidden)->capture_default_str();
    s->add_option("--words-hidden", nn_cfg.shape.words_hidden)->capture_default_str();
    s->add_option("--paragraph-hidden", nn_cfg.shape.paragraph_hidden)->capture_default_str();
    s->add_option("--primary-hidden", nn_cfg.shape.primary_hidden)->capture_default_str();
    s->add_option("--log", train_log, "Per-epoch JSON lines (nn)");
    s->add_option("--trees", forest_opt.n_trees)->capture_default_str();
    s->add_option("--max-depth", forest_opt.max_depth)->capture_default_str();
    s->add_option("--max-features", forest_opt.max_features, "0 = all (tree) / sqrt (forest)")->capture_default_str();
    s->add_option("--importances", train_importances, "Feature importance CSV (tree, forest)");
    s->add_option("--top-k", top_k, "Values kept per type (dictionary)")->capture_default_str();
    s->add_option("--sample-size", sample_size, "Cells sampled per column (dictionary, regex)")->capture_default_str();
    common(s);
    s->callback([&] {
      action = [&] {
        ModelBundle b;
        b.kind = parse_kind(train_kind);
        b.seed = seed;
        b.sample_size = sample_size;
        nlohmann::json summary{{"model", train_kind}};
        if (uses_features(b.kind)) {
          if (train_matrix.empty() || train_pv.empty()) throw UsageError("--train and --pv are required for " + train_kind);
          FeatureMatrix train = load_feature_matrix(train_matrix);
          FeatureState state;
          state.imputer = Imputer::fit(train);
          state.paragraphs = load_paragraph_model(train_pv);
          state.imputer.apply(train);
          summary["train_rows"] = train.rows;
          if (b.kind == ModelKind::NeuralNet) {
            FeatureMatrix val;
            if (!val_matrix.empty()) {
              val = load_feature_matrix(val_matrix);
              state.imputer.apply(val);
            }
            nn_cfg.seed = seed;
            std::ofstream log;
            if (!train_log.empty()) log = detail::open_out(train_log);
            auto result = nn::train_sherlock(train, val, nn_cfg, train_log.empty() ? nullptr : &log);
            b.net = std::move(result.model);
            b.hyperparameters = {{"learning_rate", nn_cfg.learning_rate}, {"epochs", nn_cfg.epochs},
                                 {"batch_size", nn_cfg.batch_size},       {"dropout", nn_cfg.dropout},
                                 {"weight_decay", nn_cfg.weight_decay},   {"patience", nn_cfg.patience}};
            summary["best_epoch"] = result.best_epoch;
            summary["epochs_run"] = result.history.size();
            summary["best_val_loss"] = result.history.at(result.best_epoch - 1).val_loss;
          } else if (b.kind == ModelKind::Tree) {
            trees::TreeOptions opt;
            opt.max_depth = forest_opt.max_depth;
            opt.max_features = forest_opt.max_features;
            opt.seed = seed;
            b.tree = trees::train_decision_tree(train, opt);
            b.hyperparameters = {{"max_depth", opt.max_depth}, {"max_features", opt.max_features}};
            summary["depth"] = b.tree->depth();
            summary["nodes"] = b.tree->nodes().size();
          } else {
            forest_opt.seed = seed;
            b.forest = trees::train_random_forest(train, forest_opt);
            b.hyperparameters = {{"trees", forest_opt.n_trees},
                                 {"max_depth", forest_opt.max_depth},
                                 {"max_features", forest_opt.max_features}};
          }
          b.features = std::move(state);
          if (!train_importances.empty()) {
            if (b.kind == ModelKind::NeuralNet) throw UsageError("--importances applies to tree and forest models");
            auto f = detail::open_out(train_importances);
            detail::write_importances(f, detail::bundle_importances(b));
          }
        } else if (b.kind == ModelKind::Dictionary) {
          if (train_corpus.empty()) throw UsageError("--corpus is required for dictionary");
          b.dictionary = matching::build_dictionary(load_corpus(train_corpus), top_k);
          b.hyperparameters = {{"top_k", top_k}};
          summary["pairs"] = b.dictionary->pair_count();
        } else {
          if (train_rules.empty()) throw UsageError("--rules is required for regex");
          std::ifstream in(train_rules);
          if (!in) throw DataError("cannot open rules file: " + train_rules);
          nlohmann::json rules;
          try {
            rules = nlohmann::json::parse(in);
          } catch (const nlohmann::json::exception& e) {
            throw DataError("rules file is not valid JSON: " + std::string(e.what()));
          }
          b.regex = matching::RegexRuleSet::from_json(rules);
          summary["rules"] = b.regex->size();
        }
        save_bundle(train_out, b);
        summary["size_bytes"] = detail::fs::file_size(train_out);
        out << summary.dump() << '\n';
      };
    });
  }

  // predict
  std::string pred_model, pred_corpus, pred_table, pred_words, pred_out;
  std::optional<double> reject_below;
  bool no_header = false;
  {
    auto* s = app.add_subcommand("predict", "Predict a semantic type for each column");
    s->add_option("--model", pred_model, "Model file")->required();
    auto* c = s->add_option("--corpus", pred_corpus, "Corpus JSONL");
    auto* t = s->add_option("--table", pred_table, "CSV table; each column is classified");
    c->excludes(t);
    s->add_flag("--no-header", no_header, "The CSV table has no header row");
    s->add_option("--words", pred_words, "Word vectors (feature-based models)");
    s->add_option("--reject-below", reject_below, "Leave columns below this confidence unlabeled");
    s->add_option("--out", pred_out, "Output CSV (default: stdout)");
    common(s);
    s->callback([&] {
      action = [&] {
        if (pred_corpus.empty() == pred_table.empty()) throw UsageError("give exactly one of --corpus or --table");
        const auto b = load_bundle(pred_model);
        const auto words = detail::maybe_words(pred_words, uses_features(b.kind));
        const Corpus c = pred_corpus.empty() ? detail::read_table(pred_table, !no_header) : load_corpus(pred_corpus);
        const auto sc = detail::score_corpus(b, c, words ? &*words : nullptr, seed);
        std::ofstream file;
        if (!pred_out.empty()) file = detail::open_out(pred_out);
        std::ostream& o = pred_out.empty() ? out : file;
        csv::write_row(o, std::vector<std::string>{"column", "header", "type", "confidence"});
        for (std::size_t i = 0; i < c.columns.size(); ++i) {
          const auto& p = sc.scored[i];
          const bool rejected = p.label == kAbstain || (reject_below && p.confidence < *reject_below);
          csv::write_row(o, std::vector<std::string>{std::to_string(i), c.columns[i].source_header.value_or(""),
                                                     rejected ? "" : std::string(kTypeNames[static_cast<std::size_t>(p.label)]),
                                                     format_double(p.confidence)});
        }
      };
    });
  }

  // evaluate
  std::string ev_model, ev_matrix, ev_corpus, ev_words, ev_out, ev_curve;
  std::vector<double> fractions{1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1};
  std::size_t boot = 0;
  {
    auto* s = app.add_subcommand("evaluate", "Score a model on labeled data and write a JSON report");
    s->add_option("--model", ev_model, "Model file")->required();
    auto* m = s->add_option("--test", ev_matrix, "Test feature matrix CSV (nn, tree, forest)");
    auto* c = s->add_option("--corpus", ev_corpus, "Test corpus JSONL (any model; timing includes feature extraction)");
    m->excludes(c);
    s->add_option("--words", ev_words, "Word vectors (with --corpus for feature-based models)");
    s->add_option("--out", ev_out, "Report JSON (default: stdout)");
    s->add_option("--rejection-csv", ev_curve, "Rejection curve CSV");
    s->add_option("--fractions", fractions, "Retained fractions for the rejection curve")->delimiter(',');
    s->add_option("--bootstrap", boot, "Bootstrap iterations for a confidence interval (0 = off)")->capture_default_str();
    common(s);
    s->callback([&] {
      action = [&] {
        if (ev_matrix.empty() == ev_corpus.empty()) throw UsageError("give exactly one of --test or --corpus");
        const auto b = load_bundle(ev_model);
        detail::Scored s;
        std::vector<int> truths;
        if (!ev_matrix.empty()) {
          auto m = load_feature_matrix(ev_matrix);
          truths = m.labels;
          for (int t : truths)
            if (t == kNoLabel) throw DataError("test matrix has an unlabeled row");
          s = detail::score_matrix(b, std::move(m));
        } else {
          const auto words = detail::maybe_words(ev_words, uses_features(b.kind));
          const auto c = load_corpus(ev_corpus);
          truths = detail::truths_of(c);
          s = detail::score_corpus(b, c, words ? &*words : nullptr, seed);
        }
        if (truths.empty()) throw DataError("no test samples");
        std::vector<int> preds;
        for (const auto& p : s.scored) preds.push_back(p.label);
        auto report = evaluate(preds, truths);
        report.runtime_per_sample = s.seconds / static_cast<double>(truths.size());
        report.model_size_bytes = detail::fs::file_size(ev_model);
        auto j = report_to_json(report);
        j["model"] = std::string(kind_name(b.kind));
        const auto curve = rejection_curve(s.scored, truths, fractions);
        nlohmann::json cj = nlohmann::json::array();
        for (const auto& p : curve)
          cj.push_back({{"retained_fraction", p.retained_fraction}, {"retained", p.retained}, {"weighted_f1", p.weighted_f1}});
        j["rejection_curve"] = cj;
        if (boot) {
          const auto r = bootstrap_f1(preds, truths, boot, seed);
          j["bootstrap"] = {{"iterations", boot}, {"mean", r.mean}, {"lower", r.lower}, {"upper", r.upper}};
        }
        if (!ev_curve.empty()) {
          auto f = detail::open_out(ev_curve);
          write_rejection_csv(f, curve);
        }
        if (ev_out.empty())
          out << j.dump(2) << '\n';
        else
          detail::open_out(ev_out) << j.dump(2) << '\n';
      };
    });
  }

  // benchmark
  std::vector<std::string> bench_models;
  std::string bench_corpus, bench_words, bench_out;
  {
    auto* s = app.add_subcommand("benchmark", "Compare models: weighted F1, runtime per column, size on disk");
    s->add_option("--model", bench_models, "Model files (repeat or comma-separate)")
        ->required()
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    s->add_option("--corpus", bench_corpus, "Labeled test corpus JSONL")->required();
    s->add_option("--words", bench_words, "Word vectors (feature-based models)");
    s->add_option("--out", bench_out, "Output CSV (default: stdout)");
    common(s);
    s->callback([&] {
      action = [&] {
        const auto c = load_corpus(bench_corpus);
        const auto truths = detail::truths_of(c);
        if (truths.empty()) throw DataError("benchmark corpus is empty");
        std::optional<WordVectorTable> words;
        std::ostringstream table;
        csv::write_row(table, std::vector<std::string>{"model", "file", "weighted_f1", "runtime_per_sample_s", "size_bytes", "size_mb"});
        for (const auto& file : bench_models) {
          const auto b = load_bundle(file);
          if (uses_features(b.kind) && !words) words = detail::maybe_words(bench_words, true);
          const auto sc = detail::score_corpus(b, c, words ? &*words : nullptr, seed);
          std::vector<int> preds;
          for (const auto& p : sc.scored) preds.push_back(p.label);
          const auto size = detail::fs::file_size(file);
          csv::write_row(table, std::vector<std::string>{std::string(kind_name(b.kind)), file, format_double(weighted_f1(preds, truths)),
                                                         format_double(sc.seconds / static_cast<double>(truths.size())),
                                                         std::to_string(size), format_double(static_cast<double>(size) / 1e6)});
        }
        if (bench_out.empty())
          out << table.str();
        else
          detail::open_out(bench_out) << table.str();
      };
    });
  }

  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    args = detail::expand_config(std::move(args));
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }

  try {
    action();
    return kOk;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DataError& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const detail::fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kInternal;
  }
}

}  // namespace sherlock::cli
