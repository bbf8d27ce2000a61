// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
// Usage: sherlock_acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <unistd.h>

#include "cli.hpp"
#include "gradcheck.hpp"
#include "oracle.hpp"
#include "sherlock/bundle.hpp"
#include "sherlock/synthetic.hpp"

using namespace sherlock;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x, int precision = 6) {
  std::ostringstream s;
  s.precision(precision);
  s << x;
  return s.str();
}

std::string container_bytes(const ModelBundle& b) {
  std::ostringstream out;
  to_container(b).write(out);
  return out.str();
}

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && (a.empty() || std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0);
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

std::vector<int> argmax_all(const std::vector<std::vector<double>>& probs) {
  std::vector<int> out;
  for (const auto& p : probs) out.push_back(nn::argmax(p).label);
  return out;
}

// Small featurized synthetic workspace shared by criteria 4 and 9.
struct SmallData {
  FeatureMatrix train, val, test;
  FeatureState state;
  Corpus train_corpus, test_corpus;
};

SmallData small_data(std::size_t per_type, std::uint64_t seed) {
  synthetic::Options so;
  so.columns_per_type = per_type;
  so.seed = seed;
  const auto parts = split(synthetic::make_corpus(so), SplitSpec{{0.6, 0.2, 0.2}, seed});
  const auto words = synthetic::make_word_vectors(seed);
  ParagraphVectorParams pp;
  pp.seed = seed;
  pp.epochs = 5;
  SmallData d;
  d.state.paragraphs = train_pvdbow(parts.train.columns, pp);
  d.train = assemble_matrix(parts.train, words, d.state.paragraphs);
  d.val = assemble_matrix(parts.val, words, d.state.paragraphs);
  d.test = assemble_matrix(parts.test, words, d.state.paragraphs);
  d.state.imputer = fit_imputer(d.train);
  for (auto* m : {&d.train, &d.val, &d.test}) d.state.imputer.apply(*m);
  d.train_corpus = parts.train;
  d.test_corpus = parts.test;
  return d;
}

Outcome criterion1() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& schema = feature_schema();
  std::map<FeatureCategory, std::size_t> counts;
  for (const auto& f : schema) ++counts[f.category];
  std::ifstream in(SHERLOCK_TEST_DATA "/feature_schema.tsv");
  if (!in) return {false, "golden schema file missing"};
  std::size_t i = 0, mismatches = 0;
  for (std::string line; std::getline(in, line); ++i) {
    const auto tab = line.find('\t');
    if (i >= schema.size() || schema[i].name != line.substr(0, tab) ||
        category_name(schema[i].category) != line.substr(tab + 1))
      ++mismatches;
  }
  const double secs = seconds_since(t0);
  const bool ok = schema.size() == 1588 && counts[FeatureCategory::Stats] == 27 && counts[FeatureCategory::Chars] == 960 &&
                  counts[FeatureCategory::Words] == 200 && counts[FeatureCategory::WordsFlag] == 1 &&
                  counts[FeatureCategory::Paragraph] == 400 && i == 1588 && mismatches == 0 && secs < 1.0;
  return {ok, std::to_string(schema.size()) + " slots, partition " + std::to_string(counts[FeatureCategory::Stats]) + "/" +
                  std::to_string(counts[FeatureCategory::Chars]) + "/" + std::to_string(counts[FeatureCategory::Words]) + "/" +
                  std::to_string(counts[FeatureCategory::WordsFlag]) + "/" + std::to_string(counts[FeatureCategory::Paragraph]) +
                  ", golden mismatches " + std::to_string(mismatches) + ", " + fmt(secs, 3) + " s"};
}

Outcome criterion2() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240);
  std::size_t bad = 0;
  double worst = 0.0;
  auto compare = [&](double got, double want) {
    if (!oracle::close(got, want, 1e-9, 1e-12)) ++bad;
    if (got != want) worst = std::max(worst, std::abs(got - want) / std::max({std::abs(got), std::abs(want), 1e-300}));
  };
  for (int trial = 0; trial < 1000; ++trial) {
    const auto values = oracle::random_column(rng);
    const Column c{values, {}, {}};
    const auto s = extract_global_stats(c);
    const auto so = oracle::global_stats(values);
    for (std::size_t k = 0; k < kNumStatsFeatures; ++k) compare(s[k], so[k]);
    const auto ch = extract_char_features(c);
    const auto co = oracle::char_features(values);
    for (std::size_t k = 0; k < kNumCharFeatures; ++k) compare(ch[k], co[k]);
  }
  const double secs = seconds_since(t0);
  return {bad == 0 && secs < 60.0, "1000 columns, " + std::to_string(bad) + " slots outside 1e-9, worst relative " +
                                       fmt(worst, 3) + ", " + fmt(secs, 3) + " s"};
}

Outcome criterion3() {
  const auto t0 = std::chrono::steady_clock::now();
  nn::TrainingConfig cfg;
  cfg.seed = 3;
  auto net = nn::make_sherlock_network(cfg);
  std::mt19937_64 rng(33);
  std::normal_distribution<double> g(0.0, 1.0);
  nn::Matrix x(10, static_cast<Eigen::Index>(kNumFeatures));
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = g(rng);
  std::vector<int> labels;
  for (int r = 0; r < 10; ++r) labels.push_back(static_cast<int>(rng() % kNumTypes));
  net.fit_standardizers(x);
  const gradcheck::Exhaustive ex(net, x, labels, cfg.weight_decay, 7, 1e-5);
  const auto r = ex.run(1e-4, 1e-10);
  // Cross-check the propagated differences against full forward passes.
  std::size_t spot = 0, spot_bad = 0;
  for (std::size_t l = 0; l < ex.num_layers(); ++l)
    for (bool bias : {false, true})
      for (int k = 0; k < 4; ++k, ++spot) {
        const auto i = static_cast<Eigen::Index>(rng() % static_cast<std::uint64_t>(ex.size(l, bias)));
        if (gradcheck::rel_error(ex.analytic(l, bias, i), ex.naive(l, bias, i), 1e-6) > 1e-4) ++spot_bad;
      }
  const double secs = seconds_since(t0);
  return {r.failed == 0 && r.kink_failed == 0 && spot_bad == 0 && secs < 300.0,
          std::to_string(r.checked) + " parameters, " + std::to_string(r.failed) + " over 1e-4 (worst " + fmt(r.worst, 3) +
              " at " + r.worst_at + "), " + std::to_string(r.kinks) + " kink probes (" + std::to_string(r.kink_failed) +
              " disagreeing), full-pass spot check " + std::to_string(spot - spot_bad) + "/" + std::to_string(spot) + ", " +
              fmt(secs, 3) + " s"};
}

Outcome criterion4() {
  const auto d = small_data(15, 4);
  std::string notes;
  bool ok = true;

  nn::TrainingConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 32;
  cfg.learning_rate = 1e-3;
  cfg.seed = 11;
  const auto a = nn::train_sherlock(d.train, d.val, cfg).model;
  const auto b = nn::train_sherlock(d.train, d.val, cfg).model;
  double worst_sum = 0.0;
  const auto pa = nn::predict_proba(a, d.test), pb = nn::predict_proba(b, d.test);
  for (const auto& p : pa) {
    double s = 0;
    for (double q : p) s += q;
    worst_sum = std::max(worst_sum, std::abs(s - 1.0));
  }
  ModelBundle ba, bb;
  ba.features = bb.features = d.state;
  ba.net = a;
  bb.net = b;
  bool nn_same = container_bytes(ba) == container_bytes(bb);
  for (std::size_t i = 0; i < pa.size(); ++i) nn_same = nn_same && same_bits(pa[i], pb[i]);
  ok = ok && worst_sum <= 1e-6 && nn_same;
  notes += "nn sum dev " + fmt(worst_sum, 3) + (nn_same ? ", nn identical" : ", nn DIFFERS");

  trees::TreeOptions to;
  to.num_classes = kNumTypes;
  to.max_features = 40;
  to.seed = 5;
  const auto ta = trees::train_decision_tree(d.train, to), tb = trees::train_decision_tree(d.train, to);
  bool tree_same = trees::serialize(ta) == trees::serialize(tb);
  trees::ForestOptions fo;
  fo.num_classes = kNumTypes;
  fo.seed = 5;
  const auto fa = trees::train_random_forest(d.train, fo), fb = trees::train_random_forest(d.train, fo);
  bool forest_same = fa.trees().size() == fb.trees().size();
  for (std::size_t t = 0; forest_same && t < fa.trees().size(); ++t)
    forest_same = trees::serialize(fa.trees()[t]) == trees::serialize(fb.trees()[t]);
  double tree_sum = 0.0;
  for (std::size_t r = 0; r < d.test.rows; ++r) {
    const auto row = d.test.row(r);
    tree_same = tree_same && same_bits(ta.predict_proba(row), tb.predict_proba(row));
    forest_same = forest_same && same_bits(fa.predict_proba(row), fb.predict_proba(row));
    for (const auto& p : {ta.predict_proba(row), fa.predict_proba(row)}) {
      double s = 0;
      for (double q : p) s += q;
      tree_sum = std::max(tree_sum, std::abs(s - 1.0));
    }
  }
  ok = ok && tree_same && forest_same && tree_sum <= 1e-6;
  notes += std::string(tree_same ? ", tree identical" : ", tree DIFFERS") + (forest_same ? ", forest identical" : ", forest DIFFERS") +
           ", tree/forest sum dev " + fmt(tree_sum, 3);

  ParagraphVectorParams pp;
  pp.seed = 17;
  pp.epochs = 5;
  const auto va = train_pvdbow(d.train_corpus.columns, pp), vb = train_pvdbow(d.train_corpus.columns, pp);
  bool pv_same = same_bits(va.paragraph_vectors(), vb.paragraph_vectors()) && same_bits(va.output_weights(), vb.output_weights());
  for (const auto& c : d.test_corpus.columns) pv_same = pv_same && same_bits(va.infer(c), vb.infer(c));
  ok = ok && pv_same;
  notes += pv_same ? ", pv identical" : ", pv DIFFERS";
  return {ok, notes};
}

Outcome criterion5() {
  // Interleaved classes that only feature 2 separates; features 0 and 1 are noise.
  FeatureMatrix m;
  m.cols = 3;
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 500; ++i) {
    const int c = i % 5;
    m.append(std::vector<double>{u(rng), u(rng), c + 0.8 * u(rng)}, c);
  }
  trees::TreeOptions o;
  o.num_classes = 5;
  const auto t = trees::train_decision_tree(m, o);
  std::size_t ok_rows = 0;
  for (std::size_t r = 0; r < m.rows; ++r) ok_rows += t.predict(m.row(r)) == m.labels[r];
  const double acc = static_cast<double>(ok_rows) / static_cast<double>(m.rows);
  const auto imp = trees::feature_importances(t);
  const double top = *std::max_element(imp.begin(), imp.end());

  // Noisy data still fits perfectly when rows are distinct.
  FeatureMatrix n;
  n.cols = 4;
  std::normal_distribution<double> g(0.0, 1.0);
  for (int i = 0; i < 400; ++i) n.append(std::vector<double>{g(rng), g(rng), g(rng), g(rng)}, i % 4);
  o.num_classes = 4;
  const auto tn = trees::train_decision_tree(n, o);
  std::size_t ok_noisy = 0;
  for (std::size_t r = 0; r < n.rows; ++r) ok_noisy += tn.predict(n.row(r)) == n.labels[r];

  const double g22 = trees::gini(std::vector<double>{2, 2});
  const double g31 = trees::gini(std::vector<double>{3, 1});
  const double g111 = trees::gini(std::vector<double>{1, 1, 1});
  const bool gini_ok = g22 == 0.5 && std::abs(g31 - 0.375) < 1e-15 && std::abs(g111 - 2.0 / 3.0) < 1e-15 &&
                       trees::gini(std::vector<double>{4, 0}) == 0.0;
  const bool ok = acc == 1.0 && t.depth() <= 50 && ok_noisy == n.rows && tn.depth() <= 50 && top == 1.0 && gini_ok;
  return {ok, "separable accuracy " + fmt(acc) + " at depth " + std::to_string(t.depth()) + ", noisy fit " +
                  std::to_string(ok_noisy) + "/" + std::to_string(n.rows) + " at depth " + std::to_string(tn.depth()) +
                  ", max importance " + fmt(top, 17) + ", gini(2,2) " + fmt(g22, 17) + ", gini(3,1) " + fmt(g31, 17)};
}

Outcome criterion6() {
  const std::vector<int> pred{0, 0, 1}, truth{0, 1, 1};
  const double f = weighted_f1(pred, truth);
  const bool exact = f == 2.0 / 3.0;

  std::mt19937_64 rng(6);
  bool curve_ok = true;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<ScoredPrediction> s(n);
    std::vector<int> t(n), p(n);
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = static_cast<int>(rng() % 6);
      p[i] = rng() % 3 ? t[i] : static_cast<int>(rng() % 6);
      s[i] = {p[i], static_cast<double>(rng() % 1000) / 1000.0};
    }
    const auto c = rejection_curve(s, t, {1.0});
    curve_ok = curve_ok && c[0].retained == n && c[0].weighted_f1 == weighted_f1(p, t);
  }

  // One right, one wrong: the four equally likely resamples give 1, 0 and twice the mixed score.
  const std::vector<int> bp{0, 1}, bt{0, 0};
  const double mixed = oracle::weighted_f1({0, 1}, {0, 0});
  const double closed = 0.25 * 1.0 + 0.25 * 0.0 + 0.5 * mixed;
  const auto boot = bootstrap_f1(bp, bt, 20000, 1);
  const bool boot_ok = std::abs(boot.mean - closed) <= 0.01;
  return {exact && curve_ok && boot_ok, "F1 " + fmt(f, 17) + (exact ? " (== 2/3)" : " (!= 2/3)") +
                                            (curve_ok ? ", curve at 1.0 equals global on 100 trials" : ", curve MISMATCH") +
                                            ", bootstrap mean " + fmt(boot.mean) + " vs " + fmt(closed)};
}

Outcome criterion7() {
  const auto t0 = std::chrono::steady_clock::now();
  synthetic::Options so;
  so.columns_per_type = 600;
  so.dirty_fraction = 0.10;
  so.overlap_fraction = 0.20;
  so.seed = 7;
  const auto parts = split(synthetic::make_corpus(so), SplitSpec{{0.6, 0.2, 0.2}, 7});
  const auto words = synthetic::make_word_vectors(7);
  ParagraphVectorParams pp;
  pp.seed = 7;
  const auto pv = train_pvdbow(parts.train.columns, pp);
  auto train = assemble_matrix(parts.train, words, pv);
  auto val = assemble_matrix(parts.val, words, pv);
  auto test = assemble_matrix(parts.test, words, pv);
  const auto imputer = fit_imputer(train);
  for (auto* m : {&train, &val, &test}) imputer.apply(*m);
  const double prep = seconds_since(t0);

  nn::TrainingConfig cfg;
  cfg.learning_rate = 1e-3;
  cfg.batch_size = 64;
  cfg.seed = 7;
  const auto joint = nn::train_sherlock(train, val, cfg);
  const double f1 = weighted_f1(argmax_all(nn::predict_proba(joint.model, test)), test.labels);
  const double stats = nn::train_subnet_isolated(FeatureFamily::Stats, train, val, test, cfg).test_f1;

  const auto dict = matching::build_dictionary(parts.train);
  std::vector<int> dpred;
  for (const auto& c : parts.test.columns) dpred.push_back(matching::predict_dictionary(dict, c));
  std::vector<int> truth;
  for (const auto& c : parts.test.columns) truth.push_back(c.label->id);
  const double dict_f1 = weighted_f1(dpred, truth);

  const double secs = seconds_since(t0);
  const bool ok = f1 >= 0.90 && f1 > stats && f1 > dict_f1 && secs <= 600.0;
  return {ok, std::to_string(train.rows) + "/" + std::to_string(val.rows) + "/" + std::to_string(test.rows) +
                  " columns, joint F1 " + fmt(f1, 4) + " (best epoch " + std::to_string(joint.best_epoch) + "), stats-only " +
                  fmt(stats, 4) + ", dictionary " + fmt(dict_f1, 4) + ", features " + fmt(prep, 3) + " s, total " +
                  fmt(secs, 3) + " s"};
}

Outcome criterion8() {
  double intra_total = 0.0, inter_total = 0.0;
  std::string per_seed;
  for (std::uint64_t seed : {1, 2, 3}) {
    synthetic::Options so;
    so.columns_per_type = 60;
    so.seed = 80 + seed;
    const auto corpus = synthetic::make_corpus(so);
    ParagraphVectorParams pp;
    pp.seed = seed;
    const auto pv = train_pvdbow(corpus.columns, pp);
    std::vector<std::vector<double>> v;
    for (const auto& c : corpus.columns) v.push_back(pv.infer(c));
    double intra = 0, inter = 0;
    std::size_t ni = 0, ne = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        const double s = cosine(v[i], v[j]);
        if (corpus.columns[i].label->id == corpus.columns[j].label->id) {
          intra += s;
          ++ni;
        } else {
          inter += s;
          ++ne;
        }
      }
    intra /= static_cast<double>(ni);
    inter /= static_cast<double>(ne);
    intra_total += intra;
    inter_total += inter;
    per_seed += " seed " + std::to_string(seed) + ": " + fmt(intra, 4) + " vs " + fmt(inter, 4) + ";";
  }
  return {intra_total / 3 > inter_total / 3,
          "mean intra " + fmt(intra_total / 3, 4) + " vs inter " + fmt(inter_total / 3, 4) + " (" + per_seed + ")"};
}

int run_cli(std::vector<std::string> args, std::string* out = nullptr) {
  args.insert(args.begin(), "sherlock");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream o, e;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), o, e);
  if (out) *out = o.str();
  if (code != 0) std::cerr << e.str();
  return code;
}

Outcome criterion9() {
  const auto dir = fs::temp_directory_path() / ("sherlock_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& name) { return (dir / name).string(); };
  auto slurp = [](const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  const std::vector<std::vector<std::string>> steps = {
      {"synth", "--out-dir", p("data"), "--columns-per-type", "20", "--seed", "9"},
      {"ingest", "--input", p("data/corpus.jsonl"), "--out-dir", p("split"), "--no-filter", "--seed", "9"},
      {"features", "--corpus", p("split/train.jsonl"), "--words", p("data/words.txt"), "--out", p("train.csv"), "--fit-pv",
       p("pv.bin"), "--pv-epochs", "5"},
      {"features", "--corpus", p("split/val.jsonl"), "--words", p("data/words.txt"), "--out", p("val.csv"), "--pv", p("pv.bin")},
      {"train", "--model", "nn", "--train", p("train.csv"), "--val", p("val.csv"), "--pv", p("pv.bin"), "--out", p("nn.bin"),
       "--epochs", "3", "--batch-size", "32", "--learning-rate", "1e-3"},
      {"train", "--model", "tree", "--train", p("train.csv"), "--pv", p("pv.bin"), "--out", p("tree.bin")},
      {"train", "--model", "forest", "--train", p("train.csv"), "--pv", p("pv.bin"), "--out", p("forest.bin")},
      {"train", "--model", "dictionary", "--corpus", p("split/train.jsonl"), "--out", p("dictionary.bin")},
      {"train", "--model", "regex", "--rules", p("data/rules.json"), "--out", p("regex.bin")},
  };
  for (const auto& s : steps)
    if (run_cli(s) != 0) return {false, "command failed: " + s[0]};

  const auto test = load_corpus(p("split/test.jsonl"));
  const auto words = load_word_vectors(p("data/words.txt"));
  std::string notes;
  bool ok = true;
  const std::vector<std::string> kinds = {"nn", "tree", "forest", "dictionary", "regex"};
  for (const auto& kind : kinds) {
    const auto a = load_bundle(p(kind + ".bin"));
    save_bundle(p(kind + ".copy"), a);
    const auto b = load_bundle(p(kind + ".copy"));
    bool same = slurp(p(kind + ".bin")) == slurp(p(kind + ".copy"));
    for (const auto& c : test.columns) {
      const auto x = score_column(a, c, &words), y = score_column(b, c, &words);
      same = same && x.label == y.label && std::memcmp(&x.confidence, &y.confidence, sizeof(double)) == 0;
    }
    ok = ok && same;
    notes += kind + (same ? " identical, " : " DIFFERS, ");
  }

  std::string list;
  for (const auto& kind : kinds) list += (list.empty() ? "" : ",") + p(kind + ".bin");
  std::string out;
  if (run_cli({"benchmark", "--model", list, "--corpus", p("split/test.jsonl"), "--words", p("data/words.txt")}, &out) != 0)
    return {false, notes + "benchmark failed"};
  std::istringstream lines(out);
  std::string line;
  std::getline(lines, line);
  std::size_t rows = 0, matched = 0;
  while (std::getline(lines, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    ++rows;
    if (cells.size() == 6 && std::stoull(cells[4]) == fs::file_size(cells[1])) ++matched;
  }
  fs::remove_all(dir);
  ok = ok && rows == kinds.size() && matched == rows;
  return {ok, notes + "benchmark sizes match " + std::to_string(matched) + "/" + std::to_string(rows)};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int number = static_cast<int>(k + 1);
    if (!only.empty() && !only.count(number)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << number << " (" << fmt(seconds_since(t0), 3)
              << " s): " << o.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
