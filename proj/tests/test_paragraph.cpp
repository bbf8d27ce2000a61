#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "sherlock/feature_paragraph.hpp"

using namespace sherlock;

namespace {

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  return ab / std::sqrt(aa * bb);
}

// `populations` disjoint value pools; each column draws from one pool.
std::vector<Column> pooled_columns(std::size_t populations, std::size_t per_pop, std::size_t values, std::uint64_t seed,
                                   std::vector<int>* pop_of = nullptr, std::size_t pool = 40) {
  Rng rng(seed);
  std::vector<Column> cols;
  for (std::size_t c = 0; c < populations * per_pop; ++c) {
    const std::size_t pop = c % populations;
    Column col;
    for (std::size_t i = 0; i < values; ++i)
      col.values.push_back("p" + std::to_string(pop) + "_" + std::to_string(uniform_index(rng, pool)));
    cols.push_back(std::move(col));
    if (pop_of) pop_of->push_back(static_cast<int>(pop));
  }
  return cols;
}

ParagraphVectorParams small_params(std::uint64_t seed, std::size_t dim = 400) {
  ParagraphVectorParams p;
  p.dimension = dim;
  p.seed = seed;
  return p;
}

}  // namespace

TEST(ParagraphVectors, DimensionAndFiniteness) {
  const auto cols = pooled_columns(2, 5, 20, 1);
  const auto m = train_pvdbow(cols, small_params(3));
  EXPECT_EQ(m.dimension(), 400u);
  EXPECT_EQ(m.paragraph_vectors().size(), cols.size() * 400);
  for (double x : m.paragraph_vectors()) ASSERT_TRUE(std::isfinite(x));
  for (double x : m.output_weights()) ASSERT_TRUE(std::isfinite(x));
  for (std::size_t i = 0; i < m.vocab_size(); ++i) EXPECT_EQ(m.token_index(m.tokens()[i]), static_cast<std::int64_t>(i));
  EXPECT_EQ(infer_paragraph_vector(m, cols[0]).size(), 400u);
  EXPECT_EQ(m.epoch_losses().size(), 20u);
}

TEST(ParagraphVectors, DeterministicGivenSeed) {
  const auto cols = pooled_columns(3, 4, 15, 2);
  const auto a = train_pvdbow(cols, small_params(9, 64));
  const auto b = train_pvdbow(cols, small_params(9, 64));
  EXPECT_EQ(a.paragraph_vectors(), b.paragraph_vectors());
  EXPECT_EQ(a.output_weights(), b.output_weights());
  EXPECT_EQ(a.infer(cols[1]), b.infer(cols[1]));
  const auto c = train_pvdbow(cols, small_params(10, 64));
  EXPECT_NE(a.paragraph_vectors(), c.paragraph_vectors());
}

TEST(ParagraphVectors, VocabularyRules) {
  std::vector<Column> cols = {Column{{"A", " a ", "b", "c"}, {}, {}}, Column{{"b", "", "d", "d"}, {}, {}}};
  const auto m = train_pvdbow(cols, small_params(0, 8));
  // "a" (x2, case/space folded), "b" (x2), "d" (x2) survive min_count 2; "c" and "" do not.
  EXPECT_EQ(m.tokens(), (std::vector<std::string>{"a", "b", "d"}));
  EXPECT_EQ(m.token_index("c"), -1);
}

TEST(ParagraphVectors, Errors) {
  std::vector<Column> one = {Column{{"a", "a"}, {}, {}}};
  EXPECT_THROW(train_pvdbow(one, small_params(0, 8)), Error);
  std::vector<Column> singletons = {Column{{"a"}, {}, {}}, Column{{"b"}, {}, {}}};
  EXPECT_THROW(train_pvdbow(singletons, small_params(0, 8)), DataError);
}

TEST(ParagraphVectors, LossDecreases) {
  const auto cols = pooled_columns(4, 10, 20, 5);
  const auto m = train_pvdbow(cols, small_params(1));
  EXPECT_LT(m.epoch_losses().back(), m.epoch_losses().front());
}

TEST(ParagraphVectors, UnseenColumnReturnsInitialization) {
  const auto cols = pooled_columns(2, 5, 20, 1);
  const auto m = train_pvdbow(cols, small_params(3));
  const Column unseen{{"never", "seen", "values"}, {}, {}};
  EXPECT_EQ(m.infer(unseen), m.initial_vector());
  EXPECT_EQ(m.infer(unseen, 4), m.initial_vector(4));
}

TEST(ParagraphVectors, InferenceDoesNotMutateModel) {
  const auto cols = pooled_columns(2, 5, 20, 1);
  const auto m = train_pvdbow(cols, small_params(3, 32));
  const auto out = m.output_weights();
  const auto par = m.paragraph_vectors();
  const auto tokens = m.tokens();
  const auto first = m.infer(cols[2]);
  EXPECT_EQ(m.output_weights(), out);
  EXPECT_EQ(m.paragraph_vectors(), par);
  EXPECT_EQ(m.tokens(), tokens);
  EXPECT_EQ(m.infer(cols[2]), first);
}

TEST(ParagraphVectors, RestoreReproducesInference) {
  const auto cols = pooled_columns(2, 5, 20, 1);
  const auto m = train_pvdbow(cols, small_params(3, 32));
  const auto r = ParagraphVectorModel::restore(m.params(), m.tokens(), m.token_counts(), m.output_weights());
  EXPECT_EQ(r.infer(cols[3]), m.infer(cols[3]));
}

TEST(ParagraphVectors, IntraPopulationSimilarityExceedsInter) {
  double intra_total = 0, inter_total = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    std::vector<int> pop;
    const auto cols = pooled_columns(2, 20, 25, 100 + seed, &pop);
    const auto m = train_pvdbow(cols, small_params(seed));
    std::vector<std::vector<double>> v;
    for (const auto& c : cols) v.push_back(m.infer(c));
    double intra = 0, inter = 0;
    std::size_t ni = 0, ne = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      for (std::size_t j = i + 1; j < v.size(); ++j) {
        const double s = cosine(v[i], v[j]);
        if (pop[i] == pop[j]) {
          intra += s;
          ++ni;
        } else {
          inter += s;
          ++ne;
        }
      }
    intra_total += intra / static_cast<double>(ni);
    inter_total += inter / static_cast<double>(ne);
  }
  EXPECT_GT(intra_total / 3, inter_total / 3);
}

TEST(ParagraphVectors, InferredVectorFindsItsTrainingColumn) {
  double hits = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    // One value pool per column, so no other column is a statistical twin.
    const auto cols = pooled_columns(100, 1, 20, 40 + seed, nullptr, 15);
    const auto m = train_pvdbow(cols, small_params(seed));
    const std::size_t n = cols.size();
    double passed = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = m.infer(cols[i]);
      const double own = cosine(v, m.paragraph_vector(i));
      std::vector<double> others;
      for (std::size_t j = 0; j < n; ++j)
        if (j != i) others.push_back(cosine(v, m.paragraph_vector(j)));
      std::sort(others.begin(), others.end());
      const double p90 = others[static_cast<std::size_t>(0.9 * static_cast<double>(others.size() - 1))];
      passed += own > p90;
    }
    hits += passed / static_cast<double>(n);
  }
  // Averaged over the three seeds, nearly every column clears the bar.
  EXPECT_GT(hits / 3, 0.9);
}
