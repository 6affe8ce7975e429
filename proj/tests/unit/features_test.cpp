#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "rmdl/error.hpp"
#include "rmdl/features.hpp"
#include "rmdl/random.hpp"

namespace rmdl::features {
namespace {

using Counts = std::map<std::string, std::size_t>;

TEST(Tokenize, LowercasesAndSplitsOnPunctuation) {
  EXPECT_EQ(tokenize("In this paper"), (std::vector<std::string>{"in", "this", "paper"}));
  EXPECT_TRUE(tokenize("").empty());
  EXPECT_EQ(tokenize("don't stop"), (std::vector<std::string>{"don", "t", "stop"}));
  EXPECT_EQ(tokenize("  --A1b2,,C3 "), (std::vector<std::string>{"a1b2", "c3"}));
}

TEST(NgramCounts, FixtureSentenceUnigrams) {
  const auto terms = tokenize("In this paper we introduced this technique");
  const Counts expected{{"in", 1}, {"this", 2}, {"paper", 1}, {"we", 1}, {"introduced", 1}, {"technique", 1}};
  EXPECT_EQ(ngram_counts(terms, 1), expected);
}

TEST(NgramCounts, FixtureSentenceBigrams) {
  const auto terms = tokenize("In this paper we introduced this technique");
  const Counts expected{{"in", 1},         {"this", 2},           {"paper", 1},          {"we", 1},
                        {"introduced", 1}, {"technique", 1},      {"in this", 1},        {"this paper", 1},
                        {"paper we", 1},   {"we introduced", 1}, {"introduced this", 1}, {"this technique", 1}};
  EXPECT_EQ(ngram_counts(terms, 2), expected);
}

TEST(NgramCounts, SingleTermHasOnlyTheUnigram) {
  const std::vector<std::string> one{"solo"};
  EXPECT_EQ(ngram_counts(one, 2), (Counts{{"solo", 1}}));
  EXPECT_THROW(ngram_counts(one, 0), DomainError);
}

TEST(NgramCounts, UnigramTotalEqualsTokenCount) {
  Rng rng(3);
  const std::vector<std::string> alphabet{"a", "b", "c", "d"};
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<std::string> terms(rng.uniform_int(0, 30));
    for (auto& t : terms) t = alphabet[rng.uniform_int(0, 3)];
    std::size_t total = 0;
    for (const auto& [gram, count] : ngram_counts(terms, 1)) total += count;
    EXPECT_EQ(total, terms.size());
  }
}

TEST(Vocabulary, ReservesIndexZeroAndKeepsFirstOccurrenceOrder) {
  const std::vector<std::vector<std::string>> docs{{"b", "a", "b"}, {"c", "a"}};
  const auto v = Vocabulary::fit(docs);
  EXPECT_EQ(v.size(), 4u);
  EXPECT_EQ(v.term(0), "");
  EXPECT_EQ(v.index("b"), 1u);
  EXPECT_EQ(v.index("a"), 2u);
  EXPECT_EQ(v.index("c"), 3u);
  EXPECT_EQ(v.index("zzz"), 0u);
  EXPECT_EQ(v.df(v.index("a")), 2u);
  EXPECT_EQ(v.df(v.index("b")), 1u);
  EXPECT_EQ(v.documents(), 2u);
  EXPECT_EQ(Vocabulary::fit(docs), v);
}

TEST(Vocabulary, MaxFeaturesKeepsHighestDf) {
  const std::vector<std::vector<std::string>> docs{{"x", "y"}, {"y", "z"}, {"z", "w"}, {"z"}};
  const auto v = Vocabulary::fit(docs, 2);
  EXPECT_EQ(v.size(), 3u);
  // z (df 3) and y (df 2) survive, in first-occurrence order.
  EXPECT_EQ(v.index("y"), 1u);
  EXPECT_EQ(v.index("z"), 2u);
  EXPECT_EQ(v.index("x"), 0u);
}

TEST(Vocabulary, EncodePadsAndTruncates) {
  const std::vector<std::vector<std::string>> docs{{"a", "b", "c"}};
  const auto v = Vocabulary::fit(docs);
  const std::vector<std::string> doc{"c", "q", "a"};
  EXPECT_EQ(v.encode(doc, 5), (std::vector<std::size_t>{3, 0, 1, 0, 0}));
  EXPECT_EQ(v.encode(doc, 2), (std::vector<std::size_t>{3, 0}));
}

TEST(Tfidf, TermInEveryDocumentHasIdfOne) {
  const std::vector<std::vector<std::string>> docs{{"common", "x"}, {"common"}, {"common", "y"}};
  const auto model = tfidf_fit(docs);
  EXPECT_EQ(model.idf(model.vocab.index("common")), 1.0);
  EXPECT_DOUBLE_EQ(model.idf(model.vocab.index("x")), std::log(4.0 / 2.0) + 1.0);
}

TEST(Tfidf, WeightsMatchFormulaAndNormalize) {
  const std::vector<std::vector<std::string>> docs{{"a", "a", "b"}, {"b", "c"}};
  const auto model = tfidf_fit(docs);
  const std::vector<std::string> doc{"a", "a", "b", "unseen"};
  const auto v = tfidf_transform(doc, model);
  const double wa = 2.0 * (std::log(3.0 / 2.0) + 1.0);
  const double wb = 1.0 * (std::log(3.0 / 3.0) + 1.0);
  const double norm = std::sqrt(wa * wa + wb * wb);
  const Tensor dense = v.dense();
  EXPECT_NEAR(dense[model.vocab.index("a")], wa / norm, 1e-15);
  EXPECT_NEAR(dense[model.vocab.index("b")], wb / norm, 1e-15);
  EXPECT_EQ(dense[model.vocab.index("c")], 0.0);
  EXPECT_EQ(dense[0], 0.0);
}

TEST(Tfidf, NonzeroVectorsHaveUnitNorm) {
  Rng rng(11);
  const std::vector<std::string> alphabet{"p", "q", "r", "s", "t", "u"};
  auto random_doc = [&] {
    std::vector<std::string> d(rng.uniform_int(1, 12));
    for (auto& t : d) t = alphabet[rng.uniform_int(0, alphabet.size() - 1)];
    return d;
  };
  std::vector<std::vector<std::string>> corpus(20);
  for (auto& d : corpus) d = random_doc();
  const auto model = tfidf_fit(corpus, 2);
  for (int i = 0; i < 100; ++i) {
    const auto v = tfidf_transform(random_doc(), model);
    double sq = 0.0;
    for (double x : v.value) sq += x * x;
    if (!v.value.empty()) {
      EXPECT_NEAR(std::sqrt(sq), 1.0, 1e-12);
    }
  }
}

TEST(Tfidf, DeterministicAcrossFits) {
  const std::vector<std::vector<std::string>> docs{{"m", "n", "m"}, {"o", "n"}, {"p"}};
  const auto a = tfidf_fit(docs, 2);
  const auto b = tfidf_fit(docs, 2);
  EXPECT_EQ(a.vocab, b.vocab);
  const std::vector<std::string> doc{"n", "m", "o"};
  EXPECT_EQ(tfidf_transform(doc, a), tfidf_transform(doc, b));
}

TEST(Tfidf, UnknownOnlyDocumentIsZeroAndEmptyVocabularyThrows) {
  const std::vector<std::vector<std::string>> docs{{"a"}};
  const auto model = tfidf_fit(docs);
  const std::vector<std::string> unknown{"zz"};
  EXPECT_TRUE(tfidf_transform(unknown, model).value.empty());
  const std::vector<std::vector<std::string>> empty_docs{{}};
  EXPECT_THROW(tfidf_transform(unknown, tfidf_fit(empty_docs)), DomainError);
}

TEST(Glove, LoadsAndLooksUp) {
  std::istringstream in("the 0.1 0.2\ncat -1 3.5e-1\n");
  const auto table = glove_load(in);
  EXPECT_EQ(table.dim(), 2u);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(table.lookup("the"), (std::vector<double>{0.1, 0.2}));
  EXPECT_EQ(table.lookup("cat"), (std::vector<double>{-1.0, 0.35}));
  EXPECT_EQ(table.lookup("dog"), (std::vector<double>{0.0, 0.0}));
}

TEST(Glove, DimensionChangeReportsLine) {
  std::istringstream in("a 1 2\nb 1 2 3\n");
  try {
    glove_load(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line, 2u);
  }
}

TEST(Glove, EmptyStreamAndBadNumberThrow) {
  std::istringstream empty("");
  EXPECT_THROW(glove_load(empty), ParseError);
  std::istringstream bad("a 1 x\n");
  EXPECT_THROW(glove_load(bad), ParseError);
}

TEST(EmbedDocument, PadsTruncatesAndKeepsShape) {
  EmbeddingTable table(2);
  for (int i = 0; i < 7; ++i) table.insert("w" + std::to_string(i), {double(i + 1), -double(i + 1)});

  const auto empty = embed_document({}, table, 5);
  EXPECT_EQ(empty.shape(), (Shape{5, 2}));
  for (double x : empty.data()) EXPECT_EQ(x, 0.0);

  const std::vector<std::string> three{"w0", "w1", "w2"};
  const auto padded = embed_document(three, table, 5);
  EXPECT_EQ(padded.shape(), (Shape{5, 2}));
  EXPECT_EQ(padded.at({2, 0}), 3.0);
  for (std::size_t r = 3; r < 5; ++r) {
    EXPECT_EQ(padded.at({r, 0}), 0.0);
    EXPECT_EQ(padded.at({r, 1}), 0.0);
  }

  std::vector<std::string> seven;
  for (int i = 0; i < 7; ++i) seven.push_back("w" + std::to_string(i));
  const auto truncated = embed_document(seven, table, 5);
  EXPECT_EQ(truncated.shape(), (Shape{5, 2}));
  EXPECT_EQ(truncated.at({4, 1}), -5.0);
}

TEST(NormalizeImage, DividesBy255) {
  const std::vector<std::uint8_t> px{0, 51, 255, 128};
  const auto t = normalize_image(px, {2, 2, 1});
  EXPECT_EQ(t.shape(), (Shape{2, 2, 1}));
  EXPECT_EQ(t[0], 0.0);
  EXPECT_EQ(t[1], 0.2);
  EXPECT_EQ(t[2], 1.0);
  EXPECT_EQ(t[3], 128.0 / 255.0);
}

}  // namespace
}  // namespace rmdl::features
