// Copyright 2026 The SynthAudit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "synthaudit/generator.hpp"
#include "synthaudit/generator_io.hpp"

namespace synthaudit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Document Doc(std::string id, std::string text, CodeSet codes = {}) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.codes = std::move(codes);
  return d;
}

NgramOptions Order(int order, double k = 0.01) {
  NgramOptions options;
  options.order = order;
  options.smoothing_k = k;
  return options;
}

// Counts keyed by token strings so models with different vocabularies can be
// compared.
using StringCounts = std::map<std::pair<std::vector<std::string>, std::string>, double>;

StringCounts ByString(const GenModel& model) {
  StringCounts out;
  for (const auto& [context, row] : model.counts()) {
    std::vector<std::string> names;
    for (TokenId id : context) names.push_back(model.vocab()[id]);
    for (const auto& [token, count] : row.entries) {
      out[{names, model.vocab()[token]}] += count;
    }
  }
  return out;
}

Corpus RandomCorpus(Rng& rng, std::size_t docs, const std::string& prefix) {
  const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "."};
  const std::vector<std::string> codes = {"X", "Y", "Z"};
  std::vector<Document> out;
  for (std::size_t i = 0; i < docs; ++i) {
    std::vector<std::string> tokens;
    const std::size_t len = rng.Index(12);
    for (std::size_t t = 0; t < len; ++t) tokens.push_back(words[rng.Index(words.size())]);
    CodeSet c;
    for (const auto& code : codes) {
      if (rng.Uniform() < 0.4) c.push_back(code);
    }
    out.push_back(Doc(prefix + std::to_string(i), JoinTokens(tokens), c));
  }
  return Corpus(std::move(out));
}

TEST(FitTest, CountsOfSingleCodedDocument) {
  GenModel model = Fit(Corpus({Doc("1", "a a", {"X"})}), Order(2));
  EXPECT_EQ(model.RawCount({"X"}, {"<bos>"}, "a"), 1.0);
  EXPECT_EQ(model.RawCount({"X"}, {"a"}, "a"), 1.0);
  EXPECT_EQ(model.RawCount({"X"}, {"a"}, "<eos>"), 1.0);
  // Code-free backoff levels are counted too.
  EXPECT_EQ(model.RawCount({}, {"a"}, "a"), 1.0);
  EXPECT_EQ(model.RawCount({}, {}, "a"), 2.0);
  EXPECT_FALSE(model.dp().has_value());
}

TEST(FitTest, EmptyDocumentContributesOnlyBosToEos) {
  GenModel model = Fit(Corpus({Doc("1", "")}), Order(2));
  EXPECT_EQ(model.RawCount({}, {"<bos>"}, "<eos>"), 1.0);
  EXPECT_EQ(model.vocab_size(), 3u);
  double total = 0.0;
  for (const auto& [context, row] : model.counts()) total += row.total;
  EXPECT_EQ(total, 2.0);  // (<bos>) -> <eos> and () -> <eos>
}

TEST(FitTest, DuplicateDocumentsDoubleEveryCount) {
  GenModel one = Fit(Corpus({Doc("1", "a b c", {"X"})}), Order(3));
  GenModel two = Fit(Corpus({Doc("1", "a b c", {"X"}), Doc("2", "a b c", {"X"})}), Order(3));
  StringCounts a = ByString(one);
  StringCounts b = ByString(two);
  ASSERT_EQ(a.size(), b.size());
  for (const auto& [key, count] : a) EXPECT_EQ(b.at(key), 2.0 * count);
}

TEST(FitTest, RejectsBadArguments) {
  Corpus corpus({Doc("1", "a")});
  EXPECT_THROW(Fit(corpus, Order(0)), Error);
  EXPECT_THROW(Fit(Corpus(), Order(2)), Error);
}

TEST(FitTest, PropertyAdditivity) {
  Rng rng(21);
  for (int trial = 0; trial < 25; ++trial) {
    Corpus a = RandomCorpus(rng, 1 + rng.Index(10), "a");
    Corpus b = RandomCorpus(rng, 1 + rng.Index(10), "b");
    std::vector<Document> both = a.documents();
    both.insert(both.end(), b.documents().begin(), b.documents().end());
    const int order = 1 + static_cast<int>(rng.Index(4));
    StringCounts joint = ByString(Fit(Corpus(both), Order(order)));
    StringCounts sum = ByString(Fit(a, Order(order)));
    for (const auto& [key, count] : ByString(Fit(b, Order(order)))) sum[key] += count;
    EXPECT_EQ(joint, sum);
  }
}

TEST(FitDpTest, InfiniteEpsilonMatchesFit) {
  Rng rng(3);
  Corpus corpus = RandomCorpus(rng, 20, "d");
  GenModel plain = Fit(corpus, Order(3));
  GenModel dp = FitDp(corpus, Order(3), kInf, 1e-5, 1.0, 9);
  EXPECT_EQ(dp.vocab(), plain.vocab());
  EXPECT_EQ(dp.counts(), plain.counts());
  ASSERT_TRUE(dp.dp().has_value());
  EXPECT_EQ(dp.dp()->sigma, 0.0);
}

TEST(FitDpTest, DeterministicFromSeed) {
  Rng rng(4);
  Corpus corpus = RandomCorpus(rng, 15, "d");
  GenModel a = FitDp(corpus, Order(2), 8.0, 1e-5, 1.0, 42);
  GenModel b = FitDp(corpus, Order(2), 8.0, 1e-5, 1.0, 42);
  EXPECT_EQ(GenModelToJson(a).dump(), GenModelToJson(b).dump());
  GenModel c = FitDp(corpus, Order(2), 8.0, 1e-5, 1.0, 43);
  EXPECT_NE(a.counts(), c.counts());
}

TEST(FitDpTest, ClippingBoundsPerDocumentContribution) {
  std::string text;
  for (int i = 0; i < 10; ++i) text += "a b ";
  Corpus corpus({Doc("1", text)});
  std::vector<std::string> vocab;
  auto raw = CountNgrams(corpus, 2, 1.0, &vocab);
  const auto a = static_cast<TokenId>(std::find(vocab.begin(), vocab.end(), "a") - vocab.begin());
  const auto b = static_cast<TokenId>(std::find(vocab.begin(), vocab.end(), "b") - vocab.begin());
  EXPECT_EQ(raw.at(Context{a}).at(b), 1.0);
  auto unclipped = CountNgrams(corpus, 2, std::nullopt);
  EXPECT_EQ(unclipped.at(Context{a}).at(b), 10.0);
}

TEST(FitDpTest, PropertyClippedCountsBoundedByClipTimesDocuments) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    Corpus corpus = RandomCorpus(rng, 1 + rng.Index(15), "d");
    const double clip = 0.25 + rng.Uniform() * 2.0;
    for (const auto& [context, row] : CountNgrams(corpus, 3, clip)) {
      for (const auto& [token, count] : row) {
        EXPECT_LE(count, clip * static_cast<double>(corpus.size()) * (1.0 + 1e-12));
      }
    }
  }
}

TEST(FitDpTest, NoisedModelIsValid) {
  Rng rng(10);
  Corpus corpus = RandomCorpus(rng, 30, "d");
  GenModel model = FitDp(corpus, Order(3), 8.0, 1e-5, 1.0, 5);
  for (const auto& [context, row] : model.counts()) {
    double sum = 0.0;
    for (TokenId t = 0; t < model.vocab_size(); ++t) {
      const double c = model.Count(context, row, t);
      ASSERT_GE(c, 0.0);
      sum += c;
    }
    EXPECT_NEAR(sum, row.total, 1e-9 * std::max(1.0, row.total));
  }
}

TEST(FitDpTest, RejectsInvalidParameters) {
  Corpus corpus({Doc("1", "a")});
  EXPECT_THROW(FitDp(corpus, Order(2), 8.0, 0.0, 1.0, 1), Error);
  EXPECT_THROW(FitDp(corpus, Order(2), 8.0, 1.0, 1.0, 1), Error);
  EXPECT_THROW(FitDp(corpus, Order(2), kInf, 2.0, 1.0, 1), Error);
  EXPECT_THROW(FitDp(corpus, Order(2), -1.0, 1e-5, 1.0, 1), Error);
  EXPECT_THROW(FitDp(corpus, Order(2), 8.0, 1e-5, 0.0, 1), Error);
}

TEST(GaussianSigmaTest, FormulaAndMonotonicity) {
  // sqrt(2 ln(1.25e5)) / 8
  EXPECT_NEAR(GaussianSigma(8.0, 1e-5, 1.0), 0.6056, 1e-4);
  EXPECT_GT(GaussianSigma(4.0, 1e-5, 1.0), GaussianSigma(8.0, 1e-5, 1.0));
  EXPECT_GT(GaussianSigma(8.0, 1e-5, 1.0), GaussianSigma(16.0, 1e-5, 1.0));
  EXPECT_EQ(GaussianSigma(kInf, 1e-5, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(GaussianSigma(8.0, 1e-5, 2.0), 2.0 * GaussianSigma(8.0, 1e-5, 1.0));
}

std::size_t Argmax(const GenModel& model, const std::vector<double>& probs) {
  (void)model;
  return static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin());
}

TEST(NextTokenDistTest, ObservedContinuationDominates) {
  GenModel model = Fit(Corpus({Doc("1", "a b")}), Order(2));
  auto probs = NextTokenDist(model, {}, {"a"});
  EXPECT_EQ(model.vocab()[Argmax(model, probs)], "b");
}

TEST(NextTokenDistTest, UnseenHistoryFallsBackToSmoothedUnigram) {
  GenModel model = Fit(Corpus({Doc("1", "a b b")}), Order(3));
  auto probs = NextTokenDist(model, {}, {"zzz", "qqq"});
  EXPECT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-12);
  // Unigram level: a:1, b:2, <eos>:1 over 4 events.
  const double v = static_cast<double>(model.vocab_size());
  EXPECT_NEAR(probs[model.Lookup("b")], (2.0 + 0.01) / (4.0 + 0.01 * v), 1e-12);
  EXPECT_NEAR(probs[model.Lookup("a")], (1.0 + 0.01) / (4.0 + 0.01 * v), 1e-12);
}

TEST(NextTokenDistTest, CodesSeparateConditionalCounts) {
  GenModel model = Fit(Corpus({Doc("1", "x x x", {"X"}), Doc("2", "y y y", {"Y"}),
                               Doc("3", "x x", {"X"}), Doc("4", "y", {"Y"})}),
                       Order(3));
  EXPECT_EQ(model.vocab()[Argmax(model, NextTokenDist(model, {"X"}, {}))], "x");
  EXPECT_EQ(model.vocab()[Argmax(model, NextTokenDist(model, {"Y"}, {}))], "y");
  // An unknown code is dropped, leaving the known one in charge.
  EXPECT_EQ(model.vocab()[Argmax(model, NextTokenDist(model, {"X", "nope"}, {}))], "x");
}

TEST(NextTokenDistTest, AllUnknownConditioningIsUnigram) {
  GenModel model = Fit(Corpus({Doc("1", "x x x", {"X"}), Doc("2", "y", {"Y"})}), Order(2));
  auto probs = NextTokenDist(model, {"Q"}, {"never"});
  const double v = static_cast<double>(model.vocab_size());
  // Global unigram: x:3, y:1, <eos>:2.
  EXPECT_NEAR(probs[model.Lookup("x")], (3.0 + 0.01) / (6.0 + 0.01 * v), 1e-12);
}

TEST(NextTokenDistTest, PropertySumsToOne) {
  Rng rng(12);
  Corpus corpus = RandomCorpus(rng, 40, "d");
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", ".", "zz", "<bos>"};
  const std::vector<std::string> codes = {"X", "Y", "Z", "W"};
  for (const GenModel& model : {Fit(corpus, Order(3)), FitDp(corpus, Order(3), 4.0, 1e-5, 1.0, 2)}) {
    for (int probe = 0; probe < 1000; ++probe) {
      CodeSet c;
      for (const auto& code : codes) {
        if (rng.Uniform() < 0.4) c.push_back(code);
      }
      std::vector<std::string> history;
      const std::size_t len = rng.Index(6);
      for (std::size_t i = 0; i < len; ++i) history.push_back(pool[rng.Index(pool.size())]);
      auto probs = NextTokenDist(model, c, history);
      ASSERT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-9);
      for (double p : probs) ASSERT_GT(p, 0.0);
    }
  }
}

TEST(TruncateTest, TopOneIsArgmax) {
  auto kept = TruncateDistribution({0.1, 0.5, 0.4}, 1, 0.95);
  ASSERT_EQ(kept.size(), 1u);
  EXPECT_EQ(kept[0].first, 1u);
  EXPECT_EQ(kept[0].second, 1.0);
}

TEST(TruncateTest, NucleusStopsAtMass) {
  auto kept = TruncateDistribution({0.05, 0.5, 0.3, 0.15}, 4, 0.8);
  ASSERT_EQ(kept.size(), 2u);
  EXPECT_EQ(kept[0].first, 1u);
  EXPECT_EQ(kept[1].first, 2u);
  EXPECT_DOUBLE_EQ(kept[0].second, 0.625);
}

TEST(TruncateTest, PropertyMonotoneTruncation) {
  Rng rng(17);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t v = 1 + rng.Index(30);
    std::vector<double> probs(v);
    double sum = 0.0;
    for (double& p : probs) sum += (p = rng.Uniform() < 0.2 ? 0.0 : rng.Uniform());
    if (sum == 0.0) continue;
    for (double& p : probs) p /= sum;
    const std::size_t k = 1 + rng.Index(v + 3);
    const double top_p = 0.05 + 0.95 * rng.Uniform();
    auto kept = TruncateDistribution(probs, k, top_p);

    std::vector<std::size_t> order(v);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return probs[a] > probs[b]; });
    std::vector<std::size_t> top;
    double top_mass = 0.0;
    for (std::size_t i = 0; i < v && top.size() < k; ++i) {
      if (probs[order[i]] > 0.0) {
        top.push_back(order[i]);
        top_mass += probs[order[i]];
      }
    }
    double kept_mass = 0.0;
    double renormalized = 0.0;
    for (const auto& [t, p] : kept) {
      ASSERT_NE(std::find(top.begin(), top.end(), t), top.end());
      kept_mass += probs[t];
      renormalized += p;
    }
    EXPECT_NEAR(renormalized, 1.0, 1e-12);
    EXPECT_TRUE(kept_mass >= top_p || std::abs(kept_mass - top_mass) < 1e-12);
  }
}

TEST(SampleNoteTest, TopOneIsGreedyRegardlessOfSeed) {
  Rng rng(30);
  GenModel model = Fit(RandomCorpus(rng, 30, "d"), Order(3));
  SamplerConfig cfg;
  cfg.top_k = 1;
  cfg.seed = 1;
  const std::string first = SampleNote(model, {"X"}, cfg).text;
  for (std::uint64_t seed = 2; seed < 10; ++seed) {
    cfg.seed = seed;
    EXPECT_EQ(SampleNote(model, {"X"}, cfg).text, first);
  }
}

TEST(SampleNoteTest, SameSeedSameText) {
  Rng rng(31);
  GenModel model = Fit(RandomCorpus(rng, 30, "d"), Order(3));
  SamplerConfig cfg;
  cfg.seed = 77;
  Document a = SampleNote(model, {"Y"}, cfg);
  Document b = SampleNote(model, {"Y"}, cfg);
  EXPECT_EQ(a.text, b.text);
  EXPECT_EQ(a.codes, CodeSet{"Y"});
  EXPECT_TRUE(a.entities.empty());
  EXPECT_TRUE(a.attrs.empty());
}

TEST(SampleNoteTest, GreedyReproducesUniqueChain) {
  GenModel model = Fit(Corpus({Doc("1", "s a b e")}), Order(2));
  SamplerConfig cfg;
  cfg.top_k = 1;
  EXPECT_EQ(SampleNote(model, {}, cfg).text, "s a b e");
}

TEST(SampleNoteTest, RespectsMaxLenAndNeverEmitsReservedTokens) {
  GenModel model = Fit(Corpus({Doc("1", "a a a a a a a a", {"X"})}), Order(2, 1.0));
  SamplerConfig cfg;
  cfg.max_len = 5;
  cfg.top_k = 50;
  cfg.top_p = 1.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    TokenSeq seq = Tokenize(SampleNote(model, {"X"}, cfg).text);
    EXPECT_LE(seq.size(), 5u);
    for (const auto& token : seq.tokens) EXPECT_EQ(token, "a");
  }
}

TEST(GenerateCorpusTest, PointMassCodes) {
  GenModel model = Fit(Corpus({Doc("1", "a b", {"X"}), Doc("2", "c", {"Y"})}), Order(2));
  SamplerConfig cfg;
  Corpus synth = GenerateCorpus(model, 25, CodeSetDistribution::PointMass({"X"}), cfg);
  ASSERT_EQ(synth.size(), 25u);
  for (const Document& doc : synth.documents()) EXPECT_EQ(doc.codes, CodeSet{"X"});
  EXPECT_TRUE(GenerateCorpus(model, 0, CodeSetDistribution::PointMass({"X"}), cfg).empty());
}

TEST(GenerateCorpusTest, CodeSharesConcentrate) {
  GenModel model = Fit(Corpus({Doc("1", "a b", {"A"}), Doc("2", "c", {"B"})}), Order(2));
  SamplerConfig cfg;
  cfg.seed = 2024;
  cfg.max_len = 4;
  CodeSetDistribution dist({{{"A"}, 0.7}, {{"B"}, 0.3}});
  Corpus synth = GenerateCorpus(model, 1000, dist, cfg);
  const auto a = std::count_if(synth.documents().begin(), synth.documents().end(),
                               [](const Document& d) { return d.codes == CodeSet{"A"}; });
  // Binomial(1000, 0.7) has sd 0.0145; 0.05 is ~3.4 sd.
  EXPECT_NEAR(static_cast<double>(a) / 1000.0, 0.7, 0.05);
}

TEST(GenerateCorpusTest, DeterministicAndThreadIndependent) {
  Rng rng(33);
  GenModel model = Fit(RandomCorpus(rng, 30, "d"), Order(3));
  SamplerConfig cfg;
  cfg.seed = 5;
  CodeSetDistribution dist({{{"X"}, 0.5}, {{"Y", "Z"}, 0.5}});
  Corpus a = GenerateCorpus(model, 40, dist, cfg, 1);
  Corpus b = GenerateCorpus(model, 40, dist, cfg, 4);
  EXPECT_EQ(a, b);
}

TEST(PerplexityTest, UniformModelEqualsVocabularySize) {
  std::vector<std::string> vocab = GenModel::ReservedVocab();
  for (const char* w : {"a", "b", "c", "d", "e", "f", "g"}) vocab.push_back(w);
  ASSERT_EQ(vocab.size(), 10u);
  GenModel model(Order(1), vocab, {}, std::nullopt, 0);
  EXPECT_DOUBLE_EQ(Perplexity(model, {}, "a b c unknown words here"), 10.0);
  EXPECT_DOUBLE_EQ(Perplexity(model, {"X"}, ""), 10.0);
}

TEST(PerplexityTest, DeterministicChainHasPerplexityOne) {
  GenModel model = Fit(Corpus({Doc("1", "a b")}), Order(2, 0.0));
  EXPECT_EQ(Perplexity(model, {}, "a b"), 1.0);
}

TEST(PerplexityTest, HandComputedBigramValues) {
  // Vocabulary {<bos>, <eos>, <unk>, a, b}; k = 0.01 so k|V| = 0.05.
  // "a b": every step has a single observed continuation with count 1, so
  // each probability is 1.01 / 1.05. "b a": each step is unobserved in a
  // context of total 1, so each probability is 0.01 / 1.05.
  GenModel model = Fit(Corpus({Doc("1", "a b")}), Order(2));
  EXPECT_NEAR(Perplexity(model, {}, "a b"), 1.05 / 1.01, 1e-12);
  EXPECT_NEAR(Perplexity(model, {}, "b a"), 105.0, 1e-9);
}

TEST(PerplexityTest, PropertyAtLeastOne) {
  Rng rng(40);
  Corpus corpus = RandomCorpus(rng, 25, "d");
  GenModel model = Fit(corpus, Order(3));
  for (const Document& doc : corpus.documents()) {
    EXPECT_GE(Perplexity(model, doc.codes, doc.text), 1.0);
    EXPECT_GE(Perplexity(model, {}, doc.text + " zz"), 1.0);
  }
}

TEST(GenModelIoTest, RoundTripIsExact) {
  Rng rng(50);
  Corpus corpus = RandomCorpus(rng, 20, "d");
  for (const GenModel& model :
       {Fit(corpus, Order(3)), FitDp(corpus, Order(2), 8.0, 1e-5, 0.5, 99),
        FitDp(corpus, Order(2), kInf, 1e-5, 1.0, 99)}) {
    const auto json = GenModelToJson(model);
    GenModel back = GenModelFromJson(nlohmann::json::parse(json.dump()));
    EXPECT_TRUE(back == model);
    EXPECT_EQ(GenModelToJson(back).dump(), json.dump());
  }
}

TEST(GenModelIoTest, RejectsForeignArtifacts) {
  EXPECT_THROW(GenModelFromJson(nlohmann::json{{"format", "other"}}), Error);
  auto json = GenModelToJson(Fit(Corpus({Doc("1", "a")}), Order(1)));
  json["version"] = 99;
  EXPECT_THROW(GenModelFromJson(json), Error);
}

}  // namespace
}  // namespace synthaudit
