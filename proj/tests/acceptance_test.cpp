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

// Acceptance suite. One test per criterion, named Criterion<NN>_<topic>; a
// listener prints a PASS/FAIL line with the runtime for each. Runtime
// limits are asserted inside the tests.

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthaudit/canary.hpp"
#include "synthaudit/corpus_io.hpp"
#include "synthaudit/generator.hpp"
#include "synthaudit/leakage.hpp"
#include "synthaudit/toy.hpp"
#include "synthaudit/utility.hpp"

namespace synthaudit {
namespace {

namespace fs = std::filesystem;
constexpr double kInf = std::numeric_limits<double>::infinity();

class Stopwatch {
 public:
  double Seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

double Mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

PrivacyArm Dp(double epsilon) {
  PrivacyArm arm;
  arm.tag = "eps=" + std::to_string(static_cast<int>(epsilon));
  arm.epsilon = epsilon;
  return arm;
}

// ---- 1 ---------------------------------------------------------------------

TEST(Acceptance, Criterion01_PhraseOverlapRatioFixtures) {
  Stopwatch clock;
  struct Row {
    std::size_t overlap, union_size;
    double printed;
  };
  const Row rows[] = {{16271, 3229278, 0.00504}, {13537, 2831658, 0.00478},
                      {7447, 2831627, 0.00263},  {6307, 415685, 0.01517},
                      {2448, 395303, 0.00619}};
  for (const Row& r : rows) {
    EXPECT_NEAR(OverlapRatio(r.overlap, r.union_size), r.printed, 5e-5)
        << r.overlap << "/" << r.union_size;
  }
  // The excluded row: its operands give 0.00314, a factor of ten below the
  // printed 0.0314.
  EXPECT_NEAR(OverlapRatio(10312, 3281866), 0.00314, 5e-5);
  EXPECT_GT(std::abs(OverlapRatio(10312, 3281866) - 0.0314), 5e-5);
  EXPECT_LT(clock.Seconds(), 1.0);
}

// ---- 2 ---------------------------------------------------------------------

TEST(Acceptance, Criterion02_FairnessOracleEquivalence) {
  Stopwatch clock;
  Rng rng(20260201);
  std::size_t zero = 0;
  for (int i = 0; i < 1000; ++i) zero += oracle::CheckFairnessInstance(rng) ? 1 : 0;
  EXPECT_GT(zero, 0u);     // the EO = 0 direction is exercised
  EXPECT_LT(zero, 1000u);  // and so is EO > 0
  EXPECT_LT(clock.Seconds(), 5.0);
}

// ---- 3 ---------------------------------------------------------------------

TEST(Acceptance, Criterion03_MetricOracleEquivalence) {
  Stopwatch clock;
  Rng rng(20260301);
  for (int i = 0; i < 1000; ++i) oracle::CheckMetricsInstance(rng);
  EXPECT_LT(clock.Seconds(), 5.0);
}

// ---- 4 and 5: generator helpers -----------------------------------------------

Document Coded(std::string id, std::string text, CodeSet codes) {
  Document d;
  d.id = std::move(id);
  d.text = std::move(text);
  d.codes = std::move(codes);
  return d;
}

Corpus RandomCodedCorpus(Rng& rng, std::size_t docs, const std::string& prefix) {
  const std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g", "."};
  const std::vector<std::string> codes = {"X", "Y", "Z"};
  std::vector<Document> out;
  for (std::size_t i = 0; i < docs; ++i) {
    std::vector<std::string> tokens;
    const std::size_t len = rng.Index(15);
    for (std::size_t t = 0; t < len; ++t) tokens.push_back(words[rng.Index(words.size())]);
    CodeSet c;
    for (const auto& code : codes) {
      if (rng.Uniform() < 0.4) c.push_back(code);
    }
    out.push_back(Coded(prefix + std::to_string(i), JoinTokens(tokens), c));
  }
  return Corpus(std::move(out));
}

NgramOptions Order(int order) {
  NgramOptions options;
  options.order = order;
  return options;
}

// (context tokens, next token) -> count, keyed by strings so that corpora with
// different vocabularies compare.
using StringCounts = std::map<std::pair<std::vector<std::string>, std::string>, double>;

StringCounts ByString(const generator_internal::RawCounts& raw,
                      const std::vector<std::string>& vocab) {
  StringCounts out;
  for (const auto& [context, row] : raw) {
    std::vector<std::string> names;
    for (TokenId id : context) names.push_back(vocab[id]);
    for (const auto& [token, count] : row) out[{names, vocab[token]}] += count;
  }
  return out;
}

StringCounts ModelCounts(const GenModel& model) {
  StringCounts out;
  for (const auto& [context, row] : model.counts()) {
    std::vector<std::string> names;
    for (TokenId id : context) names.push_back(model.vocab()[id]);
    for (const auto& [token, count] : row.entries) out[{names, model.vocab()[token]}] += count;
  }
  return out;
}

// ---- 4 ---------------------------------------------------------------------

TEST(Acceptance, Criterion04_GeneratorCorrectness) {
  Stopwatch clock;
  Rng rng(20260401);

  // Distributions sum to one on 10,000 random probes.
  const Corpus corpus = RandomCodedCorpus(rng, 60, "d");
  const std::vector<std::string> pool = {"a", "b", "c", "d", "e", "f", "g", ".", "unseen"};
  const std::vector<std::string> codes = {"X", "Y", "Z", "W"};
  const GenModel models[] = {Fit(corpus, Order(1)), Fit(corpus, Order(3)),
                             FitDp(corpus, Order(3), 8.0, 1e-5, 1.0, 7),
                             FitDp(corpus, Order(4), 2.0, 1e-5, 1.0, 8)};
  for (int probe = 0; probe < 10000; ++probe) {
    const GenModel& model = models[static_cast<std::size_t>(probe) % 4];
    CodeSet c;
    for (const auto& code : codes) {
      if (rng.Uniform() < 0.4) c.push_back(code);
    }
    std::vector<std::string> history;
    const std::size_t len = rng.Index(8);
    for (std::size_t i = 0; i < len; ++i) history.push_back(pool[rng.Index(pool.size())]);
    const std::vector<double> probs = NextTokenDist(model, c, history);
    ASSERT_NEAR(std::accumulate(probs.begin(), probs.end(), 0.0), 1.0, 1e-9);
  }

  // A model with no counts is uniform over its vocabulary.
  for (std::size_t extra : {1u, 7u, 50u, 997u}) {
    std::vector<std::string> vocab = GenModel::ReservedVocab();
    for (std::size_t w = 0; w < extra; ++w) vocab.push_back("w" + std::to_string(w));
    const GenModel uniform(Order(1), vocab, {}, std::nullopt, 0);
    const double v = static_cast<double>(vocab.size());
    EXPECT_DOUBLE_EQ(Perplexity(uniform, {}, "w0 w0 something else"), v);
    EXPECT_DOUBLE_EQ(Perplexity(uniform, {"X"}, ""), v);
  }

  // top_k = 1 makes sampling independent of the seed.
  for (const GenModel& model : models) {
    SamplerConfig cfg;
    cfg.top_k = 1;
    cfg.seed = 1;
    const Document first = SampleNote(model, {"X"}, cfg);
    for (std::uint64_t seed = 2; seed < 20; ++seed) {
      cfg.seed = seed;
      EXPECT_EQ(SampleNote(model, {"X"}, cfg).text, first.text);
    }
  }

  // Fit is additive over any split of the corpus.
  for (int trial = 0; trial < 50; ++trial) {
    const Corpus whole = RandomCodedCorpus(rng, 2 + rng.Index(30), "s");
    std::vector<Document> left, right;
    for (const Document& d : whole.documents()) (rng.Uniform() < 0.5 ? left : right).push_back(d);
    if (left.empty() || right.empty()) continue;
    const int order = 1 + static_cast<int>(rng.Index(4));
    StringCounts sum = ModelCounts(Fit(Corpus(left), Order(order)));
    for (const auto& [key, count] : ModelCounts(Fit(Corpus(right), Order(order)))) {
      sum[key] += count;
    }
    EXPECT_EQ(ModelCounts(Fit(whole, Order(order))), sum);
  }
  EXPECT_LT(clock.Seconds(), 10.0);
}

// ---- 5 ---------------------------------------------------------------------

TEST(Acceptance, Criterion05_DpMechanismContracts) {
  Stopwatch clock;
  Rng rng(20260501);

  // fit_dp at infinite epsilon is fit.
  for (int trial = 0; trial < 10; ++trial) {
    const Corpus corpus = RandomCodedCorpus(rng, 5 + rng.Index(30), "d");
    const int order = 1 + static_cast<int>(rng.Index(4));
    const GenModel plain = Fit(corpus, Order(order));
    const GenModel dp = FitDp(corpus, Order(order), kInf, 1e-5, 1.0, rng.Bits());
    EXPECT_EQ(dp.vocab(), plain.vocab());
    EXPECT_EQ(dp.counts(), plain.counts());
  }

  // Clipped counts decompose into per-document contributions, none of which
  // exceeds the clip in any cell.
  for (int trial = 0; trial < 20; ++trial) {
    const Corpus corpus = RandomCodedCorpus(rng, 1 + rng.Index(12), "d");
    const double clip = 0.25 + 2.0 * rng.Uniform();
    const int order = 1 + static_cast<int>(rng.Index(4));
    std::vector<std::string> vocab;
    const StringCounts joint = ByString(CountNgrams(corpus, order, clip, &vocab), vocab);
    StringCounts sum;
    for (const Document& doc : corpus.documents()) {
      std::vector<std::string> doc_vocab;
      const Corpus single({doc});
      for (const auto& [key, count] :
           ByString(CountNgrams(single, order, clip, &doc_vocab), doc_vocab)) {
        EXPECT_LE(count, clip);
        sum[key] += count;
      }
    }
    ASSERT_EQ(joint.size(), sum.size());
    for (const auto& [key, count] : joint) EXPECT_NEAR(count, sum.at(key), 1e-9);
  }

  // DP-SGD with no noise and no clipping is SGD, bit for bit.
  ToyOptions toy;
  toy.num_docs = 200;
  toy.second_code_rate = 0.2;
  const Corpus train = MakeToyCorpus(toy);
  TrainOptions options;
  options.epochs = 3;
  options.dimension = 1 << 14;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    options.seed = seed;
    const LinearClassifier sgd = TrainClassifier(train, options);
    const LinearClassifier dp = TrainClassifierDpSgd(train, options, DpSgdOptions{});
    EXPECT_TRUE(sgd.weights() == dp.weights());
    EXPECT_TRUE(sgd.biases() == dp.biases());
  }

  // Every post-clip per-example gradient norm stays within the clip.
  for (double clip : {0.01, 0.1, 1.0, 10.0}) {
    DpSgdOptions dp;
    dp.clip = clip;
    dp.noise_multiplier = 1.1;
    std::size_t calls = 0;
    std::size_t violations = 0;
    dp.on_clip = [&](double pre, double post) {
      ++calls;
      if (post > clip || post > pre) ++violations;
    };
    options.seed = 9;
    const LinearClassifier model = TrainClassifierDpSgd(train, options, dp);
    EXPECT_EQ(calls, train.size() * static_cast<std::size_t>(options.epochs));
    EXPECT_EQ(violations, 0u) << "clip " << clip;
    EXPECT_LE(model.dp()->max_post_clip_norm, clip);
  }
  EXPECT_LT(clock.Seconds(), 30.0);
}

// ---- 6 ---------------------------------------------------------------------

TEST(Acceptance, Criterion06_CanaryMemorizationDirection) {
  Stopwatch clock;
  const int repetitions[] = {0, 1, 10, 100};
  constexpr int kSeeds = 10;
  constexpr std::size_t kCandidates = 10000;
  for (CanarySpec spec : DefaultCanaries()) {
    std::map<int, std::vector<double>> ppl, rank;
    std::vector<double> dp_ppl;
    for (int seed = 0; seed < kSeeds; ++seed) {
      ToyOptions toy;
      toy.num_docs = 500;
      toy.seed = static_cast<std::uint64_t>(seed);
      const Corpus corpus = MakeToyCorpus(toy);
      const std::uint64_t trial_seed = DeriveSeed(static_cast<std::uint64_t>(seed), 6);
      for (int reps : repetitions) {
        spec.repetitions = reps;
        const CanaryResult r =
            RunCanaryTrial(corpus, spec, NgramOptions{}, PrivacyArm{}, kCandidates, trial_seed);
        ppl[reps].push_back(r.perplexity);
        rank[reps].push_back(static_cast<double>(r.rank));
      }
      dp_ppl.push_back(
          RunCanaryTrial(corpus, spec, NgramOptions{}, Dp(8.0), kCandidates, trial_seed)
              .perplexity);
    }
    const std::string kind(CanaryKindName(spec.kind));
    std::cout << "  canary " << kind << ": mean perplexity";
    for (int reps : repetitions) std::cout << " " << reps << "x=" << Mean(ppl[reps]);
    std::cout << ", eps=8 at 100x=" << Mean(dp_ppl) << "; mean rank 0x=" << Mean(rank[0])
              << " 100x=" << Mean(rank[100]) << "\n";
    EXPECT_GE(Mean(ppl[0]), Mean(ppl[1])) << kind;
    EXPECT_GE(Mean(ppl[1]), Mean(ppl[10])) << kind;
    EXPECT_GE(Mean(ppl[10]), Mean(ppl[100])) << kind;
    EXPECT_LT(Mean(rank[100]), Mean(rank[0])) << kind;
    EXPECT_GE(Mean(dp_ppl), Mean(ppl[100])) << kind;
  }
  EXPECT_LT(clock.Seconds(), 300.0);
}

// ---- 7 ---------------------------------------------------------------------

TEST(Acceptance, Criterion07_LeakageDirection) {
  Stopwatch clock;
  const double epsilons[] = {kInf, 8.0, 4.0};
  std::map<double, std::vector<double>> rates;
  int positive_at_8 = 0;
  for (int seed = 0; seed < 10; ++seed) {
    ToyOptions toy;
    toy.num_names = 20;
    toy.seed = static_cast<std::uint64_t>(seed);
    const Corpus real = MakeToyCorpus(toy);
    const EntityIndex index = BuildEntityIndex(real);
    // All 20 planted names are in the index.
    std::size_t names = 0;
    for (const auto& [key, stats] : index.entries()) names += key.category == "name";
    ASSERT_EQ(names, 20u);
    for (double epsilon : epsilons) {
      PrivacyArm arm = std::isinf(epsilon) ? PrivacyArm{} : Dp(epsilon);
      const GenModel model =
          FitArm(real, NgramOptions{}, arm, DeriveSeed(static_cast<std::uint64_t>(seed), 5));
      SamplerConfig sampler;
      sampler.seed = DeriveSeed(static_cast<std::uint64_t>(seed), 6);
      const Corpus synth =
          GenerateCorpus(model, real.size(), CodeSetDistributionOf(real), sampler);
      const double rate = ComputeEntityLeakage(index, synth).rates.at("name");
      rates[epsilon].push_back(rate);
      if (epsilon == 8.0 && rate > 0.0) ++positive_at_8;
    }
  }
  std::cout << "  mean name leakage: inf=" << Mean(rates[kInf]) << " eps=8=" << Mean(rates[8.0])
            << " eps=4=" << Mean(rates[4.0]) << "; eps=8 positive in " << positive_at_8
            << "/10 seeds\n";
  EXPECT_GE(Mean(rates[kInf]), Mean(rates[8.0]));
  EXPECT_GE(Mean(rates[8.0]), Mean(rates[4.0]));
  EXPECT_GE(positive_at_8, 1);
  EXPECT_LT(clock.Seconds(), 300.0);
}

// ---- 8 ---------------------------------------------------------------------

struct UtilityMeans {
  double real = 0, inf = 0, eps8 = 0;
};

UtilityMeans UtilityOrdering(double label_noise) {
  std::vector<double> real, inf, eps8;
  for (int seed = 0; seed < 10; ++seed) {
    const auto s = static_cast<std::uint64_t>(seed);
    ToyOptions toy;
    toy.seed = s;
    toy.label_noise = label_noise;
    const CorpusSplit split = RestrictAndSplit(MakeToyCorpus(toy), 10, {0.7, 0.1, 0.2}, s);
    TrainOptions options;
    options.seed = s;
    options.label_space = split.train.label_space();
    real.push_back(Evaluate(TrainClassifier(split.train, options), split.test).micro_f1);
    for (PrivacyArm arm : {PrivacyArm{}, Dp(8.0)}) {
      const GenModel model = FitArm(split.train, NgramOptions{}, arm, DeriveSeed(s, 5));
      SamplerConfig sampler;
      sampler.seed = DeriveSeed(s, 6);
      const Corpus synth = GenerateCorpus(model, split.train.size(),
                                          CodeSetDistributionOf(split.train), sampler);
      const double f1 = Evaluate(TrainClassifier(synth, options), split.test).micro_f1;
      (arm.private_release() ? eps8 : inf).push_back(f1);
    }
  }
  return {Mean(real), Mean(inf), Mean(eps8)};
}

TEST(Acceptance, Criterion08_UtilityOrdering) {
  Stopwatch clock;
  const UtilityMeans noisy = UtilityOrdering(0.2);
  std::cout << "  noisy task micro-F1: real=" << noisy.real << " inf=" << noisy.inf
            << " eps=8=" << noisy.eps8 << "\n";
  EXPECT_GE(noisy.real, noisy.inf);
  EXPECT_GE(noisy.inf, noisy.eps8);
  const UtilityMeans clean = UtilityOrdering(0.0);
  std::cout << "  clean task micro-F1: real=" << clean.real << " inf=" << clean.inf
            << " eps=8=" << clean.eps8 << "\n";
  EXPECT_GE(clean.real, 0.95);
  EXPECT_LT(clock.Seconds(), 300.0);
}

// ---- 9 ---------------------------------------------------------------------

// 10,000 documents of 100 tokens over a 5,000-word vocabulary. The real side
// marks about 5% of positions as 1-3 token entities; both sides share the
// vocabulary, so synthetic documents hit real entities constantly.
Corpus ScaleCorpus(Rng& rng, const std::string& prefix, bool entities) {
  std::vector<std::string> words;
  for (int i = 0; i < 5000; ++i) words.push_back("w" + std::to_string(i));
  std::vector<Document> docs;
  docs.reserve(10000);
  for (int d = 0; d < 10000; ++d) {
    Document doc;
    doc.id = prefix + std::to_string(d);
    std::vector<std::size_t> starts;
    for (int t = 0; t < 100; ++t) {
      if (!doc.text.empty()) doc.text += ' ';
      starts.push_back(doc.text.size());
      doc.text += words[rng.Index(words.size())];
    }
    if (entities) {
      std::size_t t = 0;
      while (t < 100) {
        if (rng.Uniform() < 0.05) {
          const std::size_t len = 1 + rng.Index(3);
          const std::size_t last = std::min<std::size_t>(t + len, 100) - 1;
          const std::size_t end = last + 1 < 100 ? starts[last + 1] - 1 : doc.text.size();
          doc.entities.push_back({starts[t], end, rng.Uniform() < 0.5 ? "name" : "location", ""});
          t = last + 2;
        } else {
          ++t;
        }
      }
    }
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

TEST(Acceptance, Criterion09_ScannerPerformanceAndOracle) {
  Rng rng(20260901);
  const Corpus real = ScaleCorpus(rng, "r", true);
  const Corpus synth = ScaleCorpus(rng, "s", false);
  const std::size_t tokens = oracle::TokenCount(real) + oracle::TokenCount(synth);
  EXPECT_EQ(tokens, 2000000u);

  Stopwatch clock;
  const EntityIndex index = BuildEntityIndex(real, 1);
  const LeakageReport report = ScanLeakage(real, index, synth, 1, 4, 1);
  const double seconds = clock.Seconds();
  std::cout << "  full scan of " << tokens << " tokens: " << seconds << " s, "
            << index.size() << " entities, overlap " << report.phrases.overlap_count << "/"
            << report.phrases.total_phrases_union << "\n";
  EXPECT_GT(report.phrases.overlap_count, 0u);
  EXPECT_LT(seconds, 60.0);

  Rng small(20260902);
  int checked = 0;
  for (int trial = 0; trial < 400; ++trial) {
    const oracle::RandomCorpora c = oracle::MakeRandomCorpora(small);
    if (oracle::TokenCount(c.real) + oracle::TokenCount(c.synth) > 1000) continue;
    oracle::ExpectScanMatchesNaive(c.real, c.synth, 1, 4, 1);
    ++checked;
  }
  EXPECT_GE(checked, 300);
}

// ---- 10 --------------------------------------------------------------------

int RunCli(const std::string& args) {
  const std::string cmd = std::string(SYNTHAUDIT_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> ReadTree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file()) continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    files[fs::relative(entry.path(), root).string()] = s.str();
  }
  return files;
}

TEST(Acceptance, Criterion10_EndToEndDeterminism) {
  const fs::path dir = fs::temp_directory_path() / "synthaudit_acceptance_c10";
  fs::remove_all(dir);
  fs::create_directories(dir);
  ToyOptions toy;
  toy.num_docs = 300;
  toy.second_code_rate = 0.1;
  toy.seed = 10;
  WriteJsonl(MakeToyCorpus(toy), (dir / "toy.jsonl").string());
  std::ofstream(dir / "audit.json") << R"({
  "schema_version": 1,
  "real_corpus": "toy.jsonl",
  "master_seed": 2026,
  "arms": [{"epsilon": "inf"}, {"epsilon": 8}, {"epsilon": 4}],
  "split": {"top_n": 4, "ratios": [0.8, 0.1, 0.1]},
  "canary": {"enabled": true, "repetitions": [0, 10], "num_candidates": 100},
  "utility": {"seeds": 2, "epochs": 3},
  "fairness": {"attributes": ["gender", "race"], "min_support": 5}
})";
  const std::string config = (dir / "audit.json").string();
  ASSERT_EQ(RunCli("audit --config " + config + " --out " + (dir / "a").string()), 0);
  ASSERT_EQ(RunCli("audit --config " + config + " --out " + (dir / "b").string() + " --jobs 2"),
            0);
  const auto a = ReadTree(dir / "a");
  const auto b = ReadTree(dir / "b");
  ASSERT_TRUE(a.contains("report.json"));
  EXPECT_GE(a.size(), 10u);
  EXPECT_EQ(a.size(), b.size());
  for (const auto& [name, bytes] : a) {
    ASSERT_TRUE(b.contains(name)) << name;
    EXPECT_TRUE(bytes == b.at(name)) << name << " differs between runs";
  }
}

// Prints "ACCEPTANCE <n> PASS|FAIL <test> (<ms> ms)" after each criterion and
// a tally at the end.
class CriterionPrinter : public ::testing::EmptyTestEventListener {
 public:
  void OnTestEnd(const ::testing::TestInfo& info) override {
    const std::string name = info.name();
    const std::string number = name.substr(std::string("Criterion").size(), 2);
    const bool passed = info.result()->Passed();
    (passed ? passed_ : failed_) += 1;
    std::cout << "ACCEPTANCE " << std::stoi(number) << " " << (passed ? "PASS" : "FAIL") << " "
              << name << " (" << info.result()->elapsed_time() << " ms)" << std::endl;
  }
  void OnTestProgramEnd(const ::testing::UnitTest&) override {
    std::cout << "ACCEPTANCE SUMMARY " << passed_ << " passed, " << failed_ << " failed"
              << std::endl;
  }

 private:
  int passed_ = 0;
  int failed_ = 0;
};

}  // namespace
}  // namespace synthaudit

int main(int argc, char** argv) {
  ::testing::InitGoogleTest(&argc, argv);
  ::testing::UnitTest::GetInstance()->listeners().Append(new synthaudit::CriterionPrinter);
  return RUN_ALL_TESTS();
}
