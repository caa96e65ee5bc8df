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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/parallel.hpp"
#include "synthaudit/random.hpp"
#include "synthaudit/text.hpp"

namespace synthaudit {

inline constexpr std::string_view kBosToken = "<bos>";
inline constexpr std::string_view kEosToken = "<eos>";
inline constexpr std::string_view kUnkToken = "<unk>";

// Pseudo-token that carries a control code in the conditioning prefix.
inline std::string CodeToken(std::string_view code) {
  return "<code:" + std::string(code) + ">";
}

using TokenId = std::uint32_t;

// Conditioning context: code pseudo-token ids in ascending order followed by
// up to order-1 history token ids.
using Context = std::vector<TokenId>;

inline std::uint64_t ContextKey(const Context& context) {
  std::uint64_t h = Mix64(context.size());
  for (TokenId id : context) h = Mix64(h ^ id);
  return h;
}

struct ContextHash {
  std::size_t operator()(const Context& context) const {
    return static_cast<std::size_t>(ContextKey(context));
  }
};

// Continuation counts of one context. `entries` holds the stored (observed or
// noised-observed) counts sorted by token id; `total` is the sum over the
// whole vocabulary, including noise released on structural zeros.
struct CountRow {
  std::vector<std::pair<TokenId, double>> entries;
  double total = 0.0;

  bool operator==(const CountRow&) const = default;
};

using CountTable = std::unordered_map<Context, CountRow, ContextHash>;

// Parameters of the Gaussian count release. epsilon may be +infinity, in
// which case sigma is zero and no noise is added.
struct DpParams {
  double epsilon = std::numeric_limits<double>::infinity();
  double delta = 1e-5;
  double clip = 1.0;
  double sigma = 0.0;

  bool operator==(const DpParams&) const = default;
};

// Classic Gaussian-mechanism scale clip * sqrt(2 ln(1.25 / delta)) / epsilon.
inline double GaussianSigma(double epsilon, double delta, double clip) {
  if (std::isinf(epsilon) && epsilon > 0) return 0.0;
  return clip * std::sqrt(2.0 * std::log(1.25 / delta)) / epsilon;
}

inline DpParams MakeDpParams(double epsilon, double delta, double clip) {
  if (!(epsilon > 0.0)) throw Error("fit", "epsilon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) {
    throw Error("fit", "delta must lie in (0, 1)");
  }
  if (!(clip > 0.0)) throw Error("fit", "clip must be positive");
  return {epsilon, delta, clip, GaussianSigma(epsilon, delta, clip)};
}

struct NgramOptions {
  int order = 3;
  double smoothing_k = 0.01;
  double backoff_alpha = 0.4;
};

struct SamplerConfig {
  std::size_t top_k = 50;
  double top_p = 0.95;
  std::size_t max_len = 64;
  std::uint64_t seed = 0;

  void Validate() const {
    if (top_k < 1) throw Error("generate", "top_k must be at least 1");
    if (!(top_p > 0.0 && top_p <= 1.0)) {
      throw Error("generate", "top_p must lie in (0, 1]");
    }
    if (max_len < 1) throw Error("generate", "max_len must be at least 1");
  }
};

// Control-code-conditioned n-gram model with add-k smoothing and suffix
// backoff. Immutable once built; safe to share across threads.
class GenModel {
 public:
  static constexpr TokenId kBos = 0;
  static constexpr TokenId kEos = 1;
  static constexpr TokenId kUnk = 2;

  GenModel() : GenModel(NgramOptions{}, ReservedVocab(), {}, std::nullopt, 0) {}

  GenModel(NgramOptions options, std::vector<std::string> vocab,
           CountTable counts, std::optional<DpParams> dp,
           std::uint64_t noise_seed)
      : options_(options),
        vocab_(std::move(vocab)),
        counts_(std::move(counts)),
        dp_(dp),
        noise_seed_(noise_seed) {
    if (options_.order < 1) throw Error("fit", "order must be at least 1");
    if (!(options_.smoothing_k >= 0.0)) {
      throw Error("fit", "smoothing_k must be non-negative");
    }
    if (!(options_.backoff_alpha > 0.0 && options_.backoff_alpha < 1.0)) {
      throw Error("fit", "backoff_alpha must lie in (0, 1)");
    }
    if (vocab_.size() < 3 || vocab_[kBos] != kBosToken ||
        vocab_[kEos] != kEosToken || vocab_[kUnk] != kUnkToken) {
      throw Error("fit", "vocabulary must start with <bos>, <eos>, <unk>");
    }
    for (TokenId id = 0; id < vocab_.size(); ++id) {
      if (!index_.emplace(vocab_[id], id).second) {
        throw Error("fit", "duplicate vocabulary token '" + vocab_[id] + "'");
      }
      if (vocab_[id].starts_with("<code:")) code_ids_.insert(id);
    }
    for (const auto& [context, row] : counts_) {
      for (TokenId id : context) CheckId(id);
      for (const auto& [id, value] : row.entries) {
        CheckId(id);
        if (!(value >= 0.0)) throw Error("fit", "counts must be non-negative");
      }
    }
  }

  static std::vector<std::string> ReservedVocab() {
    return {std::string(kBosToken), std::string(kEosToken),
            std::string(kUnkToken)};
  }

  const NgramOptions& options() const { return options_; }
  int order() const { return options_.order; }
  double smoothing_k() const { return options_.smoothing_k; }
  double backoff_alpha() const { return options_.backoff_alpha; }
  const std::vector<std::string>& vocab() const { return vocab_; }
  std::size_t vocab_size() const { return vocab_.size(); }
  const CountTable& counts() const { return counts_; }
  const std::optional<DpParams>& dp() const { return dp_; }
  std::uint64_t noise_seed() const { return noise_seed_; }

  TokenId Lookup(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
  }

  std::optional<TokenId> CodeId(std::string_view code) const {
    auto it = index_.find(CodeToken(code));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Tokens the sampler may emit: everything except <bos>, <unk> and code
  // pseudo-tokens.
  bool IsOutputToken(TokenId id) const {
    return id != kBos && id != kUnk && !code_ids_.contains(id);
  }

  // Known code ids of a code set; unknown codes are dropped.
  std::vector<TokenId> CodeIds(const CodeSet& codes) const {
    std::vector<TokenId> ids;
    for (const std::string& code : codes) {
      if (auto id = CodeId(code)) ids.push_back(*id);
    }
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  const CountRow* Row(const Context& context) const {
    auto it = counts_.find(context);
    return it == counts_.end() ? nullptr : &it->second;
  }

  // Released count of `token` after `context`, including the noise a DP
  // release places on structural zeros.
  double Count(const Context& context, const CountRow& row,
               TokenId token) const {
    auto it = std::lower_bound(
        row.entries.begin(), row.entries.end(), token,
        [](const auto& entry, TokenId t) { return entry.first < t; });
    if (it != row.entries.end() && it->first == token) return it->second;
    return ZeroFill(ContextKey(context), token);
  }

  // Count lookup by strings; "<bos>" may appear in the history.
  double RawCount(const CodeSet& codes, const std::vector<std::string>& history,
                  std::string_view token) const {
    Context context = CodeIds(codes);
    for (const std::string& h : history) context.push_back(Lookup(h));
    const CountRow* row = Row(context);
    return row == nullptr ? 0.0 : Count(context, *row, Lookup(token));
  }

  // Conditioning context actually used for (codes, <bos> + history): the
  // longest coded suffix that was observed, then the longest code-free
  // suffix. Returns nullopt when nothing matches, which means uniform.
  std::optional<Context> ResolveContext(const std::vector<TokenId>& code_ids,
                                        const std::vector<TokenId>& history) const {
    const std::size_t stream = history.size() + 1;
    const std::size_t longest =
        std::min<std::size_t>(static_cast<std::size_t>(order() - 1), stream);
    auto suffix = [&](const std::vector<TokenId>& prefix, std::size_t k) {
      Context context = prefix;
      for (std::size_t j = stream - k; j < stream; ++j) {
        context.push_back(j == 0 ? kBos : history[j - 1]);
      }
      return context;
    };
    auto usable = [&](const Context& context) {
      const CountRow* row = Row(context);
      return row != nullptr &&
             row->total + smoothing_k() * static_cast<double>(vocab_size()) > 0.0;
    };
    // Each step down the chain would scale the estimate by backoff_alpha; a
    // constant factor on a single level cancels under renormalization, so
    // the first usable level's smoothed estimate is the distribution.
    for (std::size_t k = longest + 1; k-- > 0;) {
      Context context = suffix(code_ids, k);
      if (usable(context)) return context;
    }
    if (!code_ids.empty()) {
      for (std::size_t k = longest + 1; k-- > 0;) {
        Context context = suffix({}, k);
        if (usable(context)) return context;
      }
    }
    return std::nullopt;
  }

  // P(token | codes, <bos> + history) without materializing the full
  // distribution.
  double Probability(const std::vector<TokenId>& code_ids,
                     const std::vector<TokenId>& history, TokenId token) const {
    const auto context = ResolveContext(code_ids, history);
    const double v = static_cast<double>(vocab_size());
    if (!context) return 1.0 / v;
    const CountRow& row = *Row(*context);
    return (Count(*context, row, token) + smoothing_k()) /
           (row.total + smoothing_k() * v);
  }

  std::vector<double> Distribution(const std::vector<TokenId>& code_ids,
                                   const std::vector<TokenId>& history) const {
    const std::size_t v = vocab_size();
    std::vector<double> probs(v, 1.0 / static_cast<double>(v));
    const auto context = ResolveContext(code_ids, history);
    if (!context) return probs;
    const CountRow& row = *Row(*context);
    const std::uint64_t key = ContextKey(*context);
    for (TokenId t = 0; t < v; ++t) probs[t] = ZeroFill(key, t);
    for (const auto& [t, value] : row.entries) probs[t] = value;
    double sum = 0.0;
    for (double& p : probs) {
      p += smoothing_k();
      sum += p;
    }
    for (double& p : probs) p /= sum;
    return probs;
  }

  bool operator==(const GenModel& other) const {
    return options_.order == other.options_.order &&
           options_.smoothing_k == other.options_.smoothing_k &&
           options_.backoff_alpha == other.options_.backoff_alpha &&
           vocab_ == other.vocab_ && counts_ == other.counts_ &&
           dp_ == other.dp_ && noise_seed_ == other.noise_seed_;
  }

 private:
  void CheckId(TokenId id) const {
    if (id >= vocab_.size()) throw Error("fit", "count refers to unknown token id");
  }

  double ZeroFill(std::uint64_t context_key, TokenId token) const {
    if (!dp_ || dp_->sigma == 0.0) return 0.0;
    return std::max(0.0, dp_->sigma * NormalFromKey(DeriveSeed(
                                          noise_seed_, context_key, token)));
  }

  NgramOptions options_;
  std::vector<std::string> vocab_;
  CountTable counts_;
  std::optional<DpParams> dp_;
  std::uint64_t noise_seed_ = 0;
  std::unordered_map<std::string, TokenId> index_;
  std::set<TokenId> code_ids_;
};

namespace generator_internal {

struct Encoded {
  std::vector<std::string> vocab;
  std::vector<std::vector<TokenId>> code_ids;  // per document
  std::vector<std::vector<TokenId>> streams;   // per document: <bos> .. <eos>
};

inline Encoded Encode(const Corpus& corpus) {
  std::set<std::string> codes;
  std::set<std::string> words;
  std::vector<TokenSeq> tokenized;
  tokenized.reserve(corpus.size());
  for (const Document& doc : corpus.documents()) {
    codes.insert(doc.codes.begin(), doc.codes.end());
    tokenized.push_back(Tokenize(doc.text));
    words.insert(tokenized.back().tokens.begin(), tokenized.back().tokens.end());
  }
  Encoded out;
  out.vocab = GenModel::ReservedVocab();
  std::unordered_map<std::string, TokenId> index;
  for (const std::string& code : codes) {
    index.emplace(CodeToken(code), static_cast<TokenId>(out.vocab.size()));
    out.vocab.push_back(CodeToken(code));
  }
  for (const std::string& word : words) {
    index.emplace(word, static_cast<TokenId>(out.vocab.size()));
    out.vocab.push_back(word);
  }
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    std::vector<TokenId> code_ids;
    for (const std::string& code : corpus[d].codes) {
      code_ids.push_back(index.at(CodeToken(code)));
    }
    std::sort(code_ids.begin(), code_ids.end());
    std::vector<TokenId> stream{GenModel::kBos};
    for (const std::string& token : tokenized[d].tokens) {
      stream.push_back(index.at(token));
    }
    stream.push_back(GenModel::kEos);
    out.code_ids.push_back(std::move(code_ids));
    out.streams.push_back(std::move(stream));
  }
  return out;
}

// Calls visit(context, token) once per (context, predicted token) event of a
// document: every coded suffix of length 0..order-1 and, for documents with
// codes, the same suffixes without the code prefix.
template <typename Visit>
void ForEachEvent(const std::vector<TokenId>& code_ids,
                  const std::vector<TokenId>& stream, int order, Visit&& visit) {
  const auto max_history = static_cast<std::size_t>(order - 1);
  for (std::size_t i = 1; i < stream.size(); ++i) {
    const std::size_t longest = std::min(max_history, i);
    for (std::size_t k = 0; k <= longest; ++k) {
      Context coded = code_ids;
      coded.insert(coded.end(), stream.begin() + (i - k), stream.begin() + i);
      visit(coded, stream[i]);
      if (!code_ids.empty()) {
        visit(Context(stream.begin() + (i - k), stream.begin() + i), stream[i]);
      }
    }
  }
}

using RawCounts =
    std::unordered_map<Context, std::map<TokenId, double>, ContextHash>;

}  // namespace generator_internal

// Pre-noise n-gram counts of a corpus. With a clip, each document contributes
// at most `clip` to any single (context, token) count.
inline generator_internal::RawCounts CountNgrams(
    const Corpus& corpus, int order, std::optional<double> clip,
    std::vector<std::string>* vocab_out = nullptr) {
  if (order < 1) throw Error("fit", "order must be at least 1");
  auto encoded = generator_internal::Encode(corpus);
  generator_internal::RawCounts counts;
  for (std::size_t d = 0; d < corpus.size(); ++d) {
    if (!clip) {
      generator_internal::ForEachEvent(
          encoded.code_ids[d], encoded.streams[d], order,
          [&](const Context& c, TokenId t) { counts[c][t] += 1.0; });
      continue;
    }
    generator_internal::RawCounts local;
    generator_internal::ForEachEvent(
        encoded.code_ids[d], encoded.streams[d], order,
        [&](const Context& c, TokenId t) { local[c][t] += 1.0; });
    for (auto& [context, row] : local) {
      auto& target = counts[context];
      for (const auto& [t, n] : row) target[t] += std::min(n, *clip);
    }
  }
  if (vocab_out != nullptr) *vocab_out = std::move(encoded.vocab);
  return counts;
}

inline GenModel Fit(const Corpus& train, const NgramOptions& options) {
  if (train.empty()) throw Error("fit", "training corpus is empty");
  std::vector<std::string> vocab;
  auto raw = CountNgrams(train, options.order, std::nullopt, &vocab);
  CountTable table;
  table.reserve(raw.size());
  for (auto& [context, row] : raw) {
    CountRow out;
    out.entries.assign(row.begin(), row.end());
    for (const auto& entry : out.entries) out.total += entry.second;
    table.emplace(context, std::move(out));
  }
  return GenModel(options, std::move(vocab), std::move(table), std::nullopt, 0);
}

// Releases clipped counts through the Gaussian mechanism. Every count of an
// observed context, structural zeros included, receives independent noise;
// negative results are clamped to zero. Noise on a (context, token) cell is a
// pure function of (seed, context, token), so structural zeros need not be
// stored: the model regenerates them on lookup and `total` accounts for them.
inline GenModel FitDp(const Corpus& train, const NgramOptions& options,
                      double epsilon, double delta, double clip,
                      std::uint64_t seed) {
  const DpParams dp = MakeDpParams(epsilon, delta, clip);
  if (dp.sigma == 0.0) {
    const GenModel plain = Fit(train, options);
    return GenModel(options, plain.vocab(), plain.counts(), dp, seed);
  }
  if (train.empty()) throw Error("fit", "training corpus is empty");
  std::vector<std::string> vocab;
  auto raw = CountNgrams(train, options.order, clip, &vocab);
  const auto v = static_cast<TokenId>(vocab.size());
  CountTable table;
  table.reserve(raw.size());
  for (auto& [context, row] : raw) {
    const std::uint64_t key = ContextKey(context);
    CountRow out;
    out.entries.reserve(row.size());
    auto observed = row.begin();
    for (TokenId t = 0; t < v; ++t) {
      const double noise = dp.sigma * NormalFromKey(DeriveSeed(seed, key, t));
      if (observed != row.end() && observed->first == t) {
        const double value = std::max(0.0, observed->second + noise);
        out.entries.emplace_back(t, value);
        out.total += value;
        ++observed;
      } else {
        out.total += std::max(0.0, noise);
      }
    }
    table.emplace(context, std::move(out));
  }
  return GenModel(options, std::move(vocab), std::move(table), dp, seed);
}

// One generator configuration of an experiment: the non-private fit when
// epsilon is infinite, the noised release otherwise.
struct PrivacyArm {
  std::string tag = "eps=inf";
  double epsilon = std::numeric_limits<double>::infinity();
  double delta = 1e-5;
  double clip = 1.0;

  bool private_release() const { return std::isfinite(epsilon); }
};

inline GenModel FitArm(const Corpus& train, const NgramOptions& options,
                       const PrivacyArm& arm, std::uint64_t seed) {
  if (!arm.private_release()) return Fit(train, options);
  return FitDp(train, options, arm.epsilon, arm.delta, arm.clip, seed);
}

// Distribution over the model vocabulary of the next token given the codes
// and the tokens generated so far (without <bos>).
inline std::vector<double> NextTokenDist(const GenModel& model,
                                         const CodeSet& codes,
                                         const std::vector<std::string>& history) {
  std::vector<TokenId> ids;
  ids.reserve(history.size());
  for (const std::string& token : history) ids.push_back(model.Lookup(token));
  return model.Distribution(model.CodeIds(codes), ids);
}

// exp of the mean negative log-likelihood over the text's tokens plus <eos>.
inline double Perplexity(const GenModel& model, const CodeSet& codes,
                         std::string_view text) {
  const TokenSeq seq = Tokenize(text);
  const std::vector<TokenId> code_ids = model.CodeIds(codes);
  std::vector<TokenId> history;
  history.reserve(seq.size() + 1);
  double nll = 0.0;
  for (std::size_t i = 0; i <= seq.size(); ++i) {
    const TokenId target =
        i < seq.size() ? model.Lookup(seq.tokens[i]) : GenModel::kEos;
    nll -= std::log(model.Probability(code_ids, history, target));
    history.push_back(target);
  }
  return std::exp(nll / static_cast<double>(seq.size() + 1));
}

// Top-k then nucleus truncation. Keeps the top_k most probable tokens (ties
// broken by token id), then the shortest prefix of those whose mass reaches
// top_p, and renormalizes. Zero-probability tokens are never kept.
inline std::vector<std::pair<TokenId, double>> TruncateDistribution(
    const std::vector<double>& probs, std::size_t top_k, double top_p) {
  std::vector<TokenId> order;
  order.reserve(probs.size());
  for (TokenId t = 0; t < probs.size(); ++t) {
    if (probs[t] > 0.0) order.push_back(t);
  }
  const std::size_t k = std::min(top_k, order.size());
  auto by_probability = [&](TokenId a, TokenId b) {
    return probs[a] != probs[b] ? probs[a] > probs[b] : a < b;
  };
  std::partial_sort(order.begin(), order.begin() + k, order.end(), by_probability);
  order.resize(k);
  std::vector<std::pair<TokenId, double>> kept;
  double mass = 0.0;
  for (TokenId t : order) {
    kept.emplace_back(t, probs[t]);
    mass += probs[t];
    if (mass >= top_p) break;
  }
  for (auto& entry : kept) entry.second /= mass;
  return kept;
}

inline Document SampleNote(const GenModel& model, const CodeSet& codes,
                           const SamplerConfig& cfg) {
  cfg.Validate();
  Rng rng(cfg.seed);
  const std::vector<TokenId> code_ids = model.CodeIds(codes);
  std::vector<TokenId> history;
  std::vector<std::string> words;
  while (words.size() < cfg.max_len) {
    std::vector<double> probs = model.Distribution(code_ids, history);
    double output_mass = 0.0;
    for (TokenId t = 0; t < probs.size(); ++t) {
      if (!model.IsOutputToken(t)) probs[t] = 0.0;
      output_mass += probs[t];
    }
    if (!(output_mass > 0.0)) break;
    for (double& p : probs) p /= output_mass;
    const auto support = TruncateDistribution(probs, cfg.top_k, cfg.top_p);
    if (support.empty()) break;
    const double u = rng.Uniform();
    double cumulative = 0.0;
    TokenId next = support.back().first;
    for (const auto& [t, p] : support) {
      cumulative += p;
      if (u < cumulative) {
        next = t;
        break;
      }
    }
    if (next == GenModel::kEos) break;
    history.push_back(next);
    words.push_back(model.vocab()[next]);
  }
  Document doc;
  doc.codes = codes;
  doc.text = JoinTokens(words);
  return doc;
}

// n documents with code sets drawn from code_dist and per-document sampler
// seeds derived from cfg.seed. Documents are independent, so `jobs` threads
// produce the same corpus as one.
inline Corpus GenerateCorpus(const GenModel& model, std::size_t n,
                             const CodeSetDistribution& code_dist,
                             const SamplerConfig& cfg, std::size_t jobs = 1,
                             const std::string& id_prefix = "synth-") {
  cfg.Validate();
  Rng code_rng(DeriveSeed(cfg.seed, 1));
  std::vector<CodeSet> codes;
  codes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) codes.push_back(code_dist.Sample(code_rng));
  std::vector<Document> docs(n);
  ParallelFor(n, jobs, [&](std::size_t i) {
    SamplerConfig doc_cfg = cfg;
    doc_cfg.seed = DeriveSeed(cfg.seed, 2, i);
    docs[i] = SampleNote(model, codes[i], doc_cfg);
    docs[i].id = id_prefix + std::to_string(i);
  });
  return Corpus(std::move(docs));
}

}  // namespace synthaudit
