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
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "synthaudit/error.hpp"
#include "synthaudit/random.hpp"

namespace synthaudit {

// A set of control codes, always sorted and free of duplicates.
using CodeSet = std::vector<std::string>;

inline CodeSet CanonicalCodes(std::vector<std::string> codes) {
  std::sort(codes.begin(), codes.end());
  codes.erase(std::unique(codes.begin(), codes.end()), codes.end());
  return codes;
}

// Byte range [start, end) of an annotated entity mention.
struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string category;
  std::string surface;

  bool operator==(const EntitySpan&) const = default;
};

struct Document {
  std::string id;
  std::string text;
  CodeSet codes;
  std::map<std::string, std::string> attrs;
  std::vector<EntitySpan> entities;

  bool operator==(const Document&) const = default;
};

// An immutable, validated collection of documents. Construction
// canonicalizes code sets, sorts entity spans, materializes missing entity
// surfaces and rejects anything that violates the document invariants.
class Corpus {
 public:
  Corpus() = default;

  explicit Corpus(std::vector<Document> documents)
      : documents_(std::move(documents)) {
    std::set<std::string> ids;
    std::set<std::string> labels;
    std::map<std::string, std::set<std::string>> attrs;
    for (Document& doc : documents_) {
      if (!ids.insert(doc.id).second) {
        throw Error("corpus", "duplicate document id '" + doc.id + "'");
      }
      doc.codes = CanonicalCodes(std::move(doc.codes));
      labels.insert(doc.codes.begin(), doc.codes.end());
      for (const auto& [name, value] : doc.attrs) attrs[name].insert(value);
      ValidateEntities(doc);
    }
    label_space_.assign(labels.begin(), labels.end());
    for (auto& [name, values] : attrs) {
      attr_space_[name].assign(values.begin(), values.end());
    }
  }

  const std::vector<Document>& documents() const { return documents_; }
  const std::vector<std::string>& label_space() const { return label_space_; }
  const std::map<std::string, std::vector<std::string>>& attr_space() const {
    return attr_space_;
  }
  std::size_t size() const { return documents_.size(); }
  bool empty() const { return documents_.empty(); }
  const Document& operator[](std::size_t i) const { return documents_[i]; }

  bool operator==(const Corpus&) const = default;

 private:
  static void ValidateEntities(Document& doc) {
    std::sort(doc.entities.begin(), doc.entities.end(),
              [](const EntitySpan& a, const EntitySpan& b) {
                return std::pair(a.start, a.end) < std::pair(b.start, b.end);
              });
    std::size_t previous_end = 0;
    for (EntitySpan& span : doc.entities) {
      if (span.start >= span.end || span.end > doc.text.size()) {
        throw Error("corpus", "document '" + doc.id + "': entity span [" +
                                  std::to_string(span.start) + ", " +
                                  std::to_string(span.end) +
                                  ") is out of bounds");
      }
      if (span.start < previous_end) {
        throw Error("corpus", "document '" + doc.id +
                                  "': overlapping entity spans at offset " +
                                  std::to_string(span.start));
      }
      if (span.category.empty()) {
        throw Error("corpus",
                    "document '" + doc.id + "': entity with empty category");
      }
      std::string slice = doc.text.substr(span.start, span.end - span.start);
      if (span.surface.empty()) {
        span.surface = std::move(slice);
      } else if (span.surface != slice) {
        throw Error("corpus", "document '" + doc.id + "': entity surface '" +
                                  span.surface +
                                  "' does not match the text it spans");
      }
      previous_end = span.end;
    }
  }

  std::vector<Document> documents_;
  std::vector<std::string> label_space_;
  std::map<std::string, std::vector<std::string>> attr_space_;
};

// Empirical distribution over canonical code sets.
class CodeSetDistribution {
 public:
  using Entry = std::pair<CodeSet, double>;

  CodeSetDistribution() = default;

  // Entries must carry non-negative weights summing to one.
  explicit CodeSetDistribution(std::vector<Entry> entries) {
    std::map<CodeSet, double> merged;
    double total = 0.0;
    for (auto& [codes, p] : entries) {
      if (!(p >= 0.0)) {
        throw Error("corpus", "code-set probability must be non-negative");
      }
      merged[CanonicalCodes(codes)] += p;
      total += p;
    }
    if (merged.empty() || std::abs(total - 1.0) > 1e-9) {
      throw Error("corpus", "code-set probabilities must sum to 1");
    }
    entries_.assign(merged.begin(), merged.end());
  }

  static CodeSetDistribution PointMass(CodeSet codes) {
    return CodeSetDistribution({{std::move(codes), 1.0}});
  }

  const std::vector<Entry>& entries() const { return entries_; }

  double Probability(const CodeSet& codes) const {
    for (const auto& [c, p] : entries_) {
      if (c == codes) return p;
    }
    return 0.0;
  }

  const CodeSet& Sample(Rng& rng) const {
    const double u = rng.Uniform();
    double cumulative = 0.0;
    for (const auto& [codes, p] : entries_) {
      cumulative += p;
      if (u < cumulative) return codes;
    }
    // Rounding left u above the final cumulative sum.
    for (auto it = entries_.rbegin(); it != entries_.rend(); ++it) {
      if (it->second > 0.0) return it->first;
    }
    return entries_.back().first;
  }

 private:
  std::vector<Entry> entries_;
};

inline CodeSetDistribution CodeSetDistributionOf(const Corpus& corpus) {
  if (corpus.empty()) {
    throw Error("corpus", "code-set distribution of an empty corpus");
  }
  std::map<CodeSet, std::size_t> counts;
  for (const Document& doc : corpus.documents()) ++counts[doc.codes];
  const double n = static_cast<double>(corpus.size());
  std::vector<CodeSetDistribution::Entry> entries;
  for (auto& [codes, count] : counts) {
    entries.emplace_back(codes, static_cast<double>(count) / n);
  }
  return CodeSetDistribution(std::move(entries));
}

struct CorpusSplit {
  Corpus train;
  Corpus dev;
  Corpus test;
};

// Keeps documents carrying at least one of the top_n most frequent codes,
// drops every other code, shuffles by seed and partitions by ratios
// (train, dev, test). Dev and test sizes round down; train takes the rest.
inline CorpusSplit RestrictAndSplit(const Corpus& corpus, std::size_t top_n,
                                    const std::array<double, 3>& ratios,
                                    std::uint64_t seed) {
  if (corpus.empty()) throw Error("split", "cannot split an empty corpus");
  if (top_n < 1) throw Error("split", "top_n must be at least 1");
  for (double r : ratios) {
    if (!(r >= 0.0)) throw Error("split", "split ratios must be non-negative");
  }
  if (std::abs(ratios[0] + ratios[1] + ratios[2] - 1.0) > 1e-9) {
    throw Error("split", "split ratios must sum to 1");
  }

  std::map<std::string, std::size_t> frequency;
  for (const Document& doc : corpus.documents()) {
    for (const std::string& code : doc.codes) ++frequency[code];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(frequency.begin(),
                                                          frequency.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::set<std::string> keep;
  for (std::size_t i = 0; i < ranked.size() && i < top_n; ++i) {
    keep.insert(ranked[i].first);
  }

  std::vector<Document> retained;
  for (const Document& doc : corpus.documents()) {
    Document copy = doc;
    std::erase_if(copy.codes,
                  [&](const std::string& c) { return !keep.contains(c); });
    if (!copy.codes.empty()) retained.push_back(std::move(copy));
  }
  if (retained.empty()) {
    throw Error("split", "no document carries any of the top " +
                             std::to_string(top_n) + " codes");
  }

  Rng rng(seed);
  rng.Shuffle(retained);
  const std::size_t n = retained.size();
  const auto n_dev = static_cast<std::size_t>(std::floor(n * ratios[1]));
  const auto n_test = static_cast<std::size_t>(std::floor(n * ratios[2]));
  const std::size_t n_train = n - n_dev - n_test;

  auto take = [&](std::size_t from, std::size_t count) {
    return Corpus(std::vector<Document>(
        std::make_move_iterator(retained.begin() + from),
        std::make_move_iterator(retained.begin() + from + count)));
  };
  CorpusSplit split;
  split.train = take(0, n_train);
  split.dev = take(n_train, n_dev);
  split.test = take(n_train + n_dev, n_test);
  return split;
}

}  // namespace synthaudit
