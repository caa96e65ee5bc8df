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
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/parallel.hpp"
#include "synthaudit/random.hpp"
#include "synthaudit/text.hpp"

namespace synthaudit {

// An entity is identified by its normalized (tokenized, lowercased) surface
// together with its category.
struct EntityKey {
  std::vector<std::string> tokens;
  std::string category;

  std::string Surface() const { return JoinTokens(tokens); }
  auto operator<=>(const EntityKey&) const = default;
  bool operator==(const EntityKey&) const = default;
};

struct EntityStats {
  std::size_t frequency = 0;
  std::size_t document_frequency = 0;

  bool operator==(const EntityStats&) const = default;
};

class EntityIndex {
 public:
  EntityIndex() = default;
  explicit EntityIndex(std::map<EntityKey, EntityStats> entries)
      : entries_(std::move(entries)) {
    for (const auto& [key, stats] : entries_) {
      if (stats.frequency < 1 || stats.document_frequency < 1) {
        throw Error("leakage", "entity index entries need positive frequencies");
      }
    }
  }

  const std::map<EntityKey, EntityStats>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  const EntityStats* Find(const EntityKey& key) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? nullptr : &it->second;
  }

  std::vector<std::string> Categories() const {
    std::vector<std::string> out;
    for (const auto& [key, stats] : entries_) {
      if (out.empty() || out.back() != key.category) out.push_back(key.category);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  bool operator==(const EntityIndex&) const = default;

 private:
  std::map<EntityKey, EntityStats> entries_;
};

// Entities are keyed by the tokens their span claims in the document text, so
// a span that cuts a word is normalized to the whole word and every indexed
// entity matches its own document.
inline EntityIndex BuildEntityIndex(const Corpus& corpus, std::size_t jobs = 1) {
  std::vector<std::map<EntityKey, std::size_t>> per_doc(corpus.size());
  ParallelFor(corpus.size(), jobs, [&](std::size_t d) {
    if (corpus[d].entities.empty()) return;
    const TokenSeq seq = Tokenize(corpus[d].text);
    for (const EntitySpan& span : corpus[d].entities) {
      const auto [first, last] = TokenRangeForSpan(seq, span.start, span.end);
      if (first >= last) continue;
      EntityKey key{{seq.tokens.begin() + static_cast<std::ptrdiff_t>(first),
                     seq.tokens.begin() + static_cast<std::ptrdiff_t>(last)},
                    span.category};
      ++per_doc[d][std::move(key)];
    }
  });
  std::map<EntityKey, EntityStats> entries;
  for (auto& doc : per_doc) {
    for (auto& [key, count] : doc) {
      EntityStats& stats = entries[key];
      stats.frequency += count;
      stats.document_frequency += 1;
    }
  }
  return EntityIndex(std::move(entries));
}

namespace leakage_internal {

using TokenId = std::uint32_t;
using Sequence = std::vector<TokenId>;

struct SequenceHash {
  std::size_t operator()(const Sequence& s) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ s.size();
    for (TokenId t : s) h = Mix64(h ^ t);
    return static_cast<std::size_t>(h);
  }
};

using SequenceSet = std::unordered_set<Sequence, SequenceHash>;

class Interner {
 public:
  TokenId Intern(const std::string& token) {
    const auto [it, inserted] =
        ids_.try_emplace(token, static_cast<TokenId>(ids_.size()));
    if (inserted) names_.push_back(&it->first);
    return it->second;
  }

  const std::string& Name(TokenId id) const { return *names_[id]; }

  Sequence InternAll(const std::vector<std::string>& tokens) {
    Sequence out;
    out.reserve(tokens.size());
    for (const std::string& t : tokens) out.push_back(Intern(t));
    return out;
  }

 private:
  std::unordered_map<std::string, TokenId> ids_;
  std::vector<const std::string*> names_;
};

// Trie over the distinct entity token sequences. Match() reports every
// sequence that starts at a given position, shortest first.
class EntityTrie {
 public:
  EntityTrie() : nodes_(1) {}

  void Insert(const Sequence& sequence, std::size_t id) {
    std::size_t node = 0;
    for (TokenId t : sequence) {
      const auto [it, inserted] = nodes_[node].children.try_emplace(t, nodes_.size());
      if (inserted) nodes_.emplace_back();
      node = it->second;
    }
    nodes_[node].terminal = id;
  }

  template <typename Visit>
  void Match(std::span<const TokenId> tokens, std::size_t start,
             Visit&& visit) const {
    std::size_t node = 0;
    for (std::size_t i = start; i < tokens.size(); ++i) {
      const auto& children = nodes_[node].children;
      const auto it = children.find(tokens[i]);
      if (it == children.end()) return;
      node = it->second;
      if (nodes_[node].terminal != kNone) visit(nodes_[node].terminal, i + 1);
    }
  }

 private:
  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  struct Node {
    std::unordered_map<TokenId, std::size_t> children;
    std::size_t terminal = kNone;
  };
  std::vector<Node> nodes_;
};

// Shared state for one scan: interned token streams of both corpora and a
// trie over the distinct entity surfaces of the real index.
struct ScanContext {
  Interner interner;
  std::vector<Sequence> surfaces;              // distinct entity surfaces
  std::vector<std::vector<std::size_t>> keys;  // surface -> index entry ordinals
  EntityTrie trie;
  std::vector<Sequence> synth;

  ScanContext(const EntityIndex& index, const Corpus& synth_corpus,
              std::size_t jobs) {
    std::map<Sequence, std::size_t> surface_ids;
    std::size_t ordinal = 0;
    for (const auto& [key, stats] : index.entries()) {
      Sequence seq = interner.InternAll(key.tokens);
      const auto [it, inserted] = surface_ids.try_emplace(seq, surfaces.size());
      if (inserted) {
        surfaces.push_back(seq);
        keys.emplace_back();
        trie.Insert(seq, it->second);
      }
      keys[it->second].push_back(ordinal++);
    }
    synth = TokenizeAll(synth_corpus, jobs);
  }

  std::vector<Sequence> TokenizeAll(const Corpus& corpus, std::size_t jobs) {
    std::vector<std::vector<std::string>> tokens(corpus.size());
    ParallelFor(corpus.size(), jobs, [&](std::size_t d) {
      tokens[d] = Tokenize(corpus[d].text).tokens;
    });
    std::vector<Sequence> out;
    out.reserve(tokens.size());
    for (const auto& doc : tokens) out.push_back(interner.InternAll(doc));
    return out;
  }
};

// Splits [0, n) into contiguous chunks for per-thread accumulation.
template <typename Body>
void ForEachChunk(std::size_t n, std::size_t jobs, Body&& body) {
  const std::size_t chunks = std::max<std::size_t>(1, std::min(n, jobs * 4));
  ParallelFor(chunks, jobs, [&](std::size_t c) {
    body(c, n * c / chunks, n * (c + 1) / chunks);
  });
}

inline std::size_t ChunkCount(std::size_t n, std::size_t jobs) {
  return std::max<std::size_t>(1, std::min(n, jobs * 4));
}

}  // namespace leakage_internal

struct EntityLeak {
  EntityKey key;
  std::size_t real_count = 0;
  std::size_t real_document_frequency = 0;
  std::size_t synth_count = 0;

  bool operator==(const EntityLeak&) const = default;
};

struct EntityLeakage {
  // Share of distinct real entities, per category, that occur in the
  // synthetic corpus. Categories without entities have no entry.
  std::map<std::string, double> rates;
  // Same share pooled over all categories; absent for an empty index.
  std::optional<double> overall_rate;
  // One row per index entry, in index order.
  std::vector<EntityLeak> entities;

  bool operator==(const EntityLeakage&) const = default;
};

struct PhraseOverlap {
  std::size_t real_phrases = 0;
  std::size_t synth_phrases = 0;
  std::size_t overlap_count = 0;
  std::size_t total_phrases_union = 0;
  double ratio = 0.0;

  bool operator==(const PhraseOverlap&) const = default;
};

struct LeakageReport {
  EntityLeakage entities;
  PhraseOverlap phrases;

  bool operator==(const LeakageReport&) const = default;
};

// overlap / union; an empty union (no phrases at all) gives 0.
inline double OverlapRatio(std::size_t overlap_count,
                           std::size_t total_phrases_union) {
  if (overlap_count > total_phrases_union) {
    throw Error("leakage", "overlap count exceeds the phrase union");
  }
  if (total_phrases_union == 0) return 0.0;
  return static_cast<double>(overlap_count) /
         static_cast<double>(total_phrases_union);
}

namespace leakage_internal {

inline EntityLeakage EntityLeakageFrom(const EntityIndex& index,
                                       const ScanContext& scan,
                                       std::size_t jobs) {
  const std::size_t chunks = ChunkCount(scan.synth.size(), jobs);
  std::vector<std::vector<std::size_t>> partial(
      chunks, std::vector<std::size_t>(scan.surfaces.size(), 0));
  ForEachChunk(scan.synth.size(), jobs,
               [&](std::size_t c, std::size_t begin, std::size_t end) {
                 auto& counts = partial[c];
                 for (std::size_t d = begin; d < end; ++d) {
                   const Sequence& doc = scan.synth[d];
                   for (std::size_t i = 0; i < doc.size(); ++i) {
                     scan.trie.Match(doc, i, [&](std::size_t id, std::size_t) {
                       ++counts[id];
                     });
                   }
                 }
               });
  std::vector<std::size_t> synth_counts(scan.surfaces.size(), 0);
  for (const auto& counts : partial) {
    for (std::size_t s = 0; s < counts.size(); ++s) synth_counts[s] += counts[s];
  }
  std::vector<std::size_t> per_entry(index.size(), 0);
  for (std::size_t s = 0; s < scan.keys.size(); ++s) {
    for (std::size_t ordinal : scan.keys[s]) per_entry[ordinal] = synth_counts[s];
  }

  EntityLeakage out;
  std::map<std::string, std::pair<std::size_t, std::size_t>> tally;
  std::size_t leaked = 0;
  std::size_t ordinal = 0;
  for (const auto& [key, stats] : index.entries()) {
    const std::size_t synth_count = per_entry[ordinal++];
    out.entities.push_back(
        {key, stats.frequency, stats.document_frequency, synth_count});
    auto& [hits, total] = tally[key.category];
    ++total;
    if (synth_count > 0) {
      ++hits;
      ++leaked;
    }
  }
  for (const auto& [category, counts] : tally) {
    out.rates[category] =
        static_cast<double>(counts.first) / static_cast<double>(counts.second);
  }
  if (!index.empty()) {
    out.overall_rate =
        static_cast<double>(leaked) / static_cast<double>(index.size());
  }
  return out;
}

inline void AddWindows(const Sequence& doc, std::size_t first, std::size_t last,
                       int w_min, int w_max, SequenceSet& out) {
  for (int w = w_min; w <= w_max; ++w) {
    const auto uw = static_cast<std::size_t>(w);
    const std::size_t lo = first >= uw ? first - uw : 0;
    const std::size_t hi = std::min(doc.size(), last + uw);
    out.emplace(doc.begin() + static_cast<std::ptrdiff_t>(lo),
                doc.begin() + static_cast<std::ptrdiff_t>(hi));
  }
}

inline void CheckWindows(int w_min, int w_max) {
  if (w_min < 1 || w_min > w_max) {
    throw Error("leakage", "window range needs 1 <= w_min <= w_max");
  }
}

struct RealPhraseSet {
  SequenceSet phrases;
  // Entity token ranges the phrases were built around. A span that cuts a
  // token claims the whole token, so a core can differ from the normalized
  // surface of its entity.
  SequenceSet cores;
};

inline RealPhraseSet BuildRealPhrases(const Corpus& real, Interner& interner,
                                      int w_min, int w_max, std::size_t jobs) {
  CheckWindows(w_min, w_max);
  std::vector<TokenSeq> real_tokens(real.size());
  ParallelFor(real.size(), jobs, [&](std::size_t d) {
    real_tokens[d] = Tokenize(real[d].text);
  });
  RealPhraseSet out;
  for (std::size_t d = 0; d < real.size(); ++d) {
    const Sequence doc = interner.InternAll(real_tokens[d].tokens);
    for (const EntitySpan& span : real[d].entities) {
      const auto [first, last] = TokenRangeForSpan(real_tokens[d], span.start, span.end);
      if (first >= last) continue;
      AddWindows(doc, first, last, w_min, w_max, out.phrases);
      out.cores.emplace(doc.begin() + static_cast<std::ptrdiff_t>(first),
                        doc.begin() + static_cast<std::ptrdiff_t>(last));
    }
  }
  return out;
}

inline PhraseOverlap PhraseOverlapFrom(const Corpus& real_corpus,
                                       ScanContext& scan,
                                       int w_min, int w_max, std::size_t jobs) {
  const RealPhraseSet real = BuildRealPhrases(real_corpus, scan.interner, w_min,
                                              w_max, jobs);
  const SequenceSet& real_phrases = real.phrases;
  EntityTrie core_trie;
  std::size_t core_id = 0;
  for (const Sequence& core : real.cores) core_trie.Insert(core, core_id++);

  const std::size_t chunks = ChunkCount(scan.synth.size(), jobs);
  std::vector<SequenceSet> matched(chunks);
  std::vector<SequenceSet> synth_only(chunks);
  std::vector<SequenceSet> synth_shared(chunks);
  const auto w_max_u = static_cast<std::size_t>(w_max);
  ForEachChunk(scan.synth.size(), jobs, [&](std::size_t c, std::size_t begin,
                                            std::size_t end) {
    SequenceSet synth_phrases;
    Sequence probe;
    for (std::size_t d = begin; d < end; ++d) {
      const Sequence& doc = scan.synth[d];
      for (std::size_t i = 0; i < doc.size(); ++i) {
        scan.trie.Match(doc, i, [&](std::size_t, std::size_t stop) {
          AddWindows(doc, i, stop, w_min, w_max, synth_phrases);
        });
        // A real phrase occurring here has one of the real cores at i, with
        // at most w_max context tokens on either side.
        core_trie.Match(doc, i, [&](std::size_t, std::size_t stop) {
          for (std::size_t l = 0; l <= std::min(i, w_max_u); ++l) {
            for (std::size_t r = 0; r <= std::min(doc.size() - stop, w_max_u); ++r) {
              probe.assign(doc.begin() + static_cast<std::ptrdiff_t>(i - l),
                           doc.begin() + static_cast<std::ptrdiff_t>(stop + r));
              if (real_phrases.contains(probe)) matched[c].insert(probe);
            }
          }
        });
      }
    }
    while (!synth_phrases.empty()) {
      auto node = synth_phrases.extract(synth_phrases.begin());
      (real_phrases.contains(node.value()) ? synth_shared : synth_only)[c].insert(
          std::move(node));
    }
  });

  SequenceSet overlap;
  SequenceSet extra;
  SequenceSet shared;
  for (std::size_t c = 0; c < chunks; ++c) {
    overlap.merge(matched[c]);
    extra.merge(synth_only[c]);
    shared.merge(synth_shared[c]);
  }
  PhraseOverlap out;
  out.real_phrases = real_phrases.size();
  out.synth_phrases = extra.size() + shared.size();
  out.overlap_count = overlap.size();
  out.total_phrases_union = real_phrases.size() + extra.size();
  out.ratio = OverlapRatio(out.overlap_count, out.total_phrases_union);
  return out;
}

}  // namespace leakage_internal

// Which real entities reappear verbatim (as contiguous token subsequences)
// in the synthetic corpus, and how often.
inline EntityLeakage ComputeEntityLeakage(const EntityIndex& real_index,
                                          const Corpus& synth,
                                          std::size_t jobs = 1) {
  leakage_internal::ScanContext scan(real_index, synth, jobs);
  return leakage_internal::EntityLeakageFrom(real_index, scan, jobs);
}

inline PhraseOverlap ComputePhraseOverlap(const Corpus& real,
                                          const EntityIndex& real_index,
                                          const Corpus& synth, int w_min = 1,
                                          int w_max = 4, std::size_t jobs = 1) {
  leakage_internal::ScanContext scan(real_index, synth, jobs);
  return leakage_internal::PhraseOverlapFrom(real, scan, w_min, w_max, jobs);
}

// The set of real context phrases for windows w_min..w_max, as token lists.
inline std::set<std::vector<std::string>> RealPhrases(const Corpus& real,
                                                      int w_min, int w_max) {
  leakage_internal::Interner interner;
  std::set<std::vector<std::string>> out;
  for (const auto& phrase :
       leakage_internal::BuildRealPhrases(real, interner, w_min, w_max, 1).phrases) {
    std::vector<std::string> tokens;
    for (auto id : phrase) tokens.push_back(interner.Name(id));
    out.insert(std::move(tokens));
  }
  return out;
}

// Entity leakage and phrase overlap from a single tokenization pass.
inline LeakageReport ScanLeakage(const Corpus& real, const EntityIndex& real_index,
                                 const Corpus& synth, int w_min = 1,
                                 int w_max = 4, std::size_t jobs = 1) {
  leakage_internal::ScanContext scan(real_index, synth, jobs);
  LeakageReport report;
  report.entities = leakage_internal::EntityLeakageFrom(real_index, scan, jobs);
  report.phrases = leakage_internal::PhraseOverlapFrom(real, scan, w_min, w_max, jobs);
  return report;
}

// The n most frequent real entities, optionally only those with real
// frequency at most max_real_frequency. Ordered by real count, then synthetic
// count (both descending), then key.
inline std::vector<EntityLeak> TopEntities(
    const EntityLeakage& leakage, std::size_t n,
    std::optional<std::size_t> max_real_frequency = std::nullopt) {
  std::vector<EntityLeak> rows;
  for (const EntityLeak& row : leakage.entities) {
    if (!max_real_frequency || row.real_count <= *max_real_frequency) {
      rows.push_back(row);
    }
  }
  std::sort(rows.begin(), rows.end(), [](const EntityLeak& a, const EntityLeak& b) {
    if (a.real_count != b.real_count) return a.real_count > b.real_count;
    if (a.synth_count != b.synth_count) return a.synth_count > b.synth_count;
    return a.key < b.key;
  });
  if (rows.size() > n) rows.resize(n);
  return rows;
}

}  // namespace synthaudit
