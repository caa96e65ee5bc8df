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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/utility.hpp"

namespace synthaudit {

enum class Pooling { kMicro, kMacro };

inline std::string_view PoolingName(Pooling pooling) {
  return pooling == Pooling::kMicro ? "micro" : "macro";
}

inline Pooling ParsePooling(std::string_view name) {
  if (name == "micro") return Pooling::kMicro;
  if (name == "macro") return Pooling::kMacro;
  throw Error("fairness", "unknown pooling '" + std::string(name) + "'");
}

// Confusion rates; a rate whose denominator is zero is absent.
struct Rates {
  std::optional<double> tpr;
  std::optional<double> fpr;
  std::optional<double> tnr;
  std::optional<double> fnr;

  bool operator==(const Rates&) const = default;
};

inline Rates RatesOf(const Confusion& c) {
  Rates r;
  if (const std::size_t pos = c.tp + c.fn; pos > 0) {
    r.tpr = static_cast<double>(c.tp) / static_cast<double>(pos);
    r.fnr = static_cast<double>(c.fn) / static_cast<double>(pos);
  }
  if (const std::size_t neg = c.fp + c.tn; neg > 0) {
    r.fpr = static_cast<double>(c.fp) / static_cast<double>(neg);
    r.tnr = static_cast<double>(c.tn) / static_cast<double>(neg);
  }
  return r;
}

// Unweighted mean of each rate over the tables that define it.
inline Rates MeanRates(const std::vector<Confusion>& tables) {
  auto mean = [&](auto field) -> std::optional<double> {
    double sum = 0.0;
    std::size_t n = 0;
    for (const Confusion& c : tables) {
      if (const auto v = RatesOf(c).*field) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    return sum / static_cast<double>(n);
  };
  return {mean(&Rates::tpr), mean(&Rates::fpr), mean(&Rates::tnr),
          mean(&Rates::fnr)};
}

struct GroupRates {
  std::string group;
  std::size_t support = 0;  // documents
  std::vector<Confusion> per_label;
  Rates rates;

  bool operator==(const GroupRates&) const = default;
};

struct SubgroupRates {
  Pooling pooling = Pooling::kMicro;
  std::vector<GroupRates> groups;  // included groups, sorted by name
  std::vector<std::string> excluded;
  Rates overall;

  bool operator==(const SubgroupRates&) const = default;
};

// Pooled rates of a set of per-label tables: micro sums the tables first,
// macro averages per-label rates.
inline Rates PooledRates(const std::vector<Confusion>& per_label, Pooling pooling) {
  if (pooling == Pooling::kMacro) return MeanRates(per_label);
  Confusion total;
  for (const Confusion& c : per_label) total += c;
  return RatesOf(total);
}

// Builds rates from per-group, per-label confusion tables. Groups with
// support <= min_support are dropped; overall rates cover the rest.
inline SubgroupRates SubgroupRatesFromTables(
    std::map<std::string, std::pair<std::size_t, std::vector<Confusion>>> tables,
    std::size_t min_support, Pooling pooling = Pooling::kMicro) {
  SubgroupRates out;
  out.pooling = pooling;
  std::vector<Confusion> overall;
  for (auto& [group, entry] : tables) {
    auto& [support, per_label] = entry;
    if (support <= min_support) {
      out.excluded.push_back(group);
      continue;
    }
    if (overall.empty()) overall.assign(per_label.size(), {});
    if (per_label.size() != overall.size()) {
      throw Error("fairness", "groups disagree on the number of labels");
    }
    for (std::size_t j = 0; j < per_label.size(); ++j) overall[j] += per_label[j];
    GroupRates g;
    g.group = group;
    g.support = support;
    g.rates = PooledRates(per_label, pooling);
    g.per_label = std::move(per_label);
    out.groups.push_back(std::move(g));
  }
  if (out.groups.empty()) {
    throw Error("fairness", "no subgroup has more than " +
                                std::to_string(min_support) + " documents");
  }
  out.overall = PooledRates(overall, pooling);
  return out;
}

// Per-document gold and predicted label sets over `labels`, grouped by
// `groups[d]`.
inline SubgroupRates ComputeSubgroupRates(const std::vector<std::string>& labels,
                                          const std::vector<CodeSet>& gold,
                                          const std::vector<CodeSet>& predicted,
                                          const std::vector<std::string>& groups,
                                          std::size_t min_support,
                                          Pooling pooling = Pooling::kMicro) {
  if (gold.size() != predicted.size() || gold.size() != groups.size()) {
    throw Error("fairness", "gold, predicted and group vectors are misaligned");
  }
  std::map<std::string, std::pair<std::size_t, std::vector<Confusion>>> tables;
  for (std::size_t d = 0; d < gold.size(); ++d) {
    auto& [support, per_label] = tables[groups[d]];
    if (per_label.empty()) per_label.assign(labels.size(), {});
    ++support;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const auto has = [&](const CodeSet& set) {
        return std::binary_search(set.begin(), set.end(), labels[j]);
      };
      const bool g = has(gold[d]);
      const bool p = has(predicted[d]);
      Confusion& c = per_label[j];
      if (g && p) ++c.tp;
      else if (!g && p) ++c.fp;
      else if (g && !p) ++c.fn;
      else ++c.tn;
    }
  }
  return SubgroupRatesFromTables(std::move(tables), min_support, pooling);
}

struct EqualityDifferences {
  double fped = 0.0;
  double fned = 0.0;
  double tped = 0.0;
  double tned = 0.0;

  bool operator==(const EqualityDifferences&) const = default;
};

inline EqualityDifferences ComputeEqualityDifferences(const SubgroupRates& rates) {
  if (rates.groups.empty()) throw Error("fairness", "no subgroups to compare");
  auto ed = [&](auto field) {
    const std::optional<double> overall = rates.overall.*field;
    double sum = 0.0;
    if (!overall) return sum;
    for (const GroupRates& g : rates.groups) {
      if (const auto v = g.rates.*field) sum += std::abs(*overall - *v);
    }
    return sum;
  };
  return {ed(&Rates::fpr), ed(&Rates::fnr), ed(&Rates::tpr), ed(&Rates::tnr)};
}

// Largest across-group spread of TPR or FPR, over groups defining both.
inline double ComputeEqualizedOdds(const SubgroupRates& rates) {
  std::vector<std::pair<double, double>> eligible;
  for (const GroupRates& g : rates.groups) {
    if (g.rates.tpr && g.rates.fpr) eligible.emplace_back(*g.rates.tpr, *g.rates.fpr);
  }
  if (eligible.size() < 2) {
    throw Error("fairness",
                "equalized odds needs two subgroups with both TPR and FPR defined");
  }
  auto spread = [&](auto get) {
    double lo = get(eligible.front());
    double hi = lo;
    for (const auto& e : eligible) {
      lo = std::min(lo, get(e));
      hi = std::max(hi, get(e));
    }
    return hi - lo;
  };
  return std::max(spread([](const auto& e) { return e.first; }),
                  spread([](const auto& e) { return e.second; }));
}

struct FairnessReport {
  std::string attribute;
  Pooling pooling = Pooling::kMicro;
  EqualityDifferences differences;
  std::optional<double> equalized_odds;  // absent with fewer than two groups
  std::vector<std::string> subgroups;
  std::vector<std::string> excluded;
  SubgroupRates rates;

  bool operator==(const FairnessReport&) const = default;
};

// Fairness of `predicted` against the gold codes of `test`, grouped by a
// document attribute. Documents without the attribute are left out.
inline FairnessReport AssessFairness(const Corpus& test,
                                     const std::vector<CodeSet>& predicted,
                                     const std::vector<std::string>& labels,
                                     const std::string& attribute,
                                     std::size_t min_support,
                                     Pooling pooling = Pooling::kMicro) {
  if (predicted.size() != test.size()) {
    throw Error("fairness", "one prediction per test document is required");
  }
  std::vector<CodeSet> gold;
  std::vector<CodeSet> pred;
  std::vector<std::string> groups;
  for (std::size_t d = 0; d < test.size(); ++d) {
    const auto it = test[d].attrs.find(attribute);
    if (it == test[d].attrs.end()) continue;
    gold.push_back(test[d].codes);
    pred.push_back(predicted[d]);
    groups.push_back(it->second);
  }
  FairnessReport report;
  report.attribute = attribute;
  report.pooling = pooling;
  report.rates = ComputeSubgroupRates(labels, gold, pred, groups, min_support, pooling);
  report.differences = ComputeEqualityDifferences(report.rates);
  for (const GroupRates& g : report.rates.groups) report.subgroups.push_back(g.group);
  report.excluded = report.rates.excluded;
  try {
    report.equalized_odds = ComputeEqualizedOdds(report.rates);
  } catch (const Error&) {
    report.equalized_odds.reset();
  }
  return report;
}

}  // namespace synthaudit
