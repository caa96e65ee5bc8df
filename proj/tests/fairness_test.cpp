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
#include <map>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "synthaudit/fairness.hpp"

namespace synthaudit {
namespace {

using Tables = std::map<std::string, std::pair<std::size_t, std::vector<Confusion>>>;

// Single-label table with support equal to its document count.
std::pair<std::size_t, std::vector<Confusion>> One(Confusion c) {
  return {c.tp + c.fp + c.fn + c.tn, {c}};
}

SubgroupRates FromRates(const std::vector<std::pair<double, double>>& tpr_fpr) {
  SubgroupRates rates;
  for (std::size_t i = 0; i < tpr_fpr.size(); ++i) {
    GroupRates g;
    g.group = "g" + std::to_string(i);
    g.rates.tpr = tpr_fpr[i].first;
    g.rates.fpr = tpr_fpr[i].second;
    rates.groups.push_back(g);
  }
  return rates;
}

TEST(SubgroupRatesTest, HandBuiltConfusions) {
  const SubgroupRates rates = SubgroupRatesFromTables(
      {{"G1", One({8, 1, 2, 9})}, {"G2", One({6, 3, 4, 7})}}, 0);
  ASSERT_EQ(rates.groups.size(), 2u);
  EXPECT_DOUBLE_EQ(*rates.groups[0].rates.tpr, 0.8);
  EXPECT_DOUBLE_EQ(*rates.groups[1].rates.tpr, 0.6);
  EXPECT_DOUBLE_EQ(*rates.groups[0].rates.fpr, 0.1);
  EXPECT_DOUBLE_EQ(*rates.groups[1].rates.fpr, 0.3);
  EXPECT_DOUBLE_EQ(*rates.overall.fpr, 0.2);
  EXPECT_DOUBLE_EQ(*rates.overall.tpr, 0.7);
  const EqualityDifferences ed = ComputeEqualityDifferences(rates);
  EXPECT_NEAR(ed.fped, 0.2, 1e-15);
  EXPECT_NEAR(ed.tped, 0.2, 1e-15);
  EXPECT_NEAR(ComputeEqualizedOdds(rates), 0.2, 1e-15);
}

TEST(SubgroupRatesTest, SingleGroupMatchesOverall) {
  const SubgroupRates rates = SubgroupRatesFromTables({{"all", One({3, 2, 4, 5})}}, 0);
  EXPECT_EQ(rates.groups[0].rates, rates.overall);
  const EqualityDifferences ed = ComputeEqualityDifferences(rates);
  EXPECT_EQ(ed, EqualityDifferences{});
  EXPECT_THROW(ComputeEqualizedOdds(rates), Error);
}

TEST(SubgroupRatesTest, SupportMustExceedMinimum) {
  const SubgroupRates rates = SubgroupRatesFromTables(
      {{"big", One({50, 1, 1, 49})}, {"edge", One({25, 25, 25, 25})}}, 100);
  ASSERT_EQ(rates.groups.size(), 1u);
  EXPECT_EQ(rates.groups[0].group, "big");
  EXPECT_EQ(rates.excluded, std::vector<std::string>{"edge"});
  EXPECT_THROW(SubgroupRatesFromTables({{"edge", One({25, 25, 25, 25})}}, 100), Error);
}

TEST(SubgroupRatesTest, AbsentRatesAreSkipped) {
  const SubgroupRates rates = SubgroupRatesFromTables(
      {{"a", One({0, 2, 0, 3})}, {"b", One({1, 1, 1, 1})}}, 0);
  EXPECT_FALSE(rates.groups[0].rates.tpr.has_value());
  EXPECT_TRUE(rates.groups[0].rates.fpr.has_value());
  const EqualityDifferences ed = ComputeEqualityDifferences(rates);
  EXPECT_DOUBLE_EQ(ed.tped, 0.0);  // only b defines TPR, and it equals overall
  EXPECT_THROW(ComputeEqualizedOdds(rates), Error);
}

TEST(SubgroupRatesTest, MicroPoolsLabelsAndMacroAverages) {
  const std::vector<std::string> labels = {"A", "B"};
  const std::vector<CodeSet> gold = {{"A"}, {"A", "B"}, {"B"}, {}};
  const std::vector<CodeSet> pred = {{"A"}, {"A"}, {"A", "B"}, {"B"}};
  const std::vector<std::string> groups(4, "g");
  // A: TP 2, FP 1, FN 0, TN 1.  B: TP 1, FP 1, FN 1, TN 1.
  const SubgroupRates micro = ComputeSubgroupRates(labels, gold, pred, groups, 0);
  EXPECT_DOUBLE_EQ(*micro.overall.tpr, 3.0 / 4.0);
  EXPECT_DOUBLE_EQ(*micro.overall.fpr, 2.0 / 4.0);
  const SubgroupRates macro =
      ComputeSubgroupRates(labels, gold, pred, groups, 0, Pooling::kMacro);
  EXPECT_DOUBLE_EQ(*macro.overall.tpr, (1.0 + 0.5) / 2.0);
  EXPECT_DOUBLE_EQ(*macro.overall.fpr, (0.5 + 0.5) / 2.0);
  EXPECT_THROW(ComputeSubgroupRates(labels, gold, pred, {"g"}, 0), Error);
}

TEST(EqualizedOddsTest, Examples) {
  EXPECT_NEAR(ComputeEqualizedOdds(FromRates({{0.8, 0.1}, {0.6, 0.3}})), 0.2, 1e-15);
  EXPECT_EQ(ComputeEqualizedOdds(FromRates({{0.7, 0.2}, {0.7, 0.2}, {0.7, 0.2}})), 0.0);
  EXPECT_NEAR(ComputeEqualizedOdds(FromRates({{0.9, 0.05}, {0.9, 0.45}})), 0.4, 1e-15);
}

TEST(EqualityDifferencesTest, FpedExample) {
  SubgroupRates rates = FromRates({{0.5, 0.1}, {0.5, 0.3}});
  rates.overall.fpr = 0.2;
  EXPECT_NEAR(ComputeEqualityDifferences(rates).fped, 0.2, 1e-15);
}

TEST(FairnessReportTest, UsesDocumentAttributes) {
  std::vector<Document> docs;
  std::vector<CodeSet> predicted;
  for (int i = 0; i < 40; ++i) {
    Document d;
    d.id = "d" + std::to_string(i);
    d.codes = {i % 2 == 0 ? "A" : "B"};
    if (i < 38) d.attrs["gender"] = i < 20 ? "F" : "M";
    docs.push_back(d);
    predicted.push_back(i < 20 ? d.codes : CodeSet{"A"});
  }
  const Corpus test(std::move(docs));
  const FairnessReport report =
      AssessFairness(test, predicted, {"A", "B"}, "gender", 0);
  EXPECT_EQ(report.subgroups, (std::vector<std::string>{"F", "M"}));
  ASSERT_TRUE(report.equalized_odds.has_value());
  // F is perfect; M predicts A everywhere: TPR 9/18, FPR 9/18.
  EXPECT_DOUBLE_EQ(*report.equalized_odds, 0.5);
  EXPECT_THROW(AssessFairness(test, predicted, {"A", "B"}, "gender", 100), Error);
}

// ---- Brute-force oracle ----------------------------------------------------

TEST(FairnessOracleTest, AgreesOnRandomTables) {
  Rng rng(4242);
  std::size_t zero_eo = 0;
  for (int instance = 0; instance < 1000; ++instance) {
    zero_eo += oracle::CheckFairnessInstance(rng) ? 1 : 0;
  }
  EXPECT_GT(zero_eo, 0u);
}

}  // namespace
}  // namespace synthaudit
