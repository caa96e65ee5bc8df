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
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/generator_io.hpp"
#include "synthaudit/hash.hpp"
#include "synthaudit/leakage.hpp"

namespace synthaudit {

inline constexpr std::string_view kReportFormat = "synthaudit-report";
inline constexpr int kReportSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

// Mean and standard error of per-seed values.
struct Summary {
  std::vector<double> values;
  double mean = 0.0;
  double stderr_ = 0.0;

  bool operator==(const Summary&) const = default;
};

inline Summary Summarize(std::vector<double> values) {
  Summary s;
  s.values = std::move(values);
  if (s.values.empty()) return s;
  double sum = 0.0;
  for (double v : s.values) sum += v;
  const auto n = static_cast<double>(s.values.size());
  s.mean = sum / n;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return s;
}

struct UtilityDelta {
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double subset_accuracy = 0.0;
  double accuracy = 0.0;

  bool operator==(const UtilityDelta&) const = default;
};

struct UtilitySection {
  Summary micro_f1;
  Summary macro_f1;
  Summary subset_accuracy;
  Summary accuracy;
  std::optional<UtilityDelta> delta;  // arm mean minus real-baseline mean
  std::vector<std::string> warnings;

  bool operator==(const UtilitySection&) const = default;
};

struct FairnessSection {
  std::string attribute;
  std::string pooling;
  std::optional<std::string> error;
  Summary fned;
  Summary fped;
  Summary tped;
  Summary tned;
  std::optional<Summary> equalized_odds;
  std::vector<std::string> subgroups;
  std::vector<std::string> excluded;

  bool operator==(const FairnessSection&) const = default;
};

struct CanaryRow {
  std::string kind;
  int repetitions = 0;
  double epsilon = 0.0;
  std::size_t rank = 0;
  double perplexity = 0.0;
  std::size_t num_candidates = 0;

  bool operator==(const CanaryRow&) const = default;
};

struct EntityRow {
  std::string surface;  // SHA-256 prefix unless the report was revealed
  std::string category;
  std::size_t real_count = 0;
  std::size_t synth_count = 0;

  bool operator==(const EntityRow&) const = default;
};

struct LeakageSection {
  std::map<std::string, double> rates;
  std::optional<double> overall_rate;
  PhraseOverlap phrases;
  std::vector<EntityRow> top_entities;
  std::optional<std::size_t> max_real_frequency;
  std::vector<EntityRow> scatter;  // entities under the frequency filter

  bool operator==(const LeakageSection&) const = default;
};

struct ArmFailure {
  std::string stage;
  std::string message;

  bool operator==(const ArmFailure&) const = default;
};

struct ArmReport {
  std::string tag;
  std::string source;  // "generated" or "file"
  std::optional<double> epsilon;
  double delta = 0.0;
  double clip = 0.0;
  double sigma = 0.0;
  std::size_t synthetic_documents = 0;
  std::optional<ArmFailure> failure;
  std::optional<LeakageSection> leakage;
  std::optional<UtilitySection> utility;
  std::vector<FairnessSection> fairness;
  std::vector<CanaryRow> canary;

  bool operator==(const ArmReport&) const = default;
};

struct CanaryInfo {
  std::string kind;
  std::string template_text;
  std::string secret;  // masked unless revealed

  bool operator==(const CanaryInfo&) const = default;
};

struct AuditReport {
  std::string config_sha256;
  std::uint64_t master_seed = 0;
  std::optional<std::string> generated_at;
  bool revealed = false;
  std::size_t real_documents = 0;
  std::size_t train_documents = 0;
  std::size_t dev_documents = 0;
  std::size_t test_documents = 0;
  std::vector<std::string> label_space;
  UtilitySection baseline_utility;
  std::vector<FairnessSection> baseline_fairness;
  std::vector<CanaryInfo> canaries;
  std::vector<ArmReport> arms;

  bool operator==(const AuditReport&) const = default;
};

inline std::string RedactSurface(const std::string& surface, bool reveal) {
  if (reveal) return surface;
  return "sha256:" + Sha256Hex(surface).substr(0, 16);
}

inline constexpr std::string_view kMaskedSecret = "[redacted]";

// ---- JSON -------------------------------------------------------------------

namespace report_internal {

using ojson = nlohmann::ordered_json;
using json = nlohmann::json;

template <typename T>
ojson Optional(const std::optional<T>& value) {
  return value ? ojson(*value) : ojson(nullptr);
}

template <typename T>
std::optional<T> GetOptional(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<T>();
}

inline ojson ToJson(const Summary& s) {
  ojson out;
  out["mean"] = s.mean;
  out["stderr"] = s.stderr_;
  out["values"] = s.values;
  return out;
}

inline Summary SummaryFrom(const json& j) {
  Summary s;
  s.mean = j.at("mean").get<double>();
  s.stderr_ = j.at("stderr").get<double>();
  s.values = j.at("values").get<std::vector<double>>();
  return s;
}

inline ojson ToJson(const UtilitySection& u) {
  ojson out;
  out["micro_f1"] = ToJson(u.micro_f1);
  out["macro_f1"] = ToJson(u.macro_f1);
  out["subset_accuracy"] = ToJson(u.subset_accuracy);
  out["accuracy"] = ToJson(u.accuracy);
  if (u.delta) {
    ojson d;
    d["micro_f1"] = u.delta->micro_f1;
    d["macro_f1"] = u.delta->macro_f1;
    d["subset_accuracy"] = u.delta->subset_accuracy;
    d["accuracy"] = u.delta->accuracy;
    out["delta_vs_real"] = std::move(d);
  } else {
    out["delta_vs_real"] = nullptr;
  }
  out["warnings"] = u.warnings;
  return out;
}

inline UtilitySection UtilityFrom(const json& j) {
  UtilitySection u;
  u.micro_f1 = SummaryFrom(j.at("micro_f1"));
  u.macro_f1 = SummaryFrom(j.at("macro_f1"));
  u.subset_accuracy = SummaryFrom(j.at("subset_accuracy"));
  u.accuracy = SummaryFrom(j.at("accuracy"));
  if (!j.at("delta_vs_real").is_null()) {
    const json& d = j.at("delta_vs_real");
    u.delta = UtilityDelta{d.at("micro_f1").get<double>(), d.at("macro_f1").get<double>(),
                           d.at("subset_accuracy").get<double>(),
                           d.at("accuracy").get<double>()};
  }
  u.warnings = j.at("warnings").get<std::vector<std::string>>();
  return u;
}

inline ojson ToJson(const FairnessSection& f) {
  ojson out;
  out["attribute"] = f.attribute;
  out["pooling"] = f.pooling;
  out["error"] = Optional(f.error);
  out["fned"] = ToJson(f.fned);
  out["fped"] = ToJson(f.fped);
  out["tped"] = ToJson(f.tped);
  out["tned"] = ToJson(f.tned);
  out["equalized_odds"] = f.equalized_odds ? ToJson(*f.equalized_odds) : ojson(nullptr);
  out["subgroups"] = f.subgroups;
  out["excluded"] = f.excluded;
  return out;
}

inline FairnessSection FairnessFrom(const json& j) {
  FairnessSection f;
  f.attribute = j.at("attribute").get<std::string>();
  f.pooling = j.at("pooling").get<std::string>();
  f.error = GetOptional<std::string>(j, "error");
  f.fned = SummaryFrom(j.at("fned"));
  f.fped = SummaryFrom(j.at("fped"));
  f.tped = SummaryFrom(j.at("tped"));
  f.tned = SummaryFrom(j.at("tned"));
  if (!j.at("equalized_odds").is_null()) f.equalized_odds = SummaryFrom(j.at("equalized_odds"));
  f.subgroups = j.at("subgroups").get<std::vector<std::string>>();
  f.excluded = j.at("excluded").get<std::vector<std::string>>();
  return f;
}

inline ojson ToJson(const EntityRow& e) {
  ojson out;
  out["surface"] = e.surface;
  out["category"] = e.category;
  out["real_count"] = e.real_count;
  out["synth_count"] = e.synth_count;
  return out;
}

inline EntityRow EntityFrom(const json& j) {
  return {j.at("surface").get<std::string>(), j.at("category").get<std::string>(),
          j.at("real_count").get<std::size_t>(), j.at("synth_count").get<std::size_t>()};
}

inline ojson ToJson(const LeakageSection& l) {
  ojson out;
  out["rates"] = l.rates;
  out["overall_rate"] = Optional(l.overall_rate);
  ojson p;
  p["overlap_count"] = l.phrases.overlap_count;
  p["total_phrases_union"] = l.phrases.total_phrases_union;
  p["ratio"] = l.phrases.ratio;
  p["real_phrases"] = l.phrases.real_phrases;
  p["synth_phrases"] = l.phrases.synth_phrases;
  out["phrase_overlap"] = std::move(p);
  ojson top = ojson::array();
  for (const EntityRow& e : l.top_entities) top.push_back(ToJson(e));
  out["top_entities"] = std::move(top);
  out["max_real_frequency"] = Optional(l.max_real_frequency);
  ojson scatter = ojson::array();
  for (const EntityRow& e : l.scatter) scatter.push_back(ToJson(e));
  out["entity_scatter"] = std::move(scatter);
  return out;
}

inline LeakageSection LeakageFrom(const json& j) {
  LeakageSection l;
  l.rates = j.at("rates").get<std::map<std::string, double>>();
  l.overall_rate = GetOptional<double>(j, "overall_rate");
  const json& p = j.at("phrase_overlap");
  l.phrases.overlap_count = p.at("overlap_count").get<std::size_t>();
  l.phrases.total_phrases_union = p.at("total_phrases_union").get<std::size_t>();
  l.phrases.ratio = p.at("ratio").get<double>();
  l.phrases.real_phrases = p.at("real_phrases").get<std::size_t>();
  l.phrases.synth_phrases = p.at("synth_phrases").get<std::size_t>();
  for (const json& e : j.at("top_entities")) l.top_entities.push_back(EntityFrom(e));
  l.max_real_frequency = GetOptional<std::size_t>(j, "max_real_frequency");
  for (const json& e : j.at("entity_scatter")) l.scatter.push_back(EntityFrom(e));
  return l;
}

inline ojson ToJson(const CanaryRow& c) {
  ojson out;
  out["kind"] = c.kind;
  out["repetitions"] = c.repetitions;
  out["epsilon"] = EpsilonToJson(c.epsilon);
  out["rank"] = c.rank;
  out["perplexity"] = c.perplexity;
  out["num_candidates"] = c.num_candidates;
  return out;
}

inline CanaryRow CanaryFrom(const json& j) {
  return {j.at("kind").get<std::string>(), j.at("repetitions").get<int>(),
          EpsilonFromJson(j.at("epsilon")), j.at("rank").get<std::size_t>(),
          j.at("perplexity").get<double>(), j.at("num_candidates").get<std::size_t>()};
}

inline ojson ToJson(const ArmReport& a) {
  ojson out;
  out["tag"] = a.tag;
  out["source"] = a.source;
  out["epsilon"] = a.epsilon ? EpsilonToJson(*a.epsilon) : ojson(nullptr);
  out["delta"] = a.delta;
  out["clip"] = a.clip;
  out["sigma"] = a.sigma;
  out["synthetic_documents"] = a.synthetic_documents;
  out["status"] = a.failure ? "failed" : "ok";
  if (a.failure) {
    out["failure"] = {{"stage", a.failure->stage}, {"message", a.failure->message}};
  } else {
    out["failure"] = nullptr;
  }
  out["leakage"] = a.leakage ? ToJson(*a.leakage) : ojson(nullptr);
  out["utility"] = a.utility ? ToJson(*a.utility) : ojson(nullptr);
  ojson fairness = ojson::array();
  for (const auto& f : a.fairness) fairness.push_back(ToJson(f));
  out["fairness"] = std::move(fairness);
  ojson canary = ojson::array();
  for (const auto& c : a.canary) canary.push_back(ToJson(c));
  out["canary"] = std::move(canary);
  return out;
}

inline ArmReport ArmFrom(const json& j) {
  ArmReport a;
  a.tag = j.at("tag").get<std::string>();
  a.source = j.at("source").get<std::string>();
  if (!j.at("epsilon").is_null()) a.epsilon = EpsilonFromJson(j.at("epsilon"));
  a.delta = j.at("delta").get<double>();
  a.clip = j.at("clip").get<double>();
  a.sigma = j.at("sigma").get<double>();
  a.synthetic_documents = j.at("synthetic_documents").get<std::size_t>();
  if (!j.at("failure").is_null()) {
    a.failure = ArmFailure{j.at("failure").at("stage").get<std::string>(),
                           j.at("failure").at("message").get<std::string>()};
  }
  if (!j.at("leakage").is_null()) a.leakage = LeakageFrom(j.at("leakage"));
  if (!j.at("utility").is_null()) a.utility = UtilityFrom(j.at("utility"));
  for (const json& f : j.at("fairness")) a.fairness.push_back(FairnessFrom(f));
  for (const json& c : j.at("canary")) a.canary.push_back(CanaryFrom(c));
  return a;
}

}  // namespace report_internal

inline nlohmann::ordered_json ReportToJson(const AuditReport& r) {
  using report_internal::ojson;
  using report_internal::ToJson;
  ojson out;
  out["format"] = kReportFormat;
  out["schema_version"] = kReportSchemaVersion;
  ojson provenance;
  provenance["config_sha256"] = r.config_sha256;
  provenance["master_seed"] = r.master_seed;
  provenance["tool_version"] = kToolVersion;
  provenance["json_library"] = "nlohmann/json " + std::to_string(NLOHMANN_JSON_VERSION_MAJOR) +
                               "." + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                               std::to_string(NLOHMANN_JSON_VERSION_PATCH);
  provenance["generated_at"] = report_internal::Optional(r.generated_at);
  provenance["revealed"] = r.revealed;
  out["provenance"] = std::move(provenance);
  ojson dataset;
  dataset["real_documents"] = r.real_documents;
  dataset["train_documents"] = r.train_documents;
  dataset["dev_documents"] = r.dev_documents;
  dataset["test_documents"] = r.test_documents;
  dataset["label_space"] = r.label_space;
  out["dataset"] = std::move(dataset);
  ojson baseline;
  baseline["tag"] = "real";
  baseline["utility"] = ToJson(r.baseline_utility);
  ojson fairness = ojson::array();
  for (const auto& f : r.baseline_fairness) fairness.push_back(ToJson(f));
  baseline["fairness"] = std::move(fairness);
  out["baseline"] = std::move(baseline);
  ojson canaries = ojson::array();
  for (const CanaryInfo& c : r.canaries) {
    canaries.push_back({{"kind", c.kind}, {"template", c.template_text}, {"secret", c.secret}});
  }
  out["canaries"] = std::move(canaries);
  ojson arms = ojson::array();
  for (const ArmReport& a : r.arms) arms.push_back(ToJson(a));
  out["arms"] = std::move(arms);
  return out;
}

inline AuditReport ReportFromJson(const nlohmann::json& j) {
  using namespace report_internal;
  try {
    if (j.at("format").get<std::string>() != kReportFormat) {
      throw Error("report", "not a synthaudit report");
    }
    if (j.at("schema_version").get<int>() != kReportSchemaVersion) {
      throw Error("report", "unsupported report schema version");
    }
    AuditReport r;
    const json& p = j.at("provenance");
    r.config_sha256 = p.at("config_sha256").get<std::string>();
    r.master_seed = p.at("master_seed").get<std::uint64_t>();
    r.generated_at = GetOptional<std::string>(p, "generated_at");
    r.revealed = p.at("revealed").get<bool>();
    const json& d = j.at("dataset");
    r.real_documents = d.at("real_documents").get<std::size_t>();
    r.train_documents = d.at("train_documents").get<std::size_t>();
    r.dev_documents = d.at("dev_documents").get<std::size_t>();
    r.test_documents = d.at("test_documents").get<std::size_t>();
    r.label_space = d.at("label_space").get<std::vector<std::string>>();
    r.baseline_utility = UtilityFrom(j.at("baseline").at("utility"));
    for (const json& f : j.at("baseline").at("fairness")) {
      r.baseline_fairness.push_back(FairnessFrom(f));
    }
    for (const json& c : j.at("canaries")) {
      r.canaries.push_back({c.at("kind").get<std::string>(),
                            c.at("template").get<std::string>(),
                            c.at("secret").get<std::string>()});
    }
    for (const json& a : j.at("arms")) r.arms.push_back(ArmFrom(a));
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error("report", std::string("malformed report: ") + e.what());
  }
}

inline AuditReport LoadReport(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("report", "cannot open '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error("report", path + ": " + e.what());
  }
  return ReportFromJson(j);
}

// ---- Rendering --------------------------------------------------------------

namespace report_internal {

// Shortest round-trip decimal, matching the JSON output.
inline std::string Num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return ojson(v).dump();
}

inline std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline std::string EpsilonText(const std::optional<double>& eps) {
  return eps ? Num(*eps) : "";
}

class CsvWriter {
 public:
  explicit CsvWriter(std::vector<std::string> header) { Row(header); }
  void Row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i > 0) out_ << ',';
      out_ << CsvField(fields[i]);
    }
    out_ << '\n';
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline void WriteFile(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("report", "cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw Error("report", "failed writing '" + path.string() + "'");
}

inline void EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw Error("report", "cannot create output directory '" + dir.string() + "'");
  }
}

inline std::vector<std::string> UtilityFields(const UtilitySection& u) {
  std::vector<std::string> f = {Num(u.micro_f1.mean), Num(u.micro_f1.stderr_),
                                Num(u.macro_f1.mean), Num(u.macro_f1.stderr_),
                                Num(u.subset_accuracy.mean), Num(u.subset_accuracy.stderr_),
                                Num(u.accuracy.mean), Num(u.accuracy.stderr_)};
  if (u.delta) {
    for (double d : {u.delta->micro_f1, u.delta->macro_f1, u.delta->subset_accuracy,
                     u.delta->accuracy}) {
      f.push_back(Num(d));
    }
  } else {
    f.insert(f.end(), 4, "");
  }
  f.push_back(std::to_string(u.micro_f1.values.size()));
  return f;
}

inline std::vector<std::string> FairnessFields(const FairnessSection& f) {
  if (f.error) return {"", "", "", "", "", "", "", "", "", "", *f.error};
  return {Num(f.fned.mean), Num(f.fned.stderr_), Num(f.fped.mean), Num(f.fped.stderr_),
          Num(f.tped.mean), Num(f.tped.stderr_), Num(f.tned.mean), Num(f.tned.stderr_),
          f.equalized_odds ? Num(f.equalized_odds->mean) : "",
          f.equalized_odds ? Num(f.equalized_odds->stderr_) : "", ""};
}

}  // namespace report_internal

inline std::string RenderJson(const AuditReport& report) {
  return ReportToJson(report).dump(2) + "\n";
}

// File name -> contents for the CSV bundle.
inline std::map<std::string, std::string> RenderCsvBundle(const AuditReport& r) {
  using namespace report_internal;
  std::map<std::string, std::string> files;

  CsvWriter classification({"training_data_tag", "dataset_tag", "micro_f1", "micro_f1_stderr",
                            "macro_f1", "macro_f1_stderr", "subset_accuracy",
                            "subset_accuracy_stderr", "accuracy", "accuracy_stderr",
                            "delta_micro_f1", "delta_macro_f1", "delta_subset_accuracy",
                            "delta_accuracy", "seeds"});
  auto utility_row = [&](const std::string& tag, const UtilitySection& u) {
    std::vector<std::string> row = {tag, "real-test"};
    for (auto& f : UtilityFields(u)) row.push_back(std::move(f));
    classification.Row(row);
  };
  utility_row("real", r.baseline_utility);
  for (const ArmReport& a : r.arms) {
    if (a.utility) utility_row(a.tag, *a.utility);
  }
  files["classification.csv"] = classification.str();

  CsvWriter canary({"arm", "kind", "repetitions", "epsilon", "rank", "perplexity",
                    "num_candidates"});
  for (const ArmReport& a : r.arms) {
    for (const CanaryRow& c : a.canary) {
      canary.Row({a.tag, c.kind, std::to_string(c.repetitions), Num(c.epsilon),
                  std::to_string(c.rank), Num(c.perplexity), std::to_string(c.num_candidates)});
    }
  }
  files["canary.csv"] = canary.str();

  std::set<std::string> categories;
  for (const ArmReport& a : r.arms) {
    if (!a.leakage) continue;
    for (const auto& entry : a.leakage->rates) categories.insert(entry.first);
  }
  std::vector<std::string> rate_header = {"arm", "epsilon", "all"};
  rate_header.insert(rate_header.end(), categories.begin(), categories.end());
  CsvWriter rates(rate_header);
  CsvWriter phrases({"arm", "epsilon", "overlap_count", "total_union", "ratio",
                     "real_phrases", "synth_phrases"});
  CsvWriter freq({"arm", "surface_hash", "category", "real_count", "synth_count"});
  CsvWriter plot_freq({"arm", "entity", "category", "source", "count"});
  CsvWriter plot_rates({"arm", "epsilon", "category", "rate"});
  CsvWriter plot_scatter({"arm", "entity", "category", "real_count", "synth_count"});
  for (const ArmReport& a : r.arms) {
    if (!a.leakage) continue;
    const LeakageSection& l = *a.leakage;
    const std::string eps = EpsilonText(a.epsilon);
    std::vector<std::string> rate_row = {a.tag, eps, l.overall_rate ? Num(*l.overall_rate) : ""};
    for (const std::string& category : categories) {
      const auto it = l.rates.find(category);
      rate_row.push_back(it == l.rates.end() ? "" : Num(it->second));
      if (it != l.rates.end()) plot_rates.Row({a.tag, eps, category, Num(it->second)});
    }
    rates.Row(rate_row);
    phrases.Row({a.tag, eps, std::to_string(l.phrases.overlap_count),
                 std::to_string(l.phrases.total_phrases_union), Num(l.phrases.ratio),
                 std::to_string(l.phrases.real_phrases),
                 std::to_string(l.phrases.synth_phrases)});
    for (const EntityRow& e : l.top_entities) {
      plot_freq.Row({a.tag, e.surface, e.category, "real", std::to_string(e.real_count)});
      plot_freq.Row({a.tag, e.surface, e.category, "synthetic", std::to_string(e.synth_count)});
    }
    for (const EntityRow& e : l.scatter) {
      freq.Row({a.tag, e.surface, e.category, std::to_string(e.real_count),
                std::to_string(e.synth_count)});
      plot_scatter.Row({a.tag, e.surface, e.category, std::to_string(e.real_count),
                        std::to_string(e.synth_count)});
    }
  }
  files["leakage_rates.csv"] = rates.str();
  files["phrase_overlap.csv"] = phrases.str();
  files["entity_freq.csv"] = freq.str();
  files["plot_entity_frequency.csv"] = plot_freq.str();
  files["plot_leakage_rates.csv"] = plot_rates.str();
  files["plot_entity_scatter.csv"] = plot_scatter.str();

  CsvWriter fairness({"training_data_tag", "attribute", "pooling", "FNED", "FNED_stderr",
                      "FPED", "FPED_stderr", "TPED", "TPED_stderr", "TNED", "TNED_stderr",
                      "EO", "EO_stderr", "error"});
  auto fairness_rows = [&](const std::string& tag, const std::vector<FairnessSection>& list) {
    for (const FairnessSection& f : list) {
      std::vector<std::string> row = {tag, f.attribute, f.pooling};
      for (auto& v : FairnessFields(f)) row.push_back(std::move(v));
      fairness.Row(row);
    }
  };
  fairness_rows("real", r.baseline_fairness);
  for (const ArmReport& a : r.arms) fairness_rows(a.tag, a.fairness);
  files["fairness.csv"] = fairness.str();
  return files;
}

inline std::string RenderMarkdown(const AuditReport& r) {
  using report_internal::Num;
  std::ostringstream md;
  auto fixed = [](double v, int digits = 4) {
    std::ostringstream s;
    s.setf(std::ios::fixed);
    s.precision(digits);
    s << v;
    return s.str();
  };
  auto signed_fixed = [&](double v) { return (v >= 0 ? "+" : "") + fixed(v); };
  auto utility_table = [&](const UtilitySection& u) {
    md << "| metric | mean | stderr | delta vs real |\n|---|---|---|---|\n";
    auto row = [&](const char* name, const Summary& s, std::optional<double> d) {
      md << "| " << name << " | " << fixed(s.mean) << " | " << fixed(s.stderr_) << " | "
         << (d ? signed_fixed(*d) : "-") << " |\n";
    };
    row("micro F1", u.micro_f1, u.delta ? std::optional(u.delta->micro_f1) : std::nullopt);
    row("macro F1", u.macro_f1, u.delta ? std::optional(u.delta->macro_f1) : std::nullopt);
    row("subset accuracy", u.subset_accuracy,
        u.delta ? std::optional(u.delta->subset_accuracy) : std::nullopt);
    row("accuracy", u.accuracy, u.delta ? std::optional(u.delta->accuracy) : std::nullopt);
    for (const auto& w : u.warnings) md << "\n> warning: " << w << "\n";
    md << "\n";
  };
  auto fairness_table = [&](const std::vector<FairnessSection>& list) {
    if (list.empty()) return;
    md << "| attribute | FNED | FPED | TPED | TNED | EO | subgroups |\n"
          "|---|---|---|---|---|---|---|\n";
    for (const FairnessSection& f : list) {
      if (f.error) {
        md << "| " << f.attribute << " | - | - | - | - | - | " << *f.error << " |\n";
        continue;
      }
      std::string groups;
      for (const auto& g : f.subgroups) groups += (groups.empty() ? "" : ", ") + g;
      md << "| " << f.attribute << " | " << fixed(f.fned.mean) << " | " << fixed(f.fped.mean)
         << " | " << fixed(f.tped.mean) << " | " << fixed(f.tned.mean) << " | "
         << (f.equalized_odds ? fixed(f.equalized_odds->mean) : "-") << " | " << groups
         << " |\n";
    }
    md << "\n";
  };

  md << "# Synthetic data audit\n\n";
  md << "- config sha256: `" << r.config_sha256 << "`\n";
  md << "- master seed: " << r.master_seed << "\n";
  md << "- documents: " << r.real_documents << " real (train " << r.train_documents << ", dev "
     << r.dev_documents << ", test " << r.test_documents << ")\n";
  std::string labels;
  for (const auto& l : r.label_space) labels += (labels.empty() ? "" : ", ") + l;
  md << "- labels: " << labels << "\n";
  md << "- entity surfaces: " << (r.revealed ? "revealed" : "hashed") << "\n\n";

  md << "## Baseline: trained on real data\n\n";
  utility_table(r.baseline_utility);
  fairness_table(r.baseline_fairness);

  for (const ArmReport& a : r.arms) {
    md << "## Arm " << a.tag << "\n\n";
    md << "- source: " << a.source << "\n";
    md << "- epsilon: " << (a.epsilon ? Num(*a.epsilon) : "n/a");
    if (a.epsilon && std::isfinite(*a.epsilon)) {
      md << ", delta " << Num(a.delta) << ", clip " << Num(a.clip) << ", sigma "
         << fixed(a.sigma);
    }
    md << "\n- synthetic documents: " << a.synthetic_documents << "\n";
    if (a.failure) {
      md << "- **failed** at stage `" << a.failure->stage << "`: " << a.failure->message << "\n";
    }
    md << "\n";
    if (a.utility) {
      md << "### Utility (train on synthetic, test on real)\n\n";
      utility_table(*a.utility);
    }
    if (a.leakage) {
      const LeakageSection& l = *a.leakage;
      md << "### Entity leakage\n\n| category | rate |\n|---|---|\n";
      for (const auto& [category, rate] : l.rates) md << "| " << category << " | " << fixed(rate) << " |\n";
      if (l.overall_rate) md << "| all | " << fixed(*l.overall_rate) << " |\n";
      md << "\nContext phrases: " << l.phrases.overlap_count << " of "
         << l.phrases.total_phrases_union << " in the union overlap (ratio "
         << fixed(l.phrases.ratio, 5) << ").\n\n";
      if (!l.top_entities.empty()) {
        md << "| entity | category | real | synthetic |\n|---|---|---|---|\n";
        for (const EntityRow& e : l.top_entities) {
          md << "| " << e.surface << " | " << e.category << " | " << e.real_count << " | "
             << e.synth_count << " |\n";
        }
        md << "\n";
      }
    }
    if (!a.fairness.empty()) {
      md << "### Fairness\n\n";
      fairness_table(a.fairness);
    }
    if (!a.canary.empty()) {
      md << "### Canaries\n\n| kind | repetitions | rank | perplexity | candidates |\n"
            "|---|---|---|---|---|\n";
      for (const CanaryRow& c : a.canary) {
        md << "| " << c.kind << " | " << c.repetitions << " | " << c.rank << " | "
           << fixed(c.perplexity, 3) << " | " << c.num_candidates << " |\n";
      }
      md << "\n";
    }
  }
  return md.str();
}

enum class ReportFormat { kJson, kCsvBundle, kMarkdown };

inline ReportFormat ParseReportFormat(std::string_view name) {
  if (name == "json") return ReportFormat::kJson;
  if (name == "csv" || name == "csv-bundle") return ReportFormat::kCsvBundle;
  if (name == "markdown" || name == "md") return ReportFormat::kMarkdown;
  throw Error("report", "unknown report format '" + std::string(name) + "'");
}

// Writes report.json, report.md or csv/<table>.csv under `dir`; returns the
// files written.
inline std::vector<std::filesystem::path> RenderReport(const AuditReport& report,
                                                       ReportFormat format,
                                                       const std::filesystem::path& dir) {
  using report_internal::EnsureDirectory;
  using report_internal::WriteFile;
  EnsureDirectory(dir);
  std::vector<std::filesystem::path> written;
  switch (format) {
    case ReportFormat::kJson:
      written.push_back(dir / "report.json");
      WriteFile(written.back(), RenderJson(report));
      break;
    case ReportFormat::kMarkdown:
      written.push_back(dir / "report.md");
      WriteFile(written.back(), RenderMarkdown(report));
      break;
    case ReportFormat::kCsvBundle: {
      EnsureDirectory(dir / "csv");
      for (const auto& [name, content] : RenderCsvBundle(report)) {
        written.push_back(dir / "csv" / name);
        WriteFile(written.back(), content);
      }
      break;
    }
  }
  return written;
}

}  // namespace synthaudit
