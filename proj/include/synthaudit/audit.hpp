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

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "synthaudit/canary.hpp"
#include "synthaudit/corpus.hpp"
#include "synthaudit/corpus_io.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/fairness.hpp"
#include "synthaudit/generator.hpp"
#include "synthaudit/generator_io.hpp"
#include "synthaudit/hash.hpp"
#include "synthaudit/leakage.hpp"
#include "synthaudit/random.hpp"
#include "synthaudit/report.hpp"
#include "synthaudit/utility.hpp"

namespace synthaudit {

inline constexpr int kConfigSchemaVersion = 1;
inline constexpr const char* kOutputEnvVar = "SYNTHAUDIT_OUT";

struct ArmConfig {
  PrivacyArm arm;
  // Audit a pre-made corpus instead of generating one.
  std::optional<std::string> synthetic_corpus;
};

struct CanaryConfig {
  bool enabled = false;
  std::vector<int> repetitions = {0, 1, 10, 100};
  std::size_t num_candidates = 1000;
  std::vector<CanarySpec> specs = DefaultCanaries();
};

struct LeakageConfig {
  int w_min = 1;
  int w_max = 4;
  std::size_t top_entities = 8;
  std::optional<std::size_t> max_real_frequency;
};

struct UtilityConfig {
  TrainOptions train;
  std::size_t seeds = 3;
  std::optional<DpSgdOptions> dp_sgd;
};

struct FairnessConfig {
  std::vector<std::string> attributes;
  std::size_t min_support = 100;
  Pooling pooling = Pooling::kMicro;
};

struct AuditConfig {
  std::string real_corpus;
  std::string output_dir = "synthaudit-out";
  std::uint64_t master_seed = 0;
  NgramOptions ngram;
  SamplerConfig sampler;
  std::size_t num_documents = 0;  // 0: as many as the training split
  std::vector<ArmConfig> arms;
  std::size_t top_n = 10;
  std::array<double, 3> split_ratios = {0.8, 0.1, 0.1};
  CanaryConfig canary;
  LeakageConfig leakage;
  UtilityConfig utility;
  FairnessConfig fairness;
  std::size_t jobs = 1;
  bool reveal = false;
  std::string config_sha256;  // of the exact config bytes

  void Validate() const;
};

namespace audit_internal {

using json = nlohmann::json;

inline void CheckKeys(const json& j, const std::string& where,
                      std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw Error("config", where + " must be an object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) throw Error("config", "unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
void Read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

// Arm tags name output directories, so they are restricted to a safe set.
inline void ValidateTag(const std::string& tag) {
  if (tag.empty() || tag == "." || tag == ".." || tag == "real") {
    throw Error("config", "invalid arm tag '" + tag + "'");
  }
  for (char c : tag) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-' ||
                    c == '=' || c == '+';
    if (!ok) throw Error("config", "arm tag '" + tag + "' has characters outside [A-Za-z0-9._=+-]");
  }
}

inline std::string ResolvePath(const std::string& path, const std::filesystem::path& base) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return p.string();
  return (base / p).lexically_normal().string();
}

inline std::string DefaultTag(double epsilon) {
  if (std::isinf(epsilon)) return "eps=inf";
  std::ostringstream s;
  s << "eps=" << epsilon;
  return s.str();
}

inline std::string IsoTimestamp(std::int64_t epoch) {
  const std::time_t t = static_cast<std::time_t>(epoch);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace audit_internal

// Parses a schema-versioned config document. Unknown keys are errors.
// Relative paths (corpora and output_dir) resolve against `base_dir`.
inline AuditConfig ParseAuditConfig(const std::string& text,
                                    const std::filesystem::path& base_dir = {}) {
  using namespace audit_internal;
  AuditConfig cfg;
  cfg.config_sha256 = Sha256Hex(text);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error("config", std::string("invalid JSON: ") + e.what());
  }
  try {
    CheckKeys(j, "config",
              {"schema_version", "real_corpus", "output_dir", "master_seed", "generator",
               "arms", "split", "canary", "leakage", "utility", "fairness", "jobs"});
    if (!j.contains("schema_version") ||
        j.at("schema_version").get<int>() != kConfigSchemaVersion) {
      throw Error("config", "schema_version must be " + std::to_string(kConfigSchemaVersion));
    }
    if (j.contains("real_corpus")) {
      cfg.real_corpus = ResolvePath(j.at("real_corpus").get<std::string>(), base_dir);
    }
    if (j.contains("output_dir")) {
      cfg.output_dir = ResolvePath(j.at("output_dir").get<std::string>(), base_dir);
    }
    Read(j, "master_seed", cfg.master_seed);
    Read(j, "jobs", cfg.jobs);

    if (j.contains("generator")) {
      const json& g = j.at("generator");
      CheckKeys(g, "generator",
                {"order", "smoothing_k", "backoff_alpha", "top_k", "top_p", "max_len",
                 "num_documents"});
      Read(g, "order", cfg.ngram.order);
      Read(g, "smoothing_k", cfg.ngram.smoothing_k);
      Read(g, "backoff_alpha", cfg.ngram.backoff_alpha);
      Read(g, "top_k", cfg.sampler.top_k);
      Read(g, "top_p", cfg.sampler.top_p);
      Read(g, "max_len", cfg.sampler.max_len);
      Read(g, "num_documents", cfg.num_documents);
    }

    if (j.contains("arms")) {
      for (const json& a : j.at("arms")) {
        CheckKeys(a, "arm", {"tag", "epsilon", "delta", "clip", "synthetic_corpus"});
        ArmConfig arm;
        if (a.contains("epsilon")) arm.arm.epsilon = EpsilonFromJson(a.at("epsilon"));
        arm.arm.tag = a.contains("tag") ? a.at("tag").get<std::string>()
                                        : DefaultTag(arm.arm.epsilon);
        Read(a, "delta", arm.arm.delta);
        Read(a, "clip", arm.arm.clip);
        if (a.contains("synthetic_corpus")) {
          arm.synthetic_corpus =
              ResolvePath(a.at("synthetic_corpus").get<std::string>(), base_dir);
        }
        cfg.arms.push_back(std::move(arm));
      }
    }

    if (j.contains("split")) {
      const json& s = j.at("split");
      CheckKeys(s, "split", {"top_n", "ratios"});
      Read(s, "top_n", cfg.top_n);
      if (s.contains("ratios")) {
        const auto ratios = s.at("ratios").get<std::vector<double>>();
        if (ratios.size() != 3) throw Error("config", "split.ratios needs three entries");
        cfg.split_ratios = {ratios[0], ratios[1], ratios[2]};
      }
    }

    if (j.contains("canary")) {
      const json& c = j.at("canary");
      CheckKeys(c, "canary", {"enabled", "repetitions", "num_candidates", "specs"});
      Read(c, "enabled", cfg.canary.enabled);
      Read(c, "repetitions", cfg.canary.repetitions);
      Read(c, "num_candidates", cfg.canary.num_candidates);
      if (c.contains("specs")) {
        cfg.canary.specs.clear();
        for (const json& s : c.at("specs")) {
          CheckKeys(s, "canary spec", {"kind", "template", "secret"});
          CanarySpec spec;
          spec.kind = ParseCanaryKind(s.at("kind").get<std::string>());
          spec.template_text = s.at("template").get<std::string>();
          spec.secret = s.at("secret").get<std::string>();
          cfg.canary.specs.push_back(std::move(spec));
        }
      }
    }

    if (j.contains("leakage")) {
      const json& l = j.at("leakage");
      CheckKeys(l, "leakage", {"w_min", "w_max", "top_entities", "max_real_frequency"});
      Read(l, "w_min", cfg.leakage.w_min);
      Read(l, "w_max", cfg.leakage.w_max);
      Read(l, "top_entities", cfg.leakage.top_entities);
      if (l.contains("max_real_frequency") && !l.at("max_real_frequency").is_null()) {
        cfg.leakage.max_real_frequency = l.at("max_real_frequency").get<std::size_t>();
      }
    }

    if (j.contains("utility")) {
      const json& u = j.at("utility");
      CheckKeys(u, "utility",
                {"epochs", "learning_rate", "batch_size", "dimension", "seeds", "dp_sgd"});
      Read(u, "epochs", cfg.utility.train.epochs);
      Read(u, "learning_rate", cfg.utility.train.learning_rate);
      Read(u, "batch_size", cfg.utility.train.batch_size);
      Read(u, "dimension", cfg.utility.train.dimension);
      Read(u, "seeds", cfg.utility.seeds);
      if (u.contains("dp_sgd") && !u.at("dp_sgd").is_null()) {
        const json& d = u.at("dp_sgd");
        CheckKeys(d, "utility.dp_sgd", {"clip", "noise_multiplier"});
        DpSgdOptions dp;
        if (d.contains("clip")) dp.clip = EpsilonFromJson(d.at("clip"));
        Read(d, "noise_multiplier", dp.noise_multiplier);
        cfg.utility.dp_sgd = dp;
      }
    }

    if (j.contains("fairness")) {
      const json& f = j.at("fairness");
      CheckKeys(f, "fairness", {"attributes", "min_support", "pooling"});
      Read(f, "attributes", cfg.fairness.attributes);
      Read(f, "min_support", cfg.fairness.min_support);
      if (f.contains("pooling")) {
        cfg.fairness.pooling = ParsePooling(f.at("pooling").get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw Error("config", std::string("bad value: ") + e.what());
  }
  return cfg;
}

inline AuditConfig LoadAuditConfig(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("config", "cannot open config '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return ParseAuditConfig(text.str(), std::filesystem::path(path).parent_path());
}

inline void AuditConfig::Validate() const {
  if (real_corpus.empty()) throw Error("config", "real_corpus is required");
  if (arms.empty()) throw Error("config", "at least one arm is required");
  std::set<std::string> tags;
  for (const ArmConfig& a : arms) {
    audit_internal::ValidateTag(a.arm.tag);
    if (!tags.insert(a.arm.tag).second) {
      throw Error("config", "duplicate arm tag '" + a.arm.tag + "'");
    }
    if (!a.synthetic_corpus) {
      if (!(a.arm.epsilon > 0.0)) throw Error("config", "arm epsilon must be positive");
      if (a.arm.private_release() && !(a.arm.delta > 0.0 && a.arm.delta < 1.0)) {
        throw Error("config", "arm delta must lie in (0, 1)");
      }
      if (a.arm.private_release() && !(a.arm.clip > 0.0)) {
        throw Error("config", "arm clip must be positive");
      }
    }
  }
  if (ngram.order < 1) throw Error("config", "generator order must be at least 1");
  if (!(ngram.smoothing_k > 0.0)) throw Error("config", "smoothing_k must be positive");
  sampler.Validate();
  if (leakage.w_min < 0 || leakage.w_max < leakage.w_min) {
    throw Error("config", "leakage windows need 0 <= w_min <= w_max");
  }
  if (utility.seeds < 1) throw Error("config", "utility.seeds must be at least 1");
  if (utility.train.epochs < 1) throw Error("config", "utility.epochs must be at least 1");
  if (jobs < 1) throw Error("config", "jobs must be at least 1");
  if (canary.enabled) {
    for (const CanarySpec& spec : canary.specs) spec.Validate();
    for (int r : canary.repetitions) {
      if (r < 0) throw Error("config", "canary repetitions must be non-negative");
    }
  }
}

// --out beats SYNTHAUDIT_OUT beats the config value.
inline std::string ResolveOutputDir(const AuditConfig& cfg,
                                    const std::optional<std::string>& cli_out) {
  if (cli_out) return *cli_out;
  if (const char* env = std::getenv(kOutputEnvVar); env != nullptr && *env != '\0') {
    return env;
  }
  return cfg.output_dir;
}

namespace audit_internal {

struct SeedRun {
  EvalMetrics metrics;
  std::vector<CodeSet> predictions;
  std::vector<std::string> warnings;
};

inline LinearClassifier TrainForAudit(const Corpus& train, const UtilityConfig& cfg,
                                      const std::vector<std::string>& labels,
                                      std::uint64_t seed) {
  TrainOptions options = cfg.train;
  options.seed = seed;
  options.label_space = labels;
  return cfg.dp_sgd ? TrainClassifierDpSgd(train, options, *cfg.dp_sgd)
                    : TrainClassifier(train, options);
}

inline std::vector<SeedRun> RunUtilitySeeds(const Corpus& train, const Corpus& test,
                                            const AuditConfig& cfg,
                                            const std::vector<std::string>& labels) {
  std::vector<SeedRun> runs;
  for (std::size_t s = 0; s < cfg.utility.seeds; ++s) {
    const LinearClassifier model =
        TrainForAudit(train, cfg.utility, labels, DeriveSeed(cfg.master_seed, 40, s));
    SeedRun run;
    run.metrics = Evaluate(model, test, cfg.jobs);
    run.predictions = PredictLabels(model, test, cfg.jobs);
    run.warnings = model.warnings();
    runs.push_back(std::move(run));
  }
  return runs;
}

inline UtilitySection SummarizeUtility(const std::vector<SeedRun>& runs) {
  UtilitySection u;
  std::vector<double> micro, macro, subset, accuracy;
  std::set<std::string> warnings;
  for (const SeedRun& run : runs) {
    micro.push_back(run.metrics.micro_f1);
    macro.push_back(run.metrics.macro_f1);
    subset.push_back(run.metrics.subset_accuracy);
    accuracy.push_back(run.metrics.accuracy);
    warnings.insert(run.warnings.begin(), run.warnings.end());
  }
  u.micro_f1 = Summarize(micro);
  u.macro_f1 = Summarize(macro);
  u.subset_accuracy = Summarize(subset);
  u.accuracy = Summarize(accuracy);
  u.warnings.assign(warnings.begin(), warnings.end());
  return u;
}

inline UtilityDelta DeltaOf(const UtilitySection& arm, const UtilitySection& base) {
  return {arm.micro_f1.mean - base.micro_f1.mean, arm.macro_f1.mean - base.macro_f1.mean,
          arm.subset_accuracy.mean - base.subset_accuracy.mean,
          arm.accuracy.mean - base.accuracy.mean};
}

// Fairness problems (e.g. no subgroup clearing min_support) are recorded in
// the section and do not abort the arm.
inline std::vector<FairnessSection> RunFairness(const Corpus& test,
                                                const std::vector<SeedRun>& runs,
                                                const std::vector<std::string>& labels,
                                                const FairnessConfig& cfg) {
  std::vector<FairnessSection> sections;
  for (const std::string& attribute : cfg.attributes) {
    FairnessSection section;
    section.attribute = attribute;
    section.pooling = std::string(PoolingName(cfg.pooling));
    try {
      std::vector<double> fned, fped, tped, tned, eo;
      bool eo_defined = true;
      for (const SeedRun& run : runs) {
        const FairnessReport r = AssessFairness(test, run.predictions, labels, attribute,
                                                cfg.min_support, cfg.pooling);
        fned.push_back(r.differences.fned);
        fped.push_back(r.differences.fped);
        tped.push_back(r.differences.tped);
        tned.push_back(r.differences.tned);
        if (r.equalized_odds) eo.push_back(*r.equalized_odds);
        else eo_defined = false;
        section.subgroups = r.subgroups;
        section.excluded = r.excluded;
      }
      section.fned = Summarize(fned);
      section.fped = Summarize(fped);
      section.tped = Summarize(tped);
      section.tned = Summarize(tned);
      if (eo_defined) section.equalized_odds = Summarize(eo);
    } catch (const Error& e) {
      section = FairnessSection{};
      section.attribute = attribute;
      section.pooling = std::string(PoolingName(cfg.pooling));
      section.error = e.what();
    }
    sections.push_back(std::move(section));
  }
  return sections;
}

inline EntityRow ToEntityRow(const EntityLeak& leak, bool reveal) {
  return {RedactSurface(leak.key.Surface(), reveal), leak.key.category, leak.real_count,
          leak.synth_count};
}

}  // namespace audit_internal

struct AuditRun {
  AuditReport report;
  // Synthetic corpora of generated arms, keyed by tag; empty when failed.
  std::map<std::string, Corpus> synthetic;
};

// Runs every arm in config order. A failing arm is recorded with its stage
// and the remaining arms still run. Every random choice derives from
// master_seed, so equal configs give equal reports.
inline AuditRun RunAudit(const AuditConfig& cfg) {
  using namespace audit_internal;
  cfg.Validate();
  AuditRun run;
  AuditReport& report = run.report;
  report.config_sha256 = cfg.config_sha256;
  report.master_seed = cfg.master_seed;
  report.revealed = cfg.reveal;
  if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch) {
    report.generated_at = IsoTimestamp(std::strtoll(epoch, nullptr, 10));
  }

  const Corpus real = IngestJsonl(cfg.real_corpus);
  const CorpusSplit split =
      RestrictAndSplit(real, cfg.top_n, cfg.split_ratios, DeriveSeed(cfg.master_seed, 1));
  if (split.test.empty()) throw Error("split", "the test split is empty");
  report.real_documents = real.size();
  report.train_documents = split.train.size();
  report.dev_documents = split.dev.size();
  report.test_documents = split.test.size();
  const std::vector<std::string> labels = split.train.label_space();
  report.label_space = labels;

  const std::vector<SeedRun> baseline = RunUtilitySeeds(split.train, split.test, cfg, labels);
  report.baseline_utility = SummarizeUtility(baseline);
  report.baseline_fairness = RunFairness(split.test, baseline, labels, cfg.fairness);
  if (cfg.canary.enabled) {
    for (const CanarySpec& spec : cfg.canary.specs) {
      report.canaries.push_back({std::string(CanaryKindName(spec.kind)), spec.template_text,
                                 cfg.reveal ? spec.secret : std::string(kMaskedSecret)});
    }
  }

  const EntityIndex real_index = BuildEntityIndex(split.train, cfg.jobs);
  const CodeSetDistribution code_dist = CodeSetDistributionOf(split.train);
  const std::size_t num_documents =
      cfg.num_documents > 0 ? cfg.num_documents : split.train.size();

  for (const ArmConfig& arm_cfg : cfg.arms) {
    const PrivacyArm& arm = arm_cfg.arm;
    ArmReport a;
    a.tag = arm.tag;
    a.source = arm_cfg.synthetic_corpus ? "file" : "generated";
    if (!arm_cfg.synthetic_corpus) {
      a.epsilon = arm.epsilon;
      if (arm.private_release()) {
        a.delta = arm.delta;
        a.clip = arm.clip;
      }
    } else if (arm_cfg.arm.private_release()) {
      a.epsilon = arm.epsilon;
    }
    std::string stage = "fit";
    try {
      Corpus synth;
      if (arm_cfg.synthetic_corpus) {
        stage = "ingest";
        synth = IngestJsonl(*arm_cfg.synthetic_corpus);
      } else {
        const GenModel model =
            FitArm(split.train, cfg.ngram, arm, DeriveSeed(cfg.master_seed, 10));
        if (model.dp()) a.sigma = model.dp()->sigma;
        stage = "generate";
        SamplerConfig sampler = cfg.sampler;
        sampler.seed = DeriveSeed(cfg.master_seed, 20);
        synth = GenerateCorpus(model, num_documents, code_dist, sampler, cfg.jobs);
        run.synthetic[arm.tag] = synth;
      }
      a.synthetic_documents = synth.size();

      stage = "leakage";
      const LeakageReport leak = ScanLeakage(split.train, real_index, synth,
                                             cfg.leakage.w_min, cfg.leakage.w_max, cfg.jobs);
      LeakageSection l;
      l.rates = leak.entities.rates;
      l.overall_rate = leak.entities.overall_rate;
      l.phrases = leak.phrases;
      l.max_real_frequency = cfg.leakage.max_real_frequency;
      for (const EntityLeak& e : TopEntities(leak.entities, cfg.leakage.top_entities)) {
        l.top_entities.push_back(ToEntityRow(e, cfg.reveal));
      }
      for (const EntityLeak& e :
           TopEntities(leak.entities, std::numeric_limits<std::size_t>::max(),
                       cfg.leakage.max_real_frequency)) {
        l.scatter.push_back(ToEntityRow(e, cfg.reveal));
      }
      a.leakage = std::move(l);

      stage = "utility";
      const std::vector<SeedRun> runs = RunUtilitySeeds(synth, split.test, cfg, labels);
      UtilitySection u = SummarizeUtility(runs);
      u.delta = DeltaOf(u, report.baseline_utility);
      a.utility = std::move(u);

      stage = "fairness";
      a.fairness = RunFairness(split.test, runs, labels, cfg.fairness);

      if (cfg.canary.enabled && !arm_cfg.synthetic_corpus) {
        stage = "canary";
        for (std::size_t i = 0; i < cfg.canary.specs.size(); ++i) {
          for (int reps : cfg.canary.repetitions) {
            CanarySpec spec = cfg.canary.specs[i];
            spec.repetitions = reps;
            const CanaryResult r =
                RunCanaryTrial(split.train, spec, cfg.ngram, arm, cfg.canary.num_candidates,
                               DeriveSeed(cfg.master_seed, 30, i), cfg.jobs);
            a.canary.push_back({std::string(CanaryKindName(r.kind)), r.repetitions,
                                arm.epsilon, r.rank, r.perplexity, r.num_candidates});
          }
        }
      }
    } catch (const Error& e) {
      a.failure = ArmFailure{e.stage(), e.what()};
    } catch (const std::exception& e) {
      a.failure = ArmFailure{stage, e.what()};
    }
    report.arms.push_back(std::move(a));
  }
  return run;
}

// Writes report.json, report.md, csv/*.csv and arms/<tag>/synthetic.jsonl.
inline std::vector<std::filesystem::path> WriteAuditOutputs(const AuditRun& run,
                                                            const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  for (ReportFormat f : {ReportFormat::kJson, ReportFormat::kMarkdown, ReportFormat::kCsvBundle}) {
    for (auto& p : RenderReport(run.report, f, dir)) written.push_back(std::move(p));
  }
  for (const auto& [tag, corpus] : run.synthetic) {
    const std::filesystem::path arm_dir = dir / "arms" / tag;
    report_internal::EnsureDirectory(arm_dir);
    written.push_back(arm_dir / "synthetic.jsonl");
    WriteJsonl(corpus, written.back().string());
  }
  return written;
}

}  // namespace synthaudit
