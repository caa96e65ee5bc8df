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

// Command-line front end. Every subcommand prints JSON to stdout, or writes
// it under --out when that flag is given. Failures exit nonzero with a
// "[stage]" tag.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "synthaudit/audit.hpp"
#include "synthaudit/canary.hpp"
#include "synthaudit/corpus_io.hpp"
#include "synthaudit/fairness.hpp"
#include "synthaudit/generator.hpp"
#include "synthaudit/generator_io.hpp"
#include "synthaudit/leakage.hpp"
#include "synthaudit/report.hpp"
#include "synthaudit/toy.hpp"
#include "synthaudit/utility.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace synthaudit;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool reveal = false;
  std::optional<std::size_t> jobs;
};

// Config values apply to every subcommand; the global flags override them.
AuditConfig Settings(const Globals& g) {
  AuditConfig cfg = g.config.empty() ? AuditConfig{} : LoadAuditConfig(g.config);
  if (g.seed) cfg.master_seed = *g.seed;
  if (g.jobs) cfg.jobs = *g.jobs;
  cfg.reveal = cfg.reveal || g.reveal;
  return cfg;
}

void Emit(const Globals& g, const std::string& name, const ordered_json& value) {
  if (!g.out) {
    std::cout << value.dump(2) << '\n';
    return;
  }
  report_internal::EnsureDirectory(*g.out);
  const fs::path path = fs::path(*g.out) / (name + ".json");
  report_internal::WriteFile(path, value.dump(2) + "\n");
  std::cerr << "wrote " << path.string() << '\n';
}

fs::path OutputPath(const Globals& g, const std::string& explicit_path,
                    const std::string& default_name) {
  if (!explicit_path.empty()) return explicit_path;
  const fs::path dir = g.out ? fs::path(*g.out) : fs::path(".");
  report_internal::EnsureDirectory(dir);
  return dir / default_name;
}

PrivacyArm ArmFromFlags(const std::string& epsilon, double delta, double clip) {
  PrivacyArm arm;
  arm.epsilon = EpsilonFromJson(epsilon == "inf" ? nlohmann::json("inf")
                                                 : nlohmann::json(std::stod(epsilon)));
  arm.delta = delta;
  arm.clip = clip;
  arm.tag = audit_internal::DefaultTag(arm.epsilon);
  return arm;
}

ordered_json RatesJson(const Rates& r) {
  auto opt = [](const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
  };
  return {{"tpr", opt(r.tpr)}, {"fpr", opt(r.fpr)}, {"tnr", opt(r.tnr)}, {"fnr", opt(r.fnr)}};
}

ordered_json MetricsJson(const EvalMetrics& m) {
  ordered_json out;
  out["num_docs"] = m.num_docs;
  out["micro_f1"] = m.micro_f1;
  out["macro_f1"] = m.macro_f1;
  out["subset_accuracy"] = m.subset_accuracy;
  out["accuracy"] = m.accuracy;
  ordered_json per_label = ordered_json::array();
  for (std::size_t j = 0; j < m.labels.size(); ++j) {
    const Confusion& c = m.confusion[j];
    per_label.push_back({{"label", m.labels[j]}, {"tp", c.tp}, {"fp", c.fp},
                         {"fn", c.fn}, {"tn", c.tn}, {"f1", F1(c)}});
  }
  out["per_label"] = std::move(per_label);
  return out;
}

LinearClassifier TrainFromSettings(const Corpus& train, const AuditConfig& cfg,
                                   std::optional<std::vector<std::string>> labels) {
  TrainOptions options = cfg.utility.train;
  options.seed = DeriveSeed(cfg.master_seed, 40, 0);
  options.label_space = std::move(labels);
  return cfg.utility.dp_sgd ? TrainClassifierDpSgd(train, options, *cfg.utility.dp_sgd)
                            : TrainClassifier(train, options);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy, utility and fairness audit for synthetic clinical text"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_version_flag("--version", std::string(kToolVersion));

  Globals g;
  app.add_option("--config", g.config, "JSON audit config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "master seed (overrides the config)");
  app.add_option("--out", g.out, "output directory (overrides SYNTHAUDIT_OUT and the config)");
  app.add_flag("--reveal", g.reveal, "show entity surfaces and canary secrets in reports");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

  // ingest
  std::string ingest_input;
  bool ingest_split = false;
  auto* ingest = app.add_subcommand("ingest", "validate a JSONL corpus and summarize it");
  ingest->add_option("input", ingest_input, "corpus JSONL")->required();
  ingest->add_flag("--split", ingest_split,
                   "also write train/dev/test JSONL using the config split settings");

  // fit
  std::string fit_train, fit_model, fit_epsilon = "inf";
  double fit_delta = 1e-5, fit_clip = 1.0;
  auto* fit = app.add_subcommand("fit", "fit the n-gram generator, optionally with DP");
  fit->add_option("--train", fit_train, "training corpus JSONL")->required();
  fit->add_option("--epsilon", fit_epsilon, "privacy budget, or inf");
  fit->add_option("--delta", fit_delta, "DP delta");
  fit->add_option("--clip", fit_clip, "per-document contribution bound");
  fit->add_option("--model", fit_model, "model output path (default <out>/model.json)");

  // generate
  std::string gen_model, gen_codes, gen_output;
  std::size_t gen_n = 0;
  auto* generate = app.add_subcommand("generate", "sample a synthetic corpus from a model");
  generate->add_option("--model", gen_model, "model JSON from `fit`")->required();
  generate->add_option("--codes-from", gen_codes, "corpus whose code sets are resampled")
      ->required();
  generate->add_option("-n,--num-documents", gen_n, "documents to sample (default: as many as --codes-from)");
  generate->add_option("--output", gen_output, "output JSONL (default <out>/synthetic.jsonl)");

  // canary
  std::string can_train, can_epsilon = "inf";
  double can_delta = 1e-5, can_clip = 1.0;
  std::vector<std::string> can_kinds;
  std::vector<int> can_reps = {0, 1, 10, 100};
  std::size_t can_candidates = 1000;
  auto* canary = app.add_subcommand("canary", "inject canaries, refit and rank them");
  canary->add_option("--train", can_train, "training corpus JSONL")->required();
  canary->add_option("--epsilon", can_epsilon, "privacy budget, or inf");
  canary->add_option("--delta", can_delta, "DP delta");
  canary->add_option("--clip", can_clip, "per-document contribution bound");
  canary->add_option("--kind", can_kinds, "canary kinds (name, address, number, email)");
  canary->add_option("--repetitions", can_reps, "insertion counts")->delimiter(',');
  canary->add_option("--candidates", can_candidates, "decoys per canary");

  // leakage
  std::string leak_real, leak_synth;
  std::size_t leak_top = 8;
  auto* leakage = app.add_subcommand("leakage", "entity leakage and phrase overlap");
  leakage->add_option("--real", leak_real, "real corpus JSONL with entity spans")->required();
  leakage->add_option("--synth", leak_synth, "synthetic corpus JSONL")->required();
  leakage->add_option("--top", leak_top, "most frequent entities to list");

  // utility
  std::string util_train, util_test;
  auto* utility = app.add_subcommand("utility", "train on one corpus, evaluate on another");
  utility->add_option("--train", util_train, "training corpus JSONL")->required();
  utility->add_option("--test", util_test, "test corpus JSONL")->required();

  // fairness
  std::string fair_train, fair_test;
  std::vector<std::string> fair_attrs;
  auto* fairness = app.add_subcommand("fairness", "subgroup equality differences and equalized odds");
  fairness->add_option("--train", fair_train, "training corpus JSONL")->required();
  fairness->add_option("--test", fair_test, "test corpus JSONL with attributes")->required();
  fairness->add_option("--attribute", fair_attrs, "document attribute(s) to group by");

  // audit
  app.add_subcommand("audit", "run the full pipeline from --config");

  // report
  std::string rep_input, rep_format = "markdown";
  auto* report = app.add_subcommand("report", "render a report.json");
  report->add_option("--input", rep_input, "report.json from `audit`")->required();
  report->add_option("--format", rep_format, "json, csv or markdown");

  // toy
  ToyOptions toy_opts;
  std::string toy_output;
  auto* toy = app.add_subcommand("toy", "write the planted-PII toy corpus");
  toy->add_option("--num-docs", toy_opts.num_docs, "documents");
  toy->add_option("--names", toy_opts.num_names, "planted patient names");
  toy->add_option("--label-noise", toy_opts.label_noise, "keyword/label mismatch rate");
  toy->add_option("--second-code-rate", toy_opts.second_code_rate, "share with two codes");
  toy->add_option("--output", toy_output, "output JSONL (default <out>/toy.jsonl)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const AuditConfig cfg = Settings(g);

    if (command == "ingest") {
      const Corpus corpus = IngestJsonl(ingest_input);
      ordered_json summary = CorpusSummary(corpus);
      if (ingest_split) {
        const CorpusSplit split = RestrictAndSplit(corpus, cfg.top_n, cfg.split_ratios,
                                                   DeriveSeed(cfg.master_seed, 1));
        WriteJsonl(split.train, OutputPath(g, "", "train.jsonl").string());
        WriteJsonl(split.dev, OutputPath(g, "", "dev.jsonl").string());
        WriteJsonl(split.test, OutputPath(g, "", "test.jsonl").string());
        summary["split"] = {{"train", split.train.size()}, {"dev", split.dev.size()},
                            {"test", split.test.size()}};
      }
      Emit(g, "summary", summary);

    } else if (command == "fit") {
      const Corpus train = IngestJsonl(fit_train);
      const PrivacyArm arm = ArmFromFlags(fit_epsilon, fit_delta, fit_clip);
      const GenModel model = FitArm(train, cfg.ngram, arm, DeriveSeed(cfg.master_seed, 10));
      const fs::path path = OutputPath(g, fit_model, "model.json");
      SaveGenModel(model, path.string());
      std::cerr << "wrote " << path.string() << '\n';

    } else if (command == "generate") {
      const GenModel model = LoadGenModel(gen_model);
      const Corpus codes = IngestJsonl(gen_codes);
      SamplerConfig sampler = cfg.sampler;
      sampler.seed = DeriveSeed(cfg.master_seed, 20);
      const Corpus synth = GenerateCorpus(model, gen_n > 0 ? gen_n : codes.size(),
                                          CodeSetDistributionOf(codes), sampler, cfg.jobs);
      const fs::path path = OutputPath(g, gen_output, "synthetic.jsonl");
      WriteJsonl(synth, path.string());
      std::cerr << "wrote " << path.string() << '\n';

    } else if (command == "canary") {
      const Corpus train = IngestJsonl(can_train);
      const PrivacyArm arm = ArmFromFlags(can_epsilon, can_delta, can_clip);
      std::vector<CanarySpec> specs;
      for (const CanarySpec& spec : cfg.canary.specs) {
        bool wanted = can_kinds.empty();
        for (const std::string& k : can_kinds) wanted = wanted || ParseCanaryKind(k) == spec.kind;
        if (wanted) specs.push_back(spec);
      }
      ordered_json rows = ordered_json::array();
      for (std::size_t i = 0; i < specs.size(); ++i) {
        for (int reps : can_reps) {
          CanarySpec spec = specs[i];
          spec.repetitions = reps;
          const CanaryResult r = RunCanaryTrial(train, spec, cfg.ngram, arm, can_candidates,
                                                DeriveSeed(cfg.master_seed, 30, i), cfg.jobs);
          rows.push_back({{"kind", CanaryKindName(r.kind)}, {"repetitions", r.repetitions},
                          {"epsilon", EpsilonToJson(arm.epsilon)}, {"rank", r.rank},
                          {"perplexity", r.perplexity}, {"num_candidates", r.num_candidates}});
        }
      }
      Emit(g, "canary", rows);

    } else if (command == "leakage") {
      const Corpus real = IngestJsonl(leak_real);
      const Corpus synth = IngestJsonl(leak_synth);
      const EntityIndex index = BuildEntityIndex(real, cfg.jobs);
      const LeakageReport r = ScanLeakage(real, index, synth, cfg.leakage.w_min,
                                          cfg.leakage.w_max, cfg.jobs);
      ordered_json out;
      out["rates"] = r.entities.rates;
      out["overall_rate"] =
          r.entities.overall_rate ? ordered_json(*r.entities.overall_rate) : ordered_json(nullptr);
      out["phrase_overlap"] = {{"overlap_count", r.phrases.overlap_count},
                               {"total_phrases_union", r.phrases.total_phrases_union},
                               {"ratio", r.phrases.ratio},
                               {"real_phrases", r.phrases.real_phrases},
                               {"synth_phrases", r.phrases.synth_phrases}};
      ordered_json top = ordered_json::array();
      for (const EntityLeak& e : TopEntities(r.entities, leak_top)) {
        top.push_back({{"surface", RedactSurface(e.key.Surface(), cfg.reveal)},
                       {"category", e.key.category},
                       {"real_count", e.real_count},
                       {"synth_count", e.synth_count}});
      }
      out["top_entities"] = std::move(top);
      Emit(g, "leakage", out);

    } else if (command == "utility") {
      const Corpus train = IngestJsonl(util_train);
      const Corpus test = IngestJsonl(util_test);
      const LinearClassifier model = TrainFromSettings(train, cfg, std::nullopt);
      ordered_json out = MetricsJson(Evaluate(model, test, cfg.jobs));
      out["warnings"] = model.warnings();
      Emit(g, "utility", out);

    } else if (command == "fairness") {
      const Corpus train = IngestJsonl(fair_train);
      const Corpus test = IngestJsonl(fair_test);
      const std::vector<std::string> attrs =
          fair_attrs.empty() ? cfg.fairness.attributes : fair_attrs;
      if (attrs.empty()) throw Error("fairness", "no attribute given (--attribute)");
      const LinearClassifier model = TrainFromSettings(train, cfg, std::nullopt);
      const std::vector<CodeSet> predicted = PredictLabels(model, test, cfg.jobs);
      ordered_json out = ordered_json::array();
      for (const std::string& attribute : attrs) {
        const FairnessReport r = AssessFairness(test, predicted, model.labels(), attribute,
                                                cfg.fairness.min_support, cfg.fairness.pooling);
        ordered_json row;
        row["attribute"] = r.attribute;
        row["pooling"] = PoolingName(r.pooling);
        row["FNED"] = r.differences.fned;
        row["FPED"] = r.differences.fped;
        row["TPED"] = r.differences.tped;
        row["TNED"] = r.differences.tned;
        row["EO"] = r.equalized_odds ? ordered_json(*r.equalized_odds) : ordered_json(nullptr);
        row["overall"] = RatesJson(r.rates.overall);
        ordered_json groups = ordered_json::object();
        for (const GroupRates& gr : r.rates.groups) {
          groups[gr.group] = RatesJson(gr.rates);
          groups[gr.group]["support"] = gr.support;
        }
        row["subgroups"] = std::move(groups);
        row["excluded"] = r.excluded;
        out.push_back(std::move(row));
      }
      Emit(g, "fairness", out);

    } else if (command == "audit") {
      if (g.config.empty()) throw Error("config", "audit needs --config");
      const std::string dir = ResolveOutputDir(cfg, g.out);
      const AuditRun run = RunAudit(cfg);
      WriteAuditOutputs(run, dir);
      int failed = 0;
      for (const ArmReport& a : run.report.arms) {
        if (a.failure) {
          ++failed;
          std::cerr << "synthaudit: arm '" << a.tag << "' failed [" << a.failure->stage
                    << "]: " << a.failure->message << '\n';
        }
      }
      std::cerr << "wrote " << (fs::path(dir) / "report.json").string() << '\n';
      if (failed > 0) return kExitRuntime;

    } else if (command == "report") {
      const AuditReport r = LoadReport(rep_input);
      const fs::path dir = g.out ? fs::path(*g.out) : fs::path(rep_input).parent_path();
      for (const fs::path& p : RenderReport(r, ParseReportFormat(rep_format),
                                            dir.empty() ? fs::path(".") : dir)) {
        std::cerr << "wrote " << p.string() << '\n';
      }

    } else if (command == "toy") {
      toy_opts.seed = cfg.master_seed;
      const fs::path path = OutputPath(g, toy_output, "toy.jsonl");
      WriteJsonl(MakeToyCorpus(toy_opts), path.string());
      std::cerr << "wrote " << path.string() << '\n';
    }
  } catch (const Error& e) {
    std::cerr << "synthaudit: error [" << e.stage() << "]: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "synthaudit: error [" << command << "]: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
