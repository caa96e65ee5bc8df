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
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/generator.hpp"

namespace synthaudit {

inline constexpr int kGenModelFormatVersion = 1;

// JSON has no infinity; an unbounded epsilon is written as the string "inf".
inline nlohmann::ordered_json EpsilonToJson(double epsilon) {
  if (std::isinf(epsilon)) return "inf";
  return epsilon;
}

inline double EpsilonFromJson(const nlohmann::json& value) {
  if (value.is_null()) return std::numeric_limits<double>::infinity();
  if (value.is_string()) {
    const auto s = value.get<std::string>();
    if (s == "inf" || s == "infinity") return std::numeric_limits<double>::infinity();
    throw Error("config", "epsilon must be a number or \"inf\", got '" + s + "'");
  }
  return value.get<double>();
}

inline nlohmann::ordered_json GenModelToJson(const GenModel& model) {
  nlohmann::ordered_json out;
  out["format"] = "synthaudit-genmodel";
  out["version"] = kGenModelFormatVersion;
  out["order"] = model.order();
  out["smoothing_k"] = model.smoothing_k();
  out["backoff_alpha"] = model.backoff_alpha();
  out["vocab"] = model.vocab();
  if (model.dp()) {
    const DpParams& dp = *model.dp();
    out["dp"] = {{"epsilon", EpsilonToJson(dp.epsilon)},
                 {"delta", dp.delta},
                 {"clip", dp.clip},
                 {"sigma", dp.sigma},
                 {"noise_seed", model.noise_seed()}};
  } else {
    out["dp"] = nullptr;
  }
  std::vector<const Context*> contexts;
  contexts.reserve(model.counts().size());
  for (const auto& entry : model.counts()) contexts.push_back(&entry.first);
  std::sort(contexts.begin(), contexts.end(),
            [](const Context* a, const Context* b) { return *a < *b; });
  auto& rows = out["contexts"] = nlohmann::ordered_json::array();
  for (const Context* context : contexts) {
    const CountRow& row = model.counts().at(*context);
    nlohmann::ordered_json entries = nlohmann::ordered_json::array();
    for (const auto& [token, count] : row.entries) entries.push_back({token, count});
    rows.push_back({{"context", *context}, {"total", row.total}, {"counts", entries}});
  }
  return out;
}

inline GenModel GenModelFromJson(const nlohmann::json& in) {
  try {
    if (in.value("format", "") != "synthaudit-genmodel") {
      throw Error("fit", "not a synthaudit model artifact");
    }
    if (in.at("version").get<int>() != kGenModelFormatVersion) {
      throw Error("fit", "unsupported model format version " +
                             in.at("version").dump());
    }
    NgramOptions options;
    options.order = in.at("order").get<int>();
    options.smoothing_k = in.at("smoothing_k").get<double>();
    options.backoff_alpha = in.at("backoff_alpha").get<double>();
    std::optional<DpParams> dp;
    std::uint64_t noise_seed = 0;
    if (!in.at("dp").is_null()) {
      const auto& d = in["dp"];
      dp = DpParams{EpsilonFromJson(d.at("epsilon")), d.at("delta").get<double>(),
                    d.at("clip").get<double>(), d.at("sigma").get<double>()};
      noise_seed = d.at("noise_seed").get<std::uint64_t>();
    }
    CountTable counts;
    for (const auto& row : in.at("contexts")) {
      CountRow out;
      out.total = row.at("total").get<double>();
      for (const auto& entry : row.at("counts")) {
        out.entries.emplace_back(entry.at(0).get<TokenId>(), entry.at(1).get<double>());
      }
      counts.emplace(row.at("context").get<Context>(), std::move(out));
    }
    return GenModel(options, in.at("vocab").get<std::vector<std::string>>(),
                    std::move(counts), dp, noise_seed);
  } catch (const nlohmann::json::exception& e) {
    throw Error("fit", std::string("malformed model artifact: ") + e.what());
  }
}

inline void SaveGenModel(const GenModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("fit", "cannot write '" + path + "'");
  out << GenModelToJson(model).dump() << '\n';
}

inline GenModel LoadGenModel(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("fit", "cannot open '" + path + "'");
  try {
    return GenModelFromJson(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("fit", "'" + path + "': " + e.what());
  }
}

}  // namespace synthaudit
