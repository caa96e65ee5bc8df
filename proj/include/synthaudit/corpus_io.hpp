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

#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"

namespace synthaudit {

// Reads one document per line. Blank lines are skipped but still count
// towards the line numbers used for auto-assigned ids and diagnostics.
inline Corpus ParseJsonl(std::istream& in, const std::string& source = "<input>") {
  std::vector<Document> documents;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source + ":" + std::to_string(line_number);
    nlohmann::json row;
    try {
      row = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw Error("ingest", where + ": malformed JSON: " + e.what());
    }
    try {
      if (!row.is_object()) throw Error("ingest", where + ": expected an object");
      if (!row.contains("text") || !row["text"].is_string()) {
        throw Error("ingest", where + ": missing string field \"text\"");
      }
      Document doc;
      doc.text = row["text"].get<std::string>();
      doc.id = row.contains("id") && !row["id"].is_null()
                   ? row["id"].get<std::string>()
                   : "doc-" + std::to_string(line_number);
      if (row.contains("codes")) {
        doc.codes = row["codes"].get<std::vector<std::string>>();
      }
      if (row.contains("attrs")) {
        doc.attrs = row["attrs"].get<std::map<std::string, std::string>>();
      }
      if (row.contains("entities")) {
        for (const auto& e : row["entities"]) {
          EntitySpan span;
          span.start = e.at("start").get<std::size_t>();
          span.end = e.at("end").get<std::size_t>();
          span.category = e.at("category").get<std::string>();
          if (e.contains("surface")) span.surface = e["surface"].get<std::string>();
          doc.entities.push_back(std::move(span));
        }
      }
      documents.push_back(std::move(doc));
    } catch (const nlohmann::json::exception& e) {
      throw Error("ingest", where + ": " + e.what());
    }
  }
  return Corpus(std::move(documents));
}

inline Corpus IngestJsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("ingest", "cannot open '" + path + "'");
  return ParseJsonl(in, path);
}

inline nlohmann::ordered_json DocumentToJson(const Document& doc) {
  nlohmann::ordered_json row;
  row["id"] = doc.id;
  row["text"] = doc.text;
  row["codes"] = doc.codes;
  if (!doc.attrs.empty()) row["attrs"] = doc.attrs;
  if (!doc.entities.empty()) {
    nlohmann::ordered_json entities = nlohmann::ordered_json::array();
    for (const EntitySpan& span : doc.entities) {
      nlohmann::ordered_json entity;
      entity["start"] = span.start;
      entity["end"] = span.end;
      entity["category"] = span.category;
      entities.push_back(std::move(entity));
    }
    row["entities"] = std::move(entities);
  }
  return row;
}

inline void WriteJsonl(const Corpus& corpus, std::ostream& out) {
  for (const Document& doc : corpus.documents()) {
    out << DocumentToJson(doc).dump() << '\n';
  }
}

inline void WriteJsonl(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("ingest", "cannot write '" + path + "'");
  WriteJsonl(corpus, out);
}

// {num_docs, label_space, code_set_distribution, attr_space}
inline nlohmann::ordered_json CorpusSummary(const Corpus& corpus) {
  nlohmann::ordered_json summary;
  summary["num_docs"] = corpus.size();
  summary["label_space"] = corpus.label_space();
  nlohmann::ordered_json dist = nlohmann::ordered_json::array();
  if (!corpus.empty()) {
    const CodeSetDistribution distribution = CodeSetDistributionOf(corpus);
    for (const auto& [codes, p] : distribution.entries()) {
      nlohmann::ordered_json entry;
      entry["codes"] = codes;
      entry["probability"] = p;
      dist.push_back(std::move(entry));
    }
  }
  summary["code_set_distribution"] = std::move(dist);
  summary["attr_space"] = corpus.attr_space();
  return summary;
}

}  // namespace synthaudit
