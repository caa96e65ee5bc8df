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
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "synthaudit/canary.hpp"
#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/random.hpp"

namespace synthaudit {

// Synthetic clinical-style corpus for demos and statistical tests. Each
// document carries diagnosis codes whose keywords appear in the text, one of
// `num_names` planted patients (name, phone, address and email annotated as
// entities, patient popularity roughly Zipfian) and gender/race attributes.
struct ToyOptions {
  std::size_t num_docs = 500;
  std::size_t num_names = 20;
  // Probability that a document's keywords come from a random other code.
  double label_noise = 0.0;
  // Probability of a second diagnosis code.
  double second_code_rate = 0.0;
  std::uint64_t seed = 0;
};

namespace toy_internal {

struct Diagnosis {
  std::string_view code;
  double weight;
  std::array<std::string_view, 6> keywords;
};

inline constexpr std::array<Diagnosis, 4> kDiagnoses = {{
    {"401.9", 0.4,
     {"hypertension", "amlodipine", "lisinopril", "systolic", "headache", "pressure"}},
    {"428.0", 0.3,
     {"edema", "furosemide", "ejection", "orthopnea", "dyspnea", "cardiomegaly"}},
    {"250.00", 0.2,
     {"glucose", "insulin", "metformin", "hyperglycemia", "polyuria", "a1c"}},
    {"584.9", 0.1,
     {"creatinine", "oliguria", "dialysis", "nephrology", "potassium", "uremia"}},
}};

inline constexpr std::array<std::string_view, 10> kFillers = {
    "Vital signs were stable overnight.",
    "The patient tolerated a regular diet.",
    "Plan to continue current medications.",
    "No acute distress on exam.",
    "Follow up with primary care in two weeks.",
    "Labs were reviewed with the team.",
    "Pain is well controlled on the current regimen.",
    "Physical therapy evaluated the patient today.",
    "Family was updated at the bedside.",
    "Discharge planning is in progress.",
};

struct Patient {
  std::string name;
  std::string phone;
  std::string address;
  std::string email;
};

class Builder {
 public:
  void Add(std::string_view text) { text_ += text; }

  void AddEntity(std::string_view surface, std::string_view category) {
    const std::size_t start = text_.size();
    text_ += surface;
    spans_.push_back({start, text_.size(), std::string(category), ""});
  }

  Document Finish(std::string id) {
    Document doc;
    doc.id = std::move(id);
    doc.text = std::move(text_);
    doc.entities = std::move(spans_);
    return doc;
  }

 private:
  std::string text_;
  std::vector<EntitySpan> spans_;
};

inline std::size_t Weighted(Rng& rng, const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double u = rng.Uniform() * total;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    if (u < weights[i]) return i;
    u -= weights[i];
  }
  return weights.size() - 1;
}

inline std::string Digits(Rng& rng, std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out.push_back(static_cast<char>('0' + rng.Index(10)));
  return out;
}

}  // namespace toy_internal

inline std::vector<std::string> ToyCodes() {
  std::vector<std::string> out;
  for (const auto& d : toy_internal::kDiagnoses) out.emplace_back(d.code);
  return out;
}

inline Corpus MakeToyCorpus(const ToyOptions& options) {
  using namespace toy_internal;
  namespace lx = canary_lexicon;
  if (options.num_names == 0 || options.num_names > lx::kFirstNames.size()) {
    throw Error("toy", "num_names must be in [1, " +
                           std::to_string(lx::kFirstNames.size()) + "]");
  }
  Rng rng(options.seed);

  // Patients use distinct first and last names from the canary lexicon, so
  // canary decoys are partly in-vocabulary.
  std::vector<std::size_t> firsts(lx::kFirstNames.size());
  std::vector<std::size_t> lasts(lx::kLastNames.size());
  for (std::size_t i = 0; i < firsts.size(); ++i) firsts[i] = i;
  for (std::size_t i = 0; i < lasts.size(); ++i) lasts[i] = i;
  rng.Shuffle(firsts);
  rng.Shuffle(lasts);
  std::vector<Patient> patients;
  std::vector<double> popularity;
  for (std::size_t p = 0; p < options.num_names; ++p) {
    Patient patient;
    patient.name = std::string(lx::kFirstNames[firsts[p]]) + " " +
                   std::string(lx::kLastNames[lasts[p]]);
    patient.phone = "(" + Digits(rng, 3) + ") " + Digits(rng, 3) + "-" + Digits(rng, 4);
    patient.address = std::to_string(1 + rng.Index(9999)) + " " +
                      std::string(lx::kStreets[rng.Index(lx::kStreets.size())]) + " " +
                      std::string(lx::kStreetSuffixes[rng.Index(lx::kStreetSuffixes.size())]);
    patient.email = std::string(lx::kMailWords[rng.Index(lx::kMailWords.size())]) +
                    Digits(rng, 3) + "@" +
                    std::string(lx::kMailDomains[rng.Index(lx::kMailDomains.size())]) +
                    "." + std::string(lx::kTlds[rng.Index(lx::kTlds.size())]);
    patients.push_back(std::move(patient));
    popularity.push_back(1.0 / static_cast<double>(p + 1));
  }
  std::vector<double> code_weights;
  for (const auto& d : kDiagnoses) code_weights.push_back(d.weight);

  std::vector<Document> docs;
  docs.reserve(options.num_docs);
  for (std::size_t i = 0; i < options.num_docs; ++i) {
    const Patient& patient = patients[Weighted(rng, popularity)];
    std::vector<std::size_t> codes = {Weighted(rng, code_weights)};
    if (rng.Uniform() < options.second_code_rate) {
      const std::size_t extra = Weighted(rng, code_weights);
      if (extra != codes[0]) codes.push_back(extra);
    }
    const bool female = rng.Uniform() < 0.5;
    const std::array<std::string_view, 4> races = {"white", "black", "hispanic", "asian"};
    const std::string race(races[Weighted(rng, {0.5, 0.2, 0.2, 0.1})]);

    Builder b;
    b.AddEntity(patient.name, "name");
    b.Add(" is a " + std::to_string(25 + rng.Index(65)) + " year old " +
          (female ? "female" : "male") + " admitted with ");
    for (std::size_t c = 0; c < codes.size(); ++c) {
      std::size_t source = codes[c];
      if (rng.Uniform() < options.label_noise) source = rng.Index(kDiagnoses.size());
      const auto& kw = kDiagnoses[source].keywords;
      if (c > 0) b.Add(" and ");
      b.Add(std::string(kw[rng.Index(kw.size())]) + " and " +
            std::string(kw[rng.Index(kw.size())]));
    }
    b.Add(". ");
    const std::size_t fillers = 1 + rng.Index(3);
    for (std::size_t f = 0; f < fillers; ++f) {
      b.Add(std::string(kFillers[rng.Index(kFillers.size())]) + " ");
    }
    const double pii = rng.Uniform();
    if (pii < 0.3) {
      b.Add("Contact number ");
      b.AddEntity(patient.phone, "number");
      b.Add(".");
    } else if (pii < 0.55) {
      b.Add("Lives at ");
      b.AddEntity(patient.address, "address");
      b.Add(".");
    } else if (pii < 0.75) {
      b.Add("Reachable at ");
      b.AddEntity(patient.email, "email");
      b.Add(".");
    } else {
      b.Add("Seen again by ");
      b.AddEntity(patient.name, "name");
      b.Add(" today.");
    }
    Document doc = b.Finish("toy-" + std::to_string(i));
    for (std::size_t c : codes) doc.codes.emplace_back(kDiagnoses[c].code);
    doc.attrs["gender"] = female ? "F" : "M";
    doc.attrs["race"] = race;
    docs.push_back(std::move(doc));
  }
  return Corpus(std::move(docs));
}

}  // namespace synthaudit
