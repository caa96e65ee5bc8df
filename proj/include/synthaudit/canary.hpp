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
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/generator.hpp"
#include "synthaudit/parallel.hpp"
#include "synthaudit/random.hpp"

namespace synthaudit {

enum class CanaryKind { kName, kAddress, kNumber, kEmail };

inline std::string_view CanaryKindName(CanaryKind kind) {
  switch (kind) {
    case CanaryKind::kName: return "name";
    case CanaryKind::kAddress: return "address";
    case CanaryKind::kNumber: return "number";
    case CanaryKind::kEmail: return "email";
  }
  return "unknown";
}

inline CanaryKind ParseCanaryKind(std::string_view name) {
  for (CanaryKind kind : {CanaryKind::kName, CanaryKind::kAddress,
                          CanaryKind::kNumber, CanaryKind::kEmail}) {
    if (CanaryKindName(kind) == name) return kind;
  }
  throw Error("canary", "unknown canary kind '" + std::string(name) + "'");
}

inline constexpr std::string_view kSecretSlot = "{secret}";

struct CanarySpec {
  CanaryKind kind = CanaryKind::kName;
  std::string template_text;
  std::string secret;
  int repetitions = 0;

  void Validate() const {
    const auto first = template_text.find(kSecretSlot);
    if (first == std::string::npos ||
        template_text.find(kSecretSlot, first + 1) != std::string::npos) {
      throw Error("canary", "canary template must contain exactly one " +
                                std::string(kSecretSlot) + " slot");
    }
    if (secret.empty()) throw Error("canary", "canary secret is empty");
    if (repetitions < 0) throw Error("canary", "repetitions must be non-negative");
  }

  std::string Render(std::string_view filler) const {
    std::string out = template_text;
    out.replace(out.find(kSecretSlot), kSecretSlot.size(), filler);
    return out;
  }

  std::string Rendered() const { return Render(secret); }
};

// One canary per PII kind, phrased as clinical notes.
inline std::vector<CanarySpec> DefaultCanaries() {
  return {
      {CanaryKind::kName,
       "Patient {secret} was admitted to the ward and the chart was updated "
       "this morning.",
       "Dorian Vasquez", 0},
      {CanaryKind::kAddress,
       "The patient was discharged to a residence at {secret}.",
       "4127 Larkspur Ave", 0},
      {CanaryKind::kNumber,
       "The emergency contact number for the patient is {secret}.",
       "(503) 555-0147", 0},
      {CanaryKind::kEmail,
       "Questions about the discharge plan can be sent to {secret}.",
       "carecoord7731@medmail.org", 0},
  };
}

namespace canary_lexicon {

inline constexpr std::array<std::string_view, 130> kFirstNames = {
    "James", "Mary", "John", "Patricia", "Robert", "Jennifer", "Michael",
    "Linda", "William", "Elizabeth", "David", "Barbara", "Richard", "Susan",
    "Joseph", "Jessica", "Thomas", "Sarah", "Charles", "Karen", "Daniel",
    "Nancy", "Matthew", "Lisa", "Anthony", "Betty", "Mark", "Margaret",
    "Donald", "Sandra", "Steven", "Ashley", "Paul", "Kimberly", "Andrew",
    "Emily", "Joshua", "Donna", "Kenneth", "Michelle", "Kevin", "Dorothy",
    "Brian", "Carol", "George", "Amanda", "Edward", "Melissa", "Ronald",
    "Deborah", "Timothy", "Stephanie", "Jason", "Rebecca", "Jeffrey", "Sharon",
    "Ryan", "Laura", "Jacob", "Cynthia", "Gary", "Kathleen", "Nicholas", "Amy",
    "Eric", "Shirley", "Jonathan", "Angela", "Stephen", "Helen", "Larry",
    "Anna", "Justin", "Brenda", "Scott", "Pamela", "Brandon", "Nicole",
    "Benjamin", "Emma", "Samuel", "Samantha", "Gregory", "Katherine",
    "Frank", "Christine", "Alexander", "Debra", "Raymond", "Rachel",
    "Patrick", "Catherine", "Jack", "Carolyn", "Dennis", "Janet", "Jerry",
    "Ruth", "Tyler", "Maria", "Aaron", "Heather", "Jose", "Diane", "Adam",
    "Virginia", "Henry", "Julie", "Nathan", "Joyce", "Douglas", "Victoria",
    "Zachary", "Olivia", "Peter", "Kelly", "Kyle", "Christina", "Walter",
    "Lauren", "Ethan", "Joan", "Jeremy", "Evelyn", "Harold", "Judith",
    "Keith", "Megan", "Christian", "Cheryl"};

inline constexpr std::array<std::string_view, 130> kLastNames = {
    "Smith", "Johnson", "Williams", "Brown", "Jones", "Garcia", "Miller",
    "Davis", "Rodriguez", "Martinez", "Hernandez", "Lopez", "Gonzalez",
    "Wilson", "Anderson", "Thomas", "Taylor", "Moore", "Jackson", "Martin",
    "Lee", "Perez", "Thompson", "White", "Harris", "Sanchez", "Clark",
    "Ramirez", "Lewis", "Robinson", "Walker", "Young", "Allen", "King",
    "Wright", "Scott", "Torres", "Nguyen", "Hill", "Flores", "Green", "Adams",
    "Nelson", "Baker", "Hall", "Rivera", "Campbell", "Mitchell", "Carter",
    "Roberts", "Gomez", "Phillips", "Evans", "Turner", "Diaz", "Parker",
    "Cruz", "Edwards", "Collins", "Reyes", "Stewart", "Morris", "Morales",
    "Murphy", "Cook", "Rogers", "Gutierrez", "Ortiz", "Morgan", "Cooper",
    "Peterson", "Bailey", "Reed", "Kelly", "Howard", "Ramos", "Kim", "Cox",
    "Ward", "Richardson", "Watson", "Brooks", "Chavez", "Wood", "James",
    "Bennett", "Gray", "Mendoza", "Ruiz", "Hughes", "Price", "Alvarez",
    "Castillo", "Sanders", "Patel", "Myers", "Long", "Ross", "Foster",
    "Jimenez", "Powell", "Jenkins", "Perry", "Russell", "Sullivan", "Bell",
    "Coleman", "Butler", "Henderson", "Barnes", "Gonzales", "Fisher",
    "Vasquez", "Simmons", "Romero", "Jordan", "Patterson", "Alexander",
    "Hamilton", "Graham", "Reynolds", "Griffin", "Wallace", "Moreno", "West",
    "Cole", "Hayes", "Bryant", "Herrera", "Gibson"};

inline constexpr std::array<std::string_view, 48> kStreets = {
    "Oak", "Maple", "Cedar", "Pine", "Elm", "Birch", "Willow", "Aspen",
    "Spruce", "Hickory", "Walnut", "Chestnut", "Magnolia", "Juniper",
    "Sycamore", "Poplar", "Laurel", "Hawthorn", "Meadow", "Ridge", "Lake",
    "River", "Hill", "Valley", "Forest", "Park", "Sunset", "Highland",
    "Mill", "Church", "Main", "Washington", "Lincoln", "Jefferson", "Madison",
    "Franklin", "Jackson", "Adams", "Center", "Spring", "Prospect", "Union",
    "Market", "Bridge", "Harbor", "Orchard", "Summit", "Garden"};

inline constexpr std::array<std::string_view, 8> kStreetSuffixes = {
    "St", "Ave", "Rd", "Blvd", "Ln", "Dr", "Ct", "Way"};

inline constexpr std::array<std::string_view, 40> kMailWords = {
    "care", "health", "clinic", "patient", "nurse", "family", "contact",
    "office", "info", "help", "desk", "team", "admin", "records", "support",
    "intake", "ward", "unit", "case", "service", "social", "visit", "home",
    "staff", "portal", "reply", "notes", "triage", "rehab", "pharm",
    "labs", "billing", "front", "main", "north", "south", "east", "west",
    "central", "mail"};

inline constexpr std::array<std::string_view, 16> kMailDomains = {
    "mail", "inbox", "post", "webmail", "medmail", "carenet", "healthbox",
    "netmail", "fastmail", "homemail", "citymail", "clinicmail", "docmail",
    "pmail", "umail", "xmail"};

inline constexpr std::array<std::string_view, 6> kTlds = {"com", "org", "net",
                                                          "edu", "us", "info"};

}  // namespace canary_lexicon

namespace canary_internal {

// A filler grammar is a mixed-radix space: every slot picks one of `radix`
// alternatives and `render` turns the choice vector into a filler string.
class FillerGrammar {
 public:
  FillerGrammar(CanaryKind kind, const std::string& secret) : kind_(kind) {
    namespace lx = canary_lexicon;
    switch (kind) {
      case CanaryKind::kName:
        radices_ = {lx::kFirstNames.size(), lx::kLastNames.size()};
        break;
      case CanaryKind::kAddress:
        radices_ = {9999, lx::kStreets.size(), lx::kStreetSuffixes.size()};
        break;
      case CanaryKind::kEmail:
        radices_ = {lx::kMailWords.size(), 10000, lx::kMailDomains.size(),
                    lx::kTlds.size()};
        break;
      case CanaryKind::kNumber:
        // Digits are resampled in place; every other character of the secret
        // is kept, so candidates share its digit-group pattern.
        pattern_ = secret;
        for (char c : secret) {
          if (c >= '0' && c <= '9') radices_.push_back(10);
        }
        if (radices_.empty()) {
          throw Error("canary", "number canary secret contains no digits");
        }
        break;
    }
  }

  // Number of distinct fillers, saturating at SIZE_MAX.
  std::size_t Capacity() const {
    std::size_t capacity = 1;
    for (std::size_t r : radices_) {
      if (capacity > std::numeric_limits<std::size_t>::max() / r) {
        return std::numeric_limits<std::size_t>::max();
      }
      capacity *= r;
    }
    return capacity;
  }

  std::vector<std::size_t> Decode(std::size_t index) const {
    std::vector<std::size_t> choice(radices_.size());
    for (std::size_t i = radices_.size(); i-- > 0;) {
      choice[i] = index % radices_[i];
      index /= radices_[i];
    }
    return choice;
  }

  std::vector<std::size_t> Random(Rng& rng) const {
    std::vector<std::size_t> choice;
    choice.reserve(radices_.size());
    for (std::size_t r : radices_) choice.push_back(rng.Index(r));
    return choice;
  }

  std::string Render(const std::vector<std::size_t>& c) const {
    namespace lx = canary_lexicon;
    switch (kind_) {
      case CanaryKind::kName:
        return std::string(lx::kFirstNames[c[0]]) + " " +
               std::string(lx::kLastNames[c[1]]);
      case CanaryKind::kAddress:
        return std::to_string(c[0] + 1) + " " + std::string(lx::kStreets[c[1]]) +
               " " + std::string(lx::kStreetSuffixes[c[2]]);
      case CanaryKind::kEmail:
        return std::string(lx::kMailWords[c[0]]) + std::to_string(c[1]) + "@" +
               std::string(lx::kMailDomains[c[2]]) + "." +
               std::string(lx::kTlds[c[3]]);
      case CanaryKind::kNumber: {
        std::string out = pattern_;
        std::size_t slot = 0;
        for (char& ch : out) {
          if (ch >= '0' && ch <= '9') ch = static_cast<char>('0' + c[slot++]);
        }
        return out;
      }
    }
    return {};
  }

 private:
  CanaryKind kind_;
  std::vector<std::size_t> radices_;
  std::string pattern_;
};

}  // namespace canary_internal

// Code set the canary document carries; drawn from the corpus code-set
// distribution so injected copies look like ordinary training documents.
inline CodeSet DrawCanaryCodes(const Corpus& corpus, std::uint64_t seed) {
  if (corpus.empty()) return {};
  Rng rng(DeriveSeed(seed, 1));
  return CodeSetDistributionOf(corpus).Sample(rng);
}

// Inserts spec.repetitions copies of the rendered canary at seeded positions.
inline Corpus Inject(const Corpus& corpus, const CanarySpec& spec,
                     std::uint64_t seed) {
  spec.Validate();
  if (spec.repetitions == 0) return corpus;
  std::unordered_set<std::string> ids;
  for (const Document& doc : corpus.documents()) ids.insert(doc.id);
  const CodeSet codes = DrawCanaryCodes(corpus, seed);
  std::vector<Document> docs = corpus.documents();
  Rng rng(DeriveSeed(seed, 2));
  for (int i = 0; i < spec.repetitions; ++i) {
    Document canary;
    canary.id = "canary-" + std::string(CanaryKindName(spec.kind)) + "-" +
                std::to_string(i);
    while (ids.contains(canary.id)) canary.id += "'";
    ids.insert(canary.id);
    canary.text = spec.Rendered();
    canary.codes = codes;
    docs.insert(docs.begin() + static_cast<std::ptrdiff_t>(rng.Index(docs.size() + 1)),
                std::move(canary));
  }
  return Corpus(std::move(docs));
}

// n distinct renderings of the template with fillers from the kind's
// grammar, never including the true secret.
inline std::vector<std::string> BuildCandidates(const CanarySpec& spec,
                                                std::size_t n,
                                                std::uint64_t seed) {
  spec.Validate();
  if (n < 1) throw Error("canary", "candidate count must be at least 1");
  const canary_internal::FillerGrammar grammar(spec.kind, spec.secret);
  const std::size_t capacity = grammar.Capacity();
  // One filler may coincide with the secret and is excluded.
  if (capacity - 1 < n) {
    throw Error("canary", "the " + std::string(CanaryKindName(spec.kind)) +
                              " filler grammar cannot produce " +
                              std::to_string(n) + " distinct candidates");
  }
  Rng rng(seed);
  std::vector<std::string> fillers;
  fillers.reserve(n);
  if (capacity <= 2 * n) {
    std::vector<std::size_t> indices(capacity);
    for (std::size_t i = 0; i < capacity; ++i) indices[i] = i;
    rng.Shuffle(indices);
    for (std::size_t i = 0; i < capacity && fillers.size() < n; ++i) {
      std::string filler = grammar.Render(grammar.Decode(indices[i]));
      if (filler != spec.secret) fillers.push_back(std::move(filler));
    }
  } else {
    std::unordered_set<std::string> seen{spec.secret};
    while (fillers.size() < n) {
      std::string filler = grammar.Render(grammar.Random(rng));
      if (seen.insert(filler).second) fillers.push_back(std::move(filler));
    }
  }
  std::vector<std::string> candidates;
  candidates.reserve(n);
  for (const std::string& filler : fillers) candidates.push_back(spec.Render(filler));
  return candidates;
}

struct CanaryResult {
  CanaryKind kind = CanaryKind::kName;
  int repetitions = 0;
  std::size_t rank = 1;
  double perplexity = 0.0;
  std::size_t num_candidates = 0;

  bool operator==(const CanaryResult&) const = default;
};

// rank = 1 + number of candidates whose perplexity is strictly below the
// canary's; ties never push the canary down.
inline CanaryResult RankCanary(const GenModel& model, const CanarySpec& spec,
                               std::span<const std::string> candidates,
                               const CodeSet& codes, std::size_t jobs = 1) {
  if (candidates.empty()) throw Error("canary", "candidate list is empty");
  CanaryResult result;
  result.kind = spec.kind;
  result.repetitions = spec.repetitions;
  result.num_candidates = candidates.size();
  result.perplexity = Perplexity(model, codes, spec.Rendered());
  std::vector<double> scores(candidates.size());
  ParallelFor(candidates.size(), jobs, [&](std::size_t i) {
    scores[i] = Perplexity(model, codes, candidates[i]);
  });
  result.rank = 1 + static_cast<std::size_t>(std::count_if(
                        scores.begin(), scores.end(),
                        [&](double s) { return s < result.perplexity; }));
  return result;
}

// One cell of a canary experiment: inject the canary, fit the arm's
// generator on the result and rank the canary against a candidate pool. The
// pool and the canary codes depend only on `seed`, so cells that differ only
// in repetitions are scored against the same decoys.
inline CanaryResult RunCanaryTrial(const Corpus& train, const CanarySpec& spec,
                                   const NgramOptions& options,
                                   const PrivacyArm& arm,
                                   std::size_t num_candidates,
                                   std::uint64_t seed, std::size_t jobs = 1) {
  const std::uint64_t inject_seed = DeriveSeed(seed, 11);
  const Corpus injected = Inject(train, spec, inject_seed);
  const GenModel model = FitArm(injected, options, arm, DeriveSeed(seed, 12));
  const std::vector<std::string> candidates =
      BuildCandidates(spec, num_candidates, DeriveSeed(seed, 13));
  return RankCanary(model, spec, candidates, DrawCanaryCodes(train, inject_seed),
                    jobs);
}

}  // namespace synthaudit
