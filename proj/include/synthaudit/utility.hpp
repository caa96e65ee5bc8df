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
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "synthaudit/corpus.hpp"
#include "synthaudit/error.hpp"
#include "synthaudit/hash.hpp"
#include "synthaudit/parallel.hpp"
#include "synthaudit/random.hpp"
#include "synthaudit/text.hpp"

namespace synthaudit {

inline constexpr std::size_t kDefaultFeatureDimension = std::size_t{1} << 18;

// Sparse term counts over hashed token indices, sorted by index.
using FeatureVector = std::vector<std::pair<std::uint32_t, double>>;

inline FeatureVector Featurize(std::string_view text, std::size_t dimension) {
  if (dimension == 0 || dimension > (std::size_t{1} << 32)) {
    throw Error("utility", "feature dimension must be in [1, 2^32]");
  }
  std::map<std::uint32_t, double> counts;
  for (const std::string& token : Tokenize(text).tokens) {
    counts[static_cast<std::uint32_t>(Fnv1a64(token) % dimension)] += 1.0;
  }
  return {counts.begin(), counts.end()};
}

struct TrainOptions {
  int epochs = 10;
  double learning_rate = 0.5;
  std::size_t batch_size = 16;
  std::size_t dimension = kDefaultFeatureDimension;
  std::uint64_t seed = 0;
  // Labels to train; defaults to the training corpus label space. Passing the
  // real label space keeps classifiers trained on different corpora aligned.
  std::optional<std::vector<std::string>> label_space;
};

struct DpSgdOptions {
  double clip = std::numeric_limits<double>::infinity();
  double noise_multiplier = 0.0;
  // Called with (pre-clip, post-clip) L2 norm of every per-example gradient.
  std::function<void(double, double)> on_clip;
};

// What an external accountant needs to bound the privacy loss of a run.
struct DpSgdRecord {
  double clip = 0.0;
  double noise_multiplier = 0.0;
  std::size_t steps = 0;
  std::size_t batch_size = 0;
  std::size_t dataset_size = 0;
  double max_post_clip_norm = 0.0;

  bool operator==(const DpSgdRecord&) const = default;
};

class LinearClassifier {
 public:
  LinearClassifier() = default;
  LinearClassifier(std::vector<std::string> labels, std::size_t dimension)
      : labels_(std::move(labels)),
        dimension_(dimension),
        weights_(labels_.size(), std::vector<double>(dimension, 0.0)),
        biases_(labels_.size(), 0.0),
        always_negative_(labels_.size(), false) {}

  const std::vector<std::string>& labels() const { return labels_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<std::vector<double>>& weights() const { return weights_; }
  const std::vector<double>& biases() const { return biases_; }
  const std::vector<bool>& always_negative() const { return always_negative_; }
  const std::vector<std::string>& warnings() const { return warnings_; }
  int epochs() const { return epochs_; }
  double learning_rate() const { return learning_rate_; }
  const std::optional<DpSgdRecord>& dp() const { return dp_; }

  double Logit(std::size_t label, const FeatureVector& x) const {
    double z = biases_[label];
    for (const auto& [index, value] : x) z += weights_[label][index] * value;
    return z;
  }

  // Sigmoid score per label; always-negative labels score 0.
  std::vector<double> Scores(const FeatureVector& x) const {
    std::vector<double> out(labels_.size(), 0.0);
    for (std::size_t j = 0; j < labels_.size(); ++j) {
      if (!always_negative_[j]) out[j] = Sigmoid(Logit(j, x));
    }
    return out;
  }

  static double Sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
  }

  bool operator==(const LinearClassifier&) const = default;

 private:
  friend LinearClassifier TrainLinear(const Corpus&, const TrainOptions&,
                                      const DpSgdOptions&, bool);

  std::vector<std::string> labels_;
  std::size_t dimension_ = 0;
  std::vector<std::vector<double>> weights_;
  std::vector<double> biases_;
  std::vector<bool> always_negative_;
  std::vector<std::string> warnings_;
  int epochs_ = 0;
  double learning_rate_ = 0.0;
  std::optional<DpSgdRecord> dp_;
};

// Mini-batch gradient descent on per-label binary cross-entropy. Every
// example's gradient (all labels together) is scaled to L2 norm at most
// dp.clip, the batch sum receives N(0, (noise_multiplier * clip)^2) noise per
// coordinate when noise_multiplier > 0, and the step uses the batch mean.
// With an infinite clip and no noise this is plain mini-batch SGD.
inline LinearClassifier TrainLinear(const Corpus& train, const TrainOptions& opt,
                                    const DpSgdOptions& dp, bool record_dp) {
  if (train.empty()) throw Error("utility", "training corpus is empty");
  if (opt.epochs < 0 || opt.batch_size == 0 || !(opt.learning_rate > 0.0)) {
    throw Error("utility", "invalid training options");
  }
  if (!(dp.clip > 0.0) || !(dp.noise_multiplier >= 0.0)) {
    throw Error("utility", "DP-SGD needs clip > 0 and noise_multiplier >= 0");
  }
  if (dp.noise_multiplier > 0.0 && !std::isfinite(dp.clip)) {
    throw Error("utility", "noise requires a finite clip norm");
  }
  std::vector<std::string> labels =
      opt.label_space ? *opt.label_space : train.label_space();
  if (labels.empty()) throw Error("utility", "label space is empty");
  std::sort(labels.begin(), labels.end());
  labels.erase(std::unique(labels.begin(), labels.end()), labels.end());

  LinearClassifier model(labels, opt.dimension);
  model.epochs_ = opt.epochs;
  model.learning_rate_ = opt.learning_rate;
  const std::size_t n = train.size();
  const std::size_t num_labels = labels.size();

  std::vector<FeatureVector> features(n);
  std::vector<std::vector<double>> targets(n, std::vector<double>(num_labels, 0.0));
  std::vector<std::size_t> positives(num_labels, 0);
  for (std::size_t i = 0; i < n; ++i) {
    features[i] = Featurize(train[i].text, opt.dimension);
    for (const std::string& code : train[i].codes) {
      const auto it = std::lower_bound(labels.begin(), labels.end(), code);
      if (it != labels.end() && *it == code) {
        const auto j = static_cast<std::size_t>(it - labels.begin());
        targets[i][j] = 1.0;
        ++positives[j];
      }
    }
  }
  for (std::size_t j = 0; j < num_labels; ++j) {
    if (positives[j] == 0) {
      model.always_negative_[j] = true;
      model.warnings_.push_back("label '" + labels[j] +
                                "' has no positive training examples; "
                                "predicting it as always negative");
    }
  }

  Rng order_rng(DeriveSeed(opt.seed, 1));
  Rng noise_rng(DeriveSeed(opt.seed, 2));
  const double noise_std = dp.noise_multiplier * dp.clip;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::vector<double>> errors;
  std::vector<double> scales;
  DpSgdRecord record;
  record.clip = dp.clip;
  record.noise_multiplier = dp.noise_multiplier;
  record.batch_size = opt.batch_size;
  record.dataset_size = n;

  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    order_rng.Shuffle(order);
    for (std::size_t begin = 0; begin < n; begin += opt.batch_size) {
      const std::size_t end = std::min(n, begin + opt.batch_size);
      const std::size_t batch = end - begin;
      // Per-example gradients at the pre-step weights.
      errors.assign(batch, std::vector<double>(num_labels, 0.0));
      scales.assign(batch, 1.0);
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t i = order[begin + b];
        double x_norm2 = 1.0;  // bias feature
        for (const auto& [index, value] : features[i]) x_norm2 += value * value;
        double err2 = 0.0;
        for (std::size_t j = 0; j < num_labels; ++j) {
          if (model.always_negative_[j]) continue;
          const double e = LinearClassifier::Sigmoid(model.Logit(j, features[i])) -
                           targets[i][j];
          errors[b][j] = e;
          err2 += e * e;
        }
        const double norm = std::sqrt(err2 * x_norm2);
        const double scale = std::min(1.0, dp.clip / (norm + 1e-6));
        scales[b] = scale;
        const double post = norm * scale;
        record.max_post_clip_norm = std::max(record.max_post_clip_norm, post);
        if (dp.on_clip) dp.on_clip(norm, post);
      }
      const double step = opt.learning_rate / static_cast<double>(batch);
      for (std::size_t b = 0; b < batch; ++b) {
        const std::size_t i = order[begin + b];
        for (std::size_t j = 0; j < num_labels; ++j) {
          const double g = errors[b][j] * scales[b];
          if (g == 0.0) continue;
          auto& w = model.weights_[j];
          for (const auto& [index, value] : features[i]) w[index] -= step * g * value;
          model.biases_[j] -= step * g;
        }
      }
      if (noise_std > 0.0) {
        for (std::size_t j = 0; j < num_labels; ++j) {
          if (model.always_negative_[j]) continue;
          for (double& w : model.weights_[j]) w -= step * noise_std * noise_rng.Normal();
          model.biases_[j] -= step * noise_std * noise_rng.Normal();
        }
      }
      ++record.steps;
    }
  }
  if (record_dp) model.dp_ = record;
  return model;
}

inline LinearClassifier TrainClassifier(const Corpus& train,
                                        const TrainOptions& options) {
  return TrainLinear(train, options, DpSgdOptions{}, false);
}

inline LinearClassifier TrainClassifierDpSgd(const Corpus& train,
                                             const TrainOptions& options,
                                             const DpSgdOptions& dp) {
  return TrainLinear(train, options, dp, true);
}

struct Confusion {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  std::size_t tn = 0;

  Confusion& operator+=(const Confusion& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    tn += o.tn;
    return *this;
  }
  bool operator==(const Confusion&) const = default;
};

// F1 from counts; a label never present and never predicted scores 1.
inline double F1(const Confusion& c) {
  const std::size_t denominator = 2 * c.tp + c.fp + c.fn;
  if (denominator == 0) return 1.0;
  return static_cast<double>(2 * c.tp) / static_cast<double>(denominator);
}

struct EvalMetrics {
  std::vector<std::string> labels;
  std::vector<Confusion> confusion;  // per label
  std::size_t num_docs = 0;
  std::size_t subset_correct = 0;
  std::size_t argmax_correct = 0;
  double micro_f1 = 0.0;
  double macro_f1 = 0.0;
  double subset_accuracy = 0.0;
  double accuracy = 0.0;

  bool operator==(const EvalMetrics&) const = default;
};

// Derives every metric from the stored counts.
inline void FinalizeMetrics(EvalMetrics& m) {
  Confusion pooled;
  double macro = 0.0;
  for (const Confusion& c : m.confusion) {
    pooled += c;
    macro += F1(c);
  }
  m.micro_f1 = F1(pooled);
  m.macro_f1 = m.confusion.empty() ? 1.0 : macro / static_cast<double>(m.confusion.size());
  const auto docs = static_cast<double>(m.num_docs);
  m.subset_accuracy = static_cast<double>(m.subset_correct) / docs;
  m.accuracy = static_cast<double>(m.argmax_correct) / docs;
}

// Metrics for label-index sets. `argmax` holds one predicted label per
// document; it is correct when that label is in the gold set.
inline EvalMetrics MetricsFromPredictions(
    const std::vector<std::string>& labels,
    const std::vector<std::set<std::size_t>>& gold,
    const std::vector<std::set<std::size_t>>& predicted,
    const std::vector<std::size_t>& argmax) {
  if (gold.empty()) throw Error("utility", "cannot evaluate on an empty test set");
  if (gold.size() != predicted.size() || gold.size() != argmax.size()) {
    throw Error("utility", "gold and predicted label sets are misaligned");
  }
  EvalMetrics m;
  m.labels = labels;
  m.confusion.assign(labels.size(), {});
  m.num_docs = gold.size();
  for (std::size_t d = 0; d < gold.size(); ++d) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const bool g = gold[d].contains(j);
      const bool p = predicted[d].contains(j);
      Confusion& c = m.confusion[j];
      if (g && p) ++c.tp;
      else if (!g && p) ++c.fp;
      else if (g && !p) ++c.fn;
      else ++c.tn;
    }
    if (gold[d] == predicted[d]) ++m.subset_correct;
    if (gold[d].contains(argmax[d])) ++m.argmax_correct;
  }
  FinalizeMetrics(m);
  return m;
}

inline EvalMetrics Evaluate(const LinearClassifier& model, const Corpus& test,
                            std::size_t jobs = 1) {
  if (test.empty()) throw Error("utility", "cannot evaluate on an empty test set");
  const auto& labels = model.labels();
  std::vector<std::set<std::size_t>> gold(test.size());
  std::vector<std::set<std::size_t>> predicted(test.size());
  std::vector<std::size_t> argmax(test.size(), 0);
  for (std::size_t d = 0; d < test.size(); ++d) {
    for (const std::string& code : test[d].codes) {
      const auto it = std::lower_bound(labels.begin(), labels.end(), code);
      if (it == labels.end() || *it != code) {
        throw Error("utility", "test document '" + test[d].id + "' has label '" +
                                   code + "' outside the classifier label space");
      }
      gold[d].insert(static_cast<std::size_t>(it - labels.begin()));
    }
  }
  ParallelFor(test.size(), jobs, [&](std::size_t d) {
    const std::vector<double> scores =
        model.Scores(Featurize(test[d].text, model.dimension()));
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] >= 0.5) predicted[d].insert(j);
    }
    argmax[d] = static_cast<std::size_t>(
        std::max_element(scores.begin(), scores.end()) - scores.begin());
  });
  return MetricsFromPredictions(labels, gold, predicted, argmax);
}

// Per-document predicted label names at the 0.5 threshold.
inline std::vector<CodeSet> PredictLabels(const LinearClassifier& model,
                                          const Corpus& corpus,
                                          std::size_t jobs = 1) {
  std::vector<CodeSet> out(corpus.size());
  ParallelFor(corpus.size(), jobs, [&](std::size_t d) {
    const std::vector<double> scores =
        model.Scores(Featurize(corpus[d].text, model.dimension()));
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (scores[j] >= 0.5) out[d].push_back(model.labels()[j]);
    }
  });
  return out;
}

}  // namespace synthaudit
