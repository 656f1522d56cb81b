// Copyright 2026 The wkws Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wkws/metrics.h"

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "wkws/error.h"

namespace wkws {
namespace {

std::vector<std::size_t> RankByScore(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  return order;
}

void CheckSizes(std::span<const double> scores, const std::vector<bool>& positives) {
  if (scores.size() != positives.size()) {
    throw DomainError("scores and labels differ in length");
  }
}

}  // namespace

int Argmax(std::span<const double> row) {
  if (row.empty()) throw DomainError("argmax of an empty row");
  return static_cast<int>(std::max_element(row.begin(), row.end()) - row.begin());
}

double Accuracy(std::span<const int> preds, std::span<const int> labels) {
  if (preds.size() != labels.size()) {
    throw DomainError("predictions and labels differ in length");
  }
  if (preds.empty()) throw DomainError("accuracy of an empty set");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < preds.size(); ++i) hits += preds[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(preds.size());
}

double AveragePrecision(std::span<const double> scores,
                        const std::vector<bool>& positives) {
  CheckSizes(scores, positives);
  const auto order = RankByScore(scores);
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (positives[order[r]]) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(r + 1);
    }
  }
  if (hits == 0) throw DomainError("average precision is undefined without positives");
  return sum / static_cast<double>(hits);
}

RocCurve RocPoints(std::span<const double> scores,
                   const std::vector<bool>& positives) {
  CheckSizes(scores, positives);
  const auto n_pos = static_cast<std::size_t>(
      std::count(positives.begin(), positives.end(), true));
  const std::size_t n_neg = positives.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw DomainError("ROC needs at least one positive and one negative");
  }
  const auto order = RankByScore(scores);

  RocCurve curve;
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      if (positives[order[i]]) {
        ++tp;
      } else {
        ++fp;
      }
      ++i;
    }
    curve.points.push_back({threshold, static_cast<double>(fp) / n_neg,
                            static_cast<double>(tp) / n_pos});
  }
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const RocPoint& a = curve.points[k - 1];
    const RocPoint& b = curve.points[k];
    curve.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return curve;
}

MacroMapResult MacroMap(std::span<const double> scores, std::span<const int> labels,
                        int n_classes) {
  if (n_classes < 1) throw DomainError("need at least one class");
  if (scores.size() != labels.size() * static_cast<std::size_t>(n_classes)) {
    throw DomainError("score matrix does not match labels");
  }
  for (int label : labels) {
    if (label < 0 || label >= n_classes) throw DomainError("label out of range");
  }
  MacroMapResult result;
  result.per_class.resize(n_classes);
  std::vector<double> column(labels.size());
  std::vector<bool> positives(labels.size());
  double sum = 0.0;
  int used = 0;
  for (int k = 0; k < n_classes; ++k) {
    bool any = false;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      column[i] = scores[i * n_classes + k];
      positives[i] = labels[i] == k;
      any = any || positives[i];
    }
    if (!any) {
      result.skipped.push_back(k);
      continue;
    }
    const double ap = AveragePrecision(column, positives);
    result.per_class[k] = ap;
    sum += ap;
    ++used;
  }
  if (used == 0) throw DomainError("no class has a positive example");
  result.map = sum / used;
  return result;
}

}  // namespace wkws
