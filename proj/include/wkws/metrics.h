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

#ifndef WKWS_METRICS_H_
#define WKWS_METRICS_H_

#include <optional>
#include <span>
#include <vector>

namespace wkws {

// Index of the largest entry; ties go to the lowest index.
int Argmax(std::span<const double> row);

// Fraction of exact matches.
double Accuracy(std::span<const int> preds, std::span<const int> labels);

// Rank-based AP. Items are ranked by score descending, ties by original
// index; AP is the mean precision at the rank of each positive. Throws
// DomainError when there are no positives.
double AveragePrecision(std::span<const double> scores,
                        const std::vector<bool>& positives);

struct RocPoint {
  double threshold;  // +inf for the (0, 0) origin
  double fpr;
  double tpr;
};

struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
};

// One point per distinct score (predict positive when score >= threshold),
// from (0,0) to (1,1); AUC by the trapezoid rule. Needs both classes.
RocCurve RocPoints(std::span<const double> scores,
                   const std::vector<bool>& positives);

struct MacroMapResult {
  double map = 0.0;
  // Empty for classes with no positive example; those are skipped.
  std::vector<std::optional<double>> per_class;
  std::vector<int> skipped;
};

// One-vs-rest AP per class over a row-major N x n_classes score matrix,
// averaged without weighting over the classes that occur.
MacroMapResult MacroMap(std::span<const double> scores,
                        std::span<const int> labels, int n_classes);

}  // namespace wkws

#endif  // WKWS_METRICS_H_
