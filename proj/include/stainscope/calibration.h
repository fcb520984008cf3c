// Copyright 2026 The Stainscope Authors. All Rights Reserved.
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


/// @file calibration.h
/// @brief ROC analysis, cut-point selection, classification metrics,
/// stratified folds, cross-validation and AUC sample-size planning.
///
/// Everywhere in this module a score predicts positive when score >= threshold.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace stainscope {

struct RocPoint {
  double threshold = 0.0;
  double fpr = 0.0;
  double tpr = 0.0;
};

/// Points by descending threshold: a +inf sentinel at (0, 0), then one point
/// per distinct score, the last of which is (1, 1).
struct RocCurve {
  std::vector<RocPoint> points;
  double auc = 0.0;
  size_t n_pos = 0;
  size_t n_neg = 0;
};

/// AUC by trapezoid over integer counts, identical to the Mann-Whitney
/// statistic with ties counted one half.
RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels);

/// Trapezoidal area under an arbitrary point sequence.
double trapezoid_auc(const std::vector<RocPoint>& points);

/// Index of the point closest to (0, 1); ties go to higher tpr, then to lower
/// threshold.
size_t optimal_point_index(const RocCurve& curve);

/// A threshold that reproduces the chosen point's predictions: the midpoint
/// between its threshold and the next lower one on the curve. The last point
/// returns its own threshold; the sentinel returns a value above every score.
double optimal_cutpoint(const RocCurve& curve);

/// Rows are the actual class.
struct ConfusionMatrix {
  size_t tp = 0;
  size_t fn = 0;
  size_t fp = 0;
  size_t tn = 0;
  size_t total() const { return tp + fn + fp + tn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  bool degenerate = false;  // some ratio had a zero denominator and was reported as 0
};

struct Metrics {
  ConfusionMatrix confusion;
  ClassMetrics positive;
  ClassMetrics negative;
  double accuracy = 0.0;
  double sensitivity() const { return positive.recall; }
  double specificity() const { return negative.recall; }
};

Metrics metrics_from_confusion(const ConfusionMatrix& cm);
Metrics confusion_and_metrics(const std::vector<bool>& predictions, const std::vector<bool>& labels);

/// Patients are grouped by id (all entries of one patient land in the same
/// fold). Within each class patients are shuffled and dealt round-robin, the
/// dealing offset carrying over from one class to the next. Returns the input
/// indices of each fold.
std::vector<std::vector<size_t>> stratified_kfold(const std::vector<std::string>& patient_ids,
                                                  const std::vector<bool>& labels, int k,
                                                  uint64_t seed);

/// Vertical averaging: tpr of each curve sampled on 101 evenly spaced fpr
/// values (linear between points, the highest tpr where a curve is vertical),
/// then averaged. Thresholds of the result are NaN.
RocCurve average_roc(const std::vector<RocCurve>& curves);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // population standard deviation over folds
};

MeanStd mean_std(const std::vector<double>& values);

/// One patient's slide as seen by a patch-level detector.
struct CrossvalSlide {
  std::string patient_id;
  bool positive = false;
  std::vector<double> patch_scores;      // every border window of the slide
  std::vector<double> annotated_scores;  // windows with expert labels
  std::vector<bool> annotated_labels;
};

struct FoldResult {
  int fold = 0;
  std::vector<size_t> test;  // indices into the dataset
  double t_patch = 0.0;
  double t_slide = 0.0;
  std::vector<double> test_probabilities;  // percent
  RocCurve roc;                            // slide-level, held-out patients
  Metrics metrics;
};

struct ClassSummary {
  MeanStd precision;
  MeanStd recall;
  MeanStd f1;
};

struct FoldSummary {
  std::vector<FoldResult> folds;
  ClassSummary positive;
  ClassSummary negative;
  MeanStd accuracy;
  MeanStd auc;
  RocCurve average;
  ConfusionMatrix pooled;
};

/// For each fold: t_patch from the training folds' annotated windows,
/// t_slide from the training slides' positive percentages, then evaluation on
/// the held-out patients.
FoldSummary crossval(const std::vector<CrossvalSlide>& dataset, int k, uint64_t seed, int jobs = 1);

struct SampleSize {
  int64_t n_pos = 0;
  int64_t n_neg = 0;
  int64_t total() const { return n_pos + n_neg; }
};

/// Subjects needed for a one-sided test of H0: AUC = auc_null against
/// AUC = auc_alt, using the large-sample Hanley-McNeil variance
/// V(A) = (Q1 - A^2) / kappa + (Q2 - A^2), Q1 = A / (2 - A), Q2 = 2A^2 / (1 + A),
/// kappa = n_neg / n_pos, and
/// n_pos = ceil(((z_alpha sqrt(V(A0)) + z_beta sqrt(V(A1))) / (A1 - A0))^2).
SampleSize roc_sample_size(double auc_null, double auc_alt, double power, double alpha,
                           double pos_neg_ratio);

}  // namespace stainscope
