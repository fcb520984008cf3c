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


#include "stainscope/calibration.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "stainscope/error.h"
#include "stainscope/parallel.h"
#include "stainscope/rng.h"

namespace stainscope {

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels) {
  require(scores.size() == labels.size(), ErrorKind::kInvalidInput,
          "scores and labels differ in length");
  for (double s : scores) require(!std::isnan(s), ErrorKind::kInvalidInput, "NaN score");
  RocCurve curve;
  for (bool l : labels) (l ? curve.n_pos : curve.n_neg) += 1;
  require(curve.n_pos > 0 && curve.n_neg > 0, ErrorKind::kDegenerateLabels,
          "ROC needs both positive and negative labels");

  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t a, size_t b) { return scores[a] > scores[b]; });

  const double P = static_cast<double>(curve.n_pos);
  const double N = static_cast<double>(curve.n_neg);
  curve.points.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  // Twice the area in units of one positive-negative pair.
  uint64_t doubled_area = 0;
  uint64_t tp = 0;
  uint64_t fp = 0;
  for (size_t i = 0; i < order.size();) {
    const double s = scores[order[i]];
    const uint64_t tp0 = tp;
    const uint64_t fp0 = fp;
    for (; i < order.size() && scores[order[i]] == s; ++i) (labels[order[i]] ? tp : fp) += 1;
    doubled_area += (fp - fp0) * (tp + tp0);
    curve.points.push_back({s, static_cast<double>(fp) / N, static_cast<double>(tp) / P});
  }
  curve.auc = static_cast<double>(doubled_area) / (2.0 * P * N);
  return curve;
}

double trapezoid_auc(const std::vector<RocPoint>& points) {
  double area = 0.0;
  for (size_t i = 1; i < points.size(); ++i) {
    area += (points[i].fpr - points[i - 1].fpr) * (points[i].tpr + points[i - 1].tpr) / 2.0;
  }
  return area;
}

size_t optimal_point_index(const RocCurve& curve) {
  require(!curve.points.empty(), ErrorKind::kInvalidInput, "empty ROC curve");
  size_t best = 0;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < curve.points.size(); ++i) {
    const RocPoint& p = curve.points[i];
    const double d2 = p.fpr * p.fpr + (1.0 - p.tpr) * (1.0 - p.tpr);
    const RocPoint& b = curve.points[best];
    const bool better =
        d2 < best_d2 ||
        (d2 == best_d2 && (p.tpr > b.tpr || (p.tpr == b.tpr && p.threshold < b.threshold)));
    if (better) {
      best = i;
      best_d2 = d2;
    }
  }
  return best;
}

double optimal_cutpoint(const RocCurve& curve) {
  const size_t i = optimal_point_index(curve);
  const auto& pts = curve.points;
  if (i + 1 == pts.size()) return pts[i].threshold;
  const double next = pts[i + 1].threshold;
  if (std::isinf(pts[i].threshold)) {
    return std::nextafter(next, std::numeric_limits<double>::infinity());
  }
  const double mid = pts[i].threshold + (next - pts[i].threshold) / 2.0;
  // Adjacent doubles have no midpoint strictly above the lower one.
  return mid > next ? mid : pts[i].threshold;
}

namespace {

double ratio(size_t num, size_t den, bool& degenerate) {
  if (den == 0) {
    degenerate = true;
    return 0.0;
  }
  return static_cast<double>(num) / static_cast<double>(den);
}

ClassMetrics class_metrics(size_t hit, size_t predicted, size_t actual) {
  ClassMetrics m;
  m.precision = ratio(hit, predicted, m.degenerate);
  m.recall = ratio(hit, actual, m.degenerate);
  if (m.precision + m.recall > 0.0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.degenerate = true;
  }
  return m;
}

}  // namespace

Metrics metrics_from_confusion(const ConfusionMatrix& cm) {
  Metrics m;
  m.confusion = cm;
  m.positive = class_metrics(cm.tp, cm.tp + cm.fp, cm.tp + cm.fn);
  m.negative = class_metrics(cm.tn, cm.tn + cm.fn, cm.tn + cm.fp);
  bool unused = false;
  m.accuracy = ratio(cm.tp + cm.tn, cm.total(), unused);
  return m;
}

Metrics confusion_and_metrics(const std::vector<bool>& predictions, const std::vector<bool>& labels) {
  require(predictions.size() == labels.size(), ErrorKind::kInvalidInput,
          "predictions and labels differ in length");
  ConfusionMatrix cm;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      (predictions[i] ? cm.tp : cm.fn) += 1;
    } else {
      (predictions[i] ? cm.fp : cm.tn) += 1;
    }
  }
  return metrics_from_confusion(cm);
}

std::vector<std::vector<size_t>> stratified_kfold(const std::vector<std::string>& patient_ids,
                                                  const std::vector<bool>& labels, int k,
                                                  uint64_t seed) {
  require(patient_ids.size() == labels.size(), ErrorKind::kInvalidInput,
          "patient ids and labels differ in length");
  require(k >= 2, ErrorKind::kInvalidInput, "k must be at least 2");

  // Patients in order of first appearance, each with its member indices.
  std::map<std::string, size_t> slot;
  std::vector<std::vector<size_t>> members;
  std::vector<bool> patient_label;
  for (size_t i = 0; i < patient_ids.size(); ++i) {
    auto [it, inserted] = slot.emplace(patient_ids[i], members.size());
    if (inserted) {
      members.emplace_back();
      patient_label.push_back(labels[i]);
    }
    require(patient_label[it->second] == labels[i], ErrorKind::kInvalidInput,
            "patient " + patient_ids[i] + " has conflicting labels");
    members[it->second].push_back(i);
  }

  std::vector<std::vector<size_t>> folds(static_cast<size_t>(k));
  size_t offset = 0;
  for (bool cls : {false, true}) {
    std::vector<size_t> group;
    for (size_t p = 0; p < members.size(); ++p) {
      if (patient_label[p] == cls) group.push_back(p);
    }
    require(group.size() >= static_cast<size_t>(k), ErrorKind::kStratification,
            std::string("class '") + (cls ? "positive" : "negative") + "' has " +
                std::to_string(group.size()) + " patients, fewer than k = " + std::to_string(k));
    Rng rng(derive_seed(seed, cls ? 1 : 0));
    rng.shuffle(group);
    for (size_t j = 0; j < group.size(); ++j) {
      auto& fold = folds[(offset + j) % static_cast<size_t>(k)];
      fold.insert(fold.end(), members[group[j]].begin(), members[group[j]].end());
    }
    offset = (offset + group.size()) % static_cast<size_t>(k);
  }
  for (auto& fold : folds) std::sort(fold.begin(), fold.end());
  return folds;
}

namespace {

double tpr_at(const std::vector<RocPoint>& pts, double f) {
  double best = -1.0;
  for (const auto& p : pts) {
    if (p.fpr == f) best = std::max(best, p.tpr);
  }
  if (best >= 0.0) return best;
  // Points are ordered by non-decreasing fpr.
  for (size_t i = 1; i < pts.size(); ++i) {
    if (pts[i - 1].fpr < f && f < pts[i].fpr) {
      const double w = (f - pts[i - 1].fpr) / (pts[i].fpr - pts[i - 1].fpr);
      return pts[i - 1].tpr + w * (pts[i].tpr - pts[i - 1].tpr);
    }
  }
  return f <= pts.front().fpr ? pts.front().tpr : pts.back().tpr;
}

}  // namespace

RocCurve average_roc(const std::vector<RocCurve>& curves) {
  require(!curves.empty(), ErrorKind::kInvalidInput, "no curves to average");
  constexpr int kGrid = 101;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  RocCurve out;
  for (const auto& c : curves) {
    require(!c.points.empty(), ErrorKind::kInvalidInput, "empty ROC curve");
    out.n_pos += c.n_pos;
    out.n_neg += c.n_neg;
  }
  for (int g = 0; g < kGrid; ++g) {
    const double f = static_cast<double>(g) / (kGrid - 1);
    double sum = 0.0;
    for (const auto& c : curves) sum += tpr_at(c.points, f);
    const double tpr = sum / static_cast<double>(curves.size());
    if (g == 0 && tpr > 0.0) out.points.push_back({nan, 0.0, 0.0});
    out.points.push_back({nan, f, tpr});
  }
  out.auc = trapezoid_auc(out.points);
  return out;
}

MeanStd mean_std(const std::vector<double>& values) {
  MeanStd r;
  if (values.empty()) return r;
  const double n = static_cast<double>(values.size());
  for (double v : values) r.mean += v;
  r.mean /= n;
  double ss = 0.0;
  for (double v : values) ss += (v - r.mean) * (v - r.mean);
  r.std = std::sqrt(ss / n);
  return r;
}

namespace {

double positive_percent(const std::vector<double>& scores, double t) {
  require(!scores.empty(), ErrorKind::kEmptySlide, "slide has no scored windows");
  size_t hits = 0;
  for (double s : scores) hits += s >= t ? 1 : 0;
  return 100.0 * static_cast<double>(hits) / static_cast<double>(scores.size());
}

FoldResult run_fold(const std::vector<CrossvalSlide>& dataset, const std::vector<size_t>& test,
                    int fold) {
  std::vector<bool> is_test(dataset.size(), false);
  for (size_t i : test) is_test[i] = true;

  std::vector<double> ann_scores;
  std::vector<bool> ann_labels;
  std::vector<size_t> train;
  for (size_t i = 0; i < dataset.size(); ++i) {
    if (is_test[i]) continue;
    train.push_back(i);
    const auto& s = dataset[i];
    require(s.annotated_scores.size() == s.annotated_labels.size(), ErrorKind::kInvalidInput,
            "annotated scores and labels differ in length");
    ann_scores.insert(ann_scores.end(), s.annotated_scores.begin(), s.annotated_scores.end());
    ann_labels.insert(ann_labels.end(), s.annotated_labels.begin(), s.annotated_labels.end());
  }
  const std::string where = "fold " + std::to_string(fold);
  const bool patch_ok = std::count(ann_labels.begin(), ann_labels.end(), true) > 0 &&
                        std::count(ann_labels.begin(), ann_labels.end(), false) > 0;
  require(patch_ok, ErrorKind::kDegenerateFold,
          where + ": training annotations lack one of the classes");

  FoldResult r;
  r.fold = fold;
  r.test = test;
  r.t_patch = optimal_cutpoint(roc_curve(ann_scores, ann_labels));

  std::vector<double> train_prob;
  std::vector<bool> train_lab;
  for (size_t i : train) {
    train_prob.push_back(positive_percent(dataset[i].patch_scores, r.t_patch));
    train_lab.push_back(dataset[i].positive);
  }
  const bool slide_ok = std::count(train_lab.begin(), train_lab.end(), true) > 0 &&
                        std::count(train_lab.begin(), train_lab.end(), false) > 0;
  require(slide_ok, ErrorKind::kDegenerateFold, where + ": training slides lack one of the classes");
  r.t_slide = optimal_cutpoint(roc_curve(train_prob, train_lab));

  std::vector<bool> preds;
  std::vector<bool> labels;
  for (size_t i : test) {
    const double p = positive_percent(dataset[i].patch_scores, r.t_patch);
    r.test_probabilities.push_back(p);
    preds.push_back(p >= r.t_slide);
    labels.push_back(dataset[i].positive);
  }
  const bool test_ok = std::count(labels.begin(), labels.end(), true) > 0 &&
                       std::count(labels.begin(), labels.end(), false) > 0;
  require(test_ok, ErrorKind::kDegenerateFold, where + ": held-out slides lack one of the classes");
  r.roc = roc_curve(r.test_probabilities, labels);
  r.metrics = confusion_and_metrics(preds, labels);
  return r;
}

}  // namespace

FoldSummary crossval(const std::vector<CrossvalSlide>& dataset, int k, uint64_t seed, int jobs) {
  std::vector<std::string> ids;
  std::vector<bool> labels;
  for (const auto& s : dataset) {
    ids.push_back(s.patient_id);
    labels.push_back(s.positive);
  }
  const auto folds = stratified_kfold(ids, labels, k, seed);

  FoldSummary summary;
  summary.folds.resize(folds.size());
  parallel_for(folds.size(), jobs, [&](size_t f) {
    summary.folds[f] = run_fold(dataset, folds[f], static_cast<int>(f));
  });

  std::vector<double> acc, auc, pp, pr, pf, np, nr, nf;
  std::vector<RocCurve> curves;
  for (const auto& f : summary.folds) {
    const Metrics& m = f.metrics;
    acc.push_back(m.accuracy);
    auc.push_back(f.roc.auc);
    pp.push_back(m.positive.precision);
    pr.push_back(m.positive.recall);
    pf.push_back(m.positive.f1);
    np.push_back(m.negative.precision);
    nr.push_back(m.negative.recall);
    nf.push_back(m.negative.f1);
    curves.push_back(f.roc);
    summary.pooled.tp += m.confusion.tp;
    summary.pooled.fn += m.confusion.fn;
    summary.pooled.fp += m.confusion.fp;
    summary.pooled.tn += m.confusion.tn;
  }
  summary.accuracy = mean_std(acc);
  summary.auc = mean_std(auc);
  summary.positive = {mean_std(pp), mean_std(pr), mean_std(pf)};
  summary.negative = {mean_std(np), mean_std(nr), mean_std(nf)};
  summary.average = average_roc(curves);
  return summary;
}

SampleSize roc_sample_size(double auc_null, double auc_alt, double power, double alpha,
                           double pos_neg_ratio) {
  require(auc_null >= 0.5 && auc_null < 1.0 && auc_alt < 1.0, ErrorKind::kInvalidInput,
          "AUC values must satisfy 0.5 <= auc_null < auc_alt < 1");
  require(auc_alt > auc_null, ErrorKind::kInvalidInput, "auc_alt must exceed auc_null");
  require(power > 0.0 && power < 1.0 && alpha > 0.0 && alpha < 1.0, ErrorKind::kInvalidInput,
          "power and alpha must lie in (0, 1)");
  require(pos_neg_ratio > 0.0 && std::isfinite(pos_neg_ratio), ErrorKind::kInvalidInput,
          "positive:negative ratio must be positive");

  const double kappa = 1.0 / pos_neg_ratio;
  auto variance = [kappa](double a) {
    const double q1 = a / (2.0 - a);
    const double q2 = 2.0 * a * a / (1.0 + a);
    return (q1 - a * a) / kappa + (q2 - a * a);
  };
  const boost::math::normal_distribution<double> normal;
  const double z_alpha = boost::math::quantile(normal, 1.0 - alpha);
  const double z_beta = boost::math::quantile(normal, power);
  const double num =
      std::max(0.0, z_alpha * std::sqrt(variance(auc_null)) + z_beta * std::sqrt(variance(auc_alt)));
  const double delta = auc_alt - auc_null;

  SampleSize n;
  n.n_pos = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(num * num / (delta * delta))));
  n.n_neg = std::max<int64_t>(1, static_cast<int64_t>(std::ceil(kappa * static_cast<double>(n.n_pos))));
  return n;
}

}  // namespace stainscope
