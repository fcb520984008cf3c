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


#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "oracles.h"
#include "stainscope/calibration.h"
#include "stainscope/error.h"
#include "stainscope/rng.h"
#include "test_util.h"

using namespace stainscope;
using stainscope::testing::kind_of;

namespace {

RocCurve hand_curve(const std::vector<RocPoint>& points) {
  RocCurve c;
  c.points = points;
  c.auc = trapezoid_auc(points);
  return c;
}

// Brute force over every point of the curve.
size_t closest_point(const RocCurve& c) {
  size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < c.points.size(); ++i) {
    const double d = std::hypot(c.points[i].fpr, 1.0 - c.points[i].tpr);
    const bool better = d < best_d || (d == best_d && (c.points[i].tpr > c.points[best].tpr ||
                                                       (c.points[i].tpr == c.points[best].tpr &&
                                                        c.points[i].threshold < c.points[best].threshold)));
    if (better) {
      best = i;
      best_d = d;
    }
  }
  return best;
}

void random_scores(Rng& rng, size_t n, std::vector<double>& scores, std::vector<bool>& labels, bool ties) {
  scores.clear();
  labels.clear();
  for (size_t i = 0; i < n; ++i) {
    labels.push_back(i % 2 == 0 || rng.uniform() < 0.3);
    double s = rng.uniform(0.0, 1.0) + (labels.back() ? 0.3 : 0.0);
    if (ties) s = std::round(s * 8) / 8;
    scores.push_back(s);
  }
}

CrossvalSlide make_slide(std::string id, bool positive, Rng& rng, bool perfect) {
  CrossvalSlide s;
  s.patient_id = std::move(id);
  s.positive = positive;
  for (int i = 0; i < 20; ++i) {
    const bool window_pos = positive && i < 8;
    const double score = perfect ? (window_pos ? 5.0 + rng.uniform() : rng.uniform()) : rng.uniform(0.0, 3.0);
    s.patch_scores.push_back(score);
    if (i < 4 || (i >= 8 && i < 12)) {
      s.annotated_scores.push_back(score);
      s.annotated_labels.push_back(perfect ? window_pos : rng.uniform() < 0.5);
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("roc") {
  TEST_CASE("perfect separation") {
    const RocCurve c = roc_curve({0.9, 0.8, 0.3, 0.1}, {true, true, false, false});
    CHECK(c.auc == 1.0);
    CHECK(optimal_cutpoint(c) == doctest::Approx(0.55));
  }

  TEST_CASE("two concordant and two discordant pairs") {
    CHECK(roc_curve({0.9, 0.4, 0.6, 0.2}, {true, false, false, true}).auc == 0.5);
  }

  TEST_CASE("all scores tied") {
    const RocCurve c = roc_curve({0.3, 0.3, 0.3, 0.3, 0.3}, {true, false, true, false, false});
    CHECK(c.auc == 0.5);
    REQUIRE(c.points.size() == 2);
    CHECK(c.points.back().fpr == 1.0);
    CHECK(c.points.back().tpr == 1.0);
  }

  TEST_CASE("one class only is degenerate") {
    CHECK(kind_of([] { roc_curve({0.1, 0.2}, {true, true}); }) == ErrorKind::kDegenerateLabels);
    CHECK(kind_of([] { roc_curve({0.1, 0.2}, {true}); }) == ErrorKind::kInvalidInput);
  }

  TEST_CASE("auc equals the Mann-Whitney statistic exactly") {
    Rng rng(2);
    for (int t = 0; t < 40; ++t) {
      std::vector<double> s;
      std::vector<bool> l;
      random_scores(rng, 10 + static_cast<size_t>(rng.uniform_int(0, 190)), s, l, t % 2 == 0);
      const RocCurve c = roc_curve(s, l);
      CHECK(c.auc == oracle::mann_whitney(s, l));
      CHECK(c.auc == doctest::Approx(trapezoid_auc(c.points)).epsilon(1e-12));
    }
  }

  TEST_CASE("points are monotone from the origin to the corner") {
    Rng rng(3);
    std::vector<double> s;
    std::vector<bool> l;
    random_scores(rng, 150, s, l, true);
    const RocCurve c = roc_curve(s, l);
    CHECK(c.points.front().fpr == 0.0);
    CHECK(c.points.front().tpr == 0.0);
    CHECK(c.points.back().fpr == 1.0);
    CHECK(c.points.back().tpr == 1.0);
    for (size_t i = 1; i < c.points.size(); ++i) {
      CHECK(c.points[i].threshold < c.points[i - 1].threshold);
      CHECK(c.points[i].fpr >= c.points[i - 1].fpr);
      CHECK(c.points[i].tpr >= c.points[i - 1].tpr);
    }
  }

  TEST_CASE("increasing transforms keep the point set") {
    Rng rng(4);
    std::vector<double> s;
    std::vector<bool> l;
    random_scores(rng, 120, s, l, true);
    std::vector<double> t;
    for (double v : s) t.push_back(std::exp(2 * v) - 3);
    const RocCurve a = roc_curve(s, l);
    const RocCurve b = roc_curve(t, l);
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) {
      CHECK(a.points[i].fpr == b.points[i].fpr);
      CHECK(a.points[i].tpr == b.points[i].tpr);
    }
    CHECK(a.auc == b.auc);
  }
}

TEST_SUITE("cutpoint") {
  TEST_CASE("closest point to the corner") {
    const double inf = std::numeric_limits<double>::infinity();
    const RocCurve c = hand_curve({{inf, 0, 0}, {3, 0.2, 0.9}, {2, 0.5, 0.95}, {1, 1, 1}});
    CHECK(optimal_point_index(c) == 1);
    CHECK(std::hypot(0.2, 0.1) == doctest::Approx(0.2236).epsilon(1e-4));
    CHECK(optimal_cutpoint(c) == 2.5);
  }

  TEST_CASE("equal distance prefers the higher tpr") {
    const double inf = std::numeric_limits<double>::infinity();
    // (0.25, 0.5) and (0.5, 0.75) are both sqrt(0.3125) from the corner, exactly in binary.
    const RocCurve c = hand_curve({{inf, 0, 0}, {3, 0.25, 0.5}, {2, 0.5, 0.75}, {1, 1, 1}});
    CHECK(optimal_point_index(c) == 2);
  }

  TEST_CASE("matches brute force and reproduces the chosen predictions") {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
      std::vector<double> s;
      std::vector<bool> l;
      random_scores(rng, 80, s, l, t % 2 == 1);
      const RocCurve c = roc_curve(s, l);
      const size_t idx = optimal_point_index(c);
      CHECK(idx == closest_point(c));
      const double cut = optimal_cutpoint(c);
      size_t tp = 0, fp = 0;
      for (size_t i = 0; i < s.size(); ++i) {
        if (s[i] >= cut) (l[i] ? tp : fp) += 1;
      }
      CHECK(static_cast<double>(tp) / c.n_pos == c.points[idx].tpr);
      CHECK(static_cast<double>(fp) / c.n_neg == c.points[idx].fpr);
    }
  }
}

TEST_SUITE("metrics") {
  TEST_CASE("reported confusion matrix") {
    const Metrics m = metrics_from_confusion({110, 18, 5, 112});
    CHECK(m.sensitivity() == doctest::Approx(110.0 / 128.0));
    CHECK(m.specificity() == doctest::Approx(112.0 / 117.0));
    CHECK(m.accuracy == doctest::Approx(222.0 / 245.0));
    CHECK(std::round(m.sensitivity() * 100) == 86);
    CHECK(std::round(m.specificity() * 100) == 96);
    CHECK(std::round(m.accuracy * 100) == 91);
  }

  TEST_CASE("all correct predictions") {
    const Metrics m = confusion_and_metrics({true, false, true, false}, {true, false, true, false});
    for (const ClassMetrics* c : {&m.positive, &m.negative}) {
      CHECK(c->precision == 1.0);
      CHECK(c->recall == 1.0);
      CHECK(c->f1 == 1.0);
      CHECK_FALSE(c->degenerate);
    }
  }

  TEST_CASE("no predicted positives is degenerate") {
    const Metrics m = confusion_and_metrics({false, false, false}, {true, false, false});
    CHECK(m.positive.precision == 0.0);
    CHECK(m.positive.degenerate);
    CHECK(kind_of([] { confusion_and_metrics({true}, {true, false}); }) == ErrorKind::kInvalidInput);
  }

  TEST_CASE("random matrices agree with the textbook formulas") {
    Rng rng(6);
    for (int t = 0; t < 100; ++t) {
      const ConfusionMatrix cm{static_cast<size_t>(rng.uniform_int(1, 50)), static_cast<size_t>(rng.uniform_int(1, 50)),
                               static_cast<size_t>(rng.uniform_int(1, 50)), static_cast<size_t>(rng.uniform_int(1, 50))};
      const Metrics m = metrics_from_confusion(cm);
      const double tp = cm.tp, fn = cm.fn, fp = cm.fp, tn = cm.tn;
      CHECK(m.sensitivity() == doctest::Approx(tp / (tp + fn)));
      CHECK(m.specificity() == doctest::Approx(tn / (tn + fp)));
      CHECK(m.positive.precision == doctest::Approx(tp / (tp + fp)));
      CHECK(m.negative.precision == doctest::Approx(tn / (tn + fn)));
      const double p = tp / (tp + fp), r = tp / (tp + fn);
      CHECK(m.positive.f1 == doctest::Approx(2 * p * r / (p + r)));
      CHECK(m.accuracy == doctest::Approx((tp + tn) / (tp + fn + fp + tn)));
    }
  }

  TEST_CASE("population standard deviation") {
    const MeanStd ms = mean_std({2, 4, 4, 4, 5, 5, 7, 9});
    CHECK(ms.mean == 5.0);
    CHECK(ms.std == 2.0);
  }
}

TEST_SUITE("kfold") {
  TEST_CASE("ten and ten patients over ten folds") {
    std::vector<std::string> ids;
    std::vector<bool> labels;
    for (int i = 0; i < 20; ++i) {
      ids.push_back("p" + std::to_string(i));
      labels.push_back(i < 10);
    }
    const auto folds = stratified_kfold(ids, labels, 10, 7);
    REQUIRE(folds.size() == 10);
    for (const auto& f : folds) {
      REQUIRE(f.size() == 2);
      CHECK(labels[f[0]] != labels[f[1]]);
    }
    CHECK(stratified_kfold(ids, labels, 10, 7) == folds);
  }

  TEST_CASE("partition with bounded imbalance and patients kept together") {
    Rng rng(9);
    std::vector<std::string> ids;
    std::vector<bool> labels;
    for (int p = 0; p < 37; ++p) {
      const bool pos = p % 3 == 0;
      const int slides = static_cast<int>(rng.uniform_int(1, 3));
      for (int s = 0; s < slides; ++s) {
        ids.push_back("pt" + std::to_string(p));
        labels.push_back(pos);
      }
    }
    const int k = 5;
    const auto folds = stratified_kfold(ids, labels, k, 3);
    std::set<size_t> seen;
    std::vector<int> pos_counts, neg_counts;
    for (const auto& f : folds) {
      std::set<std::string> pats_pos, pats_neg;
      for (size_t i : f) {
        CHECK(seen.insert(i).second);
        (labels[i] ? pats_pos : pats_neg).insert(ids[i]);
      }
      pos_counts.push_back(static_cast<int>(pats_pos.size()));
      neg_counts.push_back(static_cast<int>(pats_neg.size()));
    }
    CHECK(seen.size() == ids.size());
    for (const auto* c : {&pos_counts, &neg_counts}) {
      CHECK(*std::max_element(c->begin(), c->end()) - *std::min_element(c->begin(), c->end()) <= 1);
    }
    // A patient never spans two folds.
    for (size_t a = 0; a < folds.size(); ++a) {
      for (size_t b = a + 1; b < folds.size(); ++b) {
        for (size_t i : folds[a]) {
          for (size_t j : folds[b]) CHECK(ids[i] != ids[j]);
        }
      }
    }
  }

  TEST_CASE("too few patients in a class") {
    std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    std::vector<bool> labels{true, true, false, false, false};
    CHECK(kind_of([&] { stratified_kfold(ids, labels, 3, 1); }) == ErrorKind::kStratification);
  }
}

TEST_SUITE("average roc") {
  TEST_CASE("a single curve is returned on the grid") {
    const RocCurve c = roc_curve({0.9, 0.7, 0.6, 0.2, 0.1}, {true, false, true, false, false});
    const RocCurve avg = average_roc({c});
    REQUIRE(avg.points.size() >= 101);
    for (const RocPoint& p : avg.points) {
      // Linear interpolation of the source curve at p.fpr, highest tpr when vertical.
      double best = 0.0;
      for (size_t i = 1; i < c.points.size(); ++i) {
        const auto& a = c.points[i - 1];
        const auto& b = c.points[i];
        if (p.fpr < a.fpr || p.fpr > b.fpr) continue;
        const double v = a.fpr == b.fpr ? std::max(a.tpr, b.tpr) : a.tpr + (b.tpr - a.tpr) * (p.fpr - a.fpr) / (b.fpr - a.fpr);
        best = std::max(best, v);
      }
      if (p.fpr > 0.0) CHECK(p.tpr == doctest::Approx(best));
      CHECK(std::isnan(p.threshold));
    }
    // Kinks at thirds fall between grid points.
    CHECK(std::abs(avg.auc - c.auc) < 0.01);
  }

  TEST_CASE("two identical curves average to themselves") {
    const RocCurve c = roc_curve({0.9, 0.4, 0.6, 0.2, 0.5}, {true, false, false, true, true});
    const RocCurve a = average_roc({c});
    const RocCurve b = average_roc({c, c});
    REQUIRE(a.points.size() == b.points.size());
    for (size_t i = 0; i < a.points.size(); ++i) CHECK(a.points[i].tpr == doctest::Approx(b.points[i].tpr));
  }

  TEST_CASE("chance and perfect curves meet halfway") {
    const double inf = std::numeric_limits<double>::infinity();
    const RocCurve chance = hand_curve({{inf, 0, 0}, {1, 1, 1}});
    const RocCurve perfect = hand_curve({{inf, 0, 0}, {2, 0, 1}, {1, 1, 1}});
    const RocCurve avg = average_roc({chance, perfect});
    for (const RocPoint& p : avg.points) {
      if (p.fpr == 0.0) continue;
      CHECK(p.tpr == doctest::Approx((p.fpr + 1) / 2));
    }
  }
}

TEST_SUITE("crossval") {
  TEST_CASE("perfect detector scores one everywhere") {
    Rng rng(10);
    std::vector<CrossvalSlide> data;
    for (int i = 0; i < 20; ++i) data.push_back(make_slide("p" + std::to_string(i), i % 2 == 0, rng, true));
    const FoldSummary s = crossval(data, 10, 1);
    CHECK(s.accuracy.mean == 1.0);
    CHECK(s.accuracy.std == 0.0);
    CHECK(s.auc.mean == 1.0);
    for (const ClassSummary* c : {&s.positive, &s.negative}) {
      CHECK(c->precision.mean == 1.0);
      CHECK(c->recall.mean == 1.0);
      CHECK(c->f1.mean == 1.0);
      CHECK(c->f1.std == 0.0);
    }
    CHECK(s.pooled == ConfusionMatrix{10, 0, 0, 10});
  }

  TEST_CASE("random detector sits near chance") {
    Rng rng(11);
    std::vector<CrossvalSlide> data;
    for (int i = 0; i < 400; ++i) data.push_back(make_slide("p" + std::to_string(i), i % 2 == 0, rng, false));
    const FoldSummary s = crossval(data, 10, 2);
    // Pooled accuracy over 400 slides: binomial sd is 0.025.
    const double pooled = static_cast<double>(s.pooled.tp + s.pooled.tn) / static_cast<double>(s.pooled.total());
    CHECK(pooled == doctest::Approx(0.5).epsilon(0.2));
    CHECK(s.auc.mean == doctest::Approx(0.5).epsilon(0.2));
    CHECK(s.pooled.total() == 400);
  }

  TEST_CASE("deterministic and independent of jobs") {
    Rng rng(12);
    std::vector<CrossvalSlide> data;
    for (int i = 0; i < 40; ++i) data.push_back(make_slide("p" + std::to_string(i), i % 2 == 0, rng, false));
    const FoldSummary a = crossval(data, 5, 3, 1);
    const FoldSummary b = crossval(data, 5, 3, 4);
    REQUIRE(a.folds.size() == b.folds.size());
    for (size_t i = 0; i < a.folds.size(); ++i) {
      CHECK(a.folds[i].t_patch == b.folds[i].t_patch);
      CHECK(a.folds[i].t_slide == b.folds[i].t_slide);
      CHECK(a.folds[i].test == b.folds[i].test);
    }
    CHECK(a.accuracy.mean == b.accuracy.mean);
  }

  TEST_CASE("a fold missing a class is degenerate") {
    Rng rng(13);
    std::vector<CrossvalSlide> data;
    for (int i = 0; i < 6; ++i) {
      CrossvalSlide s = make_slide("p" + std::to_string(i), i % 2 == 0, rng, true);
      s.annotated_labels.assign(s.annotated_labels.size(), false);
      data.push_back(s);
    }
    CHECK(kind_of([&] { crossval(data, 3, 1); }) == ErrorKind::kDegenerateFold);
  }
}

TEST_SUITE("sample size") {
  TEST_CASE("frozen values from the large-sample formula") {
    struct Row {
      double a0, a1, power, alpha, ratio;
      int64_t pos, neg;
    };
    for (const Row& r : {Row{0.87, 0.94, 0.8, 0.05, 128.0 / 117.0, 68, 63}, Row{0.87, 0.94, 0.8, 0.05, 1.0, 66, 66},
                         Row{0.7, 0.8, 0.9, 0.01, 0.5, 132, 264}, Row{0.5, 0.6, 0.8, 0.05, 2.0, 150, 75}}) {
      const SampleSize n = roc_sample_size(r.a0, r.a1, r.power, r.alpha, r.ratio);
      CHECK(n.n_pos == r.pos);
      CHECK(n.n_neg == r.neg);
    }
  }

  TEST_CASE("the reported study size suffices") {
    CHECK(roc_sample_size(0.87, 0.94, 0.8, 0.05, 128.0 / 117.0).total() <= 245);
  }

  TEST_CASE("lower power and larger effects need fewer subjects") {
    int64_t prev = std::numeric_limits<int64_t>::max();
    for (double power : {0.95, 0.9, 0.8, 0.6, 0.4, 0.2, 0.1}) {
      const int64_t n = roc_sample_size(0.8, 0.88, power, 0.05, 1.0).total();
      CHECK(n <= prev);
      prev = n;
    }
    CHECK(roc_sample_size(0.7, 0.9, 0.8, 0.05, 1.0).total() < roc_sample_size(0.7, 0.8, 0.8, 0.05, 1.0).total());
  }

  TEST_CASE("invalid inputs") {
    CHECK(kind_of([] { roc_sample_size(0.9, 0.85, 0.8, 0.05, 1.0); }) == ErrorKind::kInvalidInput);
    CHECK(kind_of([] { roc_sample_size(0.8, 0.9, 1.2, 0.05, 1.0); }) == ErrorKind::kInvalidInput);
  }
}
