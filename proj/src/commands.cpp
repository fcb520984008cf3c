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

#include "stainscope/commands.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>

#include "CLI11.hpp"
#include "json.hpp"

#include "stainscope/autoencoder.h"
#include "stainscope/calibration.h"
#include "stainscope/color_norm.h"
#include "stainscope/detector.h"
#include "stainscope/gradient_check.h"
#include "stainscope/image_io.h"
#include "stainscope/log.h"
#include "stainscope/manifest.h"
#include "stainscope/patches.h"
#include "stainscope/rng.h"
#include "stainscope/run_config.h"
#include "stainscope/synth.h"

namespace stainscope {

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig: return kExitUsage;
    case ErrorKind::kNumeric: return kExitNumeric;
    default: return kExitData;
  }
}

namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

struct Common {
  std::string manifest;
  std::string config;
  std::string model;
  std::string thresholds;
  std::string out_dir;
  std::optional<uint64_t> seed;
  std::optional<int> jobs;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--manifest", c.manifest, "dataset manifest (JSON)");
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--model", c.model, "autoencoder model file");
  cmd->add_option("--thresholds", c.thresholds, "thresholds file (JSON)");
  cmd->add_option("--out-dir", c.out_dir, "output directory");
  cmd->add_option("--seed", c.seed, "master seed");
  cmd->add_option("--jobs", c.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--set", c.sets, "config override key=value (repeatable)");
}

RunConfig build_config(const Common& c) {
  RunConfig cfg;
  if (!c.config.empty()) cfg.merge_file(c.config);
  for (const auto& kv : c.sets) {
    const auto eq = kv.find('=');
    require(eq != std::string::npos && eq > 0, ErrorKind::kConfig,
            "--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (c.seed) cfg.seed = *c.seed;
  if (c.jobs) cfg.jobs = *c.jobs;
  cfg.train.seed = cfg.seed;
  cfg.train.jobs = cfg.jobs;
  cfg.detector.jobs = cfg.jobs;
  cfg.validate();
  return cfg;
}

std::string need(const std::string& value, const char* flag) {
  require(!value.empty(), ErrorKind::kConfig, std::string("missing required flag ") + flag);
  return value;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::kIo, "failed writing " + path.string());
}

bool labeled(const ManifestPatch& p) { return p.label != PatchLabel::kUnlabeled; }

// ---------------------------------------------------------------- extract

int cmd_extract(const Common& c, std::ostream& out, std::ostream& err) {
  const RunConfig cfg = build_config(c);
  const DatasetManifest in = load_manifest(need(c.manifest, "--manifest"), false);
  const fs::path dir = need(c.out_dir, "--out-dir");
  if (in.slides.empty()) {
    out << "manifest has no slides; nothing to extract\n";
    return kExitOk;
  }
  const fs::path abs_dir = fs::absolute(dir);
  auto relative = [&](const fs::path& p) { return fs::absolute(p).lexically_proximate(abs_dir).generic_string(); };

  DatasetManifest result;
  result.version = in.version;
  result.base_dir = dir;
  size_t failures = 0;
  size_t written = 0;
  for (const auto& slide : in.slides) {
    ManifestSlide ms = slide;
    ms.image_path = relative(in.resolve(slide.image_path));
    ms.patches.clear();
    try {
      const Image img = read_image(in.resolve(slide.image_path));
      const auto patches = slide_border_patches(img, cfg.detector, slide.slide_id);
      std::map<std::pair<int, int>, const ManifestPatch*> known;
      for (const auto& p : slide.patches) known[{p.origin.x, p.origin.y}] = &p;
      for (const auto& p : patches) {
        ManifestPatch mp;
        mp.origin = p.origin;
        mp.patch_path = "patches/" + patch_filename(p);
        const auto it = known.find({p.origin.x, p.origin.y});
        if (it != known.end()) {
          mp.label = it->second->label;
          known.erase(it);
        }
        write_image(dir / mp.patch_path, p.image);
        ++written;
        ms.patches.push_back(std::move(mp));
      }
      // Annotations away from the detected border are kept as they were.
      for (const auto& p : slide.patches) {
        if (known.count({p.origin.x, p.origin.y}) == 0) continue;
        ManifestPatch mp = p;
        if (!p.patch_path.empty()) mp.patch_path = relative(in.resolve(p.patch_path));
        ms.patches.push_back(std::move(mp));
      }
    } catch (const Error& e) {
      ++failures;
      err << "slide " << slide.slide_id << ": " << e.what() << "\n";
    }
    result.slides.push_back(std::move(ms));
  }
  save_manifest(result, dir / "manifest.json");
  out << "extracted " << written << " windows from " << in.slides.size() - failures << " of "
      << in.slides.size() << " slides\n";
  return failures == 0 ? kExitOk : kExitData;
}

// ---------------------------------------------------------------- train

int cmd_train(const Common& c, std::ostream& out, std::ostream&) {
  const RunConfig cfg = build_config(c);
  const DatasetManifest m = load_manifest(need(c.manifest, "--manifest"));
  const fs::path dir = need(c.out_dir, "--out-dir");
  const fs::path model_path = c.model.empty() ? dir / "model.sae" : fs::path(c.model);

  std::vector<Image> windows;
  size_t healthy = 0;
  for (size_t i = 0; i < m.slides.size(); ++i) {
    const auto& s = m.slides[i];
    if (s.diagnosis != SlideDiagnosis::kNegative || s.split != Split::kTrain) continue;
    ++healthy;
    const Image img = read_image(m.resolve(s.image_path));
    const BinaryMask border = slide_border(img, cfg.detector, s.slide_id);
    for (auto& p : random_border_crops(img, border, cfg.crops_per_slide, derive_seed(cfg.seed, 500 + i),
                                       s.slide_id)) {
      windows.push_back(std::move(p.image));
    }
  }
  require(healthy > 0, ErrorKind::kConfig, "manifest has no negative-diagnosis training slides");
  log::info("training on " + std::to_string(windows.size()) + " windows from " + std::to_string(healthy) +
            " healthy slides");

  const TrainResult result = train_autoencoder(windows, cfg.train);
  save_model(result.model, model_path);
  fs::create_directories(dir);
  std::ofstream log_out(dir / "training_log.csv", std::ios::binary);
  require(static_cast<bool>(log_out), ErrorKind::kIo, "cannot write training log");
  result.log.write_csv(log_out);
  out << "trained on " << result.log.training_windows << " windows; best epoch "
      << result.log.best_epoch << "; model " << model_path.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- scoring helpers

struct AnnotatedScore {
  bool positive = false;
  double ae = 0.0;
  double baseline = 0.0;
};

struct ScoredSlide {
  const ManifestSlide* slide = nullptr;
  std::vector<double> ae;        // F_brown per border window
  std::vector<double> baseline;  // red fraction per border window
  std::vector<AnnotatedScore> annotated;
};

double score_single(const Image& img, const AeModel& model, const RunConfig& cfg, double* baseline) {
  const Patch p{img, {0, 0}, "annotation"};
  require(img.width() == kPatchSize && img.height() == kPatchSize && img.channels() == 3,
          ErrorKind::kInvalidInput, "annotated patches must be 256x256 RGB");
  if (baseline != nullptr) *baseline = baseline_red_fraction(p, cfg.detector.band);
  return score_patches({p}, model, cfg.detector).front().f_brown;
}

// Scores every border window of the slide and every annotation, reusing the
// window score when an annotation sits on a scored window.
ScoredSlide score_manifest_slide(const DatasetManifest& m, const ManifestSlide& s, const AeModel& model,
                                 const RunConfig& cfg, bool annotations) {
  ScoredSlide r;
  r.slide = &s;
  const Image img = read_image(m.resolve(s.image_path));
  const auto patches = slide_border_patches(img, cfg.detector, s.slide_id);
  const auto scores = score_patches(patches, model, cfg.detector);
  std::map<std::pair<int, int>, size_t> at;
  for (size_t i = 0; i < patches.size(); ++i) {
    r.ae.push_back(scores[i].f_brown);
    r.baseline.push_back(baseline_red_fraction(patches[i], cfg.detector.band));
    at[{patches[i].origin.x, patches[i].origin.y}] = i;
  }
  if (!annotations) return r;
  for (const auto& p : s.patches) {
    if (!labeled(p)) continue;
    AnnotatedScore a;
    a.positive = p.label == PatchLabel::kPositive;
    const auto it = at.find({p.origin.x, p.origin.y});
    if (it != at.end()) {
      a.ae = r.ae[it->second];
      a.baseline = r.baseline[it->second];
    } else {
      a.ae = score_single(read_image(m.resolve(p.patch_path)), model, cfg, &a.baseline);
    }
    r.annotated.push_back(a);
  }
  return r;
}

// ---------------------------------------------------------------- calibrate

int cmd_calibrate(const Common& c, std::ostream& out, std::ostream&) {
  const RunConfig cfg = build_config(c);
  const DatasetManifest m = load_manifest(need(c.manifest, "--manifest"));
  const AeModel model = load_model(need(c.model, "--model"));
  const fs::path thr_path = !c.thresholds.empty() ? fs::path(c.thresholds)
                                                  : fs::path(need(c.out_dir, "--out-dir")) / "thresholds.json";

  std::vector<double> patch_scores;
  std::vector<bool> patch_labels;
  for (const auto& s : m.slides) {
    for (const auto& p : s.patches) {
      if (!labeled(p)) continue;
      patch_scores.push_back(score_single(read_image(m.resolve(p.patch_path)), model, cfg, nullptr));
      patch_labels.push_back(p.label == PatchLabel::kPositive);
    }
  }
  const RocCurve patch_roc = roc_curve(patch_scores, patch_labels);
  Calibration cal;
  cal.thresholds.t_patch = optimal_cutpoint(patch_roc);
  cal.patch_auc = patch_roc.auc;

  std::vector<double> slide_prob;
  std::vector<bool> slide_labels;
  for (const auto& s : m.slides) {
    if (s.split != Split::kTrain || s.diagnosis == SlideDiagnosis::kUnknown) continue;
    const ScoredSlide scored = score_manifest_slide(m, s, model, cfg, false);
    slide_prob.push_back(positive_percentage(scored.ae, cal.thresholds.t_patch));
    slide_labels.push_back(s.diagnosis == SlideDiagnosis::kPositive);
  }
  const RocCurve slide_roc = roc_curve(slide_prob, slide_labels);
  cal.thresholds.t_slide = optimal_cutpoint(slide_roc);
  cal.slide_auc = slide_roc.auc;
  save_calibration(cal, thr_path);
  out << "t_patch " << cal.thresholds.t_patch << " t_slide " << cal.thresholds.t_slide << " patch_auc "
      << cal.patch_auc << " slide_auc " << cal.slide_auc << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- score

int cmd_score(const Common& c, const std::string& slide_path, const std::string& json_path,
              std::ostream& out, std::ostream& err) {
  const RunConfig cfg = build_config(c);
  const AeModel model = load_model(need(c.model, "--model"));
  const Calibration cal = load_calibration(need(c.thresholds, "--thresholds"));
  const Image img = read_image(need(slide_path, "--slide"));
  const std::string id = fs::path(slide_path).stem().string();
  SlideScore score;
  try {
    score = score_slide(img, model, cfg.detector, cal.thresholds, id);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::kEmptySlide) throw;
    out << "slide " << id << " diagnosis indeterminate\n";
    err << e.what() << "\n";
    return kExitData;
  }
  const std::string doc = slide_score_json(score) + "\n";
  if (!json_path.empty()) write_text(json_path, doc);
  if (!c.out_dir.empty()) write_text(fs::path(c.out_dir) / (id + ".score.json"), doc);
  out << "slide " << id << " diagnosis " << to_string(score.diagnosis) << " positive_fraction "
      << fmt(score.positive_fraction) << " windows " << score.patch_scores.size() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- crossval

std::string roc_svg(const std::vector<std::pair<std::string, const FoldSummary*>>& methods) {
  const char* colors[] = {"#c0392b", "#2c3e50", "#27ae60", "#8e44ad"};
  std::string s =
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"420\" height=\"420\" viewBox=\"0 0 420 420\">\n"
      "<rect width=\"420\" height=\"420\" fill=\"white\"/>\n"
      "<g transform=\"translate(50,20)\">\n"
      "<rect width=\"350\" height=\"350\" fill=\"none\" stroke=\"#888\"/>\n"
      "<line x1=\"0\" y1=\"350\" x2=\"350\" y2=\"0\" stroke=\"#ccc\" stroke-dasharray=\"4 4\"/>\n"
      "<text x=\"175\" y=\"385\" text-anchor=\"middle\" font-size=\"12\">false positive rate</text>\n"
      "<text x=\"-175\" y=\"-35\" transform=\"rotate(-90)\" text-anchor=\"middle\" font-size=\"12\">"
      "true positive rate</text>\n";
  for (size_t m = 0; m < methods.size(); ++m) {
    const auto& [name, summary] = methods[m];
    const char* color = colors[m % 4];
    s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (const auto& p : summary->average.points) s += fmt(p.fpr * 350) + "," + fmt(350 - p.tpr * 350) + " ";
    s += "\"/>\n";
    // Operating point: mean held-out (1 - specificity, sensitivity).
    const double x = 1.0 - summary->negative.recall.mean;
    const double y = summary->positive.recall.mean;
    s += "<circle cx=\"" + fmt(x * 350) + "\" cy=\"" + fmt(350 - y * 350) + "\" r=\"5\" fill=\"" + color + "\"/>\n";
    s += "<text x=\"200\" y=\"" + std::to_string(300 + 16 * static_cast<int>(m)) + "\" font-size=\"12\" fill=\"" +
         color + "\">" + name + " AUC " + fmt(summary->average.auc).substr(0, 5) + "</text>\n";
  }
  s += "</g>\n</svg>\n";
  return s;
}

ordered_json mean_std_json(const MeanStd& v) { return {{"mean", v.mean}, {"std", v.std}}; }

ordered_json summary_json(const FoldSummary& s, double patch_auc) {
  ordered_json j;
  j["accuracy"] = mean_std_json(s.accuracy);
  j["slide_auc"] = mean_std_json(s.auc);
  j["average_roc_auc"] = s.average.auc;
  j["patch_auc"] = patch_auc;
  for (auto [name, cls] : {std::pair{"positive", &s.positive}, std::pair{"negative", &s.negative}}) {
    j[name] = {{"precision", mean_std_json(cls->precision)},
               {"recall", mean_std_json(cls->recall)},
               {"f1", mean_std_json(cls->f1)}};
  }
  ordered_json folds = ordered_json::array();
  for (const auto& f : s.folds) {
    folds.push_back({{"fold", f.fold},
                     {"t_patch", f.t_patch},
                     {"t_slide", f.t_slide},
                     {"slide_auc", f.roc.auc},
                     {"accuracy", f.metrics.accuracy}});
  }
  j["folds"] = std::move(folds);
  return j;
}

ordered_json confusion_json(const ConfusionMatrix& cm) {
  const Metrics m = metrics_from_confusion(cm);
  return {{"rows", "actual"},
          {"tp", cm.tp},
          {"fn", cm.fn},
          {"fp", cm.fp},
          {"tn", cm.tn},
          {"sensitivity", m.sensitivity()},
          {"specificity", m.specificity()},
          {"accuracy", m.accuracy}};
}

int cmd_crossval(const Common& c, std::ostream& out, std::ostream&) {
  const RunConfig cfg = build_config(c);
  const DatasetManifest m = load_manifest(need(c.manifest, "--manifest"));
  const AeModel model = load_model(need(c.model, "--model"));
  const fs::path dir = need(c.out_dir, "--out-dir");

  std::vector<CrossvalSlide> ae_set;
  std::vector<CrossvalSlide> base_set;
  std::vector<double> ae_ann, base_ann;
  std::vector<bool> ann_labels;
  for (const auto& s : m.slides) {
    if (s.diagnosis == SlideDiagnosis::kUnknown) continue;
    const ScoredSlide scored = score_manifest_slide(m, s, model, cfg, true);
    CrossvalSlide ae{s.slide_id, s.diagnosis == SlideDiagnosis::kPositive, scored.ae, {}, {}};
    CrossvalSlide base{s.slide_id, ae.positive, scored.baseline, {}, {}};
    for (const auto& a : scored.annotated) {
      ae.annotated_scores.push_back(a.ae);
      ae.annotated_labels.push_back(a.positive);
      base.annotated_scores.push_back(a.baseline);
      base.annotated_labels.push_back(a.positive);
      ae_ann.push_back(a.ae);
      base_ann.push_back(a.baseline);
      ann_labels.push_back(a.positive);
    }
    ae_set.push_back(std::move(ae));
    base_set.push_back(std::move(base));
    log::info("scored slide " + s.slide_id);
  }

  const FoldSummary ae = crossval(ae_set, cfg.folds, cfg.seed, cfg.jobs);
  const FoldSummary base = crossval(base_set, cfg.folds, cfg.seed, cfg.jobs);
  const double ae_patch_auc = roc_curve(ae_ann, ann_labels).auc;
  const double base_patch_auc = roc_curve(base_ann, ann_labels).auc;

  std::string csv = "fold,class,metric,ae,baseline\n";
  for (size_t f = 0; f < ae.folds.size(); ++f) {
    const Metrics& a = ae.folds[f].metrics;
    const Metrics& b = base.folds[f].metrics;
    for (auto [cls, ca, cb] : {std::tuple{"positive", &a.positive, &b.positive},
                               std::tuple{"negative", &a.negative, &b.negative}}) {
      csv += std::to_string(f) + "," + cls + ",precision," + fmt(ca->precision) + "," + fmt(cb->precision) + "\n";
      csv += std::to_string(f) + "," + cls + ",recall," + fmt(ca->recall) + "," + fmt(cb->recall) + "\n";
      csv += std::to_string(f) + "," + cls + ",f1," + fmt(ca->f1) + "," + fmt(cb->f1) + "\n";
    }
  }
  write_text(dir / "metrics.csv", csv);

  std::string roc = "method,fpr,tpr\n";
  for (auto [name, s] : {std::pair{"ae", &ae}, std::pair{"baseline", &base}}) {
    for (const auto& p : s->average.points) roc += std::string(name) + "," + fmt(p.fpr) + "," + fmt(p.tpr) + "\n";
  }
  write_text(dir / "roc_points.csv", roc);

  ordered_json confusion;
  confusion["ae"] = confusion_json(ae.pooled);
  confusion["baseline"] = confusion_json(base.pooled);
  write_text(dir / "confusion.json", confusion.dump(2) + "\n");

  ordered_json summary;
  summary["folds"] = cfg.folds;
  summary["seed"] = cfg.seed;
  summary["slides"] = ae_set.size();
  summary["annotated_patches"] = ann_labels.size();
  summary["ae"] = summary_json(ae, ae_patch_auc);
  summary["baseline"] = summary_json(base, base_patch_auc);
  write_text(dir / "summary.json", summary.dump(2) + "\n");

  if (cfg.svg) write_text(dir / "roc.svg", roc_svg({{"AE", &ae}, {"baseline", &base}}));

  out << "ae accuracy " << fmt(ae.accuracy.mean) << " +- " << fmt(ae.accuracy.std) << " slide_auc "
      << fmt(ae.auc.mean) << " patch_auc " << fmt(ae_patch_auc) << "\n";
  out << "baseline accuracy " << fmt(base.accuracy.mean) << " +- " << fmt(base.accuracy.std) << " slide_auc "
      << fmt(base.auc.mean) << " patch_auc " << fmt(base_patch_auc) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- synth, colornorm, samplesize, gradcheck

int cmd_synth(const Common& c, std::ostream& out, std::ostream&) {
  RunConfig cfg = build_config(c);
  if (c.seed) cfg.synth.seed = *c.seed;
  const DatasetManifest m = gen_dataset(cfg.synth, need(c.out_dir, "--out-dir"), cfg.jobs);
  size_t patches = 0;
  for (const auto& s : m.slides) patches += s.patches.size();
  out << "wrote " << m.slides.size() << " slides and " << patches << " labeled windows to " << c.out_dir << "\n";
  return kExitOk;
}

struct ColorArgs {
  std::string source;
  std::string reference;
  std::string output;
  bool skip_hist = false;
  std::optional<double> lambda;
};

int cmd_colornorm(const Common& c, const ColorArgs& a, std::ostream& out, std::ostream&) {
  const RunConfig cfg = build_config(c);
  ColorNormOptions opt;
  opt.lambda = a.lambda.value_or(cfg.color_lambda);
  opt.histogram = cfg.color_histogram && !a.skip_hist;
  const Image src = read_image(need(a.source, "--source"));
  const Image ref = read_image(need(a.reference, "--reference"));
  write_image(need(a.output, "--out"), color_normalize(src, ref, opt));
  out << "wrote " << a.output << "\n";
  return kExitOk;
}

struct SampleArgs {
  double auc_null = 0.87;
  double auc_alt = 0.94;
  double power = 0.8;
  double alpha = 0.05;
  std::string ratio = "1:1";
};

double parse_ratio(const std::string& text) {
  try {
    const auto colon = text.find(':');
    if (colon == std::string::npos) return std::stod(text);
    return std::stod(text.substr(0, colon)) / std::stod(text.substr(colon + 1));
  } catch (const std::exception&) {
    fail(ErrorKind::kConfig, "ratio must be a number or pos:neg, got '" + text + "'");
  }
}

int cmd_samplesize(const SampleArgs& a, std::ostream& out) {
  const SampleSize n = roc_sample_size(a.auc_null, a.auc_alt, a.power, a.alpha, parse_ratio(a.ratio));
  out << "n_pos " << n.n_pos << " n_neg " << n.n_neg << " total " << n.total() << "\n";
  return kExitOk;
}

int cmd_gradcheck(const Common& c, std::ostream& out, std::ostream&) {
  const RunConfig cfg = build_config(c);
  GradientCheckOptions opt;
  opt.step = cfg.gradcheck_step;
  opt.max_entries_per_block = static_cast<size_t>(cfg.gradcheck_entries);
  opt.seed = cfg.seed;
  constexpr double kTolerance = 1e-3;
  bool ok = true;
  auto report = [&](const std::string& name, const GradientCheckReport& r) {
    size_t checked = 0;
    size_t kinks = 0;
    for (const auto& b : r.blocks) {
      checked += b.checked;
      kinks += b.skipped_kinks;
    }
    const bool pass = r.max_rel_error < kTolerance && checked > 0;
    ok = ok && pass;
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s max_rel_error %.3e checked %zu kinks_skipped %zu %s\n",
                  name.c_str(), r.max_rel_error, checked, kinks, pass ? "PASS" : "FAIL");
    out << line;
  };
  for (LayerKind k : {LayerKind::kConv, LayerKind::kTransposedConv, LayerKind::kBatchNorm,
                      LayerKind::kLeakyRelu, LayerKind::kSigmoid}) {
    report(std::string(to_string(k)), gradient_check_layer(k, opt));
  }
  report("composition", gradient_check_composition(opt));
  return ok ? kExitOk : kExitNumeric;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"stainscope: autoencoder detection of anomalous IHC staining"};
  app.require_subcommand(1);
  Common common;

  auto* extract = app.add_subcommand("extract", "write border windows of every manifest slide");
  auto* train = app.add_subcommand("train", "train the autoencoder on healthy border crops");
  auto* calibrate = app.add_subcommand("calibrate", "choose patch and slide thresholds by ROC");
  auto* score = app.add_subcommand("score", "diagnose one slide");
  auto* xval = app.add_subcommand("crossval", "stratified k-fold evaluation of AE and baseline");
  auto* synth = app.add_subcommand("synth", "generate a synthetic dataset");
  auto* colornorm = app.add_subcommand("colornorm", "match a slide's colors to a reference");
  auto* samplesize = app.add_subcommand("samplesize", "subjects needed to detect an AUC difference");
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of the backward pass");
  for (auto* cmd : {extract, train, calibrate, score, xval, synth, colornorm, gradcheck}) add_common(cmd, common);

  std::string slide_path;
  std::string json_path;
  score->add_option("--slide", slide_path, "slide image (PNG)");
  score->add_option("--json", json_path, "write the slide score JSON here");

  ColorArgs color;
  colornorm->add_option("--source", color.source, "image to normalize");
  colornorm->add_option("--reference", color.reference, "reference image");
  colornorm->add_option("--out", color.output, "output image");
  colornorm->add_flag("--skip-hist", color.skip_hist, "skip histogram matching");
  colornorm->add_option("--lambda", color.lambda, "covariance diagonal loading");

  SampleArgs sample;
  samplesize->add_option("--auc-null", sample.auc_null, "AUC under the null hypothesis");
  samplesize->add_option("--auc-alt", sample.auc_alt, "AUC to detect");
  samplesize->add_option("--power", sample.power, "power, 1 - beta");
  samplesize->add_option("--alpha", sample.alpha, "one-sided significance level");
  samplesize->add_option("--ratio", sample.ratio, "positive:negative ratio, e.g. 128:117");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    if (extract->parsed()) return cmd_extract(common, out, err);
    if (train->parsed()) return cmd_train(common, out, err);
    if (calibrate->parsed()) return cmd_calibrate(common, out, err);
    if (score->parsed()) return cmd_score(common, slide_path, json_path, out, err);
    if (xval->parsed()) return cmd_crossval(common, out, err);
    if (synth->parsed()) return cmd_synth(common, out, err);
    if (colornorm->parsed()) return cmd_colornorm(common, color, out, err);
    if (samplesize->parsed()) return cmd_samplesize(sample, out);
    if (gradcheck->parsed()) return cmd_gradcheck(common, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, out, err);
}

}  // namespace stainscope
