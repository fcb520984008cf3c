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


#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "stainscope/commands.h"
#include "stainscope/detector.h"
#include "stainscope/image_io.h"
#include "stainscope/manifest.h"
#include "stainscope/morphology.h"
#include "stainscope/patches.h"
#include "stainscope/rng.h"
#include "stainscope/run_config.h"
#include "test_util.h"

using namespace stainscope;
using stainscope::testing::kind_of;
using stainscope::testing::TempDir;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int code = 0;
  std::string out;
  std::string err;
};

CliResult cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

size_t line_count(const std::string& text) { return static_cast<size_t>(std::count(text.begin(), text.end(), '\n')); }

}  // namespace

TEST_SUITE("manifest") {
  TEST_CASE("round trip through JSON") {
    DatasetManifest m;
    ManifestSlide s{"a", "slides/a.png", SlideDiagnosis::kPositive, Split::kTest, {}};
    s.patches.push_back({"patches/a_1.png", {128, 256}, PatchLabel::kPositive});
    s.patches.push_back({"", {0, 0}, PatchLabel::kUnlabeled});
    m.slides.push_back(s);
    m.slides.push_back({"b", "slides/b.png", SlideDiagnosis::kUnknown, Split::kUnassigned, {}});
    const DatasetManifest back = parse_manifest(manifest_json(m), "/data");
    CHECK(back.slides == m.slides);
    CHECK(back.resolve("slides/a.png") == fs::path("/data/slides/a.png"));
    CHECK(manifest_json(back) == manifest_json(m));
  }

  TEST_CASE("duplicates and dangling paths are rejected") {
    TempDir dir("manifest_check");
    write_image(dir / "a.png", Image(4, 4, 3, 9));
    DatasetManifest m;
    m.base_dir = dir.path();
    m.slides.push_back({"a", "a.png", SlideDiagnosis::kNegative, Split::kTrain, {}});
    CHECK_NOTHROW(validate_manifest(m));
    m.slides.push_back({"a", "a.png", SlideDiagnosis::kNegative, Split::kTrain, {}});
    CHECK(kind_of([&] { validate_manifest(m, false); }) == ErrorKind::kInvalidInput);
    m.slides.back().slide_id = "b";
    m.slides.back().image_path = "missing.png";
    CHECK_THROWS_AS(validate_manifest(m), Error);
    CHECK_NOTHROW(validate_manifest(m, false));
    m.slides.back().image_path = "a.png";
    m.slides.back().patches.push_back({"nope.png", {0, 0}, PatchLabel::kNegative});
    CHECK_THROWS_AS(validate_manifest(m), Error);
  }

  TEST_CASE("malformed documents") {
    CHECK_THROWS_AS(parse_manifest("[]", "."), Error);
    CHECK_THROWS_AS(parse_manifest("{\"version\": 1, \"slides\": [{\"slide_id\": 3}]}", "."), Error);
    CHECK_THROWS_AS(parse_manifest("{\"version\": 1, \"slides\": [{\"slide_id\": \"a\", \"image_path\": \"x\", "
                                   "\"diagnosis\": \"maybe\"}]}",
                                   "."),
                    Error);
  }
}

TEST_SUITE("run config") {
  TEST_CASE("every key has a description and a value") {
    const RunConfig c;
    const auto doc = nlohmann::json::parse(c.to_json());
    for (const ConfigKey& k : config_keys()) {
      CHECK(!k.description.empty());
      CHECK(doc.contains(k.name));
    }
    CHECK(doc.size() == config_keys().size());
  }

  TEST_CASE("set, merge and reject") {
    RunConfig c;
    c.merge_json(R"({"train": {"max_epochs": 7}, "band.lo": -15, "report.svg": false})");
    CHECK(c.train.max_epochs == 7);
    CHECK(c.detector.band.lo == -15.0);
    CHECK_FALSE(c.svg);
    c.set("train.max_epochs", "9");
    CHECK(c.train.max_epochs == 9);
    CHECK(kind_of([&] { c.set("train.max_epoch", "9"); }) == ErrorKind::kConfig);
    CHECK(kind_of([&] { c.set("stride", "\"wide\""); }) == ErrorKind::kConfig);
    CHECK(kind_of([&] { c.merge_json(R"({"colour": {"lambda": 1}})"); }) == ErrorKind::kConfig);
  }

  TEST_CASE("validation catches impossible values") {
    RunConfig c;
    c.folds = 1;
    CHECK(kind_of([&] { c.validate(); }) == ErrorKind::kConfig);
  }
}

TEST_SUITE("cli") {
  TEST_CASE("sample size command") {
    const CliResult r = cli({"samplesize", "--auc-null", "0.87", "--auc-alt", "0.94", "--power", "0.8", "--alpha",
                             "0.05", "--ratio", "128:117"});
    CHECK(r.code == 0);
    CHECK(r.out == "n_pos 68 n_neg 63 total 131\n");
    CHECK(cli({"samplesize", "--auc-null", "0.9", "--auc-alt", "0.8"}).code == kExitData);
    CHECK(cli({"samplesize", "--ratio", "x:y"}).code == kExitUsage);
  }

  TEST_CASE("usage errors exit with one") {
    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"frobnicate"}).code == kExitUsage);
    CHECK(cli({"samplesize", "--bogus"}).code == kExitUsage);
    CHECK(cli({"--help"}).code == kExitOk);
  }

  TEST_CASE("exit code mapping") {
    CHECK(exit_code(ErrorKind::kConfig) == 1);
    CHECK(exit_code(ErrorKind::kNumeric) == 3);
    CHECK(exit_code(ErrorKind::kCorruptModel) == 2);
    CHECK(exit_code(ErrorKind::kEmptySlide) == 2);
  }

  TEST_CASE("empty manifest extracts nothing") {
    TempDir dir("cli_empty");
    spit(dir / "m.json", "{\"version\": 1, \"slides\": []}");
    const CliResult r = cli({"extract", "--manifest", (dir / "m.json").string(), "--out-dir", (dir / "out").string()});
    CHECK(r.code == 0);
    CHECK_FALSE(fs::exists(dir / "out" / "patches"));
  }

  TEST_CASE("unreadable slides are reported and the run continues") {
    TempDir dir("cli_badslide");
    Image slide(600, 600, 3, 240);
    for (int y = 150; y < 450; ++y) {
      for (int x = 150; x < 450; ++x) {
        slide.at(x, y, 0) = 60;
        slide.at(x, y, 1) = 80;
        slide.at(x, y, 2) = 170;
      }
    }
    write_image(dir / "good.png", slide);
    spit(dir / "bad.png", "not a png");
    DatasetManifest m;
    m.slides.push_back({"bad", "bad.png", SlideDiagnosis::kNegative, Split::kTrain, {}});
    m.slides.push_back({"good", "good.png", SlideDiagnosis::kNegative, Split::kTrain, {}});
    save_manifest(m, dir / "m.json");
    const std::vector<std::string> args{"extract", "--manifest", (dir / "m.json").string(), "--out-dir",
                                        (dir / "out").string()};
    const CliResult r = cli(args);
    CHECK(r.code == kExitData);
    CHECK(r.err.find("bad") != std::string::npos);
    const DatasetManifest out = load_manifest(dir / "out" / "manifest.json");
    REQUIRE(out.slides.size() == 2);
    CHECK(out.slides[0].patches.empty());
    CHECK(!out.slides[1].patches.empty());
    const std::string first = slurp(dir / "out" / "manifest.json");
    cli(args);
    CHECK(slurp(dir / "out" / "manifest.json") == first);
  }

  TEST_CASE("missing model or thresholds fail cleanly") {
    TempDir dir("cli_missing");
    write_image(dir / "s.png", Image(300, 300, 3, 255));
    const CliResult r = cli({"score", "--slide", (dir / "s.png").string(), "--model", (dir / "none.sae").string(),
                             "--thresholds", (dir / "none.json").string()});
    CHECK(r.code != 0);
    CHECK(r.err.find("none.sae") != std::string::npos);
    spit(dir / "junk.sae", "SAE1garbage");
    CHECK(cli({"score", "--slide", (dir / "s.png").string(), "--model", (dir / "junk.sae").string(), "--thresholds",
               (dir / "none.json").string()})
              .code == kExitData);
  }

  TEST_CASE("config file, --set and flags apply in that order") {
    TempDir dir("cli_precedence");
    spit(dir / "cfg.json", R"({"synth": {"seed": 1, "n_negative": 1, "n_low": 0, "n_high": 0, "slide_size": 512}})");
    auto seed_of = [&](std::vector<std::string> extra) {
      std::vector<std::string> args{"synth", "--config", (dir / "cfg.json").string(), "--out-dir",
                                    (dir / "out").string()};
      args.insert(args.end(), extra.begin(), extra.end());
      REQUIRE(cli(args).code == 0);
      return nlohmann::json::parse(slurp(dir / "out" / "ground_truth.json"))["seed"].get<int>();
    };
    CHECK(seed_of({}) == 1);
    CHECK(seed_of({"--set", "synth.seed=2"}) == 2);
    CHECK(seed_of({"--set", "synth.seed=2", "--seed", "3"}) == 3);
    CHECK(cli({"synth", "--config", (dir / "cfg.json").string(), "--out-dir", (dir / "out").string(), "--set",
               "synth.colour=1"})
              .code == kExitUsage);
  }

  TEST_CASE("training windows scale with healthy slides") {
    // 117 healthy slides at 50 crops each.
    Image slide(512, 512, 3, 240);
    for (int y = 100; y < 412; ++y) {
      for (int x = 100; x < 412; ++x) {
        if ((x - 256) * (x - 256) + (y - 256) * (y - 256) < 150 * 150) slide.at(x, y, 2) = 120;
      }
    }
    const BinaryMask border = slide_border(slide, DetectorConfig{}, "h");
    size_t windows = 0;
    for (uint64_t i = 0; i < 117; ++i) windows += random_border_crops(slide, border, 50, derive_seed(0, 500 + i)).size();
    CHECK(windows == 5850);
  }
}

TEST_SUITE("cli pipeline") {
  TEST_CASE("synth, extract, train, calibrate, score and crossval on a tiny dataset") {
    TempDir dir("cli_pipeline");
    const fs::path data = dir / "data";
    spit(dir / "cfg.json", R"({"synth": {"n_negative": 2, "n_low": 1, "n_high": 2, "slide_size": 768,
                                          "annotations_per_slide": 4},
                               "crops_per_slide": 3, "train": {"max_epochs": 1, "patience": 1, "batch_size": 4},
                               "folds": 2})");
    const std::string cfg = (dir / "cfg.json").string();
    REQUIRE(cli({"synth", "--config", cfg, "--out-dir", data.string(), "--seed", "5"}).code == 0);
    const std::string manifest = (data / "manifest.json").string();

    const CliResult ex = cli({"extract", "--config", cfg, "--manifest", manifest, "--out-dir", (dir / "ex").string()});
    CHECK(ex.code == 0);
    const DatasetManifest extracted = load_manifest(dir / "ex" / "manifest.json");
    for (const auto& s : extracted.slides) CHECK(!s.patches.empty());

    const CliResult t1 = cli({"train", "--config", cfg, "--manifest", manifest, "--out-dir", (dir / "t1").string()});
    REQUIRE(t1.code == 0);
    REQUIRE(cli({"train", "--config", cfg, "--manifest", manifest, "--out-dir", (dir / "t2").string(), "--jobs", "3"})
                .code == 0);
    CHECK(slurp(dir / "t1" / "model.sae") == slurp(dir / "t2" / "model.sae"));
    const std::string log = slurp(dir / "t1" / "training_log.csv");
    CHECK(log.find("# training_windows,6\n") != std::string::npos);
    CHECK(log.find("# best_epoch,1\n") != std::string::npos);

    const std::string model = (dir / "t1" / "model.sae").string();
    const std::string thr = (dir / "thr.json").string();
    const CliResult cal = cli({"calibrate", "--config", cfg, "--manifest", manifest, "--model", model,
                               "--thresholds", thr});
    REQUIRE(cal.code == 0);
    const Calibration c = load_calibration(thr);
    CHECK(c.patch_auc >= 0.0);
    CHECK(c.patch_auc <= 1.0);

    const CliResult sc = cli({"score", "--config", cfg, "--slide", (data / "slides" / "high_000.png").string(),
                              "--model", model, "--thresholds", thr, "--json", (dir / "score.json").string()});
    CHECK(sc.code == 0);
    CHECK(sc.out.rfind("slide high_000 diagnosis ", 0) == 0);
    const auto doc = nlohmann::json::parse(slurp(dir / "score.json"));
    CHECK(doc["slide_id"] == "high_000");

    write_image(dir / "blank.png", Image(600, 600, 3, 255));
    const CliResult blank = cli({"score", "--slide", (dir / "blank.png").string(), "--model", model, "--thresholds", thr});
    CHECK(blank.code == kExitData);
    CHECK(blank.out.find("indeterminate") != std::string::npos);

    const CliResult xv = cli({"crossval", "--config", cfg, "--manifest", manifest, "--model", model, "--out-dir",
                              (dir / "xv").string()});
    REQUIRE(xv.code == 0);
    const std::string metrics = slurp(dir / "xv" / "metrics.csv");
    CHECK(line_count(metrics) == 1 + 2 * 2 * 3);
    CHECK(metrics.rfind("fold,class,metric,ae,baseline\n", 0) == 0);
    CHECK(fs::exists(dir / "xv" / "confusion.json"));
    CHECK(fs::exists(dir / "xv" / "roc_points.csv"));
    CHECK(slurp(dir / "xv" / "roc.svg").find("<svg") == 0);
    const auto summary = nlohmann::json::parse(slurp(dir / "xv" / "summary.json"));
    CHECK(summary["slides"] == 5);

    CHECK(cli({"crossval", "--config", cfg, "--manifest", manifest, "--model", model, "--out-dir",
               (dir / "xv8").string(), "--jobs", "8"})
              .code == 0);
    CHECK(slurp(dir / "xv8" / "metrics.csv") == metrics);

    const CliResult strat = cli({"crossval", "--config", cfg, "--set", "folds=3", "--manifest", manifest, "--model",
                                 model, "--out-dir", (dir / "xv3").string()});
    CHECK(strat.code == kExitData);
    CHECK(strat.err.find("negative") != std::string::npos);  // two negative patients, three folds
  }

  TEST_CASE("colornorm writes a normalized image") {
    TempDir dir("cli_color");
    Image a(64, 64, 3), b(64, 64, 3);
    Rng rng(3);
    for (auto& v : a.data()) v = static_cast<uint8_t>(rng.uniform_int(40, 200));
    for (auto& v : b.data()) v = static_cast<uint8_t>(rng.uniform_int(90, 160));
    write_image(dir / "a.png", a);
    write_image(dir / "b.png", b);
    const CliResult r = cli({"colornorm", "--source", (dir / "a.png").string(), "--reference",
                             (dir / "b.png").string(), "--out", (dir / "c.png").string(), "--skip-hist"});
    CHECK(r.code == 0);
    const Image c = read_image(dir / "c.png");
    CHECK(c.width() == 64);
  }
}
