#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "caries/checkpoint.hpp"
#include "caries/eval.hpp"
#include "caries/postprocess.hpp"
#include "caries/synth.hpp"
#include "caries/train.hpp"
#include "cli/app.hpp"
#include "json.hpp"
#include "support/oracles.hpp"

using namespace caries;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_subcommand(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("caries_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::vector<std::string> small_synth(const fs::path& out) {
  return {"synth", "--out", out.string(), "--samples", "6", "--width", "32", "--height", "32", "--radius-min", "3",
          "--radius-max", "5", "--lesions-min", "1", "--seed", "7"};
}

Polygon square(double x, double y, double side) {
  return Polygon({{x, y}, {x + side, y}, {x + side, y + side}, {x, y + side}});
}

}  // namespace

TEST(Cli, UnknownSubcommandPrintsUsage) {
  const Result r = run({"frobnicate"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("usage"), std::string::npos);
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"--help"}).code, 0);
}

TEST(Cli, BadFlagsAreConfigErrors) {
  const fs::path dir = scratch("flags");
  EXPECT_EQ(run({"synth"}).code, 1);
  EXPECT_EQ(run({"synth", "--out", dir.string(), "--samples", "many"}).code, 1);
  EXPECT_EQ(run({"synth", "--out", dir.string(), "--bogus", "1"}).code, 1);
  EXPECT_EQ(run({"synth", "--out", dir.string(), "--samples", "0"}).code, 1);
  EXPECT_EQ(run({"synth", "--help"}).code, 0);
}

TEST(Cli, MissingInputIsIoError) {
  const fs::path dir = scratch("io");
  EXPECT_EQ(run({"split", "--manifest", (dir / "nope.json").string(), "--out", (dir / "s.json").string()}).code, 2);
  EXPECT_EQ(run({"report", "--report", (dir / "nope.json").string()}).code, 2);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_EQ(run({"split", "--manifest", (dir / "bad.json").string(), "--out", (dir / "s.json").string()}).code, 2);
}

TEST(Cli, SynthIsDeterministic) {
  const fs::path a = scratch("synth_a");
  const fs::path b = scratch("synth_b");
  ASSERT_EQ(run(small_synth(a / "data")).code, 0);
  ASSERT_EQ(run(small_synth(b / "data")).code, 0);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(a / "data")) {
    ++files;
    const fs::path other = b / "data" / e.path().filename();
    if (e.path().filename() == "run.json") continue;  // embeds its own output path
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path();
  }
  EXPECT_EQ(files, 8u);
  // Re-running into the same directory reproduces it exactly.
  const std::string before = slurp(a / "data" / "manifest.json");
  ASSERT_EQ(run(small_synth(a / "data")).code, 0);
  EXPECT_EQ(slurp(a / "data" / "manifest.json"), before);
}

TEST(Cli, RunManifestRecordsEffectiveConfig) {
  const fs::path dir = scratch("runjson");
  ASSERT_EQ(run(small_synth(dir / "data")).code, 0);
  const json rm = json::parse(slurp(dir / "data" / "run.json"));
  EXPECT_EQ(rm["command"], "synth");
  EXPECT_EQ(rm["config"]["samples"], 6);
  EXPECT_EQ(rm["config"]["noise"], 6.0);
  EXPECT_EQ(rm["config"]["seed"], 7);

  // Replaying the recorded argv reproduces the output.
  std::vector<std::string> argv = rm["argv"].get<std::vector<std::string>>();
  for (auto& a : argv) {
    if (a == (dir / "data").string()) a = (dir / "replay").string();
  }
  ASSERT_EQ(run(argv).code, 0);
  EXPECT_EQ(slurp(dir / "replay" / "img_00004.pgm"), slurp(dir / "data" / "img_00004.pgm"));
}

TEST(Cli, ConfigFileWithOverrides) {
  const fs::path dir = scratch("config");
  std::ofstream(dir / "cfg.json") << R"({"samples": 3, "width": 32, "height": 32, "radius-max": 5, "seed": 2, "epochs": 9})";
  ASSERT_EQ(run({"synth", "--config", (dir / "cfg.json").string(), "--out", (dir / "a").string()}).code, 0);
  EXPECT_EQ(load_manifest(dir / "a" / "manifest.json").records.size(), 3u);
  ASSERT_EQ(run({"synth", "--config", (dir / "cfg.json").string(), "--out", (dir / "b").string(), "--samples", "2"}).code, 0);
  EXPECT_EQ(load_manifest(dir / "b" / "manifest.json").records.size(), 2u);

  std::ofstream(dir / "typo.json") << R"({"sampels": 3})";
  EXPECT_EQ(run({"synth", "--config", (dir / "typo.json").string(), "--out", (dir / "c").string()}).code, 1);
  std::ofstream(dir / "broken.json") << R"({"samples": )";
  EXPECT_EQ(run({"synth", "--config", (dir / "broken.json").string(), "--out", (dir / "c").string()}).code, 1);
  EXPECT_EQ(run({"synth", "--config", (dir / "absent.json").string(), "--out", (dir / "c").string()}).code, 2);
}

TEST(Cli, TrainZeroEpochsWritesFreshInitialization) {
  const fs::path dir = scratch("train0");
  ASSERT_EQ(run(small_synth(dir / "data")).code, 0);
  ASSERT_EQ(run({"split", "--manifest", (dir / "data" / "manifest.json").string(), "--out",
                 (dir / "data" / "split.json").string(), "--test-fraction", "0.34", "--val-fraction", "0.25"})
                .code,
            0);
  ASSERT_EQ(run({"train", "--manifest", (dir / "data" / "split.json").string(), "--out", (dir / "m.ckpt").string(),
                 "--epochs", "0", "--seed", "13", "--depth", "2", "--base-channels", "4"})
                .code,
            0);
  EXPECT_EQ(slurp(dir / "m.ckpt"), checkpoint_to_bytes(initial_checkpoint(NetworkConfig{2, 4, 3}, 13)));
  EXPECT_TRUE(fs::exists(dir / "m.ckpt.run.json"));
}

TEST(Cli, TrainWithoutSplitsIsConfigError) {
  const fs::path dir = scratch("train_nosplit");
  ASSERT_EQ(run(small_synth(dir / "data")).code, 0);
  EXPECT_EQ(run({"train", "--manifest", (dir / "data" / "manifest.json").string(), "--out", (dir / "m.ckpt").string()}).code, 1);
}

TEST(Cli, MiniPipeline) {
  const fs::path dir = scratch("pipeline");
  const std::string data = (dir / "data").string();
  const std::string split = (dir / "data" / "split.json").string();
  ASSERT_EQ(run(small_synth(dir / "data")).code, 0);
  ASSERT_EQ(run({"split", "--manifest", data + "/manifest.json", "--out", split, "--test-fraction", "0.34",
                 "--val-fraction", "0.25"})
                .code,
            0);
  const Result tr = run({"train", "--manifest", split, "--out", (dir / "m.ckpt").string(), "--epochs", "2",
                         "--depth", "2", "--base-channels", "2", "--batch-size", "2", "--log", (dir / "log.json").string()});
  ASSERT_EQ(tr.code, 0) << tr.err;
  EXPECT_NE(tr.err.find("epoch 2/2"), std::string::npos);
  EXPECT_EQ(json::parse(slurp(dir / "log.json"))["epochs"].size(), 2u);

  const Result cal = run({"calibrate", "--checkpoint", (dir / "m.ckpt").string(), "--manifest", split, "--out",
                          (dir / "cal.json").string()});
  ASSERT_EQ(cal.code, 0) << cal.err;
  const double best = std::stod(cal.out);
  EXPECT_GT(best, 0.0);
  EXPECT_LT(best, 1.0);
  EXPECT_EQ(json::parse(slurp(dir / "cal.json"))["sweep"].size(), 19u);

  const Result pr = run({"predict", "--checkpoint", (dir / "m.ckpt").string(), "--manifest", split, "--calibration",
                         (dir / "cal.json").string(), "--out", (dir / "preds.json").string()});
  ASSERT_EQ(pr.code, 0) << pr.err;
  EXPECT_EQ(load_predictions(dir / "preds.json").size(), 2u);

  const Result ev = run({"evaluate", "--pred", (dir / "preds.json").string(), "--name", "System", "--truth", split,
                         "--split", "test", "--out", (dir / "report.json").string()});
  ASSERT_EQ(ev.code, 0) << ev.err;
  EXPECT_NE(ev.out.find("F1-Score"), std::string::npos);

  const Result rep = run({"report", "--report", (dir / "report.json").string()});
  ASSERT_EQ(rep.code, 0);
  EXPECT_EQ(rep.out, ev.out);

  // Predictions restricted to test do not cover the val split.
  EXPECT_EQ(run({"evaluate", "--pred", (dir / "preds.json").string(), "--truth", split, "--split", "val", "--out",
                 (dir / "r2.json").string()})
                .code,
            1);
}

TEST(Cli, EvaluateTableFixture) {
  const fs::path dir = scratch("table");
  const auto rows = oracle::table_fixture();
  constexpr int kImages = 400;
  constexpr int kPerImage = 5;  // 2000 truths

  DatasetManifest truth;
  for (int i = 0; i < kImages; ++i) {
    SampleRecord rec{"img_" + std::to_string(i) + ".pgm", 64, 64, {}, std::nullopt};
    for (int k = 0; k < kPerImage; ++k) rec.regions.push_back(square(2 + 12 * k, 2, 8));
    truth.records.push_back(std::move(rec));
  }
  save_manifest(truth, dir / "truth.json");

  // Truth k (global index) is found when k < tp; false positives fill a
  // lower strip, round-robin over images, never overlapping any truth.
  auto false_box = [](int slot) { return BBox::make(2 + 10 * (slot % 6), 30 + 10 * (slot / 6), 8 + 10 * (slot % 6), 36 + 10 * (slot / 6)); };

  std::vector<std::string> args{"evaluate", "--truth", (dir / "truth.json").string(), "--iou", "0.8", "--out",
                                (dir / "report.json").string()};
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const fs::path file = dir / ("reader" + std::to_string(r) + ".json");
    if (r == 0) {
      std::vector<ImagePredictions> preds;
      for (int i = 0; i < kImages; ++i) {
        ImagePredictions p{truth.records[static_cast<std::size_t>(i)].image_path, {}};
        for (int k = 0; k < kPerImage; ++k) {
          if (i * kPerImage + k < rows[r].tp) p.boxes.push_back({BBox::make(2 + 12 * k, 2, 10 + 12 * k, 10), 0.9});
        }
        for (int slot = 0; i + kImages * slot < rows[r].fp; ++slot) p.boxes.push_back({false_box(slot), 0.6});
        preds.push_back(std::move(p));
      }
      save_predictions(preds, file);
    } else {
      DatasetManifest marks;
      for (int i = 0; i < kImages; ++i) {
        SampleRecord rec{truth.records[static_cast<std::size_t>(i)].image_path, 64, 64, {}, std::nullopt};
        for (int k = 0; k < kPerImage; ++k) {
          if (i * kPerImage + k < rows[r].tp) rec.regions.push_back(square(2 + 12 * k, 2, 8));
        }
        for (int slot = 0; i + kImages * slot < rows[r].fp; ++slot) {
          const BBox b = false_box(slot);
          rec.regions.push_back(square(b.x_min, b.y_min, b.width()));
        }
        marks.records.push_back(std::move(rec));
      }
      save_manifest(marks, file);
    }
    args.insert(args.end(), {"--pred", file.string(), "--name", rows[r].name});
  }

  const Result ev = run(args);
  ASSERT_EQ(ev.code, 0) << ev.err;
  const MetricsReport rep = load_report(dir / "report.json");
  ASSERT_EQ(rep.per_reader.size(), 4u);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    EXPECT_EQ(rep.per_reader[r].name, rows[r].name);
    EXPECT_EQ(rep.per_reader[r].tp, rows[r].tp);
    EXPECT_EQ(rep.per_reader[r].fp, rows[r].fp);
    EXPECT_EQ(rep.per_reader[r].fn, rows[r].fn);
    EXPECT_EQ(std::llround(100.0 * rep.per_reader[r].metrics.f1), oracle::kFixtureF1Percent[r]);
  }
  EXPECT_NE(ev.out.find("80.5"), std::string::npos);
  EXPECT_NE(ev.out.find("61.5"), std::string::npos);
}
