#include "cli/app.hpp"

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <variant>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "CLI11.hpp"
#include "caries/checkpoint.hpp"
#include "caries/error.hpp"
#include "caries/eval.hpp"
#include "caries/pgm.hpp"
#include "caries/postprocess.hpp"
#include "caries/synth.hpp"
#include "caries/train.hpp"
#include "json.hpp"

namespace caries::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

/// Union of every subcommand's settings. Field defaults are the pipeline defaults.
struct RunConfig {
  int width = 128;
  int height = 128;
  int samples = 250;
  int lesions_min = 0;
  int lesions_max = 3;
  double radius_min = 4.0;
  double radius_max = 10.0;
  double looseness = 2.0;
  double noise = 6.0;

  double test_fraction = 0.2;
  double val_fraction = 0.05;

  int depth = 3;
  int base_channels = 8;
  int kernel_size = 3;

  int epochs = 60;
  int batch_size = 8;
  double lr = 0.05;
  double momentum = 0.9;
  double pos_weight = 5.0;
  double gradient_clip = 1.0;
  int patience = 10;

  double threshold = 0.5;
  int min_area = 4;
  double iou = 0.8;

  std::uint64_t seed = 0;

  std::string out;
  std::string manifest;
  std::string data;
  std::string checkpoint;
  std::string truth;
  std::string calibration;
  std::string split;
  std::string log;
  std::string report;
  std::vector<std::string> pred;
  std::vector<std::string> name;
};

using Target = std::variant<int*, double*, std::uint64_t*, std::string*, std::vector<std::string>*>;

struct OptionSpec {
  std::string key;  // flag name without leading dashes; also the config-file key
  Target target;
  std::string help;
  bool required = false;
};

struct Command {
  std::string name;
  std::string summary;
  std::vector<OptionSpec> options;
};

std::vector<OptionSpec> phantom_options(RunConfig& c) {
  return {{"width", &c.width, "image width, px"},
          {"height", &c.height, "image height, px"},
          {"samples", &c.samples, "number of images"},
          {"lesions-min", &c.lesions_min, "minimum lesions per image"},
          {"lesions-max", &c.lesions_max, "maximum lesions per image"},
          {"radius-min", &c.radius_min, "minimum lesion semi-axis, px"},
          {"radius-max", &c.radius_max, "maximum lesion semi-axis, px"},
          {"looseness", &c.looseness, "maximum annotation dilation, px"},
          {"noise", &c.noise, "Gaussian noise sigma, 8-bit units"}};
}

std::vector<OptionSpec> network_options(RunConfig& c) {
  return {{"depth", &c.depth, "encoder levels"},
          {"base-channels", &c.base_channels, "channels at level 0"},
          {"kernel-size", &c.kernel_size, "odd convolution kernel size"}};
}

std::vector<OptionSpec> train_options(RunConfig& c) {
  return {{"epochs", &c.epochs, "maximum epochs"},
          {"batch-size", &c.batch_size, "mini-batch size"},
          {"lr", &c.lr, "learning rate"},
          {"momentum", &c.momentum, "SGD momentum"},
          {"pos-weight", &c.pos_weight, "loss weight of lesion pixels"},
          {"gradient-clip", &c.gradient_clip, "max global gradient norm per step (0 = off)"},
          {"patience", &c.patience, "early-stop patience in epochs (0 disables)"}};
}

std::vector<OptionSpec> concat(std::initializer_list<std::vector<OptionSpec>> parts) {
  std::vector<OptionSpec> out;
  for (const auto& p : parts) out.insert(out.end(), p.begin(), p.end());
  return out;
}

std::vector<Command> commands(RunConfig& c) {
  const OptionSpec seed{"seed", &c.seed, "seed for all randomness"};
  return {
      {"synth", "generate a phantom dataset",
       concat({{{"out", &c.out, "output directory", true}, seed}, phantom_options(c)})},
      {"split", "assign train/val/test labels",
       {{"manifest", &c.manifest, "input manifest", true},
        {"out", &c.out, "output manifest", true},
        {"test-fraction", &c.test_fraction, "fraction of records held out for testing"},
        {"val-fraction", &c.val_fraction, "fraction of the non-test records used for validation"},
        seed}},
      {"train", "train the segmentation network",
       concat({{{"manifest", &c.manifest, "split manifest", true},
                {"data", &c.data, "image directory (default: manifest directory)"},
                {"out", &c.out, "output checkpoint", true},
                {"log", &c.log, "optional JSON training log"},
                seed},
               network_options(c),
               train_options(c)})},
      {"calibrate", "sweep thresholds on a split and report the F1-maximizing one",
       {{"checkpoint", &c.checkpoint, "trained checkpoint", true},
        {"manifest", &c.manifest, "split manifest", true},
        {"data", &c.data, "image directory (default: manifest directory)"},
        {"split", &c.split, "split to calibrate on (default val)"},
        {"min-area", &c.min_area, "minimum component area, px"},
        {"iou", &c.iou, "IoU cutoff for a successful search"},
        {"out", &c.out, "optional JSON with the full sweep"}}},
      {"predict", "run detection on a split",
       {{"checkpoint", &c.checkpoint, "trained checkpoint", true},
        {"manifest", &c.manifest, "manifest listing the images", true},
        {"data", &c.data, "image directory (default: manifest directory)"},
        {"split", &c.split, "split to predict: train, val, test or all (default test)"},
        {"threshold", &c.threshold, "probability threshold"},
        {"calibration", &c.calibration, "calibration JSON; its best threshold replaces --threshold"},
        {"min-area", &c.min_area, "minimum component area, px"},
        {"out", &c.out, "output predictions JSON", true}}},
      {"evaluate", "score predictions or reader polygons against ground truth",
       {{"pred", &c.pred, "predictions or reader-polygon JSON (repeatable)", true},
        {"name", &c.name, "column name for each --pred (repeatable)"},
        {"truth", &c.truth, "ground-truth manifest", true},
        {"split", &c.split, "restrict ground truth to one split"},
        {"iou", &c.iou, "IoU cutoff for a successful search"},
        {"out", &c.out, "output report JSON", true}}},
      {"report", "render a report JSON as a text table",
       {{"report", &c.report, "report JSON", true}, {"out", &c.out, "optional text file for the table"}}},
  };
}

std::string usage(RunConfig& c) {
  std::ostringstream os;
  os << "usage: caries <subcommand> [options]\n\nsubcommands:\n";
  for (const auto& cmd : commands(c)) os << "  " << cmd.name << std::string(12 - cmd.name.size(), ' ') << cmd.summary << '\n';
  os << "\nEvery subcommand accepts --config <file.json> whose keys are flag names.\n"
        "Run 'caries <subcommand> --help' for its options.\n";
  return os.str();
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

bool user_gave(const std::vector<std::string>& args, const std::string& key) {
  const std::string flag = "--" + key;
  return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
    return a == flag || a.rfind(flag + "=", 0) == 0;
  });
}

std::string config_path(const std::vector<std::string>& args) {
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config") {
      if (i + 1 >= args.size()) throw ConfigError("--config needs a path");
      return args[i + 1];
    }
    if (args[i].rfind("--config=", 0) == 0) return args[i].substr(9);
  }
  return {};
}

std::string scalar_token(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number() || v.is_boolean()) return v.dump();
  throw ConfigError("config value " + v.dump() + " is not a scalar");
}

// Config-file entries become ordinary flag tokens placed before the user's
// own flags; a flag given on the command line replaces the file's value.
std::vector<std::string> config_tokens(const json& doc, const Command& cmd, const std::set<std::string>& known,
                                       const std::vector<std::string>& user_args) {
  if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
  std::vector<std::string> tokens;
  for (const auto& [key, value] : doc.items()) {
    if (!known.count(key)) throw ConfigError("unknown config key '" + key + "'");
    const auto it = std::find_if(cmd.options.begin(), cmd.options.end(),
                                 [&](const OptionSpec& o) { return o.key == key; });
    if (it == cmd.options.end() || user_gave(user_args, key)) continue;
    if (value.is_array()) {
      for (const auto& item : value) {
        tokens.push_back("--" + key);
        tokens.push_back(scalar_token(item));
      }
    } else {
      tokens.push_back("--" + key);
      tokens.push_back(scalar_token(value));
    }
  }
  return tokens;
}

json effective_config(const Command& cmd) {
  json cfg = json::object();
  for (const auto& opt : cmd.options) {
    std::visit([&](auto* p) { cfg[opt.key] = *p; }, opt.target);
  }
  return cfg;
}

json effective_args(const Command& cmd) {
  json args = json::array({cmd.name});
  for (const auto& opt : cmd.options) {
    std::visit(
        [&](auto* p) {
          using V = std::decay_t<decltype(*p)>;
          if constexpr (std::is_same_v<V, std::vector<std::string>>) {
            for (const auto& item : *p) {
              args.push_back("--" + opt.key);
              args.push_back(item);
            }
          } else if constexpr (std::is_same_v<V, std::string>) {
            if (!p->empty()) {
              args.push_back("--" + opt.key);
              args.push_back(*p);
            }
          } else {
            args.push_back("--" + opt.key);
            args.push_back(json(*p).dump());
          }
        },
        opt.target);
  }
  return args;
}

// The run manifest records the effective configuration and an equivalent
// command line; it contains nothing time- or host-dependent.
void write_run_manifest(const Command& cmd, const fs::path& path) {
  json doc{{"command", cmd.name}, {"config", effective_config(cmd)}, {"argv", effective_args(cmd)}};
  write_text(path, doc.dump(1) + "\n");
}

fs::path beside(const fs::path& output) { return fs::path(output.string() + ".run.json"); }

fs::path data_dir(const RunConfig& c, const std::string& manifest) {
  if (!c.data.empty()) return c.data;
  const fs::path parent = fs::path(manifest).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

void require_existing(const std::string& path, const char* what) {
  if (!path.empty() && !fs::exists(path)) throw IoError(std::string(what) + " '" + path + "' does not exist");
}

std::vector<std::size_t> select_records(const DatasetManifest& m, const std::string& split, const std::string& fallback) {
  const std::string which = split.empty() ? fallback : split;
  if (which == "all") {
    std::vector<std::size_t> all(m.records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    return all;
  }
  if (!m.has_splits()) throw ConfigError("manifest has no split labels; run 'split' first or pass --split all");
  return m.indices(split_from_string(which));
}

PhantomConfig phantom_config(const RunConfig& c) {
  PhantomConfig p;
  p.image_width = c.width;
  p.image_height = c.height;
  p.sample_count = c.samples;
  p.lesions_per_image = {c.lesions_min, c.lesions_max};
  p.lesion_radius = {c.radius_min, c.radius_max};
  p.looseness = c.looseness;
  p.noise_sigma = c.noise;
  p.seed = c.seed;
  return p;
}

int cmd_synth(const RunConfig& c, const Command& cmd, std::ostream&, std::ostream& err) {
  const DatasetManifest m = generate_dataset(phantom_config(c), c.out);
  std::size_t lesions = 0;
  for (const auto& r : m.records) lesions += r.regions.size();
  err << "synth: wrote " << m.records.size() << " images with " << lesions << " lesions to " << c.out << '\n';
  write_run_manifest(cmd, fs::path(c.out) / "run.json");
  return kOk;
}

int cmd_split(const RunConfig& c, const Command& cmd, std::ostream&, std::ostream& err) {
  require_existing(c.manifest, "manifest");
  const DatasetManifest m = split_dataset(load_manifest(c.manifest), c.test_fraction, c.val_fraction, c.seed);
  save_manifest(m, c.out);
  err << "split: train " << m.indices(Split::train).size() << ", val " << m.indices(Split::val).size()
      << ", test " << m.indices(Split::test).size() << '\n';
  write_run_manifest(cmd, beside(c.out));
  return kOk;
}

int cmd_train(const RunConfig& c, const Command& cmd, std::ostream&, std::ostream& err) {
  require_existing(c.manifest, "manifest");
  const DatasetManifest m = load_manifest(c.manifest);
  const NetworkConfig net{c.depth, c.base_channels, c.kernel_size};
  TrainConfig tc;
  tc.epochs = c.epochs;
  tc.batch_size = c.batch_size;
  tc.learning_rate = c.lr;
  tc.momentum = c.momentum;
  tc.positive_class_weight = c.pos_weight;
  tc.gradient_clip = c.gradient_clip;
  tc.early_stop_patience = c.patience;
  tc.seed = c.seed;

  const TrainResult result = train(net, tc, m, data_dir(c, c.manifest), [&](const EpochRecord& e) {
    err << "train: epoch " << e.epoch << "/" << tc.epochs << "  train " << e.train_loss << "  val " << e.val_loss
        << (e.improved ? "  *" : "") << '\n';
  });
  save_checkpoint(result.checkpoint, c.out);
  err << "train: kept epoch " << result.checkpoint.metadata.epoch << " (" << result.checkpoint.network.parameter_count()
      << " parameters)" << (result.log.stopped_early ? ", stopped early" : "") << '\n';
  if (!c.log.empty()) {
    json epochs = json::array();
    for (const auto& e : result.log.epochs) {
      epochs.push_back({{"epoch", e.epoch}, {"train_loss", e.train_loss}, {"val_loss", e.val_loss}, {"improved", e.improved}});
    }
    write_text(c.log, json{{"epochs", epochs}, {"best_epoch", result.checkpoint.metadata.epoch},
                           {"stopped_early", result.log.stopped_early}}.dump(1) + "\n");
  }
  write_run_manifest(cmd, beside(c.out));
  return kOk;
}

struct SweepPoint {
  double threshold;
  std::int64_t tp, fp, fn;
  Metrics metrics;
};

int cmd_calibrate(const RunConfig& c, const Command& cmd, std::ostream& out, std::ostream& err) {
  require_existing(c.checkpoint, "checkpoint");
  require_existing(c.manifest, "manifest");
  const Checkpoint ckpt = load_checkpoint(c.checkpoint);
  const DatasetManifest m = load_manifest(c.manifest);
  const auto ids = select_records(m, c.split, "val");
  if (ids.empty()) throw ConfigError("calibration split is empty");
  const fs::path dir = data_dir(c, c.manifest);
  EvalConfig ec{c.iou};
  ec.validate();

  std::vector<ProbabilityMap> maps;
  for (auto i : ids) maps.push_back(predict_probabilities(ckpt, read_pgm(dir / m.records[i].image_path)));

  std::vector<SweepPoint> sweep;
  for (int k = 1; k <= 19; ++k) {
    SweepPoint pt{k / 20.0, 0, 0, 0, {}};
    const PostprocessConfig pc{pt.threshold, c.min_area};
    for (std::size_t j = 0; j < ids.size(); ++j) {
      const auto& rec = m.records[ids[j]];
      const MatchOutcome o = match_detections(detect(maps[j], pc), rec.regions, rec.width, rec.height, ec);
      pt.tp += o.tp();
      pt.fp += o.fp();
      pt.fn += o.fn();
    }
    pt.metrics = compute_metrics(pt.tp, pt.fp, pt.fn);
    err << "calibrate: threshold " << pt.threshold << "  tp " << pt.tp << " fp " << pt.fp << " fn " << pt.fn
        << "  F1 " << pt.metrics.f1 << '\n';
    sweep.push_back(pt);
  }
  // First maximum wins, so ties resolve to the lowest threshold.
  const auto best = std::max_element(sweep.begin(), sweep.end(), [](const SweepPoint& a, const SweepPoint& b) {
    return a.metrics.f1 < b.metrics.f1;
  });
  out << best->threshold << '\n';

  if (!c.out.empty()) {
    json points = json::array();
    for (const auto& p : sweep) {
      points.push_back({{"threshold", p.threshold}, {"tp", p.tp}, {"fp", p.fp}, {"fn", p.fn},
                        {"precision", p.metrics.precision}, {"recall", p.metrics.recall}, {"f1", p.metrics.f1}});
    }
    write_text(c.out, json{{"split", c.split.empty() ? "val" : c.split},
                           {"best_threshold", best->threshold},
                           {"best_f1", best->metrics.f1},
                           {"sweep", points}}.dump(1) + "\n");
    write_run_manifest(cmd, beside(c.out));
  }
  return kOk;
}

int cmd_predict(RunConfig& c, const Command& cmd, std::ostream&, std::ostream& err) {
  require_existing(c.checkpoint, "checkpoint");
  require_existing(c.manifest, "manifest");
  require_existing(c.calibration, "calibration");
  if (!c.calibration.empty()) {
    try {
      c.threshold = json::parse(read_text(c.calibration)).at("best_threshold").get<double>();
    } catch (const json::exception& e) {
      throw ConfigError("calibration file " + c.calibration + " lacks best_threshold: " + e.what());
    }
    err << "predict: threshold " << c.threshold << " from " << c.calibration << '\n';
  }
  const PostprocessConfig pc{c.threshold, c.min_area};
  pc.validate();
  const Checkpoint ckpt = load_checkpoint(c.checkpoint);
  const DatasetManifest m = load_manifest(c.manifest);
  const fs::path dir = data_dir(c, c.manifest);

  std::vector<ImagePredictions> preds;
  std::size_t boxes = 0;
  for (auto i : select_records(m, c.split, "test")) {
    const auto& rec = m.records[i];
    const ProbabilityMap map = predict_probabilities(ckpt, read_pgm(dir / rec.image_path));
    preds.push_back({rec.image_path, detect(map, pc)});
    boxes += preds.back().boxes.size();
  }
  save_predictions(preds, c.out);
  err << "predict: " << boxes << " boxes over " << preds.size() << " images\n";
  write_run_manifest(cmd, beside(c.out));
  return kOk;
}

int cmd_evaluate(const RunConfig& c, const Command& cmd, std::ostream& out, std::ostream& err) {
  require_existing(c.truth, "truth manifest");
  for (const auto& p : c.pred) require_existing(p, "predictions");
  if (!c.name.empty() && c.name.size() != c.pred.size()) {
    throw ConfigError("--name must be given once per --pred");
  }
  EvalConfig ec{c.iou};
  ec.validate();
  const DatasetManifest truth = load_manifest(c.truth);
  std::map<std::string, std::size_t> truth_index;
  for (auto i : select_records(truth, c.split, "all")) truth_index[truth.records[i].image_path] = i;

  std::vector<ReaderOutcomes> readers;
  for (std::size_t k = 0; k < c.pred.size(); ++k) {
    ReaderOutcomes ro;
    ro.name = c.name.empty() ? fs::path(c.pred[k]).stem().string() : c.name[k];
    const std::string text = read_text(c.pred[k]);
    json peek;
    try {
      peek = json::parse(text);
    } catch (const json::parse_error& e) {
      throw FormatError(c.pred[k] + " is not valid JSON: " + e.what(), e.byte);
    }
    auto lookup = [&](const std::string& image) -> const SampleRecord& {
      const auto it = truth_index.find(image);
      if (it == truth_index.end()) throw ConfigError(c.pred[k] + ": image '" + image + "' is not in the ground truth selection");
      return truth.records[it->second];
    };
    if (peek.contains("predictions")) {
      for (const auto& p : predictions_from_json(text)) {
        const auto& rec = lookup(p.image);
        ro.images.push_back(p.image);
        ro.outcomes.push_back(match_detections(p.boxes, rec.regions, rec.width, rec.height, ec));
      }
    } else if (peek.contains("samples")) {
      for (const auto& s : manifest_from_json(text).records) {
        const auto& rec = lookup(s.image_path);
        ro.images.push_back(s.image_path);
        ro.outcomes.push_back(score_reader_polygons(s.regions, rec.regions, rec.width, rec.height, ec));
      }
    } else {
      throw ConfigError(c.pred[k] + " holds neither \"predictions\" nor \"samples\"");
    }
    if (!c.split.empty() && ro.images.size() != truth_index.size()) {
      throw ConfigError(c.pred[k] + " covers " + std::to_string(ro.images.size()) + " images, split '" + c.split +
                        "' has " + std::to_string(truth_index.size()));
    }
    readers.push_back(std::move(ro));
  }
  const MetricsReport report = aggregate_and_report(readers, ec.iou_cutoff);
  save_report(report, c.out);
  out << render_table(report);
  err << "evaluate: " << report.image_count << " images, report written to " << c.out << '\n';
  write_run_manifest(cmd, beside(c.out));
  return kOk;
}

int cmd_report(const RunConfig& c, const Command& cmd, std::ostream& out, std::ostream&) {
  require_existing(c.report, "report");
  const std::string table = render_table(load_report(c.report));
  out << table;
  if (!c.out.empty()) {
    write_text(c.out, table);
    write_run_manifest(cmd, beside(c.out));
  }
  return kOk;
}

void add_option(CLI::App& app, const OptionSpec& spec) {
  std::visit(
      [&](auto* p) {
        CLI::Option* opt = app.add_option("--" + spec.key, *p, spec.help);
        using V = std::decay_t<decltype(*p)>;
        if constexpr (!std::is_same_v<V, std::vector<std::string>>) {
          opt->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        }
        if (spec.required) opt->required();
      },
      spec.target);
}

// Training allocates and frees multi-megabyte tensors every step. Keeping
// them on the heap avoids mapping fresh zero pages each time.
void tune_allocator() {
#if defined(__GLIBC__)
  static const bool once = [] {
    mallopt(M_MMAP_THRESHOLD, 512 << 20);
    mallopt(M_TRIM_THRESHOLD, 1024 << 20);
    return true;
  }();
  (void)once;
#endif
}

}  // namespace

int run_subcommand(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  tune_allocator();
  RunConfig cfg;
  std::vector<Command> cmds = commands(cfg);
  if (args.empty()) {
    err << usage(cfg);
    return kConfigError;
  }
  if (args[0] == "--help" || args[0] == "-h" || args[0] == "help") {
    out << usage(cfg);
    return kOk;
  }
  const auto cmd_it = std::find_if(cmds.begin(), cmds.end(), [&](const Command& c) { return c.name == args[0]; });
  if (cmd_it == cmds.end()) {
    err << "caries: unknown subcommand '" << args[0] << "'\n\n" << usage(cfg);
    return kConfigError;
  }
  const Command& cmd = *cmd_it;
  const std::vector<std::string> user_args(args.begin() + 1, args.end());

  try {
    CLI::App app(cmd.summary, "caries " + cmd.name);
    std::string unused_config;
    app.add_option("--config", unused_config, "JSON file whose keys are flag names");
    for (const auto& spec : cmd.options) add_option(app, spec);

    std::vector<std::string> tokens;
    const std::string config_file = config_path(user_args);
    if (!config_file.empty()) {
      json doc;
      try {
        doc = json::parse(read_text(config_file));
      } catch (const json::parse_error& e) {
        throw ConfigError("config file " + config_file + " is not valid JSON: " + e.what());
      }
      std::set<std::string> known;
      for (const auto& c : cmds) {
        for (const auto& o : c.options) known.insert(o.key);
      }
      tokens = config_tokens(doc, cmd, known, user_args);
    }
    tokens.insert(tokens.end(), user_args.begin(), user_args.end());
    std::reverse(tokens.begin(), tokens.end());  // CLI11 consumes a reversed vector
    try {
      app.parse(tokens);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e, out, err);
      return code == 0 ? kOk : kConfigError;
    }

    if (cmd.name == "synth") return cmd_synth(cfg, cmd, out, err);
    if (cmd.name == "split") return cmd_split(cfg, cmd, out, err);
    if (cmd.name == "train") return cmd_train(cfg, cmd, out, err);
    if (cmd.name == "calibrate") return cmd_calibrate(cfg, cmd, out, err);
    if (cmd.name == "predict") return cmd_predict(cfg, cmd, out, err);
    if (cmd.name == "evaluate") return cmd_evaluate(cfg, cmd, out, err);
    return cmd_report(cfg, cmd, out, err);
  } catch (const IoError& e) {
    err << "caries " << cmd.name << ": I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const FormatError& e) {
    err << "caries " << cmd.name << ": format error: " << e.what() << '\n';
    return kIoError;
  } catch (const Error& e) {
    err << "caries " << cmd.name << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "caries " << cmd.name << ": " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace caries::cli
