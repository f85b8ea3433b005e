// Command-line front end: simulate, train, track, eval, plot-data.
//
// Exit codes: 0 success, 1 unexpected failure, 64 usage, 65 malformed file,
// 66 missing file, 67 unusable or mismatched checkpoint, 78 bad config.
// Errors print one machine-parsable line to stderr. The MOT3D_LOG
// environment variable (quiet, info, debug) controls stderr verbosity only.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <vector>

#include "mot/io.hpp"
#include "mot/metrics.hpp"
#include "mot/motion.hpp"
#include "mot/nn/checkpoint.hpp"
#include "mot/simulator.hpp"
#include "mot/tracker.hpp"
#include "mot/trainer.hpp"
#include "mot/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 64;
constexpr int kExitSchema = 65;
constexpr int kExitMissingFile = 66;
constexpr int kExitCheckpoint = 67;
constexpr int kExitConfig = 78;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Checkpoint exists but cannot drive the requested configuration.
struct CheckpointMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int log_level() {
  const char* env = std::getenv("MOT3D_LOG");
  if (!env) return 1;
  const std::string v(env);
  if (v == "quiet") return 0;
  if (v == "debug") return 2;
  return 1;
}

void info(const std::string& message) {
  if (log_level() >= 1) std::cerr << message << "\n";
}

void debug(const std::string& message) {
  if (log_level() >= 2) std::cerr << message << "\n";
}

std::string tool_stamp() {
  return std::string(mot::kToolName) + " " + mot::kToolVersion;
}

mot::io::RunConfig load_config(const std::string& path) {
  if (path.empty()) {
    return mot::io::run_config_from_json(nlohmann::json::object());
  }
  debug("loading config " + path);
  return mot::io::load_run_config(path);
}

// Flag > config-file path; empty when neither is set.
std::string resolve(const std::string& flag, const std::string& from_config) {
  return flag.empty() ? from_config : flag;
}

std::string require_path(const std::string& value, const char* what) {
  if (value.empty()) {
    throw UsageError(std::string(what) +
                     " is required (flag or config paths entry)");
  }
  return value;
}

std::string file_stem(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// Shortest decimal form that parses back to the same double.
std::string number_text(double v) { return nlohmann::json(v).dump(); }

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

void write_provenance(std::ofstream& out, const nlohmann::ordered_json& config) {
  out << "# " << tool_stamp() << "\n";
  out << "# config: " << config.dump() << "\n";
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateOpts {
  std::string config_path;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

int cmd_simulate(const SimulateOpts& opts) {
  mot::io::RunConfig config = load_config(opts.config_path);
  if (opts.seed_set) config.seed = opts.seed;
  const std::string out =
      require_path(resolve(opts.out, config.paths.scenario), "an output path");

  const mot::Scenario scenario =
      mot::generate_scenario(config.scenario, config.seed);
  mot::io::write_scenario(out, scenario);

  size_t gt = 0, dets = 0;
  for (const auto& frame : scenario.frames) {
    gt += frame.ground_truth.size();
    dets += frame.detections.size();
  }
  std::cout << "wrote " << out << ": " << scenario.frames.size()
            << " frames, " << gt << " ground-truth boxes, " << dets
            << " detections\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train

struct TrainOpts {
  std::string config_path;
  std::vector<std::string> scenarios;
  std::vector<std::string> val_scenarios;
  std::string checkpoint_out;
  std::string log_out;
};

int cmd_train(const TrainOpts& opts) {
  mot::io::RunConfig config = load_config(opts.config_path);

  std::vector<std::string> inputs = opts.scenarios;
  if (inputs.empty() && !config.paths.scenario.empty()) {
    inputs.push_back(config.paths.scenario);
  }
  if (inputs.empty()) throw UsageError("a training scenario is required");
  const std::string checkpoint_out = require_path(
      resolve(opts.checkpoint_out, config.paths.checkpoint),
      "a checkpoint output path");
  const std::string log_out = resolve(opts.log_out, config.paths.log);

  std::vector<mot::Scenario> sequences;
  for (const std::string& path : inputs) {
    debug("reading scenario " + path);
    sequences.push_back(mot::io::read_scenario(path));
  }
  std::vector<mot::Scenario> validation;
  for (const std::string& path : opts.val_scenarios) {
    validation.push_back(mot::io::read_scenario(path));
  }

  const mot::TrainerConfig trainer = mot::io::effective_trainer_config(config);
  const mot::MotionModel model(config.tracker.motion,
                               config.tracker.bicycle_beta);
  mot::GainNetwork net(
      {model.state_dim(), model.obs_dim(), config.hidden_cap});

  const mot::TrainResult result = mot::train(
      net, sequences, trainer, validation.empty() ? nullptr : &validation);

  mot::nn::save_checkpoint(checkpoint_out, net.params(), net.architecture());
  config.paths.checkpoint = checkpoint_out;
  if (!log_out.empty()) {
    config.paths.log = log_out;
    mot::io::write_training_log(log_out, result.log,
                                mot::io::run_config_to_json(config));
  }

  double final_loss = std::numeric_limits<double>::quiet_NaN();
  for (auto it = result.log.rbegin(); it != result.log.rend(); ++it) {
    if (it->stepped) {
      final_loss = it->loss;
      break;
    }
  }
  std::cout << "wrote " << checkpoint_out << ": " << result.log.size()
            << " steps, final loss " << number_text(final_loss)
            << ", restores " << result.restores << "\n";
  if (result.aborted) {
    info("training aborted after " + std::to_string(result.restores) +
         " divergence restores; the checkpoint holds the last stable "
         "parameters");
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// track

struct TrackOpts {
  std::string config_path;
  std::string input;
  std::string mode;
  std::string checkpoint;
  std::string out;
};

int cmd_track(const TrackOpts& opts) {
  mot::io::RunConfig config = load_config(opts.config_path);
  if (!opts.mode.empty()) {
    config.motion_mode = mot::motion_mode_from_string(opts.mode);
  }

  std::string input = opts.input;
  if (input.empty()) input = config.paths.detections;
  if (input.empty()) input = config.paths.scenario;
  input = require_path(input, "an input path");
  const std::string out =
      require_path(resolve(opts.out, config.paths.tracks), "an output path");

  mot::io::FileHeader header;
  const mot::io::DetectionStream stream =
      mot::io::read_detection_input(input, &header);
  if (header.format == mot::io::kScenarioFormat) {
    config.paths.scenario = input;
  } else {
    config.paths.detections = input;
  }
  debug("read " + std::to_string(stream.frames.size()) + " frames from " +
        input);

  mot::TrackResult result;
  if (config.motion_mode == mot::MotionMode::kGkf) {
    const std::string checkpoint = require_path(
        resolve(opts.checkpoint, config.paths.checkpoint),
        "a checkpoint (gain-network mode)");
    if (!std::filesystem::exists(checkpoint)) {
      throw mot::io::FileMissingError(checkpoint);
    }
    const mot::MotionModel model(config.tracker.motion,
                                 config.tracker.bicycle_beta);
    mot::GainNetworkConfig net_config;
    try {
      net_config = mot::GainNetwork::config_from_architecture(
          mot::nn::read_checkpoint_architecture(checkpoint));
    } catch (const std::exception& e) {
      throw CheckpointMismatch(e.what());
    }
    if (net_config.state_dim != model.state_dim() ||
        net_config.obs_dim != model.obs_dim()) {
      throw CheckpointMismatch(
          "checkpoint expects state dim " +
          std::to_string(net_config.state_dim) + ", motion model '" +
          mot::to_string(config.tracker.motion) + "' has " +
          std::to_string(model.state_dim()));
    }
    mot::GainNetwork net(net_config);
    try {
      mot::nn::load_checkpoint(checkpoint, net.params());
    } catch (const std::exception& e) {
      throw CheckpointMismatch(e.what());
    }
    config.paths.checkpoint = checkpoint;
    config.hidden_cap = net_config.hidden_cap;  // echo the effective width
    result = mot::track_sequence(stream.frames, stream.timestamps,
                                 mot::MotionMode::kGkf, config.tracker, &net);
  } else {
    result = mot::track_sequence(stream.frames, stream.timestamps,
                                 mot::MotionMode::kEkf, config.tracker);
  }

  config.paths.tracks = out;
  mot::io::write_tracks(out, result, mot::io::run_config_to_json(config));

  size_t samples = 0;
  for (const auto& track : result.tracks) samples += track.history.size();
  std::cout << "wrote " << out << ": " << result.tracks.size() << " tracks, "
            << samples << " samples over " << stream.frames.size()
            << " frames\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

struct EvalOpts {
  std::string config_path;
  std::string tracks;
  std::string gt;
  std::string report_out;
  std::string csv_out;
};

int cmd_eval(const EvalOpts& opts) {
  mot::io::RunConfig config = load_config(opts.config_path);
  const std::string tracks = require_path(
      resolve(opts.tracks, config.paths.tracks), "a tracks path");
  const std::string gt = require_path(
      resolve(opts.gt, config.paths.scenario), "a ground-truth scenario");

  const std::vector<mot::EvalBox> preds =
      mot::io::eval_boxes_from_entries(mot::io::read_tracks(tracks));
  const mot::Scenario scenario = mot::io::read_scenario(gt);
  const std::vector<mot::EvalBox> truths =
      mot::eval_boxes_from_scenario(scenario);
  debug("evaluating " + std::to_string(preds.size()) + " predictions against " +
        std::to_string(truths.size()) + " ground-truth boxes");

  const mot::EvalReport report = mot::evaluate(preds, truths, config.eval);
  const std::string text = mot::report_text(report);
  std::cout << text;

  config.paths.tracks = tracks;
  config.paths.scenario = gt;
  const nlohmann::ordered_json echo = mot::io::run_config_to_json(config);
  if (!opts.report_out.empty()) {
    std::ofstream out = open_output(opts.report_out);
    write_provenance(out, echo);
    out << text;
    info("wrote " + opts.report_out);
  }
  if (!opts.csv_out.empty()) {
    std::ofstream out = open_output(opts.csv_out);
    write_provenance(out, echo);
    out << mot::report_csv(report);
    info("wrote " + opts.csv_out);
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// plot-data

struct PlotOpts {
  std::vector<std::string> logs;
  std::vector<std::string> labels;
  std::string report;
  std::string out;
};

// Training logs become one labeled convergence series per file; an eval CSV
// becomes per-class recall/accuracy rows. Output is plain CSV for external
// plotting.
int cmd_plot_data(const PlotOpts& opts) {
  if (opts.logs.empty() == opts.report.empty()) {
    throw UsageError("pass training logs (--log) or a report CSV (--report)");
  }
  if (!opts.labels.empty() && opts.labels.size() != opts.logs.size()) {
    throw UsageError("one --label per --log is required");
  }
  const std::string out = require_path(opts.out, "an output path");

  nlohmann::ordered_json sources = nlohmann::ordered_json::array();
  for (const std::string& path : opts.logs) sources.push_back(path);
  if (!opts.report.empty()) sources.push_back(opts.report);
  nlohmann::ordered_json echo;
  echo["sources"] = std::move(sources);

  std::ofstream file = open_output(out);
  write_provenance(file, echo);

  if (!opts.logs.empty()) {
    file << "label,step,lr,loss,val_amota\n";
    for (size_t i = 0; i < opts.logs.size(); ++i) {
      const std::string label =
          i < opts.labels.size() ? opts.labels[i] : file_stem(opts.logs[i]);
      const std::vector<mot::TrainLogEntry> log =
          mot::io::read_training_log(opts.logs[i]);
      for (const mot::TrainLogEntry& entry : log) {
        file << label << "," << entry.step << "," << number_text(entry.lr)
             << ",";
        if (std::isfinite(entry.loss)) file << number_text(entry.loss);
        file << ",";
        if (entry.validated) file << number_text(entry.val_amota);
        file << "\n";
      }
    }
    std::cout << "wrote " << out << "\n";
    return kExitOk;
  }

  // Re-shape the eval CSV (class,recall_target,achievable,threshold,...)
  // into achievable recall/motar pairs.
  if (!std::filesystem::exists(opts.report)) {
    throw mot::io::FileMissingError(opts.report);
  }
  std::ifstream in(opts.report);
  if (!in) throw std::runtime_error("cannot read " + opts.report);
  file << "class,recall,motar\n";
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::stringstream row(line);
    std::string cell;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (!header_seen) {
      if (cells.size() < 9 || cells[0] != "class") {
        throw mot::io::SchemaError(opts.report, line_no, "class",
                                   "not an evaluation CSV header");
      }
      header_seen = true;
      continue;
    }
    if (cells.size() < 9) {
      throw mot::io::SchemaError(opts.report, line_no, "", "short row");
    }
    if (cells[2] != "1") continue;  // unachievable recall target
    file << cells[0] << "," << cells[1] << "," << cells[8] << "\n";
  }
  if (!header_seen) {
    throw mot::io::SchemaError(opts.report, line_no ? line_no : 1, "class",
                               "not an evaluation CSV");
  }
  std::cout << "wrote " << out << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"3D multi-object tracking toolkit"};
  app.set_version_flag("--version", tool_stamp());
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* simulate =
      app.add_subcommand("simulate", "generate a synthetic scenario file");
  simulate->add_option("--config", sim.config_path, "run configuration file");
  simulate->add_option("--out", sim.out, "scenario output path");
  simulate->add_option("--seed", sim.seed, "override the configured seed")
      ->each([&sim](const std::string&) { sim.seed_set = true; });

  TrainOpts train;
  CLI::App* train_cmd = app.add_subcommand(
      "train", "fit the gain network on scenario files");
  train_cmd->add_option("--config", train.config_path,
                        "run configuration file");
  train_cmd->add_option("--scenario", train.scenarios,
                        "training scenario file (repeatable)");
  train_cmd->add_option("--val-scenario", train.val_scenarios,
                        "validation scenario file (repeatable)");
  train_cmd->add_option("--checkpoint-out", train.checkpoint_out,
                        "checkpoint output path");
  train_cmd->add_option("--log-out", train.log_out,
                        "training log output path");

  TrackOpts track;
  CLI::App* track_cmd = app.add_subcommand(
      "track", "run the tracker over a scenario or detections file");
  track_cmd->add_option("--config", track.config_path,
                        "run configuration file");
  track_cmd->add_option("--input", track.input,
                        "scenario or detections file");
  track_cmd->add_option("--mode", track.mode, "motion module")
      ->check(CLI::IsMember({"ekf", "gkf"}));
  track_cmd->add_option("--checkpoint", track.checkpoint,
                        "gain-network checkpoint (gkf mode)");
  track_cmd->add_option("--out", track.out, "tracks output path");

  EvalOpts eval;
  CLI::App* eval_cmd = app.add_subcommand(
      "eval", "score a tracks file against scenario ground truth");
  eval_cmd->add_option("--config", eval.config_path, "run configuration file");
  eval_cmd->add_option("--tracks", eval.tracks, "tracks file");
  eval_cmd->add_option("--gt", eval.gt, "ground-truth scenario file");
  eval_cmd->add_option("--report", eval.report_out, "report text output path");
  eval_cmd->add_option("--csv", eval.csv_out, "per-threshold CSV output path");

  PlotOpts plot;
  CLI::App* plot_cmd = app.add_subcommand(
      "plot-data", "flatten training logs or an eval CSV into plot series");
  plot_cmd->add_option("--log", plot.logs, "training log file (repeatable)");
  plot_cmd->add_option("--label", plot.labels,
                       "series label, one per --log (default: file stem)");
  plot_cmd->add_option("--report", plot.report, "evaluation CSV file");
  plot_cmd->add_option("--out", plot.out, "CSV output path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(simulate)) return cmd_simulate(sim);
    if (app.got_subcommand(train_cmd)) return cmd_train(train);
    if (app.got_subcommand(track_cmd)) return cmd_track(track);
    if (app.got_subcommand(eval_cmd)) return cmd_eval(eval);
    if (app.got_subcommand(plot_cmd)) return cmd_plot_data(plot);
    throw UsageError("no subcommand");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const mot::io::FileMissingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitMissingFile;
  } catch (const mot::io::SchemaError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitSchema;
  } catch (const CheckpointMismatch& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitCheckpoint;
  } catch (const mot::io::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
}
