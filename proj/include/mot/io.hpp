#pragma once

#include <json.hpp>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mot/metrics.hpp"
#include "mot/simulator.hpp"
#include "mot/tracker.hpp"
#include "mot/trainer.hpp"
#include "mot/types.hpp"
#include "mot/version.hpp"

namespace mot::io {

// Line-delimited JSON files. The first line is a header carrying the file
// role, format version, tool version, and the effective configuration; every
// following line is one box. Units are meters, seconds, and radians; yaw is
// wrapped to [-pi, pi) at serialization. Box lines share one schema
//   {kind, frame, timestamp, class, x, y, z, w, l, h, yaw, vx, vy, score,
//    id?, annotated?}
// where `kind` is "gt", "det", or "trk"; `id` appears on ground-truth and
// track lines only, and `annotated` (default true) on ground-truth lines.
// Files written here parse back bit-exactly: write(read(f)) == f.

inline constexpr int kFormatVersion = 1;

inline constexpr const char* kScenarioFormat = "mot-scenario";
inline constexpr const char* kDetectionsFormat = "mot-detections";
inline constexpr const char* kTracksFormat = "mot-tracks";
inline constexpr const char* kTrainingLogFormat = "mot-training-log";

struct FileMissingError : std::runtime_error {
  explicit FileMissingError(const std::string& path)
      : std::runtime_error("missing file: " + path) {}
};

// Malformed file content. `line` is 1-based; `field` names the offending key
// (empty when the whole line is unreadable).
struct SchemaError : std::runtime_error {
  SchemaError(const std::string& path, int line_number,
              const std::string& field_name, const std::string& message)
      : std::runtime_error(path + ":" + std::to_string(line_number) +
                           ": field '" + field_name + "': " + message),
        line(line_number),
        field(field_name) {}
  int line;
  std::string field;
};

// Bad run configuration (unknown key, wrong type, invalid value). The
// message carries the dotted key path.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& message)
      : std::runtime_error("config: " + message) {}
};

struct FileHeader {
  std::string format;
  int version = kFormatVersion;
  std::string tool;
  nlohmann::json config;  // effective configuration echo
};

// Scenario files interleave ground-truth and detection lines per frame; the
// header embeds the generator seed and full scenario configuration, so the
// frame timeline (empty frames included) rebuilds from the header alone.
void write_scenario(const std::string& path, const Scenario& scenario);
Scenario read_scenario(const std::string& path, FileHeader* header = nullptr);

// Detection files carry the frame timeline in the header (one timestamp per
// frame) so frames without detections survive the round trip.
void write_detections(const std::string& path,
                      const std::vector<std::vector<DetectionBox>>& frames,
                      const std::vector<double>& timestamps,
                      const nlohmann::ordered_json& config_echo);

struct DetectionStream {
  std::vector<std::vector<DetectionBox>> frames;
  std::vector<double> timestamps;
};

// Accepts a detections file or a scenario file (whose detection lines are
// used); the tracker consumes either.
DetectionStream read_detection_input(const std::string& path,
                                     FileHeader* header = nullptr);

void write_tracks(const std::string& path, const TrackResult& result,
                  const nlohmann::ordered_json& config_echo);

struct TrackEntry {
  int frame_index = 0;
  double timestamp = 0.0;
  int id = 0;
  int class_id = 0;
  Box3D box;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double score = 1.0;
};

std::vector<TrackEntry> read_tracks(const std::string& path,
                                    FileHeader* header = nullptr);

std::vector<EvalBox> eval_boxes_from_entries(
    const std::vector<TrackEntry>& entries);

// Scenario configuration echo used in scenario headers.
nlohmann::ordered_json scenario_config_to_json(const ScenarioConfig& config,
                                               std::uint64_t seed);
std::pair<ScenarioConfig, std::uint64_t> scenario_config_from_json(
    const nlohmann::json& echo);

// Optional default artifact paths; command-line flags take precedence.
struct PathsConfig {
  std::string scenario;
  std::string detections;
  std::string checkpoint;
  std::string tracks;
  std::string report;
  std::string log;
};

// Whole-pipeline configuration, grouped by module in the file. Unknown keys
// are rejected at every level and all values are validated at load; the
// scenario's object list may come from a named preset ("preset" and
// "objects" are mutually exclusive).
struct RunConfig {
  std::uint64_t seed = 1;
  MotionMode motion_mode = MotionMode::kEkf;
  TrackerConfig tracker;
  std::string scenario_preset = "crossing";  // empty when objects are explicit
  ScenarioConfig scenario;                   // objects resolved at load
  int hidden_cap = 200;                      // gain-network width ceiling
  TrainerConfig trainer;  // tracker/eval/seed mirrored from the fields above
  EvalConfig eval;
  PathsConfig paths;
};

RunConfig run_config_from_json(const nlohmann::json& root);
nlohmann::ordered_json run_config_to_json(const RunConfig& config);
RunConfig load_run_config(const std::string& path);

// The trainer config with the shared tracker, eval, and seed filled in.
TrainerConfig effective_trainer_config(const RunConfig& config);

// Training log: header line, then one JSON object per optimizer step
// (non-finite losses serialize as null).
void write_training_log(const std::string& path,
                        const std::vector<TrainLogEntry>& log,
                        const nlohmann::ordered_json& config_echo);
std::vector<TrainLogEntry> read_training_log(const std::string& path,
                                             FileHeader* header = nullptr);

}  // namespace mot::io
