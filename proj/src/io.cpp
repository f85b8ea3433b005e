#include "mot/io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <utility>

#include "mot/angles.hpp"

namespace mot::io {

namespace {

using ojson = nlohmann::ordered_json;

std::string tool_stamp() {
  return std::string(kToolName) + " " + kToolVersion;
}

// ---------------------------------------------------------------------------
// Strict JSON object access. Every getter records its key; finish() rejects
// whatever was never asked for, so typos surface instead of being ignored.
// `where` is the dotted path of the object for error messages.

class StrictObject {
 public:
  StrictObject(const nlohmann::json& obj, std::string where)
      : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail("", "must be an object");
  }

  bool has(const char* key) const { return obj_.contains(key); }

  double number(const char* key, double fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }

  long long integer(const char* key, long long fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      fail(key, "must be an integer");
    }
    return v.get<long long>();
  }

  std::uint64_t unsigned_integer(const char* key, std::uint64_t fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    const auto& v = obj_.at(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<long long>() >= 0) {
      return static_cast<std::uint64_t>(v.get<long long>());
    }
    fail(key, "must be a non-negative integer");
    return fallback;
  }

  bool boolean(const char* key, bool fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "must be a boolean");
    return v.get<bool>();
  }

  std::string text(const char* key, const std::string& fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  const nlohmann::json* child(const char* key) {
    used_.insert(key);
    if (!obj_.contains(key)) return nullptr;
    const auto& v = obj_.at(key);
    if (!v.is_object()) fail(key, "must be an object");
    return &v;
  }

  const nlohmann::json* array(const char* key) {
    used_.insert(key);
    if (!obj_.contains(key)) return nullptr;
    const auto& v = obj_.at(key);
    if (!v.is_array()) fail(key, "must be an array");
    return &v;
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw ConfigError("unknown key '" + join(it.key()) + "'");
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw ConfigError("field '" + join(key) + "': " + what);
  }

  std::string join(const std::string& key) const {
    if (key.empty()) return where_;
    return where_.empty() ? key : where_ + "." + key;
  }

 private:
  const nlohmann::json& obj_;
  std::string where_;
  std::set<std::string> used_;
};

// ---------------------------------------------------------------------------
// File plumbing.

std::vector<std::string> read_lines(const std::string& path) {
  if (!std::filesystem::exists(path)) throw FileMissingError(path);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

ojson parse_json_line(const std::string& path, int line_no,
                      const std::string& text) {
  ojson v = ojson::parse(text, nullptr, false);
  if (v.is_discarded() || !v.is_object()) {
    throw SchemaError(path, line_no, "", "not a JSON object");
  }
  return v;
}

// Header line: {format, version, tool, config} plus an optional extra key
// (the detections timeline). Returns the parsed header; `extra` receives the
// named key's value when present.
FileHeader parse_header(const std::string& path,
                        const std::vector<std::string>& lines,
                        const char* expected_format,
                        const char* extra_key = nullptr,
                        nlohmann::json* extra = nullptr) {
  if (lines.empty()) throw SchemaError(path, 1, "format", "missing header");
  const ojson h = parse_json_line(path, 1, lines[0]);
  FileHeader header;
  std::set<std::string> allowed = {"format", "version", "tool", "config"};
  if (extra_key) allowed.insert(extra_key);
  // A format probe (no expected format) must get past a detections header
  // without tripping on its timeline.
  if (!expected_format) allowed.insert("timeline");
  for (auto it = h.begin(); it != h.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw SchemaError(path, 1, it.key(), "unknown header field");
    }
  }
  if (!h.contains("format") || !h.at("format").is_string()) {
    throw SchemaError(path, 1, "format", "missing or not a string");
  }
  header.format = h.at("format").get<std::string>();
  if (expected_format && header.format != expected_format) {
    throw SchemaError(path, 1, "format",
                      "expected " + std::string(expected_format) + ", found " +
                          header.format);
  }
  if (!h.contains("version") || !h.at("version").is_number_integer()) {
    throw SchemaError(path, 1, "version", "missing or not an integer");
  }
  header.version = h.at("version").get<int>();
  if (header.version != kFormatVersion) {
    throw SchemaError(path, 1, "version",
                      "unsupported version " + std::to_string(header.version));
  }
  if (!h.contains("tool") || !h.at("tool").is_string()) {
    throw SchemaError(path, 1, "tool", "missing or not a string");
  }
  header.tool = h.at("tool").get<std::string>();
  if (!h.contains("config") || !h.at("config").is_object()) {
    throw SchemaError(path, 1, "config", "missing or not an object");
  }
  header.config = h.at("config");
  if (extra_key && extra) {
    *extra = h.contains(extra_key) ? nlohmann::json(h.at(extra_key))
                                   : nlohmann::json();
  }
  return header;
}

// ---------------------------------------------------------------------------
// Box lines.

enum class LineKind { kGroundTruth, kDetection, kTrack };

struct BoxLine {
  LineKind kind = LineKind::kDetection;
  int frame = 0;
  double timestamp = 0.0;
  int class_id = 0;
  Box3D box;
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double score = 1.0;      // detection and track lines
  long long id = 0;        // ground-truth and track lines
  bool annotated = true;   // ground-truth lines
};

// Canonical field order; score, id, and annotated appear only where they
// mean something.
ojson box_line_json(const char* kind, int frame, double timestamp,
                    int class_id, const Box3D& box,
                    const Eigen::Vector2d& velocity) {
  ojson o;
  o["kind"] = kind;
  o["frame"] = frame;
  o["timestamp"] = timestamp;
  o["class"] = class_id;
  o["x"] = box.center.x();
  o["y"] = box.center.y();
  o["z"] = box.center.z();
  o["w"] = box.size.x();
  o["l"] = box.size.y();
  o["h"] = box.size.z();
  o["yaw"] = wrap_angle(box.yaw);
  o["vx"] = velocity.x();
  o["vy"] = velocity.y();
  return o;
}

class LineScanner {
 public:
  LineScanner(const std::string& path, int line_no, const ojson& obj)
      : path_(path), line_(line_no), obj_(obj) {}

  std::string required_string(const char* key) {
    const auto& v = require(key);
    if (!v.is_string()) fail(key, "must be a string");
    return v.get<std::string>();
  }

  int required_index(const char* key) {
    const auto& v = require(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      fail(key, "must be an integer");
    }
    const long long n = v.get<long long>();
    if (n < 0) fail(key, "must be non-negative");
    if (n > std::numeric_limits<int>::max()) fail(key, "out of range");
    return static_cast<int>(n);
  }

  long long required_integer(const char* key) {
    const auto& v = require(key);
    if (!v.is_number_integer() && !v.is_number_unsigned()) {
      fail(key, "must be an integer");
    }
    return v.get<long long>();
  }

  double required_number(const char* key) {
    const auto& v = require(key);
    if (!v.is_number()) fail(key, "must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(key, "must be finite");
    return d;
  }

  // null means "not a number" (a diverged loss); reads back as NaN.
  double nullable_number(const char* key) {
    const auto& v = require(key);
    if (v.is_null()) return std::numeric_limits<double>::quiet_NaN();
    if (!v.is_number()) fail(key, "must be a number or null");
    return v.get<double>();
  }

  double positive_number(const char* key) {
    const double d = required_number(key);
    if (d <= 0.0) fail(key, "must be positive");
    return d;
  }

  double unit_interval(const char* key) {
    const double d = required_number(key);
    if (d < 0.0 || d > 1.0) fail(key, "must be within [0, 1]");
    return d;
  }

  bool optional_boolean(const char* key, bool fallback) {
    used_.insert(key);
    if (!obj_.contains(key)) return fallback;
    const auto& v = obj_.at(key);
    if (!v.is_boolean()) fail(key, "must be a boolean");
    return v.get<bool>();
  }

  void forbid(const char* key, const char* why) {
    if (obj_.contains(key)) fail(key, why);
  }

  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!used_.count(it.key())) {
        throw SchemaError(path_, line_, it.key(), "unknown field");
      }
    }
  }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    throw SchemaError(path_, line_, key, what);
  }

 private:
  const ojson& require(const char* key) {
    used_.insert(key);
    if (!obj_.contains(key)) fail(key, "missing");
    return obj_.at(key);
  }

  std::string path_;
  int line_;
  const ojson& obj_;
  std::set<std::string> used_;
};

// Parses and validates one box line. `role` limits which kinds are legal in
// this file.
BoxLine parse_box_line(const std::string& path, int line_no,
                       const std::string& text, const char* role) {
  const ojson obj = parse_json_line(path, line_no, text);
  LineScanner scan(path, line_no, obj);

  BoxLine out;
  const std::string kind = scan.required_string("kind");
  if (kind == "gt") {
    out.kind = LineKind::kGroundTruth;
  } else if (kind == "det") {
    out.kind = LineKind::kDetection;
  } else if (kind == "trk") {
    out.kind = LineKind::kTrack;
  } else {
    scan.fail("kind", "unknown kind '" + kind + "'");
  }
  const bool allowed =
      (std::string(role) == kScenarioFormat &&
       out.kind != LineKind::kTrack) ||
      (std::string(role) == kDetectionsFormat &&
       out.kind == LineKind::kDetection) ||
      (std::string(role) == kTracksFormat && out.kind == LineKind::kTrack);
  if (!allowed) {
    scan.fail("kind", "'" + kind + "' lines are not allowed in " +
                          std::string(role) + " files");
  }

  out.frame = scan.required_index("frame");
  out.timestamp = scan.required_number("timestamp");
  out.class_id = scan.required_index("class");

  const double x = scan.required_number("x");
  const double y = scan.required_number("y");
  const double z = scan.required_number("z");
  const double w = scan.positive_number("w");
  const double l = scan.positive_number("l");
  const double h = scan.positive_number("h");
  const double yaw = scan.required_number("yaw");
  out.box = Box3D(Eigen::Vector3d(x, y, z), Eigen::Vector3d(w, l, h), yaw);
  out.velocity = Eigen::Vector2d(scan.required_number("vx"),
                                 scan.required_number("vy"));

  if (out.kind == LineKind::kGroundTruth) {
    scan.forbid("score", "not allowed on ground-truth lines");
    out.id = scan.required_integer("id");
    out.annotated = scan.optional_boolean("annotated", true);
  } else {
    out.score = scan.unit_interval("score");
    scan.forbid("annotated", "only allowed on ground-truth lines");
    if (out.kind == LineKind::kTrack) {
      out.id = scan.required_integer("id");
    } else {
      scan.forbid("id", "not allowed on detection lines");
    }
  }
  scan.finish();
  return out;
}

void write_header(std::ofstream& out, const char* format, const ojson& config,
                  const ojson* timeline = nullptr) {
  ojson h;
  h["format"] = format;
  h["version"] = kFormatVersion;
  h["tool"] = tool_stamp();
  if (timeline) h["timeline"] = *timeline;
  h["config"] = config;
  out << h.dump() << "\n";
}

// ---------------------------------------------------------------------------
// Scenario configuration echo.

ojson noise_to_json(const NoiseSpec& noise) {
  ojson n;
  n["mode"] = to_string(noise.mode);
  n["position_scale"] = noise.position_scale;
  n["size_scale"] = noise.size_scale;
  n["heading_scale"] = noise.heading_scale;
  n["student_t_dof"] = noise.student_t_dof;
  n["outlier_probability"] = noise.outlier_probability;
  n["outlier_scale"] = noise.outlier_scale;
  n["drop_probability"] = noise.drop_probability;
  n["false_positive_rate"] = noise.false_positive_rate;
  n["score_jitter"] = noise.score_jitter;
  return n;
}

NoiseSpec noise_from_json(const nlohmann::json& obj, const std::string& where) {
  NoiseSpec noise;
  StrictObject s(obj, where);
  const std::string mode = s.text("mode", to_string(noise.mode));
  try {
    noise.mode = noise_mode_from_string(mode);
  } catch (const std::invalid_argument& e) {
    s.fail("mode", e.what());
  }
  noise.position_scale = s.number("position_scale", noise.position_scale);
  noise.size_scale = s.number("size_scale", noise.size_scale);
  noise.heading_scale = s.number("heading_scale", noise.heading_scale);
  noise.student_t_dof = s.number("student_t_dof", noise.student_t_dof);
  noise.outlier_probability =
      s.number("outlier_probability", noise.outlier_probability);
  noise.outlier_scale = s.number("outlier_scale", noise.outlier_scale);
  noise.drop_probability = s.number("drop_probability", noise.drop_probability);
  noise.false_positive_rate =
      s.number("false_positive_rate", noise.false_positive_rate);
  noise.score_jitter = s.number("score_jitter", noise.score_jitter);
  s.finish();
  return noise;
}

ojson objects_to_json(const std::vector<ObjectSpec>& objects) {
  ojson arr = ojson::array();
  for (const ObjectSpec& spec : objects) {
    ojson o;
    o["kind"] = to_string(spec.kind);
    o["class"] = spec.class_id;
    ojson state = ojson::array();
    for (int i = 0; i < spec.initial_state.size(); ++i) {
      state.push_back(spec.initial_state[i]);
    }
    o["initial_state"] = std::move(state);
    arr.push_back(std::move(o));
  }
  return arr;
}

std::vector<ObjectSpec> objects_from_json(const nlohmann::json& arr,
                                          const std::string& where) {
  std::vector<ObjectSpec> objects;
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string at = where + "[" + std::to_string(i) + "]";
    StrictObject s(arr[i], at);
    ObjectSpec spec;
    const std::string kind = s.text("kind", to_string(spec.kind));
    try {
      spec.kind = motion_kind_from_string(kind);
    } catch (const std::invalid_argument& e) {
      s.fail("kind", e.what());
    }
    spec.class_id = static_cast<int>(s.integer("class", 0));
    const nlohmann::json* state = s.array("initial_state");
    if (!state) s.fail("initial_state", "missing");
    spec.initial_state.resize(static_cast<int>(state->size()));
    for (size_t k = 0; k < state->size(); ++k) {
      const auto& v = (*state)[k];
      if (!v.is_number() || !std::isfinite(v.get<double>())) {
        s.fail("initial_state", "entries must be finite numbers");
      }
      spec.initial_state[static_cast<int>(k)] = v.get<double>();
    }
    s.finish();
    objects.push_back(std::move(spec));
  }
  return objects;
}

// Scenario body: frame_count, dt, start_time, annotation_coverage,
// bicycle_beta, noise, and either explicit objects or a preset name.
ojson scenario_body_to_json(const ScenarioConfig& config,
                            const std::string& preset) {
  ojson s;
  if (!preset.empty()) s["preset"] = preset;
  s["frame_count"] = config.frame_count;
  s["dt"] = config.dt;
  s["start_time"] = config.start_time;
  s["annotation_coverage"] = config.annotation_coverage;
  s["bicycle_beta"] = config.bicycle_beta;
  s["noise"] = noise_to_json(config.noise);
  if (preset.empty()) s["objects"] = objects_to_json(config.objects);
  return s;
}

// Returns the preset name when objects came from one (empty for explicit
// object lists).
std::string scenario_body_from_json(const nlohmann::json& obj,
                                    const std::string& where,
                                    ScenarioConfig& config) {
  StrictObject s(obj, where);
  config.frame_count =
      static_cast<int>(s.integer("frame_count", config.frame_count));
  config.dt = s.number("dt", config.dt);
  config.start_time = s.number("start_time", config.start_time);
  config.annotation_coverage =
      s.number("annotation_coverage", config.annotation_coverage);
  config.bicycle_beta = s.number("bicycle_beta", config.bicycle_beta);
  if (const nlohmann::json* noise = s.child("noise")) {
    config.noise = noise_from_json(*noise, where + ".noise");
  }
  std::string preset = s.text("preset", "");
  const nlohmann::json* objects = s.array("objects");
  if (!preset.empty() && objects) {
    s.fail("preset", "'preset' and 'objects' are mutually exclusive");
  }
  if (objects) {
    config.objects = objects_from_json(*objects, where + ".objects");
  } else {
    if (preset.empty()) preset = "crossing";
    try {
      config.objects = preset_objects(preset);
    } catch (const std::invalid_argument& e) {
      s.fail("preset", e.what());
    }
  }
  s.finish();
  return preset;
}

double frame_time(const ScenarioConfig& config, int frame) {
  return config.start_time + frame * config.dt;
}

// ---------------------------------------------------------------------------
// Run configuration groups.

TrackerConfig tracker_from_json(const nlohmann::json& obj,
                                const std::string& where) {
  TrackerConfig c;
  StrictObject s(obj, where);
  const std::string motion = s.text("motion", to_string(c.motion));
  try {
    c.motion = motion_kind_from_string(motion);
  } catch (const std::invalid_argument& e) {
    s.fail("motion", e.what());
  }
  c.bicycle_beta = s.number("bicycle_beta", c.bicycle_beta);
  c.score_threshold = s.number("score_threshold", c.score_threshold);
  c.nms_threshold = s.number("nms_threshold", c.nms_threshold);
  c.tau1 = s.number("tau1", c.tau1);
  c.tau2 = s.number("tau2", c.tau2);
  c.greedy_assignment = s.boolean("greedy_assignment", c.greedy_assignment);
  c.lambda = s.number("lambda", c.lambda);
  c.delete_confidence = s.number("delete_confidence", c.delete_confidence);
  c.max_coast = static_cast<int>(s.integer("max_coast", c.max_coast));
  c.hit_min = static_cast<int>(s.integer("hit_min", c.hit_min));
  c.birth_threshold = s.number("birth_threshold", c.birth_threshold);
  c.heading_flip = s.boolean("heading_flip", c.heading_flip);
  c.default_dt = s.number("default_dt", c.default_dt);
  s.finish();
  return c;
}

ojson tracker_to_json(const TrackerConfig& c) {
  ojson t;
  t["motion"] = to_string(c.motion);
  t["bicycle_beta"] = c.bicycle_beta;
  t["score_threshold"] = c.score_threshold;
  t["nms_threshold"] = c.nms_threshold;
  t["tau1"] = c.tau1;
  t["tau2"] = c.tau2;
  t["greedy_assignment"] = c.greedy_assignment;
  t["lambda"] = c.lambda;
  t["delete_confidence"] = c.delete_confidence;
  t["max_coast"] = c.max_coast;
  t["hit_min"] = c.hit_min;
  t["birth_threshold"] = c.birth_threshold;
  t["heading_flip"] = c.heading_flip;
  t["default_dt"] = c.default_dt;
  return t;
}

TrainerConfig trainer_from_json(const nlohmann::json& obj,
                                const std::string& where) {
  TrainerConfig c;
  StrictObject s(obj, where);
  const std::string mode = s.text("mode", to_string(c.mode));
  try {
    c.mode = train_mode_from_string(mode);
  } catch (const std::invalid_argument& e) {
    s.fail("mode", e.what());
  }
  c.epochs = static_cast<int>(s.integer("epochs", c.epochs));
  c.learning_rate = s.number("learning_rate", c.learning_rate);
  c.min_learning_rate = s.number("min_learning_rate", c.min_learning_rate);
  c.weight_decay = s.number("weight_decay", c.weight_decay);
  c.clip_norm = s.number("clip_norm", c.clip_norm);
  c.loss.huber = s.boolean("huber", c.loss.huber);
  c.loss.huber_delta = s.number("huber_delta", c.loss.huber_delta);
  c.loss.pseudo_label_weight =
      s.number("pseudo_label_weight", c.loss.pseudo_label_weight);
  c.annotation_gate = s.number("annotation_gate", c.annotation_gate);
  c.validation_interval = static_cast<int>(
      s.integer("validation_interval", c.validation_interval));
  c.max_restores = static_cast<int>(s.integer("max_restores", c.max_restores));
  s.finish();
  return c;
}

ojson trainer_to_json(const TrainerConfig& c) {
  ojson t;
  t["mode"] = to_string(c.mode);
  t["epochs"] = c.epochs;
  t["learning_rate"] = c.learning_rate;
  t["min_learning_rate"] = c.min_learning_rate;
  t["weight_decay"] = c.weight_decay;
  t["clip_norm"] = c.clip_norm;
  t["huber"] = c.loss.huber;
  t["huber_delta"] = c.loss.huber_delta;
  t["pseudo_label_weight"] = c.loss.pseudo_label_weight;
  t["annotation_gate"] = c.annotation_gate;
  t["validation_interval"] = c.validation_interval;
  t["max_restores"] = c.max_restores;
  return t;
}

EvalConfig eval_from_json(const nlohmann::json& obj, const std::string& where) {
  EvalConfig c;
  StrictObject s(obj, where);
  c.dist_gate = s.number("dist_gate", c.dist_gate);
  c.recall_levels =
      static_cast<int>(s.integer("recall_levels", c.recall_levels));
  s.finish();
  return c;
}

PathsConfig paths_from_json(const nlohmann::json& obj,
                            const std::string& where) {
  PathsConfig p;
  StrictObject s(obj, where);
  p.scenario = s.text("scenario", "");
  p.detections = s.text("detections", "");
  p.checkpoint = s.text("checkpoint", "");
  p.tracks = s.text("tracks", "");
  p.report = s.text("report", "");
  p.log = s.text("log", "");
  s.finish();
  return p;
}

}  // namespace

// ---------------------------------------------------------------------------
// Scenario files.

void write_scenario(const std::string& path, const Scenario& scenario) {
  std::ofstream out = open_output(path);
  write_header(out, kScenarioFormat,
               scenario_config_to_json(scenario.config, scenario.seed));
  for (const ScenarioFrame& frame : scenario.frames) {
    for (size_t i = 0; i < frame.ground_truth.size(); ++i) {
      const AnnotationBox& gt = frame.ground_truth[i];
      ojson line = box_line_json("gt", frame.frame_index, frame.timestamp,
                                 gt.class_id, gt.box, gt.velocity);
      line["id"] = gt.instance_id;
      line["annotated"] =
          i < frame.annotated.size() ? frame.annotated[i] != 0 : true;
      out << line.dump() << "\n";
    }
    for (const DetectionBox& det : frame.detections) {
      ojson line = box_line_json("det", frame.frame_index, frame.timestamp,
                                 det.class_id, det.box, det.velocity);
      line["score"] = det.score;
      out << line.dump() << "\n";
    }
  }
}

Scenario read_scenario(const std::string& path, FileHeader* header) {
  const std::vector<std::string> lines = read_lines(path);
  FileHeader h = parse_header(path, lines, kScenarioFormat);

  Scenario scenario;
  try {
    auto [config, seed] = scenario_config_from_json(h.config);
    validate(config);
    scenario.config = std::move(config);
    scenario.seed = seed;
  } catch (const ConfigError& e) {
    throw SchemaError(path, 1, "config", e.what());
  } catch (const std::invalid_argument& e) {
    throw SchemaError(path, 1, "config", e.what());
  }

  scenario.frames.resize(scenario.config.frame_count);
  for (int f = 0; f < scenario.config.frame_count; ++f) {
    scenario.frames[f].frame_index = f;
    scenario.frames[f].timestamp = frame_time(scenario.config, f);
  }

  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const BoxLine line =
        parse_box_line(path, line_no, lines[i], kScenarioFormat);
    if (line.frame >= scenario.config.frame_count) {
      throw SchemaError(path, line_no, "frame",
                        "outside the configured frame range");
    }
    ScenarioFrame& frame = scenario.frames[line.frame];
    if (line.timestamp != frame.timestamp) {
      throw SchemaError(path, line_no, "timestamp",
                        "disagrees with the frame's timestamp");
    }
    if (line.kind == LineKind::kGroundTruth) {
      AnnotationBox gt;
      gt.box = line.box;
      gt.velocity = line.velocity;
      gt.instance_id = static_cast<int>(line.id);
      gt.class_id = line.class_id;
      gt.frame_index = line.frame;
      frame.ground_truth.push_back(std::move(gt));
      frame.annotated.push_back(line.annotated ? 1 : 0);
    } else {
      DetectionBox det;
      det.box = line.box;
      det.velocity = line.velocity;
      det.score = line.score;
      det.class_id = line.class_id;
      det.frame_index = line.frame;
      det.timestamp = line.timestamp;
      frame.detections.push_back(std::move(det));
    }
  }
  if (header) *header = std::move(h);
  return scenario;
}

// ---------------------------------------------------------------------------
// Detection files.

void write_detections(const std::string& path,
                      const std::vector<std::vector<DetectionBox>>& frames,
                      const std::vector<double>& timestamps,
                      const nlohmann::ordered_json& config_echo) {
  if (frames.size() != timestamps.size()) {
    throw std::invalid_argument("one timestamp per frame is required");
  }
  std::ofstream out = open_output(path);
  ojson timeline = ojson::array();
  for (const double t : timestamps) timeline.push_back(t);
  write_header(out, kDetectionsFormat, config_echo, &timeline);
  for (size_t f = 0; f < frames.size(); ++f) {
    for (const DetectionBox& det : frames[f]) {
      ojson line = box_line_json("det", static_cast<int>(f), timestamps[f],
                                 det.class_id, det.box, det.velocity);
      line["score"] = det.score;
      out << line.dump() << "\n";
    }
  }
}

DetectionStream read_detection_input(const std::string& path,
                                     FileHeader* header) {
  const std::vector<std::string> lines = read_lines(path);
  FileHeader probe = parse_header(path, lines, nullptr);

  if (probe.format == kScenarioFormat) {
    const Scenario scenario = read_scenario(path, header);
    DetectionStream stream;
    stream.frames.reserve(scenario.frames.size());
    stream.timestamps.reserve(scenario.frames.size());
    for (const ScenarioFrame& frame : scenario.frames) {
      stream.frames.push_back(frame.detections);
      stream.timestamps.push_back(frame.timestamp);
    }
    return stream;
  }
  if (probe.format != kDetectionsFormat) {
    throw SchemaError(path, 1, "format",
                      "expected " + std::string(kScenarioFormat) + " or " +
                          std::string(kDetectionsFormat) + ", found " +
                          probe.format);
  }

  nlohmann::json timeline;
  FileHeader h =
      parse_header(path, lines, kDetectionsFormat, "timeline", &timeline);
  if (!timeline.is_array()) {
    throw SchemaError(path, 1, "timeline", "missing or not an array");
  }
  DetectionStream stream;
  for (const auto& t : timeline) {
    if (!t.is_number() || !std::isfinite(t.get<double>())) {
      throw SchemaError(path, 1, "timeline", "entries must be finite numbers");
    }
    stream.timestamps.push_back(t.get<double>());
  }
  stream.frames.resize(stream.timestamps.size());

  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const BoxLine line =
        parse_box_line(path, line_no, lines[i], kDetectionsFormat);
    if (line.frame >= static_cast<int>(stream.frames.size())) {
      throw SchemaError(path, line_no, "frame", "outside the timeline");
    }
    if (line.timestamp != stream.timestamps[line.frame]) {
      throw SchemaError(path, line_no, "timestamp",
                        "disagrees with the timeline");
    }
    DetectionBox det;
    det.box = line.box;
    det.velocity = line.velocity;
    det.score = line.score;
    det.class_id = line.class_id;
    det.frame_index = line.frame;
    det.timestamp = line.timestamp;
    stream.frames[line.frame].push_back(std::move(det));
  }
  if (header) *header = std::move(h);
  return stream;
}

// ---------------------------------------------------------------------------
// Track files.

void write_tracks(const std::string& path, const TrackResult& result,
                  const nlohmann::ordered_json& config_echo) {
  // Frame-major, then by id: the natural reading order for evaluation.
  struct Sample {
    int id;
    int class_id;
    const TrackOutputBox* out;
  };
  std::vector<Sample> entries;
  for (const Trajectory& track : result.tracks) {
    for (const TrackOutputBox& out : track.history) {
      entries.push_back({track.id, track.class_id, &out});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Sample& a, const Sample& b) {
    if (a.out->frame_index != b.out->frame_index) {
      return a.out->frame_index < b.out->frame_index;
    }
    return a.id < b.id;
  });

  std::ofstream out = open_output(path);
  write_header(out, kTracksFormat, config_echo);
  for (const Sample& sample : entries) {
    ojson line =
        box_line_json("trk", sample.out->frame_index, sample.out->timestamp,
                      sample.class_id, sample.out->box, sample.out->velocity);
    line["score"] = sample.out->confidence;
    line["id"] = sample.id;
    out << line.dump() << "\n";
  }
}

std::vector<TrackEntry> read_tracks(const std::string& path,
                                    FileHeader* header) {
  const std::vector<std::string> lines = read_lines(path);
  FileHeader h = parse_header(path, lines, kTracksFormat);

  std::vector<TrackEntry> entries;
  std::set<std::pair<int, long long>> seen;
  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const BoxLine line = parse_box_line(path, line_no, lines[i], kTracksFormat);
    if (!seen.insert({line.frame, line.id}).second) {
      throw SchemaError(path, line_no, "id", "duplicate id in frame " +
                                                 std::to_string(line.frame));
    }
    TrackEntry entry;
    entry.frame_index = line.frame;
    entry.timestamp = line.timestamp;
    entry.id = static_cast<int>(line.id);
    entry.class_id = line.class_id;
    entry.box = line.box;
    entry.velocity = line.velocity;
    entry.score = line.score;
    entries.push_back(std::move(entry));
  }
  if (header) *header = std::move(h);
  return entries;
}

std::vector<EvalBox> eval_boxes_from_entries(
    const std::vector<TrackEntry>& entries) {
  std::vector<EvalBox> boxes;
  boxes.reserve(entries.size());
  for (const TrackEntry& entry : entries) {
    EvalBox box;
    box.frame_index = entry.frame_index;
    box.id = entry.id;
    box.class_id = entry.class_id;
    box.box = entry.box;
    box.score = entry.score;
    boxes.push_back(box);
  }
  return boxes;
}

// ---------------------------------------------------------------------------
// Configuration echoes.

nlohmann::ordered_json scenario_config_to_json(const ScenarioConfig& config,
                                               std::uint64_t seed) {
  ojson root;
  root["seed"] = seed;
  root["scenario"] = scenario_body_to_json(config, "");
  return root;
}

std::pair<ScenarioConfig, std::uint64_t> scenario_config_from_json(
    const nlohmann::json& echo) {
  StrictObject s(echo, "");
  const std::uint64_t seed = s.unsigned_integer("seed", 0);
  ScenarioConfig config;
  if (const nlohmann::json* body = s.child("scenario")) {
    scenario_body_from_json(*body, "scenario", config);
  } else {
    s.fail("scenario", "missing");
  }
  s.finish();
  return {std::move(config), seed};
}

RunConfig run_config_from_json(const nlohmann::json& root) {
  RunConfig config;
  StrictObject s(root, "");
  config.seed = s.unsigned_integer("seed", config.seed);
  const std::string mode = s.text("motion_mode", to_string(config.motion_mode));
  try {
    config.motion_mode = motion_mode_from_string(mode);
  } catch (const std::invalid_argument& e) {
    s.fail("motion_mode", e.what());
  }
  if (const nlohmann::json* tracker = s.child("tracker")) {
    config.tracker = tracker_from_json(*tracker, "tracker");
  }
  if (const nlohmann::json* scenario = s.child("scenario")) {
    config.scenario_preset =
        scenario_body_from_json(*scenario, "scenario", config.scenario);
  } else {
    config.scenario.objects = preset_objects(config.scenario_preset);
  }
  if (const nlohmann::json* network = s.child("network")) {
    StrictObject n(*network, "network");
    config.hidden_cap =
        static_cast<int>(n.integer("hidden_cap", config.hidden_cap));
    if (config.hidden_cap < 1) n.fail("hidden_cap", "must be positive");
    n.finish();
  }
  if (const nlohmann::json* trainer = s.child("trainer")) {
    config.trainer = trainer_from_json(*trainer, "trainer");
  }
  if (const nlohmann::json* eval = s.child("eval")) {
    config.eval = eval_from_json(*eval, "eval");
  }
  if (const nlohmann::json* paths = s.child("paths")) {
    config.paths = paths_from_json(*paths, "paths");
  }
  s.finish();

  try {
    validate(config.tracker);
    validate(config.scenario);
    validate(config.eval);
    validate(effective_trainer_config(config));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return config;
}

nlohmann::ordered_json run_config_to_json(const RunConfig& config) {
  ojson root;
  root["seed"] = config.seed;
  root["motion_mode"] = to_string(config.motion_mode);
  root["tracker"] = tracker_to_json(config.tracker);
  root["scenario"] =
      scenario_body_to_json(config.scenario, config.scenario_preset);
  ojson network;
  network["hidden_cap"] = config.hidden_cap;
  root["network"] = std::move(network);
  root["trainer"] = trainer_to_json(config.trainer);
  ojson eval;
  eval["dist_gate"] = config.eval.dist_gate;
  eval["recall_levels"] = config.eval.recall_levels;
  root["eval"] = std::move(eval);
  ojson paths;
  if (!config.paths.scenario.empty()) paths["scenario"] = config.paths.scenario;
  if (!config.paths.detections.empty()) {
    paths["detections"] = config.paths.detections;
  }
  if (!config.paths.checkpoint.empty()) {
    paths["checkpoint"] = config.paths.checkpoint;
  }
  if (!config.paths.tracks.empty()) paths["tracks"] = config.paths.tracks;
  if (!config.paths.report.empty()) paths["report"] = config.paths.report;
  if (!config.paths.log.empty()) paths["log"] = config.paths.log;
  if (!paths.empty()) root["paths"] = std::move(paths);
  return root;
}

RunConfig load_run_config(const std::string& path) {
  if (!std::filesystem::exists(path)) throw FileMissingError(path);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  nlohmann::json doc = nlohmann::json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw ConfigError(path + ": not a JSON object");
  }
  return run_config_from_json(doc);
}

TrainerConfig effective_trainer_config(const RunConfig& config) {
  TrainerConfig trainer = config.trainer;
  trainer.tracker = config.tracker;
  trainer.eval = config.eval;
  trainer.seed = config.seed;
  return trainer;
}

// ---------------------------------------------------------------------------
// Training logs.

void write_training_log(const std::string& path,
                        const std::vector<TrainLogEntry>& log,
                        const nlohmann::ordered_json& config_echo) {
  std::ofstream out = open_output(path);
  write_header(out, kTrainingLogFormat, config_echo);
  for (const TrainLogEntry& entry : log) {
    ojson line;
    line["step"] = entry.step;
    line["lr"] = entry.lr;
    line["loss"] = entry.loss;  // non-finite serializes as null
    line["annotation_term"] = entry.annotation_term;
    line["pseudo_term"] = entry.pseudo_term;
    line["coverage"] = entry.coverage;
    line["uncovered"] = entry.uncovered;
    line["stepped"] = entry.stepped;
    line["restored"] = entry.restored;
    line["validated"] = entry.validated;
    if (entry.validated) line["val_amota"] = entry.val_amota;
    out << line.dump() << "\n";
  }
}

std::vector<TrainLogEntry> read_training_log(const std::string& path,
                                             FileHeader* header) {
  const std::vector<std::string> lines = read_lines(path);
  FileHeader h = parse_header(path, lines, kTrainingLogFormat);

  std::vector<TrainLogEntry> log;
  for (size_t i = 1; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    const ojson obj = parse_json_line(path, line_no, lines[i]);
    LineScanner scan(path, line_no, obj);
    TrainLogEntry entry;
    entry.step = scan.required_index("step");
    entry.lr = scan.required_number("lr");
    entry.loss = scan.nullable_number("loss");
    entry.annotation_term = scan.nullable_number("annotation_term");
    entry.pseudo_term = scan.nullable_number("pseudo_term");
    entry.coverage = scan.required_number("coverage");
    entry.uncovered = scan.required_index("uncovered");
    entry.stepped = scan.optional_boolean("stepped", false);
    entry.restored = scan.optional_boolean("restored", false);
    entry.validated = scan.optional_boolean("validated", false);
    if (entry.validated) {
      entry.val_amota = scan.required_number("val_amota");
    } else {
      scan.forbid("val_amota", "only present on validated steps");
    }
    scan.finish();
    log.push_back(entry);
  }
  if (header) *header = std::move(h);
  return log;
}

}  // namespace mot::io
