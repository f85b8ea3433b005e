#include "mot/nn/checkpoint.hpp"

#include <fstream>
#include <stdexcept>

#include "mot/version.hpp"

namespace mot::nn {

namespace {

constexpr const char* kFormat = "gain-network-checkpoint";
constexpr int kVersion = 1;

nlohmann::json tensor_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json data = nlohmann::json::array();
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  return data;
}

void tensor_from_json(const nlohmann::json& data, Eigen::MatrixXd& m) {
  if (static_cast<long>(data.size()) != m.size()) {
    throw std::runtime_error("checkpoint: tensor size mismatch");
  }
  size_t k = 0;
  for (int i = 0; i < m.rows(); ++i)
    for (int j = 0; j < m.cols(); ++j) m(i, j) = data[k++].get<double>();
}

nlohmann::json parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path);
  nlohmann::json doc;
  in >> doc;
  if (doc.value("format", "") != kFormat) {
    throw std::runtime_error("checkpoint: unrecognized format in " + path);
  }
  if (doc.value("version", 0) != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version in " + path);
  }
  return doc;
}

}  // namespace

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& architecture,
                     const AdamW* optimizer) {
  nlohmann::json doc;
  doc["format"] = kFormat;
  doc["version"] = kVersion;
  doc["tool"] = std::string(kToolName) + " " + kToolVersion;
  doc["architecture"] = architecture;
  nlohmann::json tensors = nlohmann::json::array();
  for (int i = 0; i < params.count(); ++i) {
    nlohmann::json t;
    t["name"] = params.name(i);
    t["rows"] = params.value(i).rows();
    t["cols"] = params.value(i).cols();
    t["data"] = tensor_to_json(params.value(i));
    tensors.push_back(std::move(t));
  }
  doc["params"] = std::move(tensors);
  if (optimizer) {
    nlohmann::json opt;
    opt["t"] = optimizer->steps_taken();
    nlohmann::json m = nlohmann::json::array();
    nlohmann::json v = nlohmann::json::array();
    for (const auto& mm : optimizer->first_moments()) m.push_back(tensor_to_json(mm));
    for (const auto& vv : optimizer->second_moments()) v.push_back(tensor_to_json(vv));
    opt["m"] = std::move(m);
    opt["v"] = std::move(v);
    doc["optimizer"] = std::move(opt);
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("checkpoint: cannot write " + path);
  out << doc.dump(2) << "\n";
}

nlohmann::json read_checkpoint_architecture(const std::string& path) {
  return parse_file(path).at("architecture");
}

nlohmann::json load_checkpoint(const std::string& path, ParamStore& params,
                               AdamW* optimizer) {
  const nlohmann::json doc = parse_file(path);
  const nlohmann::json& tensors = doc.at("params");
  if (static_cast<int>(tensors.size()) != params.count()) {
    throw std::runtime_error("checkpoint: parameter count mismatch");
  }
  for (int i = 0; i < params.count(); ++i) {
    const nlohmann::json& t = tensors[i];
    if (t.at("name").get<std::string>() != params.name(i) ||
        t.at("rows").get<long>() != params.value(i).rows() ||
        t.at("cols").get<long>() != params.value(i).cols()) {
      throw std::runtime_error("checkpoint: tensor " + params.name(i) +
                               " does not match the configured architecture");
    }
    tensor_from_json(t.at("data"), params.value(i));
  }
  if (optimizer && doc.contains("optimizer")) {
    const nlohmann::json& opt = doc.at("optimizer");
    auto& m = optimizer->first_moments();
    auto& v = optimizer->second_moments();
    if (opt.at("m").size() != m.size() || opt.at("v").size() != v.size()) {
      throw std::runtime_error("checkpoint: optimizer state mismatch");
    }
    for (size_t i = 0; i < m.size(); ++i) tensor_from_json(opt.at("m")[i], m[i]);
    for (size_t i = 0; i < v.size(); ++i) tensor_from_json(opt.at("v")[i], v[i]);
    optimizer->set_steps_taken(opt.at("t").get<long>());
  }
  return doc.at("architecture");
}

}  // namespace mot::nn
