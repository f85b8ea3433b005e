#pragma once

#include <json.hpp>
#include <string>

#include "mot/nn/optimizer.hpp"
#include "mot/nn/params.hpp"

namespace mot::nn {

// Checkpoint container: architecture header, named parameter tensors
// (row-major), and optionally the optimizer moments.
//
// Loading validates every tensor name and shape against the ParamStore the
// caller constructed from its configuration; any mismatch throws.

void save_checkpoint(const std::string& path, const ParamStore& params,
                     const nlohmann::json& architecture,
                     const AdamW* optimizer = nullptr);

// Architecture header only (to build the network before loading tensors).
nlohmann::json read_checkpoint_architecture(const std::string& path);

// Fills `params` (and `optimizer` if given and present in the file).
// Returns the architecture header.
nlohmann::json load_checkpoint(const std::string& path, ParamStore& params,
                               AdamW* optimizer = nullptr);

}  // namespace mot::nn
