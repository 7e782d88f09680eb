#pragma once

#include <string>

#include "pipeline.hpp"

namespace colorforest {

// Model file: JSON with format tag "CFM", version 1. Trees are stored as
// pre-order record lists ({type:"split", n, tau} / {type:"leaf", dist});
// child links are implicit in the ordering. Serialization is deterministic,
// so equal models give byte-identical files.
std::string serialize_model(const Model& model);
Model parse_model(const std::string& text);

void save_model(const Model& model, const std::string& path);
Model load_model(const std::string& path);

// Flat `key=value` config lines mirroring PipelineConfig field names; `#`
// starts a comment. Unknown keys and unparsable values are errors.
void apply_config_kv(PipelineConfig& cfg, const std::string& key,
                     const std::string& value);
PipelineConfig load_config_file(const std::string& path, PipelineConfig base = {});

}  // namespace colorforest
