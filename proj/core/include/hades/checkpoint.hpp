#pragma once

#include <string>

#include "hades/model.hpp"

namespace hades {

// Binary checkpoint: 8-byte magic "HADESCKP", u32 version, u32 header length,
// structured-text header (config + tensor directory), then contiguous
// little-endian float32 payload. Offsets in the directory are relative to the
// payload start and must tile it exactly.
void save_checkpoint(const Model& m, const std::string& path);
Model load_checkpoint(const std::string& path);

std::string config_to_text(const ModelConfig& cfg);
ModelConfig config_from_text(const std::string& text);

// FNV-1a hex digest of config_to_text; stamped into exported CSV headers.
std::string config_hash(const ModelConfig& cfg);

}  // namespace hades
