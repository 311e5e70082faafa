#pragma once

#include "vavam/nn.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <vector>

namespace vavam {

// Checkpoint layout: a directory with manifest.json (module, config, step,
// metrics, parameter table) and params.bin holding the named arrays as
// little-endian 32-bit floats, row-major, in manifest order. Writes are
// atomic (temp file + rename). The byte encoding is explicit, so files are
// portable across host endianness.

void save_checkpoint(const std::filesystem::path& dir, const std::string& module,
                     const nlohmann::json& config, long step, const nlohmann::json& metrics,
                     const std::vector<nn::ParamInfo>& params);

nlohmann::json load_checkpoint_manifest(const std::filesystem::path& dir);

// Validates every parameter name/shape against the manifest and fills the
// registry values. Throws LoadError naming the offending parameter.
void load_checkpoint_params(const std::filesystem::path& dir, std::vector<nn::ParamInfo>& params);

}  // namespace vavam
