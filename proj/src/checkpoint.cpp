#include "vavam/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <fstream>

namespace vavam {

using nlohmann::json;

namespace {

void put_f32_le(std::vector<std::uint8_t>& out, float f) {
    const auto u = std::bit_cast<std::uint32_t>(f);
    out.push_back(static_cast<std::uint8_t>(u & 0xFF));
    out.push_back(static_cast<std::uint8_t>((u >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((u >> 16) & 0xFF));
    out.push_back(static_cast<std::uint8_t>((u >> 24) & 0xFF));
}

float get_f32_le(const std::uint8_t* p) {
    const std::uint32_t u = static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
                            (static_cast<std::uint32_t>(p[2]) << 16) |
                            (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(u);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const std::string& module,
                     const json& config, long step, const json& metrics,
                     const std::vector<nn::ParamInfo>& params) {
    std::filesystem::create_directories(dir);

    json table = json::array();
    std::vector<std::uint8_t> blob;
    long offset = 0;
    for (const auto& p : params) {
        table.push_back({{"name", p.name}, {"shape", {p.rows, p.cols}}, {"offset", offset}});
        // row-major serialization of the column-major storage
        for (long r = 0; r < p.rows; ++r)
            for (long c = 0; c < p.cols; ++c)
                put_f32_le(blob, static_cast<float>(p.value[c * p.rows + r]));
        offset += p.size();
    }

    json manifest;
    manifest["module"] = module;
    manifest["config"] = config;
    manifest["step"] = step;
    manifest["metrics"] = metrics;
    manifest["params"] = table;
    manifest["dtype"] = "f32le";

    const auto tmp_bin = dir / "params.bin.tmp";
    {
        std::ofstream f(tmp_bin, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("save_checkpoint: cannot write " + tmp_bin.string());
        f.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
    }
    std::filesystem::rename(tmp_bin, dir / "params.bin");

    const auto tmp_manifest = dir / "manifest.json.tmp";
    {
        std::ofstream f(tmp_manifest, std::ios::trunc);
        f << manifest.dump(2) << "\n";
    }
    std::filesystem::rename(tmp_manifest, dir / "manifest.json");
}

json load_checkpoint_manifest(const std::filesystem::path& dir) {
    std::ifstream f(dir / "manifest.json");
    if (!f) throw LoadError("load_checkpoint: missing manifest in " + dir.string());
    return json::parse(f);
}

void load_checkpoint_params(const std::filesystem::path& dir, std::vector<nn::ParamInfo>& params) {
    const json manifest = load_checkpoint_manifest(dir);
    std::ifstream f(dir / "params.bin", std::ios::binary);
    if (!f) throw LoadError("load_checkpoint: missing params.bin in " + dir.string());
    std::vector<std::uint8_t> blob((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());

    const auto& table = manifest.at("params");
    if (table.size() != params.size())
        throw LoadError("load_checkpoint: parameter count mismatch (manifest " +
                        std::to_string(table.size()) + ", model " + std::to_string(params.size()) + ")");

    for (std::size_t k = 0; k < params.size(); ++k) {
        auto& p = params[k];
        const auto& entry = table[k];
        const std::string name = entry.at("name").get<std::string>();
        if (name != p.name) throw LoadError("load_checkpoint: parameter name mismatch: expected " +
                                            p.name + ", manifest has " + name);
        const long rows = entry.at("shape")[0].get<long>();
        const long cols = entry.at("shape")[1].get<long>();
        if (rows != p.rows || cols != p.cols)
            throw LoadError("load_checkpoint: shape mismatch for parameter " + p.name);
        const long offset = entry.at("offset").get<long>();
        if (static_cast<long>(blob.size()) < (offset + p.size()) * 4)
            throw LoadError("load_checkpoint: truncated array for parameter " + p.name);
        const std::uint8_t* base = blob.data() + offset * 4;
        for (long r = 0; r < p.rows; ++r)
            for (long c = 0; c < p.cols; ++c)
                p.value[c * p.rows + r] = static_cast<double>(get_f32_le(base + (r * p.cols + c) * 4));
    }
}

}  // namespace vavam
