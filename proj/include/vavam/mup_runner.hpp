#pragma once

#include "vavam/scaling.hpp"
#include "vavam/video_model.hpp"

namespace vavam::scaling {

// Trains a fresh VaViM of the requested width for n_steps on the given token
// batch and records the per-site activation RMS after every step. The same
// data and seed are used for every width, so the traces are comparable.
CoordinateTrace run_vavim_coordinate_trace(int width, const MuPConfig& base, bool use_mup,
                                           const vm::VaViMConfig& shape,
                                           const std::vector<std::vector<int>>& batch,
                                           const vm::SequenceLayout& layout, int n_steps,
                                           std::uint64_t seed);

}  // namespace vavam::scaling
