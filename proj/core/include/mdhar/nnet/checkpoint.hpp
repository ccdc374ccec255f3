#pragma once

#include <filesystem>

#include "mdhar/nnet/model.hpp"

namespace mdhar::nnet {

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Versioned little-endian checkpoint: "MDN1", version, architecture,
/// then each named tensor with its shape and f32 values.
void save_checkpoint(const CnnModel<float>& model, const std::filesystem::path& path);

/// Throws mdhar::DataError on a malformed or mismatched file.
CnnModel<float> load_checkpoint(const std::filesystem::path& path);

}  // namespace mdhar::nnet
