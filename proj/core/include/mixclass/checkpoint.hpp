#pragma once

#include <filesystem>

#include "mixclass/net.hpp"

namespace mixc {

// Versioned container: "MXC1" magic, u32 length of the canonical spec JSON,
// the JSON bytes, then each parameter tensor in declaration order as
// u32 rank, u64 dims, little-endian float64 data. Round-trips bit-exactly.
void save_checkpoint(const Model& m, const std::filesystem::path& path);

Model load_checkpoint(const std::filesystem::path& path);

// As above, but rejects a checkpoint whose embedded spec differs from
// `expected`, naming the first mismatching layer.
Model load_checkpoint(const std::filesystem::path& path, const ModelSpec& expected);

}  // namespace mixc
