#pragma once

#include <string>

#include "maskguide/models.hpp"

namespace mg {

// Checkpoint directory: one raw little-endian float32 file per named tensor
// plus manifest.json with {name, shape, dtype, file, sha256} entries and the
// geometry. load verifies hashes and shapes and throws CheckpointError on
// any mismatch.
void save_checkpoint(const std::string& dir, const ParamStore& ps, const Geometry& geo);

struct LoadedCheckpoint {
    ParamStore params;
    Geometry geometry;
};

LoadedCheckpoint load_checkpoint(const std::string& dir);

std::string sha256_hex(const void* data, std::size_t n);
std::string sha256_file(const std::string& path);

}  // namespace mg
