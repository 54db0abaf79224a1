#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>

#include "kgxrec/model.hpp"

namespace kgxrec {

// A checkpoint directory holds params.bin (binary parameter blob) and
// manifest.txt (line-oriented key=value: config fields, vocab hash, step
// count). Parameters round-trip bit-exactly.
struct CheckpointMeta {
    uint64_t step = 0;
    uint64_t epoch = 0;
    double valid_loss = 0.0;
    uint64_t vocab_hash = 0;
};

void save_checkpoint(const std::filesystem::path& dir, const Model& model, const CheckpointMeta& meta);

std::pair<Model, CheckpointMeta> load_checkpoint(const std::filesystem::path& dir);

}  // namespace kgxrec
