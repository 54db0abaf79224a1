#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "kgxrec/dataset.hpp"
#include "kgxrec/model.hpp"

namespace kgxrec {

// Full run configuration. File format: line-oriented key=value, UTF-8, '#'
// comments; unknown keys are rejected.
struct RunConfig {
    ModelConfig model;
    Limits limits;

    double lr = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    double clip_norm = 1.0;
    size_t batch_size = 16;  // desk-scale default; 128 at full scale
    size_t epochs = 20;
    size_t top_k = 10;
    size_t beam = 5;
    uint64_t seed = 42;
    SplitRatios split;
    double eval_fraction = 1.0;
    size_t vocab_cap = 0;  // 0 = unbounded

    std::string dataset_path;
    std::string out_dir = "out";

    static RunConfig load(const std::filesystem::path& path);

    // Applies one key=value override; throws ConfigError on unknown keys or
    // unparseable values.
    void set(const std::string& key, const std::string& value);

    void validate() const;

    std::string to_key_values() const;
};

}  // namespace kgxrec
