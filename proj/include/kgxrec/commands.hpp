#pragma once

#include <string>
#include <vector>

#include "kgxrec/config.hpp"

namespace kgxrec::cli {

// Exit codes: 0 success, 1 usage/config error, 2 data error, 3 numeric failure.
constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumeric = 3;

int run_build_dataset(const std::string& metadata_path, const std::string& gazetteer_path,
                      const std::string& out_path);

int run_train(const RunConfig& cfg);

int run_evaluate(const RunConfig& cfg, const std::string& checkpoint_dir);

int run_explain(const std::string& checkpoint_dir, const std::string& user_spec,
                const std::string& kg_spec, size_t beam);

int run_sweep(const RunConfig& cfg, const std::string& grid_spec);

// Maps thrown errors onto the exit-code taxonomy.
int guarded(const std::function<int()>& body);

std::vector<std::pair<double, double>> parse_grid(const std::string& grid_spec);

}  // namespace kgxrec::cli
