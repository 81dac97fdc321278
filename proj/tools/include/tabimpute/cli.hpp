#pragma once

#include "tabimpute/engine.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace tabimpute::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 1;
inline constexpr int kExitRuntime = 2;

inline constexpr const char* kOutputDirEnv = "TABIMPUTE_OUTPUT_DIR";

/// Reads `key = value` lines (`#` starts a comment). Keys are ImputeConfig
/// field names or the original parameter names (xgb_models, optuna_n_trials,
/// ...). Unknown keys and malformed or out-of-range values raise a
/// ValidationError whose message carries the line number.
ImputeConfig load_config_file(const std::filesystem::path& path);

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace tabimpute::cli
