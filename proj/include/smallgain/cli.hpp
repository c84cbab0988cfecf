#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "json.hpp"

namespace smallgain::cli {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kSchemaVersion = 1;

enum ExitCode : int { kOk = 0, kFalsified = 1, kConfigError = 2, kNumericFailure = 3 };

enum class Format { Json, Csv };

struct Outcome {
  int exit_code = kOk;
  std::string output;       // report JSON or trajectory CSV; empty on config errors
  std::string diagnostics;  // for standard error
};

// Runs one command described by `config`. `seed` overrides config["seed"];
// `command` overrides config["command"] when nonempty.
Outcome execute(const nlohmann::json& config, std::optional<std::uint64_t> seed = std::nullopt,
                Format format = Format::Json, const std::string& command = "");
Outcome execute_text(const std::string& config_text, std::optional<std::uint64_t> seed = std::nullopt,
                     Format format = Format::Json, const std::string& command = "");

// Full command line: smallgain [command] --config PATH [--out PATH] [--seed N] [--format json|csv]
int run(int argc, char** argv);

}  // namespace smallgain::cli
