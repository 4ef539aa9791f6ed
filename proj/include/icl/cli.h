// Command implementations behind the iclcause tool.  Each returns the text
// to print and the process exit code.

#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "icl/lang.h"

namespace icl::cli {

inline constexpr int kExitAnswered = 0;
inline constexpr int kExitUnknown = 2;
inline constexpr int kExitInputError = 3;

struct CommandResult {
  int exit_code = kExitAnswered;
  std::string out;  // stdout
  std::string err;  // stderr
};

struct QueryFlags {
  std::optional<int> horizon;
  std::optional<lang::ExecMode> exec_mode;
  std::optional<std::uint64_t> budget;
  bool oracle = false;
  bool json = false;
  std::string graph_path;  // DOT export of (M_T)_E when non-empty
  bool timings = true;     // include wall-clock timings in the report
};

CommandResult cmd_check(const std::string& theory_path, std::optional<int> horizon = std::nullopt);

// Writes SCM JSON of M_T (no executions applied) to out_path, or stdout
// when out_path is empty.
CommandResult cmd_compile(const std::string& theory_path, const std::string& out_path,
                          std::optional<int> horizon = std::nullopt, const std::string& graph_path = "");

// Writes the .icl theory of a binary model given as SCM JSON.
CommandResult cmd_reverse(const std::string& model_path, const std::string& out_path);

// Runs a query file against a theory and reports (JSON with flags.json).
CommandResult cmd_query(const std::string& theory_path, const std::string& query_path,
                        const QueryFlags& flags);

// Same, from in-memory sources.
CommandResult run_query(const std::string& theory_source, const std::string& query_source,
                        const QueryFlags& flags);

}  // namespace icl::cli
