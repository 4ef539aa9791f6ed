// iclcause: check and compile ICL theories, and answer cause/explanation
// queries against them.

#include <CLI11.hpp>
#include <iostream>

#include "icl/cli.h"

namespace {

int emit(const icl::cli::CommandResult& r) {
  std::cout << r.out;
  std::cerr << r.err;
  return r.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ICL action theories as structural causal models"};
  app.require_subcommand(1);

  std::string theory, query, model, out, graph, exec_mode;
  std::optional<int> horizon;
  std::optional<std::uint64_t> budget;
  bool oracle = false, json = false, no_timings = false;

  auto* check = app.add_subcommand("check", "parse, ground and validate a theory");
  check->add_option("theory", theory, "theory file (.icl)")->required();
  check->add_option("--horizon", horizon, "override the horizon H");

  auto* compile = app.add_subcommand("compile", "write the causal model of a theory as JSON");
  compile->add_option("theory", theory, "theory file (.icl)")->required();
  compile->add_option("-o,--output", out, "output file (default stdout)");
  compile->add_option("--horizon", horizon, "override the horizon H");
  compile->add_option("--graph", graph, "also write the causal graph as DOT");

  auto* reverse = app.add_subcommand("reverse", "write an ICL theory for a binary causal model");
  reverse->add_option("model", model, "model file (.json)")->required();
  reverse->add_option("-o,--output", out, "output file (default stdout)");

  auto* q = app.add_subcommand("query", "answer a query");
  q->add_option("theory", theory, "theory file (.icl)")->required();
  q->add_option("query", query, "query file (.q)")->required();
  q->add_option("--horizon", horizon, "override the horizon H");
  q->add_option("--exec-mode", exec_mode, "fixed or overridable")->check(CLI::IsMember({"fixed", "overridable"}));
  q->add_option("--budget", budget, "maximum (W, w) pairs per weak-cause search");
  q->add_flag("--oracle", oracle, "brute-force search without pruning");
  q->add_flag("--json", json, "print the report as JSON");
  q->add_flag("--no-timings", no_timings, "omit timings from the report");
  q->add_option("--graph", graph, "write the causal graph of (M_T)_E as DOT");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : icl::cli::kExitInputError;
  }

  if (*check) return emit(icl::cli::cmd_check(theory, horizon));
  if (*compile) return emit(icl::cli::cmd_compile(theory, out, horizon, graph));
  if (*reverse) return emit(icl::cli::cmd_reverse(model, out));

  icl::cli::QueryFlags flags;
  flags.horizon = horizon;
  if (exec_mode == "fixed") flags.exec_mode = icl::lang::ExecMode::Fixed;
  if (exec_mode == "overridable") flags.exec_mode = icl::lang::ExecMode::Overridable;
  flags.budget = budget;
  flags.oracle = oracle;
  flags.json = json;
  flags.timings = !no_timings;
  flags.graph_path = graph;
  return emit(icl::cli::cmd_query(theory, query, flags));
}
