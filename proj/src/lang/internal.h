#pragma once

#include <optional>
#include <string>
#include <vector>

#include "icl/lang.h"

namespace icl::lang {

struct TheoryWithLocations {
  IclTheory theory;
  std::vector<SourceLocation> sort_locs, function_locs, action_locs, predicate_locs, choice_locs,
      exec_locs, clause_locs;
};

struct QueryWithLocations {
  std::string kind;
  std::optional<Formula> cause, effect;
  std::vector<std::vector<Atom>> totals;
  std::vector<Atom> executions;
  std::optional<std::string> exec_mode;
  std::optional<std::string> alpha;
  SourceLocation kind_loc, cause_loc, effect_loc, mode_loc, alpha_loc;
  std::vector<SourceLocation> total_locs, exec_locs;
};

TheoryWithLocations parse_theory_raw(std::string_view source);
QueryWithLocations parse_query_raw(std::string_view source);

void validate_theory(const TheoryWithLocations& parsed);

}  // namespace icl::lang
