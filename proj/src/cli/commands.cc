#include "icl/cli.h"

#include <chrono>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "icl/causes.h"
#include "icl/compile.h"
#include "icl/explain.h"
#include "icl/ground.h"
#include "icl/scm.h"

namespace icl::cli {

using nlohmann::ordered_json;

namespace {

class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError(path + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text, CommandResult& r) {
  if (path.empty() || path == "-") {
    r.out += text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError(path + ": cannot write file");
  out << text;
}

std::string located(const std::string& file, const lang::ParseError& e) {
  std::string s = file;
  if (e.location().line > 0) {
    s += ":" + std::to_string(e.location().line) + ":" + std::to_string(e.location().column);
  }
  return s + ": " + e.message();
}

// Runs `body`, mapping every input-side exception to exit code 3.
template <typename F>
CommandResult guarded(const std::string& file, F&& body) {
  CommandResult r;
  try {
    body(r);
  } catch (const lang::ParseError& e) {
    r.exit_code = kExitInputError;
    r.err += located(file, e) + "\n";
  } catch (const std::exception& e) {
    r.exit_code = kExitInputError;
    r.err += "error: " + std::string(e.what()) + "\n";
    r.out.clear();
  }
  return r;
}

lang::IclTheory load_theory(const std::string& path, const std::string& source, std::optional<int> horizon) {
  lang::IclTheory t;
  try {
    t = lang::parse_theory(source);
  } catch (const lang::ParseError& e) {
    throw InputError(located(path, e));
  }
  if (horizon) {
    if (*horizon < 0) throw InputError("horizon must be nonnegative");
    t.horizon = *horizon;
  }
  return t;
}

double ms_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

ordered_json assignment_json(const scm::CausalModel& m, const causes::Assignment& a) {
  ordered_json out = ordered_json::array();
  for (const auto& [id, v] : a) {
    out.push_back(ordered_json{{"variable", m.variable(id).name}, {"value", m.variable(id).domain[v]}});
  }
  return out;
}

ordered_json context_json(const scm::CausalModel& m, const scm::Context& u) {
  ordered_json out = ordered_json::array();
  for (std::size_t i = 0; i < u.size(); ++i) out.push_back(m.exogenous()[i].domain[u[i]]);
  return out;
}

ordered_json substitution_json(const ground::Substitution& s) {
  ordered_json out = ordered_json::object();
  for (const auto& [k, v] : s.terms) out[k] = lang::render_term(v);
  for (const auto& [k, v] : s.times) out[k] = v;
  return out;
}

ordered_json atoms_json(const std::vector<lang::Atom>& atoms) {
  ordered_json out = ordered_json::array();
  for (const auto& a : atoms) out.push_back(lang::render_atom(a));
  return out;
}

ordered_json power_json(const Rational& p) {
  return ordered_json{{"fraction", to_fraction_string(p)}, {"decimal", to_decimal_string(p)}};
}

ordered_json details_json(const scm::CausalModel& m, const std::vector<explain::ContextDetail>& ds) {
  ordered_json out = ordered_json::array();
  for (const auto& d : ds) {
    ordered_json j{{"context", context_json(m, d.u)}, {"effect", d.phi}, {"cause_holds", d.x_holds}};
    j["weak_cause"] = d.weak_cause ? ordered_json(std::string(causes::to_string(*d.weak_cause))) : ordered_json();
    out.push_back(std::move(j));
  }
  return out;
}

ordered_json prepend(ordered_json head, const ordered_json& tail) {
  for (const auto& [k, v] : tail.items()) head[k] = v;
  return head;
}

std::string verdict_word(causes::Verdict v) {
  switch (v) {
    case causes::Verdict::True:
      return "holds";
    case causes::Verdict::False:
      return "fails";
    case causes::Verdict::Unknown:
      return "unknown";
  }
  return "";
}

std::string text_report(const ordered_json& r) {
  std::ostringstream os;
  const auto& q = r["query"];
  os << "query:    " << q["kind"].get<std::string>();
  if (q.contains("mode")) os << " (" << q["mode"].get<std::string>() << ")";
  os << "\n";
  os << "cause:    ";
  for (std::size_t i = 0; i < q["cause"].size(); ++i) os << (i ? " & " : "") << q["cause"][i].get<std::string>();
  os << "\neffect:   " << q["effect"].get<std::string>() << "\n";
  os << "verdict:  " << r["verdict"].get<std::string>() << "\n";
  if (r.contains("failed_condition") && !r["failed_condition"].is_null()) {
    os << "failed:   " << r["failed_condition"].get<std::string>() << "\n";
  }
  if (r.contains("failing_substitution") && !r["failing_substitution"].is_null()) {
    os << "theta:    " << r["failing_substitution"].dump() << "\n";
  }
  if (r.contains("witness") && !r["witness"].is_null()) {
    auto list = [&](const ordered_json& a) {
      std::string s;
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ", ";
        s += a[i]["variable"].get<std::string>() + " = " + a[i]["value"].get<std::string>();
      }
      return "{" + s + "}";
    };
    os << "witness:  W = " << list(r["witness"]["W"]) << "\n";
    os << "          x-bar = " << list(r["witness"]["x_bar"]) << "\n";
  }
  if (r.contains("context_set") && !r["context_set"].is_null()) {
    os << "C^phi:    " << r["context_set"].size() << " context(s)\n";
    for (const auto& c : r["context_set"]) os << "          " << c.dump() << "\n";
  }
  if (r.contains("power") && !r["power"].is_null()) {
    os << "power:    " << r["power"]["fraction"].get<std::string>() << " ("
       << r["power"]["decimal"].get<std::string>() << ")\n";
  }
  if (r.contains("alpha_holds") && !r["alpha_holds"].is_null()) {
    os << "alpha:    " << (r["alpha_holds"].get<bool>() ? "holds" : "fails") << "\n";
  }
  if (r.contains("note") && !r["note"].is_null()) os << "note:     " << r["note"].get<std::string>() << "\n";
  return os.str();
}

}  // namespace

CommandResult cmd_check(const std::string& theory_path, std::optional<int> horizon) {
  return guarded(theory_path, [&](CommandResult& r) {
    const auto t = load_theory(theory_path, read_file(theory_path), horizon);
    const auto program = ground::ground_theory(t);
    const auto acyc = ground::check_acyclic(program);
    if (!acyc.acyclic) {
      std::string cycle;
      for (std::size_t i = 0; i < acyc.cycle.size(); ++i) {
        cycle += (i ? " -> " : "") + program.atom(acyc.cycle[i]).text;
      }
      throw InputError("ground program is not acyclic: " + cycle);
    }
    // Validates the execution E and materialises (M_T)_E.
    compile::compile_with_execution(t, std::nullopt, lang::ExecMode::Fixed);
    std::ostringstream os;
    os << theory_path << ": ok (" << program.size() << " ground atoms, " << program.clauses().size()
       << " ground clauses, " << program.choice_space().size() << " alternative(s), horizon "
       << program.horizon() << (t.probabilistic() ? ", probabilistic" : "") << ")\n";
    r.out = os.str();
  });
}

CommandResult cmd_compile(const std::string& theory_path, const std::string& out_path,
                          std::optional<int> horizon, const std::string& graph_path) {
  return guarded(theory_path, [&](CommandResult& r) {
    const auto t = load_theory(theory_path, read_file(theory_path), horizon);
    const auto ct = compile::compile_picl(t);
    write_output(out_path, scm::write_model_json(ct.model, ct.distribution), r);
    if (!graph_path.empty()) write_output(graph_path, scm::to_dot(ct.model), r);
  });
}

CommandResult cmd_reverse(const std::string& model_path, const std::string& out_path) {
  return guarded(model_path, [&](CommandResult& r) {
    const auto doc = scm::read_model_json(read_file(model_path));
    const auto t = compile::reverse_compile(doc.model, doc.distribution);
    write_output(out_path, lang::render_theory(t), r);
  });
}

CommandResult cmd_query(const std::string& theory_path, const std::string& query_path, const QueryFlags& flags) {
  CommandResult r;
  std::string theory_source, query_source;
  try {
    theory_source = read_file(theory_path);
    query_source = read_file(query_path);
  } catch (const std::exception& e) {
    r.exit_code = kExitInputError;
    r.err = std::string("error: ") + e.what() + "\n";
    return r;
  }
  r = run_query(theory_source, query_source, flags);
  // Attach file names to parse diagnostics ("<theory>:" / "<query>:").
  auto fix = [&](const std::string& tag, const std::string& path) {
    const std::string key = "<" + tag + ">";
    for (std::size_t pos; (pos = r.err.find(key)) != std::string::npos;) r.err.replace(pos, key.size(), path);
  };
  fix("theory", theory_path);
  fix("query", query_path);
  return r;
}

CommandResult run_query(const std::string& theory_source, const std::string& query_source,
                        const QueryFlags& flags) {
  return guarded("<query>", [&](CommandResult& r) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto theory = load_theory("<theory>", theory_source, flags.horizon);
    const auto query = lang::parse_query(query_source, theory);
    const double parse_ms = ms_since(t0);

    const auto& common = lang::common(query);
    const lang::ExecMode mode = flags.exec_mode ? *flags.exec_mode : common.exec_mode;
    const auto t1 = std::chrono::steady_clock::now();
    const auto ct = compile::compile_with_execution(theory, common.executions, mode);
    const double compile_ms = ms_since(t1);
    if (!flags.graph_path.empty()) {
      CommandResult sink;
      write_output(flags.graph_path, scm::to_dot(ct.model), sink);
    }

    causes::SearchOptions opts;
    if (flags.budget) opts.budget = *flags.budget;
    opts.oracle = flags.oracle;

    ordered_json report;
    ordered_json q;
    q["cause"] = atoms_json(common.cause);
    q["effect"] = lang::render_formula(common.effect);
    q["executions"] = atoms_json(common.executions ? *common.executions : theory.executions);
    q["exec_mode"] = std::string(lang::to_string(mode));
    q["horizon"] = theory.horizon;

    const auto t2 = std::chrono::steady_clock::now();
    causes::Verdict verdict = causes::Verdict::False;
    ordered_json body;
    std::optional<causes::Instance> reported;
    std::optional<ground::Substitution> failing;
    std::size_t instances = 0;
    ordered_json stats;

    if (const auto* cq = std::get_if<lang::CauseQuery>(&query)) {
      q = prepend({{"kind", "cause"}, {"mode", std::string(lang::to_string(cq->mode))}}, q);
      q["total_choice"] = atoms_json(cq->total_choice);
      const auto res = causes::icl_cause(ct, cq->cause, cq->effect, cq->total_choice, cq->mode, opts);
      verdict = res.verdict.verdict;
      reported = res.reported;
      failing = res.failing_substitution;
      instances = res.instances;
      const auto& v = res.verdict;
      body["failed_condition"] =
          v.failed == causes::Condition::None ? ordered_json() : ordered_json(std::string(causes::to_string(v.failed)));
      body["witness"] = v.witness ? ordered_json{{"W", assignment_json(ct.model, v.witness->w)},
                                                 {"x_bar", assignment_json(ct.model, v.witness->x_bar)}}
                                  : ordered_json();
      if (!v.smaller_cause.empty()) body["smaller_cause"] = assignment_json(ct.model, v.smaller_cause);
      body["note"] = v.note.empty() ? ordered_json() : ordered_json(v.note);
      stats = {{"pairs", v.stats.pairs}, {"evaluations", v.stats.evaluations}, {"candidates", v.stats.candidates}};
    } else if (const auto* eq = std::get_if<lang::ExplanationQuery>(&query)) {
      q = prepend({{"kind", "explanation"}}, q);
      ordered_json totals = ordered_json::array();
      for (const auto& b : eq->total_choices) totals.push_back(atoms_json(b));
      q["total_choices"] = totals;
      const auto res = explain::icl_explanation(ct, eq->cause, eq->effect, eq->total_choices, opts);
      verdict = res.verdict.verdict;
      reported = res.reported;
      failing = res.failing_substitution;
      instances = res.instances;
      const auto& v = res.verdict;
      body["failed_condition"] = v.failed == explain::Condition::None
                                     ? ordered_json()
                                     : ordered_json(std::string(explain::to_string(v.failed)));
      if (!v.ex3_subset.empty()) body["ex3_subset"] = assignment_json(ct.model, v.ex3_subset);
      body["contexts"] = details_json(ct.model, v.details);
      body["note"] = v.note.empty() ? ordered_json() : ordered_json(v.note);
    } else {
      const auto& pq = std::get<lang::PartialExplanationQuery>(query);
      q = prepend({{"kind", "partial"}}, q);
      ordered_json totals = ordered_json::array();
      for (const auto& b : pq.total_choices) totals.push_back(atoms_json(b));
      q["total_choices"] = totals;
      std::optional<Rational> alpha;
      if (pq.alpha) {
        alpha = parse_rational(*pq.alpha);
        q["alpha"] = to_fraction_string(*alpha);
      }
      const auto res = explain::icl_partial_explanation(ct, pq.cause, pq.effect, pq.total_choices, alpha, opts);
      verdict = res.verdict;
      reported = res.reported;
      failing = res.failing_substitution;
      instances = res.instances;
      const auto& v = res.result;
      body["defined"] = v.defined == causes::Verdict::Unknown ? ordered_json()
                                                              : ordered_json(v.defined == causes::Verdict::True);
      ordered_json cs = ordered_json::array();
      for (const auto& u : v.context_set) cs.push_back(context_json(ct.model, u));
      body["context_set"] = v.defined == causes::Verdict::True ? cs : ordered_json();
      body["power"] = v.power ? power_json(*v.power) : ordered_json();
      body["alpha_holds"] = v.alpha_holds ? ordered_json(*v.alpha_holds) : ordered_json();
      body["partial"] = v.power ? ordered_json(v.partial) : ordered_json();
      body["contexts"] = details_json(ct.model, v.details);
      body["note"] = v.note.empty() ? ordered_json() : ordered_json(v.note);
    }
    const double query_ms = ms_since(t2);

    report["query"] = q;
    report["verdict"] = verdict_word(verdict);
    report["holds"] = verdict == causes::Verdict::Unknown ? ordered_json() : ordered_json(verdict == causes::Verdict::True);
    report["failing_substitution"] = failing ? substitution_json(*failing) : ordered_json();
    if (reported) {
      report["instance"] = {{"theta", substitution_json(reported->theta)},
                            {"cause", [&] {
                               ordered_json a = ordered_json::array();
                               for (auto id : reported->cause_atoms) a.push_back(ct.program.atom(id).text);
                               return a;
                             }()},
                            {"effect", scm::render_expr(ct.model, reported->phi)}};
    }
    report["instances"] = instances;
    for (auto& [k, v] : body.items()) report[k] = v;
    ordered_json model{{"exogenous", ct.model.exogenous().size()},
                       {"endogenous", ct.model.endogenous_ids().size()},
                       {"herbrand_base", ct.program.size()},
                       {"ground_clauses", ct.program.clauses().size()},
                       {"horizon", ct.program.horizon()}};
    report["model"] = model;
    if (!stats.is_null()) report["stats"] = stats;
    if (flags.timings) report["timings_ms"] = {{"parse", parse_ms}, {"compile", compile_ms}, {"query", query_ms}};

    r.out = flags.json ? report.dump(2) + "\n" : text_report(report);
    r.exit_code = verdict == causes::Verdict::Unknown ? kExitUnknown : kExitAnswered;
  });
}

}  // namespace icl::cli
