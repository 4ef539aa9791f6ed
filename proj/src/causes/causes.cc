#include "icl/causes.h"

#include <algorithm>

namespace icl::causes {

using scm::CausalModel;
using scm::Context;
using scm::Expr;
using scm::Value;
using scm::VarId;

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::False:
      return "false";
    case Verdict::True:
      return "true";
    case Verdict::Unknown:
      return "unknown";
  }
  return "";
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::None:
      return "none";
    case Condition::AC1:
      return "AC1";
    case Condition::AC2:
      return "AC2";
    case Condition::AC3:
      return "AC3";
  }
  return "";
}

std::vector<bool> ancestors(const CausalModel& model, const std::vector<VarId>& roots) {
  std::vector<bool> seen(model.variables().size(), false);
  std::vector<VarId> stack;
  for (VarId r : roots) {
    if (model.in_v(r) && !seen[r]) {
      seen[r] = true;
      stack.push_back(r);
    }
  }
  while (!stack.empty()) {
    const VarId v = stack.back();
    stack.pop_back();
    for (const auto& p : model.mechanism(v).parents) {
      if (p.exogenous || !model.in_v(p.index) || seen[p.index]) continue;
      seen[p.index] = true;
      stack.push_back(p.index);
    }
  }
  return seen;
}

namespace {

void check_query(const CausalModel& model, const Context& u, const Assignment& x, const Expr& phi) {
  model.check_context(u);
  scm::check_event(model, phi);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const auto [id, v] = x[i];
    if (id >= model.variables().size() || !model.in_v(id)) throw scm::ModelError("cause variable not in V");
    if (v >= model.variable(id).domain.size()) throw scm::ModelError("cause value out of domain");
    for (std::size_t j = 0; j < i; ++j) {
      if (x[j].first == id) throw scm::ModelError("cause mentions a variable twice");
    }
  }
  if (!model.recursive()) throw scm::ModelError("model is not recursive");
}

// Steps a mixed-radix counter; false once it wraps around.
bool next_value(std::vector<Value>& digits, const std::vector<std::size_t>& sizes) {
  for (std::size_t k = digits.size(); k-- > 0;) {
    if (++digits[k] < sizes[k]) return true;
    digits[k] = 0;
  }
  return false;
}

bool next_combination(std::vector<std::size_t>& idx, std::size_t n) {
  const std::size_t k = idx.size();
  for (std::size_t i = k; i-- > 0;) {
    if (idx[i] < n - k + i) {
      ++idx[i];
      for (std::size_t j = i + 1; j < k; ++j) idx[j] = idx[j - 1] + 1;
      return true;
    }
  }
  return false;
}

class Engine {
 public:
  Engine(const CausalModel& m, const Context& u, const Assignment& x, const Expr& phi,
         const SearchOptions& opts)
      : m_(m), u_(u), x_(x), phi_(phi), opts_(opts), n_(m.variables().size()) {
    actual_ = m_.solve(u_);
    is_x_.assign(n_, false);
    for (const auto& [id, _] : x_) is_x_[id] = true;
    anc_ = ancestors(m_, scm::event_variables(phi_));
    for (VarId v : m_.order()) {
      if (anc_[v]) rel_order_.push_back(v);
    }
    for (VarId v : m_.endogenous_ids()) {
      if (is_x_[v]) continue;
      if (opts_.oracle || anc_[v]) candidates_.push_back(v);
    }
    is_w_.assign(n_, false);
    ov_.assign(n_, -1);
  }

  CauseVerdict run() {
    CauseVerdict out;
    out.stats.candidates = candidates_.size();
    stats_ = &out.stats;
    for (const auto& [id, v] : x_) {
      if (actual_[id] != v) {
        out.failed = Condition::AC1;
        return out;
      }
    }
    ++out.stats.evaluations;
    if (!scm::eval_expr(phi_, u_, actual_)) {
      out.failed = Condition::AC1;
      return out;
    }
    if (x_.empty()) {
      out.failed = Condition::AC2;
      return out;
    }
    std::vector<std::size_t> xsizes;
    for (const auto& [id, _] : x_) xsizes.push_back(m_.variable(id).domain.size());

    bool unknown = false;
    for (std::size_t k = 0; k <= candidates_.size(); ++k) {
      std::vector<std::size_t> idx(k);
      for (std::size_t i = 0; i < k; ++i) idx[i] = i;
      do {
        std::vector<VarId> w_vars;
        std::vector<std::size_t> wsizes;
        for (std::size_t i : idx) {
          w_vars.push_back(candidates_[i]);
          wsizes.push_back(m_.variable(candidates_[i]).domain.size());
        }
        std::vector<Value> w(k, 0);
        do {
          if (++out.stats.pairs > opts_.budget) {
            out.verdict = Verdict::Unknown;
            out.note = "search budget of " + std::to_string(opts_.budget) + " (W, w) pairs exhausted";
            return out;
          }
          switch (try_pair(w_vars, w, xsizes, out)) {
            case Verdict::True:
              out.verdict = Verdict::True;
              return out;
            case Verdict::Unknown:
              unknown = true;
              break;
            case Verdict::False:
              break;
          }
        } while (next_value(w, wsizes));
      } while (k > 0 && next_combination(idx, candidates_.size()));
    }
    out.failed = Condition::AC2;
    if (unknown) {
      out.verdict = Verdict::Unknown;
      out.note = "AC2(b) enumeration cap of " + std::to_string(opts_.z_branch_cap) + " reached";
    }
    return out;
  }

 private:
  // Propagates change from `seeds` through children that are ancestors of
  // phi.  Intervened variables are marked but not expanded.
  std::vector<bool> reach(const std::vector<VarId>& seeds) const {
    std::vector<bool> seen(n_, false);
    std::vector<VarId> stack;
    for (VarId s : seeds) stack.push_back(s);
    while (!stack.empty()) {
      const VarId v = stack.back();
      stack.pop_back();
      for (VarId c : m_.children()[v]) {
        if (seen[c] || !m_.in_v(c) || !(anc_[c] || opts_.oracle)) continue;
        seen[c] = true;
        if (!is_x_[c] && !is_w_[c]) stack.push_back(c);
      }
    }
    return seen;
  }

  Verdict try_pair(const std::vector<VarId>& w_vars, const std::vector<Value>& w,
                   const std::vector<std::size_t>& xsizes, CauseVerdict& out) {
    for (VarId v : w_vars) is_w_[v] = true;
    struct Reset {
      Engine* e;
      const std::vector<VarId>& vs;
      ~Reset() {
        for (VarId v : vs) e->is_w_[v] = false;
      }
    } reset{this, w_vars};

    std::vector<VarId> changed_w;
    for (std::size_t i = 0; i < w_vars.size(); ++i) {
      if (w[i] != actual_[w_vars[i]]) changed_w.push_back(w_vars[i]);
    }
    std::optional<Verdict> b;  // AC2(b), computed on demand
    std::vector<Value> xbar(x_.size(), 0);
    do {
      bool same = true;
      for (std::size_t i = 0; i < x_.size(); ++i) same = same && xbar[i] == x_[i].second;
      if (same) continue;
      if (!opts_.oracle && redundant(w_vars, w, changed_w, xbar)) continue;
      if (!ac2a(w_vars, w, xbar)) continue;
      if (!b) b = ac2b(w_vars, w, changed_w);
      if (*b == Verdict::True) {
        Witness wit;
        for (std::size_t i = 0; i < w_vars.size(); ++i) wit.w.emplace_back(w_vars[i], w[i]);
        for (std::size_t i = 0; i < x_.size(); ++i) wit.x_bar.emplace_back(x_[i].first, xbar[i]);
        out.witness = std::move(wit);
        return Verdict::True;
      }
      if (*b == Verdict::False) return Verdict::False;  // (b) does not depend on x-bar
      return Verdict::Unknown;
    } while (next_value(xbar, xsizes));
    return Verdict::False;
  }

  // A W variable set to its actual value that nothing changed can reach
  // behaves exactly as if it were left out of W; that smaller pair was
  // examined at a lower depth.
  bool redundant(const std::vector<VarId>& w_vars, const std::vector<Value>& w,
                 std::vector<VarId> seeds, const std::vector<Value>& xbar) const {
    bool any = false;
    for (std::size_t i = 0; i < w_vars.size(); ++i) any = any || w[i] == actual_[w_vars[i]];
    if (!any) return false;
    for (std::size_t i = 0; i < x_.size(); ++i) {
      if (xbar[i] != actual_[x_[i].first]) seeds.push_back(x_[i].first);
    }
    const auto reached = reach(seeds);
    for (std::size_t i = 0; i < w_vars.size(); ++i) {
      if (w[i] == actual_[w_vars[i]] && !reached[w_vars[i]]) return true;
    }
    return false;
  }

  bool eval_phi(const std::vector<int>& ov) {
    ++stats_->evaluations;
    if (opts_.oracle) return scm::eval_expr(phi_, u_, m_.solve(u_, ov));
    values_ = actual_;
    for (VarId v : rel_order_) values_[v] = ov[v] >= 0 ? static_cast<Value>(ov[v]) : m_.apply(v, u_, values_);
    return scm::eval_expr(phi_, u_, values_);
  }

  bool ac2a(const std::vector<VarId>& w_vars, const std::vector<Value>& w, const std::vector<Value>& xbar) {
    for (std::size_t i = 0; i < x_.size(); ++i) ov_[x_[i].first] = xbar[i];
    for (std::size_t i = 0; i < w_vars.size(); ++i) ov_[w_vars[i]] = w[i];
    const bool phi = eval_phi(ov_);
    std::fill(ov_.begin(), ov_.end(), -1);
    return !phi;
  }

  Verdict ac2b(const std::vector<VarId>& w_vars, const std::vector<Value>& w,
               const std::vector<VarId>& changed_w) {
    if (opts_.oracle) return ac2b_subsets(w_vars, w, changed_w);
    // Under M_{x w z}, only descendants of changed W variables can leave
    // their actual value.  Walking them in causal order, each either keeps
    // its mechanism value (not in Z) or is reset to its actual value (in
    // Z); branching only where the two differ visits every reachable
    // state once.
    if (changed_w.empty()) return Verdict::True;  // M_{xw} reproduces the actual world
    const auto reached = reach(changed_w);
    std::vector<VarId> walk;
    for (VarId v : rel_order_) {
      if (reached[v] && !is_x_[v] && !is_w_[v]) walk.push_back(v);
    }
    values_ = actual_;
    for (std::size_t i = 0; i < w_vars.size(); ++i) values_[w_vars[i]] = w[i];
    std::uint64_t visits = 0;
    bool capped = false;
    // Iterative DFS: choice[i] = 0 (mechanism value) or 1 (actual value).
    std::vector<char> choice(walk.size() + 1, 0);
    std::size_t depth = 0;
    bool descending = true;
    for (;;) {
      if (descending) {
        if (depth == walk.size()) {
          ++stats_->evaluations;
          if (++visits > opts_.z_branch_cap) {
            capped = true;
            break;
          }
          if (!scm::eval_expr(phi_, u_, values_)) return Verdict::False;
          descending = false;
          continue;
        }
        const VarId v = walk[depth];
        const Value mv = m_.apply(v, u_, values_);
        values_[v] = mv;
        choice[depth] = mv == actual_[v] ? 2 : 0;  // 2: no branch
        ++depth;
        continue;
      }
      // Backtrack to the deepest level with an untried branch.
      if (depth == 0) break;
      --depth;
      if (choice[depth] == 0) {
        choice[depth] = 1;
        values_[walk[depth]] = actual_[walk[depth]];
        ++depth;
        descending = true;
      }
    }
    return capped ? Verdict::Unknown : Verdict::True;
  }

  // Every subset Z' of Z, each with a full solve.  Resetting a variable no
  // changed W variable reaches, or one phi does not depend on, is a no-op,
  // so only those that remain are enumerated.
  Verdict ac2b_subsets(const std::vector<VarId>& w_vars, const std::vector<Value>& w,
                       const std::vector<VarId>& changed_w) {
    const auto reached = reach(changed_w);
    std::vector<VarId> z;
    for (VarId v : m_.endogenous_ids()) {
      if (!is_x_[v] && !is_w_[v] && reached[v] && anc_[v]) z.push_back(v);
    }
    if (z.size() >= 63) return Verdict::Unknown;
    std::vector<int> ov(n_, -1);
    for (const auto& [id, v] : x_) ov[id] = v;
    for (std::size_t i = 0; i < w_vars.size(); ++i) ov[w_vars[i]] = w[i];
    const std::uint64_t subsets = std::uint64_t{1} << z.size();
    if (subsets > opts_.z_branch_cap) return Verdict::Unknown;
    for (std::uint64_t mask = 0; mask < subsets; ++mask) {
      for (std::size_t i = 0; i < z.size(); ++i) ov[z[i]] = (mask >> i) & 1 ? actual_[z[i]] : -1;
      if (!eval_phi(ov)) return Verdict::False;
    }
    return Verdict::True;
  }

  const CausalModel& m_;
  const Context& u_;
  const Assignment& x_;
  const Expr& phi_;
  SearchOptions opts_;
  std::size_t n_;
  std::vector<Value> actual_, values_;
  std::vector<bool> is_x_, is_w_, anc_;
  std::vector<VarId> rel_order_, candidates_;
  std::vector<int> ov_;
  SearchStats* stats_ = nullptr;
};

}  // namespace

CauseVerdict is_weak_cause(const CausalModel& model, const Context& u, const Assignment& x,
                           const Expr& phi, const SearchOptions& options) {
  check_query(model, u, x, phi);
  return Engine(model, u, x, phi, options).run();
}

CauseVerdict is_actual_cause(const CausalModel& model, const Context& u, const Assignment& x,
                             const Expr& phi, const SearchOptions& options) {
  CauseVerdict weak = is_weak_cause(model, u, x, phi, options);
  if (weak.verdict != Verdict::True) return weak;
  bool unknown = false;
  std::string note;
  // Nonempty proper subsets, smallest first.  The empty set never
  // satisfies AC2(a).
  for (std::size_t k = 1; k < x.size(); ++k) {
    std::vector<std::size_t> idx(k);
    for (std::size_t i = 0; i < k; ++i) idx[i] = i;
    do {
      Assignment sub;
      for (std::size_t i : idx) sub.push_back(x[i]);
      CauseVerdict v = is_weak_cause(model, u, sub, phi, options);
      weak.stats.pairs += v.stats.pairs;
      weak.stats.evaluations += v.stats.evaluations;
      if (v.verdict == Verdict::True) {
        CauseVerdict out;
        out.failed = Condition::AC3;
        out.smaller_cause = std::move(sub);
        out.stats = weak.stats;
        return out;
      }
      if (v.verdict == Verdict::Unknown) {
        unknown = true;
        note = v.note;
      }
    } while (next_combination(idx, x.size()));
  }
  if (unknown) {
    weak.verdict = Verdict::Unknown;
    weak.note = "AC3 undecided: " + note;
  }
  return weak;
}

WitnessCheck check_witness(const CausalModel& model, const Context& u, const Assignment& x,
                           const Expr& phi, const Witness& witness) {
  check_query(model, u, x, phi);
  const auto actual = model.solve(u);
  const std::size_t n = model.variables().size();
  std::vector<int> ov(n, -1);
  std::vector<bool> fixed(n, false);
  for (const auto& [id, v] : witness.x_bar) {
    ov[id] = v;
    fixed[id] = true;
  }
  for (const auto& [id, v] : witness.w) {
    ov[id] = v;
    fixed[id] = true;
  }
  WitnessCheck out;
  out.ac2a = !scm::eval_expr(phi, u, model.solve(u, ov));

  for (const auto& [id, v] : x) ov[id] = v;
  const auto anc = ancestors(model, scm::event_variables(phi));
  // Candidates for Z that can matter: descendants of changed W variables
  // that are ancestors of phi.
  std::vector<bool> reached(n, false);
  std::vector<VarId> stack;
  for (const auto& [id, v] : witness.w) {
    if (v != actual[id]) stack.push_back(id);
  }
  while (!stack.empty()) {
    VarId v = stack.back();
    stack.pop_back();
    for (VarId c : model.children()[v]) {
      if (reached[c] || !model.in_v(c)) continue;
      reached[c] = true;
      if (!fixed[c]) stack.push_back(c);
    }
  }
  std::vector<VarId> z;
  for (VarId v : model.endogenous_ids()) {
    if (reached[v] && anc[v] && !fixed[v]) z.push_back(v);
  }
  if (z.size() > 24) throw scm::ModelError("check_witness: too many variables to enumerate");
  out.ac2b = true;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << z.size()) && out.ac2b; ++mask) {
    std::vector<int> o = ov;
    for (std::size_t i = 0; i < z.size(); ++i) {
      if ((mask >> i) & 1) o[z[i]] = actual[z[i]];
    }
    out.ac2b = scm::eval_expr(phi, u, model.solve(u, o));
  }
  return out;
}

std::string render_assignment(const CausalModel& model, const Assignment& a) {
  std::string out;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i) out += ", ";
    const auto& var = model.variable(a[i].first);
    out += var.name + " = " + var.domain.at(a[i].second);
  }
  return out;
}

}  // namespace icl::causes
