#include "cdl/prover.hpp"

#include <algorithm>
#include <set>

namespace cdl {

namespace {

struct BudgetHit {};

bool contains(const std::vector<Formula>& ctx, const Formula& f) {
  return std::find(ctx.begin(), ctx.end(), f) != ctx.end();
}

std::vector<Formula> with(const std::vector<Formula>& ctx, const Formula& f) {
  if (contains(ctx, f)) return ctx;
  auto out = ctx;
  out.push_back(f);
  return out;
}

// Can chains of projections and value-restriction instantiations starting
// from c ever produce the target concept? Ignores subjects; used only to
// prune hopeless subsumption unfolds.
bool may_reach(const Concept& c, const Concept& target) {
  if (c == target) return true;
  switch (c.kind()) {
    case Concept::Kind::And:
      return may_reach(c.left(), target) || may_reach(c.right(), target);
    case Concept::Kind::Forall:
      return may_reach(c.child(), target);
    default:
      return false;
  }
}

class Searcher {
 public:
  Searcher(const Signature& sig, long max_nodes) : sig_(sig), max_nodes_(max_nodes) {}

  long nodes() const { return nodes_; }

  std::optional<Proof> search(const std::vector<Formula>& ctx, const Formula& goal,
                              int depth) {
    if (++nodes_ > max_nodes_) throw BudgetHit{};
    if (depth <= 0) return std::nullopt;
    std::string key = sequent_key(ctx, goal);
    if (visited_.count(key)) return std::nullopt;
    visited_.insert(key);
    auto out = search_inner(ctx, goal, depth);
    visited_.erase(key);
    return out;
  }

 private:
  std::string sequent_key(const std::vector<Formula>& ctx, const Formula& goal) {
    std::set<std::string> parts;
    for (const auto& f : ctx) parts.insert(f.to_string());
    std::string key;
    for (const auto& p : parts) key += p + ";";
    return key + "|-" + goal.to_string();
  }

  // Chase projections and value restrictions from a derived membership until
  // the goal appears.
  std::optional<Proof> focus(const Formula& f, Proof pf, const std::vector<Formula>& ctx,
                             const Formula& goal) {
    if (++nodes_ > max_nodes_) throw BudgetHit{};
    if (f == goal) return pf;
    if (f.kind() != Formula::Kind::Member) return std::nullopt;
    const Concept& c = f.concept_expr();
    if (c.kind() == Concept::Kind::And) {
      if (auto r = focus(Formula::member(f.subject(), c.left()), Proof::and_e(1, pf), ctx, goal))
        return r;
      if (auto r = focus(Formula::member(f.subject(), c.right()), Proof::and_e(2, pf), ctx, goal))
        return r;
      return std::nullopt;
    }
    if (c.kind() == Concept::Kind::Forall) {
      for (const auto& h : ctx) {
        if (h.kind() != Formula::Kind::Role) continue;
        if (!(h.subject() == f.subject()) || h.role_name() != c.role()) continue;
        if (auto r = focus(Formula::member(h.object(), c.child()), Proof::all_e(h, pf), ctx,
                           goal))
          return r;
      }
      return std::nullopt;
    }
    return std::nullopt;
  }

  // Every membership reachable from the context by focusing, paired with its
  // derivation; used to seed case splits.
  void collect_focus(const Formula& f, const Proof& pf, const std::vector<Formula>& ctx,
                     std::vector<std::pair<Formula, Proof>>& out, int fuel) {
    if (fuel <= 0) return;
    out.emplace_back(f, pf);
    if (f.kind() != Formula::Kind::Member) return;
    const Concept& c = f.concept_expr();
    if (c.kind() == Concept::Kind::And) {
      collect_focus(Formula::member(f.subject(), c.left()), Proof::and_e(1, pf), ctx, out,
                    fuel - 1);
      collect_focus(Formula::member(f.subject(), c.right()), Proof::and_e(2, pf), ctx, out,
                    fuel - 1);
    } else if (c.kind() == Concept::Kind::Forall) {
      for (const auto& h : ctx) {
        if (h.kind() != Formula::Kind::Role) continue;
        if (!(h.subject() == f.subject()) || h.role_name() != c.role()) continue;
        collect_focus(Formula::member(h.object(), c.child()), Proof::all_e(h, pf), ctx, out,
                      fuel - 1);
      }
    }
  }

  std::string fresh_variable(const std::vector<Formula>& ctx, const Formula& goal) {
    std::set<std::string> used;
    auto mark = [&used](const Formula& f) {
      for (const auto& v : free_variables(f)) used.insert(v);
    };
    for (const auto& f : ctx) mark(f);
    mark(goal);
    for (const auto& v : sig_.variables())
      if (!used.count(v)) return v;
    return "";  // none left: the branch fails
  }

  std::optional<Proof> search_inner(const std::vector<Formula>& ctx, const Formula& goal,
                                    int depth) {
    // Hypothesis.
    if (contains(ctx, goal)) return Proof::hyp(goal);

    // Focused elimination chains from each hypothesis.
    for (const auto& h : ctx) {
      if (h.kind() != Formula::Kind::Member) continue;
      if (auto r = focus(h, Proof::hyp(h), ctx, goal)) return r;
    }

    // Introduction rules on the goal.
    if (goal.kind() == Formula::Kind::Member) {
      const Concept& c = goal.concept_expr();
      const Term& t = goal.subject();
      switch (c.kind()) {
        case Concept::Kind::And: {
          auto l = search(ctx, Formula::member(t, c.left()), depth - 1);
          if (l) {
            auto r = search(ctx, Formula::member(t, c.right()), depth - 1);
            if (r) return Proof::and_i(std::move(*l), std::move(*r));
          }
          break;
        }
        case Concept::Kind::Or: {
          if (auto l = search(ctx, Formula::member(t, c.left()), depth - 1))
            return Proof::or_i(1, c, std::move(*l));
          if (auto r = search(ctx, Formula::member(t, c.right()), depth - 1))
            return Proof::or_i(2, c, std::move(*r));
          break;
        }
        case Concept::Kind::Exists: {
          for (const auto& h : ctx) {
            if (h.kind() != Formula::Kind::Role) continue;
            if (!(h.subject() == t) || h.role_name() != c.role()) continue;
            if (auto p = search(ctx, Formula::member(h.object(), c.child()), depth - 1))
              return Proof::ex_i(h, std::move(*p));
          }
          break;
        }
        case Concept::Kind::Forall: {
          std::string p = fresh_variable(ctx, goal);
          if (p.empty()) break;
          Formula edge = Formula::role(t, Term::variable(p), c.role());
          if (auto body = search(with(ctx, edge),
                                 Formula::member(Term::variable(p), c.child()), depth - 1))
            return Proof::all_i(p, std::move(*body));
          break;
        }
        case Concept::Kind::Not: {
          Formula discharged = Formula::member(t, c.child());
          if (auto body = search(with(ctx, discharged), Formula::bot(), depth - 1))
            return Proof::neg_i(discharged, std::move(*body));
          break;
        }
        case Concept::Kind::Atom:
          break;
      }
    } else if (goal.kind() == Formula::Kind::Bot) {
      for (const auto& h : ctx) {
        if (h.kind() != Formula::Kind::Member) continue;
        if (h.concept_expr().kind() != Concept::Kind::Not) continue;
        Formula pos = Formula::member(h.subject(), h.concept_expr().child());
        if (auto p = search(ctx, pos, depth - 1))
          return Proof::bot_i(std::move(*p), Proof::hyp(h));
      }
    }

    // Subsumption unfolding keyed by the goal's subject.
    if (goal.kind() == Formula::Kind::Member) {
      const Term& t = goal.subject();
      for (const auto& h : ctx) {
        if (h.kind() != Formula::Kind::Subsume) continue;
        if (!may_reach(h.concept_expr(), goal.concept_expr())) continue;
        Formula antecedent = Formula::member(t, Concept::atom(h.antecedent()));
        if (auto pa = search(ctx, antecedent, depth - 1)) {
          Proof unfolded = Proof::sub_e(h, std::move(*pa));
          if (auto r = focus(Formula::member(t, h.concept_expr()), std::move(unfolded), ctx,
                             goal))
            return r;
        }
      }
    }

    // Case splits on reachable disjunctions and existentials.
    std::vector<std::pair<Formula, Proof>> reachable;
    for (const auto& h : ctx) {
      if (h.kind() != Formula::Kind::Member) continue;
      collect_focus(h, Proof::hyp(h), ctx, reachable, 8);
    }
    for (const auto& [f, pf] : reachable) {
      if (f.kind() != Formula::Kind::Member) continue;
      const Concept& c = f.concept_expr();
      if (c.kind() == Concept::Kind::Or) {
        Formula h1 = Formula::member(f.subject(), c.left());
        Formula h2 = Formula::member(f.subject(), c.right());
        if (contains(ctx, h1) || contains(ctx, h2)) continue;  // split adds nothing
        auto l = search(with(ctx, h1), goal, depth - 1);
        if (!l) continue;
        auto r = search(with(ctx, h2), goal, depth - 1);
        if (!r) continue;
        return Proof::or_e(pf, std::move(*l), std::move(*r));
      }
      if (c.kind() == Concept::Kind::Exists) {
        std::string p = fresh_variable(ctx, goal);
        if (p.empty()) continue;
        if (f.subject().is_var && f.subject().name == p) continue;
        Formula edge = Formula::role(f.subject(), Term::variable(p), c.role());
        Formula member = Formula::member(Term::variable(p), c.child());
        if (auto body = search(with(with(ctx, edge), member), goal, depth - 1))
          return Proof::ex_e(p, pf, std::move(*body));
      }
    }
    return std::nullopt;
  }

  const Signature& sig_;
  long max_nodes_;
  long nodes_ = 0;
  std::set<std::string> visited_;
};

}  // namespace

ProveResult prove(const std::vector<Formula>& tbox, const std::vector<Formula>& context,
                  const Formula& goal, const Signature& sig, const SearchBudget& budget) {
  if (budget.max_depth <= 0 || budget.max_nodes <= 0)
    throw error("search budget must be positive");
  std::vector<Formula> ctx;
  for (const auto& f : tbox)
    if (!contains(ctx, f)) ctx.push_back(f);
  for (const auto& f : context)
    if (!contains(ctx, f)) ctx.push_back(f);

  ProveResult result;
  Searcher s(sig, budget.max_nodes);
  try {
    for (int d = 1; d <= budget.max_depth; ++d) {
      result.stats.depth_used = d;
      if (auto p = s.search(ctx, goal, d)) {
        result.stats.nodes = s.nodes();
        check_proof(*p, sig);  // never hand out an unchecked proof
        result.proof = std::move(p);
        return result;
      }
    }
  } catch (const BudgetHit&) {
    result.stats.budget_exhausted = true;
  }
  result.stats.nodes = s.nodes();
  return result;
}

}  // namespace cdl
