#include "cdl/ndproof.hpp"

#include <algorithm>
#include <optional>
#include <sstream>

#include "cdl/parser.hpp"
#include "lexer.hpp"

namespace cdl {

namespace {

using PK = proof_error::Kind;

[[noreturn]] void fail(PK kind, const std::string& msg) { throw proof_error(kind, msg); }

std::vector<Formula> dedup_union(const std::vector<Formula>& a, const std::vector<Formula>& b) {
  std::vector<Formula> out = a;
  for (const auto& f : b)
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  return out;
}

std::vector<Formula> without(const std::vector<Formula>& ctx, const Formula& f) {
  std::vector<Formula> out;
  for (const auto& g : ctx)
    if (!(g == f)) out.push_back(g);
  return out;
}

bool mentions(const Formula& f, const std::string& var) {
  auto vs = free_variables(f);
  return std::find(vs.begin(), vs.end(), var) != vs.end();
}

std::optional<std::size_t> index_of(const std::vector<Formula>& ctx, const Formula& f) {
  for (std::size_t i = 0; i < ctx.size(); ++i)
    if (ctx[i] == f) return i;
  return std::nullopt;
}

}  // namespace

std::string Sequent::to_string() const {
  std::string out;
  for (std::size_t i = 0; i < context.size(); ++i) {
    if (i) out += "; ";
    out += context[i].to_string();
  }
  out += (context.empty() ? "|- " : " |- ");
  out += goal.to_string();
  return out;
}

// ── Proof nodes ─────────────────────────────────────────────────────────────

struct Proof::Node {
  Rule rule;
  std::vector<Proof> premises;
  std::vector<Formula> ctx;            // Hyp context
  std::optional<Formula> f;            // Hyp formula, BotE target, SubE, NegI, ExI, AllE
  std::optional<Concept> c;            // OrIk disjunction
  int k = 0;                           // AndEk / OrIk index
  std::string eigen;                   // ExE / AllI
};

Proof Proof::hyp(Formula k) {
  std::vector<Formula> ctx = {k};
  return hyp(std::move(ctx), std::move(k));
}
Proof Proof::hyp(std::vector<Formula> ctx, Formula k) {
  return make(Rule::Hyp, {}, std::move(ctx), std::move(k), std::nullopt, 0, "");
}
Proof Proof::bot_i(Proof pos, Proof neg) {
  return make(Rule::BotI, {std::move(pos), std::move(neg)}, {}, std::nullopt, std::nullopt, 0, "");
}
Proof Proof::bot_e(Formula target, Proof p) {
  return make(Rule::BotE, {std::move(p)}, {}, std::move(target), std::nullopt, 0, "");
}
Proof Proof::sub_e(Formula subsumption, Proof p) {
  return make(Rule::SubE, {std::move(p)}, {}, std::move(subsumption), std::nullopt, 0, "");
}
Proof Proof::neg_i(Formula discharged, Proof p) {
  return make(Rule::NegI, {std::move(p)}, {}, std::move(discharged), std::nullopt, 0, "");
}
Proof Proof::and_i(Proof l, Proof r) {
  return make(Rule::AndI, {std::move(l), std::move(r)}, {}, std::nullopt, std::nullopt, 0, "");
}
Proof Proof::and_e(int k, Proof p) {
  if (k != 1 && k != 2) throw error("projection index must be 1 or 2");
  return make(k == 1 ? Rule::AndE1 : Rule::AndE2, {std::move(p)}, {}, std::nullopt,
              std::nullopt, k, "");
}
Proof Proof::or_i(int k, Concept disjunction, Proof p) {
  if (k != 1 && k != 2) throw error("injection index must be 1 or 2");
  return make(k == 1 ? Rule::OrI1 : Rule::OrI2, {std::move(p)}, {}, std::nullopt,
              std::move(disjunction), k, "");
}
Proof Proof::or_e(Proof major, Proof left_case, Proof right_case) {
  return make(Rule::OrE, {std::move(major), std::move(left_case), std::move(right_case)}, {},
              std::nullopt, std::nullopt, 0, "");
}
Proof Proof::ex_i(Formula role_assertion, Proof p) {
  return make(Rule::ExI, {std::move(p)}, {}, std::move(role_assertion), std::nullopt, 0, "");
}
Proof Proof::ex_e(std::string eigenvariable, Proof major, Proof body) {
  return make(Rule::ExE, {std::move(major), std::move(body)}, {}, std::nullopt, std::nullopt, 0,
              std::move(eigenvariable));
}
Proof Proof::all_i(std::string eigenvariable, Proof p) {
  return make(Rule::AllI, {std::move(p)}, {}, std::nullopt, std::nullopt, 0,
              std::move(eigenvariable));
}
Proof Proof::all_e(Formula role_assertion, Proof p) {
  return make(Rule::AllE, {std::move(p)}, {}, std::move(role_assertion), std::nullopt, 0, "");
}

Proof Proof::make(Rule r, std::vector<Proof> prem, std::vector<Formula> ctx,
                  std::optional<Formula> f, std::optional<Concept> c, int k,
                  std::string eigen) {
  auto n = std::make_shared<Node>();
  n->rule = r;
  n->premises = std::move(prem);
  n->ctx = std::move(ctx);
  n->f = std::move(f);
  n->c = std::move(c);
  n->k = k;
  n->eigen = std::move(eigen);
  return Proof(std::move(n));
}

Proof::Rule Proof::rule() const { return node_->rule; }
const std::vector<Proof>& Proof::premises() const { return node_->premises; }
const std::vector<Formula>& Proof::hyp_context() const { return node_->ctx; }
const Formula& Proof::data_formula() const {
  if (!node_->f) throw error("proof node has no formula payload");
  return *node_->f;
}
const Concept& Proof::data_concept() const {
  if (!node_->c) throw error("proof node has no concept payload");
  return *node_->c;
}
int Proof::data_index() const { return node_->k; }
const std::string& Proof::eigenvariable() const { return node_->eigen; }

bool Proof::operator==(const Proof& o) const {
  if (node_ == o.node_) return true;
  if (node_->rule != o.node_->rule || node_->k != o.node_->k ||
      node_->eigen != o.node_->eigen || node_->ctx != o.node_->ctx)
    return false;
  if (node_->f.has_value() != o.node_->f.has_value()) return false;
  if (node_->f && !(*node_->f == *o.node_->f)) return false;
  if (node_->c.has_value() != o.node_->c.has_value()) return false;
  if (node_->c && !(*node_->c == *o.node_->c)) return false;
  return node_->premises == o.node_->premises;
}

// ── Printing ────────────────────────────────────────────────────────────────

namespace {

const char* tag_name(Proof::Rule r) {
  switch (r) {
    case Proof::Rule::Hyp: return "hyp";
    case Proof::Rule::BotI: return "botI";
    case Proof::Rule::BotE: return "botE";
    case Proof::Rule::SubE: return "subE";
    case Proof::Rule::NegI: return "notI";
    case Proof::Rule::AndI: return "andI";
    case Proof::Rule::AndE1: return "andE1";
    case Proof::Rule::AndE2: return "andE2";
    case Proof::Rule::OrI1: return "orI1";
    case Proof::Rule::OrI2: return "orI2";
    case Proof::Rule::OrE: return "orE";
    case Proof::Rule::ExI: return "existsI";
    case Proof::Rule::ExE: return "existsE";
    case Proof::Rule::AllI: return "forallI";
    case Proof::Rule::AllE: return "forallE";
  }
  return "?";
}

void print_proof(std::ostream& os, const Proof& p, int indent) {
  std::string pad(static_cast<std::size_t>(indent), ' ');
  os << "(" << tag_name(p.rule());
  switch (p.rule()) {
    case Proof::Rule::Hyp: {
      os << " \"" << p.data_formula().to_string() << "\"";
      for (const auto& f : p.hyp_context())
        if (!(f == p.data_formula())) os << " \"" << f.to_string() << "\"";
      os << ")";
      return;
    }
    case Proof::Rule::BotE:
    case Proof::Rule::SubE:
    case Proof::Rule::NegI:
    case Proof::Rule::ExI:
    case Proof::Rule::AllE:
      os << " \"" << p.data_formula().to_string() << "\"";
      break;
    case Proof::Rule::OrI1:
    case Proof::Rule::OrI2:
      os << " \"" << p.data_concept().to_string() << "\"";
      break;
    case Proof::Rule::ExE:
    case Proof::Rule::AllI:
      os << " " << p.eigenvariable();
      break;
    default:
      break;
  }
  for (const auto& q : p.premises()) {
    os << "\n" << pad << "  ";
    print_proof(os, q, indent + 2);
  }
  os << ")";
}

}  // namespace

std::string Proof::to_string() const {
  std::ostringstream os;
  print_proof(os, *this, 0);
  return os.str();
}

// ── Parsing ─────────────────────────────────────────────────────────────────

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

Proof parse_proof_sexp(Lexer& lx, const Signature& sig) {
  lx.expect(Tok::LParen, "'('");
  Token tag = lx.expect(Tok::Ident, "a rule tag");
  auto formula_arg = [&] {
    Token s = lx.expect(Tok::String, "a quoted formula");
    try {
      return parse_formula(s.text, sig);
    } catch (const parse_error& e) {
      throw parse_error(std::string(e.what()) + " in proof argument", s.line, s.col);
    }
  };
  auto concept_arg = [&] {
    Token s = lx.expect(Tok::String, "a quoted concept");
    try {
      return parse_concept(s.text, sig);
    } catch (const parse_error& e) {
      throw parse_error(std::string(e.what()) + " in proof argument", s.line, s.col);
    }
  };
  auto sub = [&] { return parse_proof_sexp(lx, sig); };
  auto close = [&] { lx.expect(Tok::RParen, "')'"); };

  const std::string& t = tag.text;
  if (t == "hyp") {
    Formula k = formula_arg();
    std::vector<Formula> ctx = {k};
    while (lx.at(Tok::String)) {
      Formula extra = formula_arg();
      if (std::find(ctx.begin(), ctx.end(), extra) == ctx.end()) ctx.push_back(extra);
    }
    close();
    return Proof::hyp(std::move(ctx), std::move(k));
  }
  if (t == "botI") {
    Proof a = sub(), b = sub();
    close();
    return Proof::bot_i(std::move(a), std::move(b));
  }
  if (t == "botE") {
    Formula k = formula_arg();
    Proof p = sub();
    close();
    return Proof::bot_e(std::move(k), std::move(p));
  }
  if (t == "subE") {
    Formula k = formula_arg();
    Proof p = sub();
    close();
    return Proof::sub_e(std::move(k), std::move(p));
  }
  if (t == "notI") {
    Formula k = formula_arg();
    Proof p = sub();
    close();
    return Proof::neg_i(std::move(k), std::move(p));
  }
  if (t == "andI") {
    Proof a = sub(), b = sub();
    close();
    return Proof::and_i(std::move(a), std::move(b));
  }
  if (t == "andE1" || t == "andE2") {
    Proof p = sub();
    close();
    return Proof::and_e(t == "andE1" ? 1 : 2, std::move(p));
  }
  if (t == "orI1" || t == "orI2") {
    Concept c = concept_arg();
    Proof p = sub();
    close();
    return Proof::or_i(t == "orI1" ? 1 : 2, std::move(c), std::move(p));
  }
  if (t == "orE") {
    Proof a = sub(), b = sub(), c = sub();
    close();
    return Proof::or_e(std::move(a), std::move(b), std::move(c));
  }
  if (t == "existsI") {
    Formula k = formula_arg();
    Proof p = sub();
    close();
    return Proof::ex_i(std::move(k), std::move(p));
  }
  if (t == "existsE" || t == "forallI") {
    Token p = lx.expect(Tok::Ident, "an eigenvariable");
    if (!sig.is_variable(p.text))
      throw parse_error("eigenvariable '" + p.text + "' is not a declared variable", p.line,
                        p.col);
    if (t == "existsE") {
      Proof a = sub(), b = sub();
      close();
      return Proof::ex_e(p.text, std::move(a), std::move(b));
    }
    Proof a = sub();
    close();
    return Proof::all_i(p.text, std::move(a));
  }
  if (t == "forallE") {
    Formula k = formula_arg();
    Proof p = sub();
    close();
    return Proof::all_e(std::move(k), std::move(p));
  }
  throw parse_error("unknown proof rule '" + t + "'", tag.line, tag.col);
}

}  // namespace

Proof parse_proof(const std::string& text, const Signature& sig) {
  Lexer lx(text);
  Proof p = parse_proof_sexp(lx, sig);
  if (!lx.at(Tok::End)) lx.fail("trailing input after proof");
  return p;
}

Proof load_proof(const std::string& path, const Signature& sig) {
  return parse_proof(read_file(path), sig);
}

// ── Checking ────────────────────────────────────────────────────────────────

namespace detail {
struct CheckedNode {
  CheckedNode(Proof::Rule rule, Sequent seq) : rule(rule), seq(std::move(seq)) {}
  Proof::Rule rule;
  Sequent seq;
  std::vector<std::shared_ptr<const CheckedNode>> premises;
  // Rule payloads copied out of the proof node, plus the hypotheses each
  // premise discharges, resolved once at check time.
  std::optional<Formula> f;
  int k = 0;
  std::string eigen;
  std::vector<Formula> discharged;
};
}  // namespace detail

namespace {

using Checked = detail::CheckedNode;
using CheckedPtr = std::shared_ptr<const Checked>;

Formula member_of(const Term& t, const Concept& c) { return Formula::member(t, c); }

// Requires the goal to be a membership; returns (term, concept).
std::pair<Term, Concept> as_member(const Sequent& s, const char* rule) {
  if (s.goal.kind() != Formula::Kind::Member)
    fail(PK::rule_mismatch,
         std::string(rule) + ": premise concludes " + s.goal.to_string() +
             ", expected a concept membership");
  return {s.goal.subject(), s.goal.concept_expr()};
}

CheckedPtr check_node(const Proof& p, const Signature& sig);

CheckedPtr finish(Proof::Rule r, Sequent seq, std::vector<CheckedPtr> prem,
                  std::optional<Formula> f = std::nullopt, int k = 0, std::string eigen = "",
                  std::vector<Formula> discharged = {}) {
  auto n = std::make_shared<Checked>(r, std::move(seq));
  n->premises = std::move(prem);
  n->f = std::move(f);
  n->k = k;
  n->eigen = std::move(eigen);
  n->discharged = std::move(discharged);
  return n;
}

CheckedPtr check_node(const Proof& p, const Signature& sig) {
  switch (p.rule()) {
    case Proof::Rule::Hyp: {
      const Formula& k = p.data_formula();
      if (!index_of(p.hyp_context(), k))
        fail(PK::hypothesis_not_in_context,
             "hypothesis " + k.to_string() + " is not in its declared context");
      const auto& ctx = p.hyp_context();
      for (std::size_t i = 0; i < ctx.size(); ++i)
        for (std::size_t j = i + 1; j < ctx.size(); ++j)
          if (ctx[i] == ctx[j])
            fail(PK::rule_mismatch,
                 "hypothesis context repeats " + ctx[i].to_string());
      return finish(p.rule(), Sequent{ctx, k}, {});
    }
    case Proof::Rule::BotI: {
      auto p1 = check_node(p.premises()[0], sig);
      auto p2 = check_node(p.premises()[1], sig);
      auto [t1, c1] = as_member(p1->seq, "botI");
      auto [t2, c2] = as_member(p2->seq, "botI");
      if (!(t1 == t2) || c2.kind() != Concept::Kind::Not || !(c2.child() == c1))
        fail(PK::rule_mismatch, "botI: premises must conclude t : C and t : not C, got " +
                                    p1->seq.goal.to_string() + " and " +
                                    p2->seq.goal.to_string());
      Sequent seq{dedup_union(p1->seq.context, p2->seq.context), Formula::bot()};
      return finish(p.rule(), std::move(seq), {p1, p2});
    }
    case Proof::Rule::BotE: {
      auto p1 = check_node(p.premises()[0], sig);
      if (p1->seq.goal.kind() != Formula::Kind::Bot)
        fail(PK::rule_mismatch, "botE: premise concludes " + p1->seq.goal.to_string() +
                                    ", expected bot");
      Sequent seq{p1->seq.context, p.data_formula()};
      return finish(p.rule(), std::move(seq), {p1}, p.data_formula());
    }
    case Proof::Rule::SubE: {
      const Formula& ax = p.data_formula();
      if (ax.kind() != Formula::Kind::Subsume)
        fail(PK::rule_mismatch, "subE: payload must be a subsumption, got " + ax.to_string());
      auto p1 = check_node(p.premises()[0], sig);
      auto [t, c] = as_member(p1->seq, "subE");
      if (c.kind() != Concept::Kind::Atom || c.name() != ax.antecedent())
        fail(PK::rule_mismatch, "subE: premise concludes " + p1->seq.goal.to_string() +
                                    ", expected the antecedent of " + ax.to_string());
      Sequent seq{dedup_union(p1->seq.context, {ax}), member_of(t, ax.concept_expr())};
      return finish(p.rule(), std::move(seq), {p1}, ax);
    }
    case Proof::Rule::NegI: {
      const Formula& d = p.data_formula();
      if (d.kind() != Formula::Kind::Member)
        fail(PK::rule_mismatch, "notI: discharged hypothesis must be a membership, got " +
                                    d.to_string());
      auto p1 = check_node(p.premises()[0], sig);
      if (p1->seq.goal.kind() != Formula::Kind::Bot)
        fail(PK::rule_mismatch, "notI: premise concludes " + p1->seq.goal.to_string() +
                                    ", expected bot");
      Sequent seq{without(p1->seq.context, d),
                  member_of(d.subject(), Concept::negation(d.concept_expr()))};
      return finish(p.rule(), std::move(seq), {p1}, std::nullopt, 0, "", {d});
    }
    case Proof::Rule::AndI: {
      auto p1 = check_node(p.premises()[0], sig);
      auto p2 = check_node(p.premises()[1], sig);
      auto [t1, c1] = as_member(p1->seq, "andI");
      auto [t2, c2] = as_member(p2->seq, "andI");
      if (!(t1 == t2))
        fail(PK::rule_mismatch, "andI: premises talk about different terms: " +
                                    t1.name + " vs " + t2.name);
      Sequent seq{dedup_union(p1->seq.context, p2->seq.context),
                  member_of(t1, Concept::conj(c1, c2))};
      return finish(p.rule(), std::move(seq), {p1, p2});
    }
    case Proof::Rule::AndE1:
    case Proof::Rule::AndE2: {
      auto p1 = check_node(p.premises()[0], sig);
      auto [t, c] = as_member(p1->seq, "andE");
      if (c.kind() != Concept::Kind::And)
        fail(PK::rule_mismatch, "andE: premise concludes " + p1->seq.goal.to_string() +
                                    ", expected a conjunction membership");
      Sequent seq{p1->seq.context,
                  member_of(t, p.rule() == Proof::Rule::AndE1 ? c.left() : c.right())};
      return finish(p.rule(), std::move(seq), {p1}, std::nullopt, p.data_index());
    }
    case Proof::Rule::OrI1:
    case Proof::Rule::OrI2: {
      const Concept& d = p.data_concept();
      if (d.kind() != Concept::Kind::Or)
        fail(PK::rule_mismatch, "orI: payload must be a disjunction, got " + d.to_string());
      auto p1 = check_node(p.premises()[0], sig);
      auto [t, c] = as_member(p1->seq, "orI");
      Concept expected = p.rule() == Proof::Rule::OrI1 ? d.left() : d.right();
      if (!(c == expected))
        fail(PK::rule_mismatch, "orI: premise concludes " + p1->seq.goal.to_string() +
                                    ", which is not disjunct " + std::to_string(p.data_index()) +
                                    " of " + d.to_string());
      Sequent seq{p1->seq.context, member_of(t, d)};
      return finish(p.rule(), std::move(seq), {p1}, std::nullopt, p.data_index());
    }
    case Proof::Rule::OrE: {
      auto p1 = check_node(p.premises()[0], sig);
      auto p2 = check_node(p.premises()[1], sig);
      auto p3 = check_node(p.premises()[2], sig);
      auto [t, c] = as_member(p1->seq, "orE");
      if (c.kind() != Concept::Kind::Or)
        fail(PK::rule_mismatch, "orE: major premise concludes " + p1->seq.goal.to_string() +
                                    ", expected a disjunction membership");
      if (!(p2->seq.goal == p3->seq.goal))
        fail(PK::rule_mismatch, "orE: the case premises conclude different formulas: " +
                                    p2->seq.goal.to_string() + " vs " +
                                    p3->seq.goal.to_string());
      Formula h1 = member_of(t, c.left());
      Formula h2 = member_of(t, c.right());
      auto ctx = dedup_union(dedup_union(p1->seq.context, without(p2->seq.context, h1)),
                             without(p3->seq.context, h2));
      Sequent seq{std::move(ctx), p2->seq.goal};
      return finish(p.rule(), std::move(seq), {p1, p2, p3}, std::nullopt, 0, "", {h1, h2});
    }
    case Proof::Rule::ExI: {
      const Formula& r = p.data_formula();
      if (r.kind() != Formula::Kind::Role)
        fail(PK::rule_mismatch, "existsI: payload must be a role assertion, got " +
                                    r.to_string());
      auto p1 = check_node(p.premises()[0], sig);
      auto [u, c] = as_member(p1->seq, "existsI");
      if (!(r.object() == u))
        fail(PK::rule_mismatch, "existsI: premise witnesses " + u.name +
                                    " but the role assertion names " + r.object().name);
      Sequent seq{dedup_union(p1->seq.context, {r}),
                  member_of(r.subject(), Concept::exists(r.role_name(), c))};
      return finish(p.rule(), std::move(seq), {p1}, r);
    }
    case Proof::Rule::ExE: {
      const std::string& ev = p.eigenvariable();
      auto p1 = check_node(p.premises()[0], sig);
      auto p2 = check_node(p.premises()[1], sig);
      auto [t, c] = as_member(p1->seq, "existsE");
      if (c.kind() != Concept::Kind::Exists)
        fail(PK::rule_mismatch, "existsE: major premise concludes " +
                                    p1->seq.goal.to_string() +
                                    ", expected an existential membership");
      if (t.is_var && t.name == ev)
        fail(PK::eigenvariable_capture,
             "existsE: eigenvariable " + ev + " equals the subject term");
      Formula hr = Formula::role(t, Term::variable(ev), c.role());
      Formula hm = member_of(Term::variable(ev), c.child());
      auto residual = without(without(p2->seq.context, hr), hm);
      for (const auto& g : residual)
        if (mentions(g, ev))
          fail(PK::eigenvariable_capture, "existsE: eigenvariable " + ev +
                                              " occurs in residual hypothesis " + g.to_string());
      if (mentions(p2->seq.goal, ev))
        fail(PK::eigenvariable_capture,
             "existsE: eigenvariable " + ev + " occurs in the conclusion " +
                 p2->seq.goal.to_string());
      Sequent seq{dedup_union(p1->seq.context, residual), p2->seq.goal};
      return finish(p.rule(), std::move(seq), {p1, p2}, std::nullopt, 0, ev, {hr, hm});
    }
    case Proof::Rule::AllI: {
      const std::string& ev = p.eigenvariable();
      auto p1 = check_node(p.premises()[0], sig);
      auto [subj, c] = as_member(p1->seq, "forallI");
      if (!subj.is_var || subj.name != ev)
        fail(PK::rule_mismatch, "forallI: premise concludes " + p1->seq.goal.to_string() +
                                    ", expected a membership of the eigenvariable " + ev);
      // The only premise hypothesis mentioning the eigenvariable must be the
      // single role edge into it.
      std::vector<Formula> ev_formulas;
      for (const auto& g : p1->seq.context)
        if (mentions(g, ev)) ev_formulas.push_back(g);
      if (ev_formulas.empty())
        fail(PK::rule_mismatch,
             "forallI: premise context lacks a role hypothesis for " + ev);
      if (ev_formulas.size() > 1)
        fail(PK::eigenvariable_capture, "forallI: eigenvariable " + ev +
                                            " occurs in more than one hypothesis");
      const Formula& hr = ev_formulas[0];
      bool good_shape = hr.kind() == Formula::Kind::Role &&
                        hr.object() == Term::variable(ev) && !(hr.subject() == hr.object());
      if (!good_shape)
        fail(PK::eigenvariable_capture, "forallI: hypothesis " + hr.to_string() +
                                            " is not a role edge into " + ev);
      Sequent seq{without(p1->seq.context, hr),
                  member_of(hr.subject(), Concept::forall(hr.role_name(), c))};
      return finish(p.rule(), std::move(seq), {p1}, std::nullopt, 0, ev, {hr});
    }
    case Proof::Rule::AllE: {
      const Formula& r = p.data_formula();
      if (r.kind() != Formula::Kind::Role)
        fail(PK::rule_mismatch, "forallE: payload must be a role assertion, got " +
                                    r.to_string());
      auto p1 = check_node(p.premises()[0], sig);
      auto [s, c] = as_member(p1->seq, "forallE");
      if (c.kind() != Concept::Kind::Forall)
        fail(PK::rule_mismatch, "forallE: premise concludes " + p1->seq.goal.to_string() +
                                    ", expected a value-restriction membership");
      if (!(r.subject() == s) || r.role_name() != c.role())
        fail(PK::rule_mismatch, "forallE: role assertion " + r.to_string() +
                                    " does not match the premise " + p1->seq.goal.to_string());
      Sequent seq{dedup_union(p1->seq.context, {r}), member_of(r.object(), c.child())};
      return finish(p.rule(), std::move(seq), {p1}, r);
    }
  }
  throw error("unreachable");
}

}  // namespace

CheckedProof::CheckedProof(std::shared_ptr<const detail::CheckedNode> root, Signature sig)
    : root_(std::move(root)), sig_(std::move(sig)) {}

const Sequent& CheckedProof::conclusion() const { return root_->seq; }
const Signature& CheckedProof::signature() const { return sig_; }

CheckedProof check_proof(const Proof& pi, const Signature& sig) {
  return CheckedProof(check_node(pi, sig), sig);
}

// ── Extraction ──────────────────────────────────────────────────────────────

namespace {

// Resolves a term under sigma; variables outside sigma's domain (possible
// only along branches whose realizability precondition can never hold) fall
// back to the first individual so the operator stays total.
std::string resolve(const Substitution& sigma, const Term& t, const Signature& sig) {
  if (!t.is_var) return t.name;
  if (sigma.binds(t.name)) return sigma.at(t.name);
  return sig.individuals().front();
}

Formula close_total(const Substitution& sigma, const Formula& k, const Signature& sig) {
  Substitution s = sigma;
  for (const auto& v : free_variables(k))
    if (!s.binds(v)) s = s.extend(v, sig.individuals().front());
  return apply_subst(s, k);
}

struct Shadow {
  const Formula* formula;
  const InfoTerm* value;
};

InfoTerm eval(const Checked& n, const Substitution& sigma, const std::vector<InfoTerm>& vals,
              const Signature& sig);

// Builds the premise tuple by routing each premise hypothesis to its value in
// the conclusion tuple, with discharged hypotheses shadowed.
std::vector<InfoTerm> route(const Checked& parent, const Checked& prem,
                            const std::vector<InfoTerm>& vals,
                            const std::vector<Shadow>& shadows) {
  std::vector<InfoTerm> out;
  out.reserve(prem.seq.context.size());
  for (const auto& f : prem.seq.context) {
    const InfoTerm* shadowed = nullptr;
    for (const auto& sh : shadows)
      if (*sh.formula == f) {
        shadowed = sh.value;
        break;
      }
    if (shadowed) {
      out.push_back(*shadowed);
      continue;
    }
    auto idx = index_of(parent.seq.context, f);
    if (!idx) throw error("internal: premise hypothesis missing from conclusion context");
    out.push_back(vals[*idx]);
  }
  return out;
}

InfoTerm eval_premise(const Checked& parent, std::size_t i, const Substitution& sigma,
                      const std::vector<InfoTerm>& vals, const Signature& sig,
                      const std::vector<Shadow>& shadows = {}) {
  const Checked& prem = *parent.premises[i];
  return eval(prem, sigma, route(parent, prem, vals, shadows), sig);
}

InfoTerm eval(const Checked& n, const Substitution& sigma, const std::vector<InfoTerm>& vals,
              const Signature& sig) {
  switch (n.rule) {
    case Proof::Rule::Hyp: {
      auto idx = index_of(n.seq.context, n.seq.goal);
      return vals[*idx];
    }
    case Proof::Rule::BotI:
    case Proof::Rule::NegI:
      // The conclusion is simple.
      return InfoTerm::truth();
    case Proof::Rule::BotE:
      return canonical(close_total(sigma, n.seq.goal, sig), sig);
    case Proof::Rule::SubE: {
      auto idx = index_of(n.seq.context, *n.f);
      const InfoTerm& table = vals[*idx];
      return table.table().at(resolve(sigma, n.seq.goal.subject(), sig));
    }
    case Proof::Rule::AndI:
      return InfoTerm::pair(eval_premise(n, 0, sigma, vals, sig),
                            eval_premise(n, 1, sigma, vals, sig));
    case Proof::Rule::AndE1:
      return eval_premise(n, 0, sigma, vals, sig).first();
    case Proof::Rule::AndE2:
      return eval_premise(n, 0, sigma, vals, sig).second();
    case Proof::Rule::OrI1:
    case Proof::Rule::OrI2:
      return InfoTerm::tag(n.k, eval_premise(n, 0, sigma, vals, sig));
    case Proof::Rule::OrE: {
      InfoTerm major = eval_premise(n, 0, sigma, vals, sig);
      int k = major.index();
      InfoTerm payload = major.body();
      const Formula& discharged = n.discharged[static_cast<std::size_t>(k - 1)];
      return eval_premise(n, static_cast<std::size_t>(k), sigma, vals, sig,
                          {{&discharged, &payload}});
    }
    case Proof::Rule::ExI:
      return InfoTerm::wit(resolve(sigma, n.f->object(), sig),
                           eval_premise(n, 0, sigma, vals, sig));
    case Proof::Rule::ExE: {
      InfoTerm major = eval_premise(n, 0, sigma, vals, sig);
      InfoTerm payload = major.body();
      InfoTerm truth = InfoTerm::truth();
      Substitution inner = sigma.extend(n.eigen, major.witness());
      const Checked& prem = *n.premises[1];
      return eval(prem, inner,
                  route(n, prem, vals, {{&n.discharged[0], &truth}, {&n.discharged[1], &payload}}),
                  sig);
    }
    case Proof::Rule::AllI: {
      InfoTerm truth = InfoTerm::truth();
      const Checked& prem = *n.premises[0];
      std::map<std::string, InfoTerm> table;
      for (const auto& d : sig.individuals()) {
        Substitution inner = sigma.extend(n.eigen, d);
        table.emplace(d, eval(prem, inner, route(n, prem, vals, {{&n.discharged[0], &truth}}),
                              sig));
      }
      return InfoTerm::fun(std::move(table));
    }
    case Proof::Rule::AllE: {
      InfoTerm table = eval_premise(n, 0, sigma, vals, sig);
      return table.table().at(resolve(sigma, n.seq.goal.subject(), sig));
    }
  }
  throw error("unreachable");
}

}  // namespace

InfoTerm CheckedProof::apply(const Substitution& sigma, const ItTuple& gamma) const {
  const auto& ctx = root_->seq.context;
  if (gamma.size() != ctx.size())
    fail(PK::ill_formed_input, "tuple has " + std::to_string(gamma.size()) +
                                   " entries for a context of " + std::to_string(ctx.size()));
  for (std::size_t i = 0; i < ctx.size(); ++i) {
    Formula closed = apply_subst(sigma, ctx[i]);
    if (!belongs(gamma[i], closed, sig_))
      fail(PK::ill_formed_input,
           "tuple position " + std::to_string(i) + " does not belong to " + closed.to_string());
  }
  // The goal must be closed by sigma as well.
  apply_subst(sigma, root_->seq.goal);
  return eval(*root_, sigma, gamma, sig_);
}

}  // namespace cdl
