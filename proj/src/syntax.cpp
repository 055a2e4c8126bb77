#include "cdl/syntax.hpp"

#include <algorithm>
#include <sstream>

namespace cdl {

namespace {

const std::set<std::string>& keywords() {
  static const std::set<std::string> kw = {
      "and", "or", "not", "exists", "forall", "sub", "bot",
      "tt", "tag", "wit", "fun", "self", "hyp"};
  return kw;
}

void check_names(const std::set<std::string>& names, const char* what,
                 std::set<std::string>& seen) {
  for (const auto& n : names) {
    if (n.empty()) throw error(std::string(what) + " name may not be empty");
    if (keywords().count(n))
      throw error("name '" + n + "' collides with a reserved keyword");
    if (!seen.insert(n).second)
      throw error("name '" + n + "' declared in more than one section");
  }
}

}  // namespace

Signature::Signature(std::vector<std::string> individuals,
                     std::set<std::string> roles,
                     std::set<std::string> concepts,
                     std::set<std::string> variables)
    : individuals_(std::move(individuals)),
      roles_(std::move(roles)),
      concepts_(std::move(concepts)),
      variables_(std::move(variables)) {
  if (individuals_.empty()) throw error("signature requires at least one individual");
  std::set<std::string> seen;
  for (const auto& n : individuals_) {
    if (n.empty()) throw error("individual name may not be empty");
    if (keywords().count(n))
      throw error("name '" + n + "' collides with a reserved keyword");
    if (!seen.insert(n).second) throw error("duplicate individual '" + n + "'");
  }
  individual_set_ = seen;
  check_names(roles_, "role", seen);
  check_names(concepts_, "concept", seen);
  check_names(variables_, "variable", seen);
}

// ── Concept nodes ───────────────────────────────────────────────────────────

struct Concept::Node {
  Kind kind;
  std::string name;  // Atom name or quantifier role
  std::shared_ptr<const Node> a, b;
};

Concept Concept::atom(std::string name) {
  return Concept(std::make_shared<Node>(Node{Kind::Atom, std::move(name), nullptr, nullptr}));
}
Concept Concept::negation(Concept c) {
  return Concept(std::make_shared<Node>(Node{Kind::Not, "", std::move(c.node_), nullptr}));
}
Concept Concept::conj(Concept l, Concept r) {
  return Concept(std::make_shared<Node>(Node{Kind::And, "", std::move(l.node_), std::move(r.node_)}));
}
Concept Concept::disj(Concept l, Concept r) {
  return Concept(std::make_shared<Node>(Node{Kind::Or, "", std::move(l.node_), std::move(r.node_)}));
}
Concept Concept::exists(std::string role, Concept c) {
  return Concept(std::make_shared<Node>(Node{Kind::Exists, std::move(role), std::move(c.node_), nullptr}));
}
Concept Concept::forall(std::string role, Concept c) {
  return Concept(std::make_shared<Node>(Node{Kind::Forall, std::move(role), std::move(c.node_), nullptr}));
}

Concept::Kind Concept::kind() const { return node_->kind; }
const std::string& Concept::name() const { return node_->name; }
const std::string& Concept::role() const { return node_->name; }

Concept Concept::child() const { return Concept(node_->a); }
Concept Concept::left() const { return Concept(node_->a); }
Concept Concept::right() const { return Concept(node_->b); }

bool Concept::operator==(const Concept& o) const {
  if (node_ == o.node_) return true;
  if (!node_ || !o.node_) return false;
  if (node_->kind != o.node_->kind || node_->name != o.node_->name) return false;
  auto eq = [](const std::shared_ptr<const Node>& x, const std::shared_ptr<const Node>& y) {
    if (!x && !y) return true;
    if (!x || !y) return false;
    return Concept(x) == Concept(y);
  };
  return eq(node_->a, o.node_->a) && eq(node_->b, o.node_->b);
}

namespace {

// Precedence: or < and < prefix (not/exists/forall) < atom.
enum Prec { kOr = 0, kAnd = 1, kUnary = 2 };

void print_concept(std::ostream& os, const Concept& c, int min_prec) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
      os << c.name();
      return;
    case Concept::Kind::Not:
      os << "not ";
      print_concept(os, c.child(), kUnary);
      return;
    case Concept::Kind::Exists:
    case Concept::Kind::Forall:
      os << (c.kind() == Concept::Kind::Exists ? "exists " : "forall ") << c.role() << ".";
      print_concept(os, c.child(), kUnary);
      return;
    case Concept::Kind::And:
    case Concept::Kind::Or: {
      const bool is_and = c.kind() == Concept::Kind::And;
      const int prec = is_and ? kAnd : kOr;
      const bool parens = prec < min_prec;
      if (parens) os << "(";
      // Right-associative: the left operand needs strictly higher precedence.
      print_concept(os, c.left(), prec + 1);
      os << (is_and ? " and " : " or ");
      print_concept(os, c.right(), prec);
      if (parens) os << ")";
      return;
    }
  }
}

}  // namespace

std::string Concept::to_string() const {
  std::ostringstream os;
  print_concept(os, *this, kOr);
  return os.str();
}

// ── Formula nodes ───────────────────────────────────────────────────────────

struct Formula::Node {
  Kind kind;
  Term s, t;
  std::string name;  // role name or subsumption antecedent
  std::shared_ptr<const Concept> c;
};

Formula Formula::bot() {
  return Formula(std::make_shared<Node>(Node{Kind::Bot, {}, {}, "", nullptr}));
}
Formula Formula::role(Term s, Term t, std::string role_name) {
  return Formula(std::make_shared<Node>(
      Node{Kind::Role, std::move(s), std::move(t), std::move(role_name), nullptr}));
}
Formula Formula::member(Term t, Concept c) {
  return Formula(std::make_shared<Node>(
      Node{Kind::Member, std::move(t), {}, "", std::make_shared<Concept>(std::move(c))}));
}
Formula Formula::subsume(std::string atom, Concept c) {
  return Formula(std::make_shared<Node>(
      Node{Kind::Subsume, {}, {}, std::move(atom), std::make_shared<Concept>(std::move(c))}));
}

Formula::Kind Formula::kind() const { return node_->kind; }
const Term& Formula::subject() const { return node_->s; }
const Term& Formula::object() const { return node_->t; }
const std::string& Formula::role_name() const { return node_->name; }
const Concept& Formula::concept_expr() const { return *node_->c; }
const std::string& Formula::antecedent() const { return node_->name; }

bool Formula::operator==(const Formula& o) const {
  if (node_ == o.node_) return true;
  if (node_->kind != o.node_->kind) return false;
  switch (node_->kind) {
    case Kind::Bot:
      return true;
    case Kind::Role:
      return node_->s == o.node_->s && node_->t == o.node_->t && node_->name == o.node_->name;
    case Kind::Member:
      return node_->s == o.node_->s && *node_->c == *o.node_->c;
    case Kind::Subsume:
      return node_->name == o.node_->name && *node_->c == *o.node_->c;
  }
  return false;
}

std::string Formula::to_string() const {
  switch (kind()) {
    case Kind::Bot:
      return "bot";
    case Kind::Role:
      return "(" + subject().name + ", " + object().name + ") : " + role_name();
    case Kind::Member:
      return subject().name + " : " + concept_expr().to_string();
    case Kind::Subsume:
      return antecedent() + " sub " + concept_expr().to_string();
  }
  return "";
}

FormulaClass classify(const Formula& k) {
  FormulaClass r;
  switch (k.kind()) {
    case Formula::Kind::Bot:
      r.closed = true;
      r.simple = true;
      break;
    case Formula::Kind::Role:
      r.closed = !k.subject().is_var && !k.object().is_var;
      r.simple = true;
      break;
    case Formula::Kind::Member: {
      r.closed = !k.subject().is_var;
      auto ck = k.concept_expr().kind();
      r.simple = ck == Concept::Kind::Atom || ck == Concept::Kind::Not;
      break;
    }
    case Formula::Kind::Subsume:
      r.closed = true;
      r.simple = false;
      break;
  }
  return r;
}

std::vector<std::string> free_variables(const Formula& k) {
  std::vector<std::string> out;
  auto add = [&out](const Term& t) {
    if (t.is_var && std::find(out.begin(), out.end(), t.name) == out.end())
      out.push_back(t.name);
  };
  switch (k.kind()) {
    case Formula::Kind::Bot:
    case Formula::Kind::Subsume:
      break;
    case Formula::Kind::Role:
      add(k.subject());
      add(k.object());
      break;
    case Formula::Kind::Member:
      add(k.subject());
      break;
  }
  return out;
}

void validate_theory(const Theory& t) {
  for (const auto& f : t.tbox) {
    if (f.kind() != Formula::Kind::Subsume)
      throw error("TBox entry is not a subsumption: " + f.to_string());
  }
  for (const auto& f : t.abox) {
    switch (f.kind()) {
      case Formula::Kind::Role:
        if (f.subject().is_var || f.object().is_var)
          throw error("ABox role assertion must be closed: " + f.to_string());
        break;
      case Formula::Kind::Member:
        if (f.subject().is_var)
          throw error("ABox concept assertion must be closed: " + f.to_string());
        if (f.concept_expr().kind() != Concept::Kind::Atom)
          throw error("ABox concept assertion must use a concept name: " + f.to_string());
        break;
      default:
        throw error("not an ABox assertion: " + f.to_string());
    }
  }
}

Substitution Substitution::extend(const std::string& var, const std::string& ind) const {
  auto m = map_;
  m[var] = ind;
  return Substitution(std::move(m));
}

const std::string& Substitution::at(const std::string& var) const {
  auto it = map_.find(var);
  if (it == map_.end()) throw error("substitution does not bind variable '" + var + "'");
  return it->second;
}

Formula apply_subst(const Substitution& sigma, const Formula& k) {
  auto vars = free_variables(k);
  std::string missing;
  for (const auto& v : vars) {
    if (!sigma.binds(v)) missing += (missing.empty() ? "" : ", ") + v;
  }
  if (!missing.empty())
    throw error("substitution leaves variables unbound: " + missing);

  auto close = [&sigma](const Term& t) {
    return t.is_var ? Term::individual(sigma.at(t.name)) : t;
  };
  switch (k.kind()) {
    case Formula::Kind::Bot:
    case Formula::Kind::Subsume:
      return k;
    case Formula::Kind::Role:
      return Formula::role(close(k.subject()), close(k.object()), k.role_name());
    case Formula::Kind::Member:
      return Formula::member(close(k.subject()), k.concept_expr());
  }
  throw error("unreachable");
}

}  // namespace cdl
