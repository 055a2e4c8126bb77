// Abstract syntax for the description-logic language: concepts, formulas,
// signatures, theories and substitutions. All values are immutable after
// construction and compare structurally.

#ifndef CDL_SYNTAX_HPP
#define CDL_SYNTAX_HPP

#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace cdl {

struct error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Raised by the file/text parsers; carries a 1-based position.
struct parse_error : error {
  parse_error(const std::string& msg, std::size_t line, std::size_t col)
      : error(msg + " (at " + std::to_string(line) + ":" + std::to_string(col) + ")"),
        line(line), col(col) {}
  std::size_t line = 0;
  std::size_t col = 0;
};

// ── Signature ───────────────────────────────────────────────────────────────
// The finite vocabulary: an ordered, non-empty set of individual names plus
// role, concept and variable names. The four sets are pairwise disjoint and
// may not contain DSL keywords. Individual order is fixed at construction and
// drives every canonical choice downstream (witness enumeration, tables).

class Signature {
 public:
  Signature(std::vector<std::string> individuals,
            std::set<std::string> roles,
            std::set<std::string> concepts,
            std::set<std::string> variables);

  const std::vector<std::string>& individuals() const { return individuals_; }
  const std::set<std::string>& roles() const { return roles_; }
  const std::set<std::string>& concepts() const { return concepts_; }
  const std::set<std::string>& variables() const { return variables_; }

  bool is_individual(const std::string& n) const { return individual_set_.count(n) > 0; }
  bool is_role(const std::string& n) const { return roles_.count(n) > 0; }
  bool is_concept(const std::string& n) const { return concepts_.count(n) > 0; }
  bool is_variable(const std::string& n) const { return variables_.count(n) > 0; }

 private:
  std::vector<std::string> individuals_;
  std::set<std::string> individual_set_;
  std::set<std::string> roles_;
  std::set<std::string> concepts_;
  std::set<std::string> variables_;
};

// ── Terms ───────────────────────────────────────────────────────────────────
// A term is an individual name or a variable; names are unique across the
// signature, so equality on the name alone is sound.

struct Term {
  std::string name;
  bool is_var = false;

  static Term individual(std::string n) { return {std::move(n), false}; }
  static Term variable(std::string n) { return {std::move(n), true}; }
  bool operator==(const Term& o) const { return name == o.name; }
  bool operator!=(const Term& o) const { return !(*this == o); }
};

// ── Concepts ────────────────────────────────────────────────────────────────

class Concept {
 public:
  enum class Kind { Atom, Not, And, Or, Exists, Forall };

  static Concept atom(std::string name);
  static Concept negation(Concept c);
  static Concept conj(Concept l, Concept r);
  static Concept disj(Concept l, Concept r);
  static Concept exists(std::string role, Concept c);
  static Concept forall(std::string role, Concept c);

  Kind kind() const;
  const std::string& name() const;   // Atom
  const std::string& role() const;   // Exists/Forall
  Concept child() const;             // Not/Exists/Forall
  Concept left() const;              // And/Or
  Concept right() const;             // And/Or

  bool operator==(const Concept& o) const;
  bool operator!=(const Concept& o) const { return !(*this == o); }

  // True for an atom or a negated concept (whose memberships are simple).
  bool is_atomic() const { return kind() == Kind::Atom; }

  std::string to_string() const;

 private:
  struct Node;
  explicit Concept(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// ── Formulas ────────────────────────────────────────────────────────────────

class Formula {
 public:
  enum class Kind { Bot, Role, Member, Subsume };

  static Formula bot();
  static Formula role(Term s, Term t, std::string role_name);
  static Formula member(Term t, Concept c);
  // The antecedent of a subsumption is restricted to a concept name.
  static Formula subsume(std::string atom, Concept c);

  Kind kind() const;
  const Term& subject() const;       // Role (s), Member (t)
  const Term& object() const;        // Role (t)
  const std::string& role_name() const;
  const Concept& concept_expr() const;  // Member, Subsume
  const std::string& antecedent() const;  // Subsume

  bool operator==(const Formula& o) const;
  bool operator!=(const Formula& o) const { return !(*this == o); }

  std::string to_string() const;

 private:
  struct Node;
  explicit Formula(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct FormulaClass {
  bool closed = false;
  bool simple = false;
};

// Closed / simple status per the language definition: a simple formula is
// bot, a role assertion, or a membership in a concept name or negated concept.
FormulaClass classify(const Formula& k);

// Variables occurring in a formula, in first-occurrence order.
std::vector<std::string> free_variables(const Formula& k);

// ── Theories ────────────────────────────────────────────────────────────────
// A theory is a TBox (atomic subsumptions) plus an ABox (closed atomic
// concept assertions and role assertions).

struct Theory {
  std::vector<Formula> tbox;
  std::vector<Formula> abox;
};

// Validates the ABox shape restrictions; throws cdl::error on violation.
void validate_theory(const Theory& t);

// ── Substitutions ───────────────────────────────────────────────────────────

class Substitution {
 public:
  Substitution() = default;
  explicit Substitution(std::map<std::string, std::string> binding)
      : map_(std::move(binding)) {}

  // sigma[c/p]: rebind exactly one variable.
  Substitution extend(const std::string& var, const std::string& ind) const;

  bool binds(const std::string& var) const { return map_.count(var) > 0; }
  const std::string& at(const std::string& var) const;
  const std::map<std::string, std::string>& binding() const { return map_; }

 private:
  std::map<std::string, std::string> map_;
};

// sigma K: replaces every variable; individual names are fixed points.
// Throws cdl::error listing unbound variables if sigma does not close K.
Formula apply_subst(const Substitution& sigma, const Formula& k);

// Display form "F1; F2 |- G" lives with Sequent (ndproof); formulas print via
// to_string in the DSL syntax and round-trip through the parser.

}  // namespace cdl

#endif  // CDL_SYNTAX_HPP
