// Finite classical models: concept extensions, validity of closed formulas,
// models induced from ABox stores, and TBox conformance reports.

#ifndef CDL_SEMANTICS_HPP
#define CDL_SEMANTICS_HPP

#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cdl/syntax.hpp"

namespace cdl {

// A model interprets every individual of the signature inside a finite,
// non-empty domain. Concept and role names without an explicit entry denote
// the empty set.
class Model {
 public:
  Model(const Signature& sig,
        std::set<std::string> domain,
        std::map<std::string, std::string> ind_val,
        std::map<std::string, std::set<std::string>> concept_val,
        std::map<std::string, std::set<std::pair<std::string, std::string>>> role_val);

  const std::vector<std::string>& individuals() const { return individuals_; }
  const std::set<std::string>& domain() const { return domain_; }
  const std::string& ind(const std::string& name) const;
  const std::set<std::string>& concept_ext(const std::string& name) const;
  const std::set<std::pair<std::string, std::string>>& role_ext(const std::string& name) const;

  std::string to_string() const;

 private:
  std::vector<std::string> individuals_;  // signature order
  std::set<std::string> known_concepts_, known_roles_;
  std::set<std::string> domain_;
  std::map<std::string, std::string> ind_val_;
  std::map<std::string, std::set<std::string>> concept_val_;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> role_val_;
};

// Structural recursion over the six semantic equations.
std::set<std::string> extension(const Model& m, const Concept& c);

// Validity of a closed formula; bot is never valid. Throws on open input.
bool holds(const Model& m, const Formula& k);

// The closed-world model of an ABox: domain = the individuals, identity
// valuation, extensions read off the assertions.
Model induced_model(const Theory& t, const Signature& sig);

struct TboxViolation {
  Formula axiom;
  std::string witness;  // element in the antecedent but not the consequent
};

// Every violated subsumption with a counterexample element; empty iff the
// model satisfies the TBox.
std::vector<TboxViolation> check_tbox(const Model& m, const std::vector<Formula>& tbox);

// Model file format:
//   domain: e1 e2 ...
//   individuals: name=element ...
//   concept A: e1 e2
//   role R: (e1, e2) (e1, e3)
Model parse_model_text(const std::string& text, const Signature& sig);

}  // namespace cdl

#endif  // CDL_SEMANTICS_HPP
