// Natural-deduction proof objects, the rule checker, and operator
// extraction.
//
// A proof is a tree of rule applications; checking computes every node's
// concluded sequent bottom-up and enforces the rule schemas, the context
// combination discipline (ordered union with structural deduplication) and
// the eigenvariable freshness side conditions. A checked proof yields an
// operator: a total map from (closing substitution, context tuple) to an
// information term for the closed goal, defined clause by clause on the last
// rule so that realizability of the inputs is preserved.

#ifndef CDL_NDPROOF_HPP
#define CDL_NDPROOF_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdl/infoterm.hpp"
#include "cdl/syntax.hpp"

namespace cdl {

struct proof_error : error {
  enum class Kind {
    rule_mismatch,
    eigenvariable_capture,
    hypothesis_not_in_context,
    ill_formed_input,
  };
  proof_error(Kind k, const std::string& msg) : error(msg), kind(k) {}
  Kind kind;
};

struct Sequent {
  std::vector<Formula> context;
  Formula goal;

  std::string to_string() const;
  bool operator==(const Sequent& o) const {
    return context == o.context && goal == o.goal;
  }
};

class Proof {
 public:
  enum class Rule {
    Hyp, BotI, BotE, SubE, NegI, AndI, AndE1, AndE2,
    OrI1, OrI2, OrE, ExI, ExE, AllI, AllE,
  };

  // Leaves. The one-argument form uses the minimal context [k].
  static Proof hyp(Formula k);
  static Proof hyp(std::vector<Formula> ctx, Formula k);

  static Proof bot_i(Proof pos, Proof neg);
  static Proof bot_e(Formula target, Proof p);
  static Proof sub_e(Formula subsumption, Proof p);
  static Proof neg_i(Formula discharged, Proof p);
  static Proof and_i(Proof l, Proof r);
  static Proof and_e(int k, Proof p);
  static Proof or_i(int k, Concept disjunction, Proof p);
  static Proof or_e(Proof major, Proof left_case, Proof right_case);
  static Proof ex_i(Formula role_assertion, Proof p);
  static Proof ex_e(std::string eigenvariable, Proof major, Proof body);
  static Proof all_i(std::string eigenvariable, Proof p);
  static Proof all_e(Formula role_assertion, Proof p);

  Rule rule() const;
  const std::vector<Proof>& premises() const;
  const std::vector<Formula>& hyp_context() const;  // Hyp
  const Formula& data_formula() const;  // BotE target, SubE, NegI, ExI, AllE, Hyp formula
  const Concept& data_concept() const;  // OrI1/OrI2 disjunction
  int data_index() const;               // AndE1/2, OrI1/2
  const std::string& eigenvariable() const;  // ExE, AllI

  // S-expression file format, e.g. (andE1 (hyp "x : A and B")).
  std::string to_string() const;

  bool operator==(const Proof& o) const;

 private:
  struct Node;
  explicit Proof(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Proof make(Rule r, std::vector<Proof> premises, std::vector<Formula> ctx,
                    std::optional<Formula> f, std::optional<Concept> c, int k,
                    std::string eigen);
  std::shared_ptr<const Node> node_;
};

Proof parse_proof(const std::string& text, const Signature& sig);
Proof load_proof(const std::string& path, const Signature& sig);

namespace detail {
struct CheckedNode;
}

// A proof that passed the checker, with every node's sequent computed.
class CheckedProof {
 public:
  const Sequent& conclusion() const;
  const Signature& signature() const;

  // The extracted operator: total on tuples that belong pointwise to the
  // closed context. Throws proof_error(ill_formed_input) otherwise.
  InfoTerm apply(const Substitution& sigma, const ItTuple& gamma) const;

 private:
  CheckedProof(std::shared_ptr<const detail::CheckedNode> root, Signature sig);
  std::shared_ptr<const detail::CheckedNode> root_;
  Signature sig_;
  friend CheckedProof check_proof(const Proof&, const Signature&);
};

// Verifies every rule instance; returns the checked proof (whose conclusion
// is the root sequent) or throws proof_error.
CheckedProof check_proof(const Proof& pi, const Signature& sig);

// Aliases matching the operation-level view: an operator is just a checked
// proof applied as a function.
using Operator = CheckedProof;

inline Operator extract(const CheckedProof& pi) { return pi; }
inline InfoTerm apply_operator(const Operator& op, const Substitution& sigma,
                               const ItTuple& gamma) {
  return op.apply(sigma, gamma);
}

}  // namespace cdl

#endif  // CDL_NDPROOF_HPP
