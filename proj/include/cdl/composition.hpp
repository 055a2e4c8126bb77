// The service-composition calculus.
//
// A composition is a tree of AND / CASE / SEQ / AX / ENV rule applications
// over an environment. Each rule carries applicability-condition proofs:
// sequents over the environment's TBox that relate the pre- and
// post-conditions of the main service and its children. Checking verifies
// every AC proof and its concluded sequent shape; compiling turns the tree
// into an executable implementation by composing the children's
// implementations with the extracted AC operators.
//
// Binding convention for AC operators: a proof's root context may use any
// subset of the TBox plus the rule's single pre-condition hypothesis; at run
// time TBox positions receive the environment's justification tables and the
// hypothesis position receives the service input.

#ifndef CDL_COMPOSITION_HPP
#define CDL_COMPOSITION_HPP

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "cdl/infoterm.hpp"
#include "cdl/ndproof.hpp"
#include "cdl/semantics.hpp"
#include "cdl/syntax.hpp"

namespace cdl {

struct ServiceSpec {
  std::string name;
  std::string param;  // the single input variable
  Concept pre;
  Concept post;

  bool operator==(const ServiceSpec& o) const {
    return name == o.name && param == o.param && pre == o.pre && post == o.post;
  }
  std::string to_string() const;
};

// Spec file:
//   service NAME(x)
//   pre:  CONCEPT
//   post: CONCEPT
ServiceSpec parse_service_spec(const std::string& text, const Signature& sig);

// A service implementation: information terms for t:pre to information terms
// for t:post, at every individual t.
using Implementation = std::function<InfoTerm(const std::string& t, const InfoTerm& input)>;

struct Environment {
  Signature sig;
  Theory theory;
  // Justification terms for the TBox, aligned with theory.tbox.
  std::vector<InfoTerm> tbox_terms;
  std::vector<std::pair<ServiceSpec, Implementation>> services;

  const std::pair<ServiceSpec, Implementation>* find_service(const std::string& name) const;
  const InfoTerm& tbox_term(const Formula& axiom) const;
};

// Validates signature-level invariants: unique service names, tbox_terms
// aligned and belonging pointwise.
void validate_environment(const Environment& env);

class Composition {
 public:
  enum class Rule { And, Case, Seq, Ax, Env };

  static Composition env_ref(std::string service_name);
  static Composition ax(ServiceSpec spec, Proof ac);
  static Composition make(Rule r, ServiceSpec spec, std::vector<Proof> ac,
                          std::vector<Composition> children);

  Rule rule() const;
  const ServiceSpec& spec() const;             // not for Env nodes
  const std::string& env_name() const;         // Env nodes
  const std::vector<Proof>& ac_proofs() const;
  const std::vector<Composition>& children() const;

  bool operator==(const Composition& o) const;

 private:
  struct Node;
  explicit Composition(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

// Composition file: nested s-expressions naming spec and proof files,
//   (seq "spec/main.spec" (ac "p1.ndp" "p2.ndp" "p3.ndp") CHILD...)
//   (env ServiceName)
// Paths are resolved relative to `base_dir`; ENV specs come from the
// environment.
Composition parse_composition(const std::string& text, const Environment& env,
                              const std::string& base_dir);
Composition load_composition(const std::string& path, const Environment& env);

// The spec a composition node promises (ENV nodes: the environment's).
const ServiceSpec& composition_spec(const Environment& env, const Composition& comp);

struct CompositionIssue {
  enum class Kind { spec_mismatch, ac_sequent_shape, embedded_proof_invalid, arity };
  Kind kind;
  std::string path;  // "/", "/1", "/2/1", ...
  std::string message;
};

struct CompositionReport {
  std::vector<CompositionIssue> issues;
  bool ok() const { return issues.empty(); }
  std::string to_string() const;
};

// One AC obligation: label, hypotheses (TBox + one pre-condition membership)
// and goal, exactly as the rule schema demands.
struct AcObligation {
  std::string label;        // e.g. "/1 and(a1)"
  std::vector<Formula> context;
  Formula goal;
};

std::vector<AcObligation> ac_obligations(const Environment& env, const Composition& comp);

CompositionReport check_composition(const Environment& env, const Composition& comp);

// Trace events emitted during evaluation; node paths follow the composition
// tree, AC applications and environment calls carry their own tags.
struct TraceEvent {
  std::string path;
  std::string tag;  // "seq", "and", "case", "ax", "env:NAME", "ac:b1", ...
  InfoTerm input;
  InfoTerm output;
};
using Trace = std::vector<TraceEvent>;
using TraceSink = std::function<void(const TraceEvent&)>;

// Compiles a checked composition. Throws cdl::error if check_composition
// reports issues.
Implementation compile(const Environment& env, const Composition& comp,
                       TraceSink sink = nullptr);

struct UniformCounterexample {
  std::string individual;
  InfoTerm input;
  std::string reason;
};

struct UniformResult {
  bool ok = false;
  bool overflowed = false;
  std::optional<UniformCounterexample> counterexample;
};

// Enumerates every individual and every pre-condition term under the cap;
// reports the first realizing input whose output fails to realize the
// post-condition.
UniformResult verify_uniform(const Model& m, const Signature& sig, const ServiceSpec& spec,
                             const Implementation& impl, std::uint64_t cap);

}  // namespace cdl

#endif  // CDL_COMPOSITION_HPP
