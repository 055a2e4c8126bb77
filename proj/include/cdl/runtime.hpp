// File-backed ABox stores, decision-table service implementations, and
// traced execution of compositions.
//
// A decision table drives a base service: the first row whose input pattern
// matches and whose guard query solves against the store fires, and its
// template (instantiated with pattern and guard bindings) is the output.
// Guards are conjunctive queries over store assertions; unbound guard
// variables range over the signature's individuals in declaration order, so
// evaluation is deterministic.
//
// Table file format:
//   service NAME
//   row: PATTERN | ATOM ; ATOM ; ... | TEMPLATE
//   row: ? | | tag 1 tt            # mandatory irrefutable default row
// Patterns are information-term literals extended with "?" (wildcard) and
// "?name" (binder); guard atoms are "TERM : Concept" or "(TERM, TERM) : role"
// where TERM is "self", an individual, or "?name"; templates are
// information-term literals whose witness slots may reference bound names
// and whose term slots may reference bound sub-terms.

#ifndef CDL_RUNTIME_HPP
#define CDL_RUNTIME_HPP

#include <string>
#include <utility>
#include <vector>

#include "cdl/composition.hpp"
#include "cdl/semantics.hpp"
#include "cdl/syntax.hpp"

namespace cdl {

class Store {
 public:
  explicit Store(Signature sig) : sig_(std::move(sig)) {}

  // Closed atomic assertions only; duplicates are dropped.
  void add(const Formula& assertion);
  bool contains(const Formula& assertion) const;
  const std::vector<Formula>& assertions() const { return assertions_; }
  const Signature& sig() const { return sig_; }

  Theory as_theory(std::vector<Formula> tbox = {}) const;
  std::string to_string() const;

 private:
  Signature sig_;
  std::vector<Formula> assertions_;
};

Store parse_store_text(const std::string& text, const Signature& sig);
Store load_store(const std::string& path, const Signature& sig);
void save_store(const Store& store, const std::string& path);

// ── Decision tables ─────────────────────────────────────────────────────────

class DecisionTable;

DecisionTable parse_table_text(const std::string& text, const Signature& sig);
DecisionTable load_table(const std::string& path, const Signature& sig);

class DecisionTable {
 public:
  const std::string& service() const { return service_; }
  std::size_t row_count() const;

  // Evaluates the table on one input. Throws cdl::error if no row fires
  // (impossible for tables that passed validation) or if the fired row's
  // output does not belong to t : post.
  InfoTerm evaluate(const std::string& t, const InfoTerm& input, const ServiceSpec& spec,
                    const Store& store) const;

 private:
  friend DecisionTable parse_table_text(const std::string&, const Signature&);
  struct Impl;
  std::shared_ptr<const Impl> impl_;
  std::string service_;
};

// Wraps a table as a service implementation bound to a store.
Implementation impl_from_table(const DecisionTable& table, const ServiceSpec& spec,
                               const Store& store);

// ── Environments on disk ────────────────────────────────────────────────────
// Directory layout: sig.txt, theory.txt (TBox), store.txt (ABox),
// specs/*.spec, tables/*.dt. The TBox justification terms are derived from
// the store's induced model.

struct EnvBundle {
  Signature sig;
  Store store;
  Model model;  // induced from the store
  Environment env;
  std::map<std::string, ServiceSpec> specs;  // every spec file, by name
  std::string root;
};

EnvBundle load_environment(const std::string& dir);

// ── Execution ───────────────────────────────────────────────────────────────

// Runs a checked composition on one input, recording the trace. The input
// must belong to t : pre(main); violations raise cdl::error.
std::pair<InfoTerm, Trace> execute(const Environment& env, const Composition& comp,
                                   const std::string& t, const InfoTerm& alpha);

// One event per line: "path | tag | input | output".
std::string trace_to_string(const Trace& trace);

}  // namespace cdl

#endif  // CDL_RUNTIME_HPP
