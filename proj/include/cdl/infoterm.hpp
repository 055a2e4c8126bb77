// Information terms.
//
// An information term is a structured justification for the validity of a
// closed formula: tt for simple formulas, pairs for memberships in a
// conjunction, tagged terms for disjunctions, witness terms for existential
// role successors, and finite function tables (total on the signature's
// individuals) for value restrictions and subsumptions. The shape of a term
// is only meaningful relative to a formula; `belongs` decides membership in
// the term space of a formula and `realizes` decides whether a term actually
// justifies the formula in a given model.

#ifndef CDL_INFOTERM_HPP
#define CDL_INFOTERM_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cdl/semantics.hpp"
#include "cdl/syntax.hpp"

namespace cdl {

struct overflow_error : error {
  overflow_error(std::uint64_t cap, std::uint64_t estimate)
      : error("information-term space exceeds cap " + std::to_string(cap) +
              " (at least " + std::to_string(estimate) + " terms)"),
        cap(cap), estimate(estimate) {}
  std::uint64_t cap;
  std::uint64_t estimate;  // lower bound on the space size
};

class InfoTerm {
 public:
  enum class Kind { Truth, Pair, Tag, Wit, Fun };

  static InfoTerm truth();
  static InfoTerm pair(InfoTerm first, InfoTerm second);
  static InfoTerm tag(int index, InfoTerm body);
  static InfoTerm wit(std::string individual, InfoTerm body);
  static InfoTerm fun(std::map<std::string, InfoTerm> table);

  Kind kind() const;
  InfoTerm first() const;   // Pair
  InfoTerm second() const;  // Pair
  int index() const;        // Tag
  InfoTerm body() const;    // Tag, Wit
  const std::string& witness() const;  // Wit
  const std::map<std::string, InfoTerm>& table() const;  // Fun

  bool operator==(const InfoTerm& o) const;
  bool operator!=(const InfoTerm& o) const { return !(*this == o); }

  // Literal syntax: tt | (a, b) | tag K a | wit NAME a | fun { n1 -> a1; ... }
  // Parenthesized single terms group; with a comma they pair.
  std::string to_string() const;

 private:
  struct Node;
  explicit InfoTerm(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static std::shared_ptr<Node> new_node(Kind k);
  std::shared_ptr<const Node> node_;
};

InfoTerm parse_infoterm(const std::string& text, const Signature& sig);

// Membership in the term space of a closed formula. Returns false on any
// structural mismatch; throws only if k is open.
bool belongs(const InfoTerm& eta, const Formula& k, const Signature& sig);

// Exact cardinality of the term space, saturating at `cap + 1`.
std::uint64_t it_cardinality(const Formula& k, const Signature& sig, std::uint64_t cap);

// The full term space, duplicate-free, in canonical order: tag indices
// ascending, witnesses in signature order, function tables lexicographic by
// entry (first individual most significant). Throws overflow_error when the
// space exceeds cap.
std::vector<InfoTerm> enumerate_terms(const Formula& k, const Signature& sig,
                                      std::uint64_t cap);

// The realizability relation. Requires belongs(eta, k, sig); throws
// cdl::error("ill-formed term ...") otherwise.
bool realizes(const Model& m, const InfoTerm& eta, const Formula& k, const Signature& sig);

// A deterministic inhabitant of the term space: tt where possible, first
// tag, first individual, constant tables.
InfoTerm canonical(const Formula& k, const Signature& sig);

// Synthesizes a term realizing k in m when one exists (always, for models
// induced from an ABox whenever k holds).
std::optional<InfoTerm> realizer(const Model& m, const Formula& k, const Signature& sig);

// Tuples aligned with an ordered context of closed formulas.
using ItTuple = std::vector<InfoTerm>;

bool tuple_belongs(const ItTuple& tup, const std::vector<Formula>& ctx, const Signature& sig);
bool tuple_realizes(const Model& m, const ItTuple& tup, const std::vector<Formula>& ctx,
                    const Signature& sig);

// Streams every tuple of the product space in odometer order (last position
// fastest), stopping after `cap` tuples. The callback returns false to stop
// early. Returns false if the cap was hit before exhausting the space.
bool for_each_tuple(const std::vector<Formula>& ctx, const Signature& sig,
                    std::uint64_t per_space_cap, std::uint64_t tuple_cap,
                    const std::function<bool(const ItTuple&)>& fn);

}  // namespace cdl

#endif  // CDL_INFOTERM_HPP
