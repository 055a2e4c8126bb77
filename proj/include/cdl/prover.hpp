// Bounded goal-directed proof search. Produces proofs that the checker
// accepts, concluding a sequent whose hypotheses are drawn from the given
// TBox and context. The search is deliberately incomplete: introduction
// rules first, then subsumption unfolding keyed by the goal, then case
// splits on disjunctive and existential hypotheses, under iterative
// deepening. A miss is reported as Unknown with statistics, never as a
// refutation.

#ifndef CDL_PROVER_HPP
#define CDL_PROVER_HPP

#include <optional>
#include <vector>

#include "cdl/ndproof.hpp"
#include "cdl/syntax.hpp"

namespace cdl {

struct SearchBudget {
  int max_depth = 12;
  long max_nodes = 50000;
};

struct SearchStats {
  long nodes = 0;
  int depth_used = 0;
  bool budget_exhausted = false;
};

struct ProveResult {
  std::optional<Proof> proof;  // empty = Unknown
  SearchStats stats;
};

ProveResult prove(const std::vector<Formula>& tbox, const std::vector<Formula>& context,
                  const Formula& goal, const Signature& sig, const SearchBudget& budget = {});

}  // namespace cdl

#endif  // CDL_PROVER_HPP
