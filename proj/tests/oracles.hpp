// Test-only oracles, independent of the library's enumeration and semantics
// code paths. The term-space oracle works over printed strings and builds
// spaces by direct set constructions following the inductive definition; the
// extension oracles enumerate pairs explicitly.

#ifndef CDL_TESTS_ORACLES_HPP
#define CDL_TESTS_ORACLES_HPP

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "cdl/semantics.hpp"
#include "cdl/syntax.hpp"

namespace oracles {

// All information terms of a membership in c, as printed strings in the
// library's literal syntax.
inline std::set<std::string> it_strings(const cdl::Concept& c,
                                        const std::vector<std::string>& inds) {
  using K = cdl::Concept::Kind;
  std::set<std::string> out;
  switch (c.kind()) {
    case K::Atom:
    case K::Not:
      out.insert("tt");
      break;
    case K::And:
      for (const auto& a : it_strings(c.left(), inds))
        for (const auto& b : it_strings(c.right(), inds))
          out.insert("(" + a + ", " + b + ")");
      break;
    case K::Or:
      for (const auto& a : it_strings(c.left(), inds)) out.insert("tag 1 " + a);
      for (const auto& b : it_strings(c.right(), inds)) out.insert("tag 2 " + b);
      break;
    case K::Exists:
      for (const auto& d : inds)
        for (const auto& a : it_strings(c.child(), inds)) out.insert("wit " + d + " " + a);
      break;
    case K::Forall: {
      // every total table: cartesian product over individuals in name order
      std::vector<std::string> keys(inds.begin(), inds.end());
      std::sort(keys.begin(), keys.end());
      auto entries = it_strings(c.child(), inds);
      std::vector<std::string> partial = {""};
      for (std::size_t i = 0; i < keys.size(); ++i) {
        std::vector<std::string> next;
        for (const auto& p : partial)
          for (const auto& e : entries)
            next.push_back(p + (i == 0 ? " " : "; ") + keys[i] + " -> " + e);
        partial = std::move(next);
      }
      for (const auto& p : partial) out.insert("fun {" + p + " }");
      break;
    }
  }
  return out;
}

inline std::set<std::string> it_strings(const cdl::Formula& k,
                                        const std::vector<std::string>& inds) {
  using FK = cdl::Formula::Kind;
  if (cdl::classify(k).simple) return {"tt"};
  if (k.kind() == FK::Subsume) {
    // same table space as a value restriction over the consequent
    cdl::Concept wrapped = cdl::Concept::forall("_oracle_", k.concept_expr());
    return it_strings(wrapped, inds);
  }
  return it_strings(k.concept_expr(), inds);
}

inline unsigned long long it_count(const cdl::Formula& k,
                                   const std::vector<std::string>& inds) {
  return it_strings(k, inds).size();
}

// Extension of an existential restriction by explicit pair enumeration.
inline std::set<std::string> exists_ext(const cdl::Model& m, const std::string& role,
                                        const std::set<std::string>& child_ext) {
  std::set<std::string> out;
  for (const auto& c : m.domain())
    for (const auto& d : m.domain())
      if (m.role_ext(role).count({c, d}) && child_ext.count(d)) out.insert(c);
  return out;
}

inline std::set<std::string> forall_ext(const cdl::Model& m, const std::string& role,
                                        const std::set<std::string>& child_ext) {
  std::set<std::string> out;
  for (const auto& c : m.domain()) {
    bool all = true;
    for (const auto& d : m.domain())
      if (m.role_ext(role).count({c, d}) && !child_ext.count(d)) all = false;
    if (all) out.insert(c);
  }
  return out;
}

}  // namespace oracles

#endif  // CDL_TESTS_ORACLES_HPP
