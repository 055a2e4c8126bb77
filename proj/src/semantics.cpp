#include "cdl/semantics.hpp"

#include <algorithm>
#include <sstream>

#include "lexer.hpp"

namespace cdl {

Model::Model(const Signature& sig,
             std::set<std::string> domain,
             std::map<std::string, std::string> ind_val,
             std::map<std::string, std::set<std::string>> concept_val,
             std::map<std::string, std::set<std::pair<std::string, std::string>>> role_val)
    : individuals_(sig.individuals()),
      known_concepts_(sig.concepts()),
      known_roles_(sig.roles()),
      domain_(std::move(domain)),
      ind_val_(std::move(ind_val)),
      concept_val_(std::move(concept_val)),
      role_val_(std::move(role_val)) {
  if (domain_.empty()) throw error("model domain must be non-empty");
  for (const auto& c : individuals_) {
    auto it = ind_val_.find(c);
    if (it == ind_val_.end())
      throw error("model does not interpret individual '" + c + "'");
    if (!domain_.count(it->second))
      throw error("individual '" + c + "' maps outside the domain");
  }
  for (const auto& [name, ext] : concept_val_) {
    if (!sig.is_concept(name)) throw error("unknown concept name '" + name + "' in model");
    for (const auto& e : ext)
      if (!domain_.count(e)) throw error("concept '" + name + "' contains non-domain element");
  }
  for (const auto& [name, ext] : role_val_) {
    if (!sig.is_role(name)) throw error("unknown role name '" + name + "' in model");
    for (const auto& [a, b] : ext)
      if (!domain_.count(a) || !domain_.count(b))
        throw error("role '" + name + "' contains non-domain element");
  }
}

const std::string& Model::ind(const std::string& name) const {
  auto it = ind_val_.find(name);
  if (it == ind_val_.end()) throw error("unknown individual '" + name + "'");
  return it->second;
}

const std::set<std::string>& Model::concept_ext(const std::string& name) const {
  static const std::set<std::string> empty;
  if (!known_concepts_.count(name)) throw error("unknown concept name '" + name + "'");
  auto it = concept_val_.find(name);
  return it == concept_val_.end() ? empty : it->second;
}

const std::set<std::pair<std::string, std::string>>& Model::role_ext(
    const std::string& name) const {
  static const std::set<std::pair<std::string, std::string>> empty;
  if (!known_roles_.count(name)) throw error("unknown role name '" + name + "'");
  auto it = role_val_.find(name);
  return it == role_val_.end() ? empty : it->second;
}

std::set<std::string> extension(const Model& m, const Concept& c) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
      return m.concept_ext(c.name());
    case Concept::Kind::Not: {
      auto inner = extension(m, c.child());
      std::set<std::string> out;
      for (const auto& e : m.domain())
        if (!inner.count(e)) out.insert(e);
      return out;
    }
    case Concept::Kind::And: {
      auto l = extension(m, c.left());
      auto r = extension(m, c.right());
      std::set<std::string> out;
      std::set_intersection(l.begin(), l.end(), r.begin(), r.end(),
                            std::inserter(out, out.begin()));
      return out;
    }
    case Concept::Kind::Or: {
      auto l = extension(m, c.left());
      auto r = extension(m, c.right());
      l.insert(r.begin(), r.end());
      return l;
    }
    case Concept::Kind::Exists: {
      auto inner = extension(m, c.child());
      const auto& rel = m.role_ext(c.role());
      std::set<std::string> out;
      for (const auto& [a, b] : rel)
        if (inner.count(b)) out.insert(a);
      return out;
    }
    case Concept::Kind::Forall: {
      auto inner = extension(m, c.child());
      const auto& rel = m.role_ext(c.role());
      std::set<std::string> out;
      for (const auto& e : m.domain()) {
        bool ok = true;
        for (const auto& [a, b] : rel)
          if (a == e && !inner.count(b)) {
            ok = false;
            break;
          }
        if (ok) out.insert(e);
      }
      return out;
    }
  }
  throw error("unreachable");
}

bool holds(const Model& m, const Formula& k) {
  if (!classify(k).closed) throw error("holds requires a closed formula: " + k.to_string());
  switch (k.kind()) {
    case Formula::Kind::Bot:
      return false;
    case Formula::Kind::Role: {
      const auto& rel = m.role_ext(k.role_name());
      return rel.count({m.ind(k.subject().name), m.ind(k.object().name)}) > 0;
    }
    case Formula::Kind::Member:
      return extension(m, k.concept_expr()).count(m.ind(k.subject().name)) > 0;
    case Formula::Kind::Subsume: {
      auto lhs = m.concept_ext(k.antecedent());
      auto rhs = extension(m, k.concept_expr());
      return std::includes(rhs.begin(), rhs.end(), lhs.begin(), lhs.end());
    }
  }
  throw error("unreachable");
}

Model induced_model(const Theory& t, const Signature& sig) {
  validate_theory(t);
  std::set<std::string> domain(sig.individuals().begin(), sig.individuals().end());
  std::map<std::string, std::string> ind;
  for (const auto& c : sig.individuals()) ind[c] = c;
  std::map<std::string, std::set<std::string>> cval;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> rval;
  for (const auto& f : t.abox) {
    if (f.kind() == Formula::Kind::Member)
      cval[f.concept_expr().name()].insert(f.subject().name);
    else
      rval[f.role_name()].insert({f.subject().name, f.object().name});
  }
  return Model(sig, std::move(domain), std::move(ind), std::move(cval), std::move(rval));
}

std::vector<TboxViolation> check_tbox(const Model& m, const std::vector<Formula>& tbox) {
  std::vector<TboxViolation> out;
  for (const auto& ax : tbox) {
    if (ax.kind() != Formula::Kind::Subsume)
      throw error("check_tbox expects subsumptions, got: " + ax.to_string());
    const auto& lhs = m.concept_ext(ax.antecedent());
    auto rhs = extension(m, ax.concept_expr());
    for (const auto& e : lhs) {
      if (!rhs.count(e)) {
        out.push_back({ax, e});
        break;
      }
    }
  }
  return out;
}

std::string Model::to_string() const {
  std::ostringstream os;
  os << "domain:";
  for (const auto& e : domain_) os << " " << e;
  os << "\nindividuals:";
  for (const auto& c : individuals_) os << " " << c << "=" << ind_val_.at(c);
  os << "\n";
  for (const auto& [name, ext] : concept_val_) {
    if (ext.empty()) continue;
    os << "concept " << name << ":";
    for (const auto& e : ext) os << " " << e;
    os << "\n";
  }
  for (const auto& [name, ext] : role_val_) {
    if (ext.empty()) continue;
    os << "role " << name << ":";
    for (const auto& [a, b] : ext) os << " (" << a << ", " << b << ")";
    os << "\n";
  }
  return os.str();
}

Model parse_model_text(const std::string& text, const Signature& sig) {
  using detail::Lexer;
  using detail::Tok;
  using detail::Token;
  Lexer lx(text);
  std::set<std::string> domain;
  std::map<std::string, std::string> ind;
  std::map<std::string, std::set<std::string>> cval;
  std::map<std::string, std::set<std::pair<std::string, std::string>>> rval;

  // Reads names until the next section keyword or end of input.
  auto at_section = [&lx] {
    return lx.at_ident("domain") || lx.at_ident("individuals") || lx.at_ident("concept") ||
           lx.at_ident("role");
  };
  while (!lx.at(Tok::End)) {
    Token head = lx.expect(Tok::Ident, "a section keyword");
    if (head.text == "domain") {
      lx.expect(Tok::Colon, "':'");
      while (lx.at(Tok::Ident) && !at_section()) domain.insert(lx.take().text);
    } else if (head.text == "individuals") {
      lx.expect(Tok::Colon, "':'");
      while (lx.at(Tok::Ident) && !at_section()) {
        Token n = lx.take();
        lx.expect(Tok::Equals, "'='");
        Token e = lx.expect(Tok::Ident, "a domain element");
        ind[n.text] = e.text;
      }
    } else if (head.text == "concept") {
      Token n = lx.expect(Tok::Ident, "a concept name");
      lx.expect(Tok::Colon, "':'");
      while (lx.at(Tok::Ident) && !at_section()) cval[n.text].insert(lx.take().text);
    } else if (head.text == "role") {
      Token n = lx.expect(Tok::Ident, "a role name");
      lx.expect(Tok::Colon, "':'");
      while (lx.at(Tok::LParen)) {
        lx.take();
        Token a = lx.expect(Tok::Ident, "a domain element");
        lx.expect(Tok::Comma, "','");
        Token b = lx.expect(Tok::Ident, "a domain element");
        lx.expect(Tok::RParen, "')'");
        rval[n.text].insert({a.text, b.text});
      }
    } else {
      throw parse_error("unknown model section '" + head.text + "'", head.line, head.col);
    }
  }
  return Model(sig, std::move(domain), std::move(ind), std::move(cval), std::move(rval));
}

}  // namespace cdl
