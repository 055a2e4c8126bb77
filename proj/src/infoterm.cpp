#include "cdl/infoterm.hpp"

#include <algorithm>
#include <sstream>

#include "lexer.hpp"

namespace cdl {

struct InfoTerm::Node {
  Kind kind = Kind::Truth;
  int index = 0;                      // Tag
  std::string name;                   // Wit
  std::shared_ptr<const Node> a, b;   // Pair halves; Tag/Wit body in a
  std::map<std::string, InfoTerm> table;
};

std::shared_ptr<InfoTerm::Node> InfoTerm::new_node(InfoTerm::Kind k) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  return n;
}

InfoTerm InfoTerm::truth() {
  static const InfoTerm t{new_node(Kind::Truth)};
  return t;
}
InfoTerm InfoTerm::pair(InfoTerm first, InfoTerm second) {
  auto n = new_node(Kind::Pair);
  n->a = std::move(first.node_);
  n->b = std::move(second.node_);
  return InfoTerm(std::move(n));
}
InfoTerm InfoTerm::tag(int index, InfoTerm body) {
  auto n = new_node(Kind::Tag);
  n->index = index;
  n->a = std::move(body.node_);
  return InfoTerm(std::move(n));
}
InfoTerm InfoTerm::wit(std::string individual, InfoTerm body) {
  auto n = new_node(Kind::Wit);
  n->name = std::move(individual);
  n->a = std::move(body.node_);
  return InfoTerm(std::move(n));
}
InfoTerm InfoTerm::fun(std::map<std::string, InfoTerm> table) {
  auto n = new_node(Kind::Fun);
  n->table = std::move(table);
  return InfoTerm(std::move(n));
}

namespace {
void expect_kind(InfoTerm::Kind got, InfoTerm::Kind want, const char* accessor) {
  if (got != want)
    throw error(std::string("information term is not a ") + accessor);
}
}  // namespace

InfoTerm::Kind InfoTerm::kind() const { return node_->kind; }
InfoTerm InfoTerm::first() const {
  expect_kind(node_->kind, Kind::Pair, "pair (first)");
  return InfoTerm(node_->a);
}
InfoTerm InfoTerm::second() const {
  expect_kind(node_->kind, Kind::Pair, "pair (second)");
  return InfoTerm(node_->b);
}
int InfoTerm::index() const {
  expect_kind(node_->kind, Kind::Tag, "tagged term");
  return node_->index;
}
InfoTerm InfoTerm::body() const {
  if (node_->kind != Kind::Tag && node_->kind != Kind::Wit)
    throw error("information term has no body");
  return InfoTerm(node_->a);
}
const std::string& InfoTerm::witness() const {
  expect_kind(node_->kind, Kind::Wit, "witness term");
  return node_->name;
}
const std::map<std::string, InfoTerm>& InfoTerm::table() const {
  expect_kind(node_->kind, Kind::Fun, "function table");
  return node_->table;
}

bool InfoTerm::operator==(const InfoTerm& o) const {
  if (node_ == o.node_) return true;
  if (node_->kind != o.node_->kind) return false;
  switch (node_->kind) {
    case Kind::Truth:
      return true;
    case Kind::Pair:
      return first() == o.first() && second() == o.second();
    case Kind::Tag:
      return node_->index == o.node_->index && body() == o.body();
    case Kind::Wit:
      return node_->name == o.node_->name && body() == o.body();
    case Kind::Fun:
      return node_->table == o.node_->table;
  }
  return false;
}

std::string InfoTerm::to_string() const {
  std::ostringstream os;
  switch (kind()) {
    case Kind::Truth:
      os << "tt";
      break;
    case Kind::Pair:
      os << "(" << first().to_string() << ", " << second().to_string() << ")";
      break;
    case Kind::Tag:
      os << "tag " << index() << " " << body().to_string();
      break;
    case Kind::Wit:
      os << "wit " << witness() << " " << body().to_string();
      break;
    case Kind::Fun: {
      os << "fun {";
      bool first_entry = true;
      for (const auto& [k, v] : table()) {
        os << (first_entry ? " " : "; ") << k << " -> " << v.to_string();
        first_entry = false;
      }
      os << " }";
      break;
    }
  }
  return os.str();
}

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

InfoTerm parse_it(Lexer& lx, const Signature& sig) {
  Token t = lx.peek();
  if (t.kind == Tok::LParen) {
    lx.take();
    InfoTerm a = parse_it(lx, sig);
    if (lx.at(Tok::Comma)) {
      lx.take();
      InfoTerm b = parse_it(lx, sig);
      lx.expect(Tok::RParen, "')'");
      return InfoTerm::pair(std::move(a), std::move(b));
    }
    lx.expect(Tok::RParen, "')'");  // grouping parens
    return a;
  }
  if (t.kind == Tok::Ident) {
    if (t.text == "tt") {
      lx.take();
      return InfoTerm::truth();
    }
    if (t.text == "tag") {
      lx.take();
      Token k = lx.expect(Tok::Number, "a tag index");
      return InfoTerm::tag(std::stoi(k.text), parse_it(lx, sig));
    }
    if (t.text == "wit") {
      lx.take();
      Token d = lx.expect(Tok::Ident, "an individual name");
      if (!sig.is_individual(d.text))
        throw parse_error("unknown individual '" + d.text + "'", d.line, d.col);
      return InfoTerm::wit(d.text, parse_it(lx, sig));
    }
    if (t.text == "fun") {
      lx.take();
      lx.expect(Tok::LBrace, "'{'");
      std::map<std::string, InfoTerm> table;
      while (!lx.at(Tok::RBrace)) {
        Token d = lx.expect(Tok::Ident, "an individual name");
        if (!sig.is_individual(d.text))
          throw parse_error("unknown individual '" + d.text + "'", d.line, d.col);
        lx.expect(Tok::Arrow, "'->'");
        InfoTerm v = parse_it(lx, sig);
        if (!table.emplace(d.text, std::move(v)).second)
          throw parse_error("duplicate table entry for '" + d.text + "'", d.line, d.col);
        if (lx.at(Tok::Semi)) lx.take();
      }
      lx.take();
      return InfoTerm::fun(std::move(table));
    }
  }
  lx.fail("expected an information term");
}

void require_closed(const Formula& k, const char* who) {
  if (!classify(k).closed)
    throw error(std::string(who) + " requires a closed formula: " + k.to_string());
}

// Total function tables are checked against the signature's individuals.
bool table_total(const std::map<std::string, InfoTerm>& table, const Signature& sig) {
  if (table.size() != sig.individuals().size()) return false;
  for (const auto& d : sig.individuals())
    if (!table.count(d)) return false;
  return true;
}

bool belongs_concept(const InfoTerm& eta, const std::string& subject, const Concept& c,
                     const Signature& sig);

bool belongs_table(const InfoTerm& eta, const Concept& c, const Signature& sig) {
  if (eta.kind() != InfoTerm::Kind::Fun) return false;
  if (!table_total(eta.table(), sig)) return false;
  for (const auto& [d, v] : eta.table())
    if (!belongs_concept(v, d, c, sig)) return false;
  return true;
}

bool belongs_concept(const InfoTerm& eta, const std::string& subject, const Concept& c,
                     const Signature& sig) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
    case Concept::Kind::Not:
      return eta.kind() == InfoTerm::Kind::Truth;
    case Concept::Kind::And:
      return eta.kind() == InfoTerm::Kind::Pair &&
             belongs_concept(eta.first(), subject, c.left(), sig) &&
             belongs_concept(eta.second(), subject, c.right(), sig);
    case Concept::Kind::Or:
      return eta.kind() == InfoTerm::Kind::Tag && (eta.index() == 1 || eta.index() == 2) &&
             belongs_concept(eta.body(), subject,
                             eta.index() == 1 ? c.left() : c.right(), sig);
    case Concept::Kind::Exists:
      return eta.kind() == InfoTerm::Kind::Wit && sig.is_individual(eta.witness()) &&
             belongs_concept(eta.body(), eta.witness(), c.child(), sig);
    case Concept::Kind::Forall:
      return belongs_table(eta, c.child(), sig);
  }
  return false;
}

}  // namespace

InfoTerm parse_infoterm(const std::string& text, const Signature& sig) {
  Lexer lx(text);
  InfoTerm t = parse_it(lx, sig);
  if (!lx.at(Tok::End)) lx.fail("trailing input after information term");
  return t;
}

bool belongs(const InfoTerm& eta, const Formula& k, const Signature& sig) {
  require_closed(k, "belongs");
  if (classify(k).simple) return eta.kind() == InfoTerm::Kind::Truth;
  if (k.kind() == Formula::Kind::Subsume) return belongs_table(eta, k.concept_expr(), sig);
  return belongs_concept(eta, k.subject().name, k.concept_expr(), sig);
}

namespace {

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b, std::uint64_t lim) {
  if (a == 0 || b == 0) return 0;
  if (a > lim / b) return lim;
  return a * b;
}

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b, std::uint64_t lim) {
  return (a > lim - b) ? lim : a + b;
}

std::uint64_t sat_pow(std::uint64_t base, std::uint64_t exp, std::uint64_t lim) {
  std::uint64_t r = 1;
  for (std::uint64_t i = 0; i < exp; ++i) r = sat_mul(r, base, lim);
  return r;
}

std::uint64_t card_concept(const Concept& c, const Signature& sig, std::uint64_t lim) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
    case Concept::Kind::Not:
      return 1;
    case Concept::Kind::And:
      return sat_mul(card_concept(c.left(), sig, lim), card_concept(c.right(), sig, lim), lim);
    case Concept::Kind::Or:
      return sat_add(card_concept(c.left(), sig, lim), card_concept(c.right(), sig, lim), lim);
    case Concept::Kind::Exists:
      return sat_mul(sig.individuals().size(), card_concept(c.child(), sig, lim), lim);
    case Concept::Kind::Forall:
      return sat_pow(card_concept(c.child(), sig, lim), sig.individuals().size(), lim);
  }
  return 1;
}

std::vector<InfoTerm> enum_concept(const Concept& c, const Signature& sig);

std::vector<InfoTerm> enum_tables(const Concept& c, const Signature& sig) {
  auto inner = enum_concept(c, sig);
  const auto& inds = sig.individuals();
  std::vector<std::size_t> idx(inds.size(), 0);
  std::vector<InfoTerm> out;
  for (;;) {
    std::map<std::string, InfoTerm> table;
    for (std::size_t i = 0; i < inds.size(); ++i) table.emplace(inds[i], inner[idx[i]]);
    out.push_back(InfoTerm::fun(std::move(table)));
    // Odometer: last individual fastest, so tables come out lexicographic by
    // (entry(d1), entry(d2), ...) in signature order.
    std::size_t i = inds.size();
    while (i > 0) {
      --i;
      if (++idx[i] < inner.size()) break;
      idx[i] = 0;
      if (i == 0) return out;
    }
  }
}

std::vector<InfoTerm> enum_concept(const Concept& c, const Signature& sig) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
    case Concept::Kind::Not:
      return {InfoTerm::truth()};
    case Concept::Kind::And: {
      auto ls = enum_concept(c.left(), sig);
      auto rs = enum_concept(c.right(), sig);
      std::vector<InfoTerm> out;
      out.reserve(ls.size() * rs.size());
      for (const auto& l : ls)
        for (const auto& r : rs) out.push_back(InfoTerm::pair(l, r));
      return out;
    }
    case Concept::Kind::Or: {
      std::vector<InfoTerm> out;
      for (int k = 1; k <= 2; ++k)
        for (const auto& t : enum_concept(k == 1 ? c.left() : c.right(), sig))
          out.push_back(InfoTerm::tag(k, t));
      return out;
    }
    case Concept::Kind::Exists: {
      auto inner = enum_concept(c.child(), sig);
      std::vector<InfoTerm> out;
      out.reserve(sig.individuals().size() * inner.size());
      for (const auto& d : sig.individuals())
        for (const auto& t : inner) out.push_back(InfoTerm::wit(d, t));
      return out;
    }
    case Concept::Kind::Forall:
      return enum_tables(c.child(), sig);
  }
  return {};
}

}  // namespace

std::uint64_t it_cardinality(const Formula& k, const Signature& sig, std::uint64_t cap) {
  require_closed(k, "it_cardinality");
  const std::uint64_t lim = cap + 1;
  if (classify(k).simple) return 1;
  if (k.kind() == Formula::Kind::Subsume)
    return sat_pow(card_concept(k.concept_expr(), sig, lim), sig.individuals().size(), lim);
  return card_concept(k.concept_expr(), sig, lim);
}

std::vector<InfoTerm> enumerate_terms(const Formula& k, const Signature& sig,
                                      std::uint64_t cap) {
  require_closed(k, "enumerate");
  if (cap == 0) throw error("enumeration cap must be positive");
  std::uint64_t n = it_cardinality(k, sig, cap);
  if (n > cap) throw overflow_error(cap, n);
  if (classify(k).simple) return {InfoTerm::truth()};
  if (k.kind() == Formula::Kind::Subsume) return enum_tables(k.concept_expr(), sig);
  return enum_concept(k.concept_expr(), sig);
}

namespace {

bool realizes_concept(const Model& m, const InfoTerm& eta, const std::string& subject,
                      const Concept& c, const Signature& sig) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
    case Concept::Kind::Not:
      return holds(m, Formula::member(Term::individual(subject), c));
    case Concept::Kind::And:
      return realizes_concept(m, eta.first(), subject, c.left(), sig) &&
             realizes_concept(m, eta.second(), subject, c.right(), sig);
    case Concept::Kind::Or:
      return realizes_concept(m, eta.body(), subject,
                              eta.index() == 1 ? c.left() : c.right(), sig);
    case Concept::Kind::Exists:
      return holds(m, Formula::role(Term::individual(subject),
                                    Term::individual(eta.witness()), c.role())) &&
             realizes_concept(m, eta.body(), eta.witness(), c.child(), sig);
    case Concept::Kind::Forall: {
      if (!holds(m, Formula::member(Term::individual(subject), c))) return false;
      for (const auto& d : sig.individuals()) {
        if (!holds(m, Formula::role(Term::individual(subject), Term::individual(d), c.role())))
          continue;
        if (!realizes_concept(m, eta.table().at(d), d, c.child(), sig)) return false;
      }
      return true;
    }
  }
  return false;
}

}  // namespace

bool realizes(const Model& m, const InfoTerm& eta, const Formula& k, const Signature& sig) {
  if (!belongs(eta, k, sig))
    throw error("ill-formed term " + eta.to_string() + " for formula " + k.to_string());
  if (classify(k).simple) return holds(m, k);
  if (k.kind() == Formula::Kind::Subsume) {
    if (!holds(m, k)) return false;
    for (const auto& d : sig.individuals()) {
      if (!holds(m, Formula::member(Term::individual(d),
                                    Concept::atom(k.antecedent()))))
        continue;
      if (!realizes_concept(m, eta.table().at(d), d, k.concept_expr(), sig)) return false;
    }
    return true;
  }
  return realizes_concept(m, eta, k.subject().name, k.concept_expr(), sig);
}

namespace {

InfoTerm canonical_concept(const Concept& c, const Signature& sig) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
    case Concept::Kind::Not:
      return InfoTerm::truth();
    case Concept::Kind::And:
      return InfoTerm::pair(canonical_concept(c.left(), sig),
                            canonical_concept(c.right(), sig));
    case Concept::Kind::Or:
      return InfoTerm::tag(1, canonical_concept(c.left(), sig));
    case Concept::Kind::Exists:
      return InfoTerm::wit(sig.individuals().front(), canonical_concept(c.child(), sig));
    case Concept::Kind::Forall: {
      InfoTerm entry = canonical_concept(c.child(), sig);
      std::map<std::string, InfoTerm> table;
      for (const auto& d : sig.individuals()) table.emplace(d, entry);
      return InfoTerm::fun(std::move(table));
    }
  }
  return InfoTerm::truth();
}

std::optional<InfoTerm> realizer_concept(const Model& m, const std::string& subject,
                                         const Concept& c, const Signature& sig) {
  switch (c.kind()) {
    case Concept::Kind::Atom:
    case Concept::Kind::Not:
      if (holds(m, Formula::member(Term::individual(subject), c))) return InfoTerm::truth();
      return std::nullopt;
    case Concept::Kind::And: {
      auto l = realizer_concept(m, subject, c.left(), sig);
      if (!l) return std::nullopt;
      auto r = realizer_concept(m, subject, c.right(), sig);
      if (!r) return std::nullopt;
      return InfoTerm::pair(std::move(*l), std::move(*r));
    }
    case Concept::Kind::Or: {
      if (auto l = realizer_concept(m, subject, c.left(), sig))
        return InfoTerm::tag(1, std::move(*l));
      if (auto r = realizer_concept(m, subject, c.right(), sig))
        return InfoTerm::tag(2, std::move(*r));
      return std::nullopt;
    }
    case Concept::Kind::Exists: {
      for (const auto& d : sig.individuals()) {
        if (!holds(m, Formula::role(Term::individual(subject), Term::individual(d), c.role())))
          continue;
        if (auto b = realizer_concept(m, d, c.child(), sig))
          return InfoTerm::wit(d, std::move(*b));
      }
      return std::nullopt;
    }
    case Concept::Kind::Forall: {
      if (!holds(m, Formula::member(Term::individual(subject), c))) return std::nullopt;
      std::map<std::string, InfoTerm> table;
      for (const auto& d : sig.individuals()) {
        if (holds(m, Formula::role(Term::individual(subject), Term::individual(d), c.role()))) {
          auto b = realizer_concept(m, d, c.child(), sig);
          if (!b) return std::nullopt;
          table.emplace(d, std::move(*b));
        } else {
          table.emplace(d, canonical_concept(c.child(), sig));
        }
      }
      return InfoTerm::fun(std::move(table));
    }
  }
  return std::nullopt;
}

}  // namespace

InfoTerm canonical(const Formula& k, const Signature& sig) {
  require_closed(k, "canonical");
  if (classify(k).simple) return InfoTerm::truth();
  if (k.kind() == Formula::Kind::Subsume) {
    InfoTerm entry = canonical_concept(k.concept_expr(), sig);
    std::map<std::string, InfoTerm> table;
    for (const auto& d : sig.individuals()) table.emplace(d, entry);
    return InfoTerm::fun(std::move(table));
  }
  return canonical_concept(k.concept_expr(), sig);
}

std::optional<InfoTerm> realizer(const Model& m, const Formula& k, const Signature& sig) {
  require_closed(k, "realizer");
  if (classify(k).simple) {
    if (holds(m, k)) return InfoTerm::truth();
    return std::nullopt;
  }
  if (k.kind() == Formula::Kind::Subsume) {
    if (!holds(m, k)) return std::nullopt;
    std::map<std::string, InfoTerm> table;
    for (const auto& d : sig.individuals()) {
      if (holds(m, Formula::member(Term::individual(d), Concept::atom(k.antecedent())))) {
        auto b = realizer_concept(m, d, k.concept_expr(), sig);
        if (!b) return std::nullopt;
        table.emplace(d, std::move(*b));
      } else {
        table.emplace(d, canonical_concept(k.concept_expr(), sig));
      }
    }
    return InfoTerm::fun(std::move(table));
  }
  return realizer_concept(m, k.subject().name, k.concept_expr(), sig);
}

bool tuple_belongs(const ItTuple& tup, const std::vector<Formula>& ctx, const Signature& sig) {
  if (tup.size() != ctx.size()) return false;
  for (std::size_t i = 0; i < tup.size(); ++i)
    if (!belongs(tup[i], ctx[i], sig)) return false;
  return true;
}

bool tuple_realizes(const Model& m, const ItTuple& tup, const std::vector<Formula>& ctx,
                    const Signature& sig) {
  if (tup.size() != ctx.size()) throw error("tuple/context length mismatch");
  for (std::size_t i = 0; i < tup.size(); ++i)
    if (!realizes(m, tup[i], ctx[i], sig)) return false;
  return true;
}

bool for_each_tuple(const std::vector<Formula>& ctx, const Signature& sig,
                    std::uint64_t per_space_cap, std::uint64_t tuple_cap,
                    const std::function<bool(const ItTuple&)>& fn) {
  std::vector<std::vector<InfoTerm>> spaces;
  spaces.reserve(ctx.size());
  for (const auto& f : ctx) spaces.push_back(enumerate_terms(f, sig, per_space_cap));
  ItTuple tup;
  tup.reserve(ctx.size());
  for (const auto& s : spaces) tup.push_back(s.front());
  std::vector<std::size_t> idx(ctx.size(), 0);
  std::uint64_t count = 0;
  for (;;) {
    if (count++ >= tuple_cap) return false;
    if (!fn(tup)) return true;
    std::size_t i = idx.size();
    for (;;) {
      if (i == 0) return true;
      --i;
      if (++idx[i] < spaces[i].size()) {
        tup[i] = spaces[i][idx[i]];
        break;
      }
      idx[i] = 0;
      tup[i] = spaces[i][0];
    }
  }
}

}  // namespace cdl
