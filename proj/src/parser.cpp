#include "cdl/parser.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "lexer.hpp"

namespace cdl {

using detail::Lexer;
using detail::Tok;
using detail::Token;

namespace {

bool is_keyword(const Token& t, const char* w) {
  return t.kind == Tok::Ident && t.text == w;
}

Concept parse_or(Lexer& lx, const Signature& sig);

Concept parse_primary(Lexer& lx, const Signature& sig) {
  if (lx.at(Tok::LParen)) {
    lx.take();
    Concept c = parse_or(lx, sig);
    lx.expect(Tok::RParen, "')'");
    return c;
  }
  Token t = lx.peek();
  if (t.kind != Tok::Ident) lx.fail("expected a concept");
  if (!sig.is_concept(t.text))
    throw parse_error("unknown concept name '" + t.text + "'", t.line, t.col);
  lx.take();
  return Concept::atom(t.text);
}

Concept parse_unary(Lexer& lx, const Signature& sig) {
  Token t = lx.peek();
  if (is_keyword(t, "not")) {
    lx.take();
    return Concept::negation(parse_unary(lx, sig));
  }
  if (is_keyword(t, "exists") || is_keyword(t, "forall")) {
    bool ex = t.text == "exists";
    lx.take();
    Token r = lx.expect(Tok::Ident, "a role name");
    if (!sig.is_role(r.text))
      throw parse_error("unknown role name '" + r.text + "'", r.line, r.col);
    lx.expect(Tok::Dot, "'.'");
    Concept body = parse_unary(lx, sig);
    return ex ? Concept::exists(r.text, std::move(body))
              : Concept::forall(r.text, std::move(body));
  }
  return parse_primary(lx, sig);
}

Concept parse_and(Lexer& lx, const Signature& sig) {
  Concept l = parse_unary(lx, sig);
  if (lx.at_ident("and")) {
    lx.take();
    return Concept::conj(std::move(l), parse_and(lx, sig));
  }
  return l;
}

Concept parse_or(Lexer& lx, const Signature& sig) {
  Concept l = parse_and(lx, sig);
  if (lx.at_ident("or")) {
    lx.take();
    return Concept::disj(std::move(l), parse_or(lx, sig));
  }
  return l;
}

Term make_term(const Token& t, const Signature& sig) {
  if (sig.is_individual(t.text)) return Term::individual(t.text);
  if (sig.is_variable(t.text)) return Term::variable(t.text);
  throw parse_error("unknown term '" + t.text + "'", t.line, t.col);
}

Formula parse_formula_inner(Lexer& lx, const Signature& sig) {
  Token t = lx.peek();
  if (is_keyword(t, "bot")) {
    lx.take();
    return Formula::bot();
  }
  if (t.kind == Tok::LParen) {
    // Role assertion "(s, t) : R". Anything else starting with '(' can only
    // be a parenthesized concept heading a subsumption, which the language
    // restricts to atomic antecedents.
    lx.take();
    Token s_tok = lx.peek();
    if (s_tok.kind == Tok::Ident &&
        (sig.is_individual(s_tok.text) || sig.is_variable(s_tok.text))) {
      Term s = make_term(lx.take(), sig);
      lx.expect(Tok::Comma, "','");
      Term u = make_term(lx.expect(Tok::Ident, "a term"), sig);
      lx.expect(Tok::RParen, "')'");
      lx.expect(Tok::Colon, "':'");
      Token r = lx.expect(Tok::Ident, "a role name");
      if (!sig.is_role(r.text))
        throw parse_error("unknown role name '" + r.text + "'", r.line, r.col);
      return Formula::role(std::move(s), std::move(u), r.text);
    }
    Concept c = parse_or(lx, sig);
    lx.expect(Tok::RParen, "')'");
    if (lx.at_ident("sub"))
      throw parse_error("non-atomic subsumption antecedent", t.line, t.col);
    lx.fail("expected a formula");
  }
  if (t.kind != Tok::Ident) lx.fail("expected a formula");
  // IDENT "sub" concept | term ":" concept
  Token head = lx.take();
  if (lx.at_ident("sub")) {
    lx.take();
    if (!sig.is_concept(head.text))
      throw parse_error("unknown concept name '" + head.text + "'", head.line, head.col);
    return Formula::subsume(head.text, parse_or(lx, sig));
  }
  lx.expect(Tok::Colon, "':'");
  Term subj = make_term(head, sig);
  return Formula::member(std::move(subj), parse_or(lx, sig));
}

}  // namespace

Concept parse_concept(const std::string& text, const Signature& sig) {
  Lexer lx(text);
  Concept c = parse_or(lx, sig);
  if (!lx.at(Tok::End)) lx.fail("trailing input after concept");
  return c;
}

Formula parse_formula(const std::string& text, const Signature& sig) {
  Lexer lx(text);
  Formula f = parse_formula_inner(lx, sig);
  if (!lx.at(Tok::End)) lx.fail("trailing input after formula");
  return f;
}

Term parse_term(const std::string& text, const Signature& sig) {
  Lexer lx(text);
  Term t = make_term(lx.expect(Tok::Ident, "a term"), sig);
  if (!lx.at(Tok::End)) lx.fail("trailing input after term");
  return t;
}

Signature parse_signature_text(const std::string& text) {
  Lexer lx(text);
  std::vector<std::string> individuals;
  std::set<std::string> roles, concepts, variables;
  std::string section;
  while (!lx.at(Tok::End)) {
    Token t = lx.expect(Tok::Ident, "a name or section header");
    if (lx.at(Tok::Colon)) {
      lx.take();
      if (t.text != "individuals" && t.text != "roles" && t.text != "concepts" &&
          t.text != "variables")
        throw parse_error("unknown signature section '" + t.text + "'", t.line, t.col);
      section = t.text;
      continue;
    }
    if (section == "individuals")
      individuals.push_back(t.text);
    else if (section == "roles")
      roles.insert(t.text);
    else if (section == "concepts")
      concepts.insert(t.text);
    else if (section == "variables")
      variables.insert(t.text);
    else
      throw parse_error("name '" + t.text + "' appears before any section header",
                        t.line, t.col);
  }
  return Signature(std::move(individuals), std::move(roles), std::move(concepts),
                   std::move(variables));
}

Theory parse_theory_text(const std::string& text, const Signature& sig) {
  Theory th;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  auto push_unique = [](std::vector<Formula>& v, const Formula& f) {
    if (std::find(v.begin(), v.end(), f) == v.end()) v.push_back(f);
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = std::all_of(line.begin(), line.end(), [](unsigned char c) {
      return std::isspace(c);
    });
    if (blank) continue;
    Formula f = [&] {
      try {
        return parse_formula(line, sig);
      } catch (const parse_error& e) {
        throw parse_error(std::string(e.what()), lineno, 1);
      }
    }();
    if (f.kind() == Formula::Kind::Subsume)
      push_unique(th.tbox, f);
    else
      push_unique(th.abox, f);
  }
  validate_theory(th);
  return th;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Signature load_signature(const std::string& path) {
  return parse_signature_text(read_file(path));
}

Theory load_theory(const std::string& path, const Signature& sig) {
  return parse_theory_text(read_file(path), sig);
}

}  // namespace cdl
