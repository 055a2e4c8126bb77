#include "cdl/runtime.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "cdl/parser.hpp"
#include "lexer.hpp"

namespace cdl {

// ── Store ───────────────────────────────────────────────────────────────────

void Store::add(const Formula& assertion) {
  Theory probe;
  probe.abox = {assertion};
  validate_theory(probe);  // enforces the ABox shape
  if (!contains(assertion)) assertions_.push_back(assertion);
}

bool Store::contains(const Formula& assertion) const {
  return std::find(assertions_.begin(), assertions_.end(), assertion) != assertions_.end();
}

Theory Store::as_theory(std::vector<Formula> tbox) const {
  Theory t;
  t.tbox = std::move(tbox);
  t.abox = assertions_;
  return t;
}

std::string Store::to_string() const {
  std::string out;
  for (const auto& f : assertions_) out += f.to_string() + "\n";
  return out;
}

Store parse_store_text(const std::string& text, const Signature& sig) {
  Theory th = parse_theory_text(text, sig);
  if (!th.tbox.empty())
    throw error("store files hold assertions only; found subsumption " +
                th.tbox.front().to_string());
  Store s(sig);
  for (const auto& f : th.abox) s.add(f);
  return s;
}

Store load_store(const std::string& path, const Signature& sig) {
  return parse_store_text(read_file(path), sig);
}

void save_store(const Store& store, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write file: " + path);
  out << store.to_string();
}

// ── Decision tables ─────────────────────────────────────────────────────────

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

struct Bindings {
  std::map<std::string, InfoTerm> terms;
  std::map<std::string, std::string> names;
};

struct Pattern {
  enum class Kind { Any, Var, Truth, Pair, Tag, Wit, Fun };
  Kind kind = Kind::Any;
  std::string var;  // Var binder, or Wit name binder
  enum class WitKind { Literal, Var, Any } wit_kind = WitKind::Any;
  std::string wit_name;
  int index = 0;
  std::vector<Pattern> subs;
  std::map<std::string, Pattern> entries;
};

struct TermRef {
  enum class Kind { SelfRef, Literal, Var } kind;
  std::string name;
};

struct GuardAtom {
  bool is_role = false;
  TermRef a{TermRef::Kind::SelfRef, ""}, b{TermRef::Kind::SelfRef, ""};
  std::string predicate;  // concept or role name
};

struct Template {
  enum class Kind { Truth, Pair, Tag, Wit, Fun, VarRef };
  Kind kind = Kind::Truth;
  std::string var;  // VarRef, or Wit name var
  bool wit_is_var = false;
  std::string wit_name;
  int index = 0;
  std::vector<Template> subs;
  std::map<std::string, Template> entries;
};

struct Row {
  Pattern pattern;
  std::vector<GuardAtom> guard;
  Template output;
};

bool irrefutable(const Pattern& p) { return p.kind == Pattern::Kind::Any; }

void collect_pattern_vars(const Pattern& p, std::set<std::string>& term_vars,
                          std::set<std::string>& name_vars) {
  if (p.kind == Pattern::Kind::Var) term_vars.insert(p.var);
  if (p.kind == Pattern::Kind::Wit && p.wit_kind == Pattern::WitKind::Var)
    name_vars.insert(p.wit_name);
  for (const auto& sub : p.subs) collect_pattern_vars(sub, term_vars, name_vars);
  for (const auto& [d, sub] : p.entries) collect_pattern_vars(sub, term_vars, name_vars);
}

void collect_template_vars(const Template& t, std::set<std::string>& term_refs,
                           std::set<std::string>& name_refs) {
  if (t.kind == Template::Kind::VarRef) term_refs.insert(t.var);
  if (t.kind == Template::Kind::Wit && t.wit_is_var) name_refs.insert(t.wit_name);
  for (const auto& sub : t.subs) collect_template_vars(sub, term_refs, name_refs);
  for (const auto& [d, sub] : t.entries) collect_template_vars(sub, term_refs, name_refs);
}

// Every variable a template reads must be bound by the row's pattern or
// guard, and no name may double as both a sub-term and an individual binder.
void validate_row(const Row& row, const std::string& service, std::size_t rowno) {
  std::set<std::string> term_vars, name_vars;
  collect_pattern_vars(row.pattern, term_vars, name_vars);
  for (const auto& g : row.guard) {
    if (g.a.kind == TermRef::Kind::Var) name_vars.insert(g.a.name);
    if (g.is_role && g.b.kind == TermRef::Kind::Var) name_vars.insert(g.b.name);
  }
  for (const auto& v : term_vars)
    if (name_vars.count(v))
      throw error("table " + service + " row " + std::to_string(rowno) + ": variable ?" + v +
                  " is bound both as a sub-term and as an individual");
  std::set<std::string> term_refs, name_refs;
  collect_template_vars(row.output, term_refs, name_refs);
  for (const auto& v : term_refs)
    if (!term_vars.count(v))
      throw error("table " + service + " row " + std::to_string(rowno) +
                  ": template references unbound term ?" + v);
  for (const auto& v : name_refs)
    if (!name_vars.count(v))
      throw error("table " + service + " row " + std::to_string(rowno) +
                  ": template references unknown individual ?" + v);
}

Pattern parse_pattern(Lexer& lx, const Signature& sig) {
  Pattern p;
  if (lx.at(Tok::Question)) {
    lx.take();
    if (lx.at(Tok::Ident) && !lx.at_ident("tt") && !lx.at_ident("tag") &&
        !lx.at_ident("wit") && !lx.at_ident("fun")) {
      p.kind = Pattern::Kind::Var;
      p.var = lx.take().text;
    } else {
      p.kind = Pattern::Kind::Any;
    }
    return p;
  }
  if (lx.at(Tok::LParen)) {
    lx.take();
    Pattern a = parse_pattern(lx, sig);
    if (lx.at(Tok::Comma)) {
      lx.take();
      Pattern b = parse_pattern(lx, sig);
      lx.expect(Tok::RParen, "')'");
      p.kind = Pattern::Kind::Pair;
      p.subs = {std::move(a), std::move(b)};
      return p;
    }
    lx.expect(Tok::RParen, "')'");
    return a;
  }
  Token t = lx.expect(Tok::Ident, "a pattern");
  if (t.text == "tt") {
    p.kind = Pattern::Kind::Truth;
    return p;
  }
  if (t.text == "tag") {
    p.kind = Pattern::Kind::Tag;
    p.index = std::stoi(lx.expect(Tok::Number, "a tag index").text);
    p.subs.push_back(parse_pattern(lx, sig));
    return p;
  }
  if (t.text == "wit") {
    p.kind = Pattern::Kind::Wit;
    if (lx.at(Tok::Question)) {
      lx.take();
      if (lx.at(Tok::Ident)) {
        p.wit_kind = Pattern::WitKind::Var;
        p.wit_name = lx.take().text;
      } else {
        p.wit_kind = Pattern::WitKind::Any;
      }
    } else {
      Token d = lx.expect(Tok::Ident, "an individual name");
      if (!sig.is_individual(d.text))
        throw parse_error("unknown individual '" + d.text + "'", d.line, d.col);
      p.wit_kind = Pattern::WitKind::Literal;
      p.wit_name = d.text;
    }
    p.subs.push_back(parse_pattern(lx, sig));
    return p;
  }
  if (t.text == "fun") {
    p.kind = Pattern::Kind::Fun;
    lx.expect(Tok::LBrace, "'{'");
    while (!lx.at(Tok::RBrace)) {
      Token d = lx.expect(Tok::Ident, "an individual name");
      lx.expect(Tok::Arrow, "'->'");
      p.entries.emplace(d.text, parse_pattern(lx, sig));
      if (lx.at(Tok::Semi)) lx.take();
    }
    lx.take();
    return p;
  }
  throw parse_error("expected a pattern, found '" + t.text + "'", t.line, t.col);
}

TermRef parse_term_ref(Lexer& lx, const Signature& sig) {
  if (lx.at(Tok::Question)) {
    lx.take();
    Token v = lx.expect(Tok::Ident, "a variable name");
    return {TermRef::Kind::Var, v.text};
  }
  Token t = lx.expect(Tok::Ident, "a term");
  if (t.text == "self") return {TermRef::Kind::SelfRef, ""};
  if (!sig.is_individual(t.text))
    throw parse_error("unknown individual '" + t.text + "'", t.line, t.col);
  return {TermRef::Kind::Literal, t.text};
}

GuardAtom parse_guard_atom(Lexer& lx, const Signature& sig) {
  GuardAtom g;
  if (lx.at(Tok::LParen)) {
    lx.take();
    g.is_role = true;
    g.a = parse_term_ref(lx, sig);
    lx.expect(Tok::Comma, "','");
    g.b = parse_term_ref(lx, sig);
    lx.expect(Tok::RParen, "')'");
    lx.expect(Tok::Colon, "':'");
    Token r = lx.expect(Tok::Ident, "a role name");
    if (!sig.is_role(r.text))
      throw parse_error("unknown role '" + r.text + "'", r.line, r.col);
    g.predicate = r.text;
    return g;
  }
  g.a = parse_term_ref(lx, sig);
  lx.expect(Tok::Colon, "':'");
  Token c = lx.expect(Tok::Ident, "a concept name");
  if (!sig.is_concept(c.text))
    throw parse_error("unknown concept '" + c.text + "'", c.line, c.col);
  g.predicate = c.text;
  return g;
}

Template parse_template(Lexer& lx, const Signature& sig) {
  Template t;
  if (lx.at(Tok::Question)) {
    lx.take();
    Token v = lx.expect(Tok::Ident, "a variable name");
    t.kind = Template::Kind::VarRef;
    t.var = v.text;
    return t;
  }
  if (lx.at(Tok::LParen)) {
    lx.take();
    Template a = parse_template(lx, sig);
    if (lx.at(Tok::Comma)) {
      lx.take();
      Template b = parse_template(lx, sig);
      lx.expect(Tok::RParen, "')'");
      t.kind = Template::Kind::Pair;
      t.subs = {std::move(a), std::move(b)};
      return t;
    }
    lx.expect(Tok::RParen, "')'");
    return a;
  }
  Token head = lx.expect(Tok::Ident, "a template");
  if (head.text == "tt") {
    t.kind = Template::Kind::Truth;
    return t;
  }
  if (head.text == "tag") {
    t.kind = Template::Kind::Tag;
    t.index = std::stoi(lx.expect(Tok::Number, "a tag index").text);
    t.subs.push_back(parse_template(lx, sig));
    return t;
  }
  if (head.text == "wit") {
    t.kind = Template::Kind::Wit;
    if (lx.at(Tok::Question)) {
      lx.take();
      Token v = lx.expect(Tok::Ident, "a variable name");
      t.wit_is_var = true;
      t.wit_name = v.text;
    } else {
      Token d = lx.expect(Tok::Ident, "an individual name");
      if (!sig.is_individual(d.text))
        throw parse_error("unknown individual '" + d.text + "'", d.line, d.col);
      t.wit_name = d.text;
    }
    t.subs.push_back(parse_template(lx, sig));
    return t;
  }
  if (head.text == "fun") {
    t.kind = Template::Kind::Fun;
    lx.expect(Tok::LBrace, "'{'");
    while (!lx.at(Tok::RBrace)) {
      Token d = lx.expect(Tok::Ident, "an individual name");
      if (!sig.is_individual(d.text))
        throw parse_error("unknown individual '" + d.text + "'", d.line, d.col);
      lx.expect(Tok::Arrow, "'->'");
      t.entries.emplace(d.text, parse_template(lx, sig));
      if (lx.at(Tok::Semi)) lx.take();
    }
    lx.take();
    return t;
  }
  throw parse_error("expected a template, found '" + head.text + "'", head.line, head.col);
}

bool match_pattern(const Pattern& p, const InfoTerm& it, Bindings& b) {
  switch (p.kind) {
    case Pattern::Kind::Any:
      return true;
    case Pattern::Kind::Var: {
      auto [pos, inserted] = b.terms.emplace(p.var, it);
      return inserted || pos->second == it;
    }
    case Pattern::Kind::Truth:
      return it.kind() == InfoTerm::Kind::Truth;
    case Pattern::Kind::Pair:
      return it.kind() == InfoTerm::Kind::Pair && match_pattern(p.subs[0], it.first(), b) &&
             match_pattern(p.subs[1], it.second(), b);
    case Pattern::Kind::Tag:
      return it.kind() == InfoTerm::Kind::Tag && it.index() == p.index &&
             match_pattern(p.subs[0], it.body(), b);
    case Pattern::Kind::Wit: {
      if (it.kind() != InfoTerm::Kind::Wit) return false;
      switch (p.wit_kind) {
        case Pattern::WitKind::Literal:
          if (it.witness() != p.wit_name) return false;
          break;
        case Pattern::WitKind::Var: {
          auto [pos, inserted] = b.names.emplace(p.wit_name, it.witness());
          if (!inserted && pos->second != it.witness()) return false;
          break;
        }
        case Pattern::WitKind::Any:
          break;
      }
      return match_pattern(p.subs[0], it.body(), b);
    }
    case Pattern::Kind::Fun: {
      if (it.kind() != InfoTerm::Kind::Fun) return false;
      if (it.table().size() != p.entries.size()) return false;
      for (const auto& [d, sub] : p.entries) {
        auto found = it.table().find(d);
        if (found == it.table().end() || !match_pattern(sub, found->second, b)) return false;
      }
      return true;
    }
  }
  return false;
}

std::optional<std::string> deref(const TermRef& r, const std::string& self,
                                 const Bindings& b) {
  switch (r.kind) {
    case TermRef::Kind::SelfRef:
      return self;
    case TermRef::Kind::Literal:
      return r.name;
    case TermRef::Kind::Var: {
      auto it = b.names.find(r.name);
      if (it == b.names.end()) return std::nullopt;
      return it->second;
    }
  }
  return std::nullopt;
}

bool atom_holds(const GuardAtom& g, const std::string& a, const std::string& bb,
                const Store& store) {
  if (g.is_role)
    return store.contains(
        Formula::role(Term::individual(a), Term::individual(bb), g.predicate));
  return store.contains(Formula::member(Term::individual(a), Concept::atom(g.predicate)));
}

// Solves the conjunctive guard left to right; unbound variables range over
// the individuals in signature order. The first solution extends `b`.
bool solve_guard(const std::vector<GuardAtom>& guard, std::size_t i, const std::string& self,
                 const Store& store, Bindings& b) {
  if (i == guard.size()) return true;
  const GuardAtom& g = guard[i];
  auto va = deref(g.a, self, b);
  auto vb = g.is_role ? deref(g.b, self, b) : std::make_optional(std::string());

  auto try_with = [&](const std::string& a, const std::string& bb) {
    if (!atom_holds(g, a, bb, store)) return false;
    return solve_guard(guard, i + 1, self, store, b);
  };

  if (va && vb) return try_with(*va, *vb);
  const auto& inds = store.sig().individuals();
  if (!va && vb) {
    for (const auto& d : inds) {
      b.names[g.a.name] = d;
      if (try_with(d, *vb)) return true;
      b.names.erase(g.a.name);
    }
    return false;
  }
  if (va && !vb) {
    for (const auto& d : inds) {
      b.names[g.b.name] = d;
      if (try_with(*va, d)) return true;
      b.names.erase(g.b.name);
    }
    return false;
  }
  for (const auto& d1 : inds) {
    b.names[g.a.name] = d1;
    for (const auto& d2 : inds) {
      b.names[g.b.name] = d2;
      if (try_with(d1, d2)) return true;
      b.names.erase(g.b.name);
    }
    b.names.erase(g.a.name);
  }
  return false;
}

InfoTerm instantiate(const Template& t, const Bindings& b, const std::string& service) {
  switch (t.kind) {
    case Template::Kind::Truth:
      return InfoTerm::truth();
    case Template::Kind::Pair:
      return InfoTerm::pair(instantiate(t.subs[0], b, service),
                            instantiate(t.subs[1], b, service));
    case Template::Kind::Tag:
      return InfoTerm::tag(t.index, instantiate(t.subs[0], b, service));
    case Template::Kind::Wit: {
      std::string name = t.wit_name;
      if (t.wit_is_var) {
        auto it = b.names.find(t.wit_name);
        if (it == b.names.end())
          throw error("table " + service + ": template references unbound name ?" +
                      t.wit_name);
        name = it->second;
      }
      return InfoTerm::wit(name, instantiate(t.subs[0], b, service));
    }
    case Template::Kind::Fun: {
      std::map<std::string, InfoTerm> entries;
      for (const auto& [d, sub] : t.entries) entries.emplace(d, instantiate(sub, b, service));
      return InfoTerm::fun(std::move(entries));
    }
    case Template::Kind::VarRef: {
      auto it = b.terms.find(t.var);
      if (it == b.terms.end())
        throw error("table " + service + ": template references unbound term ?" + t.var);
      return it->second;
    }
  }
  throw error("unreachable");
}

}  // namespace

struct DecisionTable::Impl {
  std::vector<Row> rows;
};

std::size_t DecisionTable::row_count() const { return impl_->rows.size(); }

DecisionTable parse_table_text(const std::string& text, const Signature& sig) {
  DecisionTable table;
  auto impl = std::make_shared<DecisionTable::Impl>();
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    bool blank = std::all_of(line.begin(), line.end(),
                             [](unsigned char c) { return std::isspace(c); });
    if (blank) continue;
    if (line.rfind("service", 0) == 0) {
      std::istringstream ls(line);
      std::string kw;
      ls >> kw >> table.service_;
      if (table.service_.empty()) throw parse_error("expected a service name", lineno, 1);
      continue;
    }
    if (line.rfind("row:", 0) != 0)
      throw parse_error("expected 'service NAME' or 'row: ...'", lineno, 1);
    std::string body = line.substr(4);
    Lexer lx(body);
    Pattern pat = parse_pattern(lx, sig);
    lx.expect(Tok::Pipe, "'|'");
    std::vector<GuardAtom> guard;
    while (!lx.at(Tok::Pipe)) {
      guard.push_back(parse_guard_atom(lx, sig));
      if (lx.at(Tok::Semi)) lx.take();
    }
    lx.expect(Tok::Pipe, "'|'");
    Template tpl = parse_template(lx, sig);
    if (!lx.at(Tok::End)) lx.fail("trailing input after template");
    Row row{std::move(pat), std::move(guard), std::move(tpl)};
    validate_row(row, table.service_, impl->rows.size() + 1);
    impl->rows.push_back(std::move(row));
  }
  if (table.service_.empty()) throw error("table file lacks a 'service NAME' line");
  if (impl->rows.empty()) throw error("table for " + table.service_ + " has no rows");
  const Row& last = impl->rows.back();
  if (!irrefutable(last.pattern) || !last.guard.empty())
    throw error("table for " + table.service_ +
                " must end with an unconditional default row");
  table.impl_ = std::move(impl);
  return table;
}

DecisionTable load_table(const std::string& path, const Signature& sig) {
  return parse_table_text(read_file(path), sig);
}

InfoTerm DecisionTable::evaluate(const std::string& t, const InfoTerm& input,
                                 const ServiceSpec& spec, const Store& store) const {
  for (const auto& row : impl_->rows) {
    Bindings b;
    if (!match_pattern(row.pattern, input, b)) continue;
    if (!solve_guard(row.guard, 0, t, store, b)) continue;
    InfoTerm out = instantiate(row.output, b, service_);
    Formula post = Formula::member(Term::individual(t), spec.post);
    if (!belongs(out, post, store.sig()))
      throw error("table " + service_ + ": output " + out.to_string() +
                  " does not belong to " + post.to_string());
    return out;
  }
  throw error("table " + service_ + ": no row fires for " + t + " with " + input.to_string());
}

Implementation impl_from_table(const DecisionTable& table, const ServiceSpec& spec,
                               const Store& store) {
  return [table, spec, store](const std::string& t, const InfoTerm& input) {
    return table.evaluate(t, input, spec, store);
  };
}

// ── Environment loading ─────────────────────────────────────────────────────

EnvBundle load_environment(const std::string& dir) {
  namespace fs = std::filesystem;
  fs::path root(dir);
  if (!fs::is_directory(root)) throw error("not an environment directory: " + dir);

  Signature sig = load_signature((root / "sig.txt").string());
  Theory tbox_part = load_theory((root / "theory.txt").string(), sig);
  if (!tbox_part.abox.empty())
    throw error("theory.txt holds the TBox; move assertions to store.txt");
  Store store = load_store((root / "store.txt").string(), sig);
  Model model = induced_model(store.as_theory(), sig);

  std::map<std::string, ServiceSpec> specs;
  if (fs::is_directory(root / "specs")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / "specs"))
      if (e.path().extension() == ".spec") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      ServiceSpec spec = parse_service_spec(read_file(f.string()), sig);
      if (!specs.emplace(spec.name, spec).second)
        throw error("duplicate service spec '" + spec.name + "'");
    }
  }

  Environment env{sig, store.as_theory(tbox_part.tbox), {}, {}};
  for (const auto& ax : env.theory.tbox) {
    auto r = realizer(model, ax, sig);
    env.tbox_terms.push_back(r ? *r : canonical(ax, sig));
  }

  if (fs::is_directory(root / "tables")) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(root / "tables"))
      if (e.path().extension() == ".dt") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      DecisionTable table = load_table(f.string(), sig);
      auto spec_it = specs.find(table.service());
      if (spec_it == specs.end())
        throw error("table '" + f.filename().string() + "' names service '" +
                    table.service() + "' but specs/ has no such spec");
      env.services.emplace_back(spec_it->second,
                                impl_from_table(table, spec_it->second, store));
    }
  }

  validate_environment(env);
  return EnvBundle{std::move(sig), std::move(store), std::move(model), std::move(env),
                   std::move(specs), root.string()};
}

// ── Execution ───────────────────────────────────────────────────────────────

std::pair<InfoTerm, Trace> execute(const Environment& env, const Composition& comp,
                                   const std::string& t, const InfoTerm& alpha) {
  const ServiceSpec& main_spec = composition_spec(env, comp);
  Formula pre = Formula::member(Term::individual(t), main_spec.pre);
  if (!belongs(alpha, pre, env.sig))
    throw error("precondition violated: " + alpha.to_string() + " does not belong to " +
                pre.to_string());
  auto trace = std::make_shared<Trace>();
  auto impl = compile(env, comp, [trace](const TraceEvent& e) { trace->push_back(e); });
  InfoTerm out = impl(t, alpha);
  return {out, std::move(*trace)};
}

std::string trace_to_string(const Trace& trace) {
  std::string out;
  for (const auto& e : trace)
    out += e.path + " | " + e.tag + " | " + e.input.to_string() + " | " +
           e.output.to_string() + "\n";
  return out;
}

}  // namespace cdl
