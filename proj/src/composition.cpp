#include "cdl/composition.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "cdl/parser.hpp"
#include "lexer.hpp"

namespace cdl {

namespace {

// Left-nested constructions fix the pair/tag shapes of n-ary rules.
Concept conj_all(const std::vector<Concept>& parts) {
  Concept acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Concept::conj(acc, parts[i]);
  return acc;
}

Concept disj_all(const std::vector<Concept>& parts) {
  Concept acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = Concept::disj(acc, parts[i]);
  return acc;
}

InfoTerm combine_pairs(const std::vector<InfoTerm>& parts) {
  InfoTerm acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) acc = InfoTerm::pair(acc, parts[i]);
  return acc;
}

// Peels a left-nested n-ary disjunction term into (branch index, payload),
// 1-based.
std::pair<int, InfoTerm> decode_branch(const InfoTerm& t, std::size_t n) {
  if (n == 1) return {1, t};
  if (t.kind() != InfoTerm::Kind::Tag)
    throw error("internal: case dispatch on a non-tagged term " + t.to_string());
  if (t.index() == 2) return {static_cast<int>(n), t.body()};
  auto [k, payload] = decode_branch(t.body(), n - 1);
  return {k, payload};
}

}  // namespace

std::string ServiceSpec::to_string() const {
  return name + "(" + param + ") :: " + pre.to_string() + " => " + post.to_string();
}

ServiceSpec parse_service_spec(const std::string& text, const Signature& sig) {
  std::istringstream in(text);
  std::string line;
  std::string name, param, pre_text, post_text;
  std::size_t lineno = 0;
  auto strip = [](std::string s) {
    auto hash = s.find('#');
    if (hash != std::string::npos) s.erase(hash);
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return std::string();
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string l = strip(line);
    if (l.empty()) continue;
    if (l.rfind("service", 0) == 0) {
      auto open = l.find('(');
      auto close = l.find(')');
      if (open == std::string::npos || close == std::string::npos || close < open)
        throw parse_error("expected service NAME(param)", lineno, 1);
      name = strip(l.substr(7, open - 7));
      param = strip(l.substr(open + 1, close - open - 1));
    } else if (l.rfind("pre:", 0) == 0) {
      pre_text = l.substr(4);
    } else if (l.rfind("post:", 0) == 0) {
      post_text = l.substr(5);
    } else {
      throw parse_error("unexpected line in service spec: " + l, lineno, 1);
    }
  }
  if (name.empty() || param.empty() || pre_text.empty() || post_text.empty())
    throw error("service spec requires service/pre/post lines");
  if (!sig.is_variable(param))
    throw error("service parameter '" + param + "' is not a declared variable");
  return ServiceSpec{name, param, parse_concept(pre_text, sig), parse_concept(post_text, sig)};
}

const std::pair<ServiceSpec, Implementation>* Environment::find_service(
    const std::string& name) const {
  for (const auto& s : services)
    if (s.first.name == name) return &s;
  return nullptr;
}

const InfoTerm& Environment::tbox_term(const Formula& axiom) const {
  for (std::size_t i = 0; i < theory.tbox.size(); ++i)
    if (theory.tbox[i] == axiom) return tbox_terms[i];
  throw error("environment has no justification for " + axiom.to_string());
}

void validate_environment(const Environment& env) {
  validate_theory(env.theory);
  if (env.tbox_terms.size() != env.theory.tbox.size())
    throw error("environment justification terms are not aligned with the TBox");
  for (std::size_t i = 0; i < env.theory.tbox.size(); ++i)
    if (!belongs(env.tbox_terms[i], env.theory.tbox[i], env.sig))
      throw error("justification term " + std::to_string(i) + " does not belong to " +
                  env.theory.tbox[i].to_string());
  std::set<std::string> names;
  for (const auto& [spec, impl] : env.services) {
    if (!names.insert(spec.name).second)
      throw error("duplicate service name '" + spec.name + "'");
    if (!impl) throw error("service '" + spec.name + "' has no implementation");
  }
}

// ── Composition nodes ───────────────────────────────────────────────────────

struct Composition::Node {
  Rule rule;
  std::optional<ServiceSpec> spec;
  std::string env_name;
  std::vector<Proof> ac;
  std::vector<Composition> children;
};

Composition Composition::env_ref(std::string service_name) {
  auto n = std::make_shared<Node>();
  n->rule = Rule::Env;
  n->env_name = std::move(service_name);
  return Composition(std::move(n));
}

Composition Composition::ax(ServiceSpec spec, Proof ac) {
  auto n = std::make_shared<Node>();
  n->rule = Rule::Ax;
  n->spec = std::move(spec);
  n->ac = {std::move(ac)};
  return Composition(std::move(n));
}

Composition Composition::make(Rule r, ServiceSpec spec, std::vector<Proof> ac,
                              std::vector<Composition> children) {
  if (r == Rule::Env || r == Rule::Ax)
    throw error("use env_ref/ax for leaf composition nodes");
  auto n = std::make_shared<Node>();
  n->rule = r;
  n->spec = std::move(spec);
  n->ac = std::move(ac);
  n->children = std::move(children);
  return Composition(std::move(n));
}

Composition::Rule Composition::rule() const { return node_->rule; }
const ServiceSpec& Composition::spec() const {
  if (!node_->spec) throw error("environment reference nodes carry no spec of their own");
  return *node_->spec;
}
const std::string& Composition::env_name() const { return node_->env_name; }
const std::vector<Proof>& Composition::ac_proofs() const { return node_->ac; }
const std::vector<Composition>& Composition::children() const { return node_->children; }

bool Composition::operator==(const Composition& o) const {
  if (node_ == o.node_) return true;
  if (node_->rule != o.node_->rule || node_->env_name != o.node_->env_name) return false;
  if (node_->spec.has_value() != o.node_->spec.has_value()) return false;
  if (node_->spec && !(*node_->spec == *o.node_->spec)) return false;
  return node_->ac == o.node_->ac && node_->children == o.node_->children;
}

const ServiceSpec& composition_spec(const Environment& env, const Composition& comp) {
  if (comp.rule() != Composition::Rule::Env) return comp.spec();
  const auto* svc = env.find_service(comp.env_name());
  if (!svc) throw error("environment defines no service named '" + comp.env_name() + "'");
  return svc->first;
}

// ── Files ───────────────────────────────────────────────────────────────────

namespace {

using detail::Lexer;
using detail::Tok;
using detail::Token;

Composition parse_comp_sexp(Lexer& lx, const Environment& env,
                            const std::filesystem::path& base) {
  lx.expect(Tok::LParen, "'('");
  Token tag = lx.expect(Tok::Ident, "a composition rule");
  if (tag.text == "env") {
    Token name = lx.expect(Tok::Ident, "a service name");
    lx.expect(Tok::RParen, "')'");
    return Composition::env_ref(name.text);
  }
  auto spec_path = lx.expect(Tok::String, "a spec file path");
  ServiceSpec spec = parse_service_spec(read_file((base / spec_path.text).string()), env.sig);
  lx.expect(Tok::LParen, "'('");
  Token ac_kw = lx.expect(Tok::Ident, "'ac'");
  if (ac_kw.text != "ac")
    throw parse_error("expected (ac \"proof\" ...) after the spec path", ac_kw.line, ac_kw.col);
  std::vector<Proof> proofs;
  while (lx.at(Tok::String)) {
    Token p = lx.take();
    proofs.push_back(load_proof((base / p.text).string(), env.sig));
  }
  lx.expect(Tok::RParen, "')'");

  if (tag.text == "ax") {
    lx.expect(Tok::RParen, "')'");
    if (proofs.size() != 1)
      throw parse_error("ax nodes carry exactly one proof", tag.line, tag.col);
    return Composition::ax(std::move(spec), std::move(proofs[0]));
  }
  Composition::Rule rule;
  if (tag.text == "and")
    rule = Composition::Rule::And;
  else if (tag.text == "case")
    rule = Composition::Rule::Case;
  else if (tag.text == "seq")
    rule = Composition::Rule::Seq;
  else
    throw parse_error("unknown composition rule '" + tag.text + "'", tag.line, tag.col);

  std::vector<Composition> children;
  while (lx.at(Tok::LParen)) children.push_back(parse_comp_sexp(lx, env, base));
  lx.expect(Tok::RParen, "')'");
  return Composition::make(rule, std::move(spec), std::move(proofs), std::move(children));
}

}  // namespace

Composition parse_composition(const std::string& text, const Environment& env,
                              const std::string& base_dir) {
  Lexer lx(text);
  Composition c = parse_comp_sexp(lx, env, base_dir);
  if (!lx.at(Tok::End)) lx.fail("trailing input after composition");
  return c;
}

Composition load_composition(const std::string& path, const Environment& env) {
  std::filesystem::path p(path);
  return parse_composition(read_file(path), env, p.parent_path().string());
}

// ── Applicability conditions ────────────────────────────────────────────────

namespace {

Formula at_param(const ServiceSpec& spec, const Concept& c) {
  return Formula::member(Term::variable(spec.param), c);
}

struct NodeObligation {
  std::string label;       // "and(a1)", "seq(c)", ...
  Formula hypothesis;      // the single non-TBox hypothesis x:A
  Formula goal;
};

// The schema obligations of one node, in the order its proofs are stored.
std::vector<NodeObligation> node_obligations(const Environment& env, const Composition& comp) {
  std::vector<NodeObligation> out;
  if (comp.rule() == Composition::Rule::Env) return out;
  const ServiceSpec& spec = comp.spec();
  switch (comp.rule()) {
    case Composition::Rule::Ax:
      out.push_back({"ax(a)", at_param(spec, spec.pre), at_param(spec, spec.post)});
      break;
    case Composition::Rule::And: {
      std::vector<Concept> posts;
      for (std::size_t k = 0; k < comp.children().size(); ++k) {
        const auto& child = composition_spec(env, comp.children()[k]);
        out.push_back({"and(a" + std::to_string(k + 1) + ")", at_param(spec, spec.pre),
                       at_param(spec, child.pre)});
        posts.push_back(child.post);
      }
      out.push_back({"and(b)", at_param(spec, conj_all(posts)), at_param(spec, spec.post)});
      break;
    }
    case Composition::Rule::Case: {
      std::vector<Concept> pres;
      for (const auto& ch : comp.children()) pres.push_back(composition_spec(env, ch).pre);
      out.push_back({"case(a)", at_param(spec, spec.pre), at_param(spec, disj_all(pres))});
      for (std::size_t k = 0; k < comp.children().size(); ++k) {
        const auto& child = composition_spec(env, comp.children()[k]);
        out.push_back({"case(b" + std::to_string(k + 1) + ")", at_param(spec, child.post),
                       at_param(spec, spec.post)});
      }
      break;
    }
    case Composition::Rule::Seq: {
      for (std::size_t k = 0; k < comp.children().size(); ++k) {
        const auto& child = composition_spec(env, comp.children()[k]);
        Concept from = k == 0 ? spec.pre : composition_spec(env, comp.children()[k - 1]).post;
        out.push_back({"seq(b" + std::to_string(k + 1) + ")", at_param(spec, from),
                       at_param(spec, child.pre)});
      }
      const auto& last = composition_spec(env, comp.children().back());
      out.push_back({"seq(c)", at_param(spec, last.post), at_param(spec, spec.post)});
      break;
    }
    case Composition::Rule::Env:
      break;
  }
  return out;
}

void collect_obligations(const Environment& env, const Composition& comp,
                         const std::string& path, std::vector<AcObligation>& out) {
  for (const auto& ob : node_obligations(env, comp)) {
    std::vector<Formula> ctx = env.theory.tbox;
    ctx.push_back(ob.hypothesis);
    out.push_back(AcObligation{path + " " + ob.label, std::move(ctx), ob.goal});
  }
  for (std::size_t i = 0; i < comp.children().size(); ++i)
    collect_obligations(env, comp.children()[i], path + (path == "/" ? "" : "/") +
                        std::to_string(i + 1), out);
}

}  // namespace

std::vector<AcObligation> ac_obligations(const Environment& env, const Composition& comp) {
  std::vector<AcObligation> out;
  collect_obligations(env, comp, "/", out);
  return out;
}

// ── Checking ────────────────────────────────────────────────────────────────

namespace {

using IK = CompositionIssue::Kind;

void check_node(const Environment& env, const Composition& comp, const std::string& path,
                const std::string& parent_param, CompositionReport& report) {
  auto issue = [&](IK kind, const std::string& msg) {
    report.issues.push_back({kind, path, msg});
  };

  if (comp.rule() == Composition::Rule::Env) {
    const auto* svc = env.find_service(comp.env_name());
    if (!svc) {
      issue(IK::spec_mismatch, "environment defines no service named '" + comp.env_name() + "'");
      return;
    }
    if (!parent_param.empty() && svc->first.param != parent_param)
      issue(IK::spec_mismatch, "service '" + comp.env_name() + "' uses parameter '" +
                                   svc->first.param + "' but the composition uses '" +
                                   parent_param + "'");
    return;
  }

  const ServiceSpec& spec = comp.spec();
  if (!parent_param.empty() && spec.param != parent_param)
    issue(IK::spec_mismatch, "node parameter '" + spec.param +
                                 "' differs from the enclosing parameter '" + parent_param + "'");

  const std::size_t n = comp.children().size();
  if (comp.rule() != Composition::Rule::Ax && n < 1) {
    issue(IK::arity, "rule requires at least one child");
    return;
  }
  if (comp.rule() == Composition::Rule::Ax && n != 0) {
    issue(IK::arity, "axiom nodes take no children");
    return;
  }

  auto obligations = node_obligations(env, comp);
  if (comp.ac_proofs().size() != obligations.size()) {
    issue(IK::arity, "rule requires " + std::to_string(obligations.size()) +
                         " applicability proofs, found " +
                         std::to_string(comp.ac_proofs().size()));
    return;
  }

  for (std::size_t i = 0; i < obligations.size(); ++i) {
    const auto& ob = obligations[i];
    try {
      CheckedProof checked = check_proof(comp.ac_proofs()[i], env.sig);
      const Sequent& seq = checked.conclusion();
      if (!(seq.goal == ob.goal)) {
        issue(IK::ac_sequent_shape, ob.label + ": proof concludes " + seq.goal.to_string() +
                                        ", expected " + ob.goal.to_string());
        continue;
      }
      for (const auto& h : seq.context) {
        bool allowed = h == ob.hypothesis ||
                       std::find(env.theory.tbox.begin(), env.theory.tbox.end(), h) !=
                           env.theory.tbox.end();
        if (!allowed)
          issue(IK::ac_sequent_shape, ob.label + ": hypothesis " + h.to_string() +
                                          " is neither a TBox axiom nor " +
                                          ob.hypothesis.to_string());
      }
    } catch (const proof_error& e) {
      issue(IK::embedded_proof_invalid, ob.label + ": " + e.what());
    }
  }

  for (std::size_t i = 0; i < n; ++i)
    check_node(env, comp.children()[i], path + (path == "/" ? "" : "/") + std::to_string(i + 1),
               spec.param, report);
}

}  // namespace

CompositionReport check_composition(const Environment& env, const Composition& comp) {
  validate_environment(env);
  CompositionReport report;
  check_node(env, comp, "/", "", report);
  return report;
}

std::string CompositionReport::to_string() const {
  if (ok()) return "composition valid\n";
  std::string out;
  for (const auto& i : issues) {
    const char* kind = "";
    switch (i.kind) {
      case IK::spec_mismatch: kind = "spec-mismatch"; break;
      case IK::ac_sequent_shape: kind = "ac-sequent-shape"; break;
      case IK::embedded_proof_invalid: kind = "embedded-proof-invalid"; break;
      case IK::arity: kind = "arity"; break;
    }
    out += std::string(kind) + " at " + i.path + ": " + i.message + "\n";
  }
  return out;
}

// ── Compilation ─────────────────────────────────────────────────────────────

namespace {

struct AcOperator {
  CheckedProof proof;
  Formula hypothesis;  // x:A — the one non-TBox position
  std::string param;
  std::string label;

  InfoTerm apply_at(const Environment& env, const std::string& t, const InfoTerm& input) const {
    Substitution sigma(std::map<std::string, std::string>{{param, t}});
    ItTuple tuple;
    for (const auto& h : proof.conclusion().context) {
      if (h == hypothesis)
        tuple.push_back(input);
      else
        tuple.push_back(env.tbox_term(h));
    }
    return proof.apply(sigma, tuple);
  }
};

struct CompiledNode {
  CompiledNode(Composition::Rule rule, std::string path, ServiceSpec spec)
      : rule(rule), path(std::move(path)), spec(std::move(spec)) {}
  Composition::Rule rule;
  std::string path;
  ServiceSpec spec;
  std::string env_service;             // Env
  std::vector<AcOperator> ops;         // in schema order
  std::vector<CompiledNode> children;
};

CompiledNode compile_node(const Environment& env, const Composition& comp,
                          const std::string& path) {
  CompiledNode node(comp.rule(), path, composition_spec(env, comp));
  if (comp.rule() == Composition::Rule::Env) {
    node.env_service = comp.env_name();
    return node;
  }
  auto obligations = node_obligations(env, comp);
  for (std::size_t i = 0; i < obligations.size(); ++i) {
    node.ops.push_back({check_proof(comp.ac_proofs()[i], env.sig), obligations[i].hypothesis,
                        node.spec.param, obligations[i].label});
  }
  for (std::size_t i = 0; i < comp.children().size(); ++i)
    node.children.push_back(compile_node(env, comp.children()[i],
                                         path + (path == "/" ? "" : "/") +
                                             std::to_string(i + 1)));
  return node;
}

InfoTerm run_node(const Environment& env, const CompiledNode& node, const std::string& t,
                  const InfoTerm& input, const TraceSink& sink) {
  auto emit = [&](const std::string& tag, const InfoTerm& in, const InfoTerm& out) {
    if (sink) sink(TraceEvent{node.path, tag, in, out});
  };
  auto run_op = [&](std::size_t i, const InfoTerm& in) {
    InfoTerm out = node.ops[i].apply_at(env, t, in);
    // "/2 case(b1)" -> tag "ac:b1"
    const std::string& label = node.ops[i].label;
    auto open = label.find('(');
    auto close = label.find(')');
    emit("ac:" + label.substr(open + 1, close - open - 1), in, out);
    return out;
  };

  switch (node.rule) {
    case Composition::Rule::Env: {
      const auto* svc = env.find_service(node.env_service);
      InfoTerm out = svc->second(t, input);
      emit("env:" + node.env_service, input, out);
      return out;
    }
    case Composition::Rule::Ax: {
      // The single operator application is the whole computation; one event.
      InfoTerm out = node.ops[0].apply_at(env, t, input);
      emit("ax", input, out);
      return out;
    }
    case Composition::Rule::And: {
      const std::size_t n = node.children.size();
      std::vector<InfoTerm> outs;
      for (std::size_t k = 0; k < n; ++k) {
        InfoTerm routed = run_op(k, input);
        outs.push_back(run_node(env, node.children[k], t, routed, sink));
      }
      InfoTerm out = run_op(n, combine_pairs(outs));
      emit("and", input, out);
      return out;
    }
    case Composition::Rule::Case: {
      const std::size_t n = node.children.size();
      InfoTerm dispatched = run_op(0, input);
      auto [k, payload] = decode_branch(dispatched, n);
      if (k < 1 || static_cast<std::size_t>(k) > n)
        throw error("internal: case dispatch outside the branch range");
      InfoTerm child_out =
          run_node(env, node.children[static_cast<std::size_t>(k - 1)], t, payload, sink);
      InfoTerm out = run_op(static_cast<std::size_t>(k), child_out);
      emit("case", input, out);
      return out;
    }
    case Composition::Rule::Seq: {
      const std::size_t n = node.children.size();
      InfoTerm cur = input;
      for (std::size_t k = 0; k < n; ++k) {
        cur = run_op(k, cur);
        cur = run_node(env, node.children[k], t, cur, sink);
      }
      InfoTerm out = run_op(n, cur);
      emit("seq", input, out);
      return out;
    }
  }
  throw error("unreachable");
}

}  // namespace

Implementation compile(const Environment& env, const Composition& comp, TraceSink sink) {
  auto report = check_composition(env, comp);
  if (!report.ok())
    throw error("composition does not check:\n" + report.to_string());
  auto root = std::make_shared<CompiledNode>(compile_node(env, comp, "/"));
  auto env_copy = std::make_shared<const Environment>(env);
  return [env_copy, root, sink](const std::string& t, const InfoTerm& input) {
    return run_node(*env_copy, *root, t, input, sink);
  };
}

UniformResult verify_uniform(const Model& m, const Signature& sig, const ServiceSpec& spec,
                             const Implementation& impl, std::uint64_t cap) {
  UniformResult result;
  for (const auto& t : sig.individuals()) {
    Formula pre = Formula::member(Term::individual(t), spec.pre);
    Formula post = Formula::member(Term::individual(t), spec.post);
    std::vector<InfoTerm> space;
    try {
      space = enumerate_terms(pre, sig, cap);
    } catch (const overflow_error&) {
      result.overflowed = true;
      return result;
    }
    for (const auto& alpha : space) {
      if (!realizes(m, alpha, pre, sig)) continue;
      InfoTerm out = InfoTerm::truth();
      try {
        out = impl(t, alpha);
      } catch (const std::exception& e) {
        result.counterexample = {t, alpha, std::string("evaluation failed: ") + e.what()};
        return result;
      }
      if (!belongs(out, post, sig)) {
        result.counterexample = {t, alpha,
                                 "output " + out.to_string() + " does not belong to " +
                                     post.to_string()};
        return result;
      }
      if (!realizes(m, out, post, sig)) {
        result.counterexample = {t, alpha,
                                 "output " + out.to_string() + " does not realize " +
                                     post.to_string()};
        return result;
      }
    }
  }
  result.ok = true;
  return result;
}

}  // namespace cdl
