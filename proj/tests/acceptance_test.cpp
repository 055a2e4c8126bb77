// Acceptance suite: end-to-end checks of the shipped fixture universe, run
// as one binary printing a pass/fail line per criterion. Exit status is the
// number of failed criteria.

#include <array>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cdl/composition.hpp"
#include "cdl/parser.hpp"
#include "cdl/prover.hpp"
#include "cdl/runtime.hpp"
#include "oracles.hpp"

using namespace cdl;

namespace {

const std::string kFixtures = CDL_FIXTURE_DIR;
const std::string kCli = CDL_CLI_PATH;

struct Criterion {
  int failures = 0;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      ++failures;
      detail << "    failed: " << what << "\n";
    }
  }
};

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct RunResult {
  int exit_code;
  std::string out;
};

RunResult run_cli(const std::string& args) {
  std::string cmd = kCli + " " + args + " 2>&1";
  std::array<char, 4096> buf{};
  std::string out;
  FILE* p = popen(cmd.c_str(), "r");
  if (!p) return {127, ""};
  while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) out.append(buf.data(), n);
  return {WEXITSTATUS(pclose(p)), out};
}

// ── 1. Golden trace ─────────────────────────────────────────────────────────

void criterion_1(Criterion& c) {
  const std::string env = kFixtures + "/env";
  auto start = Clock::now();
  auto r = run_cli("compile-run " + env + "/produce_and_ship.comp --env " + env +
                   " --input \"req_2 : (tt,(tt,((wit book_1 tt),(wit my_home tt))))\"");
  double elapsed = ms_since(start);

  c.require(r.exit_code == 0, "compile-run exited " + std::to_string(r.exit_code));
  c.require(r.out.find("output: tag 2 (tt, wit ps_off (tt, wit ps_off_price tt))\n") !=
                std::string::npos,
            "final term mismatch; got:\n" + r.out);
  const char* stages[] = {
      "tag 2 (tt, wit p_off (tt, wit p_off_price tt))",
      "tag 2 (tt, wit s_off (tt, wit s_off_price tt))",
      "tag 2 ((tt, wit p_off (tt, wit p_off_price tt)), (tt, wit s_off (tt, wit s_off_price "
      "tt)))",
      "((tt, wit p_off (tt, wit p_off_price tt)), (tt, wit s_off (tt, wit s_off_price tt)))",
  };
  for (const auto* s : stages)
    c.require(r.out.find(s) != std::string::npos, std::string("trace lacks ") + s);
  c.require(elapsed < 1000.0, "took " + std::to_string(elapsed) + " ms (limit 1000)");
  c.detail << "    final term and all four narrated stage terms, " << elapsed << " ms\n";
}

// ── 2. Realizability preservation for extracted operators ──────────────────

void criterion_2(Criterion& c) {
  auto start = Clock::now();
  Signature sig = load_signature(kFixtures + "/test_sig.txt");

  std::vector<std::string> proof_files = {
      "p01_hyp.ndp",    "p02_and_e1.ndp", "p03_and_e2.ndp", "p04_and_i.ndp",
      "p05_or_i1.ndp",  "p06_or_i2.ndp",  "p07_or_e.ndp",   "p08_ex_i.ndp",
      "p09_ex_e.ndp",   "p10_all_i.ndp",  "p11_all_e.ndp",  "p12_bot_i.ndp",
      "p13_bot_e.ndp",  "p14_neg_i.ndp",  "p15_sub_e.ndp",  "p16_all_i_sub.ndp",
      "p17_and_swap.ndp", "p18_case_pair.ndp", "p19_ex_eta.ndp",
  };
  c.require(proof_files.size() >= 15, "corpus has fewer than 15 proofs");

  std::vector<Proof> corpus;
  std::set<Proof::Rule> seen;
  std::function<void(const Proof&)> tally = [&](const Proof& p) {
    seen.insert(p.rule());
    for (const auto& q : p.premises()) tally(q);
  };
  for (const auto& f : proof_files) {
    Proof p = load_proof(kFixtures + "/proofs/" + f, sig);
    tally(p);
    corpus.push_back(std::move(p));
  }
  c.require(seen.size() == 15, "corpus covers " + std::to_string(seen.size()) +
                                   " of the 15 node kinds");

  std::vector<Model> models;
  for (int i = 1; i <= 5; ++i)
    models.push_back(induced_model(
        parse_theory_text(read_file(kFixtures + "/aboxes/abox" + std::to_string(i) + ".txt"),
                          sig),
        sig));

  long checked_pairs = 0;
  long violations = 0;
  for (const auto& proof : corpus) {
    CheckedProof op = check_proof(proof, sig);
    const auto& seq = op.conclusion();
    std::vector<std::string> vars;
    auto collect = [&vars](const Formula& f) {
      for (const auto& v : free_variables(f))
        if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    };
    for (const auto& f : seq.context) collect(f);
    collect(seq.goal);

    // Every closing substitution over the sequent's variables.
    std::vector<std::size_t> idx(vars.size(), 0);
    bool more = true;
    while (more) {
      std::map<std::string, std::string> m;
      for (std::size_t i = 0; i < vars.size(); ++i) m[vars[i]] = sig.individuals()[idx[i]];
      Substitution sigma(m);

      std::vector<Formula> closed_ctx;
      for (const auto& f : seq.context) closed_ctx.push_back(apply_subst(sigma, f));
      Formula closed_goal = apply_subst(sigma, seq.goal);

      for_each_tuple(closed_ctx, sig, 10000, 10000, [&](const ItTuple& gamma) {
        InfoTerm out = op.apply(sigma, gamma);
        for (const auto& mdl : models) {
          if (!tuple_realizes(mdl, gamma, closed_ctx, sig)) continue;
          ++checked_pairs;
          if (!realizes(mdl, out, closed_goal, sig)) ++violations;
        }
        return true;
      });

      more = false;
      for (std::size_t i = idx.size(); i-- > 0;) {
        if (++idx[i] < sig.individuals().size()) {
          more = true;
          break;
        }
        idx[i] = 0;
      }
      if (vars.empty()) more = false;
    }
  }
  double elapsed = ms_since(start);
  c.require(violations == 0, std::to_string(violations) + " violations");
  c.require(checked_pairs > 0, "no realizing inputs were exercised");
  c.require(elapsed < 60000.0, "took " + std::to_string(elapsed) + " ms (limit 60000)");
  c.detail << "    " << corpus.size() << " proofs, all 15 node kinds, " << checked_pairs
           << " realizing (model, input) pairs, 0 violations, " << elapsed << " ms\n";
}

// ── 3. Uniform solvability of compiled compositions ────────────────────────

std::vector<Proof> discharge_all(const Environment& env, const Composition& comp,
                                 Criterion& c) {
  std::vector<Proof> proofs;
  for (const auto& ob : ac_obligations(env, comp)) {
    auto r = prove(env.theory.tbox, {ob.context.back()}, ob.goal, env.sig);
    if (!r.proof) {
      c.require(false, "prover missed " + ob.label);
      continue;
    }
    proofs.push_back(*r.proof);
  }
  return proofs;
}

// Builds the six generated compositions over an environment bundle; AC
// proofs come from the prover.
std::vector<std::pair<std::string, Composition>> generated_compositions(const EnvBundle& b,
                                                                        Criterion& c) {
  const Signature& sig = b.sig;
  auto concept_of = [&](const std::string& text) { return parse_concept(text, sig); };
  const ServiceSpec& dpr = b.env.find_service("DoProduceRequest")->first;
  const ServiceSpec& po = b.env.find_service("ProcessOffers")->first;

  std::vector<std::pair<std::string, Composition>> out;

  auto with_proofs = [&](Composition::Rule rule, const ServiceSpec& spec,
                         std::vector<Composition> children) {
    Composition tmp = Composition::make(rule, spec, {}, children);
    auto proofs = [&] {
      std::vector<Proof> ps;
      for (const auto& ob : ac_obligations(b.env, tmp)) {
        if (ob.label.rfind("/ ", 0) != 0) continue;  // children carry their own
        auto r = prove(b.env.theory.tbox, {ob.context.back()}, ob.goal, sig);
        if (!r.proof) {
          c.require(false, "prover missed " + ob.label + " for " + spec.name);
          return std::vector<Proof>{};
        }
        ps.push_back(*r.proof);
      }
      return ps;
    }();
    return Composition::make(rule, spec, proofs, children);
  };
  auto ax_with_proof = [&](const ServiceSpec& spec) {
    auto r = prove(b.env.theory.tbox,
                   {Formula::member(Term::variable(spec.param), spec.pre)},
                   Formula::member(Term::variable(spec.param), spec.post), sig);
    if (!r.proof) {
      c.require(false, "prover missed the axiom condition for " + spec.name);
      return Composition::ax(spec, Proof::hyp(Formula::bot()));
    }
    return Composition::ax(spec, *r.proof);
  };

  ServiceSpec promote{"Promote", "x", concept_of("AcceptedProduceRequest"),
                      concept_of("AcceptedRequest")};
  out.emplace_back("Promote (ax)", ax_with_proof(promote));

  ServiceSpec idpr{"IdProduce", "x", dpr.pre, dpr.pre};
  out.emplace_back("IdProduce (ax)", ax_with_proof(idpr));

  ServiceSpec chain{"Chain", "x", dpr.pre, concept_of("Request")};
  ServiceSpec settle{"Settle", "x", dpr.post, concept_of("Request")};
  out.emplace_back("Chain (seq env->ax)",
                   with_proofs(Composition::Rule::Seq, chain,
                               {Composition::env_ref("DoProduceRequest"),
                                ax_with_proof(settle)}));

  ServiceSpec refuse_leg{"RefuseLeg", "x", concept_of("RefusedRequest"),
                         concept_of("Request")};
  ServiceSpec accept_leg{"AcceptLeg", "x",
                         concept_of("AcceptedProduceRequest and exists hasOffer.(ProduceOffer "
                                    "and exists hasCost.Price)"),
                         concept_of("Request")};
  out.emplace_back("Settle (case ax|ax)",
                   with_proofs(Composition::Rule::Case, settle,
                               {ax_with_proof(refuse_leg), ax_with_proof(accept_leg)}));

  ServiceSpec pas = parse_service_spec(
      read_file(b.root + "/specs/produce_and_ship.spec"), sig);
  ServiceSpec pick_p{"PickProduct", "x", pas.pre, concept_of("exists hasProduct.Product")};
  ServiceSpec pick_d{"PickPlace", "x", pas.pre, concept_of("exists hasDestination.Location")};
  ServiceSpec fanout{"Fanout", "x", pas.pre,
                     concept_of("exists hasProduct.Product and exists "
                                "hasDestination.Location")};
  out.emplace_back("Fanout (and ax ax)",
                   with_proofs(Composition::Rule::And, fanout,
                               {ax_with_proof(pick_p), ax_with_proof(pick_d)}));

  ServiceSpec wrap{"Wrap", "x", po.pre, po.post};
  out.emplace_back("Wrap (seq of one env)",
                   with_proofs(Composition::Rule::Seq, wrap,
                               {Composition::env_ref("ProcessOffers")}));
  return out;
}

void criterion_3(Criterion& c) {
  auto start = Clock::now();
  const std::uint64_t cap = 1000000;

  int verified = 0;
  for (const auto* dir : {"/env", "/env_refused"}) {
    EnvBundle b = load_environment(kFixtures + dir);
    Composition pas = load_composition(b.root + "/produce_and_ship.comp", b.env);
    c.require(check_composition(b.env, pas).ok(), std::string(dir) + ": composition invalid");
    auto r = verify_uniform(b.model, b.sig, composition_spec(b.env, pas),
                            compile(b.env, pas), cap);
    c.require(r.ok, std::string(dir) + ": compiled main composition is not uniform" +
                        (r.counterexample ? ": " + r.counterexample->reason : ""));
    ++verified;

    for (const auto& [name, comp] : generated_compositions(b, c)) {
      auto report = check_composition(b.env, comp);
      c.require(report.ok(), std::string(dir) + ": " + name + " invalid:\n" +
                                  report.to_string());
      if (!report.ok()) continue;
      auto u = verify_uniform(b.model, b.sig, composition_spec(b.env, comp),
                              compile(b.env, comp), cap);
      c.require(u.ok, std::string(dir) + ": " + name + " not uniform" +
                          (u.counterexample ? ": " + u.counterexample->reason : ""));
      ++verified;
    }
  }

  // A corrupted decision table must be caught: the accept row hands out the
  // shipping offer as if it were a produce offer.
  EnvBundle b = load_environment(kFixtures + "/env");
  DecisionTable corrupt = parse_table_text(
      "service DoProduceRequest\n"
      "row: (tt, wit ?prod tt) | self : AcceptedProduceRequest | "
      "tag 2 (tt, wit s_off (tt, wit s_off_price tt))\n"
      "row: ? | | tag 1 tt\n",
      b.sig);
  const auto& dpr_spec = b.env.find_service("DoProduceRequest")->first;
  auto u = verify_uniform(b.model, b.sig, dpr_spec,
                          impl_from_table(corrupt, dpr_spec, b.store), cap);
  c.require(!u.ok && u.counterexample.has_value(),
            "corrupted table was not caught by verify_uniform");
  if (u.counterexample)
    c.detail << "    corrupted table caught at " << u.counterexample->individual << ": "
             << u.counterexample->reason << "\n";

  double elapsed = ms_since(start);
  c.require(elapsed < 60000.0, "took " + std::to_string(elapsed) + " ms (limit 60000)");
  c.detail << "    " << verified << " composition/model pairs uniformly solvable, " << elapsed
           << " ms\n";
}

// ── 4/5. Term-space oracle equivalence and realizability => validity ───────

std::vector<Concept> depth2_concepts() {
  std::vector<Concept> d0 = {Concept::atom("A"), Concept::atom("B")};
  auto grow = [](const std::vector<Concept>& base) {
    std::vector<Concept> out = base;
    for (const auto& c : base) {
      out.push_back(Concept::negation(c));
      out.push_back(Concept::exists("R", c));
      out.push_back(Concept::forall("R", c));
    }
    for (const auto& c : base)
      for (const auto& d : base) {
        out.push_back(Concept::conj(c, d));
        out.push_back(Concept::disj(c, d));
      }
    return out;
  };
  return grow(grow(d0));
}

void criterion_4(Criterion& c) {
  auto start = Clock::now();
  Signature sig = load_signature(kFixtures + "/test_sig.txt");

  // The four listed cardinalities, frozen through the independent oracle.
  Signature sig2({"a", "b"}, {"R"}, {"A", "B", "C"}, {"x"});
  struct Listed {
    const Signature* sig;
    const char* text;
    std::uint64_t expect;
  } listed[] = {
      {&sig, "a : A", 1},
      {&sig, "a : A or B", 2},
      {&sig, "a : exists R.(A or B)", 6},
      {&sig2, "A sub B or C", 4},
  };
  for (const auto& l : listed) {
    Formula k = parse_formula(l.text, *l.sig);
    c.require(oracles::it_count(k, l.sig->individuals()) == l.expect,
              std::string("oracle disagrees on ") + l.text);
    c.require(enumerate_terms(k, *l.sig, 100000).size() == l.expect,
              std::string("enumerate disagrees on ") + l.text);
  }

  long spaces = 0, discrepancies = 0;
  auto compare = [&](const Formula& k) {
    ++spaces;
    auto got = enumerate_terms(k, sig, 1000000);
    std::set<std::string> got_set;
    for (const auto& t : got) got_set.insert(t.to_string());
    auto expect = oracles::it_strings(k, sig.individuals());
    if (got.size() != expect.size() || got_set != expect) ++discrepancies;
  };
  compare(Formula::bot());
  compare(parse_formula("(a, b) : R", sig));
  for (const auto& cn : depth2_concepts()) {
    compare(Formula::member(Term::individual("a"), cn));
    compare(Formula::subsume("A", cn));
  }
  double elapsed = ms_since(start);
  c.require(discrepancies == 0, std::to_string(discrepancies) + " discrepancies");
  c.detail << "    " << spaces << " term spaces vs oracle, 0 discrepancies, " << elapsed
           << " ms\n";
}

void criterion_5(Criterion& c) {
  auto start = Clock::now();
  Signature sig = load_signature(kFixtures + "/test_sig.txt");
  std::vector<Model> models;
  for (int i = 1; i <= 5; ++i)
    models.push_back(induced_model(
        parse_theory_text(read_file(kFixtures + "/aboxes/abox" + std::to_string(i) + ".txt"),
                          sig),
        sig));

  long realized = 0, violations = 0;
  auto sweep = [&](const Formula& k) {
    auto terms = enumerate_terms(k, sig, 1000000);
    for (const auto& m : models)
      for (const auto& t : terms) {
        if (!realizes(m, t, k, sig)) continue;
        ++realized;
        if (!holds(m, k)) ++violations;
      }
  };
  sweep(Formula::bot());
  sweep(parse_formula("(a, b) : R", sig));
  for (const auto& cn : depth2_concepts()) {
    sweep(Formula::member(Term::individual("a"), cn));
    sweep(Formula::subsume("A", cn));
  }
  double elapsed = ms_since(start);
  c.require(violations == 0, std::to_string(violations) + " violations");
  c.require(realized > 0, "no realizing terms found");
  c.detail << "    " << realized << " realizing (model, term) pairs, 0 violations, "
           << elapsed << " ms\n";
}

// ── 6. Prover discharges the fixture obligations ────────────────────────────

void criterion_6(Criterion& c) {
  auto start = Clock::now();
  EnvBundle b = load_environment(kFixtures + "/env");
  Composition pas = load_composition(b.root + "/produce_and_ship.comp", b.env);
  auto obligations = ac_obligations(b.env, pas);
  c.require(obligations.size() >= 8,
            "expected at least 8 obligations, found " + std::to_string(obligations.size()));

  int discharged = 0;
  for (const auto& ob : obligations) {
    auto r = prove(b.env.theory.tbox, {ob.context.back()}, ob.goal, b.sig);
    if (!r.proof) {
      c.require(false, "prover missed " + ob.label);
      continue;
    }
    CheckedProof checked = check_proof(*r.proof, b.sig);  // emitted proofs re-check
    c.require(checked.conclusion().goal == ob.goal, ob.label + ": wrong conclusion");
    ++discharged;
  }
  double elapsed = ms_since(start);
  c.require(discharged == static_cast<int>(obligations.size()), "not all obligations proved");
  c.require(elapsed < 10000.0, "took " + std::to_string(elapsed) + " ms (limit 10000)");
  c.detail << "    " << discharged << "/" << obligations.size()
           << " applicability conditions discharged and re-checked, " << elapsed << " ms\n";
}

// ── 7. Negative controls ────────────────────────────────────────────────────

void criterion_7(Criterion& c) {
  Signature sig = load_signature(kFixtures + "/test_sig.txt");
  Proof capture = load_proof(kFixtures + "/bad/capture.ndp", sig);
  bool rejected = false;
  try {
    check_proof(capture, sig);
  } catch (const proof_error& e) {
    rejected = e.kind == proof_error::Kind::eigenvariable_capture;
  }
  c.require(rejected, "capture fixture was not rejected with the eigenvariable kind");

  // A CASE tree whose (a) proof concludes the wrong disjunction.
  EnvBundle b = load_environment(kFixtures + "/env");
  ServiceSpec settle{"Settle", "x",
                     b.env.find_service("DoProduceRequest")->first.post,
                     parse_concept("Request", b.sig)};
  ServiceSpec refuse_leg{"RefuseLeg", "x", parse_concept("RefusedRequest", b.sig),
                         parse_concept("Request", b.sig)};
  ServiceSpec accept_leg{
      "AcceptLeg", "x",
      parse_concept("AcceptedProduceRequest and exists hasOffer.(ProduceOffer and exists "
                    "hasCost.Price)",
                    b.sig),
      parse_concept("Request", b.sig)};
  auto leg_proof = [&](const ServiceSpec& s) {
    auto r = prove(b.env.theory.tbox, {Formula::member(Term::variable("x"), s.pre)},
                   Formula::member(Term::variable("x"), s.post), b.sig);
    return Composition::ax(s, *r.proof);
  };
  // The (a) proof concludes x : RefusedRequest or RefusedRequest instead of
  // the children's disjunction.
  Proof wrong_a = Proof::or_i(1, parse_concept("RefusedRequest or RefusedRequest", b.sig),
                              Proof::hyp(parse_formula("x : RefusedRequest", b.sig)));
  auto b1 = prove(b.env.theory.tbox, {parse_formula("x : Request", b.sig)},
                  parse_formula("x : Request", b.sig), b.sig);
  std::vector<Proof> ac = {wrong_a, *b1.proof, *b1.proof};
  Composition badcase = Composition::make(Composition::Rule::Case, settle, ac,
                                          {leg_proof(refuse_leg), leg_proof(accept_leg)});
  auto report = check_composition(b.env, badcase);
  bool found = false;
  for (const auto& i : report.issues)
    if (i.kind == CompositionIssue::Kind::ac_sequent_shape &&
        i.message.find("case(a)") != std::string::npos)
      found = true;
  c.require(!report.ok() && found,
            "wrong-disjunction case tree was not rejected with ac-sequent-shape");
  c.detail << "    both negative controls rejected with the specified error kinds\n";
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    void (*fn)(Criterion&);
  };
  Entry entries[] = {
      {"1 golden trace", criterion_1},
      {"2 operator extraction preserves realizability", criterion_2},
      {"3 compiled compositions uniformly solve their specs", criterion_3},
      {"4 term-space enumeration matches the oracle", criterion_4},
      {"5 realizability implies validity", criterion_5},
      {"6 prover discharges the fixture obligations", criterion_6},
      {"7 negative controls", criterion_7},
  };

  int failed = 0;
  for (const auto& e : entries) {
    Criterion c;
    try {
      e.fn(c);
    } catch (const std::exception& ex) {
      c.require(false, std::string("exception: ") + ex.what());
    }
    bool ok = c.failures == 0;
    std::cout << (ok ? "PASS" : "FAIL") << " criterion " << e.name << "\n" << c.detail.str();
    if (!ok) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed")
            << "\n";
  return failed;
}
