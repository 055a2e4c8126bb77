#include <random>

#include "cdl/ndproof.hpp"
#include "cdl/parser.hpp"
#include "doctest.h"

using namespace cdl;

namespace {

Signature abc_sig() {
  return Signature({"a", "b", "c"}, {"R", "S"}, {"A", "B", "D"}, {"x", "y", "p", "q"});
}

Formula F(const std::string& s) { return parse_formula(s, abc_sig()); }
Proof P(const std::string& s) { return parse_proof(s, abc_sig()); }

Substitution subst(std::map<std::string, std::string> m) {
  return Substitution(std::move(m));
}

}  // namespace

TEST_CASE("one-step projection") {
  auto sig = abc_sig();
  auto pi = check_proof(P(R"x((andE1 (hyp "x : A and B")))x"), sig);
  CHECK(pi.conclusion() == Sequent{{F("x : A and B")}, F("x : A")});
}

TEST_CASE("hypothesis must be in its context") {
  auto sig = abc_sig();
  Proof bad = Proof::hyp({F("x : A")}, F("x : B"));
  CHECK_THROWS_AS(check_proof(bad, sig), proof_error);
  try {
    check_proof(bad, sig);
  } catch (const proof_error& e) {
    CHECK(e.kind == proof_error::Kind::hypothesis_not_in_context);
  }
}

TEST_CASE("eigenvariable capture is rejected") {
  auto sig = abc_sig();
  // The premise context mentions p outside the discharged role edge.
  Proof bad = P(R"x((forallI p
    (andI (forallE "(x, p) : R" (hyp "x : forall R.A")) (hyp "p : B"))))x");
  try {
    check_proof(bad, sig);
    FAIL("expected a proof_error");
  } catch (const proof_error& e) {
    CHECK(e.kind == proof_error::Kind::eigenvariable_capture);
  }
}

TEST_CASE("valid quantifier proofs") {
  auto sig = abc_sig();

  auto all_i = check_proof(
      P(R"x((forallI p (andE1 (forallE "(x, p) : R" (hyp "x : forall R.(A and B)")))))x"), sig);
  CHECK(all_i.conclusion() ==
        Sequent{{F("x : forall R.(A and B)")}, F("x : forall R.A")});

  auto ex_e = check_proof(P(R"x((existsE p
    (hyp "x : exists R.(A and B)")
    (existsI "(x, p) : R" (andE1 (hyp "p : A and B")))))x"), sig);
  CHECK(ex_e.conclusion() ==
        Sequent{{F("x : exists R.(A and B)")}, F("x : exists R.A")});
}

TEST_CASE("rule mismatches carry the offending schema") {
  auto sig = abc_sig();
  CHECK_THROWS_AS(check_proof(P(R"x((andE1 (hyp "x : A or B")))x"), sig), proof_error);
  CHECK_THROWS_AS(check_proof(P(R"x((botE "x : A" (hyp "x : B")))x"), sig), proof_error);
  CHECK_THROWS_AS(check_proof(P(R"x((orI1 "A or B" (hyp "x : B")))x"), sig), proof_error);
  // existsI whose witness does not match the premise subject.
  CHECK_THROWS_AS(check_proof(P(R"x((existsI "(x, b) : R" (hyp "a : A")))x"), sig), proof_error);
}

TEST_CASE("extraction: projection and injection") {
  auto sig = abc_sig();

  auto proj = check_proof(P(R"x((andE1 (hyp "x : A and B")))x"), sig);
  InfoTerm in = parse_infoterm("(tt, tt)", sig);
  CHECK(apply_operator(extract(proj), subst({{"x", "a"}}), {in}) == InfoTerm::truth());

  auto inj = check_proof(P(R"x((orI2 "A or B" (hyp "x : B")))x"), sig);
  CHECK(inj.apply(subst({{"x", "a"}}), {InfoTerm::truth()}) ==
        InfoTerm::tag(2, InfoTerm::truth()));
}

TEST_CASE("extraction: identity and falsum elimination") {
  auto sig = abc_sig();

  auto id = check_proof(P(R"x((hyp "x : A or B"))x"), sig);
  InfoTerm v = InfoTerm::tag(2, InfoTerm::truth());
  CHECK(id.apply(subst({{"x", "c"}}), {v}) == v);

  auto boom = check_proof(P(R"x((botE "y : A or B" (hyp "bot")))x"), sig);
  CHECK(boom.apply(subst({{"y", "b"}}), {InfoTerm::truth()}) ==
        InfoTerm::tag(1, InfoTerm::truth()));  // canonical pick
}

TEST_CASE("extraction: ill-formed inputs are rejected with the position") {
  auto sig = abc_sig();
  auto id = check_proof(P(R"x((hyp "x : A or B"))x"), sig);
  try {
    id.apply(subst({{"x", "a"}}), {InfoTerm::truth()});
    FAIL("expected proof_error");
  } catch (const proof_error& e) {
    CHECK(e.kind == proof_error::Kind::ill_formed_input);
    CHECK(std::string(e.what()).find("position 0") != std::string::npos);
  }
}

TEST_CASE("extraction: subsumption lookup reads the conclusion context") {
  auto sig = abc_sig();
  auto pi = check_proof(P(R"x((subE "A sub B or D" (hyp "x : A")))x"), sig);
  CHECK(pi.conclusion() ==
        Sequent{{F("x : A"), F("A sub B or D")}, F("x : B or D")});

  std::map<std::string, InfoTerm> table = {{"a", InfoTerm::tag(1, InfoTerm::truth())},
                                           {"b", InfoTerm::tag(2, InfoTerm::truth())},
                                           {"c", InfoTerm::tag(1, InfoTerm::truth())}};
  InfoTerm out = pi.apply(subst({{"x", "b"}}), {InfoTerm::truth(), InfoTerm::fun(table)});
  CHECK(out == InfoTerm::tag(2, InfoTerm::truth()));
}

TEST_CASE("extraction: case analysis dispatches on the tag") {
  auto sig = abc_sig();
  // Commuting a disjunction.
  auto pi = check_proof(P(R"x((orE (hyp "x : A or B")
    (orI2 "B or A" (hyp "x : A"))
    (orI1 "B or A" (hyp "x : B"))))x"), sig);
  CHECK(pi.conclusion() == Sequent{{F("x : A or B")}, F("x : B or A")});
  CHECK(pi.apply(subst({{"x", "a"}}), {InfoTerm::tag(1, InfoTerm::truth())}) ==
        InfoTerm::tag(2, InfoTerm::truth()));
  CHECK(pi.apply(subst({{"x", "a"}}), {InfoTerm::tag(2, InfoTerm::truth())}) ==
        InfoTerm::tag(1, InfoTerm::truth()));
}

TEST_CASE("extraction: table construction for a value restriction") {
  auto sig = abc_sig();
  auto pi = check_proof(
      P(R"x((forallI p (andE1 (forallE "(x, p) : R" (hyp "x : forall R.(A and B)")))))x"), sig);
  // Input table maps every individual to (tt, tt); output projects it.
  std::map<std::string, InfoTerm> in;
  for (const auto& d : sig.individuals())
    in.emplace(d, InfoTerm::pair(InfoTerm::truth(), InfoTerm::truth()));
  InfoTerm out = pi.apply(subst({{"x", "a"}}), {InfoTerm::fun(in)});
  REQUIRE(out.kind() == InfoTerm::Kind::Fun);
  for (const auto& d : sig.individuals())
    CHECK(out.table().at(d) == InfoTerm::truth());
}

TEST_CASE("proof files round-trip") {
  auto sig = abc_sig();
  auto corpus = {
      R"x((hyp "x : A"))x",
      R"x((andI (hyp "x : A") (hyp "x : B")))x",
      R"x((existsE p (hyp "x : exists R.A") (existsI "(x, p) : R" (hyp "p : A"))))x",
      R"x((notI "x : A" (botI (hyp "x : A") (hyp "x : not A"))))x",
      R"x((subE "A sub B or D" (hyp "x : A")))x",
  };
  for (const auto* s : corpus) {
    Proof p = P(s);
    CHECK(parse_proof(p.to_string(), sig) == p);
  }
}

TEST_CASE("realizability preservation on a mixed corpus") {
  auto sig = abc_sig();
  std::vector<Proof> corpus = {
      P(R"x((hyp "x : A or B"))x"),
      P(R"x((andI (andE2 (hyp "x : A and B")) (andE1 (hyp "x : A and B"))))x"),
      P(R"x((orE (hyp "x : A or B") (orI2 "B or A" (hyp "x : A"))
            (orI1 "B or A" (hyp "x : B"))))x"),
      P(R"x((existsE p (hyp "x : exists R.(A and B)")
            (existsI "(x, p) : R" (andE1 (hyp "p : A and B")))))x"),
      P(R"x((forallI p (subE "A sub B" (forallE "(x, p) : R" (hyp "x : forall R.A")))))x"),
      P(R"x((subE "A sub B or D" (hyp "x : A")))x"),
      P(R"x((botE "y : D" (botI (hyp "x : A") (hyp "x : not A"))))x"),
      P(R"x((existsI "(y, x) : S" (hyp "x : A")))x"),
  };

  // Five induced models over |N| = 3.
  std::vector<Model> models;
  auto aboxes = {
      "",
      "a : A\nb : A\nb : B\n(a, b) : R\n",
      "a : A\na : B\na : D\n(a, a) : R\n(a, b) : S\nb : A\n",
      "a : A\nb : A\nc : A\na : B\nb : B\nc : B\n(a, b) : R\n(b, c) : R\n(c, a) : R\n(a, a) : S\n",
      "b : B\nc : D\nb : A\n(a, b) : R\n(a, c) : R\n(b, b) : S\nc : A\n",
  };
  for (const auto* text : aboxes)
    models.push_back(induced_model(parse_theory_text(text, sig), sig));

  for (const auto& proof : corpus) {
    auto checked = check_proof(proof, sig);
    const auto& seq = checked.conclusion();
    // All closing substitutions over the variables of the sequent.
    std::vector<std::string> vars;
    {
      auto collect = [&vars](const Formula& f) {
        for (const auto& v : free_variables(f))
          if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
      };
      for (const auto& f : seq.context) collect(f);
      collect(seq.goal);
    }
    std::vector<Substitution> sigmas;
    std::vector<std::size_t> idx(vars.size(), 0);
    for (;;) {
      std::map<std::string, std::string> m;
      for (std::size_t i = 0; i < vars.size(); ++i)
        m[vars[i]] = sig.individuals()[idx[i]];
      sigmas.push_back(Substitution(m));
      std::size_t i = vars.size();
      for (;;) {
        if (i == 0) goto done;
        --i;
        if (++idx[i] < sig.individuals().size()) break;
        idx[i] = 0;
        if (i == 0) goto done;
      }
    }
  done:
    for (const auto& sigma : sigmas) {
      std::vector<Formula> closed_ctx;
      for (const auto& f : seq.context) closed_ctx.push_back(apply_subst(sigma, f));
      Formula closed_goal = apply_subst(sigma, seq.goal);
      for_each_tuple(closed_ctx, sig, 10000, 10000, [&](const ItTuple& gamma) {
        InfoTerm out = checked.apply(sigma, gamma);
        CHECK(belongs(out, closed_goal, sig));
        for (const auto& m : models) {
          if (!tuple_realizes(m, gamma, closed_ctx, sig)) continue;
          CHECK(realizes(m, out, closed_goal, sig));
        }
        return true;
      });
    }
  }
}

namespace {

// Independent schema matcher: recomputes the concluded sequent of a proof by
// direct transcription of the rule schemas, sharing no code with the
// checker. Throws on any schema violation.
std::vector<Formula> oracle_union(const std::vector<Formula>& a,
                                  const std::vector<Formula>& b) {
  std::vector<Formula> out = a;
  for (const auto& f : b)
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  return out;
}

std::vector<Formula> oracle_drop(std::vector<Formula> ctx, const Formula& f) {
  ctx.erase(std::remove(ctx.begin(), ctx.end(), f), ctx.end());
  return ctx;
}

bool oracle_mentions(const Formula& f, const std::string& v) {
  auto vs = free_variables(f);
  return std::find(vs.begin(), vs.end(), v) != vs.end();
}

Sequent oracle_conclusion(const Proof& p, const Signature& sig) {
  using R = Proof::Rule;
  auto member = [](const Term& t, const Concept& c) { return Formula::member(t, c); };
  auto expect = [](bool ok, const char* what) {
    if (!ok) throw std::runtime_error(std::string("schema violation: ") + what);
  };
  switch (p.rule()) {
    case R::Hyp: {
      expect(std::find(p.hyp_context().begin(), p.hyp_context().end(), p.data_formula()) !=
                 p.hyp_context().end(),
             "hyp");
      return {p.hyp_context(), p.data_formula()};
    }
    case R::BotI: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      Sequent b = oracle_conclusion(p.premises()[1], sig);
      expect(a.goal.kind() == Formula::Kind::Member &&
                 b.goal.kind() == Formula::Kind::Member &&
                 b.goal.concept_expr().kind() == Concept::Kind::Not &&
                 a.goal.subject() == b.goal.subject() &&
                 b.goal.concept_expr().child() == a.goal.concept_expr(),
             "botI");
      return {oracle_union(a.context, b.context), Formula::bot()};
    }
    case R::BotE: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      expect(a.goal.kind() == Formula::Kind::Bot, "botE");
      return {a.context, p.data_formula()};
    }
    case R::SubE: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      const Formula& ax = p.data_formula();
      expect(ax.kind() == Formula::Kind::Subsume &&
                 a.goal.kind() == Formula::Kind::Member &&
                 a.goal.concept_expr() == Concept::atom(ax.antecedent()),
             "subE");
      return {oracle_union(a.context, {ax}), member(a.goal.subject(), ax.concept_expr())};
    }
    case R::NegI: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      const Formula& d = p.data_formula();
      expect(a.goal.kind() == Formula::Kind::Bot && d.kind() == Formula::Kind::Member,
             "notI");
      return {oracle_drop(a.context, d),
              member(d.subject(), Concept::negation(d.concept_expr()))};
    }
    case R::AndI: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      Sequent b = oracle_conclusion(p.premises()[1], sig);
      expect(a.goal.kind() == Formula::Kind::Member &&
                 b.goal.kind() == Formula::Kind::Member &&
                 a.goal.subject() == b.goal.subject(),
             "andI");
      return {oracle_union(a.context, b.context),
              member(a.goal.subject(),
                     Concept::conj(a.goal.concept_expr(), b.goal.concept_expr()))};
    }
    case R::AndE1:
    case R::AndE2: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      expect(a.goal.kind() == Formula::Kind::Member &&
                 a.goal.concept_expr().kind() == Concept::Kind::And,
             "andE");
      return {a.context, member(a.goal.subject(), p.rule() == R::AndE1
                                                      ? a.goal.concept_expr().left()
                                                      : a.goal.concept_expr().right())};
    }
    case R::OrI1:
    case R::OrI2: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      const Concept& d = p.data_concept();
      expect(d.kind() == Concept::Kind::Or && a.goal.kind() == Formula::Kind::Member &&
                 a.goal.concept_expr() == (p.rule() == R::OrI1 ? d.left() : d.right()),
             "orI");
      return {a.context, member(a.goal.subject(), d)};
    }
    case R::OrE: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      Sequent l = oracle_conclusion(p.premises()[1], sig);
      Sequent r = oracle_conclusion(p.premises()[2], sig);
      expect(a.goal.kind() == Formula::Kind::Member &&
                 a.goal.concept_expr().kind() == Concept::Kind::Or && l.goal == r.goal,
             "orE");
      Formula h1 = member(a.goal.subject(), a.goal.concept_expr().left());
      Formula h2 = member(a.goal.subject(), a.goal.concept_expr().right());
      return {oracle_union(oracle_union(a.context, oracle_drop(l.context, h1)),
                           oracle_drop(r.context, h2)),
              l.goal};
    }
    case R::ExI: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      const Formula& edge = p.data_formula();
      expect(edge.kind() == Formula::Kind::Role && a.goal.kind() == Formula::Kind::Member &&
                 edge.object() == a.goal.subject(),
             "existsI");
      return {oracle_union(a.context, {edge}),
              member(edge.subject(),
                     Concept::exists(edge.role_name(), a.goal.concept_expr()))};
    }
    case R::ExE: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      Sequent body = oracle_conclusion(p.premises()[1], sig);
      const std::string& ev = p.eigenvariable();
      expect(a.goal.kind() == Formula::Kind::Member &&
                 a.goal.concept_expr().kind() == Concept::Kind::Exists,
             "existsE major");
      expect(!(a.goal.subject() == Term::variable(ev)), "existsE subject");
      Formula edge = Formula::role(a.goal.subject(), Term::variable(ev),
                                   a.goal.concept_expr().role());
      Formula mem = member(Term::variable(ev), a.goal.concept_expr().child());
      auto residual = oracle_drop(oracle_drop(body.context, edge), mem);
      for (const auto& g : residual) expect(!oracle_mentions(g, ev), "existsE freshness");
      expect(!oracle_mentions(body.goal, ev), "existsE goal freshness");
      return {oracle_union(a.context, residual), body.goal};
    }
    case R::AllI: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      const std::string& ev = p.eigenvariable();
      expect(a.goal.kind() == Formula::Kind::Member &&
                 a.goal.subject() == Term::variable(ev),
             "forallI goal");
      std::vector<Formula> touching;
      for (const auto& g : a.context)
        if (oracle_mentions(g, ev)) touching.push_back(g);
      expect(touching.size() == 1 && touching[0].kind() == Formula::Kind::Role &&
                 touching[0].object() == Term::variable(ev) &&
                 !(touching[0].subject() == touching[0].object()),
             "forallI freshness");
      return {oracle_drop(a.context, touching[0]),
              member(touching[0].subject(),
                     Concept::forall(touching[0].role_name(), a.goal.concept_expr()))};
    }
    case R::AllE: {
      Sequent a = oracle_conclusion(p.premises()[0], sig);
      const Formula& edge = p.data_formula();
      expect(a.goal.kind() == Formula::Kind::Member &&
                 a.goal.concept_expr().kind() == Concept::Kind::Forall &&
                 edge.kind() == Formula::Kind::Role &&
                 edge.subject() == a.goal.subject() &&
                 edge.role_name() == a.goal.concept_expr().role(),
             "forallE");
      return {oracle_union(a.context, {edge}),
              member(edge.object(), a.goal.concept_expr().child())};
    }
  }
  throw std::runtime_error("unknown rule");
}

}  // namespace

TEST_CASE("accepted proofs re-verify under the independent schema matcher") {
  auto sig = abc_sig();
  const std::string base = std::string(CDL_FIXTURE_DIR) + "/proofs/";
  auto files = {"p01_hyp.ndp",    "p02_and_e1.ndp", "p03_and_e2.ndp", "p04_and_i.ndp",
                "p05_or_i1.ndp",  "p06_or_i2.ndp",  "p07_or_e.ndp",   "p08_ex_i.ndp",
                "p09_ex_e.ndp",   "p10_all_i.ndp",  "p11_all_e.ndp",  "p12_bot_i.ndp",
                "p13_bot_e.ndp",  "p14_neg_i.ndp",  "p15_sub_e.ndp",  "p16_all_i_sub.ndp",
                "p17_and_swap.ndp", "p18_case_pair.ndp", "p19_ex_eta.ndp"};
  Signature fsig = load_signature(std::string(CDL_FIXTURE_DIR) + "/test_sig.txt");
  for (const auto* f : files) {
    Proof p = load_proof(base + f, fsig);
    CHECK(oracle_conclusion(p, fsig) == check_proof(p, fsig).conclusion());
  }
}

TEST_CASE("the worked example's routing operators extract the narrated terms") {
  const std::string env = std::string(CDL_FIXTURE_DIR) + "/env";
  Signature sig = load_signature(env + "/sig.txt");

  Proof pi1 = load_proof(env + "/proofs/dr_a1.ndp", sig);
  CheckedProof op1 = check_proof(pi1, sig);
  CHECK(op1.conclusion().goal ==
        parse_formula("x : ProduceRequest and exists hasProduct.Product", sig));
  CHECK(oracle_conclusion(pi1, sig) == op1.conclusion());

  Substitution sigma(std::map<std::string, std::string>{{"x", "req_2"}});
  InfoTerm alpha1 =
      parse_infoterm("(tt, (tt, (wit book_1 tt, wit my_home tt)))", sig);
  CHECK(op1.apply(sigma, {alpha1}) == parse_infoterm("(tt, wit book_1 tt)", sig));

  Proof pi2 = load_proof(env + "/proofs/dr_b.ndp", sig);
  CheckedProof op2 = check_proof(pi2, sig);
  CHECK(oracle_conclusion(pi2, sig) == op2.conclusion());
  InfoTerm alpha2 = parse_infoterm("tag 2 (tt, wit p_off (tt, wit p_off_price tt))", sig);
  InfoTerm alpha3 = parse_infoterm("tag 2 (tt, wit s_off (tt, wit s_off_price tt))", sig);
  InfoTerm alpha4 = op2.apply(sigma, {InfoTerm::pair(alpha2, alpha3)});
  CHECK(alpha4.to_string() ==
        "tag 2 ((tt, wit p_off (tt, wit p_off_price tt)), "
        "(tt, wit s_off (tt, wit s_off_price tt)))");
}

#include <thread>

TEST_CASE("operators are safely shared across threads") {
  auto sig = abc_sig();
  auto op = check_proof(P(R"x((orE (hyp "x : A or B")
    (orI2 "B or A" (hyp "x : A"))
    (orI1 "B or A" (hyp "x : B"))))x"), sig);
  Substitution sigma(std::map<std::string, std::string>{{"x", "a"}});

  std::vector<std::thread> workers;
  std::vector<int> bad(8, 0);
  for (int w = 0; w < 8; ++w) {
    workers.emplace_back([&, w] {
      for (int i = 0; i < 500; ++i) {
        InfoTerm in = InfoTerm::tag(1 + (i + w) % 2, InfoTerm::truth());
        InfoTerm out = op.apply(sigma, {in});
        if (out != InfoTerm::tag(in.index() == 1 ? 2 : 1, InfoTerm::truth())) ++bad[w];
      }
    });
  }
  for (auto& t : workers) t.join();
  for (int w = 0; w < 8; ++w) CHECK(bad[w] == 0);
}

TEST_CASE("duplicate hypothesis contexts are rejected") {
  auto sig = abc_sig();
  Proof dup = Proof::hyp({F("x : A"), F("x : A")}, F("x : A"));
  CHECK_THROWS_AS(check_proof(dup, sig), proof_error);
}
