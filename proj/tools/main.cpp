// Command-line front door.
//
// Exit codes: 0 success; 1 definitive negative (invalid proof or
// composition, counterexample, precondition violation); 2 unknown or
// overflow; 3 usage and parse errors.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cdl/composition.hpp"
#include "cdl/parser.hpp"
#include "cdl/prover.hpp"
#include "cdl/runtime.hpp"
#include "json.hpp"

using json = nlohmann::ordered_json;
using namespace cdl;

namespace {

constexpr int kOk = 0;
constexpr int kNegative = 1;
constexpr int kUnknown = 2;
constexpr int kUsage = 3;

std::pair<std::string, InfoTerm> parse_input_term(const std::string& text,
                                                  const Signature& sig) {
  auto colon = text.find(':');
  if (colon == std::string::npos)
    throw error("input must have the form \"individual : term\"");
  std::string ind = text.substr(0, colon);
  ind.erase(0, ind.find_first_not_of(" \t"));
  ind.erase(ind.find_last_not_of(" \t") + 1);
  if (!sig.is_individual(ind)) throw error("unknown individual '" + ind + "'");
  return {ind, parse_infoterm(text.substr(colon + 1), sig)};
}

struct CheckProofArgs {
  std::string proof_path, sig_path;
  bool as_json = false;
};

int run_check_proof(const CheckProofArgs& a) {
  Signature sig = load_signature(a.sig_path);
  Proof proof = load_proof(a.proof_path, sig);
  try {
    CheckedProof checked = check_proof(proof, sig);
    if (a.as_json)
      std::cout << json{{"ok", true}, {"sequent", checked.conclusion().to_string()}}.dump()
                << "\n";
    else
      std::cout << "checked: " << checked.conclusion().to_string() << "\n";
    return kOk;
  } catch (const proof_error& e) {
    if (a.as_json)
      std::cout << json{{"ok", false}, {"error", e.what()}}.dump() << "\n";
    else
      std::cout << "invalid: " << e.what() << "\n";
    return kNegative;
  }
}

struct ProveArgs {
  std::string sig_path, theory_path, goal, out_path;
  std::vector<std::string> hyps;
  int depth = 12;
  long nodes = 50000;
  bool as_json = false;
};

int run_prove(const ProveArgs& a) {
  Signature sig = load_signature(a.sig_path);
  std::vector<Formula> tbox;
  if (!a.theory_path.empty()) tbox = load_theory(a.theory_path, sig).tbox;
  std::vector<Formula> hyps;
  for (const auto& h : a.hyps) hyps.push_back(parse_formula(h, sig));
  Formula goal = parse_formula(a.goal, sig);

  auto r = prove(tbox, hyps, goal, sig, SearchBudget{a.depth, a.nodes});
  if (!r.proof) {
    if (a.as_json)
      std::cout << json{{"ok", false},
                        {"nodes", r.stats.nodes},
                        {"budget_exhausted", r.stats.budget_exhausted}}.dump()
                << "\n";
    else
      std::cout << "unknown: no proof within budget (" << r.stats.nodes << " nodes"
                << (r.stats.budget_exhausted ? ", budget exhausted" : "") << ")\n";
    return kUnknown;
  }
  std::string text = r.proof->to_string() + "\n";
  if (!a.out_path.empty()) {
    std::ofstream out(a.out_path, std::ios::binary);
    if (!out) throw error("cannot write file: " + a.out_path);
    out << text;
  }
  if (a.as_json)
    std::cout << json{{"ok", true},
                      {"proof", r.proof->to_string()},
                      {"sequent", check_proof(*r.proof, sig).conclusion().to_string()},
                      {"nodes", r.stats.nodes}}.dump()
              << "\n";
  else
    std::cout << text;
  return kOk;
}

struct CompArgs {
  std::string comp_path, env_dir, input;
  bool as_json = false;
};

int run_check_comp(const CompArgs& a) {
  EnvBundle bundle = load_environment(a.env_dir);
  Composition comp = load_composition(a.comp_path, bundle.env);
  CompositionReport report = check_composition(bundle.env, comp);
  if (a.as_json) {
    json issues = json::array();
    for (const auto& i : report.issues)
      issues.push_back({{"path", i.path}, {"message", i.message}});
    std::cout << json{{"ok", report.ok()}, {"issues", issues}}.dump() << "\n";
  } else {
    std::cout << report.to_string();
  }
  return report.ok() ? kOk : kNegative;
}

int run_compile_run(const CompArgs& a) {
  EnvBundle bundle = load_environment(a.env_dir);
  Composition comp = load_composition(a.comp_path, bundle.env);
  auto [ind, term] = parse_input_term(a.input, bundle.sig);
  try {
    auto [out, trace] = execute(bundle.env, comp, ind, term);
    if (a.as_json) {
      json events = json::array();
      for (const auto& e : trace)
        events.push_back({{"path", e.path},
                          {"tag", e.tag},
                          {"input", e.input.to_string()},
                          {"output", e.output.to_string()}});
      std::cout << json{{"output", out.to_string()}, {"trace", events}}.dump() << "\n";
    } else {
      std::cout << trace_to_string(trace) << "output: " << out.to_string() << "\n";
    }
    return kOk;
  } catch (const error& e) {
    std::string what = e.what();
    if (what.find("precondition") != std::string::npos) {
      if (a.as_json)
        std::cout << json{{"error", what}}.dump() << "\n";
      else
        std::cout << what << "\n";
      return kNegative;
    }
    throw;
  }
}

struct EnumArgs {
  std::string formula, sig_path;
  std::uint64_t cap = 1000000;
  bool as_json = false;
};

int run_enum_it(const EnumArgs& a) {
  Signature sig = load_signature(a.sig_path);
  Formula k = parse_formula(a.formula, sig);
  try {
    auto terms = enumerate_terms(k, sig, a.cap);
    if (a.as_json) {
      json arr = json::array();
      for (const auto& t : terms) arr.push_back(t.to_string());
      std::cout << json{{"formula", k.to_string()}, {"count", terms.size()}, {"terms", arr}}
                       .dump()
                << "\n";
    } else {
      for (const auto& t : terms) std::cout << t.to_string() << "\n";
    }
    return kOk;
  } catch (const overflow_error& e) {
    if (a.as_json)
      std::cout << json{{"error", "overflow"}, {"cap", e.cap}, {"estimate", e.estimate}}.dump()
                << "\n";
    else
      std::cout << e.what() << "\n";
    return kUnknown;
  }
}

struct VerifyArgs {
  std::string env_dir, service, comp_path;
  std::uint64_t cap = 1000000;
  bool as_json = false;
};

int run_verify_uniform(const VerifyArgs& a) {
  EnvBundle bundle = load_environment(a.env_dir);
  std::optional<ServiceSpec> spec;
  Implementation impl;
  if (!a.service.empty()) {
    const auto* svc = bundle.env.find_service(a.service);
    if (!svc) throw error("environment defines no service named '" + a.service + "'");
    spec = svc->first;
    impl = svc->second;
  } else if (!a.comp_path.empty()) {
    Composition comp = load_composition(a.comp_path, bundle.env);
    spec = composition_spec(bundle.env, comp);
    impl = compile(bundle.env, comp);
  } else {
    throw error("verify-uniform needs --service or --comp");
  }

  UniformResult r = verify_uniform(bundle.model, bundle.sig, *spec, impl, a.cap);
  if (r.overflowed) {
    if (a.as_json)
      std::cout << json{{"ok", false}, {"error", "overflow"}}.dump() << "\n";
    else
      std::cout << "overflow: the pre-condition space exceeds the cap\n";
    return kUnknown;
  }
  if (!r.ok) {
    if (a.as_json)
      std::cout << json{{"ok", false},
                        {"individual", r.counterexample->individual},
                        {"input", r.counterexample->input.to_string()},
                        {"reason", r.counterexample->reason}}.dump()
                << "\n";
    else
      std::cout << "counterexample at " << r.counterexample->individual << " with "
                << r.counterexample->input.to_string() << ": " << r.counterexample->reason
                << "\n";
    return kNegative;
  }
  if (a.as_json)
    std::cout << json{{"ok", true}, {"service", spec->name}}.dump() << "\n";
  else
    std::cout << "uniform: " << spec->to_string() << "\n";
  return kOk;
}

struct ModelArgs {
  std::string env_dir, store_path, sig_path;
  bool as_json = false;
};

int run_show_model(const ModelArgs& a) {
  std::optional<Model> model;
  if (!a.env_dir.empty()) {
    model = load_environment(a.env_dir).model;
  } else {
    if (a.store_path.empty() || a.sig_path.empty())
      throw error("show-model needs --env or both --store and --sig");
    Signature sig = load_signature(a.sig_path);
    Store store = load_store(a.store_path, sig);
    model = induced_model(store.as_theory(), sig);
  }
  if (a.as_json)
    std::cout << json{{"model", model->to_string()}}.dump() << "\n";
  else
    std::cout << model->to_string();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"constructive description-logic toolkit"};
  app.require_subcommand(1);

  CheckProofArgs cp;
  auto* cmd_cp = app.add_subcommand("check-proof", "check a natural-deduction proof file");
  cmd_cp->add_option("proof", cp.proof_path, "proof file")->required();
  cmd_cp->add_option("--sig", cp.sig_path, "signature file")->required();
  cmd_cp->add_flag("--json", cp.as_json, "machine-readable output");

  ProveArgs pv;
  auto* cmd_pv = app.add_subcommand("prove", "search for a proof");
  cmd_pv->add_option("--sig", pv.sig_path, "signature file")->required();
  cmd_pv->add_option("--theory", pv.theory_path, "theory file (TBox hypotheses)");
  cmd_pv->add_option("--hyp", pv.hyps, "additional hypothesis (repeatable)");
  cmd_pv->add_option("--goal", pv.goal, "goal formula")->required();
  cmd_pv->add_option("--depth", pv.depth, "maximum proof depth");
  cmd_pv->add_option("--nodes", pv.nodes, "search node budget");
  cmd_pv->add_option("--out", pv.out_path, "write the proof to a file");
  cmd_pv->add_flag("--json", pv.as_json, "machine-readable output");

  CompArgs cc;
  auto* cmd_cc = app.add_subcommand("check-comp", "check a composition file");
  cmd_cc->add_option("comp", cc.comp_path, "composition file")->required();
  cmd_cc->add_option("--env", cc.env_dir, "environment directory")->required();
  cmd_cc->add_flag("--json", cc.as_json, "machine-readable output");

  CompArgs cr;
  auto* cmd_cr = app.add_subcommand("compile-run", "compile a composition and run it");
  cmd_cr->add_option("comp", cr.comp_path, "composition file")->required();
  cmd_cr->add_option("--env", cr.env_dir, "environment directory")->required();
  cmd_cr->add_option("--input", cr.input, "input, e.g. \"req_2 : (tt, tt)\"")->required();
  cmd_cr->add_flag("--json", cr.as_json, "machine-readable output");

  EnumArgs en;
  auto* cmd_en = app.add_subcommand("enum-it", "enumerate the information terms of a formula");
  cmd_en->add_option("--formula", en.formula, "closed formula")->required();
  cmd_en->add_option("--sig", en.sig_path, "signature file")->required();
  cmd_en->add_option("--cap", en.cap, "enumeration cap");
  cmd_en->add_flag("--json", en.as_json, "machine-readable output");

  VerifyArgs vf;
  auto* cmd_vf = app.add_subcommand("verify-uniform",
                                    "check uniform solvability against the induced model");
  cmd_vf->add_option("--env", vf.env_dir, "environment directory")->required();
  cmd_vf->add_option("--service", vf.service, "environment service name");
  cmd_vf->add_option("--comp", vf.comp_path, "composition file");
  cmd_vf->add_option("--cap", vf.cap, "enumeration cap");
  cmd_vf->add_flag("--json", vf.as_json, "machine-readable output");

  ModelArgs sm;
  auto* cmd_sm = app.add_subcommand("show-model", "print the induced model");
  cmd_sm->add_option("--env", sm.env_dir, "environment directory");
  cmd_sm->add_option("--store", sm.store_path, "store file");
  cmd_sm->add_option("--sig", sm.sig_path, "signature file");
  cmd_sm->add_flag("--json", sm.as_json, "machine-readable output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (cmd_cp->parsed()) return run_check_proof(cp);
    if (cmd_pv->parsed()) return run_prove(pv);
    if (cmd_cc->parsed()) return run_check_comp(cc);
    if (cmd_cr->parsed()) return run_compile_run(cr);
    if (cmd_en->parsed()) return run_enum_it(en);
    if (cmd_vf->parsed()) return run_verify_uniform(vf);
    if (cmd_sm->parsed()) return run_show_model(sm);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
