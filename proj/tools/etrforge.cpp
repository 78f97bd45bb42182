#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>

#include "etrforge/corpus.hpp"
#include "etrforge/decide.hpp"
#include "etrforge/errors.hpp"
#include "etrforge/eval.hpp"
#include "etrforge/reductions.hpp"
#include "etrforge/succinct.hpp"
#include "etrforge/textio.hpp"

namespace {

using namespace etrforge;

constexpr int kExitYes = 0;
constexpr int kExitNo = 1;
constexpr int kExitUsage = 2;
constexpr int kExitCapability = 3;

int exit_code_for(const EtrError& e) {
  switch (e.code()) {
    case Err::TooLarge:
    case Err::ExpansionCapExceeded:
    case Err::Undecidable:
      return kExitCapability;
    default:
      return kExitUsage;
  }
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Err::SyntaxError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_output(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(Err::SyntaxError, "cannot write '" + path + "'");
  out << content;
}

struct Options {
  std::string kind, in, out, witness, witness_out, pass, suite = "acceptance";
  std::string direction = "forward";
  long cap = kDefaultCap;
  long root = 0;
  unsigned long seed = 1;
  std::map<std::string, std::string> params;
};

long param_long(const Options& opt, const std::string& key, long fallback, bool required = false) {
  auto it = opt.params.find(key);
  if (it == opt.params.end()) {
    if (required) fail(Err::SyntaxError, "missing required --param " + key + "=...");
    return fallback;
  }
  try {
    return std::stol(it->second);
  } catch (const std::exception&) {
    fail(Err::SyntaxError, "malformed --param " + key + "=" + it->second);
  }
}

int cmd_parse(const Options& opt) {
  std::string text = read_file(opt.in);
  std::string canonical;
  if (opt.kind == "etr" || opt.kind == "sigma-etr" || opt.kind == "pi-etr" ||
      opt.kind == "sigma-pi-etr" || opt.kind == "sigma-vi-etr" || opt.kind == "sigma-vi-etr-1" ||
      opt.kind == "sigma-etr-half") {
    EtrInstance inst = textio::parse_etr(text);
    if (opt.kind != "etr" && dialect_name(inst.dialect) != opt.kind)
      fail(Err::DialectViolation, "file declares dialect " + dialect_name(inst.dialect) +
                                      ", expected " + opt.kind);
    canonical = textio::print_etr(inst);
  } else if (opt.kind == "qbf") {
    canonical = textio::print_qbf(textio::parse_qbf(text));
  } else if (opt.kind == "dist") {
    canonical = textio::print_distribution(textio::parse_distribution(text));
  } else if (opt.kind == "prob") {
    canonical = textio::print_prob(textio::parse_prob(text));
  } else if (opt.kind == "succ") {
    canonical = textio::print_succ(textio::parse_succ(text));
  } else if (opt.kind == "succ18") {
    canonical = textio::print_succ18(textio::parse_succ18(text));
  } else if (opt.kind == "eso") {
    canonical = textio::print_eso(textio::parse_eso(text));
  } else if (opt.kind == "witness") {
    canonical = textio::print_witness(textio::parse_witness(text));
  } else if (opt.kind == "emajsat") {
    canonical = textio::print_emajsat(textio::parse_emajsat(text));
  } else {
    fail(Err::SyntaxError, "unknown kind '" + opt.kind + "'");
  }
  write_output(opt.out, canonical);
  return kExitYes;
}

int cmd_eval(const Options& opt) {
  std::string text = read_file(opt.in);
  if (opt.kind == "qbf") {
    bool v = eval_qbf(textio::parse_qbf(text));
    std::cout << (v ? "true" : "false") << "\n";
    return v ? kExitYes : kExitNo;
  }
  if (opt.witness.empty()) fail(Err::SyntaxError, "eval of kind " + opt.kind + " needs --witness");
  Witness w = textio::parse_witness(read_file(opt.witness));
  if (opt.kind == "etr") {
    EtrInstance inst = textio::parse_etr(text);
    if (w.kind != WitnessKind::AssignmentW) fail(Err::KindMismatch, "expected an assignment witness");
    bool v = eval_formula(inst.formula, w.assignment, opt.cap);
    std::cout << (v ? "true" : "false") << "\n";
    return v ? kExitYes : kExitNo;
  }
  if (opt.kind == "prob") {
    ProbSatInstance inst = textio::parse_prob(text);
    if (w.kind != WitnessKind::DistributionW) fail(Err::KindMismatch, "expected a distribution witness");
    bool v = eval_prob_formula(inst.formula, w.distribution, opt.cap);
    std::cout << (v ? "true" : "false") << "\n";
    return v ? kExitYes : kExitNo;
  }
  if (opt.kind == "eso") {
    EsoInstance inst = textio::parse_eso(text);
    if (w.kind != WitnessKind::EsoTablesW) fail(Err::KindMismatch, "expected an eso-tables witness");
    bool v = eval_eso(inst.sentence, inst.structure, w.tables, opt.cap);
    std::cout << (v ? "true" : "false") << "\n";
    return v ? kExitYes : kExitNo;
  }
  fail(Err::SyntaxError, "unknown kind '" + opt.kind + "' for eval");
}

template <typename TargetT>
int emit_pass_result(const Options& opt, const PassResult<TargetT>& result,
                     const std::string& (*printer_text)(const TargetT&) = nullptr) {
  (void)printer_text;
  std::string text;
  if constexpr (std::is_same_v<TargetT, EtrInstance>)
    text = textio::print_etr(result.target);
  else if constexpr (std::is_same_v<TargetT, ProbSatInstance>)
    text = textio::print_prob(result.target);
  else if constexpr (std::is_same_v<TargetT, EsoInstance>)
    text = textio::print_eso(result.target);
  write_output(opt.out, text);
  if (!opt.witness.empty()) {
    Witness w = textio::parse_witness(read_file(opt.witness));
    const auto& map = opt.direction == "backward" ? result.backward : result.forward;
    if (!map) fail(Err::KindMismatch, "this pass has no " + opt.direction + " witness map");
    Witness moved = map(w);
    write_output(opt.witness_out, textio::print_witness(moved));
  }
  if (!result.notes.empty()) std::cerr << "note: " << result.notes << "\n";
  return kExitYes;
}

int cmd_reduce(const Options& opt) {
  const std::string& pass = opt.pass;
  std::string text = read_file(opt.in);
  if (pass == "qbf-to-pietr") return emit_pass_result(opt, qbf_to_pietr(textio::parse_qbf(text)));
  if (pass == "emajsat-to-sigmaetr")
    return emit_pass_result(opt, emajsat_to_sigmaetr(textio::parse_emajsat(text)));
  if (pass == "sumvi-to-sumvi1")
    return emit_pass_result(
        opt, sumvi_to_sumvi1(textio::parse_etr(text), static_cast<int>(param_long(opt, "m", 1))));
  if (pass == "sumvi1-to-probsat")
    return emit_pass_result(opt, sumvi1_to_probsat(textio::parse_etr(text)));
  if (pass == "normalize-prob") {
    ProbSatInstance inst = textio::parse_prob(text);
    inst.formula = normalize_prob_primitives(inst.formula, inst.vars, inst.domain);
    write_output(opt.out, textio::print_prob(inst));
    return kExitYes;
  }
  if (pass == "smsat-to-sigmaetr") {
    ProbSatInstance inst = textio::parse_prob(text);
    long p = inst.small_model_p ? *inst.small_model_p : -1;
    p = param_long(opt, "p", p, p < 0);
    return emit_pass_result(opt, smsat_to_sigmaetr(inst, p));
  }
  if (pass == "sigmaetr-half-to-smsat")
    return emit_pass_result(opt, sigmaetr_half_to_smsat(textio::parse_etr(text)));
  if (pass == "prenex-sums") return emit_pass_result(opt, prenex_sums(textio::parse_etr(text)));
  if (pass == "flatten") return emit_pass_result(opt, flatten_single_poly(textio::parse_etr(text)));
  if (pass == "succ18-to-leso")
    return emit_pass_result(opt, succ18_to_leso(textio::parse_succ18(text)));
  if (pass == "leso-leq-rewrite") {
    EsoInstance inst = textio::parse_eso(text);
    inst.sentence = leso_leq_rewrite(inst.sentence);
    write_output(opt.out, textio::print_eso(inst));
    return kExitYes;
  }
  fail(Err::SyntaxError, "unknown pass '" + pass + "'");
}

int cmd_succ_expand(const Options& opt) {
  SuccCircuit s = textio::parse_succ(read_file(opt.in));
  EtrInstance inst = expand_succ(s, opt.cap, static_cast<uint64_t>(opt.root));
  write_output(opt.out, textio::print_etr(inst));
  return kExitYes;
}

int cmd_succ_denneg(const Options& opt) {
  SuccCircuit s = textio::parse_succ(read_file(opt.in));
  write_output(opt.out, textio::print_succ(remove_negations(s)));
  return kExitYes;
}

int cmd_succ_compile(const Options& opt) {
  EtrInstance inst = textio::parse_etr(read_file(opt.in));
  write_output(opt.out, textio::print_succ(compile_sigma_pi(inst)));
  return kExitYes;
}

int cmd_decide(const Options& opt) {
  EtrInstance inst = textio::parse_etr(read_file(opt.in));
  bool v = brute_force_decide(inst, opt.cap);
  std::cout << (v ? "sat" : "unsat") << "\n";
  return v ? kExitYes : kExitNo;
}

int cmd_check_witness(const Options& opt) {
  std::string text = read_file(opt.in);
  Witness w = textio::parse_witness(read_file(opt.witness));
  bool v = false;
  if (opt.kind == "etr") {
    v = check_witness(textio::parse_etr(text), w, opt.cap);
  } else if (opt.kind == "prob") {
    v = check_witness(textio::parse_prob(text), w, opt.cap);
  } else if (opt.kind == "eso") {
    v = check_witness(textio::parse_eso(text), w, opt.cap);
  } else {
    fail(Err::SyntaxError, "unknown kind '" + opt.kind + "' for check-witness");
  }
  std::cout << (v ? "true" : "false") << "\n";
  return v ? kExitYes : kExitNo;
}

int cmd_corpus(const Options& opt) {
  if (opt.suite != "acceptance") fail(Err::SyntaxError, "unknown suite '" + opt.suite + "'");
  auto results = corpus::run_acceptance(opt.seed);
  std::string table;
  bool ok = corpus::print_acceptance_table(results, &table);
  std::cout << table;
  return ok ? kExitYes : kExitNo;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"etrforge: exact evaluation and reduction compilation for real-arithmetic "
               "satisfiability dialects"};
  app.require_subcommand(1);
  Options opt;
  std::vector<std::string> raw_params;

  auto add_common = [&](CLI::App* sub, bool needs_in) {
    if (needs_in) sub->add_option("--in", opt.in, "input file")->required();
    sub->add_option("--out", opt.out, "output file (stdout when omitted)");
    sub->add_option("--cap", opt.cap, "binder expansion cap");
  };

  CLI::App* parse = app.add_subcommand("parse", "parse and reprint canonically");
  add_common(parse, true);
  parse->add_option("--kind", opt.kind, "artifact kind")->required();

  CLI::App* eval = app.add_subcommand("eval", "evaluate an instance");
  add_common(eval, true);
  eval->add_option("--kind", opt.kind, "qbf | etr | prob | eso")->required();
  eval->add_option("--witness", opt.witness, "witness file (for etr/prob/eso)");

  CLI::App* reduce = app.add_subcommand("reduce", "run a reduction pass");
  add_common(reduce, true);
  reduce->add_option("--pass", opt.pass, "pass name")->required();
  reduce->add_option("--witness", opt.witness, "witness to transport");
  reduce->add_option("--witness-out", opt.witness_out, "transported witness file");
  reduce->add_option("--direction", opt.direction, "forward | backward");
  reduce->add_option("--param", raw_params, "pass parameters key=value");

  CLI::App* sexpand = app.add_subcommand("succ-expand", "expand a succinct circuit");
  add_common(sexpand, true);
  sexpand->add_option("--root", opt.root, "root index (default 0)");

  CLI::App* sdenneg = app.add_subcommand("succ-denneg", "remove negations from a succinct circuit");
  add_common(sdenneg, true);

  CLI::App* scompile = app.add_subcommand("succ-compile", "compile sigma-pi-etr to a succinct circuit");
  add_common(scompile, true);

  CLI::App* decide = app.add_subcommand("decide", "brute-force decision over candidate grids");
  add_common(decide, true);

  CLI::App* checkw = app.add_subcommand("check-witness", "check a witness against an instance");
  add_common(checkw, true);
  checkw->add_option("--kind", opt.kind, "etr | prob | eso")->required();
  checkw->add_option("--witness", opt.witness, "witness file")->required();

  CLI::App* corpus_cmd = app.add_subcommand("corpus", "run a test corpus");
  corpus_cmd->add_option("--suite", opt.suite, "suite name (acceptance)");
  corpus_cmd->add_option("--seed", opt.seed, "seed for randomized test vectors");

  CLI11_PARSE(app, argc, argv);

  for (const auto& kv : raw_params) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --param expects key=value, got '" << kv << "'\n";
      return kExitUsage;
    }
    opt.params[kv.substr(0, eq)] = kv.substr(eq + 1);
  }

  try {
    if (parse->parsed()) return cmd_parse(opt);
    if (eval->parsed()) return cmd_eval(opt);
    if (reduce->parsed()) return cmd_reduce(opt);
    if (sexpand->parsed()) return cmd_succ_expand(opt);
    if (sdenneg->parsed()) return cmd_succ_denneg(opt);
    if (scompile->parsed()) return cmd_succ_compile(opt);
    if (decide->parsed()) return cmd_decide(opt);
    if (checkw->parsed()) return cmd_check_witness(opt);
    if (corpus_cmd->parsed()) return cmd_corpus(opt);
  } catch (const EtrError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
