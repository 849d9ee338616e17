#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "kgframe/cli_io.hpp"

namespace kgf {

namespace {

struct CommonFlags {
  std::optional<double> tol;
  /// --tol, else the spec file's tolerance, else the library default.
  double resolved_tol = kDefaultTol;
  int samples = 1000;
  std::optional<std::uint64_t> seed;
  std::string mode = "auto";
  std::string out;
  std::string format = "json";
  bool timing = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--tol", f.tol, "Relative tolerance")->check(CLI::NonNegativeNumber);
  cmd->add_option("--samples", f.samples, "Random samples for sampled checks")->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "RNG seed (default: spec seed, then $KGFRAME_SEED)");
  cmd->add_option("--mode", f.mode, "Certification mode")->check(CLI::IsMember({"auto", "exact", "sampled"}));
  cmd->add_option("--out", f.out, "Write the report to this path instead of stdout");
  cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"json", "text"}));
  cmd->add_flag("--timing", f.timing, "Include wall-clock timing (breaks byte-stability)");
}

std::uint64_t resolve_seed(const CommonFlags& f, const std::optional<std::uint64_t>& spec_seed) {
  if (f.seed) return *f.seed;
  if (spec_seed) return *spec_seed;
  if (const char* env = std::getenv(kSeedEnv)) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw FrameError(ErrorKind::ParseError, std::string(kSeedEnv) + " is not an unsigned integer");
    }
  }
  return kDefaultSeed;
}

CertConfig make_config(const CommonFlags& f, std::uint64_t seed) {
  CertConfig cfg;
  cfg.tol = f.resolved_tol;
  cfg.samples = f.samples;
  cfg.seed = seed;
  cfg.mode = f.mode == "exact" ? CertMode::Exact : f.mode == "sampled" ? CertMode::Sampled : CertMode::Auto;
  return cfg;
}

void flatten_text(const Json& j, const std::string& prefix, std::ostream& os) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) flatten_text(v, prefix.empty() ? k : prefix + "." + k, os);
  } else if (j.is_array() && !j.empty() && (j.front().is_object())) {
    for (std::size_t i = 0; i < j.size(); ++i) flatten_text(j[i], prefix + "[" + std::to_string(i) + "]", os);
  } else {
    os << prefix << ": " << j.dump() << "\n";
  }
}

std::string render(const Json& report, const std::string& format) {
  if (format == "text") {
    std::ostringstream os;
    flatten_text(report, "", os);
    return os.str();
  }
  return report.dump(2) + "\n";
}

struct Outcome {
  int code = kExitCertified;
  Json result;
  std::uint64_t seed = 0;
};

Outcome cmd_verify(const FrameSpecFile& spec, const CommonFlags& f) {
  if (!spec.bounds) throw FrameError(ErrorKind::ParseError, "bounds: required by verify");
  Outcome o;
  o.seed = resolve_seed(f, spec.seed);
  const CertConfig cfg = make_config(f, o.seed);
  const OperatorFamily fam = spec.family();
  const ModuleOperator k = spec.target_or_identity();
  const FrameCertificate cert = certify(fam, k, *spec.bounds, cfg);
  const auto samples = sample_vectors(spec.algebra_dim, spec.module_rank, cfg.samples, cfg.seed);
  const NormBoundReport nb = norm_bound_check(fam, k, *spec.bounds, samples, cfg.tol);
  o.result = Json{{"certificate", to_json(cert)}, {"norm_bound_check", to_json(nb)},
                  {"tight", is_tight(*spec.bounds, cfg.tol)}, {"normalized", is_normalized(*spec.bounds, cfg.tol)}};
  if (cert.verdict == Verdict::Falsified) {
    o.code = kExitFalsified;
  } else if (cert.verdict == Verdict::Certified && cert.mode == CertMode::Exact) {
    o.code = kExitCertified;
  } else {
    o.code = kExitInconclusive;
  }
  return o;
}

Outcome cmd_bounds(const FrameSpecFile& spec, const CommonFlags& f) {
  Outcome o;
  o.seed = resolve_seed(f, spec.seed);
  const ScalarBounds sb = optimal_scalar_bounds(spec.family(), spec.target_or_identity(), f.resolved_tol);
  o.result = Json{{"alpha", std::isfinite(sb.alpha) ? Json(sb.alpha) : Json(nullptr)},
                  {"alpha_unbounded", !std::isfinite(sb.alpha)},
                  {"beta", sb.beta}};
  return o;
}

Outcome cmd_dual(const FrameSpecFile& spec, const CommonFlags& f, const std::string& kind, double dual_tol) {
  Outcome o;
  o.seed = resolve_seed(f, spec.seed);
  const OperatorFamily fam = spec.family();
  const ModuleOperator k = spec.target_or_identity();
  DualPair pair;
  if (kind == "canonical") {
    pair = canonical_dual_pair(fam, k, dual_tol);
  } else if (kind == "minimal") {
    pair = minimal_dual_pair(fam, k, dual_tol);
  } else {
    if (spec.dual_operators.empty()) throw FrameError(ErrorKind::ParseError, "dual_operators: required by --kind provided");
    pair = verify_dual(fam, OperatorFamily(spec.dual_operators), k, dual_tol);
  }
  o.result = Json{{"kind", kind}, {"dual", to_json(pair)}, {"preframe", to_json(preframe_consistency(pair))}};
  o.code = pair.verified ? kExitCertified : kExitFalsified;
  return o;
}

Outcome cmd_perturb(const FrameSpecFile& spec, const CommonFlags& f) {
  if (!spec.bounds) throw FrameError(ErrorKind::ParseError, "bounds: required by perturb");
  if (spec.perturbed_operators.empty()) throw FrameError(ErrorKind::ParseError, "perturbed_operators: required by perturb");
  Outcome o;
  o.seed = resolve_seed(f, spec.seed);
  const CertConfig cfg = make_config(f, o.seed);
  const ModuleOperator k = spec.target_or_identity();
  const ModuleOperator lop = spec.range_operator ? *spec.range_operator : k;
  const PerturbationReport rep =
      perturbation_check(spec.family(), OperatorFamily(spec.perturbed_operators), k, lop, *spec.bounds, cfg);
  o.result = to_json(rep);
  o.code = rep.margins.holds ? kExitCertified : kExitFalsified;
  return o;
}

Outcome cmd_tensor(const std::vector<FrameSpecFile>& specs, const CommonFlags& f, double dual_tol) {
  Outcome o;
  o.seed = resolve_seed(f, specs.front().seed);
  std::vector<DualPair> pairs;
  Json factors = Json::array();
  for (const auto& spec : specs) {
    const OperatorFamily fam = spec.family();
    DualPair p = spec.dual_operators.empty()
                     ? canonical_dual_pair(fam, spec.target_or_identity(), dual_tol)
                     : verify_dual(fam, OperatorFamily(spec.dual_operators), spec.target_or_identity(), dual_tol);
    factors.push_back(Json{{"verified", p.verified}, {"reconstruction_residual", p.reconstruction_residual}});
    pairs.push_back(std::move(p));
  }
  const DualPair t = nfold_tensor_dual(pairs, dual_tol);
  std::vector<ModuleSpace> spaces;
  for (const auto& s : specs) spaces.push_back(ModuleSpace::single(s.algebra_dim, s.module_rank));
  const TensorSpace ts = tensor_space(spaces);
  o.result = Json{{"factors", std::move(factors)},
                  {"composite_dim", ts.dim()},
                  {"composite_rank", ts.rank()},
                  {"member_count", t.primary_family.size()},
                  {"index_order", "row-major"},
                  {"verified", t.verified},
                  {"reconstruction_residual", t.reconstruction_residual}};
  o.code = t.verified ? kExitCertified : kExitFalsified;
  return o;
}

Outcome cmd_douglas(const FrameSpecFile& spec, const CommonFlags& f) {
  if (!spec.target_operator) throw FrameError(ErrorKind::ParseError, "target_operator: required by douglas");
  if (!spec.range_operator) throw FrameError(ErrorKind::ParseError, "range_operator: required by douglas");
  Outcome o;
  o.seed = resolve_seed(f, spec.seed);
  const DouglasReport rep = douglas_check(*spec.target_operator, *spec.range_operator, f.resolved_tol);
  o.result = to_json(rep);
  o.code = rep.range_included ? kExitCertified : kExitFalsified;
  return o;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SingularFrameOperator:
    case ErrorKind::NoInclusion:
    case ErrorKind::HypothesisFailed:
    case ErrorKind::ToleranceConflict:
    case ErrorKind::NotCoisometry:
    case ErrorKind::NotCommuting:
    case ErrorKind::NotStrictlyNonzero:
    case ErrorKind::AllSamplesDegenerate:
      return kExitHypothesisFailure;
    default:
      return kExitInputError;
  }
}

}  // namespace

int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Certification toolkit for *-K-g-frames over matrix C*-algebras", "kgframe"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::vector<std::string> inputs;
  std::string dual_kind = "canonical";
  double dual_tol = 1e-10;
  std::string gen_kind;
  int gen_d = 1, gen_n = 1, gen_count = 1;

  auto add_input_cmd = [&](const char* name, const char* help, bool many = false) {
    CLI::App* cmd = app.add_subcommand(name, help);
    auto* opt = cmd->add_option("spec", inputs, "Frame specification file(s)")->required()->check(CLI::ExistingFile);
    if (!many) opt->expected(1);
    add_common(cmd, flags);
    return cmd;
  };
  add_input_cmd("verify", "Certify frame bounds and run the norm-bound check");
  add_input_cmd("bounds", "Optimal scalar frame bounds");
  CLI::App* dual = add_input_cmd("dual", "Construct and verify a dual family");
  dual->add_option("--kind", dual_kind, "Dual to build")->check(CLI::IsMember({"canonical", "minimal", "provided"}));
  dual->add_option("--dual-tol", dual_tol, "Reconstruction residual tolerance");
  add_input_cmd("perturb", "Perturbation estimate and derived bounds");
  CLI::App* tensor = add_input_cmd("tensor", "Verify duality of tensor-product families", true);
  tensor->add_option("--dual-tol", dual_tol, "Reconstruction residual tolerance");
  add_input_cmd("douglas", "Range inclusion / majorization / factorization");
  CLI::App* gen = app.add_subcommand("gen", "Generate a random instance");
  gen->add_option("--kind", gen_kind, "tight | known-bounds | bessel-only | perturbed | dual")->required();
  gen->add_option("--d", gen_d, "Algebra dimension")->check(CLI::PositiveNumber);
  gen->add_option("--n", gen_n, "Module rank")->check(CLI::PositiveNumber);
  gen->add_option("--count", gen_count, "Family size")->check(CLI::PositiveNumber);
  add_common(gen, flags);

  try {
    std::vector<std::string> rev(argv.rbegin(), argv.rend());
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitCertified;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInputError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  const std::string name = sub->get_name();
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  std::uint64_t seed = 0;
  Json report;
  report["command"] = name;
  report["argv"] = argv;
  try {
    if (name == "gen") {
      const std::uint64_t seed = resolve_seed(flags, std::nullopt);
      const FrameSpecFile spec = generate_instance(gen_kind, gen_d, gen_n, gen_count, seed);
      if (flags.out.empty()) {
        out << dump_spec(spec);
      } else {
        save_spec(spec, flags.out);
      }
      return kExitCertified;
    }
    std::vector<FrameSpecFile> specs;
    for (const auto& p : inputs) specs.push_back(load_spec(p));
    seed = resolve_seed(flags, specs.front().seed);
    flags.resolved_tol = flags.tol.value_or(specs.front().tolerance.value_or(kDefaultTol));
    if (name == "verify") o = cmd_verify(specs.front(), flags);
    else if (name == "bounds") o = cmd_bounds(specs.front(), flags);
    else if (name == "dual") o = cmd_dual(specs.front(), flags, dual_kind, dual_tol);
    else if (name == "perturb") o = cmd_perturb(specs.front(), flags);
    else if (name == "tensor") o = cmd_tensor(specs, flags, dual_tol);
    else if (name == "douglas") o = cmd_douglas(specs.front(), flags);
  } catch (const HypothesisFailed& e) {
    o.code = kExitHypothesisFailure;
    o.result = Json{{"error", "HypothesisFailed"}, {"hypothesis", e.hypothesis()},
                    {"witness", e.witness() ? to_json(*e.witness()) : Json(nullptr)}};
  } catch (const FrameError& e) {
    o.code = exit_code_for(e.kind());
    o.result = Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}};
    err << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    o.code = kExitInputError;
    o.result = Json{{"error", "InputError"}, {"message", e.what()}};
    err << "error: " << e.what() << "\n";
  }
  report["seed"] = seed;
  report["exit_code"] = o.code;
  report["result"] = std::move(o.result);
  if (flags.timing) {
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    report["timing_ms"] = ms;
  }
  const std::string text = render(report, flags.format);
  if (flags.out.empty()) {
    out << text;
  } else {
    std::ofstream f(flags.out, std::ios::binary);
    if (!f) {
      err << "error: cannot write " << flags.out << "\n";
      return kExitInputError;
    }
    f << text;
  }
  return o.code;
}

}  // namespace kgf
