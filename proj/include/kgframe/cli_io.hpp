#pragma once

// Frame-specification files, instance generators, report serialization and
// the command-line entry point.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgframe/duals.hpp"
#include "kgframe/perturbation.hpp"
#include "kgframe/tensor.hpp"

namespace kgf {

using Json = nlohmann::ordered_json;

struct FrameSpecFile {
  int algebra_dim = 1;
  int module_rank = 1;
  std::vector<ModuleOperator> operators;
  std::optional<ModuleOperator> target_operator;
  std::optional<FrameBounds> bounds;
  std::vector<ModuleOperator> dual_operators;
  std::vector<ModuleOperator> perturbed_operators;
  std::optional<ModuleOperator> range_operator;
  std::optional<std::uint64_t> seed;
  std::optional<double> tolerance;
  std::string kind;

  OperatorFamily family() const { return OperatorFamily(operators); }
  /// The target operator, or the identity when absent.
  ModuleOperator target_or_identity() const;
};

enum ExitCode : int {
  kExitCertified = 0,
  kExitFalsified = 1,
  kExitInconclusive = 2,
  kExitInputError = 3,
  kExitHypothesisFailure = 4,
};

// Serialization. Complex numbers are [re, im]; matrices are row-major nested arrays.
Json to_json(Complex c);
Json to_json(const CMatrix& m);
Json to_json(const AlgebraElement& a);
Json to_json(const ModuleVector& x);
Json to_json(const ModuleOperator& t);
Json to_json(const FrameBounds& b);
Json to_json(const FrameSpecFile& spec);
Json to_json(const FrameCertificate& c);
Json to_json(const NormBoundReport& r);
Json to_json(const DouglasReport& r);
Json to_json(const DualPair& p);
Json to_json(const PreframeReport& r);
Json to_json(const PerturbationReport& r);

/// Throws FrameError(ParseError) naming the offending field.
FrameSpecFile spec_from_json(const Json& j);
FrameSpecFile load_spec(const std::filesystem::path& path);
void save_spec(const FrameSpecFile& spec, const std::filesystem::path& path);
std::string dump_spec(const FrameSpecFile& spec);

/// Kinds: tight, known-bounds, bessel-only, perturbed, dual.
FrameSpecFile generate_instance(const std::string& kind, int d, int n, int count, std::uint64_t seed);

/// Environment variable consulted for the default seed.
inline constexpr const char* kSeedEnv = "KGFRAME_SEED";
inline constexpr std::uint64_t kDefaultSeed = 20240601;

/// argv excludes the program name. Never throws.
int run_command(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace kgf
