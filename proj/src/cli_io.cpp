#include "kgframe/cli_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace kgf {

ModuleOperator FrameSpecFile::target_or_identity() const {
  return target_operator ? *target_operator : ModuleOperator::identity(algebra_dim, module_rank);
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

Json real_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

// Adding 0.0 folds -0.0 into 0.0.
Json to_json(Complex c) { return Json::array({c.real() + 0.0, c.imag() + 0.0}); }

Json to_json(const CMatrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const AlgebraElement& a) { return to_json(a.matrix()); }

Json to_json(const ModuleVector& x) {
  Json blocks = Json::array();
  for (int i = 0; i < x.rank(); ++i) blocks.push_back(to_json(x.block(i)));
  return blocks;
}

Json to_json(const ModuleOperator& t) {
  Json rows = Json::array();
  for (int i = 0; i < t.source_rank(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < t.target_rank(); ++j) row.push_back(to_json(t.block(i, j)));
    rows.push_back(std::move(row));
  }
  return Json{{"target_rank", t.target_rank()}, {"blocks", std::move(rows)}};
}

Json to_json(const FrameBounds& b) {
  return Json{{"mode", b.mode == BoundsMode::Scalar ? "scalar" : "algebra"},
              {"lower", to_json(b.lower)},
              {"upper", to_json(b.upper)}};
}

Json to_json(const FrameSpecFile& spec) {
  Json j;
  j["algebra_dim"] = spec.algebra_dim;
  j["module_rank"] = spec.module_rank;
  if (!spec.kind.empty()) j["kind"] = spec.kind;
  Json ops = Json::array();
  for (const auto& op : spec.operators) ops.push_back(to_json(op));
  j["operators"] = std::move(ops);
  if (spec.target_operator) j["target_operator"] = to_json(*spec.target_operator);
  if (spec.bounds) j["bounds"] = to_json(*spec.bounds);
  if (!spec.dual_operators.empty()) {
    Json d = Json::array();
    for (const auto& op : spec.dual_operators) d.push_back(to_json(op));
    j["dual_operators"] = std::move(d);
  }
  if (!spec.perturbed_operators.empty()) {
    Json p = Json::array();
    for (const auto& op : spec.perturbed_operators) p.push_back(to_json(op));
    j["perturbed_operators"] = std::move(p);
  }
  if (spec.range_operator) j["range_operator"] = to_json(*spec.range_operator);
  if (spec.seed) j["seed"] = *spec.seed;
  if (spec.tolerance) j["tolerance"] = *spec.tolerance;
  return j;
}

Json to_json(const FrameCertificate& c) {
  Json j;
  j["verdict"] = to_string(c.verdict);
  j["mode"] = to_string(c.mode);
  j["failed_side"] = to_string(c.failed_side);
  j["min_gap_lower"] = real_or_null(c.min_gap_lower);
  j["min_gap_upper"] = real_or_null(c.min_gap_upper);
  j["samples_used"] = c.samples_used;
  j["lower_vacuous"] = c.lower_vacuous;
  j["bounds"] = to_json(c.bounds);
  j["witness"] = c.witness ? to_json(*c.witness) : Json(nullptr);
  return j;
}

Json to_json(const NormBoundReport& r) {
  return Json{{"holds", r.holds},
              {"samples", r.samples},
              {"worst_lower_margin", real_or_null(r.worst_lower_margin)},
              {"worst_lower_index", r.worst_lower_index},
              {"worst_upper_margin", real_or_null(r.worst_upper_margin)},
              {"worst_upper_index", r.worst_upper_index}};
}

Json to_json(const DouglasReport& r) {
  Json j;
  j["range_included"] = r.range_included;
  j["lambda_min"] = r.lambda_min ? Json(*r.lambda_min) : Json(nullptr);
  j["residual"] = r.residual;
  j["rank_l"] = r.rank_l;
  j["rank_augmented"] = r.rank_augmented;
  j["factor"] = r.factor ? to_json(*r.factor) : Json(nullptr);
  return j;
}

Json to_json(const DualPair& p) {
  Json members = Json::array();
  for (const auto& m : p.dual_family.members()) members.push_back(to_json(m));
  return Json{{"verified", p.verified},
              {"reconstruction_residual", p.reconstruction_residual},
              {"dual_bessel_bound", p.dual_bessel_bound},
              {"member_count", p.dual_family.size()},
              {"dual_operators", std::move(members)}};
}

Json to_json(const PreframeReport& r) {
  return Json{{"theta_eta_deviation", r.theta_eta_deviation},
              {"projection_deviation", r.projection_deviation},
              {"max_deviation", r.max_deviation},
              {"worst_index", r.worst_index}};
}

Json to_json(const PerturbationReport& r) {
  Json j;
  j["m_estimate"] = r.m_estimate;
  j["samples_used"] = r.samples_used;
  j["samples_skipped"] = r.samples_skipped;
  j["norm_a"] = r.norm_a;
  j["norm_b"] = r.norm_b;
  j["derived_lower"] = r.derived_lower;
  j["derived_upper"] = r.derived_upper;
  j["lambda"] = r.lambda;
  j["weak_conclusion"] = r.weak_conclusion;
  j["analysis_rank"] = r.analysis_rank;
  j["analysis_injective"] = r.analysis_injective;
  j["converse_m"] = r.converse_m ? Json(*r.converse_m) : Json(nullptr);
  j["margins"] = to_json(r.margins);
  j["worst_sample"] = to_json(r.worst_sample);
  return j;
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw FrameError(ErrorKind::ParseError, path + ": " + what);
}

const Json& field(const Json& j, const char* key, const std::string& path) {
  if (!j.is_object()) parse_fail(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(path + "." + key, "missing required field");
  return *it;
}

int parse_positive_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 1) parse_fail(path, "expected a positive integer");
  return j.get<int>();
}

Complex parse_complex(const Json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    parse_fail(path, "expected a [re, im] pair");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

CMatrix parse_matrix(const Json& j, int d, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != d) {
    parse_fail(path, "expected " + std::to_string(d) + " rows");
  }
  CMatrix m(d, d);
  for (int r = 0; r < d; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || static_cast<int>(j[r].size()) != d) {
      parse_fail(rp, "expected " + std::to_string(d) + " entries");
    }
    for (int c = 0; c < d; ++c) m(r, c) = parse_complex(j[r][c], rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

ModuleOperator parse_operator(const Json& j, int d, int n, const std::string& path,
                              std::optional<int> expected_target = std::nullopt) {
  const int m = parse_positive_int(field(j, "target_rank", path), path + ".target_rank");
  if (expected_target && m != *expected_target) {
    parse_fail(path + ".target_rank", "expected " + std::to_string(*expected_target));
  }
  const Json& blocks = field(j, "blocks", path);
  const std::string bp = path + ".blocks";
  if (!blocks.is_array() || static_cast<int>(blocks.size()) != n) {
    parse_fail(bp, "expected " + std::to_string(n) + " block rows (module_rank)");
  }
  CMatrix flat(n * d, m * d);
  for (int i = 0; i < n; ++i) {
    const std::string rp = bp + "[" + std::to_string(i) + "]";
    if (!blocks[i].is_array() || static_cast<int>(blocks[i].size()) != m) {
      parse_fail(rp, "expected " + std::to_string(m) + " blocks (target_rank)");
    }
    for (int k = 0; k < m; ++k) {
      flat.block(i * d, k * d, d, d) = parse_matrix(blocks[i][k], d, rp + "[" + std::to_string(k) + "]");
    }
  }
  return ModuleOperator::from_flat(std::move(flat), d);
}

std::vector<ModuleOperator> parse_operator_list(const Json& j, int d, int n, const std::string& path) {
  if (!j.is_array() || j.empty()) parse_fail(path, "expected a non-empty array of operators");
  std::vector<ModuleOperator> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(parse_operator(j[i], d, n, path + "[" + std::to_string(i) + "]"));
  return out;
}

}  // namespace

FrameSpecFile spec_from_json(const Json& j) {
  FrameSpecFile spec;
  spec.algebra_dim = parse_positive_int(field(j, "algebra_dim", "spec"), "algebra_dim");
  spec.module_rank = parse_positive_int(field(j, "module_rank", "spec"), "module_rank");
  const int d = spec.algebra_dim;
  const int n = spec.module_rank;
  if (auto it = j.find("kind"); it != j.end()) {
    if (!it->is_string()) parse_fail("kind", "expected a string");
    spec.kind = it->get<std::string>();
  }
  spec.operators = parse_operator_list(field(j, "operators", "spec"), d, n, "operators");
  if (auto it = j.find("target_operator"); it != j.end()) {
    spec.target_operator = parse_operator(*it, d, n, "target_operator", n);
  }
  if (auto it = j.find("range_operator"); it != j.end()) {
    spec.range_operator = parse_operator(*it, d, n, "range_operator", n);
  }
  if (auto it = j.find("bounds"); it != j.end()) {
    const Json& b = *it;
    const Json& mode = field(b, "mode", "bounds");
    if (!mode.is_string() || (mode != "scalar" && mode != "algebra")) {
      parse_fail("bounds.mode", "expected \"scalar\" or \"algebra\"");
    }
    AlgebraElement lower(parse_matrix(field(b, "lower", "bounds"), d, "bounds.lower"));
    AlgebraElement upper(parse_matrix(field(b, "upper", "bounds"), d, "bounds.upper"));
    if (mode == "scalar") {
      auto is_scalar = [d](const AlgebraElement& a) {
        return (a.matrix() - a(0, 0) * CMatrix::Identity(d, d)).norm() == 0.0 && a(0, 0).imag() == 0.0;
      };
      if (!is_scalar(lower) || !is_scalar(upper)) parse_fail("bounds", "scalar mode needs real multiples of identity");
      spec.bounds = FrameBounds{std::move(lower), std::move(upper), BoundsMode::Scalar};
    } else {
      spec.bounds = FrameBounds::algebra(std::move(lower), std::move(upper));
    }
  }
  if (auto it = j.find("dual_operators"); it != j.end()) {
    spec.dual_operators = parse_operator_list(*it, d, n, "dual_operators");
  }
  if (auto it = j.find("perturbed_operators"); it != j.end()) {
    spec.perturbed_operators = parse_operator_list(*it, d, n, "perturbed_operators");
  }
  if (auto it = j.find("seed"); it != j.end()) {
    if (!it->is_number_unsigned()) parse_fail("seed", "expected a non-negative integer");
    spec.seed = it->get<std::uint64_t>();
  }
  if (auto it = j.find("tolerance"); it != j.end()) {
    if (!it->is_number() || it->get<double>() < 0.0) parse_fail("tolerance", "expected a non-negative number");
    spec.tolerance = it->get<double>();
  }
  auto same_ranks = [](const std::vector<ModuleOperator>& a, const std::vector<ModuleOperator>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].target_rank() != b[i].target_rank()) return false;
    }
    return true;
  };
  if (!spec.dual_operators.empty() && !same_ranks(spec.operators, spec.dual_operators)) {
    parse_fail("dual_operators", "member count and target ranks must match operators");
  }
  if (!spec.perturbed_operators.empty() && !same_ranks(spec.operators, spec.perturbed_operators)) {
    parse_fail("perturbed_operators", "member count and target ranks must match operators");
  }
  return spec;
}

FrameSpecFile load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FrameError(ErrorKind::ParseError, path.string() + ": cannot open file");
  Json j;
  try {
    j = Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FrameError(ErrorKind::ParseError, path.string() + ": " + e.what());
  }
  return spec_from_json(j);
}

std::string dump_spec(const FrameSpecFile& spec) { return to_json(spec).dump(2) + "\n"; }

void save_spec(const FrameSpecFile& spec, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FrameError(ErrorKind::ParseError, path.string() + ": cannot write file");
  out << dump_spec(spec);
}

// ---------------------------------------------------------------------------
// Generators

namespace {

std::vector<ModuleOperator> split_analysis(const CMatrix& t, int d, int n, int count) {
  std::vector<ModuleOperator> out;
  for (int i = 0; i < count; ++i) out.push_back(ModuleOperator::from_flat(t.middleCols(i * n * d, n * d), d));
  return out;
}

FrameSpecFile base_spec(const std::string& kind, int d, int n, std::uint64_t seed) {
  FrameSpecFile spec;
  spec.kind = kind;
  spec.algebra_dim = d;
  spec.module_rank = n;
  spec.seed = seed;
  return spec;
}

// Random family with a random target and scalar bounds just inside the optimum.
FrameSpecFile known_bounds(const std::string& kind, int d, int n, int count, std::mt19937_64& rng,
                           std::uint64_t seed) {
  FrameSpecFile spec = base_spec(kind, d, n, seed);
  for (int i = 0; i < count; ++i) spec.operators.push_back(random_operator(d, n, n, rng));
  spec.target_operator = random_operator(d, n, n, rng);
  const ScalarBounds sb = optimal_scalar_bounds(spec.family(), *spec.target_operator);
  spec.bounds = FrameBounds::scalar(d, 0.999 * sb.alpha, 1.001 * sb.beta);
  return spec;
}

}  // namespace

FrameSpecFile generate_instance(const std::string& kind, int d, int n, int count, std::uint64_t seed) {
  if (d < 1 || n < 1 || count < 1) throw FrameError(ErrorKind::ShapeMismatch, "d, n and count must be >= 1");
  std::mt19937_64 rng(seed);
  if (kind == "tight") {
    // Analysis matrix with orthonormal rows gives S = I.
    FrameSpecFile spec = base_spec(kind, d, n, seed);
    const int rows = n * d;
    const int cols = count * n * d;
    Eigen::HouseholderQR<CMatrix> qr(dense::random_gaussian(cols, rows, rng));
    const CMatrix q = qr.householderQ() * CMatrix::Identity(cols, rows);
    spec.operators = split_analysis(q.adjoint(), d, n, count);
    spec.target_operator = ModuleOperator::identity(d, n);
    spec.bounds = FrameBounds::scalar(d, 1.0, 1.0);
    return spec;
  }
  if (kind == "known-bounds") return known_bounds(kind, d, n, count, rng, seed);
  if (kind == "bessel-only") {
    FrameSpecFile spec = base_spec(kind, d, n, seed);
    CMatrix t = dense::random_gaussian(n * d, count * n * d, rng);
    CVector v = dense::random_gaussian(n * d, 1, rng).col(0);
    v.normalize();
    t -= v * (v.adjoint() * t);
    spec.operators = split_analysis(t, d, n, count);
    spec.target_operator = ModuleOperator::identity(d, n);
    const double beta = std::sqrt(frame_operator(spec.family()).norm());
    spec.bounds = FrameBounds::scalar(d, 0.5 * beta, 1.001 * beta);
    return spec;
  }
  if (kind == "perturbed") {
    FrameSpecFile spec = known_bounds(kind, d, n, count, rng, seed);
    spec.range_operator = spec.target_operator;
    for (const auto& op : spec.operators) {
      const ModuleOperator noise = random_operator(d, n, n, rng);
      spec.perturbed_operators.push_back(op + Complex(1e-3 * op.norm() / noise.norm()) * noise);
    }
    return spec;
  }
  if (kind == "dual") {
    FrameSpecFile spec = known_bounds(kind, d, n, count, rng, seed);
    spec.dual_operators = canonical_dual(spec.family(), *spec.target_operator).members();
    return spec;
  }
  throw FrameError(ErrorKind::UnknownKind, "unknown instance kind '" + kind + "'");
}

}  // namespace kgf
