#include "kgframe/frames_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kgf {

OperatorFamily::OperatorFamily(std::vector<ModuleOperator> members) : members_(std::move(members)) {
  if (members_.empty()) throw FrameError(ErrorKind::EmptyInput, "operator family must be non-empty");
  for (const auto& m : members_) {
    require_shape(m.dim() == members_.front().dim() && m.source_rank() == members_.front().source_rank(),
                  "family members must share algebra dimension and source rank");
  }
}

std::vector<int> OperatorFamily::target_ranks() const {
  std::vector<int> out;
  out.reserve(members_.size());
  for (const auto& m : members_) out.push_back(m.target_rank());
  return out;
}

ModuleSpace OperatorFamily::target_space() const { return {dim(), target_ranks()}; }

OperatorFamily scaled(Complex c, const OperatorFamily& f) {
  std::vector<ModuleOperator> out;
  for (const auto& m : f.members()) out.push_back(c * m);
  return OperatorFamily(std::move(out));
}

OperatorFamily difference(const OperatorFamily& f, const OperatorFamily& g) {
  require_shape(f.size() == g.size(), "family difference: member counts differ");
  std::vector<ModuleOperator> out;
  for (std::size_t i = 0; i < f.size(); ++i) out.push_back(f[i] - g[i]);
  return OperatorFamily(std::move(out));
}

FrameBounds FrameBounds::scalar(int dim, double alpha, double beta) {
  return {AlgebraElement::scalar(dim, alpha), AlgebraElement::scalar(dim, beta), BoundsMode::Scalar};
}

FrameBounds FrameBounds::algebra(AlgebraElement lower, AlgebraElement upper) {
  require_shape(lower.dim() == upper.dim(), "frame bounds must share a dimension");
  return {std::move(lower), std::move(upper), BoundsMode::AlgebraValued};
}

bool is_tight(const FrameBounds& b, double tol) {
  return (b.lower - b.upper).norm() <= tol * (1.0 + b.upper.norm());
}

bool is_normalized(const FrameBounds& b, double tol) {
  const auto one = AlgebraElement::identity(b.lower.dim());
  return is_tight(b, tol) && (b.upper - one).norm() <= tol;
}

std::string to_string(CertMode m) {
  switch (m) {
    case CertMode::Auto: return "auto";
    case CertMode::Exact: return "exact";
    case CertMode::Sampled: return "sampled";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Certified: return "certified";
    case Verdict::Falsified: return "falsified";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(Side s) {
  switch (s) {
    case Side::None: return "none";
    case Side::Lower: return "lower";
    case Side::Upper: return "upper";
  }
  return "?";
}

ModuleOperator analysis_operator(const OperatorFamily& f) {
  const int d = f.dim();
  Eigen::Index cols = 0;
  for (const auto& m : f.members()) cols += m.flat().cols();
  CMatrix flat(f.source_rank() * d, cols);
  Eigen::Index at = 0;
  for (const auto& m : f.members()) {
    flat.middleCols(at, m.flat().cols()) = m.flat();
    at += m.flat().cols();
  }
  return ModuleOperator::from_flat(std::move(flat), d);
}

ModuleOperator synthesis_operator(const OperatorFamily& f) { return op_adjoint(analysis_operator(f)); }

ModuleOperator frame_operator(const OperatorFamily& f) {
  const ModuleOperator t = analysis_operator(f);
  return compose(t, op_adjoint(t));
}

namespace {

void check_shapes(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds) {
  require_shape(k.dim() == f.dim() && k.is_endomorphism() && k.source_rank() == f.source_rank(),
                "K must be an endomorphism of the family's source module");
  require_shape(bounds.lower.dim() == f.dim() && bounds.upper.dim() == f.dim(),
                "frame bounds must live in the family's algebra");
}

// Flattened data reused across every gap evaluation.
struct GapKernel {
  CMatrix s;  // frame operator
  CMatrix p;  // K K*
  CMatrix a;
  CMatrix b;

  GapKernel(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds)
      : s(frame_operator(f).flat()), p(outer_square(k).flat()), a(bounds.lower.matrix()), b(bounds.upper.matrix()) {}

  CMatrix frame_sum(const CMatrix& x) const { return dense::hermitian_part(x * s * x.adjoint()); }
  CMatrix lower(const CMatrix& x) const {
    const CMatrix ax = a * x;
    return dense::hermitian_part(x * s * x.adjoint() - ax * p * ax.adjoint());
  }
  CMatrix upper(const CMatrix& x) const {
    const CMatrix bx = b * x;
    return dense::hermitian_part(bx * bx.adjoint() - x * s * x.adjoint());
  }
};

struct Probe {
  double value = 0.0;
  bool violated = false;
};

Probe probe(const CMatrix& gap, double tol) {
  const PositivityVerdict v = dense::check_positive(gap, tol);
  return {v.min_eigenvalue, !v.is_positive};
}

CMatrix normalize_module(CMatrix x) {
  const double s = dense::spectral_norm(x);
  if (s > 0.0) x /= s;
  return x;
}

// Smallest eigenvalue of the selected gap together with the direction of
// steepest descent with respect to the flattened vector.
struct Objective {
  double value;
  CMatrix gradient;
};

Objective lower_objective(const GapKernel& g, const CMatrix& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g.lower(x));
  const CVector u = es.eigenvectors().col(0);
  const CVector w = g.a.adjoint() * u;
  CMatrix grad = 2.0 * (u * (u.adjoint() * x * g.s) - w * (w.adjoint() * x * g.p));
  return {es.eigenvalues()(0), std::move(grad)};
}

Objective upper_objective(const GapKernel& g, const CMatrix& x) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(g.upper(x));
  const CVector u = es.eigenvectors().col(0);
  const CVector w = g.b.adjoint() * u;
  CMatrix grad = 2.0 * (w * (w.adjoint() * x) - u * (u.adjoint() * x * g.s));
  return {es.eigenvalues()(0), std::move(grad)};
}

// Projected gradient descent on the module unit sphere with backtracking.
template <class Fn>
CMatrix descend(const Fn& objective, CMatrix x, const CertConfig& cfg, double stop_below) {
  x = normalize_module(std::move(x));
  Objective cur = objective(x);
  double step = cfg.step;
  for (int it = 0; it < cfg.iterations; ++it) {
    const double gn = cur.gradient.norm();
    if (gn == 0.0 || cur.value < stop_below) break;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      CMatrix trial = normalize_module(x - (step / gn) * cur.gradient);
      Objective next = objective(trial);
      if (next.value < cur.value) {
        x = std::move(trial);
        cur = std::move(next);
        step *= 1.5;
        moved = true;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return x;
}

FrameCertificate certify_exact(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                               const CertConfig& cfg) {
  FrameCertificate cert;
  cert.bounds = bounds;
  cert.mode = CertMode::Exact;
  const int d = f.dim();
  const double alpha = bounds.scalar_lower();
  const double beta = bounds.scalar_upper();
  const CMatrix s = frame_operator(f).flat();
  const CMatrix p = outer_square(k).flat();
  const Eigen::Index nd = s.rows();

  const CMatrix lower_gap = s - (alpha * alpha) * p;
  const CMatrix upper_gap = (beta * beta) * CMatrix::Identity(nd, nd) - s;
  const PositivityVerdict lv = dense::check_positive(lower_gap, cfg.tol);
  const PositivityVerdict uv = dense::check_positive(upper_gap, cfg.tol);
  cert.min_gap_lower = lv.min_eigenvalue;
  cert.min_gap_upper = uv.min_eigenvalue;

  auto witness_from = [&](const CMatrix& gap) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(dense::hermitian_part(gap));
    CMatrix x = CMatrix::Zero(d, nd);
    x.row(0) = es.eigenvectors().col(0).adjoint();
    return ModuleVector::from_flat(std::move(x), d);
  };

  if (!lv.is_positive) {
    cert.verdict = Verdict::Falsified;
    cert.failed_side = Side::Lower;
    cert.witness = witness_from(lower_gap);
  } else if (!uv.is_positive) {
    cert.verdict = Verdict::Falsified;
    cert.failed_side = Side::Upper;
    cert.witness = witness_from(upper_gap);
  } else {
    cert.verdict = Verdict::Certified;
  }
  return cert;
}

FrameCertificate certify_sampled(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                                 const CertConfig& cfg) {
  FrameCertificate cert;
  cert.bounds = bounds;
  cert.mode = CertMode::Sampled;
  cert.min_gap_lower = std::numeric_limits<double>::infinity();
  cert.min_gap_upper = std::numeric_limits<double>::infinity();
  const GapKernel g(f, k, bounds);
  const int d = f.dim();
  const int n = f.source_rank();

  CMatrix best_lower, best_upper;
  auto record = [&](const CMatrix& x) {
    const Probe lo = probe(g.lower(x), cfg.tol);
    const Probe up = probe(g.upper(x), cfg.tol);
    ++cert.samples_used;
    if (lo.value < cert.min_gap_lower) {
      cert.min_gap_lower = lo.value;
      best_lower = x;
    }
    if (up.value < cert.min_gap_upper) {
      cert.min_gap_upper = up.value;
      best_upper = x;
    }
    if (cert.verdict != Verdict::Falsified && (lo.violated || up.violated)) {
      cert.verdict = Verdict::Falsified;
      cert.failed_side = lo.violated ? Side::Lower : Side::Upper;
      cert.witness = ModuleVector::from_flat(x, d);
    }
  };

  for (const auto& x : sample_vectors(d, n, cfg.samples, cfg.seed)) {
    record(x.flat());
    if (cert.verdict == Verdict::Falsified) return cert;
  }
  if (cert.samples_used == 0) return cert;

  // Stop once the objective is clearly below the violation threshold.
  const double stop_below = -2.0 * cfg.tol * (1.0 + g.s.norm());
  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  for (int r = 0; r < cfg.restarts; ++r) {
    CMatrix start_lo = r == 0 ? best_lower : random_unit_vector(d, n, rng).flat();
    CMatrix start_up = r == 0 ? best_upper : random_unit_vector(d, n, rng).flat();
    record(descend([&](const CMatrix& x) { return lower_objective(g, x); }, start_lo, cfg, stop_below));
    if (cert.verdict == Verdict::Falsified) return cert;
    record(descend([&](const CMatrix& x) { return upper_objective(g, x); }, start_up, cfg, stop_below));
    if (cert.verdict == Verdict::Falsified) return cert;
  }
  cert.verdict = Verdict::Certified;
  return cert;
}

}  // namespace

GapPair gap_at(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds, const ModuleVector& x) {
  check_shapes(f, k, bounds);
  require_shape(x.dim() == f.dim() && x.rank() == f.source_rank(), "gap_at: vector not in H");
  const GapKernel g(f, k, bounds);
  return {AlgebraElement(g.lower(x.flat())), AlgebraElement(g.upper(x.flat()))};
}

std::vector<ModuleVector> sample_vectors(int dim, int rank, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<ModuleVector> out;
  out.reserve(static_cast<std::size_t>(std::max(count, 0) + dim * rank));
  for (int i = 0; i < count; ++i) out.push_back(random_unit_vector(dim, rank, rng));
  for (auto& e : canonical_vectors(dim, rank)) out.push_back(std::move(e));
  return out;
}

FrameCertificate certify(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                         const CertConfig& cfg) {
  check_shapes(f, k, bounds);
  if (!is_strictly_nonzero(bounds.lower, cfg.cond_cap) || !is_strictly_nonzero(bounds.upper, cfg.cond_cap)) {
    throw FrameError(ErrorKind::NotStrictlyNonzero, "frame bounds must be invertible elements of A");
  }
  CertMode mode = cfg.mode;
  if (mode == CertMode::Auto) mode = bounds.mode == BoundsMode::Scalar ? CertMode::Exact : CertMode::Sampled;
  if (mode == CertMode::Exact && bounds.mode != BoundsMode::Scalar) {
    throw FrameError(ErrorKind::ShapeMismatch, "exact certification requires scalar bounds");
  }
  FrameCertificate cert = mode == CertMode::Exact ? certify_exact(f, k, bounds, cfg) : certify_sampled(f, k, bounds, cfg);
  cert.lower_vacuous = k.norm() == 0.0;
  return cert;
}

ScalarBounds optimal_scalar_bounds(const OperatorFamily& f, const ModuleOperator& k, double tol) {
  require_shape(k.dim() == f.dim() && k.is_endomorphism() && k.source_rank() == f.source_rank(),
                "K must be an endomorphism of the family's source module");
  const ModuleOperator s = frame_operator(f);
  ScalarBounds out;
  const double a2 = operator_pencil_alpha(outer_square(k), s, tol);
  out.alpha = std::sqrt(a2);
  out.beta = std::sqrt(s.norm());
  return out;
}

NormBoundReport norm_bound_check(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                                 const std::vector<ModuleVector>& samples, double tol) {
  check_shapes(f, k, bounds);
  const GapKernel g(f, k, bounds);
  NormBoundReport rep;
  rep.samples = samples.size();
  rep.worst_lower_margin = std::numeric_limits<double>::infinity();
  rep.worst_upper_margin = std::numeric_limits<double>::infinity();
  if (samples.empty()) {
    rep.worst_lower_margin = rep.worst_upper_margin = 0.0;
    return rep;
  }
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const CMatrix& x = samples[i].flat();
    const CMatrix akx = g.a * x;
    const CMatrix bx = g.b * x;
    const double lhs = dense::spectral_norm(akx * g.p * akx.adjoint());
    const double mid = dense::spectral_norm(g.frame_sum(x));
    const double rhs = dense::spectral_norm(bx * bx.adjoint());
    const double lo = mid - lhs;
    const double up = rhs - mid;
    if (lo < rep.worst_lower_margin) {
      rep.worst_lower_margin = lo;
      rep.worst_lower_index = i;
    }
    if (up < rep.worst_upper_margin) {
      rep.worst_upper_margin = up;
      rep.worst_upper_index = i;
    }
    const double band = tol * (1.0 + std::max({lhs, mid, rhs}));
    if (lo < -band || up < -band) rep.holds = false;
  }
  return rep;
}

OperatorFamily transform_coisometry(const OperatorFamily& f, const ModuleOperator& k, const ModuleOperator& u,
                                    double tol) {
  require_shape(u.dim() == f.dim() && u.is_endomorphism() && u.source_rank() == f.source_rank(),
                "U must be an endomorphism of the family's source module");
  require_shape(k.dim() == f.dim() && k.is_endomorphism() && k.source_rank() == f.source_rank(),
                "K must be an endomorphism of the family's source module");
  const ModuleOperator ustar = op_adjoint(u);
  const ModuleOperator uu = compose(ustar, u);  // U U*
  const auto id = ModuleOperator::identity(u.dim(), u.source_rank());
  if ((uu - id).norm() > tol * (1.0 + u.norm() * u.norm())) {
    throw FrameError(ErrorKind::NotCoisometry, "U U* differs from the identity");
  }
  if ((compose(u, k) - compose(k, u)).norm() > tol * (1.0 + k.norm() * u.norm())) {
    throw FrameError(ErrorKind::NotCommuting, "K U differs from U K");
  }
  std::vector<ModuleOperator> out;
  for (const auto& m : f.members()) out.push_back(compose(ustar, m));
  return OperatorFamily(std::move(out));
}

PrecomposeResult transform_precompose(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                                      const ModuleOperator& l, int power) {
  require_shape(l.dim() == f.dim() && l.is_endomorphism() && l.source_rank() == f.source_rank(),
                "L must be an endomorphism of the family's source module");
  require_shape(k.dim() == f.dim() && k.is_endomorphism() && k.source_rank() == f.source_rank(),
                "K must be an endomorphism of the family's source module");
  if (power < 1) throw FrameError(ErrorKind::ShapeMismatch, "transform_precompose: power must be positive");
  const ModuleOperator lstar_p = op_power(op_adjoint(l), power);
  std::vector<ModuleOperator> out;
  for (const auto& m : f.members()) out.push_back(compose(lstar_p, m));
  const double grow = std::pow(l.norm(), power);
  FrameBounds b = bounds;
  b.upper = Complex(grow) * bounds.upper;
  return {OperatorFamily(std::move(out)), compose(k, op_power(l, power)), std::move(b)};
}

FrameCertificate range_transfer_check(const OperatorFamily& f, const ModuleOperator& k, const ModuleOperator& l,
                                      const FrameBounds& bounds_k, const CertConfig& cfg) {
  const DouglasReport dr = douglas_check(l, k, cfg.tol);
  if (!dr.range_included) throw FrameError(ErrorKind::NoInclusion, "R(L) is not contained in R(K)");
  FrameBounds b = bounds_k;
  const double lambda = dr.lambda_min.value_or(0.0);
  if (lambda > 0.0) b.lower = Complex(1.0 / lambda) * bounds_k.lower;
  return certify(f, l, b, cfg);
}

}  // namespace kgf
