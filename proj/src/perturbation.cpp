#include "kgframe/perturbation.hpp"

#include <algorithm>
#include <cmath>

namespace kgf {

PerturbationEstimate perturbation_constant(const OperatorFamily& l, const OperatorFamily& g,
                                           const std::vector<ModuleVector>& samples) {
  require_shape(l.size() == g.size() && l.target_ranks() == g.target_ranks() && l.dim() == g.dim() &&
                    l.source_rank() == g.source_rank(),
                "perturbation_constant: family shapes differ");
  if (samples.empty()) throw FrameError(ErrorKind::EmptyInput, "perturbation_constant needs samples");
  const CMatrix sl = frame_operator(l).flat();
  const CMatrix sg = frame_operator(g).flat();
  const CMatrix sd = frame_operator(difference(l, g)).flat();

  PerturbationEstimate est;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const CMatrix& x = samples[i].flat();
    const double num = dense::spectral_norm(x * sd * x.adjoint());
    const double den = std::min(dense::spectral_norm(x * sl * x.adjoint()), dense::spectral_norm(x * sg * x.adjoint()));
    if (den < kDegenerateDenominator) {
      ++est.skipped;
      continue;
    }
    ++est.used;
    const double ratio = num / den;
    if (est.used == 1 || ratio > est.m) {
      est.m = ratio;
      est.worst_index = i;
    }
  }
  if (est.used == 0) throw FrameError(ErrorKind::AllSamplesDegenerate, "every sample had a vanishing denominator");
  return est;
}

PerturbedBounds perturbed_frame_bounds(double norm_a, double norm_b, double m) {
  const double grow = (1.0 + std::sqrt(m)) * (1.0 + std::sqrt(m));
  return {norm_a * norm_a / grow, grow * norm_b * norm_b};
}

double converse_constant(double norm_a, double norm_b, double norm_c, double norm_d, double lambda) {
  return std::min((1.0 + lambda * norm_b) / norm_c, 1.0 + norm_d / norm_a);
}

ConverseHypotheses converse_hypotheses(const ModuleOperator& k, const ModuleOperator& l, double tol) {
  ConverseHypotheses h;
  const auto id = ModuleOperator::identity(k.dim(), k.target_rank());
  h.k_coisometry = k.is_endomorphism() && (compose(op_adjoint(k), k) - id).norm() <= tol * (1.0 + k.norm() * k.norm());
  const DouglasReport dr = douglas_check(k, l, tol);
  h.range_included = dr.range_included;
  h.lambda = dr.lambda_min;
  return h;
}

PerturbationReport perturbation_check(const OperatorFamily& l, const OperatorFamily& g, const ModuleOperator& k,
                                      const ModuleOperator& lop, const FrameBounds& bounds_l,
                                      const CertConfig& cfg) {
  const FrameCertificate base = certify(l, k, bounds_l, cfg);
  if (base.verdict == Verdict::Falsified) {
    throw HypothesisFailed("unperturbed family is not a *-K-g-frame with the given bounds", base.witness);
  }
  const DouglasReport dr = douglas_check(lop, k, cfg.tol);
  if (!dr.range_included) throw HypothesisFailed("R(L) is not contained in R(K)", std::nullopt);

  const auto samples = sample_vectors(l.dim(), l.source_rank(), cfg.samples, cfg.seed);
  const PerturbationEstimate est = perturbation_constant(l, g, samples);

  PerturbationReport rep;
  rep.m_estimate = est.m;
  rep.samples_used = est.used;
  rep.samples_skipped = est.skipped;
  rep.worst_sample = samples[est.worst_index];
  rep.norm_a = bounds_l.lower.norm();
  rep.norm_b = bounds_l.upper.norm();
  const PerturbedBounds pb = perturbed_frame_bounds(rep.norm_a, rep.norm_b, est.m);
  rep.derived_lower = pb.lower;
  rep.derived_upper = pb.upper;
  rep.lambda = dr.lambda_min.value_or(0.0);
  rep.weak_conclusion = pb.lower < 1e-3 * rep.norm_a * rep.norm_a;

  // |L* f| <= lambda |K* f| moves the K-lower bound over to L.
  const double lower = rep.lambda > 0.0 ? std::sqrt(pb.lower) / rep.lambda : std::sqrt(pb.lower);
  const FrameBounds derived = FrameBounds::scalar(l.dim(), lower, std::sqrt(pb.upper));
  rep.margins = norm_bound_check(g, lop, derived, samples, cfg.tol);

  const CMatrix tg = analysis_operator(g).flat();
  rep.analysis_rank = dense::rank(tg, cfg.tol);
  rep.analysis_injective = rep.analysis_rank == tg.rows();

  const ConverseHypotheses ch = converse_hypotheses(k, lop, cfg.tol);
  if (ch.k_coisometry && ch.range_included && lower > 0.0) {
    rep.converse_m = converse_constant(rep.norm_a, rep.norm_b, lower, std::sqrt(pb.upper), ch.lambda.value_or(0.0));
  }
  return rep;
}

}  // namespace kgf
