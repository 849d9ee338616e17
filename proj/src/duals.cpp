#include "kgframe/duals.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kgf {

namespace {

void require_pair_shapes(const OperatorFamily& primary, const OperatorFamily& dual, const ModuleOperator& k) {
  require_shape(primary.size() == dual.size(), "dual families must have the same number of members");
  require_shape(primary.target_ranks() == dual.target_ranks(), "dual families must have matching target ranks");
  require_shape(primary.dim() == dual.dim() && primary.source_rank() == dual.source_rank(),
                "dual families must act on the same module");
  require_shape(k.dim() == primary.dim() && k.is_endomorphism() && k.source_rank() == primary.source_rank(),
                "K must be an endomorphism of H");
}

}  // namespace

ModuleOperator reconstruction_operator(const OperatorFamily& primary, const OperatorFamily& dual) {
  ModuleOperator sum(primary.dim(), primary.source_rank(), primary.source_rank());
  for (std::size_t i = 0; i < primary.size(); ++i) sum += compose(dual[i], op_adjoint(primary[i]));
  return sum;
}

DualPair verify_dual(const OperatorFamily& primary, const OperatorFamily& dual, const ModuleOperator& k,
                     double tol) {
  require_pair_shapes(primary, dual, k);
  DualPair pair;
  pair.primary_family = primary;
  pair.dual_family = dual;
  pair.target = k;
  pair.reconstruction_residual = (reconstruction_operator(primary, dual) - k).norm();
  // In finite dimensions every family is Bessel with bound sqrt|S_G|.
  pair.dual_bessel_bound = std::sqrt(frame_operator(dual).norm());
  pair.verified = pair.reconstruction_residual <= tol && std::isfinite(pair.dual_bessel_bound);
  return pair;
}

OperatorFamily canonical_dual(const OperatorFamily& primary, const ModuleOperator& k, double cond_cap) {
  const ModuleOperator s = frame_operator(primary);
  const double cond = dense::condition_number(s.flat());
  if (!(cond <= cond_cap)) {
    throw FrameError(ErrorKind::SingularFrameOperator,
                     "frame operator condition number " + std::to_string(cond) + " exceeds cap");
  }
  const ModuleOperator s_inv = ModuleOperator::from_flat(s.flat().inverse(), s.dim());
  const ModuleOperator pre = compose(k, s_inv);
  std::vector<ModuleOperator> out;
  for (const auto& m : primary.members()) out.push_back(compose(pre, m));
  return OperatorFamily(std::move(out));
}

ModuleOperator projection_operator(const ModuleSpace& space, std::size_t i) {
  if (i >= space.ranks.size()) throw FrameError(ErrorKind::IndexOutOfRange, "projection index");
  const int d = space.dim;
  CMatrix flat = CMatrix::Zero(space.rank() * d, space.ranks[i] * d);
  flat.middleRows(space.offset(i) * d, space.ranks[i] * d).setIdentity();
  return ModuleOperator::from_flat(std::move(flat), d);
}

MinimalDual minimal_dual(const OperatorFamily& primary, const ModuleOperator& k, double rank_tol) {
  const ModuleOperator theta_star = synthesis_operator(primary);
  const DouglasReport dr = douglas_check(k, theta_star, rank_tol);
  if (!dr.range_included) throw FrameError(ErrorKind::NoInclusion, "R(K) is not contained in R(theta*)");
  const ModuleOperator eta = compose(k, pseudoinverse(theta_star, rank_tol));
  const ModuleSpace space = primary.target_space();
  std::vector<ModuleOperator> out;
  for (std::size_t i = 0; i < primary.size(); ++i) out.push_back(compose(eta, projection_operator(space, i)));
  return {OperatorFamily(std::move(out)), eta};
}

DualPair canonical_dual_pair(const OperatorFamily& primary, const ModuleOperator& k, double tol, double cond_cap) {
  DualPair pair = verify_dual(primary, canonical_dual(primary, k, cond_cap), k, tol);
  const ModuleOperator s = frame_operator(primary);
  const ModuleOperator s_inv = ModuleOperator::from_flat(s.flat().inverse(), s.dim());
  pair.preframe = compose(compose(k, s_inv), analysis_operator(primary));
  return pair;
}

DualPair minimal_dual_pair(const OperatorFamily& primary, const ModuleOperator& k, double tol) {
  MinimalDual md = minimal_dual(primary, k);
  DualPair pair = verify_dual(primary, md.family, k, tol);
  pair.preframe = std::move(md.preframe);
  return pair;
}

PreframeReport preframe_consistency(const DualPair& pair) {
  const ModuleOperator eta = pair.preframe ? *pair.preframe : analysis_operator(pair.dual_family);
  const ModuleOperator theta_star = synthesis_operator(pair.primary_family);
  const ModuleSpace space = pair.primary_family.target_space();
  PreframeReport rep;
  rep.theta_eta_deviation = (compose(eta, theta_star) - pair.target).norm();
  rep.max_deviation = rep.theta_eta_deviation;
  double worst = -1.0;
  for (std::size_t i = 0; i < pair.dual_family.size(); ++i) {
    const double dev = (pair.dual_family[i] - compose(eta, projection_operator(space, i))).norm();
    rep.projection_deviation.push_back(dev);
    if (dev > worst) {
      worst = dev;
      rep.worst_index = i;
    }
    rep.max_deviation = std::max(rep.max_deviation, dev);
  }
  return rep;
}

}  // namespace kgf
