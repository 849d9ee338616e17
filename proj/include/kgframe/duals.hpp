#pragma once

// Dual *-K-g-frames: {G_i} is a dual of {L_i} when K = sum_i L_i* G_i.

#include <optional>
#include <vector>

#include "kgframe/frames_core.hpp"

namespace kgf {

struct DualPair {
  OperatorFamily primary_family;
  OperatorFamily dual_family;
  ModuleOperator target;
  /// |sum_i L_i* G_i - K| in the flattened operator norm.
  double reconstruction_residual = 0.0;
  bool verified = false;
  /// Optimal Bessel bound sqrt|S_G| of the dual family.
  double dual_bessel_bound = 0.0;
  /// Pre-frame operator eta of the dual, when it was produced by a construction.
  std::optional<ModuleOperator> preframe;
};

/// sum_i L_i* G_i as an operator on H.
ModuleOperator reconstruction_operator(const OperatorFamily& primary, const OperatorFamily& dual);

DualPair verify_dual(const OperatorFamily& primary, const OperatorFamily& dual, const ModuleOperator& k,
                     double tol = 1e-10);

/// G_i = L_i S^{-1} K. Throws SingularFrameOperator when cond(S) > cond_cap.
OperatorFamily canonical_dual(const OperatorFamily& primary, const ModuleOperator& k,
                              double cond_cap = kDefaultCondCap);

struct MinimalDual {
  OperatorFamily family;
  ModuleOperator preframe;  // minimum-Frobenius-norm solution of theta* eta = K
};

/// Throws NoInclusion when R(K) is not inside R(theta*).
MinimalDual minimal_dual(const OperatorFamily& primary, const ModuleOperator& k, double rank_tol = kDefaultTol);

/// Canonical dual plus verification, with the pre-frame operator T S^{-1} K attached.
DualPair canonical_dual_pair(const OperatorFamily& primary, const ModuleOperator& k, double tol = 1e-10,
                             double cond_cap = kDefaultCondCap);
DualPair minimal_dual_pair(const OperatorFamily& primary, const ModuleOperator& k, double tol = 1e-10);

struct PreframeReport {
  double theta_eta_deviation = 0.0;  // |theta* eta - K|
  std::vector<double> projection_deviation;  // |G_i - Pi_i eta| per index
  double max_deviation = 0.0;
  std::size_t worst_index = 0;
};

/// Checks theta* eta = K and G_i = Pi_i eta. Uses the stored pre-frame
/// operator, falling back to the analysis operator of the dual family.
PreframeReport preframe_consistency(const DualPair& pair);

/// The coordinate projection Pi_i of the direct sum as a module operator.
ModuleOperator projection_operator(const ModuleSpace& space, std::size_t i);

}  // namespace kgf
