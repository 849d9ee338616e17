#pragma once

// Perturbation of *-K-g-frames: if
//   |sum <(L_i - G_i) f, (L_i - G_i) f>| <= M min(|sum <L_i f, L_i f>|, |sum <G_i f, G_i f>|)
// then {G_i} inherits frame bounds |A|^2/(1+sqrt M)^2 and (1+sqrt M)^2 |B|^2.

#include <optional>
#include <string>
#include <vector>

#include "kgframe/frames_core.hpp"

namespace kgf {

/// Denominators below this are excluded from the ratio.
inline constexpr double kDegenerateDenominator = 1e-12;

struct PerturbationEstimate {
  double m = 0.0;
  std::size_t used = 0;
  std::size_t skipped = 0;
  std::size_t worst_index = 0;
};

PerturbationEstimate perturbation_constant(const OperatorFamily& l, const OperatorFamily& g,
                                           const std::vector<ModuleVector>& samples);

struct PerturbedBounds {
  double lower = 0.0;
  double upper = 0.0;
};

/// (|A|^2 / (1+sqrt M)^2, (1+sqrt M)^2 |B|^2)
PerturbedBounds perturbed_frame_bounds(double norm_a, double norm_b, double m);

/// min((1 + lambda |B|) / |C|, 1 + |D| / |A|)
double converse_constant(double norm_a, double norm_b, double norm_c, double norm_d, double lambda);

struct ConverseHypotheses {
  bool k_coisometry = false;
  bool range_included = false;  // R(K) in R(L)
  std::optional<double> lambda;  // K K* <= lambda^2 L L*
};

ConverseHypotheses converse_hypotheses(const ModuleOperator& k, const ModuleOperator& l, double tol = kDefaultTol);

class HypothesisFailed : public FrameError {
 public:
  HypothesisFailed(std::string hypothesis, std::optional<ModuleVector> witness)
      : FrameError(ErrorKind::HypothesisFailed, hypothesis),
        hypothesis_(std::move(hypothesis)),
        witness_(std::move(witness)) {}

  const std::string& hypothesis() const { return hypothesis_; }
  const std::optional<ModuleVector>& witness() const { return witness_; }

 private:
  std::string hypothesis_;
  std::optional<ModuleVector> witness_;
};

struct PerturbationReport {
  double m_estimate = 0.0;
  std::size_t samples_used = 0;
  std::size_t samples_skipped = 0;
  double norm_a = 0.0;
  double norm_b = 0.0;
  double derived_lower = 0.0;
  double derived_upper = 0.0;
  /// From R(Lop) in R(K): Lop Lop* <= lambda^2 K K*.
  double lambda = 0.0;
  ModuleVector worst_sample;
  NormBoundReport margins;
  /// Rank of the perturbed analysis operator (flattened), and whether it is injective.
  int analysis_rank = 0;
  bool analysis_injective = false;
  bool weak_conclusion = false;
  std::optional<double> converse_m;
};

PerturbationReport perturbation_check(const OperatorFamily& l, const OperatorFamily& g, const ModuleOperator& k,
                                      const ModuleOperator& lop, const FrameBounds& bounds_l,
                                      const CertConfig& cfg = {});

}  // namespace kgf
