#pragma once

// Operator families, their analysis/synthesis/frame operators and the
// certification of *-K-g-frame inequalities
//
//   A <K* x, K* x> A*  <=  sum_i <L_i x, L_i x>  <=  B <x, x> B*   for all x in H.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kgframe/adjointable.hpp"

namespace kgf {

class OperatorFamily {
 public:
  OperatorFamily() = default;
  explicit OperatorFamily(std::vector<ModuleOperator> members);

  int dim() const { return members_.front().dim(); }
  int source_rank() const { return members_.front().source_rank(); }
  std::size_t size() const { return members_.size(); }
  const ModuleOperator& operator[](std::size_t i) const { return members_[i]; }
  const std::vector<ModuleOperator>& members() const { return members_; }
  std::vector<int> target_ranks() const;
  /// The direct sum of the member codomains.
  ModuleSpace target_space() const;

 private:
  std::vector<ModuleOperator> members_;
};

OperatorFamily scaled(Complex c, const OperatorFamily& f);
/// Member-wise difference f - g.
OperatorFamily difference(const OperatorFamily& f, const OperatorFamily& g);

enum class BoundsMode { Scalar, AlgebraValued };

struct FrameBounds {
  AlgebraElement lower;
  AlgebraElement upper;
  BoundsMode mode = BoundsMode::Scalar;

  static FrameBounds scalar(int dim, double alpha, double beta);
  static FrameBounds algebra(AlgebraElement lower, AlgebraElement upper);

  /// alpha and beta; only meaningful in scalar mode.
  double scalar_lower() const { return lower(0, 0).real(); }
  double scalar_upper() const { return upper(0, 0).real(); }
};

/// A = B.
bool is_tight(const FrameBounds& b, double tol = kDefaultTol);
/// A = B = 1.
bool is_normalized(const FrameBounds& b, double tol = kDefaultTol);

enum class CertMode { Auto, Exact, Sampled };
enum class Verdict { Certified, Falsified, Inconclusive };
enum class Side { None, Lower, Upper };

std::string to_string(CertMode m);
std::string to_string(Verdict v);
std::string to_string(Side s);

struct CertConfig {
  int samples = 1000;
  double tol = kDefaultTol;
  std::uint64_t seed = 20240601;
  int restarts = 20;
  int iterations = 200;
  double step = 1e-2;
  CertMode mode = CertMode::Auto;
  double cond_cap = kDefaultCondCap;
};

struct FrameCertificate {
  Verdict verdict = Verdict::Inconclusive;
  FrameBounds bounds;
  std::optional<ModuleVector> witness;
  Side failed_side = Side::None;
  double min_gap_lower = 0.0;
  double min_gap_upper = 0.0;
  std::size_t samples_used = 0;
  /// Exact or Sampled, never Auto.
  CertMode mode = CertMode::Exact;
  /// K = 0, so the lower inequality holds trivially.
  bool lower_vacuous = false;
};

/// T : x -> (L_i x)_i into the direct sum of the codomains.
ModuleOperator analysis_operator(const OperatorFamily& f);
/// T* : (x_i) -> sum_i L_i* x_i.
ModuleOperator synthesis_operator(const OperatorFamily& f);
/// S = T* T.
ModuleOperator frame_operator(const OperatorFamily& f);

/// The two gap elements at x; both are positive iff x satisfies the inequalities.
struct GapPair {
  AlgebraElement lower;  // sum <L_i x, L_i x> - A <K* x, K* x> A*
  AlgebraElement upper;  // B <x, x> B* - sum <L_i x, L_i x>
};
GapPair gap_at(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds, const ModuleVector& x);

/// Random unit vectors followed by the canonical vectors of H.
std::vector<ModuleVector> sample_vectors(int dim, int rank, int count, std::uint64_t seed);

FrameCertificate certify(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                         const CertConfig& cfg = {});

struct ScalarBounds {
  double alpha = 0.0;  // +inf when K = 0
  double beta = 0.0;
};

ScalarBounds optimal_scalar_bounds(const OperatorFamily& f, const ModuleOperator& k, double tol = kDefaultTol);

struct NormBoundReport {
  double worst_lower_margin = 0.0;  // min_f  |sum <L_i f, L_i f>| - |A K* f|^2
  double worst_upper_margin = 0.0;  // min_f  |B f|^2 - |sum <L_i f, L_i f>|
  std::size_t worst_lower_index = 0;
  std::size_t worst_upper_index = 0;
  std::size_t samples = 0;
  bool holds = true;
};

NormBoundReport norm_bound_check(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                                 const std::vector<ModuleVector>& samples, double tol = kDefaultTol);

/// {L_i U*} for a co-isometry U commuting with K; same bounds as the input.
OperatorFamily transform_coisometry(const OperatorFamily& f, const ModuleOperator& k, const ModuleOperator& u,
                                    double tol = kDefaultTol);

struct PrecomposeResult {
  OperatorFamily family;   // {L_i (L*)^p}
  ModuleOperator target;   // L^p K
  FrameBounds bounds;      // (A, B |L|^p)
};

PrecomposeResult transform_precompose(const OperatorFamily& f, const ModuleOperator& k, const FrameBounds& bounds,
                                      const ModuleOperator& l, int power);

/// Given a K-bound pair and R(L) in R(K), certifies f as a *-L-g-frame with
/// lower bound A / lambda, where L L* <= lambda^2 K K*.
FrameCertificate range_transfer_check(const OperatorFamily& f, const ModuleOperator& k, const ModuleOperator& l,
                                      const FrameBounds& bounds_k, const CertConfig& cfg = {});

}  // namespace kgf
