#pragma once

// Adjointable A-linear maps A^n -> A^m.
//
// H is a left module, so operators act by right multiplication with an
// n x m block matrix g over A:  (T x)_j = sum_i x_i g_ij.  In flattened form
// apply(T, x) is X * flatten(T), composition is ordinary matrix product in
// action order, and the adjoint is the full conjugate transpose.

#include <limits>
#include <optional>
#include <random>

#include "kgframe/hilbert_module.hpp"

namespace kgf {

class ModuleOperator {
 public:
  ModuleOperator() = default;
  /// Zero operator A^source_rank -> A^target_rank.
  ModuleOperator(int dim, int source_rank, int target_rank);

  static ModuleOperator identity(int dim, int rank);
  static ModuleOperator from_flat(CMatrix flat, int dim);
  /// blocks[i][j] is g_ij, i over the source index, j over the target index.
  static ModuleOperator from_blocks(const std::vector<std::vector<AlgebraElement>>& blocks);

  int dim() const { return dim_; }
  int source_rank() const { return dim_ == 0 ? 0 : static_cast<int>(flat_.rows()) / dim_; }
  int target_rank() const { return dim_ == 0 ? 0 : static_cast<int>(flat_.cols()) / dim_; }
  bool is_endomorphism() const { return source_rank() == target_rank(); }

  AlgebraElement block(int i, int j) const;
  const CMatrix& flat() const { return flat_; }
  /// Operator norm on the module, equal to the spectral norm of the flattened matrix.
  double norm() const { return dense::spectral_norm(flat_); }

  ModuleOperator& operator+=(const ModuleOperator& o);
  ModuleOperator& operator-=(const ModuleOperator& o);
  friend ModuleOperator operator+(ModuleOperator a, const ModuleOperator& b) { return a += b; }
  friend ModuleOperator operator-(ModuleOperator a, const ModuleOperator& b) { return a -= b; }
  friend ModuleOperator operator*(Complex c, const ModuleOperator& t);

 private:
  int dim_ = 0;
  CMatrix flat_;
};

ModuleVector apply(const ModuleOperator& t, const ModuleVector& x);
ModuleOperator op_adjoint(const ModuleOperator& t);
/// x -> s(t(x)).
ModuleOperator compose(const ModuleOperator& t, const ModuleOperator& s);
/// t applied `power` times; power 0 gives the identity.
ModuleOperator op_power(const ModuleOperator& t, int power);
CMatrix flatten(const ModuleOperator& t);
ModuleOperator unflatten(const CMatrix& flat, int dim);
ModuleOperator pseudoinverse(const ModuleOperator& t, double rank_tol = kDefaultTol);

/// t t* as an endomorphism of the target module.
ModuleOperator outer_square(const ModuleOperator& t);

ModuleOperator random_operator(int dim, int source_rank, int target_rank, std::mt19937_64& rng);

struct DouglasReport {
  bool range_included = false;
  /// Smallest lambda >= 0 with K K* <= lambda^2 L L*.
  std::optional<double> lambda_min;
  /// D with K = L D, i.e. K = compose(D, L).
  std::optional<ModuleOperator> factor;
  double residual = 0.0;
  int rank_l = 0;
  int rank_augmented = 0;
};

/// Range inclusion, majorization and factorization tests for R(K) in R(L).
/// The three verdicts are computed independently; disagreement throws
/// ToleranceConflict.
DouglasReport douglas_check(const ModuleOperator& k, const ModuleOperator& l, double tol = kDefaultTol);

inline constexpr double kPencilUnbounded = std::numeric_limits<double>::infinity();

/// Largest alpha >= 0 with alpha * P <= S; +inf when P vanishes on the relevant space.
double operator_pencil_alpha(const ModuleOperator& p, const ModuleOperator& s, double tol = kDefaultTol);

namespace dense {
double pencil_alpha(const CMatrix& p, const CMatrix& s, double tol);
}

}  // namespace kgf
