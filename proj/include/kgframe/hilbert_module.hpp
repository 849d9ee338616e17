#pragma once

// The free left Hilbert A-module H = A^n.
//
// A vector x = (x_1, ..., x_n) is stored flattened as the d x (n*d) block row
// [x_1 ... x_n], so that the A-valued inner product is <x, y> = X * Y^*
// (linear in the first slot, conjugate-linear in the second).

#include <cstddef>
#include <random>
#include <vector>

#include "kgframe/matrix_cstar.hpp"

namespace kgf {

class ModuleVector {
 public:
  ModuleVector() = default;
  /// Zero vector of H = A^rank over M_dim.
  ModuleVector(int dim, int rank);
  explicit ModuleVector(const std::vector<AlgebraElement>& blocks);

  /// Wraps a flattened d x (n*d) block row.
  static ModuleVector from_flat(CMatrix flat, int dim);

  int dim() const { return dim_; }
  int rank() const { return dim_ == 0 ? 0 : static_cast<int>(flat_.cols()) / dim_; }

  AlgebraElement block(int i) const;
  std::vector<AlgebraElement> blocks() const;
  const CMatrix& flat() const { return flat_; }

  ModuleVector& operator+=(const ModuleVector& o);
  ModuleVector& operator-=(const ModuleVector& o);
  friend ModuleVector operator+(ModuleVector a, const ModuleVector& b) { return a += b; }
  friend ModuleVector operator-(ModuleVector a, const ModuleVector& b) { return a -= b; }
  friend ModuleVector operator*(Complex c, const ModuleVector& x);

 private:
  int dim_ = 0;
  CMatrix flat_;
};

/// Descriptor of H = A^rank, or of a direct sum when `ranks` has several entries.
struct ModuleSpace {
  int dim = 1;
  std::vector<int> ranks;

  static ModuleSpace single(int dim, int rank) { return {dim, {rank}}; }
  int rank() const;
  /// First block index of summand i.
  int offset(std::size_t i) const;
};

AlgebraElement inner_product(const ModuleVector& x, const ModuleVector& y);

/// Left action (a x_1, ..., a x_n).
ModuleVector module_action(const AlgebraElement& a, const ModuleVector& x);

/// |x| = |<x,x>|^{1/2}
double norm(const ModuleVector& x);

ModuleVector direct_sum(const std::vector<ModuleVector>& parts);

ModuleVector coordinate_projection(const ModuleSpace& space, std::size_t i, const ModuleVector& x);

/// Independent standard complex Gaussian blocks scaled to unit module norm.
ModuleVector random_unit_vector(int dim, int rank, std::mt19937_64& rng);

/// The d*n vectors whose flattened form has a single 1 in row 0, one per column.
std::vector<ModuleVector> canonical_vectors(int dim, int rank);

}  // namespace kgf
