#include "kgframe/hilbert_module.hpp"

#include <numeric>
#include <string>

namespace kgf {

ModuleVector::ModuleVector(int dim, int rank) : dim_(dim), flat_(CMatrix::Zero(dim, dim * rank)) {}

ModuleVector::ModuleVector(const std::vector<AlgebraElement>& blocks) {
  if (blocks.empty()) throw FrameError(ErrorKind::EmptyInput, "module vector needs at least one block");
  dim_ = blocks.front().dim();
  flat_.resize(dim_, dim_ * static_cast<Eigen::Index>(blocks.size()));
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    require_shape(blocks[i].dim() == dim_, "module vector blocks must share a dimension");
    flat_.middleCols(static_cast<Eigen::Index>(i) * dim_, dim_) = blocks[i].matrix();
  }
}

ModuleVector ModuleVector::from_flat(CMatrix flat, int dim) {
  require_shape(dim > 0 && flat.rows() == dim && flat.cols() % dim == 0,
                "flattened module vector must be d x (n*d)");
  ModuleVector x;
  x.dim_ = dim;
  x.flat_ = std::move(flat);
  return x;
}

AlgebraElement ModuleVector::block(int i) const {
  if (i < 0 || i >= rank()) throw FrameError(ErrorKind::IndexOutOfRange, "block index " + std::to_string(i));
  return AlgebraElement(flat_.middleCols(static_cast<Eigen::Index>(i) * dim_, dim_));
}

std::vector<AlgebraElement> ModuleVector::blocks() const {
  std::vector<AlgebraElement> out;
  out.reserve(rank());
  for (int i = 0; i < rank(); ++i) out.push_back(block(i));
  return out;
}

ModuleVector& ModuleVector::operator+=(const ModuleVector& o) {
  require_shape(dim_ == o.dim_ && rank() == o.rank(), "module vector shape mismatch in +");
  flat_ += o.flat_;
  return *this;
}

ModuleVector& ModuleVector::operator-=(const ModuleVector& o) {
  require_shape(dim_ == o.dim_ && rank() == o.rank(), "module vector shape mismatch in -");
  flat_ -= o.flat_;
  return *this;
}

ModuleVector operator*(Complex c, const ModuleVector& x) { return ModuleVector::from_flat(c * x.flat_, x.dim_); }

int ModuleSpace::rank() const { return std::accumulate(ranks.begin(), ranks.end(), 0); }

int ModuleSpace::offset(std::size_t i) const {
  return std::accumulate(ranks.begin(), ranks.begin() + static_cast<std::ptrdiff_t>(i), 0);
}

AlgebraElement inner_product(const ModuleVector& x, const ModuleVector& y) {
  require_shape(x.dim() == y.dim() && x.rank() == y.rank(), "inner_product: shape mismatch");
  return AlgebraElement(x.flat() * y.flat().adjoint());
}

ModuleVector module_action(const AlgebraElement& a, const ModuleVector& x) {
  require_shape(a.dim() == x.dim(), "module_action: dimension mismatch");
  return ModuleVector::from_flat(a.matrix() * x.flat(), x.dim());
}

double norm(const ModuleVector& x) { return std::sqrt(inner_product(x, x).norm()); }

ModuleVector direct_sum(const std::vector<ModuleVector>& parts) {
  if (parts.empty()) throw FrameError(ErrorKind::EmptyInput, "direct_sum of an empty list");
  const int d = parts.front().dim();
  Eigen::Index cols = 0;
  for (const auto& p : parts) {
    require_shape(p.dim() == d, "direct_sum: summands must share a dimension");
    cols += p.flat().cols();
  }
  CMatrix flat(d, cols);
  Eigen::Index at = 0;
  for (const auto& p : parts) {
    flat.middleCols(at, p.flat().cols()) = p.flat();
    at += p.flat().cols();
  }
  return ModuleVector::from_flat(std::move(flat), d);
}

ModuleVector coordinate_projection(const ModuleSpace& space, std::size_t i, const ModuleVector& x) {
  if (i >= space.ranks.size()) {
    throw FrameError(ErrorKind::IndexOutOfRange, "projection index " + std::to_string(i));
  }
  require_shape(x.dim() == space.dim && x.rank() == space.rank(),
                "coordinate_projection: vector does not live in the given direct sum");
  const int d = space.dim;
  return ModuleVector::from_flat(x.flat().middleCols(space.offset(i) * d, space.ranks[i] * d), d);
}

ModuleVector random_unit_vector(int dim, int rank, std::mt19937_64& rng) {
  CMatrix flat = dense::random_gaussian(dim, dim * rank, rng);
  const double s = dense::spectral_norm(flat);
  if (s > 0.0) flat /= s;
  return ModuleVector::from_flat(std::move(flat), dim);
}

std::vector<ModuleVector> canonical_vectors(int dim, int rank) {
  std::vector<ModuleVector> out;
  out.reserve(static_cast<std::size_t>(dim * rank));
  for (int k = 0; k < dim * rank; ++k) {
    CMatrix flat = CMatrix::Zero(dim, dim * rank);
    flat(0, k) = 1.0;
    out.push_back(ModuleVector::from_flat(std::move(flat), dim));
  }
  return out;
}

}  // namespace kgf
