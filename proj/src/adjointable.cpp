#include "kgframe/adjointable.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kgf {

ModuleOperator::ModuleOperator(int dim, int source_rank, int target_rank)
    : dim_(dim), flat_(CMatrix::Zero(dim * source_rank, dim * target_rank)) {}

ModuleOperator ModuleOperator::identity(int dim, int rank) {
  return from_flat(CMatrix::Identity(dim * rank, dim * rank), dim);
}

ModuleOperator ModuleOperator::from_flat(CMatrix flat, int dim) {
  require_shape(dim > 0 && flat.rows() % dim == 0 && flat.cols() % dim == 0,
                "flattened operator must be (n*d) x (m*d)");
  ModuleOperator t;
  t.dim_ = dim;
  t.flat_ = std::move(flat);
  return t;
}

ModuleOperator ModuleOperator::from_blocks(const std::vector<std::vector<AlgebraElement>>& blocks) {
  if (blocks.empty() || blocks.front().empty()) {
    throw FrameError(ErrorKind::EmptyInput, "operator needs at least one block");
  }
  const int d = blocks.front().front().dim();
  const auto n = static_cast<int>(blocks.size());
  const auto m = static_cast<int>(blocks.front().size());
  CMatrix flat(n * d, m * d);
  for (int i = 0; i < n; ++i) {
    require_shape(static_cast<int>(blocks[i].size()) == m, "operator block rows must have equal length");
    for (int j = 0; j < m; ++j) {
      require_shape(blocks[i][j].dim() == d, "operator blocks must share a dimension");
      flat.block(i * d, j * d, d, d) = blocks[i][j].matrix();
    }
  }
  return from_flat(std::move(flat), d);
}

AlgebraElement ModuleOperator::block(int i, int j) const {
  if (i < 0 || j < 0 || i >= source_rank() || j >= target_rank()) {
    throw FrameError(ErrorKind::IndexOutOfRange,
                     "operator block (" + std::to_string(i) + "," + std::to_string(j) + ")");
  }
  return AlgebraElement(flat_.block(i * dim_, j * dim_, dim_, dim_));
}

ModuleOperator& ModuleOperator::operator+=(const ModuleOperator& o) {
  require_shape(flat_.rows() == o.flat_.rows() && flat_.cols() == o.flat_.cols() && dim_ == o.dim_,
                "operator shape mismatch in +");
  flat_ += o.flat_;
  return *this;
}

ModuleOperator& ModuleOperator::operator-=(const ModuleOperator& o) {
  require_shape(flat_.rows() == o.flat_.rows() && flat_.cols() == o.flat_.cols() && dim_ == o.dim_,
                "operator shape mismatch in -");
  flat_ -= o.flat_;
  return *this;
}

ModuleOperator operator*(Complex c, const ModuleOperator& t) { return ModuleOperator::from_flat(c * t.flat_, t.dim_); }

ModuleVector apply(const ModuleOperator& t, const ModuleVector& x) {
  require_shape(t.dim() == x.dim() && t.source_rank() == x.rank(), "apply: shape mismatch");
  return ModuleVector::from_flat(x.flat() * t.flat(), x.dim());
}

ModuleOperator op_adjoint(const ModuleOperator& t) { return ModuleOperator::from_flat(t.flat().adjoint(), t.dim()); }

ModuleOperator compose(const ModuleOperator& t, const ModuleOperator& s) {
  require_shape(t.dim() == s.dim() && t.target_rank() == s.source_rank(), "compose: shape mismatch");
  return ModuleOperator::from_flat(t.flat() * s.flat(), t.dim());
}

ModuleOperator op_power(const ModuleOperator& t, int power) {
  require_shape(t.is_endomorphism(), "op_power needs an endomorphism");
  if (power < 0) throw FrameError(ErrorKind::ShapeMismatch, "op_power: negative power");
  ModuleOperator out = ModuleOperator::identity(t.dim(), t.source_rank());
  for (int k = 0; k < power; ++k) out = compose(out, t);
  return out;
}

CMatrix flatten(const ModuleOperator& t) { return t.flat(); }

ModuleOperator unflatten(const CMatrix& flat, int dim) { return ModuleOperator::from_flat(flat, dim); }

ModuleOperator pseudoinverse(const ModuleOperator& t, double rank_tol) {
  return ModuleOperator::from_flat(dense::pinv(t.flat(), rank_tol), t.dim());
}

ModuleOperator outer_square(const ModuleOperator& t) { return compose(op_adjoint(t), t); }

ModuleOperator random_operator(int dim, int source_rank, int target_rank, std::mt19937_64& rng) {
  return ModuleOperator::from_flat(dense::random_gaussian(dim * source_rank, dim * target_rank, rng), dim);
}

DouglasReport douglas_check(const ModuleOperator& k, const ModuleOperator& l, double tol) {
  require_shape(k.dim() == l.dim() && k.target_rank() == l.target_rank(),
                "douglas_check: K and L need a common target module");
  const CMatrix& kf = k.flat();
  const CMatrix& lf = l.flat();
  const double scale = std::max(dense::spectral_norm(kf), dense::spectral_norm(lf));

  DouglasReport rep;
  if (scale == 0.0) {
    rep.range_included = true;
    rep.lambda_min = 0.0;
    rep.factor = ModuleOperator(k.dim(), k.source_rank(), l.source_rank());
    return rep;
  }
  const double thr = tol * scale;

  // Route 1: row-space inclusion by rank comparison.
  CMatrix stacked(lf.rows() + kf.rows(), lf.cols());
  stacked << lf, kf;
  rep.rank_l = dense::rank(lf, tol, scale);
  rep.rank_augmented = dense::rank(stacked, tol, scale);
  const bool by_rank = rep.rank_augmented == rep.rank_l;

  // Route 2: majorization K K* <= lambda^2 L L*, restricted to range(L L*).
  Eigen::JacobiSVD<CMatrix> svd(lf, Eigen::ComputeFullV);
  const RVector& sv = svd.singularValues();
  int r = 0;
  while (r < sv.size() && sv(r) > thr) ++r;
  const CMatrix& v = svd.matrixV();
  const CMatrix p = kf.adjoint() * kf;
  const CMatrix ker = v.rightCols(v.cols() - r);
  const double off_range = ker.cols() ? dense::spectral_norm(kf * ker) : 0.0;
  const bool by_majorization = off_range <= thr;
  if (by_majorization) {
    if (r == 0) {
      rep.lambda_min = 0.0;
    } else {
      const RVector inv = sv.head(r).cwiseInverse();
      const CMatrix w = inv.cast<Complex>().asDiagonal();
      const CMatrix rayleigh = w * (v.leftCols(r).adjoint() * p * v.leftCols(r)) * w;
      rep.lambda_min = std::sqrt(std::max(0.0, dense::max_hermitian_eigenvalue(rayleigh)));
    }
  }

  // Route 3: factor D = K L^+ and its residual.
  const CMatrix dflat = kf * dense::pinv(lf, tol);
  rep.residual = dense::spectral_norm(kf - dflat * lf);
  const bool by_factor = rep.residual <= thr;
  if (by_factor) rep.factor = ModuleOperator::from_flat(dflat, k.dim());

  if (by_rank != by_majorization || by_rank != by_factor) {
    throw FrameError(ErrorKind::ToleranceConflict,
                     "douglas_check verdicts disagree (rank=" + std::to_string(by_rank) +
                         ", majorization=" + std::to_string(by_majorization) +
                         ", factor=" + std::to_string(by_factor) + ")");
  }
  rep.range_included = by_rank;
  if (!rep.range_included) {
    rep.lambda_min.reset();
    rep.factor.reset();
  }
  return rep;
}

namespace dense {

double pencil_alpha(const CMatrix& p, const CMatrix& s, double tol) {
  const double pn = spectral_norm(p);
  const double sn = spectral_norm(s);
  const double thr = tol * std::max(pn, sn);
  if (pn <= thr) return kPencilUnbounded;

  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(s));
  const RVector& w = es.eigenvalues();
  const CMatrix& v = es.eigenvectors();
  std::vector<Eigen::Index> range, kernel;
  for (Eigen::Index i = 0; i < w.size(); ++i) (w(i) > thr ? range : kernel).push_back(i);

  if (!kernel.empty()) {
    CMatrix nk(v.rows(), static_cast<Eigen::Index>(kernel.size()));
    for (std::size_t c = 0; c < kernel.size(); ++c) nk.col(static_cast<Eigen::Index>(c)) = v.col(kernel[c]);
    // P must vanish where S does, otherwise only alpha = 0 works.
    if (spectral_norm(nk.adjoint() * p * nk) > thr) return 0.0;
  }
  if (range.empty()) return kPencilUnbounded;

  CMatrix q(v.rows(), static_cast<Eigen::Index>(range.size()));
  RVector isq(static_cast<Eigen::Index>(range.size()));
  for (std::size_t c = 0; c < range.size(); ++c) {
    q.col(static_cast<Eigen::Index>(c)) = v.col(range[c]);
    isq(static_cast<Eigen::Index>(c)) = 1.0 / std::sqrt(w(range[c]));
  }
  const CMatrix wd = isq.cast<Complex>().asDiagonal();
  const double mu = max_hermitian_eigenvalue(wd * (q.adjoint() * p * q) * wd);
  if (!(mu > 0.0)) return kPencilUnbounded;
  return 1.0 / mu;
}

}  // namespace dense

double operator_pencil_alpha(const ModuleOperator& p, const ModuleOperator& s, double tol) {
  require_shape(p.dim() == s.dim() && p.is_endomorphism() && s.is_endomorphism() &&
                    p.source_rank() == s.source_rank(),
                "operator_pencil_alpha: P and S must be endomorphisms of the same module");
  if (!dense::check_positive(p.flat(), tol).is_positive || !dense::check_positive(s.flat(), tol).is_positive) {
    throw FrameError(ErrorKind::NotPositive, "operator_pencil_alpha requires positive P and S");
  }
  return dense::pencil_alpha(p.flat(), s.flat(), tol);
}

}  // namespace kgf
