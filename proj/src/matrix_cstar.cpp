#include "kgframe/matrix_cstar.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace kgf {

AlgebraElement::AlgebraElement(CMatrix m) : m_(std::move(m)) {
  require_shape(m_.rows() == m_.cols(), "algebra element must be square");
}

AlgebraElement AlgebraElement::identity(int d) { return AlgebraElement(CMatrix::Identity(d, d)); }

AlgebraElement AlgebraElement::zero(int d) { return AlgebraElement(CMatrix::Zero(d, d)); }

AlgebraElement AlgebraElement::scalar(int d, Complex c) {
  return AlgebraElement(c * CMatrix::Identity(d, d));
}

double AlgebraElement::norm() const { return dense::spectral_norm(m_); }

AlgebraElement& AlgebraElement::operator+=(const AlgebraElement& o) {
  require_shape(dim() == o.dim(), "algebra dimension mismatch in +");
  m_ += o.m_;
  return *this;
}

AlgebraElement& AlgebraElement::operator-=(const AlgebraElement& o) {
  require_shape(dim() == o.dim(), "algebra dimension mismatch in -");
  m_ -= o.m_;
  return *this;
}

AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b) {
  require_shape(a.dim() == b.dim(), "algebra dimension mismatch in *");
  return AlgebraElement(a.m_ * b.m_);
}

AlgebraElement operator*(Complex c, const AlgebraElement& a) { return AlgebraElement(c * a.m_); }

AlgebraElement adjoint(const AlgebraElement& a) { return AlgebraElement(a.matrix().adjoint()); }

PositivityVerdict is_positive(const AlgebraElement& a, double tol) {
  return dense::check_positive(a.matrix(), tol);
}

bool loewner_leq(const AlgebraElement& a, const AlgebraElement& b, double tol) {
  require_shape(a.dim() == b.dim(), "loewner_leq: dimension mismatch");
  return is_positive(b - a, tol).is_positive;
}

AlgebraElement sqrt_psd(const AlgebraElement& a, double tol) {
  if (!is_positive(a, tol).is_positive) {
    throw FrameError(ErrorKind::NotPositive, "sqrt_psd requires a positive element");
  }
  Eigen::SelfAdjointEigenSolver<CMatrix> es(dense::hermitian_part(a.matrix()));
  RVector roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const CMatrix& v = es.eigenvectors();
  CMatrix r = v * roots.cast<Complex>().asDiagonal() * v.adjoint();
  return AlgebraElement(dense::hermitian_part(r));
}

AlgebraElement abs_element(const AlgebraElement& a) {
  return sqrt_psd(adjoint(a) * a, kDefaultTol);
}

bool is_strictly_nonzero(const AlgebraElement& a, double cond_cap) {
  if (a.dim() == 0) return false;
  return dense::condition_number(a.matrix()) <= cond_cap;
}

namespace dense {

double spectral_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

double condition_number(const CMatrix& m) {
  if (m.size() == 0 || m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<CMatrix> svd(m);
  const RVector& s = svd.singularValues();
  const double smin = s(s.size() - 1);
  if (!(smin > 0.0)) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

CMatrix hermitian_part(const CMatrix& m) { return 0.5 * (m + m.adjoint()); }

RVector hermitian_eigenvalues(const CMatrix& m) {
  if (m.size() == 0) return RVector();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian_part(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double min_hermitian_eigenvalue(const CMatrix& m) {
  RVector ev = hermitian_eigenvalues(m);
  return ev.size() ? ev(0) : 0.0;
}

double max_hermitian_eigenvalue(const CMatrix& m) {
  RVector ev = hermitian_eigenvalues(m);
  return ev.size() ? ev(ev.size() - 1) : 0.0;
}

PositivityVerdict check_positive(const CMatrix& m, double tol) {
  PositivityVerdict v;
  const double scale = 1.0 + spectral_norm(m);
  v.tolerance_used = tol * scale;
  v.is_hermitian = spectral_norm(m - m.adjoint()) <= v.tolerance_used;
  v.min_eigenvalue = min_hermitian_eigenvalue(m);
  v.is_positive = v.is_hermitian && v.min_eigenvalue >= -v.tolerance_used;
  return v;
}

int rank(const CMatrix& m, double rel_tol, double scale) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  const RVector& s = svd.singularValues();
  const double ref = scale >= 0.0 ? scale : s(0);
  const double thr = rel_tol * ref;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr) ++r;
  }
  return r;
}

CMatrix pinv(const CMatrix& m, double rel_tol) {
  CMatrix out = CMatrix::Zero(m.cols(), m.rows());
  if (m.size() == 0) return out;
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RVector& s = svd.singularValues();
  const double thr = rel_tol * s(0);
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > thr && s(i) > 0.0) {
      out += (svd.matrixV().col(i) / s(i)) * svd.matrixU().col(i).adjoint();
    }
  }
  return out;
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

CMatrix random_gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0 / std::sqrt(2.0));
  CMatrix m(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) {
      const double re = g(rng);
      const double im = g(rng);
      m(i, j) = Complex(re, im);
    }
  }
  return m;
}

CMatrix random_unitary(int d, std::mt19937_64& rng) {
  Eigen::HouseholderQR<CMatrix> qr(random_gaussian(d, d, rng));
  CMatrix q = qr.householderQ();
  CMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  // Phase fix so the distribution is Haar.
  for (int i = 0; i < d; ++i) {
    const Complex rii = r(i, i);
    const double mag = std::abs(rii);
    if (mag > 0.0) q.col(i) *= rii / mag;
  }
  return q;
}

}  // namespace dense

AlgebraElement random_element(int d, std::mt19937_64& rng) {
  return AlgebraElement(dense::random_gaussian(d, d, rng));
}

AlgebraElement random_psd(int d, std::mt19937_64& rng) {
  CMatrix b = dense::random_gaussian(d, d, rng);
  return AlgebraElement(dense::hermitian_part(b * b.adjoint()));
}

AlgebraElement random_unitary_element(int d, std::mt19937_64& rng) {
  return AlgebraElement(dense::random_unitary(d, rng));
}

}  // namespace kgf
