#pragma once

// Kernel of the coefficient C*-algebra A = M_d(C).

#include <complex>
#include <random>

#include <Eigen/Dense>

#include "kgframe/errors.hpp"

namespace kgf {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr double kDefaultTol = 1e-9;
inline constexpr double kDefaultCondCap = 1e12;

/// An element of A = M_d(C). Always square.
class AlgebraElement {
 public:
  AlgebraElement() = default;
  explicit AlgebraElement(CMatrix m);

  static AlgebraElement identity(int d);
  static AlgebraElement zero(int d);
  static AlgebraElement scalar(int d, Complex c);

  int dim() const { return static_cast<int>(m_.rows()); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(int r, int c) const { return m_(r, c); }

  /// Operator (spectral) norm.
  double norm() const;

  AlgebraElement& operator+=(const AlgebraElement& o);
  AlgebraElement& operator-=(const AlgebraElement& o);

  friend AlgebraElement operator+(AlgebraElement a, const AlgebraElement& b) { return a += b; }
  friend AlgebraElement operator-(AlgebraElement a, const AlgebraElement& b) { return a -= b; }
  friend AlgebraElement operator*(const AlgebraElement& a, const AlgebraElement& b);
  friend AlgebraElement operator*(Complex c, const AlgebraElement& a);

 private:
  CMatrix m_;
};

struct PositivityVerdict {
  bool is_hermitian = false;
  double min_eigenvalue = 0.0;
  bool is_positive = false;
  double tolerance_used = 0.0;
};

AlgebraElement adjoint(const AlgebraElement& a);

/// Hermitian within tol*(1+|a|), then eigenvalues of the symmetrized part
/// must be >= -tol*(1+|a|).
PositivityVerdict is_positive(const AlgebraElement& a, double tol = kDefaultTol);

/// a <= b in the Loewner order.
bool loewner_leq(const AlgebraElement& a, const AlgebraElement& b, double tol = kDefaultTol);

/// Hermitian square root; eigenvalues inside the tolerance band are clamped to zero.
AlgebraElement sqrt_psd(const AlgebraElement& a, double tol = kDefaultTol);

/// |a| = (a* a)^{1/2}
AlgebraElement abs_element(const AlgebraElement& a);

/// Invertible with 2-norm condition number <= cond_cap.
bool is_strictly_nonzero(const AlgebraElement& a, double cond_cap = kDefaultCondCap);

// Dense helpers shared with the flattened-operator code paths.
namespace dense {

double spectral_norm(const CMatrix& m);
double condition_number(const CMatrix& m);
PositivityVerdict check_positive(const CMatrix& m, double tol);
CMatrix hermitian_part(const CMatrix& m);
/// Ascending eigenvalues of the Hermitian part.
RVector hermitian_eigenvalues(const CMatrix& m);
double min_hermitian_eigenvalue(const CMatrix& m);
double max_hermitian_eigenvalue(const CMatrix& m);
/// Numerical rank: singular values above rel_tol * scale, scale defaults to sigma_max.
int rank(const CMatrix& m, double rel_tol, double scale = -1.0);
CMatrix pinv(const CMatrix& m, double rel_tol);
CMatrix kron(const CMatrix& a, const CMatrix& b);
CMatrix random_gaussian(int rows, int cols, std::mt19937_64& rng);
CMatrix random_unitary(int d, std::mt19937_64& rng);

}  // namespace dense

AlgebraElement random_element(int d, std::mt19937_64& rng);
/// b b* with Gaussian b.
AlgebraElement random_psd(int d, std::mt19937_64& rng);
AlgebraElement random_unitary_element(int d, std::mt19937_64& rng);

}  // namespace kgf
