#include <doctest.h>

#include <cmath>
#include <random>

#include "kgframe/matrix_cstar.hpp"
#include "oracles.hpp"

using namespace kgf;

namespace {

AlgebraElement mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return AlgebraElement(m);
}

const Complex I(0.0, 1.0);

}  // namespace

TEST_CASE("adjoint examples") {
  CHECK(oracle::max_abs(adjoint(AlgebraElement::identity(2)).matrix() - CMatrix::Identity(2, 2)) == 0.0);
  CHECK(oracle::max_abs(adjoint(mat2(0, 1, 0, 0)).matrix() - mat2(0, 0, 1, 0).matrix()) == 0.0);
  CHECK(oracle::max_abs(adjoint(mat2(I, 0, 0, 0)).matrix() - mat2(-I, 0, 0, 0).matrix()) == 0.0);
}

TEST_CASE("adjoint is an involution") {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 20; ++t) {
    const auto a = random_element(1 + t % 4, rng);
    CHECK(oracle::max_abs(adjoint(adjoint(a)).matrix() - a.matrix()) == 0.0);
  }
}

TEST_CASE("is_positive examples") {
  auto v = is_positive(AlgebraElement::identity(2));
  CHECK(v.is_positive);
  CHECK(v.min_eigenvalue == doctest::Approx(1.0));

  v = is_positive(mat2(0, 1, 0, 0));
  CHECK_FALSE(v.is_hermitian);
  CHECK_FALSE(v.is_positive);

  v = is_positive(mat2(2, 1, 1, 1));
  CHECK(v.is_positive);
  CHECK(v.min_eigenvalue == doctest::Approx((3.0 - std::sqrt(5.0)) / 2.0).epsilon(1e-12));
}

TEST_CASE("positivity verdict invariants") {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 5;
    // Mix of positive, Hermitian-indefinite and non-Hermitian inputs.
    AlgebraElement a = t % 3 == 0 ? random_psd(d, rng)
                     : t % 3 == 1 ? AlgebraElement(dense::hermitian_part(random_element(d, rng).matrix()))
                                  : random_element(d, rng);
    const auto v = is_positive(a);
    if (v.is_positive) CHECK(v.is_hermitian);
    CHECK(v.is_positive == (v.is_hermitian && v.min_eigenvalue >= -v.tolerance_used));
  }
}

TEST_CASE("a* a is always positive") {
  std::mt19937_64 rng(3);
  for (int t = 0; t < 200; ++t) {
    const auto a = random_element(1 + t % 6, rng);
    CHECK(is_positive(adjoint(a) * a).is_positive);
  }
}

TEST_CASE("loewner_leq examples and errors") {
  CHECK(loewner_leq(AlgebraElement::zero(2), AlgebraElement::identity(2)));
  CHECK_FALSE(loewner_leq(AlgebraElement::identity(2), AlgebraElement::zero(2)));
  CHECK(loewner_leq(mat2(1, 0, 0, 1), mat2(2, 1, 1, 2)));
  CHECK_THROWS_AS(loewner_leq(AlgebraElement::identity(2), AlgebraElement::identity(3)), FrameError);
}

TEST_CASE("loewner_leq is reflexive and transitive on Hermitian samples") {
  std::mt19937_64 rng(4);
  for (int t = 0; t < 100; ++t) {
    const int d = 1 + t % 4;
    const AlgebraElement a(dense::hermitian_part(random_element(d, rng).matrix()));
    const AlgebraElement b = a + random_psd(d, rng);
    const AlgebraElement c = b + random_psd(d, rng);
    CHECK(loewner_leq(a, a));
    REQUIRE(loewner_leq(a, b));
    REQUIRE(loewner_leq(b, c));
    CHECK(loewner_leq(a, c));
  }
}

TEST_CASE("sqrt_psd") {
  CHECK(oracle::max_abs(sqrt_psd(mat2(4, 0, 0, 9)).matrix() - mat2(2, 0, 0, 3).matrix()) < 1e-14);
  CHECK(oracle::max_abs(sqrt_psd(AlgebraElement::identity(3)).matrix() - CMatrix::Identity(3, 3)) < 1e-14);
  CHECK_THROWS_AS(sqrt_psd(mat2(-1, 0, 0, 1)), FrameError);

  std::mt19937_64 rng(5);
  for (int t = 0; t < 100; ++t) {
    const auto p = random_psd(1 + t % 6, rng);
    const auto r = sqrt_psd(p);
    CHECK(is_positive(r).is_hermitian);
    CHECK(((r * r) - p).norm() <= 1e-10 * (1.0 + p.norm()));
  }
}

TEST_CASE("sqrt_psd clamps eigenvalues inside the tolerance band") {
  const auto a = mat2(1, 0, 0, -1e-12);
  const auto r = sqrt_psd(a);
  CHECK(r(1, 1).real() == 0.0);
}

TEST_CASE("abs_element") {
  CHECK(oracle::max_abs(abs_element(AlgebraElement::identity(2)).matrix() - CMatrix::Identity(2, 2)) < 1e-14);
  CHECK(oracle::max_abs(abs_element(mat2(0, 1, 0, 0)).matrix() - mat2(0, 0, 0, 1).matrix()) < 1e-14);
  std::mt19937_64 rng(6);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 5;
    const auto u = random_unitary_element(d, rng);
    CHECK(oracle::max_abs(abs_element(u).matrix() - CMatrix::Identity(d, d)) < 1e-10);
  }
}

TEST_CASE("is_strictly_nonzero") {
  CHECK(is_strictly_nonzero(AlgebraElement::identity(2)));
  CHECK_FALSE(is_strictly_nonzero(AlgebraElement::zero(2)));
  CHECK_FALSE(is_strictly_nonzero(mat2(1, 0, 0, 1e-15), 1e12));
  CHECK(is_strictly_nonzero(mat2(1, 0, 0, 1e-6), 1e12));
}
