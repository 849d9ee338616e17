#include <doctest.h>

#include <random>

#include "kgframe/duals.hpp"
#include "oracles.hpp"

using namespace kgf;

namespace {

OperatorFamily zero_family(const OperatorFamily& f) { return scaled(0.0, f); }

/// Conjugates all data by a unitary U on H: L_i -> L_i U, K -> U* K U.
OperatorFamily conjugate(const OperatorFamily& f, const ModuleOperator& u) {
  std::vector<ModuleOperator> out;
  for (const auto& m : f.members()) out.push_back(compose(u, m));
  return OperatorFamily(std::move(out));
}

}  // namespace

TEST_CASE("verify_dual examples") {
  std::mt19937_64 rng(51);
  const auto fam = oracle::random_family(2, 2, 3, 2, rng);
  auto pair = verify_dual(fam, fam, frame_operator(fam));
  CHECK(pair.verified);
  CHECK(pair.reconstruction_residual < 1e-13);

  pair = verify_dual(fam, zero_family(fam), ModuleOperator(2, 2, 2));
  CHECK(pair.verified);
  CHECK(pair.reconstruction_residual == 0.0);
  CHECK(pair.dual_bessel_bound == 0.0);

  pair = verify_dual(fam, fam, ModuleOperator::identity(2, 2));
  CHECK_FALSE(pair.verified);

  const auto other = oracle::random_family(2, 2, 2, 2, rng);
  CHECK_THROWS_AS(verify_dual(fam, other, frame_operator(fam)), FrameError);
  CHECK_THROWS_AS(verify_dual(fam, fam, ModuleOperator::identity(2, 3)), FrameError);
}

TEST_CASE("canonical dual examples") {
  const auto coords = oracle::coordinate_family(2, 3);
  const auto id = ModuleOperator::identity(2, 3);
  auto dual = canonical_dual(coords, id);
  for (std::size_t i = 0; i < coords.size(); ++i) CHECK(oracle::max_abs(dual[i].flat() - coords[i].flat()) < 1e-14);

  const double c = 5.0;
  const auto fam = scaled(std::sqrt(c), coords);
  CHECK((frame_operator(fam) - Complex(c) * id).norm() < 1e-13);
  dual = canonical_dual(fam, id);
  for (std::size_t i = 0; i < fam.size(); ++i) {
    CHECK(oracle::max_abs(dual[i].flat() - fam[i].flat() / c) < 1e-14);
  }
}

TEST_CASE("canonical dual on random full-rank families") {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 50; ++t) {
    const int d = 1 + t % 3, n = 1 + t % 4;
    const auto fam = oracle::random_family(d, n, 2 + t % 5, n, rng);
    const auto k = random_operator(d, n, n, rng);
    const auto pair = canonical_dual_pair(fam, k);
    CHECK(pair.verified);
    CHECK(pair.reconstruction_residual <= 1e-10);
    const auto rep = preframe_consistency(pair);
    CHECK(rep.theta_eta_deviation <= 1e-10);
    CHECK(rep.max_deviation <= 1e-10);
    CHECK(pair.dual_bessel_bound == doctest::Approx(std::sqrt(frame_operator(pair.dual_family).norm())));
    // The dual's frame operator is K* S^-1 K, so its Bessel bound is |S^-1/2 K|.
    const CMatrix s = frame_operator(fam).flat();
    Eigen::SelfAdjointEigenSolver<CMatrix> es(s);
    const CMatrix s_inv_half = es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().cast<Complex>().asDiagonal() *
                               es.eigenvectors().adjoint();
    CHECK(pair.dual_bessel_bound == doctest::Approx(dense::spectral_norm(k.flat() * s_inv_half)).epsilon(1e-8));
  }
}

TEST_CASE("canonical dual rejects a singular frame operator") {
  std::mt19937_64 rng(53);
  const auto fam = oracle::random_family(2, 3, 2, 1, rng);  // rank at most 4 on a 6-dimensional flattening
  try {
    canonical_dual(fam, ModuleOperator::identity(2, 3));
    FAIL("expected SingularFrameOperator");
  } catch (const FrameError& e) {
    CHECK(e.kind() == ErrorKind::SingularFrameOperator);
  }
  const auto ok = oracle::random_family(2, 2, 3, 2, rng);
  CHECK_THROWS_AS(canonical_dual(ok, ModuleOperator::identity(2, 2), 1.0 + 1e-12), FrameError);
}

TEST_CASE("minimal dual") {
  std::mt19937_64 rng(54);
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + t % 3, n = 1 + t % 3;
    const auto fam = oracle::random_family(d, n, 1 + t % 3, 1 + t % 2, rng);
    const auto theta_star = synthesis_operator(fam);
    const int big = theta_star.source_rank();
    const auto eta0 = random_operator(d, n, big, rng);
    const auto k = compose(eta0, theta_star);  // K = theta* eta0

    const auto md = minimal_dual(fam, k);
    const auto pair = verify_dual(fam, md.family, k);
    CHECK(pair.reconstruction_residual <= 1e-10);
    CHECK((compose(md.preframe, theta_star) - k).norm() <= 1e-10);

    const auto range_proj = compose(theta_star, pseudoinverse(theta_star));
    const auto ker_proj = ModuleOperator::identity(d, big) - range_proj;
    const double best = md.preframe.flat().norm();
    CHECK(best <= eta0.flat().norm() * (1 + 1e-10));
    for (int s = 0; s < 20; ++s) {
      const auto other = eta0 + compose(random_operator(d, n, big, rng), ker_proj);
      CHECK((compose(other, theta_star) - k).norm() <= 1e-9);
      CHECK(best <= other.flat().norm() * (1 + 1e-10));
    }
  }
}

TEST_CASE("minimal dual special cases") {
  const auto coords = oracle::coordinate_family(2, 3);
  const auto id = ModuleOperator::identity(2, 3);
  const auto md = minimal_dual(coords, id);
  const auto cd = canonical_dual(coords, id);
  for (std::size_t i = 0; i < coords.size(); ++i) {
    CHECK(oracle::max_abs(md.family[i].flat() - cd[i].flat()) < 1e-12);
    CHECK(oracle::max_abs(md.family[i].flat() - coords[i].flat()) < 1e-12);
  }

  std::mt19937_64 rng(55);
  const auto fam = oracle::random_family(2, 2, 3, 1, rng);
  const auto zero = minimal_dual(fam, ModuleOperator(2, 2, 2));
  for (const auto& m : zero.family.members()) CHECK(m.flat().norm() == 0.0);

  // A rank-deficient synthesis operator cannot reach an invertible K.
  const auto thin = oracle::random_family(2, 3, 1, 1, rng);
  try {
    minimal_dual(thin, ModuleOperator::identity(2, 3));
    FAIL("expected NoInclusion");
  } catch (const FrameError& e) {
    CHECK(e.kind() == ErrorKind::NoInclusion);
  }
}

TEST_CASE("preframe consistency") {
  std::mt19937_64 rng(56);
  const auto fam = oracle::random_family(2, 2, 4, 1, rng);
  const auto k = random_operator(2, 2, 2, rng);

  auto pair = verify_dual(fam, zero_family(fam), ModuleOperator(2, 2, 2));
  auto rep = preframe_consistency(pair);
  CHECK(rep.max_deviation == 0.0);

  for (std::size_t j = 0; j < fam.size(); ++j) {
    pair = canonical_dual_pair(fam, k);
    std::vector<ModuleOperator> members = pair.dual_family.members();
    members[j] += Complex(1e-3) * random_operator(2, 2, 1, rng);
    pair.dual_family = OperatorFamily(members);
    rep = preframe_consistency(pair);
    CHECK(rep.worst_index == j);
    CHECK(rep.theta_eta_deviation <= 1e-10);
    for (std::size_t i = 0; i < fam.size(); ++i) {
      if (i == j) {
        CHECK(rep.projection_deviation[i] > 1e-5);
      } else {
        CHECK(rep.projection_deviation[i] <= 1e-10);
      }
    }
  }

  const auto mp = minimal_dual_pair(fam, k);
  CHECK(preframe_consistency(mp).max_deviation <= 1e-10);
}

TEST_CASE("duality survives a unitary change of coordinates") {
  std::mt19937_64 rng(57);
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + t % 3, n = 1 + t % 4;
    const auto fam = oracle::random_family(d, n, 3, n, rng);
    const auto k = random_operator(d, n, n, rng);
    const auto pair = canonical_dual_pair(fam, k);
    const auto u = ModuleOperator::from_flat(dense::random_unitary(n * d, rng), d);
    const auto k2 = compose(compose(u, k), op_adjoint(u));
    const auto moved = verify_dual(conjugate(fam, u), conjugate(pair.dual_family, u), k2);
    CHECK(moved.reconstruction_residual <= 1e-10);
    CHECK(moved.verified);
  }
}
