#include "kgframe/tensor.hpp"

#include <functional>
#include <numeric>

namespace kgf {

int TensorSpace::dim() const {
  return std::accumulate(factor_dims.begin(), factor_dims.end(), 1, std::multiplies<>());
}

int TensorSpace::rank() const {
  return std::accumulate(factor_ranks.begin(), factor_ranks.end(), 1, std::multiplies<>());
}

TensorSpace tensor_space(const std::vector<ModuleSpace>& factors) {
  if (factors.empty()) throw FrameError(ErrorKind::EmptyInput, "tensor_space of no factors");
  TensorSpace t;
  for (const auto& f : factors) {
    t.factor_dims.push_back(f.dim);
    t.factor_ranks.push_back(f.rank());
  }
  return t;
}

ModuleVector kron_vector(const ModuleVector& x, const ModuleVector& y) {
  const int d1 = x.dim(), d2 = y.dim();
  const int n1 = x.rank(), n2 = y.rank();
  const int d = d1 * d2;
  CMatrix flat(d, d * n1 * n2);
  for (int i = 0; i < n1; ++i) {
    const CMatrix xi = x.flat().middleCols(i * d1, d1);
    for (int j = 0; j < n2; ++j) {
      flat.middleCols((i * n2 + j) * d, d) = dense::kron(xi, y.flat().middleCols(j * d2, d2));
    }
  }
  return ModuleVector::from_flat(std::move(flat), d);
}

ModuleOperator kron_operator(const ModuleOperator& t, const ModuleOperator& s) {
  const int d1 = t.dim(), d2 = s.dim();
  const int d = d1 * d2;
  const int n1 = t.source_rank(), m1 = t.target_rank();
  const int n2 = s.source_rank(), m2 = s.target_rank();
  CMatrix flat(n1 * n2 * d, m1 * m2 * d);
  for (int i = 0; i < n1; ++i) {
    for (int k = 0; k < n2; ++k) {
      for (int j = 0; j < m1; ++j) {
        for (int l = 0; l < m2; ++l) {
          flat.block((i * n2 + k) * d, (j * m2 + l) * d, d, d) =
              dense::kron(t.flat().block(i * d1, j * d1, d1, d1), s.flat().block(k * d2, l * d2, d2, d2));
        }
      }
    }
  }
  return ModuleOperator::from_flat(std::move(flat), d);
}

OperatorFamily kron_family(const OperatorFamily& f, const OperatorFamily& g) {
  std::vector<ModuleOperator> out;
  out.reserve(f.size() * g.size());
  for (const auto& a : f.members()) {
    for (const auto& b : g.members()) out.push_back(kron_operator(a, b));
  }
  return OperatorFamily(std::move(out));
}

DualPair tensor_dual_check(const DualPair& lp, const DualPair& gp, double tol) {
  return verify_dual(kron_family(lp.primary_family, gp.primary_family),
                     kron_family(lp.dual_family, gp.dual_family),
                     kron_operator(lp.target, gp.target), tol);
}

DualPair nfold_tensor_dual(const std::vector<DualPair>& pairs, double tol) {
  if (pairs.empty()) throw FrameError(ErrorKind::EmptyInput, "nfold_tensor_dual of no pairs");
  DualPair acc = verify_dual(pairs.front().primary_family, pairs.front().dual_family, pairs.front().target, tol);
  for (std::size_t p = 1; p < pairs.size(); ++p) acc = tensor_dual_check(acc, pairs[p], tol);
  return acc;
}

Eigen::PermutationMatrix<Eigen::Dynamic> kron_index_permutation(int n1, int d1, int n2, int d2) {
  Eigen::PermutationMatrix<Eigen::Dynamic> perm(n1 * d1 * n2 * d2);
  for (int i = 0; i < n1; ++i) {
    for (int a = 0; a < d1; ++a) {
      for (int k = 0; k < n2; ++k) {
        for (int b = 0; b < d2; ++b) {
          const int from = ((i * d1 + a) * n2 + k) * d2 + b;
          const int to = ((i * n2 + k) * d1 + a) * d2 + b;
          perm.indices()(from) = to;
        }
      }
    }
  }
  return perm;
}

}  // namespace kgf
