#pragma once

// Tensor products of modules over M_d1(C) and M_d2(C), realized over
// M_{d1 d2}(C) through the Kronecker isomorphism. Doubly indexed objects are
// ordered row-major: (i, j) -> i * n2 + j.

#include <vector>

#include "kgframe/duals.hpp"

namespace kgf {

struct TensorSpace {
  std::vector<int> factor_dims;
  std::vector<int> factor_ranks;

  int dim() const;
  int rank() const;
};

TensorSpace tensor_space(const std::vector<ModuleSpace>& factors);

/// Block (i, j) of the result is x_i (x) y_j.
ModuleVector kron_vector(const ModuleVector& x, const ModuleVector& y);

/// Block ((i,k),(j,l)) of the result is t_ij (x) s_kl.
ModuleOperator kron_operator(const ModuleOperator& t, const ModuleOperator& s);

/// {L_i (x) G_j}, i outer.
OperatorFamily kron_family(const OperatorFamily& f, const OperatorFamily& g);

/// Builds {L_i (x) G_j} and {L~_i (x) G~_j} with target K (x) L and verifies the pair.
DualPair tensor_dual_check(const DualPair& lp, const DualPair& gp, double tol = 1e-10);

/// Left-associated fold of tensor_dual_check.
DualPair nfold_tensor_dual(const std::vector<DualPair>& pairs, double tol = 1e-10);

/// Sends kron index (i,a,k,b) to block index (i,k,a,b). With P for the sources and Q for
/// the targets, flatten(T (x) S) = P kron(flatten T, flatten S) Q^T.
Eigen::PermutationMatrix<Eigen::Dynamic> kron_index_permutation(int n1, int d1, int n2, int d2);

}  // namespace kgf
