#ifndef RBE_LINALG_HPP
#define RBE_LINALG_HPP

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rbe {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;

struct SvdResult {
  DenseMatrix U;
  Vector sigma;  // nonincreasing
  DenseMatrix V;
};

/// Economy (thin) SVD, A = U diag(sigma) V^T.
SvdResult economy_svd(const DenseMatrix& A);

/// Upper-triangular H with X = H^T H. Throws on a non-SPD pivot.
DenseMatrix cholesky_upper(const DenseMatrix& X);

/// Smallest generalized singular value of D with respect to the SPD norm
/// pairs (Xu, Xp): min over q of max over v of q^T D v / (|v|_Xu |q|_Xp).
double generalized_min_singular(const DenseMatrix& D, const DenseMatrix& Xu,
                                const DenseMatrix& Xp);
double generalized_min_singular(const SpMat& D, const SpMat& Xu,
                                const SpMat& Xp);

}  // namespace rbe

#endif
