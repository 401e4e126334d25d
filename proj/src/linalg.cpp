#include "rbe/linalg.hpp"

#include <Eigen/SVD>

#include "rbe/errors.hpp"

namespace rbe {

SvdResult economy_svd(const DenseMatrix& A) {
  if (!A.allFinite()) throw Error("economy_svd: matrix has non-finite entries");
  Eigen::BDCSVD<DenseMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw Error("economy_svd: did not converge");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

DenseMatrix cholesky_upper(const DenseMatrix& X) {
  Eigen::LLT<DenseMatrix> llt(X);
  if (llt.info() != Eigen::Success)
    throw Error("cholesky_upper: matrix is not positive definite");
  return DenseMatrix(llt.matrixU());
}

double generalized_min_singular(const DenseMatrix& D, const DenseMatrix& Xu,
                                const DenseMatrix& Xp) {
  // beta = sigma_min(Hp^-T D Hu^-1), X = H^T H
  const DenseMatrix Hu = cholesky_upper(Xu);
  const DenseMatrix Hp = cholesky_upper(Xp);
  DenseMatrix T = Hp.transpose().triangularView<Eigen::Lower>().solve(D);
  DenseMatrix G = Hu.transpose()
                      .triangularView<Eigen::Lower>()
                      .solve(T.transpose())
                      .transpose();
  Eigen::BDCSVD<DenseMatrix> svd(G);
  const auto& s = svd.singularValues();
  return s.size() == 0 ? 0.0 : s(s.size() - 1);
}

double generalized_min_singular(const SpMat& D, const SpMat& Xu,
                                const SpMat& Xp) {
  return generalized_min_singular(DenseMatrix(D), DenseMatrix(Xu),
                                  DenseMatrix(Xp));
}

}  // namespace rbe
