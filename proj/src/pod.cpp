#include "rbe/pod.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include <Eigen/SparseCholesky>

#include "rbe/errors.hpp"

namespace rbe {

PodBasis weighted_pod(const DenseMatrix& S, const SpMat& X, double epsilon) {
  if (S.cols() == 0) throw Error("weighted_pod: empty snapshot set");
  if (epsilon <= 0.0 || epsilon >= 1.0)
    throw Error("weighted_pod: epsilon must lie in (0,1)");
  Eigen::SimplicialLLT<SpMat> llt(X);
  if (llt.info() != Eigen::Success)
    throw Error("weighted_pod: norm matrix is not positive definite");

  // H S with X = P^T L L^T P (Eigen stores the permuted factor)
  const auto& P = llt.permutationP();
  DenseMatrix HS = llt.matrixU() * (P * S);

  Eigen::BDCSVD<DenseMatrix> svd(HS, Eigen::ComputeThinU);
  const Vector& sv = svd.singularValues();
  const double total = sv.squaredNorm();
  int n = 1;
  if (total > 0) {
    double acc = sv(0) * sv(0);
    while (acc / total < 1.0 - epsilon * epsilon && n < sv.size()) {
      acc += sv(n) * sv(n);
      ++n;
    }
  }
  // U = H^-1 Utilde, i.e. solve L^T (P U) = Utilde
  DenseMatrix Ut = svd.matrixU().leftCols(n);
  DenseMatrix PU = llt.matrixU().solve(Ut);
  PodBasis basis;
  basis.modes = P.transpose() * PU;
  basis.singularValues = sv;
  basis.epsilon = epsilon;
  basis.nPod = n;
  return basis;
}

namespace {

DenseMatrix solve_spd(const SpMat& Xu, const DenseMatrix& rhs,
                      const char* what) {
  Eigen::SimplicialLLT<SpMat> llt(Xu);
  if (llt.info() != Eigen::Success)
    throw Error(std::string(what) + ": norm matrix not positive definite");
  DenseMatrix out = llt.solve(rhs);
  return out;
}

}  // namespace

DenseMatrix pressure_supremizers(const SpMat& Xu, const SpMat& D,
                                 const DenseMatrix& pressureModes) {
  if (pressureModes.rows() != D.rows())
    throw Error("pressure_supremizers: mode size mismatch");
  const DenseMatrix rhs = D.transpose() * pressureModes;
  return solve_spd(Xu, rhs, "pressure_supremizers");
}

DenseMatrix coupling_supremizers(const SpMat& Xu,
                                 const std::vector<DenseMatrix>& portB) {
  int cols = 0;
  for (const auto& B : portB) cols += static_cast<int>(B.rows());
  DenseMatrix rhs(Xu.rows(), cols);
  int at = 0;
  for (const auto& B : portB) {
    if (B.cols() != Xu.rows())
      throw Error("coupling_supremizers: coupling size mismatch");
    rhs.middleCols(at, B.rows()) = B.transpose();
    at += static_cast<int>(B.rows());
  }
  return solve_spd(Xu, rhs, "coupling_supremizers");
}

PodBasis enrich_and_orthonormalize(const PodBasis& base,
                                   const DenseMatrix& extra, const SpMat& X) {
  if (extra.cols() > 0 && extra.rows() != base.modes.rows())
    throw Error("enrich_and_orthonormalize: dimension mismatch");
  PodBasis out = base;
  out.dropped = 0;
  DenseMatrix V(base.modes.rows(),
                base.modes.cols() + extra.cols());
  int kept = 0;
  auto xdot = [&](const Vector& a, const Vector& b) {
    return a.dot(X * b);
  };
  for (int j = 0; j < base.modes.cols() + extra.cols(); ++j) {
    Vector v = j < base.modes.cols() ? Vector(base.modes.col(j))
                                     : Vector(extra.col(j - base.modes.cols()));
    const double norm0 = std::sqrt(std::max(0.0, xdot(v, v)));
    if (norm0 == 0.0) {
      ++out.dropped;
      continue;
    }
    for (int pass = 0; pass < 2; ++pass)
      for (int i = 0; i < kept; ++i) v -= xdot(V.col(i), v) * V.col(i);
    const double norm1 = std::sqrt(std::max(0.0, xdot(v, v)));
    if (norm1 < 1e-8 * norm0) {
      ++out.dropped;
      continue;
    }
    V.col(kept++) = v / norm1;
  }
  out.modes = V.leftCols(kept);
  return out;
}

void write_podm(const std::string& path, const DenseMatrix& M) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("write_podm: cannot open " + path);
  os.write("PODM", 4);
  const std::uint64_t r = M.rows(), c = M.cols();
  os.write(reinterpret_cast<const char*>(&r), 8);
  os.write(reinterpret_cast<const char*>(&c), 8);
  for (int j = 0; j < M.cols(); ++j)
    os.write(reinterpret_cast<const char*>(M.col(j).data()),
             static_cast<std::streamsize>(sizeof(double) * M.rows()));
  if (!os) throw Error("write_podm: write failed for " + path);
}

DenseMatrix read_podm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("read_podm: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, "PODM", 4) != 0)
    throw Error("read_podm: bad magic in " + path);
  std::uint64_t r = 0, c = 0;
  is.read(reinterpret_cast<char*>(&r), 8);
  is.read(reinterpret_cast<char*>(&c), 8);
  DenseMatrix M(static_cast<int>(r), static_cast<int>(c));
  for (std::uint64_t j = 0; j < c; ++j)
    is.read(reinterpret_cast<char*>(M.col(static_cast<int>(j)).data()),
            static_cast<std::streamsize>(sizeof(double) * r));
  if (!is) throw Error("read_podm: truncated file " + path);
  return M;
}

}  // namespace rbe
