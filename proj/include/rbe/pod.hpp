#ifndef RBE_POD_HPP
#define RBE_POD_HPP

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rbe/linalg.hpp"
#include "rbe/mesh.hpp"

namespace rbe {

enum class SnapshotField { Velocity, Pressure };

/// Column provenance of one snapshot: geometry sample id and timestep index.
struct SnapshotOrigin {
  int sample = 0;
  int step = 0;
};

struct SnapshotMatrix {
  BlockKind kind = BlockKind::T1;
  SnapshotField field = SnapshotField::Velocity;
  DenseMatrix columns;
  std::vector<SnapshotOrigin> origins;
};

struct PodBasis {
  DenseMatrix modes;      // columns, X-orthonormal
  Vector singularValues;  // all of them, nonincreasing
  double epsilon = 0.0;
  int nPod = 0;           // modes kept by the energy criterion
  int nPressureSup = 0;   // appended pressure supremizers
  int nCouplingSup = 0;   // appended coupling supremizers
  int dropped = 0;        // near-dependent vectors discarded during enrichment
};

/// X-weighted POD via Cholesky X = H^T H and economy SVD of H S. Keeps the
/// smallest N with sum_{i<=N} s_i^2 / sum s_i^2 >= 1 - eps^2 (at least one).
PodBasis weighted_pod(const DenseMatrix& S, const SpMat& X, double epsilon);

/// One velocity supremizer per pressure mode: solve Xu s = D^T eta.
DenseMatrix pressure_supremizers(const SpMat& Xu, const SpMat& D,
                                 const DenseMatrix& pressureModes);

/// One velocity supremizer per multiplier basis function per port:
/// solve Xu z = B^T e_l for every row of every port coupling matrix.
DenseMatrix coupling_supremizers(const SpMat& Xu,
                                 const std::vector<DenseMatrix>& portB);

/// Append extra vectors and re-orthonormalize in the X inner product
/// (modified Gram-Schmidt; vectors whose X-norm drops below 1e-8 of the
/// original are dropped, not fatal).
PodBasis enrich_and_orthonormalize(const PodBasis& base,
                                   const DenseMatrix& extra, const SpMat& X);

/// Binary matrix store: magic "PODM", u64 rows, u64 cols, f64 column-major
/// little-endian payload.
void write_podm(const std::string& path, const DenseMatrix& M);
DenseMatrix read_podm(const std::string& path);

}  // namespace rbe

#endif
