#ifndef RBE_GEOMAP_HPP
#define RBE_GEOMAP_HPP

#include <array>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "rbe/mesh.hpp"

namespace rbe {

/// Geometric parameters of one deformed block. Tubes use bend/length/radius,
/// the bifurcation uses the two outlet angles. lengthRatio and radiusRatio
/// act as multiplicative scales (deformed = ratio * reference).
struct GeoParams {
  double rotation = 0.0;
  Eigen::Vector2d translation = Eigen::Vector2d::Zero();
  double bend = 0.0;         // outlet normal angle, tubes
  double lengthRatio = 1.0;  // tubes
  double radiusRatio = 1.0;  // tubes
  std::array<double, 2> outletAngles = {0.0, 0.0};  // bifurcation
};

/// Admissible parameter box. Tube bends additionally satisfy a joint
/// curvature bound so the map stays bijective:
///   0.75 * radiusRatio * |bend| <= 0.85 * lengthRatio * aspect.
struct ParamBounds {
  double maxBend = M_PI / 4.0;
  double minRatio = 0.5, maxRatio = 2.0;
  double maxOutletAngle = M_PI / 6.0;
};
const ParamBounds& param_bounds();
bool params_admissible(BlockKind kind, const GeoParams& p);

struct PhysicalPort {
  Eigen::Vector2d p0, p1;          // ordered endpoints
  Eigen::Vector2d outwardNormal;   // unit
  double width = 0.0;
  FacetTag tag;
};

/// A deformed block: map x = Q phi(xhat; mu) + t with analytic Jacobian for
/// tubes. The bifurcation map is a harmonic extension of rotated-outlet
/// boundary displacements; its reported Jacobian is the rotation Q alone
/// (small-deformation approximation), while assembly uses the per-cell
/// affine Jacobians of the displaced triangulation.
class BlockGeometry {
 public:
  BlockKind kind() const { return kind_; }
  const GeoParams& params() const { return params_; }
  const SimplicialMesh& mesh() const { return *mesh_; }

  Eigen::Vector2d map(const Eigen::Vector2d& xhat) const;
  Eigen::Vector2d mapOnCell(int cell, const Eigen::Vector2d& xhat) const;

  /// J_Phi(xhat). Throws if xhat lies outside the reference block by more
  /// than 1e-10. For the bifurcation this returns Q.
  Eigen::Matrix2d jacobian(const Eigen::Vector2d& xhat) const;

  /// Jacobian used in quadrature-point assembly: the analytic one for tubes,
  /// the per-cell affine Jacobian of the displaced mesh for the bifurcation.
  Eigen::Matrix2d assemblyJacobian(int cell, const Eigen::Vector2d& xhat) const;

  const std::vector<PhysicalPort>& ports() const { return ports_; }

  bool insideReference(const Eigen::Vector2d& xhat, double tol) const;

 private:
  friend BlockGeometry build_map(BlockKind, const GeoParams&,
                                 const SimplicialMesh&);

  Eigen::Vector2d nonaffine(const Eigen::Vector2d& xhat) const;
  Eigen::Matrix2d nonaffineJacobian(const Eigen::Vector2d& xhat) const;
  int locateCell(const Eigen::Vector2d& xhat) const;

  BlockKind kind_ = BlockKind::T1;
  GeoParams params_;
  const SimplicialMesh* mesh_ = nullptr;
  Eigen::Matrix2d Q_ = Eigen::Matrix2d::Identity();
  double aspect_ = 1.0;
  Eigen::MatrixXd displaced_;  // bifurcation: xhat + d(xhat) per vertex
  std::vector<PhysicalPort> ports_;
};

BlockGeometry build_map(BlockKind kind, const GeoParams& params,
                        const SimplicialMesh& referenceMesh);

/// Piola pullback of nodal velocity values: for each node,
/// vhat = |J| J^-1 v, with J evaluated at the node's reference position.
/// nodes is N x 2 (reference coordinates), values has length 2N with
/// node-major (x,y) interleaving.
Eigen::VectorXd piola_pullback(const BlockGeometry& geom,
                               const Eigen::MatrixXd& nodes,
                               const Eigen::VectorXd& values);

/// Exact inverse of piola_pullback (v = J vhat / |J| per node).
Eigen::VectorXd piola_pushforward(const BlockGeometry& geom,
                                  const Eigen::MatrixXd& nodes,
                                  const Eigen::VectorXd& values);

/// Component halfwidths for uniform parameter sampling.
struct ParamHalfWidths {
  double bend = 0.0;
  double lengthRatio = 0.0;
  double radiusRatio = 0.0;
  double outletAngle = 0.0;
};

/// Uniform i.i.d. sample of the nonaffine parameters in
/// [center - halfWidths, center + halfWidths]. Throws if the interval
/// escapes the admissible set.
GeoParams sample_params(BlockKind kind, const GeoParams& center,
                        const ParamHalfWidths& halfWidths,
                        std::mt19937_64& rng);

/// Deterministic uniform draw in [a,b] from the raw 64-bit stream.
double uniform_in(std::mt19937_64& rng, double a, double b);

}  // namespace rbe

#endif
