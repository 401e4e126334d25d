#ifndef RBE_FEM_HPP
#define RBE_FEM_HPP

#include <array>
#include <functional>
#include <map>
#include <vector>

#include <Eigen/Dense>

#include "rbe/geomap.hpp"
#include "rbe/linalg.hpp"
#include "rbe/mesh.hpp"

namespace rbe {

/// P2-P1 Taylor-Hood pair on a triangulated block. Velocity DOFs are
/// node-major with interleaved components: dof(node, c) = 2*node + c.
/// P2 nodes are the mesh vertices followed by the edge midpoints (edges in
/// lexicographic order), so the numbering is deterministic for a given mesh.
class TaylorHoodSpace {
 public:
  explicit TaylorHoodSpace(const SimplicialMesh& mesh);

  const SimplicialMesh& mesh() const { return *mesh_; }
  int numVelocityNodes() const { return static_cast<int>(nodes_.rows()); }
  int numVelocityDofs() const { return 2 * numVelocityNodes(); }
  int numPressureDofs() const { return mesh_->numVertices(); }

  /// Reference coordinates of all P2 nodes, (V+E) x 2.
  const Eigen::MatrixXd& velocityNodes() const { return nodes_; }

  /// Global P2 node of cell-local node a (0..2 vertices, 3..5 edge nodes;
  /// edge node 3+e sits on the edge opposite local vertex e).
  int cellNode(int cell, int a) const;

  int edgeNode(int va, int vb) const;

  /// Velocity DOFs pinned by the strong wall condition (all components of
  /// every P2 node lying on a Wall facet).
  const std::vector<int>& wallDofs() const { return wallDofs_; }

  int boundaryCell(const FacetKey& f) const;

  /// P2 basis values / reference gradients at a point inside a cell.
  void p2Values(int cell, const Eigen::Vector2d& xhat,
                std::array<double, 6>& vals) const;
  void p2Gradients(int cell, const Eigen::Vector2d& xhat,
                   std::array<Eigen::Vector2d, 6>& grads) const;

  Eigen::Vector2d evalVelocity(int cell, const Eigen::Vector2d& xhat,
                               const Eigen::VectorXd& u) const;
  double evalPressure(int cell, const Eigen::Vector2d& xhat,
                      const Eigen::VectorXd& p) const;

  /// Locate the cell containing a reference point (tolerant).
  int locateCell(const Eigen::Vector2d& xhat) const;

 private:
  const SimplicialMesh* mesh_;
  SimplicialMesh::EdgeData edgeData_;
  std::map<std::array<int, 2>, int> edgeIndex_;
  Eigen::MatrixXd nodes_;
  std::vector<int> wallDofs_;
  std::map<FacetKey, int> facetCell_;
};

struct BlockOperators {
  SpMat M;   // rho-weighted velocity mass
  SpMat K;   // 2 mu eps:eps stiffness
  SpMat D;   // divergence, pressure x velocity, D_ij = -int (div phi_j) psi_i
  SpMat Xu;  // H1 velocity norm matrix (L2 + seminorm)
  SpMat Xp;  // L2 pressure mass
};

/// Assemble the static operators on the (possibly deformed) block.
/// geom == nullptr assembles on the reference configuration.
BlockOperators assemble_static(const TaylorHoodSpace& space,
                               const BlockGeometry* geom, double rho,
                               double mu);

/// Convective matrix C(u)_ij = int rho [(u . grad) phi_j] . phi_i.
SpMat assemble_convective(const TaylorHoodSpace& space,
                          const BlockGeometry* geom, double rho,
                          const Eigen::VectorXd& u);

/// Linearization of C(u)u with respect to u beyond C(u) itself:
/// C'(u)_ij = int rho [(phi_j . grad) u] . phi_i.
SpMat assemble_convective_prime(const TaylorHoodSpace& space,
                                const BlockGeometry* geom, double rho,
                                const Eigen::VectorXd& u);

/// Trilinear convective form int rho [(z_m . grad) z_l] . z_i for columns of
/// the given mode matrix.
double convective_trilinear(const TaylorHoodSpace& space,
                            const BlockGeometry* geom, double rho,
                            const Eigen::MatrixXd& modes, int i, int l, int m);

/// Batched version: T[i](l,m) for i < nI and l,m < nC.
std::vector<Eigen::MatrixXd> assemble_convective_tensor(
    const TaylorHoodSpace& space, const BlockGeometry* geom, double rho,
    const Eigen::MatrixXd& modes, int nI, int nC);

/// Physical positions of all P2 nodes.
Eigen::MatrixXd physical_velocity_nodes(const TaylorHoodSpace& space,
                                        const BlockGeometry* geom);

/// Nodal interpolation onto the velocity / pressure space. The function
/// receives physical coordinates.
Eigen::VectorXd interpolate_velocity(
    const TaylorHoodSpace& space, const BlockGeometry* geom,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f);
Eigen::VectorXd interpolate_pressure(
    const TaylorHoodSpace& space, const BlockGeometry* geom,
    const std::function<double(const Eigen::Vector2d&)>& f);

/// r_i = -int psi_i * divfn on the reference mesh; oracle hook for
/// divergence checks of pulled-back fields.
Eigen::VectorXd assemble_divergence_functional(
    const TaylorHoodSpace& space,
    const std::function<double(int, const Eigen::Vector2d&)>& divfn);

/// Volume force / boundary traction contributions to the velocity rhs:
/// F_i = int f . phi_i + sum over the listed ports of int h . phi_i.
Eigen::VectorXd assemble_forcing(
    const TaylorHoodSpace& space, const BlockGeometry* geom,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& outletH,
    const std::vector<FacetTag>& neumannPorts = {});

/// Zero the listed rows and columns (value-eliminated constraints).
void constrain_rows_cols(SpMat& A, const std::vector<int>& dofs,
                         bool rows = true, bool cols = true);

struct PortFacet {
  FacetKey key;
  int cell;
  std::array<int, 2> verts;   // endpoint vertices
  int midNode;                // P2 edge node
};
std::vector<PortFacet> tagged_port_facets(const TaylorHoodSpace& space,
                                          const FacetTag& tag);

}  // namespace rbe

#endif
