#ifndef RBE_COUPLING_HPP
#define RBE_COUPLING_HPP

#include <vector>

#include <Eigen/Dense>

#include "rbe/fem.hpp"

namespace rbe {

/// Chebyshev polynomial of the second kind, U_0=1, U_1=2x,
/// U_{n+1} = 2x U_n - U_{n-1}.
double chebyshev_u(int n, double x);

/// Scalar multiplier basis on the segment [-1,1]: U_k(s). The family is
/// orthonormal with respect to the weight (2/pi) sqrt(1-s^2).
double segment_basis_eval(int n, double s);

/// Scalar basis on the unit disk: P^n_k(x,y) = U_n(x cos w + y sin w)/sqrt(pi)
/// with w = k pi/(n+1); orthonormal under the plain Lebesgue measure.
double disk_basis_eval(int n, int k, double x, double y);

/// Vector-valued multiplier basis: scalar family times canonical vectors,
/// component-major layout. Count is d(n+1) on the segment (d=2) and
/// d(n+1)(n+2)/2 on the disk (d=3).
struct MultiplierBasis {
  int order = 0;
  int dim = 2;

  int count() const;
  /// d=2 evaluation on the reference segment.
  Eigen::Vector2d eval(int i, double s) const;
  /// d=3 evaluation on the unit disk.
  Eigen::Vector3d evalDisk(int i, double x, double y) const;
};

MultiplierBasis build_multiplier_basis(int order, int dim);

enum class InterfaceType { Interior, Inlet };

struct InterfaceSide {
  int block = -1;
  FacetTag portTag;
  double sign = 1.0;  // c_jm, +1 owner / -1 other
};

/// One coupling surface: the shared physical segment and its adjacency.
/// Theta maps s in [-1,1] affinely onto the segment p0 -> p1.
struct InterfaceDescriptor {
  int id = 0;
  InterfaceType type = InterfaceType::Interior;
  std::vector<InterfaceSide> sides;  // 2 for interior, 1 for inlet
  Eigen::Vector2d p0, p1;
  Eigen::Vector2d normalOwner;  // outward from the owning (sign +1) block
  double width() const { return (p1 - p0).norm(); }
};

/// Coupling matrix rows int_Gamma xi_p . phi_q over the physical port of one
/// side; the side sign multiplies all rows. Facet quadrature uses n+3 Gauss
/// points (exact past degree 2n+4).
Eigen::MatrixXd assemble_coupling(const TaylorHoodSpace& space,
                                  const BlockGeometry& geom,
                                  const InterfaceDescriptor& iface,
                                  const MultiplierBasis& basis,
                                  int sideIndex);

/// Inlet variant (sign +1) plus the weak Dirichlet right-hand side
/// rhs(g) = B_in * g for interpolated boundary data g.
struct InletCoupling {
  Eigen::MatrixXd B;
  Eigen::VectorXd rhs(const Eigen::VectorXd& gDofs) const { return B * gDofs; }
};
InletCoupling assemble_inlet_coupling(const TaylorHoodSpace& space,
                                      const BlockGeometry& geom,
                                      const InterfaceDescriptor& iface,
                                      const MultiplierBasis& basis);

}  // namespace rbe

#endif
