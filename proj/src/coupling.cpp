#include "rbe/coupling.hpp"

#include <cmath>

#include "rbe/errors.hpp"
#include "rbe/quadrature.hpp"

namespace rbe {

double chebyshev_u(int n, double x) {
  double p0 = 1.0;
  if (n == 0) return p0;
  double p1 = 2.0 * x;
  for (int k = 1; k < n; ++k) {
    const double p2 = 2.0 * x * p1 - p0;
    p0 = p1;
    p1 = p2;
  }
  return p1;
}

double segment_basis_eval(int n, double s) {
  if (n < 0) throw Error("segment_basis_eval: negative order");
  if (std::abs(s) > 1.0 + 1e-12)
    throw Error("segment_basis_eval: point outside [-1,1]");
  return chebyshev_u(n, std::clamp(s, -1.0, 1.0));
}

double disk_basis_eval(int n, int k, double x, double y) {
  if (n < 0 || k < 0 || k > n) throw Error("disk_basis_eval: need 0 <= k <= n");
  if (x * x + y * y > 1.0 + 1e-12)
    throw Error("disk_basis_eval: point outside the unit disk");
  const double w = k * M_PI / (n + 1);
  return chebyshev_u(n, x * std::cos(w) + y * std::sin(w)) / std::sqrt(M_PI);
}

int MultiplierBasis::count() const {
  if (dim == 2) return 2 * (order + 1);
  return 3 * (order + 1) * (order + 2) / 2;
}

Eigen::Vector2d MultiplierBasis::eval(int i, double s) const {
  if (dim != 2) throw Error("MultiplierBasis::eval: segment basis is 2d");
  if (i < 0 || i >= count()) throw Error("MultiplierBasis::eval: bad index");
  const int perComp = order + 1;
  const int comp = i / perComp;
  const int k = i % perComp;
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  out(comp) = segment_basis_eval(k, s);
  return out;
}

Eigen::Vector3d MultiplierBasis::evalDisk(int i, double x, double y) const {
  if (dim != 3) throw Error("MultiplierBasis::evalDisk: disk basis is 3d");
  if (i < 0 || i >= count()) throw Error("MultiplierBasis::evalDisk: bad index");
  const int perComp = (order + 1) * (order + 2) / 2;
  const int comp = i / perComp;
  int rest = i % perComp;
  int n = 0;
  while (rest > n) {
    rest -= n + 1;
    ++n;
  }
  Eigen::Vector3d out = Eigen::Vector3d::Zero();
  out(comp) = disk_basis_eval(n, rest, x, y);
  return out;
}

MultiplierBasis build_multiplier_basis(int order, int dim) {
  if (order < 0) throw Error("build_multiplier_basis: order must be >= 0");
  if (dim != 2 && dim != 3) throw Error("build_multiplier_basis: dim in {2,3}");
  return {order, dim};
}

namespace {

Eigen::MatrixXd assemble_port_rows(const TaylorHoodSpace& space,
                                   const BlockGeometry& geom,
                                   const InterfaceDescriptor& iface,
                                   const MultiplierBasis& basis,
                                   const FacetTag& portTag, double sign) {
  const int nl = basis.count();
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(nl, space.numVelocityDofs());
  const Eigen::Vector2d mid = 0.5 * (iface.p0 + iface.p1);
  const Eigen::Vector2d tang = (iface.p1 - iface.p0).normalized();
  const double half = 0.5 * iface.width();

  const auto facets = tagged_port_facets(space, portTag);
  if (facets.empty()) throw Error("assemble_coupling: port has no facets");
  const auto& gr = gauss_legendre(basis.order + 3);

  std::array<double, 6> N;
  for (const auto& pf : facets) {
    const Eigen::Vector2d a =
        space.mesh().vertices.row(pf.verts[0]).head<2>();
    const Eigen::Vector2d b =
        space.mesh().vertices.row(pf.verts[1]).head<2>();
    const Eigen::Vector2d pa = geom.mapOnCell(pf.cell, a);
    const Eigen::Vector2d pb = geom.mapOnCell(pf.cell, b);
    // the physical facet must lie on the interface segment
    const Eigen::Vector2d rel = pa - mid;
    const double along = rel.dot(tang);
    if ((rel - along * tang).norm() > 1e-8 || std::abs(along) > half + 1e-8)
      throw Error("assemble_coupling: port facet off the interface segment");
    const double scale = 0.5 * (pb - pa).norm();
    for (size_t q = 0; q < gr.points.size(); ++q) {
      const double t = 0.5 * (gr.points[q] + 1.0);
      const Eigen::Vector2d xhat = (1 - t) * a + t * b;
      const Eigen::Vector2d x = (1 - t) * pa + t * pb;
      const double s = std::clamp((x - mid).dot(tang) / half, -1.0, 1.0);
      space.p2Values(pf.cell, xhat, N);
      const double w = gr.weights[q] * scale;
      for (int p = 0; p < nl; ++p) {
        const Eigen::Vector2d xi = basis.eval(p, s);
        for (int loc = 0; loc < 6; ++loc) {
          const int node = space.cellNode(pf.cell, loc);
          // only the facet's own nodes carry trace values
          if (node != pf.verts[0] && node != pf.verts[1] &&
              node != pf.midNode)
            continue;
          B(p, 2 * node) += sign * w * xi.x() * N[loc];
          B(p, 2 * node + 1) += sign * w * xi.y() * N[loc];
        }
      }
    }
  }
  return B;
}

}  // namespace

Eigen::MatrixXd assemble_coupling(const TaylorHoodSpace& space,
                                  const BlockGeometry& geom,
                                  const InterfaceDescriptor& iface,
                                  const MultiplierBasis& basis,
                                  int sideIndex) {
  if (sideIndex < 0 || sideIndex >= static_cast<int>(iface.sides.size()))
    throw Error("assemble_coupling: side not part of this interface");
  const auto& side = iface.sides[sideIndex];
  return assemble_port_rows(space, geom, iface, basis, side.portTag,
                            side.sign);
}

InletCoupling assemble_inlet_coupling(const TaylorHoodSpace& space,
                                      const BlockGeometry& geom,
                                      const InterfaceDescriptor& iface,
                                      const MultiplierBasis& basis) {
  if (iface.type != InterfaceType::Inlet)
    throw Error("assemble_inlet_coupling: interface is not an inlet");
  InletCoupling out;
  out.B = assemble_port_rows(space, geom, iface, basis,
                             iface.sides.at(0).portTag, 1.0);
  return out;
}

}  // namespace rbe
