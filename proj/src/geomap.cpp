#include "rbe/geomap.hpp"

#include <cmath>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "rbe/errors.hpp"
#include "rbe/quadrature.hpp"

namespace rbe {

namespace {

Eigen::Matrix2d rotation2d(double theta) {
  Eigen::Matrix2d Q;
  Q << std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta);
  return Q;
}

// C1 axial blend and derivative
double blend(double s) { return s * s * (3.0 - 2.0 * s); }
double blend_d(double s) { return 6.0 * s * (1.0 - s); }

double dist_point_segment(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                          const Eigen::Vector2d& b) {
  const Eigen::Vector2d ab = b - a;
  const double t = std::clamp(ab.dot(p - a) / ab.squaredNorm(), 0.0, 1.0);
  return (p - (a + t * ab)).norm();
}

}  // namespace

const ParamBounds& param_bounds() {
  static const ParamBounds b;
  return b;
}

bool params_admissible(BlockKind kind, const GeoParams& p) {
  const ParamBounds& b = param_bounds();
  if (kind == BlockKind::B) {
    if (std::abs(p.outletAngles[0]) > b.maxOutletAngle) return false;
    if (std::abs(p.outletAngles[1]) > b.maxOutletAngle) return false;
    return p.lengthRatio == 1.0 && p.radiusRatio == 1.0;
  }
  if (std::abs(p.bend) > b.maxBend) return false;
  if (p.lengthRatio < b.minRatio || p.lengthRatio > b.maxRatio) return false;
  if (p.radiusRatio < b.minRatio || p.radiusRatio > b.maxRatio) return false;
  // curvature bound: offset tube must not fold onto itself
  const double a = block_aspect(kind);
  return 0.75 * p.radiusRatio * std::abs(p.bend) <=
         0.85 * p.lengthRatio * a + 1e-14;
}

Eigen::Vector2d BlockGeometry::nonaffine(const Eigen::Vector2d& xhat) const {
  const double a = aspect_;
  const double L = params_.lengthRatio * a;
  const double rho = params_.radiusRatio;
  const double alpha = params_.bend;
  const double s = xhat.x() / a;
  // centerline c(s) = L * int_0^s (cos g, sin g), g(t) = alpha * blend(t)
  const GaussRule& gr = gauss_legendre(24);
  Eigen::Vector2d c = Eigen::Vector2d::Zero();
  for (size_t q = 0; q < gr.points.size(); ++q) {
    const double tau = 0.5 * s * (gr.points[q] + 1.0);
    const double g = alpha * blend(tau);
    c += 0.5 * s * gr.weights[q] * Eigen::Vector2d(std::cos(g), std::sin(g));
  }
  c *= L;
  const double g = alpha * blend(s);
  const Eigen::Vector2d n(-std::sin(g), std::cos(g));
  return c + rho * xhat.y() * n;
}

Eigen::Matrix2d BlockGeometry::nonaffineJacobian(
    const Eigen::Vector2d& xhat) const {
  const double a = aspect_;
  const double L = params_.lengthRatio * a;
  const double rho = params_.radiusRatio;
  const double alpha = params_.bend;
  const double s = xhat.x() / a;
  const double g = alpha * blend(s);
  const double gd = alpha * blend_d(s);
  const Eigen::Vector2d t(std::cos(g), std::sin(g));
  const Eigen::Vector2d n(-std::sin(g), std::cos(g));
  Eigen::Matrix2d J;
  J.col(0) = (L - rho * xhat.y() * gd) / a * t;
  J.col(1) = rho * n;
  return J;
}

Eigen::Vector2d BlockGeometry::map(const Eigen::Vector2d& xhat) const {
  if (kind_ != BlockKind::B)
    return Q_ * nonaffine(xhat) + params_.translation;
  return mapOnCell(locateCell(xhat), xhat);
}

Eigen::Vector2d BlockGeometry::mapOnCell(int cell,
                                         const Eigen::Vector2d& xhat) const {
  if (kind_ != BlockKind::B)
    return Q_ * nonaffine(xhat) + params_.translation;
  const auto& m = *mesh_;
  const Eigen::Vector2d a = m.vertices.row(m.cells(cell, 0)).head<2>();
  const Eigen::Vector2d b = m.vertices.row(m.cells(cell, 1)).head<2>();
  const Eigen::Vector2d c = m.vertices.row(m.cells(cell, 2)).head<2>();
  Eigen::Matrix2d T;
  T.col(0) = b - a;
  T.col(1) = c - a;
  const Eigen::Vector2d lm = T.inverse() * (xhat - a);
  const Eigen::Vector2d pa = displaced_.row(m.cells(cell, 0)).head<2>();
  const Eigen::Vector2d pb = displaced_.row(m.cells(cell, 1)).head<2>();
  const Eigen::Vector2d pc = displaced_.row(m.cells(cell, 2)).head<2>();
  const Eigen::Vector2d phi =
      (1.0 - lm.x() - lm.y()) * pa + lm.x() * pb + lm.y() * pc;
  return Q_ * phi + params_.translation;
}

Eigen::Matrix2d BlockGeometry::jacobian(const Eigen::Vector2d& xhat) const {
  if (!insideReference(xhat, 1e-10))
    throw Error("jacobian: point outside the reference block");
  if (kind_ == BlockKind::B) return Q_;
  return Q_ * nonaffineJacobian(xhat);
}

Eigen::Matrix2d BlockGeometry::assemblyJacobian(
    int cell, const Eigen::Vector2d& xhat) const {
  if (kind_ != BlockKind::B) return Q_ * nonaffineJacobian(xhat);
  const auto& m = *mesh_;
  const Eigen::Vector2d a = m.vertices.row(m.cells(cell, 0)).head<2>();
  const Eigen::Vector2d b = m.vertices.row(m.cells(cell, 1)).head<2>();
  const Eigen::Vector2d c = m.vertices.row(m.cells(cell, 2)).head<2>();
  const Eigen::Vector2d pa = displaced_.row(m.cells(cell, 0)).head<2>();
  const Eigen::Vector2d pb = displaced_.row(m.cells(cell, 1)).head<2>();
  const Eigen::Vector2d pc = displaced_.row(m.cells(cell, 2)).head<2>();
  Eigen::Matrix2d T, P;
  T.col(0) = b - a;
  T.col(1) = c - a;
  P.col(0) = pb - pa;
  P.col(1) = pc - pa;
  return Q_ * P * T.inverse();
}

bool BlockGeometry::insideReference(const Eigen::Vector2d& xhat,
                                    double tol) const {
  if (kind_ != BlockKind::B) {
    return xhat.x() >= -tol && xhat.x() <= aspect_ + tol &&
           std::abs(xhat.y()) <= 0.5 + tol;
  }
  // inside some cell of the reference triangulation
  const auto& m = *mesh_;
  for (int c = 0; c < m.numCells(); ++c) {
    const Eigen::Vector2d a = m.vertices.row(m.cells(c, 0)).head<2>();
    const Eigen::Vector2d b = m.vertices.row(m.cells(c, 1)).head<2>();
    const Eigen::Vector2d d = m.vertices.row(m.cells(c, 2)).head<2>();
    Eigen::Matrix2d T;
    T.col(0) = b - a;
    T.col(1) = d - a;
    const Eigen::Vector2d lm = T.inverse() * (xhat - a);
    if (lm.x() >= -tol && lm.y() >= -tol && lm.x() + lm.y() <= 1.0 + tol)
      return true;
  }
  return false;
}

int BlockGeometry::locateCell(const Eigen::Vector2d& xhat) const {
  const auto& m = *mesh_;
  int best = -1;
  double bestViol = 1e30;
  for (int c = 0; c < m.numCells(); ++c) {
    const Eigen::Vector2d a = m.vertices.row(m.cells(c, 0)).head<2>();
    const Eigen::Vector2d b = m.vertices.row(m.cells(c, 1)).head<2>();
    const Eigen::Vector2d d = m.vertices.row(m.cells(c, 2)).head<2>();
    Eigen::Matrix2d T;
    T.col(0) = b - a;
    T.col(1) = d - a;
    const Eigen::Vector2d lm = T.inverse() * (xhat - a);
    const double viol = std::max({-lm.x(), -lm.y(), lm.x() + lm.y() - 1.0});
    if (viol < bestViol) {
      bestViol = viol;
      best = c;
    }
    if (viol <= 0) return c;
  }
  if (bestViol > 1e-8) throw Error("locateCell: point outside reference block");
  return best;
}

BlockGeometry build_map(BlockKind kind, const GeoParams& params,
                        const SimplicialMesh& referenceMesh) {
  if (!params_admissible(kind, params))
    throw Error("build_map: parameters outside the admissible set");
  BlockGeometry g;
  g.kind_ = kind;
  g.params_ = params;
  g.mesh_ = &referenceMesh;
  g.aspect_ = block_aspect(kind);
  g.Q_ = rotation2d(params.rotation);

  if (kind == BlockKind::B) {
    // boundary displacement: rigid rotation of each outlet port about its
    // center, tapered along nearby walls, extended harmonically inside
    const auto& m = referenceMesh;
    const int nv = m.numVertices();
    const auto refPorts = reference_ports(kind);
    const double taper = 0.6;

    std::vector<bool> onBoundary(nv, false);
    for (const auto& f : m.boundaryFacets())
      for (int v : f) onBoundary[v] = true;

    Eigen::MatrixXd disp = Eigen::MatrixXd::Zero(nv, 2);
    for (int v = 0; v < nv; ++v) {
      if (!onBoundary[v]) continue;
      const Eigen::Vector2d x = m.vertices.row(v).head<2>();
      for (int k = 1; k <= 2; ++k) {
        const auto& port = refPorts[k];
        const double d = dist_point_segment(x, port.p0, port.p1);
        if (d >= taper) continue;
        const double w = (1.0 - d / taper) * (1.0 - d / taper);
        const Eigen::Vector2d center = 0.5 * (port.p0 + port.p1);
        const Eigen::Matrix2d R = rotation2d(params.outletAngles[k - 1]);
        disp.row(v) += (w * (R * (x - center) + center - x)).transpose();
      }
    }

    // P1 Laplace extension of the boundary data, per component
    std::vector<Eigen::Triplet<double>> trips;
    for (int c = 0; c < m.numCells(); ++c) {
      const Eigen::Vector2d a = m.vertices.row(m.cells(c, 0)).head<2>();
      const Eigen::Vector2d b = m.vertices.row(m.cells(c, 1)).head<2>();
      const Eigen::Vector2d d = m.vertices.row(m.cells(c, 2)).head<2>();
      Eigen::Matrix2d T;
      T.col(0) = b - a;
      T.col(1) = d - a;
      const double area = 0.5 * T.determinant();
      const Eigen::Matrix2d Tinv = T.inverse();
      Eigen::Matrix<double, 2, 3> grads;
      grads.col(0) = Tinv.transpose() * Eigen::Vector2d(-1, -1);
      grads.col(1) = Tinv.transpose() * Eigen::Vector2d(1, 0);
      grads.col(2) = Tinv.transpose() * Eigen::Vector2d(0, 1);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          trips.emplace_back(m.cells(c, i), m.cells(c, j),
                             area * grads.col(i).dot(grads.col(j)));
    }
    Eigen::SparseMatrix<double> K(nv, nv);
    K.setFromTriplets(trips.begin(), trips.end());

    std::vector<int> interior;
    std::vector<int> where(nv, -1);
    for (int v = 0; v < nv; ++v)
      if (!onBoundary[v]) {
        where[v] = static_cast<int>(interior.size());
        interior.push_back(v);
      }
    const int ni = static_cast<int>(interior.size());
    if (ni > 0) {
      std::vector<Eigen::Triplet<double>> tii;
      Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(ni, 2);
      for (int col = 0; col < K.outerSize(); ++col)
        for (Eigen::SparseMatrix<double>::InnerIterator it(K, col); it; ++it) {
          const int r = static_cast<int>(it.row()), cc = col;
          if (where[r] < 0) continue;
          if (where[cc] >= 0)
            tii.emplace_back(where[r], where[cc], it.value());
          else
            rhs.row(where[r]) -= it.value() * disp.row(cc);
        }
      Eigen::SparseMatrix<double> Kii(ni, ni);
      Kii.setFromTriplets(tii.begin(), tii.end());
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(Kii);
      if (solver.info() != Eigen::Success)
        throw Error("build_map: harmonic extension factorization failed");
      const Eigen::MatrixXd di = solver.solve(rhs);
      for (int i = 0; i < ni; ++i) disp.row(interior[i]) = di.row(i);
    }

    g.displaced_ = m.vertices + disp;

    // displaced triangulation must stay valid
    for (int c = 0; c < m.numCells(); ++c) {
      const Eigen::Matrix2d J = g.assemblyJacobian(c, Eigen::Vector2d::Zero());
      if (J.determinant() <= 0)
        throw Error("build_map: bifurcation deformation folds the mesh");
    }
  }

  // physical ports
  for (const auto& rp : reference_ports(kind)) {
    PhysicalPort pp;
    pp.tag = rp.tag;
    if (kind == BlockKind::B) {
      const int k = rp.tag.kind == FacetKind::Inlet ? 0 : rp.tag.index + 1;
      if (k == 0) {
        pp.p0 = g.Q_ * rp.p0 + params.translation;
        pp.p1 = g.Q_ * rp.p1 + params.translation;
        pp.outwardNormal = g.Q_ * rp.outwardNormal;
      } else {
        const Eigen::Vector2d center = 0.5 * (rp.p0 + rp.p1);
        const Eigen::Matrix2d R = rotation2d(params.outletAngles[k - 1]);
        pp.p0 = g.Q_ * (R * (rp.p0 - center) + center) + params.translation;
        pp.p1 = g.Q_ * (R * (rp.p1 - center) + center) + params.translation;
        pp.outwardNormal = g.Q_ * R * rp.outwardNormal;
      }
    } else {
      pp.p0 = g.map(rp.p0);
      pp.p1 = g.map(rp.p1);
      const double gAng =
          params.bend * (rp.tag.kind == FacetKind::Inlet ? 0.0 : 1.0);
      pp.outwardNormal =
          g.Q_ * rotation2d(gAng) * (rp.tag.kind == FacetKind::Inlet
                                         ? Eigen::Vector2d(-1, 0)
                                         : Eigen::Vector2d(1, 0));
    }
    pp.width = (pp.p1 - pp.p0).norm();
    g.ports_.push_back(pp);
  }
  return g;
}

Eigen::VectorXd piola_pullback(const BlockGeometry& geom,
                               const Eigen::MatrixXd& nodes,
                               const Eigen::VectorXd& values) {
  const int n = static_cast<int>(nodes.rows());
  if (values.size() != 2 * n)
    throw Error("piola_pullback: node/value size mismatch");
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Matrix2d J = geom.jacobian(nodes.row(i).head<2>());
    const double det = J.determinant();
    if (std::abs(det) < 1e-14) throw Error("piola_pullback: singular Jacobian");
    const Eigen::Vector2d v(values(2 * i), values(2 * i + 1));
    const Eigen::Vector2d vh = det * J.inverse() * v;
    out(2 * i) = vh.x();
    out(2 * i + 1) = vh.y();
  }
  return out;
}

Eigen::VectorXd piola_pushforward(const BlockGeometry& geom,
                                  const Eigen::MatrixXd& nodes,
                                  const Eigen::VectorXd& values) {
  const int n = static_cast<int>(nodes.rows());
  if (values.size() != 2 * n)
    throw Error("piola_pushforward: node/value size mismatch");
  Eigen::VectorXd out(2 * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::Matrix2d J = geom.jacobian(nodes.row(i).head<2>());
    const double det = J.determinant();
    if (std::abs(det) < 1e-14)
      throw Error("piola_pushforward: singular Jacobian");
    const Eigen::Vector2d vh(values(2 * i), values(2 * i + 1));
    const Eigen::Vector2d v = J * vh / det;
    out(2 * i) = v.x();
    out(2 * i + 1) = v.y();
  }
  return out;
}

double uniform_in(std::mt19937_64& rng, double a, double b) {
  const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return a + (b - a) * u;
}

GeoParams sample_params(BlockKind kind, const GeoParams& center,
                        const ParamHalfWidths& halfWidths,
                        std::mt19937_64& rng) {
  // worst-corner admissibility of the whole interval
  GeoParams worst = center;
  if (kind == BlockKind::B) {
    for (int k = 0; k < 2; ++k) {
      const double lo = center.outletAngles[k] - halfWidths.outletAngle;
      const double hi = center.outletAngles[k] + halfWidths.outletAngle;
      worst.outletAngles[k] = std::abs(lo) > std::abs(hi) ? lo : hi;
    }
  } else {
    const double blo = center.bend - halfWidths.bend;
    const double bhi = center.bend + halfWidths.bend;
    worst.bend = std::abs(blo) > std::abs(bhi) ? blo : bhi;
    worst.lengthRatio = center.lengthRatio - halfWidths.lengthRatio;
    worst.radiusRatio = center.radiusRatio + halfWidths.radiusRatio;
    if (center.lengthRatio + halfWidths.lengthRatio > param_bounds().maxRatio ||
        center.radiusRatio - halfWidths.radiusRatio < param_bounds().minRatio)
      throw Error("sample_params: interval escapes parameter bounds");
  }
  if (!params_admissible(kind, worst))
    throw Error("sample_params: interval escapes parameter bounds");

  GeoParams out = center;
  if (kind == BlockKind::B) {
    for (int k = 0; k < 2; ++k)
      out.outletAngles[k] =
          uniform_in(rng, center.outletAngles[k] - halfWidths.outletAngle,
                     center.outletAngles[k] + halfWidths.outletAngle);
  } else {
    out.bend = uniform_in(rng, center.bend - halfWidths.bend,
                          center.bend + halfWidths.bend);
    out.lengthRatio =
        uniform_in(rng, center.lengthRatio - halfWidths.lengthRatio,
                   center.lengthRatio + halfWidths.lengthRatio);
    out.radiusRatio =
        uniform_in(rng, center.radiusRatio - halfWidths.radiusRatio,
                   center.radiusRatio + halfWidths.radiusRatio);
  }
  return out;
}

}  // namespace rbe
