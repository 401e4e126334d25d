#include "rbe/fem.hpp"

#include <algorithm>
#include <cmath>

#include "rbe/errors.hpp"
#include "rbe/quadrature.hpp"

namespace rbe {

namespace {

// P2 shape functions on the unit triangle, barycentric ordering:
// nodes 0..2 vertices, 3+e on the edge opposite vertex e.
void p2_shape(double x, double y, std::array<double, 6>& N) {
  const double l0 = 1.0 - x - y, l1 = x, l2 = y;
  N[0] = l0 * (2 * l0 - 1);
  N[1] = l1 * (2 * l1 - 1);
  N[2] = l2 * (2 * l2 - 1);
  N[3] = 4 * l1 * l2;
  N[4] = 4 * l2 * l0;
  N[5] = 4 * l0 * l1;
}

void p2_shape_grad(double x, double y, std::array<Eigen::Vector2d, 6>& G) {
  const double l0 = 1.0 - x - y, l1 = x, l2 = y;
  const Eigen::Vector2d g0(-1, -1), g1(1, 0), g2(0, 1);
  G[0] = (4 * l0 - 1) * g0;
  G[1] = (4 * l1 - 1) * g1;
  G[2] = (4 * l2 - 1) * g2;
  G[3] = 4 * (l2 * g1 + l1 * g2);
  G[4] = 4 * (l0 * g2 + l2 * g0);
  G[5] = 4 * (l1 * g0 + l0 * g1);
}

void p1_shape(double x, double y, std::array<double, 3>& N) {
  N[0] = 1.0 - x - y;
  N[1] = x;
  N[2] = y;
}

struct CellFrame {
  Eigen::Vector2d v0;
  Eigen::Matrix2d Jk;      // unit triangle -> reference element
  double detJk = 0;
  Eigen::Matrix2d JkInvT;
};

CellFrame cell_frame(const SimplicialMesh& m, int c) {
  CellFrame f;
  f.v0 = m.vertices.row(m.cells(c, 0)).head<2>();
  const Eigen::Vector2d v1 = m.vertices.row(m.cells(c, 1)).head<2>();
  const Eigen::Vector2d v2 = m.vertices.row(m.cells(c, 2)).head<2>();
  f.Jk.col(0) = v1 - f.v0;
  f.Jk.col(1) = v2 - f.v0;
  f.detJk = f.Jk.determinant();
  if (f.detJk <= 0) throw Error("assembly: degenerate or inverted cell");
  f.JkInvT = f.Jk.inverse().transpose();
  return f;
}

// everything needed at one quadrature point
struct QPoint {
  Eigen::Vector2d xhat;
  double weight = 0;                       // includes both Jacobian factors
  std::array<double, 6> N;                 // P2 values
  std::array<Eigen::Vector2d, 6> G;        // physical P2 gradients
  std::array<double, 3> L;                 // P1 values
};

template <typename F>
void for_each_qpoint(const TaylorHoodSpace& space, const BlockGeometry* geom,
                     int degree, F&& fn) {
  const auto& rule = triangle_rule(degree);
  const SimplicialMesh& m = space.mesh();
  std::vector<std::array<double, 6>> Nq(rule.points.size());
  std::vector<std::array<Eigen::Vector2d, 6>> Gq(rule.points.size());
  std::vector<std::array<double, 3>> Lq(rule.points.size());
  for (size_t q = 0; q < rule.points.size(); ++q) {
    p2_shape(rule.points[q].x(), rule.points[q].y(), Nq[q]);
    p2_shape_grad(rule.points[q].x(), rule.points[q].y(), Gq[q]);
    p1_shape(rule.points[q].x(), rule.points[q].y(), Lq[q]);
  }
  QPoint qp;
  for (int c = 0; c < m.numCells(); ++c) {
    const CellFrame f = cell_frame(m, c);
    for (size_t q = 0; q < rule.points.size(); ++q) {
      qp.xhat = f.v0 + f.Jk * rule.points[q];
      Eigen::Matrix2d Jg = Eigen::Matrix2d::Identity();
      double detJg = 1.0;
      if (geom) {
        Jg = geom->assemblyJacobian(c, qp.xhat);
        detJg = Jg.determinant();
        if (detJg <= 0) throw Error("assembly: non-positive map Jacobian");
      }
      qp.weight = rule.weights[q] * f.detJk * detJg;
      qp.N = Nq[q];
      qp.L = Lq[q];
      const Eigen::Matrix2d T =
          geom ? Eigen::Matrix2d(Jg.inverse().transpose() * f.JkInvT)
               : f.JkInvT;
      for (int a = 0; a < 6; ++a) qp.G[a] = T * Gq[q][a];
      fn(c, qp);
    }
  }
}

}  // namespace

TaylorHoodSpace::TaylorHoodSpace(const SimplicialMesh& mesh)
    : mesh_(&mesh), edgeData_(mesh.buildEdges()) {
  const int nv = mesh.numVertices();
  const int ne = static_cast<int>(edgeData_.edges.size());
  nodes_.resize(nv + ne, 2);
  nodes_.topRows(nv) = mesh.vertices.leftCols(2);
  for (int e = 0; e < ne; ++e) {
    const auto& [a, b] = edgeData_.edges[e];
    nodes_.row(nv + e) =
        0.5 * (mesh.vertices.row(a).head<2>() + mesh.vertices.row(b).head<2>());
    edgeIndex_[{a, b}] = e;
  }
  for (const auto& [f, tag] : mesh.facetTags) {
    facetCell_[f] = mesh.facetCell(f);
    if (tag.kind != FacetKind::Wall) continue;
    for (int v : f)
      for (int c = 0; c < 2; ++c) wallDofs_.push_back(2 * v + c);
    const int en = edgeNode(f[0], f[1]);
    wallDofs_.push_back(2 * en);
    wallDofs_.push_back(2 * en + 1);
  }
  std::sort(wallDofs_.begin(), wallDofs_.end());
  wallDofs_.erase(std::unique(wallDofs_.begin(), wallDofs_.end()),
                  wallDofs_.end());
}

int TaylorHoodSpace::cellNode(int cell, int a) const {
  if (a < 3) return mesh_->cells(cell, a);
  return mesh_->numVertices() + edgeData_.cellEdges[cell][a - 3];
}

int TaylorHoodSpace::edgeNode(int va, int vb) const {
  const std::array<int, 2> k{std::min(va, vb), std::max(va, vb)};
  auto it = edgeIndex_.find(k);
  if (it == edgeIndex_.end()) throw Error("edgeNode: no such edge");
  return mesh_->numVertices() + it->second;
}

int TaylorHoodSpace::boundaryCell(const FacetKey& f) const {
  auto it = facetCell_.find(f);
  if (it != facetCell_.end()) return it->second;
  return mesh_->facetCell(f);
}

void TaylorHoodSpace::p2Values(int cell, const Eigen::Vector2d& xhat,
                               std::array<double, 6>& vals) const {
  const CellFrame f = cell_frame(*mesh_, cell);
  const Eigen::Vector2d uv = f.Jk.inverse() * (xhat - f.v0);
  p2_shape(uv.x(), uv.y(), vals);
}

void TaylorHoodSpace::p2Gradients(int cell, const Eigen::Vector2d& xhat,
                                  std::array<Eigen::Vector2d, 6>& grads) const {
  const CellFrame f = cell_frame(*mesh_, cell);
  const Eigen::Vector2d uv = f.Jk.inverse() * (xhat - f.v0);
  p2_shape_grad(uv.x(), uv.y(), grads);
  for (auto& g : grads) g = f.JkInvT * g;
}

Eigen::Vector2d TaylorHoodSpace::evalVelocity(int cell,
                                              const Eigen::Vector2d& xhat,
                                              const Eigen::VectorXd& u) const {
  std::array<double, 6> N;
  p2Values(cell, xhat, N);
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  for (int a = 0; a < 6; ++a) {
    const int n = cellNode(cell, a);
    out.x() += N[a] * u(2 * n);
    out.y() += N[a] * u(2 * n + 1);
  }
  return out;
}

double TaylorHoodSpace::evalPressure(int cell, const Eigen::Vector2d& xhat,
                                     const Eigen::VectorXd& p) const {
  const CellFrame f = cell_frame(*mesh_, cell);
  const Eigen::Vector2d uv = f.Jk.inverse() * (xhat - f.v0);
  std::array<double, 3> L;
  p1_shape(uv.x(), uv.y(), L);
  double out = 0;
  for (int a = 0; a < 3; ++a) out += L[a] * p(mesh_->cells(cell, a));
  return out;
}

int TaylorHoodSpace::locateCell(const Eigen::Vector2d& xhat) const {
  const SimplicialMesh& m = *mesh_;
  int best = -1;
  double bestViol = 1e30;
  for (int c = 0; c < m.numCells(); ++c) {
    const CellFrame f = cell_frame(m, c);
    const Eigen::Vector2d uv = f.Jk.inverse() * (xhat - f.v0);
    const double viol = std::max({-uv.x(), -uv.y(), uv.x() + uv.y() - 1.0});
    if (viol <= 0) return c;
    if (viol < bestViol) {
      bestViol = viol;
      best = c;
    }
  }
  if (bestViol > 1e-8) throw Error("locateCell: point outside mesh");
  return best;
}

BlockOperators assemble_static(const TaylorHoodSpace& space,
                               const BlockGeometry* geom, double rho,
                               double mu) {
  if (rho <= 0 || mu <= 0) throw Error("assemble_static: rho, mu must be > 0");
  const int nu = space.numVelocityDofs();
  const int np = space.numPressureDofs();
  std::vector<Eigen::Triplet<double>> tM, tK, tD, tXu, tXp;
  for_each_qpoint(space, geom, 5, [&](int c, const QPoint& qp) {
    const double w = qp.weight;
    for (int a = 0; a < 6; ++a) {
      const int na = space.cellNode(c, a);
      for (int b = 0; b < 6; ++b) {
        const int nb = space.cellNode(c, b);
        const double mass = w * qp.N[a] * qp.N[b];
        const double lap = w * qp.G[a].dot(qp.G[b]);
        for (int comp = 0; comp < 2; ++comp) {
          tM.emplace_back(2 * na + comp, 2 * nb + comp, rho * mass);
          tXu.emplace_back(2 * na + comp, 2 * nb + comp, mass + lap);
        }
        for (int ci = 0; ci < 2; ++ci)
          for (int cj = 0; cj < 2; ++cj) {
            double v = mu * w * qp.G[a](cj) * qp.G[b](ci);
            if (ci == cj) v += mu * lap;
            tK.emplace_back(2 * na + ci, 2 * nb + cj, v);
          }
      }
      for (int i = 0; i < 3; ++i) {
        const int ni = space.mesh().cells(c, i);
        for (int comp = 0; comp < 2; ++comp)
          tD.emplace_back(ni, 2 * na + comp, -w * qp.L[i] * qp.G[a](comp));
      }
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        tXp.emplace_back(space.mesh().cells(c, i), space.mesh().cells(c, j),
                         w * qp.L[i] * qp.L[j]);
  });
  BlockOperators ops;
  ops.M.resize(nu, nu);
  ops.M.setFromTriplets(tM.begin(), tM.end());
  ops.K.resize(nu, nu);
  ops.K.setFromTriplets(tK.begin(), tK.end());
  ops.D.resize(np, nu);
  ops.D.setFromTriplets(tD.begin(), tD.end());
  ops.Xu.resize(nu, nu);
  ops.Xu.setFromTriplets(tXu.begin(), tXu.end());
  ops.Xp.resize(np, np);
  ops.Xp.setFromTriplets(tXp.begin(), tXp.end());
  return ops;
}

SpMat assemble_convective(const TaylorHoodSpace& space,
                          const BlockGeometry* geom, double rho,
                          const Eigen::VectorXd& u) {
  const int nu = space.numVelocityDofs();
  if (u.size() != nu) throw Error("assemble_convective: dimension mismatch");
  std::vector<Eigen::Triplet<double>> trips;
  for_each_qpoint(space, geom, 5, [&](int c, const QPoint& qp) {
    Eigen::Vector2d uq = Eigen::Vector2d::Zero();
    for (int a = 0; a < 6; ++a) {
      const int n = space.cellNode(c, a);
      uq.x() += qp.N[a] * u(2 * n);
      uq.y() += qp.N[a] * u(2 * n + 1);
    }
    for (int a = 0; a < 6; ++a) {
      const int na = space.cellNode(c, a);
      for (int b = 0; b < 6; ++b) {
        const int nb = space.cellNode(c, b);
        const double v = rho * qp.weight * qp.N[a] * uq.dot(qp.G[b]);
        for (int comp = 0; comp < 2; ++comp)
          trips.emplace_back(2 * na + comp, 2 * nb + comp, v);
      }
    }
  });
  SpMat C(nu, nu);
  C.setFromTriplets(trips.begin(), trips.end());
  return C;
}

SpMat assemble_convective_prime(const TaylorHoodSpace& space,
                                const BlockGeometry* geom, double rho,
                                const Eigen::VectorXd& u) {
  const int nu = space.numVelocityDofs();
  if (u.size() != nu)
    throw Error("assemble_convective_prime: dimension mismatch");
  std::vector<Eigen::Triplet<double>> trips;
  for_each_qpoint(space, geom, 5, [&](int c, const QPoint& qp) {
    Eigen::Matrix2d gradU = Eigen::Matrix2d::Zero();
    for (int a = 0; a < 6; ++a) {
      const int n = space.cellNode(c, a);
      gradU.row(0) += u(2 * n) * qp.G[a].transpose();
      gradU.row(1) += u(2 * n + 1) * qp.G[a].transpose();
    }
    for (int a = 0; a < 6; ++a) {
      const int na = space.cellNode(c, a);
      for (int b = 0; b < 6; ++b) {
        const int nb = space.cellNode(c, b);
        const double nn = rho * qp.weight * qp.N[a] * qp.N[b];
        for (int ci = 0; ci < 2; ++ci)
          for (int cj = 0; cj < 2; ++cj)
            trips.emplace_back(2 * na + ci, 2 * nb + cj, nn * gradU(ci, cj));
      }
    }
  });
  SpMat C(nu, nu);
  C.setFromTriplets(trips.begin(), trips.end());
  return C;
}

double convective_trilinear(const TaylorHoodSpace& space,
                            const BlockGeometry* geom, double rho,
                            const Eigen::MatrixXd& modes, int i, int l, int m) {
  if (i < 0 || l < 0 || m < 0 || i >= modes.cols() || l >= modes.cols() ||
      m >= modes.cols())
    throw Error("convective_trilinear: mode index out of range");
  auto T = assemble_convective_tensor(space, geom, rho, modes,
                                      std::max({i, l, m}) + 1,
                                      std::max({i, l, m}) + 1);
  return T[i](l, m);
}

std::vector<Eigen::MatrixXd> assemble_convective_tensor(
    const TaylorHoodSpace& space, const BlockGeometry* geom, double rho,
    const Eigen::MatrixXd& modes, int nI, int nC) {
  if (nI > modes.cols() || nC > modes.cols())
    throw Error("assemble_convective_tensor: index out of range");
  std::vector<Eigen::MatrixXd> T(nI, Eigen::MatrixXd::Zero(nC, nC));
  const int nTot = std::max(nI, nC);
  Eigen::MatrixXd vals(nTot, 2);       // mode values at one qpoint
  Eigen::MatrixXd grads(nC, 4);        // row-major 2x2 gradient per mode
  for_each_qpoint(space, geom, 5, [&](int c, const QPoint& qp) {
    vals.setZero();
    grads.setZero();
    for (int a = 0; a < 6; ++a) {
      const int n = space.cellNode(c, a);
      for (int k = 0; k < nTot; ++k) {
        vals(k, 0) += qp.N[a] * modes(2 * n, k);
        vals(k, 1) += qp.N[a] * modes(2 * n + 1, k);
      }
      for (int k = 0; k < nC; ++k) {
        grads(k, 0) += modes(2 * n, k) * qp.G[a](0);
        grads(k, 1) += modes(2 * n, k) * qp.G[a](1);
        grads(k, 2) += modes(2 * n + 1, k) * qp.G[a](0);
        grads(k, 3) += modes(2 * n + 1, k) * qp.G[a](1);
      }
    }
    for (int m = 0; m < nC; ++m) {
      const Eigen::Vector2d zm = vals.row(m).transpose();
      for (int l = 0; l < nC; ++l) {
        // (z_m . grad) z_l
        const Eigen::Vector2d adv(zm.x() * grads(l, 0) + zm.y() * grads(l, 1),
                                  zm.x() * grads(l, 2) + zm.y() * grads(l, 3));
        for (int i = 0; i < nI; ++i)
          T[i](l, m) += rho * qp.weight * adv.dot(vals.row(i).transpose());
      }
    }
  });
  return T;
}

Eigen::MatrixXd physical_velocity_nodes(const TaylorHoodSpace& space,
                                        const BlockGeometry* geom) {
  if (!geom) return space.velocityNodes();
  Eigen::MatrixXd out(space.numVelocityNodes(), 2);
  for (int i = 0; i < space.numVelocityNodes(); ++i)
    out.row(i) = geom->map(space.velocityNodes().row(i).head<2>()).transpose();
  return out;
}

Eigen::VectorXd interpolate_velocity(
    const TaylorHoodSpace& space, const BlockGeometry* geom,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f) {
  const Eigen::MatrixXd pts = physical_velocity_nodes(space, geom);
  Eigen::VectorXd out(space.numVelocityDofs());
  for (int i = 0; i < pts.rows(); ++i) {
    const Eigen::Vector2d v = f(pts.row(i).head<2>());
    out(2 * i) = v.x();
    out(2 * i + 1) = v.y();
  }
  return out;
}

Eigen::VectorXd interpolate_pressure(
    const TaylorHoodSpace& space, const BlockGeometry* geom,
    const std::function<double(const Eigen::Vector2d&)>& f) {
  const SimplicialMesh& m = space.mesh();
  Eigen::VectorXd out(space.numPressureDofs());
  for (int i = 0; i < m.numVertices(); ++i) {
    Eigen::Vector2d x = m.vertices.row(i).head<2>();
    if (geom) x = geom->map(x);
    out(i) = f(x);
  }
  return out;
}

Eigen::VectorXd assemble_divergence_functional(
    const TaylorHoodSpace& space,
    const std::function<double(int, const Eigen::Vector2d&)>& divfn) {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(space.numPressureDofs());
  for_each_qpoint(space, nullptr, 5, [&](int c, const QPoint& qp) {
    const double dv = divfn(c, qp.xhat);
    for (int i = 0; i < 3; ++i)
      r(space.mesh().cells(c, i)) -= qp.weight * qp.L[i] * dv;
  });
  return r;
}

Eigen::VectorXd assemble_forcing(
    const TaylorHoodSpace& space, const BlockGeometry* geom,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& f,
    const std::function<Eigen::Vector2d(const Eigen::Vector2d&)>& outletH,
    const std::vector<FacetTag>& neumannPorts) {
  Eigen::VectorXd F = Eigen::VectorXd::Zero(space.numVelocityDofs());
  if (f) {
    for_each_qpoint(space, geom, 5, [&](int c, const QPoint& qp) {
      const Eigen::Vector2d x =
          geom ? geom->mapOnCell(c, qp.xhat) : qp.xhat;
      const Eigen::Vector2d fv = f(x);
      for (int a = 0; a < 6; ++a) {
        const int n = space.cellNode(c, a);
        F(2 * n) += qp.weight * qp.N[a] * fv.x();
        F(2 * n + 1) += qp.weight * qp.N[a] * fv.y();
      }
    });
  }
  if (outletH) {
    for (const auto& [key, tag] : space.mesh().facetTags) {
      bool wanted = false;
      for (const auto& t : neumannPorts) wanted = wanted || (t == tag);
      if (!wanted) continue;
      const int cell = space.boundaryCell(key);
      const Eigen::Vector2d a = space.mesh().vertices.row(key[0]).head<2>();
      const Eigen::Vector2d b = space.mesh().vertices.row(key[1]).head<2>();
      const auto& gr = gauss_legendre(5);
      for (size_t q = 0; q < gr.points.size(); ++q) {
        const double s = 0.5 * (gr.points[q] + 1.0);
        const Eigen::Vector2d xhat = (1 - s) * a + s * b;
        Eigen::Vector2d x = xhat;
        double lineScale = 0.5 * (b - a).norm();
        if (geom) {
          const Eigen::Vector2d pa = geom->mapOnCell(cell, a);
          const Eigen::Vector2d pb = geom->mapOnCell(cell, b);
          x = (1 - s) * pa + s * pb;
          lineScale = 0.5 * (pb - pa).norm();
        }
        const Eigen::Vector2d hv = outletH(x);
        std::array<double, 6> N;
        space.p2Values(cell, xhat, N);
        for (int loc = 0; loc < 6; ++loc) {
          if (N[loc] == 0.0) continue;
          const int n = space.cellNode(cell, loc);
          F(2 * n) += gr.weights[q] * lineScale * N[loc] * hv.x();
          F(2 * n + 1) += gr.weights[q] * lineScale * N[loc] * hv.y();
        }
      }
    }
  }
  return F;
}

void constrain_rows_cols(SpMat& A, const std::vector<int>& dofs, bool rows,
                         bool cols) {
  if (dofs.empty()) return;
  std::vector<char> mask(std::max(A.rows(), A.cols()), 0);
  for (int d : dofs) mask[d] = 1;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SpMat::InnerIterator it(A, k); it; ++it) {
      if ((rows && it.row() < A.rows() && mask[it.row()]) ||
          (cols && it.col() < A.cols() && mask[it.col()]))
        it.valueRef() = 0.0;
    }
  A.prune(0.0);
}

std::vector<PortFacet> tagged_port_facets(const TaylorHoodSpace& space,
                                          const FacetTag& tag) {
  std::vector<PortFacet> out;
  for (const auto& f : space.mesh().taggedFacets(tag)) {
    PortFacet pf;
    pf.key = f;
    pf.cell = space.boundaryCell(f);
    pf.verts = {f[0], f[1]};
    pf.midNode = space.edgeNode(f[0], f[1]);
    out.push_back(pf);
  }
  return out;
}

}  // namespace rbe
