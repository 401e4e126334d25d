#include "rbe/workbench/probes.hpp"

#include <cmath>

#include "rbe/errors.hpp"
#include "rbe/quadrature.hpp"

namespace rbe {

namespace {

// physical flux int u.n over one port of one block
double port_flow(const AssembledScenario& as, int block, int port,
                 const Eigen::VectorXd& Y) {
  const auto& sys = as.system;
  const auto& sb = sys.blocks[block];
  const auto& lb = sys.layout.blocks[block];
  const auto u = Y.segment(lb.uOffset, lb.nu);
  const auto& geom = as.geoms[block];
  const auto& pp = geom.ports()[port];
  const Eigen::Vector2d n = pp.outwardNormal;

  double flow = 0;
  const auto& gr = gauss_legendre(6);
  for (const auto& pf : tagged_port_facets(*sb.space, pp.tag)) {
    const Eigen::Vector2d a = sb.space->mesh().vertices.row(pf.verts[0]).head<2>();
    const Eigen::Vector2d b = sb.space->mesh().vertices.row(pf.verts[1]).head<2>();
    const Eigen::Vector2d pa = geom.mapOnCell(pf.cell, a);
    const Eigen::Vector2d pb = geom.mapOnCell(pf.cell, b);
    const double scale = 0.5 * (pb - pa).norm();
    for (size_t q = 0; q < gr.points.size(); ++q) {
      const double t = 0.5 * (gr.points[q] + 1.0);
      const Eigen::Vector2d xhat = (1 - t) * a + t * b;
      const Eigen::Vector2d v = sb.space->evalVelocity(pf.cell, xhat, u);
      flow += gr.weights[q] * scale * v.dot(n);
    }
  }
  return flow;
}

}  // namespace

std::vector<OutletRef> free_outlets(const AssembledScenario& as) {
  std::vector<OutletRef> out;
  const auto& cfg = as.cfg;
  std::vector<std::vector<int>> used(cfg.blocks.size());
  for (size_t i = 1; i < cfg.blocks.size(); ++i)
    used[cfg.blocks[i].parent].push_back(cfg.blocks[i].parentPort);
  for (size_t b = 0; b < cfg.blocks.size(); ++b) {
    const int nports = static_cast<int>(as.geoms[b].ports().size());
    for (int p = 1; p < nports; ++p) {
      bool taken = false;
      for (int u : used[b]) taken = taken || (u == p);
      if (!taken) out.push_back({static_cast<int>(b), p});
    }
  }
  return out;
}

double inlet_flow_rate(const AssembledScenario& as, const Eigen::VectorXd& Y) {
  return -port_flow(as, 0, 0, Y);
}

ProbeSample compute_probes(const AssembledScenario& as,
                           const Eigen::VectorXd& Y, double time) {
  const auto& sys = as.system;
  ProbeSample ps;
  ps.time = time;

  // inlet pressure: length-averaged p over the inlet port
  {
    const auto& sb = sys.blocks[0];
    const auto& lb = sys.layout.blocks[0];
    const auto p = Y.segment(lb.pOffset, lb.np);
    const auto& geom = as.geoms[0];
    const auto& pp = geom.ports()[0];
    double num = 0, den = 0;
    const auto& gr = gauss_legendre(6);
    for (const auto& pf : tagged_port_facets(*sb.space, pp.tag)) {
      const Eigen::Vector2d a =
          sb.space->mesh().vertices.row(pf.verts[0]).head<2>();
      const Eigen::Vector2d b =
          sb.space->mesh().vertices.row(pf.verts[1]).head<2>();
      const Eigen::Vector2d pa = geom.mapOnCell(pf.cell, a);
      const Eigen::Vector2d pb = geom.mapOnCell(pf.cell, b);
      const double scale = 0.5 * (pb - pa).norm();
      for (size_t q = 0; q < gr.points.size(); ++q) {
        const double t = 0.5 * (gr.points[q] + 1.0);
        const Eigen::Vector2d xhat = (1 - t) * a + t * b;
        num += gr.weights[q] * scale *
               sb.space->evalPressure(pf.cell, xhat, p);
        den += gr.weights[q] * scale;
      }
    }
    ps.inletPressure = den > 0 ? num / den : 0.0;
  }

  for (const auto& o : free_outlets(as))
    ps.outletFlowRates.push_back(port_flow(as, o.block, o.port, Y));

  // wall shear stress per wall facet
  for (size_t j = 0; j < sys.blocks.size(); ++j) {
    const auto& sb = sys.blocks[j];
    const auto& lb = sys.layout.blocks[j];
    const auto u = Y.segment(lb.uOffset, lb.nu);
    const auto p = Y.segment(lb.pOffset, lb.np);
    const auto& geom = as.geoms[j];
    const auto& mesh = sb.space->mesh();
    const auto& gr = gauss_legendre(4);
    for (const auto& [key, tag] : mesh.facetTags) {
      if (tag.kind != FacetKind::Wall) continue;
      const int cell = sb.space->boundaryCell(key);
      const Eigen::Vector2d a = mesh.vertices.row(key[0]).head<2>();
      const Eigen::Vector2d b = mesh.vertices.row(key[1]).head<2>();
      // reference outward normal
      Eigen::Vector2d tref = (b - a).normalized();
      Eigen::Vector2d nref(tref.y(), -tref.x());
      Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
      for (int v = 0; v < 3; ++v)
        centroid += mesh.vertices.row(mesh.cells(cell, v)).head<2>();
      centroid /= 3.0;
      if (nref.dot(0.5 * (a + b) - centroid) < 0) nref = -nref;

      double num = 0, den = 0;
      std::array<Eigen::Vector2d, 6> G;
      std::array<double, 6> N;
      for (size_t q = 0; q < gr.points.size(); ++q) {
        const double t = 0.5 * (gr.points[q] + 1.0);
        const Eigen::Vector2d xhat = (1 - t) * a + t * b;
        const Eigen::Matrix2d Jg = geom.assemblyJacobian(cell, xhat);
        const Eigen::Matrix2d JgInvT = Jg.inverse().transpose();
        // physical gradient of velocity and pressure value
        sb.space->p2Gradients(cell, xhat, G);
        sb.space->p2Values(cell, xhat, N);
        Eigen::Matrix2d gradU = Eigen::Matrix2d::Zero();
        for (int loc = 0; loc < 6; ++loc) {
          const int n = sb.space->cellNode(cell, loc);
          const Eigen::Vector2d g = JgInvT * G[loc];
          gradU.row(0) += u(2 * n) * g.transpose();
          gradU.row(1) += u(2 * n + 1) * g.transpose();
        }
        const double pv = sb.space->evalPressure(cell, xhat, p);
        const Eigen::Matrix2d sigma =
            sb.mu * (gradU + gradU.transpose()) -
            pv * Eigen::Matrix2d::Identity();
        // physical normal and line element (Nanson)
        const Eigen::Vector2d nphys = Jg.determinant() * (JgInvT * nref);
        const Eigen::Vector2d n = nphys.normalized();
        const double lineScale =
            0.5 * (b - a).norm() * (Jg * tref).norm();
        const Eigen::Vector2d traction = sigma * n;
        const Eigen::Vector2d tangential = traction - traction.dot(n) * n;
        num += gr.weights[q] * lineScale * tangential.norm();
        den += gr.weights[q] * lineScale;
      }
      ps.wss.push_back(den > 0 ? num / den : 0.0);
    }
  }
  return ps;
}

std::pair<double, double> compute_errors(
    const AssembledScenario& as, const std::vector<double>& times,
    const std::vector<Eigen::VectorXd>& ref,
    const std::vector<Eigen::VectorXd>& approx) {
  if (ref.size() != approx.size() || ref.size() != times.size())
    throw Error("compute_errors: mismatched trajectories");
  const auto& sys = as.system;
  double numU = 0, denU = 0, numP = 0, denP = 0;
  for (size_t k = 0; k < ref.size(); ++k) {
    if (times[k] < as.cfg.t0 - 1e-12) continue;
    double w = 1.0;
    if (k == 0 || times[k - 1] < as.cfg.t0 - 1e-12 || k + 1 == ref.size())
      w = 0.5;  // trapezoid ends
    for (size_t j = 0; j < sys.blocks.size(); ++j) {
      const auto& lb = sys.layout.blocks[j];
      const auto& ops = sys.blocks[j].ops;
      const Eigen::VectorXd du = ref[k].segment(lb.uOffset, lb.nu) -
                                 approx[k].segment(lb.uOffset, lb.nu);
      const Eigen::VectorXd dp = ref[k].segment(lb.pOffset, lb.np) -
                                 approx[k].segment(lb.pOffset, lb.np);
      const Eigen::VectorXd ur = ref[k].segment(lb.uOffset, lb.nu);
      const Eigen::VectorXd pr = ref[k].segment(lb.pOffset, lb.np);
      numU += w * du.dot(ops.Xu * du);
      denU += w * ur.dot(ops.Xu * ur);
      numP += w * dp.dot(ops.Xp * dp);
      denP += w * pr.dot(ops.Xp * pr);
    }
  }
  const double eu = denU > 0 ? std::sqrt(numU / denU) : 0.0;
  const double ep = denP > 0 ? std::sqrt(numP / denP) : 0.0;
  return {eu, ep};
}

}  // namespace rbe
