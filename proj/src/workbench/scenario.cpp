#include "rbe/workbench/scenario.hpp"

#include <cmath>

#include "rbe/errors.hpp"

namespace rbe {

namespace {

FacetTag port_tag(BlockKind kind, int port) {
  const auto ports = reference_ports(kind);
  if (port < 0 || port >= static_cast<int>(ports.size()))
    throw ConfigError("block has no port " + std::to_string(port));
  return ports[port].tag;
}

double waveform_at(const Scenario& cfg, double t) {
  if (cfg.waveform == "constant") return cfg.inflowRate;
  if (cfg.waveform == "halfsine") {
    const double span = cfg.tEnd - cfg.t0;
    return cfg.inflowRate * std::sin(M_PI * (t - cfg.t0) / span);
  }
  const auto& s = cfg.waveformSamples;
  if (t <= s.front().first) return cfg.inflowRate * s.front().second;
  if (t >= s.back().first) return cfg.inflowRate * s.back().second;
  for (size_t i = 1; i < s.size(); ++i)
    if (t <= s[i].first) {
      const double w =
          (t - s[i - 1].first) / (s[i].first - s[i - 1].first);
      return cfg.inflowRate *
             ((1 - w) * s[i - 1].second + w * s[i].second);
    }
  return cfg.inflowRate * s.back().second;
}

}  // namespace

double AssembledScenario::inflowRate(double t) const {
  const double r0 = rampStart();
  if (t <= r0) return 0.0;
  if (t < cfg.t0 && cfg.t0 > r0) {
    const double q0 = waveform_at(cfg, cfg.t0);
    return q0 * (1.0 - std::cos((t - r0) * M_PI / (cfg.t0 - r0))) / 2.0;
  }
  return waveform_at(cfg, t);
}

std::vector<GeoParams> placed_parameters(const Scenario& cfg) {
  std::vector<GeoParams> out(cfg.blocks.size());
  std::vector<std::vector<PhysicalPort>> ports(cfg.blocks.size());
  std::map<BlockKind, SimplicialMesh> meshes;
  for (size_t i = 0; i < cfg.blocks.size(); ++i) {
    const auto& bs = cfg.blocks[i];
    if (!meshes.count(bs.kind))
      meshes.emplace(bs.kind, generate_reference_block(bs.kind, 1));
    GeoParams p = bs.params;
    if (bs.kind == BlockKind::B) {
      p.lengthRatio = 1.0;
      p.radiusRatio = 1.0;
    }
    if (bs.parent >= 0) {
      const auto& pports = ports[bs.parent];
      if (bs.parentPort < 1 ||
          bs.parentPort >= static_cast<int>(pports.size()))
        throw ConfigError("block " + std::to_string(i) +
                          ": parent has no outlet port " +
                          std::to_string(bs.parentPort));
      const auto& pp = pports[bs.parentPort];
      if (bs.kind == BlockKind::B) {
        if (std::abs(pp.width - 1.0) > 1e-9)
          throw ConfigError("block " + std::to_string(i) +
                            ": bifurcation inlet needs a width-1 parent port");
      } else {
        p.radiusRatio = pp.width;  // inlet width must match the parent port
        const auto& b = param_bounds();
        if (p.radiusRatio < b.minRatio - 1e-12 ||
            p.radiusRatio > b.maxRatio + 1e-12)
          throw ConfigError("block " + std::to_string(i) +
                            ": derived radius ratio out of bounds");
      }
      p.rotation = std::atan2(pp.outwardNormal.y(), pp.outwardNormal.x());
      p.translation = 0.5 * (pp.p0 + pp.p1);
    }
    out[i] = p;
    const BlockGeometry g = build_map(cfg.blocks[i].kind, p,
                                      meshes.at(cfg.blocks[i].kind));
    ports[i] = g.ports();
  }
  return out;
}

std::unique_ptr<AssembledScenario> build_scenario(const Scenario& cfg) {
  auto as = std::make_unique<AssembledScenario>();
  as->cfg = cfg;

  const auto params = placed_parameters(cfg);
  for (const auto& bs : cfg.blocks)
    if (!as->meshes.count(bs.kind))
      as->meshes.emplace(bs.kind,
                         generate_reference_block(bs.kind, cfg.refinement));
  for (const auto& [kind, mesh] : as->meshes)
    as->spaces.emplace(kind, TaylorHoodSpace(mesh));

  as->geoms.reserve(cfg.blocks.size());
  for (size_t i = 0; i < cfg.blocks.size(); ++i)
    as->geoms.push_back(build_map(cfg.blocks[i].kind, params[i],
                                  as->meshes.at(cfg.blocks[i].kind)));

  GlobalSystem& sys = as->system;
  sys.basis = build_multiplier_basis(cfg.multiplierOrder, 2);
  sys.dt = cfg.dt;
  sys.scheme = bdf_coefficients(cfg.bdfOrder);

  // interior interfaces: one per parent-child link, owner = parent
  std::vector<std::vector<int>> usedPorts(cfg.blocks.size());
  for (size_t i = 1; i < cfg.blocks.size(); ++i) {
    const auto& bs = cfg.blocks[i];
    for (int u : usedPorts[bs.parent])
      if (u == bs.parentPort)
        throw ConfigError("parent port used twice on block " +
                          std::to_string(bs.parent));
    usedPorts[bs.parent].push_back(bs.parentPort);

    InterfaceDescriptor ifc;
    ifc.id = static_cast<int>(sys.interfaces.size());
    ifc.type = InterfaceType::Interior;
    const auto& pp = as->geoms[bs.parent].ports()[bs.parentPort];
    ifc.p0 = pp.p0;
    ifc.p1 = pp.p1;
    ifc.normalOwner = pp.outwardNormal;
    ifc.sides.push_back(
        {bs.parent, port_tag(cfg.blocks[bs.parent].kind, bs.parentPort), 1.0});
    ifc.sides.push_back({static_cast<int>(i),
                         port_tag(bs.kind, 0), -1.0});
    // the child inlet must land on the same segment
    const auto& cp = as->geoms[i].ports()[0];
    if ((cp.p0 - pp.p0).norm() > 1e-9 || (cp.p1 - pp.p1).norm() > 1e-9)
      throw Error("scenario: interface placement mismatch");
    sys.interfaces.push_back(ifc);
  }
  // root inlet interface (after interiors)
  {
    InterfaceDescriptor ifc;
    ifc.id = static_cast<int>(sys.interfaces.size());
    ifc.type = InterfaceType::Inlet;
    const auto& pp = as->geoms[0].ports()[0];
    ifc.p0 = pp.p0;
    ifc.p1 = pp.p1;
    ifc.normalOwner = pp.outwardNormal;
    ifc.sides.push_back({0, port_tag(cfg.blocks[0].kind, 0), 1.0});
    as->inletSegment = ifc.id;
    sys.interfaces.push_back(ifc);
  }

  // per-block operators
  for (size_t i = 0; i < cfg.blocks.size(); ++i) {
    SystemBlock b;
    b.space = &as->spaces.at(cfg.blocks[i].kind);
    b.geom = &as->geoms[i];
    b.rho = cfg.density;
    b.mu = cfg.viscosity;
    b.ops = assemble_static(*b.space, b.geom, b.rho, b.mu);
    b.wallDofs = b.space->wallDofs();
    b.Mc = b.ops.M;
    b.Kc = b.ops.K;
    b.Dc = b.ops.D;
    constrain_rows_cols(b.Mc, b.wallDofs);
    constrain_rows_cols(b.Kc, b.wallDofs);
    constrain_rows_cols(b.Dc, b.wallDofs, /*rows=*/false, /*cols=*/true);
    sys.blocks.push_back(std::move(b));
  }

  // free outlet ports keep the natural (Neumann) condition
  {
    std::vector<std::vector<int>> used(cfg.blocks.size());
    for (size_t i = 1; i < cfg.blocks.size(); ++i)
      used[cfg.blocks[i].parent].push_back(cfg.blocks[i].parentPort);
    for (size_t b = 0; b < cfg.blocks.size(); ++b) {
      const auto ports = reference_ports(cfg.blocks[b].kind);
      for (int p = 1; p < static_cast<int>(ports.size()); ++p) {
        bool taken = false;
        for (int u : used[b]) taken = taken || (u == p);
        if (!taken) sys.blocks[b].neumannPorts.push_back(ports[p].tag);
      }
    }
  }

  // coupling matrices
  for (const auto& ifc : sys.interfaces) {
    for (size_t s = 0; s < ifc.sides.size(); ++s) {
      const auto& side = ifc.sides[s];
      Eigen::MatrixXd B =
          assemble_coupling(*sys.blocks[side.block].space,
                            as->geoms[side.block], ifc, sys.basis,
                            static_cast<int>(s));
      for (int d : sys.blocks[side.block].wallDofs) B.col(d).setZero();
      sys.blocks[side.block].couplings.push_back({ifc.id, std::move(B)});
    }
  }
  sys.buildLayout();

  // weak inflow data: parabolic profile with unit flow rate on the inlet
  {
    const auto& ifc = sys.interfaces[as->inletSegment];
    const auto& side = ifc.sides[0];
    const Eigen::Vector2d mid = 0.5 * (ifc.p0 + ifc.p1);
    const Eigen::Vector2d tang = (ifc.p1 - ifc.p0).normalized();
    const Eigen::Vector2d inward = -ifc.normalOwner;
    const double W = ifc.width();
    auto profile = [=](const Eigen::Vector2d& x) -> Eigen::Vector2d {
      const Eigen::Vector2d rel = x - mid;
      if ((rel - rel.dot(tang) * tang).norm() > 1e-8) return {0.0, 0.0};
      const double s = 2.0 * rel.dot(tang) / W;
      if (std::abs(s) > 1.0 + 1e-12) return {0.0, 0.0};
      return (1.5 * (1.0 - s * s) / W) * inward;
    };
    const Eigen::VectorXd gUnit = interpolate_velocity(
        *sys.blocks[side.block].space, &as->geoms[side.block], profile);
    // find the inlet coupling rows of that block
    const auto& bl = sys.blocks[side.block];
    const Eigen::MatrixXd* Bin = nullptr;
    for (const auto& c : bl.couplings)
      if (c.segment == as->inletSegment) Bin = &c.B;
    InletData in;
    in.block = side.block;
    in.segment = as->inletSegment;
    in.rhsUnit = (*Bin) * gUnit;
    AssembledScenario* raw = as.get();
    in.rate = [raw](double t) { return raw->inflowRate(t); };
    sys.inlets.push_back(std::move(in));
  }
  return as;
}

}  // namespace rbe
