#include "rbe/assembly.hpp"

#include "rbe/errors.hpp"

namespace rbe {

BdfScheme bdf_coefficients(int sigma) {
  if (sigma == 1) return {{1.0}, 1.0};
  if (sigma == 2) return {{4.0 / 3.0, -1.0 / 3.0}, 2.0 / 3.0};
  throw Error("bdf_coefficients: unsupported order");
}

void GlobalSystem::buildLayout() {
  layout = BlockLayout{};
  int off = 0;
  for (const auto& b : blocks) {
    BlockLayout::Block lb;
    lb.uOffset = off;
    lb.nu = b.space->numVelocityDofs();
    lb.pOffset = off + lb.nu;
    lb.np = b.space->numPressureDofs();
    off += lb.nu + lb.np;
    layout.blocks.push_back(lb);
  }
  for (const auto& ifc : interfaces) {
    (void)ifc;
    layout.lambdas.push_back({off, basis.count()});
    off += basis.count();
  }
  layout.total = off;
}

Eigen::VectorXd GlobalSystem::constraintData(double t) const {
  Eigen::VectorXd G =
      Eigen::VectorXd::Zero(layout.total - layout.multiplierStart());
  for (const auto& in : inlets) {
    const auto& seg = layout.lambdas[in.segment];
    G.segment(seg.offset - layout.multiplierStart(), seg.n) =
        in.rate(t) * in.rhsUnit;
  }
  return G;
}

Eigen::VectorXd GlobalSystem::residual(const Eigen::VectorXd& Y,
                                       double t) const {
  if (Y.size() != layout.total) throw Error("residual: state size mismatch");
  if (!steady && static_cast<int>(history.size()) < scheme.order())
    throw Error("residual: missing BDF history");
  const double ts = timeScale();
  Eigen::VectorXd R = Eigen::VectorXd::Zero(layout.total);
  const Eigen::VectorXd G = constraintData(t);

  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];
    const auto& lb = layout.blocks[j];
    const auto u = Y.segment(lb.uOffset, lb.nu);
    const auto p = Y.segment(lb.pOffset, lb.np);

    Eigen::VectorXd um = u;  // advecting field honors the wall pinning
    for (int d : b.wallDofs) um(d) = 0.0;
    SpMat C = assemble_convective(*b.space, b.geom, b.rho, um);
    constrain_rows_cols(C, b.wallDofs);

    Eigen::VectorXd ru = b.Kc * u + C * u + b.Dc.transpose() * p;
    if (b.forcing || b.outletTraction) {
      auto fv = b.forcing
                    ? std::function<Eigen::Vector2d(const Eigen::Vector2d&)>(
                          [&](const Eigen::Vector2d& x) {
                            return b.forcing(x, t);
                          })
                    : std::function<Eigen::Vector2d(const Eigen::Vector2d&)>();
      auto hv = b.outletTraction
                    ? std::function<Eigen::Vector2d(const Eigen::Vector2d&)>(
                          [&](const Eigen::Vector2d& x) {
                            return b.outletTraction(x, t);
                          })
                    : std::function<Eigen::Vector2d(const Eigen::Vector2d&)>();
      Eigen::VectorXd F =
          assemble_forcing(*b.space, b.geom, fv, hv, b.neumannPorts);
      for (int d : b.wallDofs) F(d) = 0.0;
      ru -= F;
    }
    for (const auto& c : b.couplings) {
      const auto& seg = layout.lambdas[c.segment];
      ru += c.B.transpose() * Y.segment(seg.offset, seg.n);
      // weak-continuity rows
      R.segment(seg.offset, seg.n) += ts * (c.B * u);
    }
    R.segment(lb.uOffset, lb.nu) = ts * ru;
    R.segment(lb.pOffset, lb.np) = ts * (b.Dc * u);

    if (!steady) {
      Eigen::VectorXd du = u;
      for (int k = 0; k < scheme.order(); ++k)
        du -= scheme.alpha[k] *
              history[k].segment(lb.uOffset, lb.nu);
      R.segment(lb.uOffset, lb.nu) += b.Mc * du;
    }
    // strong wall rows: all eliminated terms vanish there, leaving R_i = u_i
    for (int d : b.wallDofs) R(lb.uOffset + d) += u(d);
  }
  for (size_t i = 0; i < layout.lambdas.size(); ++i) {
    const auto& seg = layout.lambdas[i];
    R.segment(seg.offset, seg.n) -=
        ts * G.segment(seg.offset - layout.multiplierStart(), seg.n);
  }
  return R;
}

GlobalSystem::Tangent GlobalSystem::tangent(const Eigen::VectorXd& Y,
                                            Linearization mode) const {
  Tangent tan;
  tan.sys = this;
  tan.ts = timeScale();
  tan.withMass = !steady;
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& b = blocks[j];
    const auto& lb = layout.blocks[j];
    Eigen::VectorXd um = Y.segment(lb.uOffset, lb.nu);
    for (int d : b.wallDofs) um(d) = 0.0;
    SpMat C = assemble_convective(*b.space, b.geom, b.rho, um);
    if (mode == Linearization::Newton)
      C += assemble_convective_prime(*b.space, b.geom, b.rho, um);
    constrain_rows_cols(C, b.wallDofs);
    SpMat F = tan.ts * (b.Kc + C);
    if (!steady) F += b.Mc;
    // wall rows become identity
    std::vector<Eigen::Triplet<double>> ones;
    ones.reserve(b.wallDofs.size());
    for (int d : b.wallDofs) ones.emplace_back(d, d, 1.0);
    SpMat I(lb.nu, lb.nu);
    I.setFromTriplets(ones.begin(), ones.end());
    F += I;
    F.makeCompressed();
    tan.F.push_back(std::move(F));
  }
  return tan;
}

Eigen::VectorXd GlobalSystem::Tangent::apply(const Eigen::VectorXd& x) const {
  const auto& layout = sys->layout;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(layout.total);
  for (size_t j = 0; j < sys->blocks.size(); ++j) {
    const auto& b = sys->blocks[j];
    const auto& lb = layout.blocks[j];
    const auto xu = x.segment(lb.uOffset, lb.nu);
    const auto xp = x.segment(lb.pOffset, lb.np);
    Eigen::VectorXd yu = F[j] * xu + ts * (b.Dc.transpose() * xp);
    for (const auto& c : b.couplings) {
      const auto& seg = layout.lambdas[c.segment];
      yu += ts * (c.B.transpose() * x.segment(seg.offset, seg.n));
      y.segment(seg.offset, seg.n) += ts * (c.B * xu);
    }
    y.segment(lb.uOffset, lb.nu) = yu;
    y.segment(lb.pOffset, lb.np) = ts * (b.Dc * xu);
  }
  return y;
}

void GlobalSystem::pushHistory(const Eigen::VectorXd& Y) {
  history.push_front(Y);
  while (static_cast<int>(history.size()) > 2) history.pop_back();
}

}  // namespace rbe
