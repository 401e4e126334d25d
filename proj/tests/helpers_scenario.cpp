#include "helpers_scenario.hpp"

namespace rbe::testing {

Eigen::VectorXd poiseuille_state(const AssembledScenario& as,
                                 const Poiseuille& ps) {
  const auto& sys = as.system;
  Eigen::VectorXd Y = Eigen::VectorXd::Zero(sys.layout.total);
  for (size_t j = 0; j < sys.blocks.size(); ++j) {
    const auto& lb = sys.layout.blocks[j];
    const auto& sb = sys.blocks[j];
    Y.segment(lb.uOffset, lb.nu) = interpolate_velocity(
        *sb.space, sb.geom,
        [&](const Eigen::Vector2d& x) { return ps.velocity(x); });
    Y.segment(lb.pOffset, lb.np) = interpolate_pressure(
        *sb.space, sb.geom,
        [&](const Eigen::Vector2d& x) { return ps.pressure(x); });
  }
  // multiplier lambda^[jm] represents -sigma(u,p) n_owner on the interface:
  // x component -sigma_xx = p (constant on the port), y component
  // -sigma_xy = -mu u' = 8 mu umax y = 4 mu umax s  (s in [-1,1], width 1)
  const int perComp = sys.basis.order + 1;
  for (size_t i = 0; i < sys.interfaces.size(); ++i) {
    const auto& ifc = sys.interfaces[i];
    const auto& seg = sys.layout.lambdas[i];
    const double nx = ifc.normalOwner.x();  // +1 interior, -1 at the inlet
    const double px = ps.pressure(0.5 * (ifc.p0 + ifc.p1));
    Y(seg.offset + 0) = nx * px;  // x, U_0
    if (perComp > 1)
      Y(seg.offset + perComp + 1) = nx * 2.0 * ps.mu * ps.umax();  // y, U_1
  }
  return Y;
}

}  // namespace rbe::testing
