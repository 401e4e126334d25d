#ifndef RBE_WORKBENCH_SCENARIO_HPP
#define RBE_WORKBENCH_SCENARIO_HPP

#include <map>
#include <memory>

#include "rbe/assembly.hpp"
#include "rbe/workbench/config.hpp"

namespace rbe {

/// Fully assembled coupled system plus everything it points into.
/// Not movable: the GlobalSystem holds raw pointers into meshes/spaces/geoms.
struct AssembledScenario {
  Scenario cfg;
  std::map<BlockKind, SimplicialMesh> meshes;
  std::map<BlockKind, TaylorHoodSpace> spaces;
  std::vector<BlockGeometry> geoms;  // one per block
  GlobalSystem system;
  int inletSegment = -1;  // multiplier segment of the root inlet

  AssembledScenario() = default;
  AssembledScenario(const AssembledScenario&) = delete;
  AssembledScenario& operator=(const AssembledScenario&) = delete;

  /// Inflow rate Q(t) including the startup ramp window.
  double inflowRate(double t) const;

  double rampStart() const {
    return std::min(cfg.rampStart, cfg.t0);
  }
};

std::unique_ptr<AssembledScenario> build_scenario(const Scenario& cfg);

/// Per-block parameters actually used after placement and width propagation.
std::vector<GeoParams> placed_parameters(const Scenario& cfg);

}  // namespace rbe

#endif
