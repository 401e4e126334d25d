#ifndef RBE_WORKBENCH_PROBES_HPP
#define RBE_WORKBENCH_PROBES_HPP

#include <vector>

#include "rbe/workbench/scenario.hpp"

namespace rbe {

struct ProbeSample {
  double time = 0.0;
  double inletPressure = 0.0;            // area-averaged p over the inlet
  std::vector<double> outletFlowRates;   // int u.n per free outlet port
  std::vector<double> wss;               // facet-averaged |tangential traction|
};

struct OutletRef {
  int block = 0;
  int port = 0;
};

/// Free outlet ports (not consumed by an interface), in block/port order.
std::vector<OutletRef> free_outlets(const AssembledScenario& as);

ProbeSample compute_probes(const AssembledScenario& as,
                           const Eigen::VectorXd& Y, double time);

/// Inlet flow rate int u.(-n) over the root inlet.
double inlet_flow_rate(const AssembledScenario& as, const Eigen::VectorXd& Y);

/// Time-integrated relative broken-norm errors (trapezoidal rule) between two
/// state sequences on the same grid, restricted to t >= t0.
std::pair<double, double> compute_errors(
    const AssembledScenario& as, const std::vector<double>& times,
    const std::vector<Eigen::VectorXd>& ref,
    const std::vector<Eigen::VectorXd>& approx);

}  // namespace rbe

#endif
