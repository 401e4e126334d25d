#ifndef RBE_WORKBENCH_CONFIG_HPP
#define RBE_WORKBENCH_CONFIG_HPP

#include <string>
#include <utility>
#include <vector>

#include "rbe/geomap.hpp"
#include "rbe/solver.hpp"

namespace rbe {

struct BlockSpec {
  BlockKind kind = BlockKind::T1;
  int parent = -1;      // -1 marks the root block
  int parentPort = 1;   // parent port fed by this block's inlet
  GeoParams params;     // rotation/translation/radius honored on the root only
};

struct RomSettings {
  double epsU = 1e-3;
  double epsP = 1e-5;
  bool truncated = false;
  int nc = 20;
  bool pressureSupremizers = true;
  bool couplingSupremizers = true;
  bool identityBasis = false;
};

/// Parsed scenario configuration (strict key = value text format; unknown
/// keys are rejected).
struct Scenario {
  std::vector<BlockSpec> blocks;

  double density = 1.06;
  double viscosity = 0.04;

  double dt = 2.5e-3;
  double t0 = 0.0;
  double tEnd = 0.3;
  double rampStart = -2e-2;
  int bdfOrder = 2;

  double inflowRate = 1.0;
  std::string waveform = "halfsine";  // halfsine | constant | samples
  std::vector<std::pair<double, double>> waveformSamples;

  int multiplierOrder = 5;
  int refinement = 1;

  double newtonTol = 1e-10;
  int newtonMaxIters = 30;
  std::string linearization = "newton";  // newton | picard

  std::string krylovMethod = "fgmres";  // fgmres | gmres
  double krylovTol = 1e-10;
  int krylovRestart = 200;
  int krylovMaxIters = 2000;
  std::string inner = "direct";  // direct | simple | gmres
  double innerTol = 1e-2;
  int schurReuse = 1;

  RomSettings rom;

  KrylovConfig krylovConfig() const;
  PrecondConfig precondConfig() const;
  NewtonConfig newtonConfig() const;
};

Scenario parse_scenario_text(const std::string& text);
Scenario parse_scenario_file(const std::string& path);

}  // namespace rbe

#endif
