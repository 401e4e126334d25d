#ifndef RBE_WORKBENCH_RUNNER_HPP
#define RBE_WORKBENCH_RUNNER_HPP

#include <map>
#include <string>
#include <vector>

#include "rbe/pod.hpp"
#include "rbe/rom.hpp"
#include "rbe/workbench/probes.hpp"

namespace rbe {

struct RunReport {
  std::vector<double> times;
  std::vector<int> newtonIters;
  std::vector<int> krylovIters;
  std::vector<ProbeSample> probes;
  double setupSeconds = 0.0;
  double solveSeconds = 0.0;
};

struct FomRun {
  RunReport report;
  std::vector<double> times;               // main window (t >= t0)
  std::vector<Eigen::VectorXd> states;     // matching full states
};

FomRun run_fom(AssembledScenario& as, bool recordStates, bool withProbes);

struct OfflineOptions {
  int samples = 8;
  ParamHalfWidths halfWidths;
  unsigned long long seed = 0;
  bool cleanDivergence = true;
};

struct SnapshotStore {
  int refinement = 1;
  std::map<BlockKind, SnapshotMatrix> velocity;
  std::map<BlockKind, SnapshotMatrix> pressure;
  std::vector<std::vector<GeoParams>> sampleParams;  // per sample, per block
  std::vector<int> failedSamples;
};

/// Offline data generation: sampled geometries, coupled solves, Piola
/// pullback of the velocity columns (with divergence cleaning) per building
/// block. Failed samples are skipped; more than half failing is an error.
SnapshotStore snapshot_phase(const Scenario& cfg, const OfflineOptions& opt);

struct BasisSet {
  std::map<BlockKind, PodBasis> velocity;  // enriched, Xu-orthonormal
  std::map<BlockKind, PodBasis> pressure;
};

BasisSet pod_phase(const SnapshotStore& store, const Scenario& cfg);

struct RomRun {
  RunReport report;
  std::vector<double> times;
  std::vector<Eigen::VectorXd> states;  // reconstructed full states
  int reducedVelocitySize = 0;          // first block, diagnostics
};

RomRun run_rom(AssembledScenario& as, const BasisSet& bases, bool recordStates,
               bool withProbes);

/// Reference-frame discrete divergence residual |D uhat| of one stored
/// velocity column (oracle-style check used by tests and the CLI).
double snapshot_divergence_norm(const SnapshotStore& store, BlockKind kind,
                                int column);

}  // namespace rbe

#endif
