#ifndef RBE_WORKBENCH_IO_HPP
#define RBE_WORKBENCH_IO_HPP

#include <string>

#include "rbe/workbench/runner.hpp"

namespace rbe {

/// probes.csv: time, inlet_pressure, flow_out_<i>..., wss_mean, wss_max
void write_probes_csv(const std::string& path, const RunReport& report);

/// report.csv: time, newton_iters, krylov_iters; a final timings.csv holds
/// the setup/solve wall-clock partition.
void write_report_csv(const std::string& path, const RunReport& report);
void write_timings_csv(const std::string& path, const RunReport& report);

/// Snapshot / basis stores: PODM matrices plus a text sidecar.
void write_snapshot_store(const std::string& dir, const SnapshotStore& store);
SnapshotStore read_snapshot_store(const std::string& dir);

void write_basis_set(const std::string& dir, const BasisSet& bases);
BasisSet read_basis_set(const std::string& dir);

/// Full-field trajectory dump (states as PODM columns).
void write_field_dump(const std::string& path,
                      const std::vector<Eigen::VectorXd>& states);

/// Triplet text dump ("row col value" lines) of the block operators.
void dump_block_operators(const std::string& dir, const GlobalSystem& sys);

}  // namespace rbe

#endif
