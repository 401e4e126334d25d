// Command line front end: mesh export, offline snapshot/basis generation,
// coupled full-order and reduced runs, error comparison, and a small
// preconditioner benchmark. Exit codes: 0 ok, 1 solver failure, 2 bad config.

#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "rbe/errors.hpp"
#include "rbe/workbench/io.hpp"
#include "rbe/workbench/probes.hpp"
#include "rbe/workbench/runner.hpp"

namespace {

using namespace rbe;

Scenario load_config(const std::string& path) {
  return parse_scenario_file(path);
}

int cmd_mesh(const std::string& kind, int refinement,
             const std::string& output) {
  const SimplicialMesh mesh =
      generate_reference_block(block_kind_from_string(kind), refinement);
  if (output.empty() || output == "-") {
    write_mesh_text(std::cout, mesh);
  } else {
    std::ofstream os(output);
    if (!os) throw Error("cannot open " + output);
    write_mesh_text(os, mesh);
  }
  return 0;
}

int cmd_snapshot(const std::string& config, const std::string& outDir,
                 int samples, double hwBend, double hwLength, double hwRadius,
                 double hwAngle, unsigned long long seed) {
  const Scenario cfg = load_config(config);
  OfflineOptions opt;
  opt.samples = samples;
  opt.halfWidths.bend = hwBend;
  opt.halfWidths.lengthRatio = hwLength;
  opt.halfWidths.radiusRatio = hwRadius;
  opt.halfWidths.outletAngle = hwAngle;
  opt.seed = seed;
  const SnapshotStore store = snapshot_phase(cfg, opt);
  write_snapshot_store(outDir, store);
  std::cout << "snapshot store written to " << outDir << "\n";
  for (const auto& [kind, snap] : store.velocity)
    std::cout << "  " << to_string(kind) << ": " << snap.columns.cols()
              << " columns of size " << snap.columns.rows() << "\n";
  if (!store.failedSamples.empty())
    std::cout << "  skipped samples: " << store.failedSamples.size() << "\n";
  return 0;
}

int cmd_pod(const std::string& config, const std::string& storeDir,
            const std::string& outDir) {
  const Scenario cfg = load_config(config);
  const SnapshotStore store = read_snapshot_store(storeDir);
  const BasisSet bases = pod_phase(store, cfg);
  write_basis_set(outDir, bases);
  std::cout << "kind  Ns  N_u (pod+psup+csup)  N_p\n";
  for (const auto& [kind, vb] : bases.velocity) {
    const auto& pb = bases.pressure.at(kind);
    std::cout << "  " << to_string(kind) << "  "
              << store.velocity.at(kind).columns.cols() << "  "
              << vb.modes.cols() << " (" << vb.nPod << "+" << vb.nPressureSup
              << "+" << vb.nCouplingSup << ")  " << pb.nPod << "\n";
  }
  return 0;
}

int cmd_run(const std::string& config, const std::string& mode,
            const std::string& basisDir, const std::string& outDir,
            bool dumpFields, bool dumpOperators) {
  const Scenario cfg = load_config(config);
  auto as = build_scenario(cfg);
  std::filesystem::create_directories(outDir);
  if (dumpOperators) dump_block_operators(outDir + "/operators", as->system);

  RunReport report;
  std::vector<Eigen::VectorXd> states;
  if (mode == "fom") {
    FomRun run = run_fom(*as, dumpFields, true);
    report = std::move(run.report);
    states = std::move(run.states);
  } else if (mode == "rom") {
    BasisSet bases;
    if (!cfg.rom.identityBasis) {
      if (basisDir.empty())
        throw ConfigError("rom mode requires --basis (or rom.identity_basis)");
      bases = read_basis_set(basisDir);
    }
    RomRun run = run_rom(*as, bases, dumpFields, true);
    report = std::move(run.report);
    states = std::move(run.states);
  } else {
    throw ConfigError("mode must be fom or rom");
  }
  write_probes_csv(outDir + "/probes.csv", report);
  write_report_csv(outDir + "/report.csv", report);
  write_timings_csv(outDir + "/timings.csv", report);
  if (dumpFields) write_field_dump(outDir + "/fields.podm", states);
  std::cout << "run complete: " << report.times.size() << " steps, solve "
            << report.solveSeconds << " s\n";
  return 0;
}

int cmd_compare(const std::string& config, const std::string& basisDir,
                const std::string& outDir) {
  const Scenario cfg = load_config(config);
  auto as = build_scenario(cfg);
  FomRun fom = run_fom(*as, true, false);
  BasisSet bases;
  if (!cfg.rom.identityBasis) bases = read_basis_set(basisDir);
  RomRun rom = run_rom(*as, bases, true, false);
  const auto [eu, ep] = compute_errors(*as, fom.times, fom.states, rom.states);
  std::filesystem::create_directories(outDir);
  {
    std::ofstream os(outDir + "/errors.csv");
    os.precision(17);
    os << "e_u,e_p,fom_solve_seconds,rom_solve_seconds,rom_setup_seconds\n";
    os << eu << ',' << ep << ',' << fom.report.solveSeconds << ','
       << rom.report.solveSeconds << ',' << rom.report.setupSeconds << "\n";
  }
  std::cout << "e_u = " << eu << ", e_p = " << ep << "\n"
            << "solve time: fom " << fom.report.solveSeconds << " s, rom "
            << rom.report.solveSeconds << " s\n";
  return 0;
}

int cmd_precond_bench(const std::string& config, int maxBlocks) {
  Scenario base = load_config(config);
  std::cout << "blocks  n  mean_fgmres_iters\n";
  for (int order : {0, 5}) {
    for (int nb = 2; nb <= maxBlocks; ++nb) {
      Scenario cfg = base;
      cfg.multiplierOrder = order;
      cfg.blocks.resize(1);
      for (int i = 1; i < nb; ++i) {
        BlockSpec bs = cfg.blocks[0];
        bs.parent = i - 1;
        bs.parentPort = 1;
        cfg.blocks.push_back(bs);
      }
      auto as = build_scenario(cfg);
      FomRun run = run_fom(*as, false, false);
      double iters = 0, solves = 0;
      for (size_t k = 0; k < run.report.krylovIters.size(); ++k) {
        iters += run.report.krylovIters[k];
        solves += run.report.newtonIters[k];
      }
      std::cout << "  " << nb << "  " << order << "  "
                << (solves > 0 ? iters / solves : 0.0) << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"modular reduced-basis incompressible flow workbench"};
  app.require_subcommand(1);

  std::string kind = "T1", config, output, storeDir, basisDir, outDir = "out",
              mode = "fom";
  int refinement = 1, samples = 8, maxBlocks = 4;
  double hwBend = 0.05, hwLength = 0.05, hwRadius = 0.05, hwAngle = 0.05;
  unsigned long long seed = 0;
  bool dumpFields = false, dumpOperators = false;

  auto* mesh = app.add_subcommand("mesh", "export a reference block mesh");
  mesh->add_option("--kind", kind, "T1|T2|T3|B");
  mesh->add_option("--refinement", refinement);
  mesh->add_option("--output", output, "path or - for stdout");

  auto* snap = app.add_subcommand("snapshot", "offline snapshot generation");
  snap->add_option("--config", config)->required();
  snap->add_option("--output", outDir)->required();
  snap->add_option("--samples", samples);
  snap->add_option("--hw-bend", hwBend);
  snap->add_option("--hw-length", hwLength);
  snap->add_option("--hw-radius", hwRadius);
  snap->add_option("--hw-angle", hwAngle);
  snap->add_option("--seed", seed);

  auto* pod = app.add_subcommand("pod", "basis construction from snapshots");
  pod->add_option("--config", config)->required();
  pod->add_option("--store", storeDir)->required();
  pod->add_option("--output", outDir)->required();

  auto* run = app.add_subcommand("run", "solve a scenario");
  run->add_option("--config", config)->required();
  run->add_option("--mode", mode, "fom|rom");
  run->add_option("--basis", basisDir);
  run->add_option("--output", outDir);
  run->add_flag("--dump-fields", dumpFields);
  run->add_flag("--dump-operators", dumpOperators);

  auto* cmp = app.add_subcommand("compare", "fom vs rom error study");
  cmp->add_option("--config", config)->required();
  cmp->add_option("--basis", basisDir);
  cmp->add_option("--output", outDir);

  auto* pb = app.add_subcommand("precond-bench",
                                "FGMRES iteration counts vs chain length");
  pb->add_option("--config", config)->required();
  pb->add_option("--max-blocks", maxBlocks);

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh->parsed()) return cmd_mesh(kind, refinement, output);
    if (snap->parsed())
      return cmd_snapshot(config, outDir, samples, hwBend, hwLength, hwRadius,
                          hwAngle, seed);
    if (pod->parsed()) return cmd_pod(config, storeDir, outDir);
    if (run->parsed())
      return cmd_run(config, mode, basisDir, outDir, dumpFields,
                     dumpOperators);
    if (cmp->parsed()) return cmd_compare(config, basisDir, outDir);
    if (pb->parsed()) return cmd_precond_bench(config, maxBlocks);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
