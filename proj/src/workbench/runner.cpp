#include "rbe/workbench/runner.hpp"

#include <chrono>
#include <iostream>

#include <Eigen/SparseLU>

#include "rbe/errors.hpp"

namespace rbe {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

}  // namespace

FomRun run_fom(AssembledScenario& as, bool recordStates, bool withProbes) {
  FomRun out;
  GlobalSystem& sys = as.system;
  const Scenario& cfg = as.cfg;

  const double tStart = as.rampStart();
  const int nSteps =
      static_cast<int>(std::llround((cfg.tEnd - tStart) / cfg.dt));
  const BdfScheme full = bdf_coefficients(cfg.bdfOrder);

  Eigen::VectorXd Y = Eigen::VectorXd::Zero(sys.layout.total);
  sys.history.clear();
  sys.history.push_front(Y);
  sys.steady = false;
  sys.dt = cfg.dt;

  SaddlePreconditioner prec(cfg.precondConfig());
  const NewtonConfig ncfg = cfg.newtonConfig();
  const KrylovConfig kcfg = cfg.krylovConfig();

  auto record = [&](double t, const Eigen::VectorXd& state) {
    if (t >= cfg.t0 - 1e-12) {
      if (recordStates) {
        out.times.push_back(t);
        out.states.push_back(state);
      }
      if (withProbes) out.report.probes.push_back(compute_probes(as, state, t));
    }
  };

  const auto tic = Clock::now();
  record(tStart, Y);
  int lastOrder = 0;
  for (int k = 0; k < nSteps; ++k) {
    const double t = tStart + (k + 1) * cfg.dt;
    const bool boot = static_cast<int>(sys.history.size()) < full.order();
    sys.scheme = boot ? bdf_coefficients(1) : full;
    if (sys.scheme.order() != lastOrder) {
      prec.resetCounter();  // time scale changed, stale Schur
      lastOrder = sys.scheme.order();
    }
    NewtonResult res;
    try {
      res = newton_solve(sys, Y, t, ncfg, kcfg, prec);
    } catch (const SolverError& e) {
      throw SolverError("step " + std::to_string(k) + " (t=" +
                        std::to_string(t) + "): " + e.what());
    }
    Y = res.Y;
    sys.pushHistory(Y);
    out.report.times.push_back(t);
    out.report.newtonIters.push_back(res.iterations);
    out.report.krylovIters.push_back(res.krylovIterations);
    record(t, Y);
  }
  out.report.solveSeconds = seconds_since(tic);
  return out;
}

namespace {

// KKT projection onto the discretely divergence-free subspace of one
// reference block: min |u - u0|_Xu s.t. D u = 0.
class DivergenceCleaner {
 public:
  DivergenceCleaner(const TaylorHoodSpace& space, double rho, double mu) {
    const BlockOperators ops = assemble_static(space, nullptr, rho, mu);
    SpMat Xu = ops.Xu, D = ops.D;
    constrain_rows_cols(Xu, space.wallDofs());
    constrain_rows_cols(D, space.wallDofs(), false, true);
    for (int d : space.wallDofs()) Xu.coeffRef(d, d) = 1.0;
    Xu.makeCompressed();
    const int nu = static_cast<int>(Xu.rows());
    const int np = static_cast<int>(D.rows());
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < Xu.outerSize(); ++k)
      for (SpMat::InnerIterator it(Xu, k); it; ++it)
        trips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < D.outerSize(); ++k)
      for (SpMat::InnerIterator it(D, k); it; ++it) {
        trips.emplace_back(nu + it.row(), it.col(), it.value());
        trips.emplace_back(it.col(), nu + it.row(), it.value());
      }
    SpMat kkt(nu + np, nu + np);
    kkt.setFromTriplets(trips.begin(), trips.end());
    lu_.compute(kkt);
    if (lu_.info() != Eigen::Success)
      throw Error("divergence cleaner: factorization failed");
    Xu_ = std::move(Xu);
    nu_ = nu;
    np_ = np;
  }

  Eigen::VectorXd clean(const Eigen::VectorXd& u0) const {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(nu_ + np_);
    rhs.head(nu_) = Xu_ * u0;
    return lu_.solve(rhs).head(nu_);
  }

 private:
  Eigen::SparseLU<SpMat> lu_;
  SpMat Xu_;
  int nu_ = 0, np_ = 0;
};

Scenario sampled_scenario(const Scenario& base, std::mt19937_64& rng,
                          const ParamHalfWidths& hw) {
  Scenario sc = base;
  double rootRadius = base.blocks[0].params.radiusRatio;
  for (size_t i = 0; i < sc.blocks.size(); ++i) {
    auto& bs = sc.blocks[i];
    const GeoParams drawn = sample_params(bs.kind, bs.params, hw, rng);
    bs.params.bend = drawn.bend;
    bs.params.lengthRatio = drawn.lengthRatio;
    bs.params.outletAngles = drawn.outletAngles;
    if (i == 0) {
      bs.params.radiusRatio = drawn.radiusRatio;
      rootRadius = drawn.radiusRatio;
    }
    // non-root radii are derived from the parent port during placement
  }
  (void)rootRadius;
  return sc;
}

}  // namespace

SnapshotStore snapshot_phase(const Scenario& cfg, const OfflineOptions& opt) {
  if (opt.samples < 1) throw Error("snapshot_phase: need at least one sample");
  SnapshotStore store;
  store.refinement = cfg.refinement;

  // reference spaces and cleaners per kind
  std::map<BlockKind, SimplicialMesh> refMeshes;
  std::map<BlockKind, TaylorHoodSpace> refSpaces;
  std::map<BlockKind, DivergenceCleaner> cleaners;
  for (const auto& bs : cfg.blocks) {
    if (refMeshes.count(bs.kind)) continue;
    refMeshes.emplace(bs.kind,
                      generate_reference_block(bs.kind, cfg.refinement));
    refSpaces.emplace(bs.kind, TaylorHoodSpace(refMeshes.at(bs.kind)));
    if (opt.cleanDivergence)
      cleaners.emplace(
          std::piecewise_construct, std::forward_as_tuple(bs.kind),
          std::forward_as_tuple(refSpaces.at(bs.kind), cfg.density,
                                cfg.viscosity));
  }

  std::mt19937_64 rng(opt.seed);
  for (int s = 0; s < opt.samples; ++s) {
    const Scenario sc = sampled_scenario(cfg, rng, opt.halfWidths);
    std::vector<GeoParams> placed;
    try {
      placed = placed_parameters(sc);
      auto as = build_scenario(sc);
      FomRun run = run_fom(*as, /*recordStates=*/true, /*withProbes=*/false);
      for (size_t k = 0; k < run.states.size(); ++k) {
        for (size_t j = 0; j < as->system.blocks.size(); ++j) {
          const auto& sb = as->system.blocks[j];
          const auto& lb = as->system.layout.blocks[j];
          const BlockKind kind = sc.blocks[j].kind;
          Eigen::VectorXd uhat = piola_pullback(
              as->geoms[j], sb.space->velocityNodes(),
              run.states[k].segment(lb.uOffset, lb.nu));
          if (opt.cleanDivergence) uhat = cleaners.at(kind).clean(uhat);
          auto& sv = store.velocity[kind];
          sv.kind = kind;
          sv.field = SnapshotField::Velocity;
          sv.columns.conservativeResize(uhat.size(), sv.columns.cols() + 1);
          sv.columns.col(sv.columns.cols() - 1) = uhat;
          sv.origins.push_back({s, static_cast<int>(k)});

          auto& sp = store.pressure[kind];
          sp.kind = kind;
          sp.field = SnapshotField::Pressure;
          const auto p = run.states[k].segment(lb.pOffset, lb.np);
          sp.columns.conservativeResize(p.size(), sp.columns.cols() + 1);
          sp.columns.col(sp.columns.cols() - 1) = p;
          sp.origins.push_back({s, static_cast<int>(k)});
        }
      }
      store.sampleParams.push_back(placed);
    } catch (const SolverError& e) {
      std::cerr << "snapshot sample " << s << " skipped: " << e.what() << "\n";
      store.failedSamples.push_back(s);
      store.sampleParams.push_back(placed);
    }
  }
  if (2 * static_cast<int>(store.failedSamples.size()) > opt.samples)
    throw SolverError("snapshot_phase: more than half of the samples failed");
  return store;
}

BasisSet pod_phase(const SnapshotStore& store, const Scenario& cfg) {
  BasisSet out;
  for (const auto& [kind, snapV] : store.velocity) {
    const SimplicialMesh mesh =
        generate_reference_block(kind, store.refinement);
    const TaylorHoodSpace space(mesh);
    const BlockOperators ops =
        assemble_static(space, nullptr, cfg.density, cfg.viscosity);

    PodBasis pbase = weighted_pod(store.pressure.at(kind).columns, ops.Xp,
                                  cfg.rom.epsP);
    pbase.modes = pbase.modes.leftCols(pbase.nPod);
    out.pressure.emplace(kind, pbase);

    PodBasis vbase = weighted_pod(snapV.columns, ops.Xu, cfg.rom.epsU);
    vbase.modes = vbase.modes.leftCols(vbase.nPod);

    SpMat Xuc = ops.Xu, Dc = ops.D;
    constrain_rows_cols(Xuc, space.wallDofs());
    for (int d : space.wallDofs()) Xuc.coeffRef(d, d) = 1.0;
    Xuc.makeCompressed();
    constrain_rows_cols(Dc, space.wallDofs(), false, true);

    DenseMatrix extras(vbase.modes.rows(), 0);
    int nPsup = 0, nCsup = 0;
    if (cfg.rom.pressureSupremizers) {
      const DenseMatrix sup = pressure_supremizers(Xuc, Dc, pbase.modes);
      nPsup = static_cast<int>(sup.cols());
      extras.conservativeResize(Eigen::NoChange, extras.cols() + sup.cols());
      extras.rightCols(sup.cols()) = sup;
    }
    if (cfg.rom.couplingSupremizers) {
      // reference-port couplings of this block kind
      const GeoParams identity;
      const BlockGeometry geom = build_map(kind, identity, mesh);
      const MultiplierBasis basis =
          build_multiplier_basis(cfg.multiplierOrder, 2);
      std::vector<DenseMatrix> ports;
      for (const auto& rp : geom.ports()) {
        InterfaceDescriptor ifc;
        ifc.type = rp.tag.kind == FacetKind::Inlet ? InterfaceType::Inlet
                                                   : InterfaceType::Interior;
        ifc.p0 = rp.p0;
        ifc.p1 = rp.p1;
        ifc.normalOwner = rp.outwardNormal;
        ifc.sides.push_back({0, rp.tag, 1.0});
        DenseMatrix B = assemble_coupling(space, geom, ifc, basis, 0);
        for (int d : space.wallDofs()) B.col(d).setZero();
        ports.push_back(std::move(B));
      }
      const DenseMatrix sup = coupling_supremizers(Xuc, ports);
      nCsup = static_cast<int>(sup.cols());
      extras.conservativeResize(Eigen::NoChange, extras.cols() + sup.cols());
      extras.rightCols(sup.cols()) = sup;
    }
    PodBasis enriched = enrich_and_orthonormalize(vbase, extras, ops.Xu);
    enriched.nPressureSup = nPsup;
    enriched.nCouplingSup = nCsup;
    out.velocity.emplace(kind, std::move(enriched));
  }
  return out;
}

RomRun run_rom(AssembledScenario& as, const BasisSet& bases, bool recordStates,
               bool withProbes) {
  RomRun out;
  const Scenario& cfg = as.cfg;
  const auto ticSetup = Clock::now();

  ReducedModel model =
      cfg.rom.identityBasis
          ? identity_reduced_model(as.system)
          : project_operators(
                as.system,
                [&](BlockKind k) -> const PodBasis& {
                  return bases.velocity.at(k);
                },
                [&](BlockKind k) -> const PodBasis& {
                  return bases.pressure.at(k);
                },
                cfg.rom.truncated ? ConvectiveMode::Truncated
                                  : ConvectiveMode::Exact,
                cfg.rom.nc);
  out.reducedVelocitySize = static_cast<int>(model.blocks[0].Vu.cols());
  out.report.setupSeconds = seconds_since(ticSetup);

  RomLoopConfig lcfg;
  lcfg.t0 = cfg.t0;
  lcfg.tEnd = cfg.tEnd;
  lcfg.dt = cfg.dt;
  lcfg.rampStart = as.rampStart();
  lcfg.sigma = cfg.bdfOrder;
  lcfg.newtonTol = cfg.newtonTol;
  lcfg.newtonMaxIters = std::max(cfg.newtonMaxIters, 50);

  std::vector<RomStepStats> stats;
  const auto ticSolve = Clock::now();
  RomTrajectory traj = rom_time_loop(model, lcfg, &stats);
  out.report.solveSeconds = seconds_since(ticSolve);

  for (size_t k = 0; k < traj.states.size(); ++k) {
    const auto& st = traj.states[k];
    if (k > 0) {
      out.report.times.push_back(st.time);
      out.report.newtonIters.push_back(stats[k - 1].newtonIterations);
      out.report.krylovIters.push_back(0);
    }
    if (st.time >= cfg.t0 - 1e-12 && (recordStates || withProbes)) {
      Eigen::VectorXd full = model.reconstruct(st.Y);
      if (withProbes)
        out.report.probes.push_back(compute_probes(as, full, st.time));
      if (recordStates) {
        out.times.push_back(st.time);
        out.states.push_back(std::move(full));
      }
    }
  }
  return out;
}

double snapshot_divergence_norm(const SnapshotStore& store, BlockKind kind,
                                int column) {
  const SimplicialMesh mesh = generate_reference_block(kind, store.refinement);
  const TaylorHoodSpace space(mesh);
  const BlockOperators ops = assemble_static(space, nullptr, 1.0, 1.0);
  SpMat D = ops.D;
  constrain_rows_cols(D, space.wallDofs(), false, true);
  return (D * store.velocity.at(kind).columns.col(column)).norm();
}

}  // namespace rbe
