#include <doctest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"
#include "helpers_scenario.hpp"
#include "rbe/errors.hpp"
#include "rbe/workbench/io.hpp"

using namespace rbe;

namespace {

const char* kFullConfig = R"(
# two tubes with a gentle bend
fluid.density = 1.06
fluid.viscosity = 0.04
time.dt = 2.5e-3
time.t0 = 0
time.end = 0.3
time.ramp_start = -2e-2
time.bdf_order = 2
inflow.rate = 1.5
inflow.waveform = constant
coupling.order = 5
mesh.refinement = 1
newton.tol = 1e-10
newton.max_iters = 25
krylov.method = fgmres
krylov.tol = 1e-11
krylov.inner = direct
krylov.schur_reuse = 20
rom.eps_u = 1e-2
rom.eps_p = 1e-4
rom.convective = truncated
rom.nc = 12
block.0.kind = T1
block.0.bend = 0.1
block.1.kind = T1
block.1.parent = 0
block.1.parent_port = 1
block.1.bend = -0.1
)";

std::vector<std::vector<double>> parse_csv(const std::string& path) {
  std::ifstream is(path);
  REQUIRE(is.good());
  std::string line;
  std::getline(is, line);  // header
  std::vector<std::vector<double>> rows;
  while (std::getline(is, line)) {
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

TEST_SUITE("workbench") {

TEST_CASE("config parsing accepts the full schema") {
  const Scenario sc = parse_scenario_text(kFullConfig);
  CHECK(sc.blocks.size() == 2);
  CHECK(sc.blocks[1].parent == 0);
  CHECK(sc.blocks[1].params.bend == doctest::Approx(-0.1));
  CHECK(sc.inflowRate == doctest::Approx(1.5));
  CHECK(sc.multiplierOrder == 5);
  CHECK(sc.rom.truncated);
  CHECK(sc.schurReuse == 20);
}

TEST_CASE("config parsing rejects malformed input") {
  CHECK_THROWS_AS(parse_scenario_text("nonsense.key = 1\nblock.0.kind = T1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_text("time.dt = abc\nblock.0.kind = T1\n"),
                  ConfigError);
  CHECK_THROWS_AS(parse_scenario_text("block.0.kind = T9\n"), ConfigError);
  CHECK_THROWS_AS(parse_scenario_text(""), ConfigError);
  CHECK_THROWS_AS(
      parse_scenario_text("block.0.kind = T1\nblock.0.kind = T1\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_scenario_text("block.0.kind = T1\ntime.dt = -1\n"), ConfigError);
  // non-root geometric placement keys are rejected
  CHECK_THROWS_AS(parse_scenario_text("block.0.kind = T1\n"
                                      "block.1.kind = T1\n"
                                      "block.1.parent = 0\n"
                                      "block.1.radius_ratio = 1.5\n"),
                  ConfigError);
  // parent must precede the child
  CHECK_THROWS_AS(parse_scenario_text("block.0.kind = T1\n"
                                      "block.1.kind = T1\n"
                                      "block.1.parent = 1\n"),
                  ConfigError);
}

TEST_CASE("inflow ramp follows the cosine law") {
  auto sc = testing::tube_chain(1, 1, 2.0);
  sc.rampStart = -0.02;
  auto as = build_scenario(sc);
  CHECK(as->inflowRate(-0.02) == 0.0);
  CHECK(as->inflowRate(-0.5) == 0.0);
  const double t = -0.01;
  const double expect =
      2.0 * (1.0 - std::cos((t + 0.02) * M_PI / 0.02)) / 2.0;
  CHECK(as->inflowRate(t) == doctest::Approx(expect).epsilon(1e-14));
  CHECK(as->inflowRate(0.0) == doctest::Approx(2.0));
  CHECK(as->inflowRate(0.1) == doctest::Approx(2.0));
}

TEST_CASE("sampled waveform interpolates linearly") {
  auto sc = testing::tube_chain(1, 1, 1.0);
  sc.waveform = "samples";
  sc.waveformSamples = {{0.0, 0.0}, {0.1, 2.0}, {0.3, 1.0}};
  sc.rampStart = 0.0;
  auto as = build_scenario(sc);
  CHECK(as->inflowRate(0.05) == doctest::Approx(1.0));
  CHECK(as->inflowRate(0.2) == doctest::Approx(1.5));
  CHECK(as->inflowRate(0.4) == doctest::Approx(1.0));
}

TEST_CASE("probes recover the analytic Poiseuille quantities") {
  auto sc = testing::tube_chain(1, 3, 0.9);
  auto as = build_scenario(sc);
  testing::Poiseuille ps;
  ps.mu = sc.viscosity;
  ps.q0 = sc.inflowRate;
  ps.length = 1.0;
  const Eigen::VectorXd Y = testing::poiseuille_state(*as, ps);
  const ProbeSample probe = compute_probes(*as, Y, 0.0);

  // flow rate of the interpolated profile is exact
  REQUIRE(probe.outletFlowRates.size() == 1);
  CHECK(probe.outletFlowRates[0] == doctest::Approx(ps.q0).epsilon(1e-10));
  CHECK(inlet_flow_rate(*as, Y) == doctest::Approx(ps.q0).epsilon(1e-10));

  // area-averaged inlet pressure
  CHECK(probe.inletPressure ==
        doctest::Approx(8.0 * ps.mu * ps.umax()).epsilon(1e-10));

  // wall shear stress magnitude 4 mu umax on every wall facet
  const double wssExact = 4.0 * ps.mu * ps.umax();
  REQUIRE(!probe.wss.empty());
  for (double w : probe.wss)
    CHECK(w == doctest::Approx(wssExact).epsilon(0.05));

  // zero state zeroes every probe
  const ProbeSample zero =
      compute_probes(*as, Eigen::VectorXd::Zero(Y.size()), 0.0);
  CHECK(zero.inletPressure == 0.0);
  CHECK(zero.outletFlowRates[0] == 0.0);
  for (double w : zero.wss) CHECK(w == 0.0);
}

TEST_CASE("broken-norm errors") {
  auto sc = testing::tube_chain(1, 1, 0.5);
  auto as = build_scenario(sc);
  auto g = testing::rng(3);
  const int n = as->system.layout.total;
  std::vector<double> times = {0.0, 0.1, 0.2};
  std::vector<Eigen::VectorXd> ref;
  for (int k = 0; k < 3; ++k) {
    Eigen::VectorXd Y(n);
    for (int i = 0; i < n; ++i) Y(i) = testing::urand(g, -1, 1);
    ref.push_back(Y);
  }
  const auto [e0u, e0p] = compute_errors(*as, times, ref, ref);
  CHECK(e0u == 0.0);
  CHECK(e0p == 0.0);

  std::vector<Eigen::VectorXd> twice;
  for (const auto& Y : ref) twice.push_back(2.0 * Y);
  const auto [e1u, e1p] = compute_errors(*as, times, ref, twice);
  CHECK(e1u == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(e1p == doctest::Approx(1.0).epsilon(1e-14));

  // dense hand computation on a two-step, one-block case
  const auto& lb = as->system.layout.blocks[0];
  const auto& ops = as->system.blocks[0].ops;
  std::vector<double> t2 = {0.0, 0.05};
  std::vector<Eigen::VectorXd> a = {ref[0], ref[1]};
  std::vector<Eigen::VectorXd> b = {ref[1], ref[2]};
  double nu = 0, du = 0, np = 0, dp = 0;
  for (int k = 0; k < 2; ++k) {
    const double w = 0.5;  // both are interval ends
    const Eigen::VectorXd duv = (a[k] - b[k]).segment(lb.uOffset, lb.nu);
    const Eigen::VectorXd dpv = (a[k] - b[k]).segment(lb.pOffset, lb.np);
    const Eigen::VectorXd ur = a[k].segment(lb.uOffset, lb.nu);
    const Eigen::VectorXd pr = a[k].segment(lb.pOffset, lb.np);
    nu += w * duv.dot(DenseMatrix(ops.Xu) * duv);
    du += w * ur.dot(DenseMatrix(ops.Xu) * ur);
    np += w * dpv.dot(DenseMatrix(ops.Xp) * dpv);
    dp += w * pr.dot(DenseMatrix(ops.Xp) * pr);
  }
  const auto [e2u, e2p] = compute_errors(*as, t2, a, b);
  CHECK(e2u == doctest::Approx(std::sqrt(nu / du)).epsilon(1e-12));
  CHECK(e2p == doctest::Approx(std::sqrt(np / dp)).epsilon(1e-12));

  CHECK_THROWS_AS(compute_errors(*as, times, ref, a), Error);
}

TEST_CASE("snapshot store round trip and divergence of stored columns") {
  auto sc = testing::tube_chain(2, 1, 0.8);
  sc.tEnd = 0.02;
  sc.dt = 5e-3;
  sc.rampStart = -0.01;
  OfflineOptions opt;
  opt.samples = 2;
  opt.halfWidths.bend = 0.05;
  opt.seed = 3;
  const SnapshotStore store = snapshot_phase(sc, opt);
  REQUIRE(store.velocity.count(BlockKind::T1) == 1);
  const auto& snap = store.velocity.at(BlockKind::T1);
  CHECK(snap.columns.cols() > 0);
  CHECK(snap.origins.size() == static_cast<size_t>(snap.columns.cols()));

  for (int c = 0; c < snap.columns.cols(); ++c)
    CHECK(snapshot_divergence_norm(store, BlockKind::T1, c) <= 1e-6);

  write_snapshot_store("wb_store_test", store);
  const SnapshotStore back = read_snapshot_store("wb_store_test");
  CHECK((back.velocity.at(BlockKind::T1).columns - snap.columns).norm() ==
        0.0);
  CHECK(back.sampleParams.size() == store.sampleParams.size());
  CHECK(back.velocity.at(BlockKind::T1).origins[1].sample ==
        snap.origins[1].sample);
}

TEST_CASE("deterministic runs produce identical probe payloads") {
  auto sc = testing::tube_chain(1, 1, 0.7);
  sc.tEnd = 0.02;
  sc.dt = 5e-3;
  sc.rampStart = -0.01;
  auto run = [&]() {
    auto as = build_scenario(sc);
    FomRun r = run_fom(*as, false, true);
    std::ostringstream os;
    os.precision(17);
    for (const auto& p : r.report.probes) {
      os << p.time << ' ' << p.inletPressure;
      for (double f : p.outletFlowRates) os << ' ' << f;
      for (double w : p.wss) os << ' ' << w;
    }
    return os.str();
  };
  CHECK(run() == run());
}

TEST_CASE("csv outputs round trip at full precision") {
  auto sc = testing::tube_chain(1, 1, 0.9);
  sc.tEnd = 0.02;
  sc.dt = 5e-3;
  sc.rampStart = -0.01;
  auto as = build_scenario(sc);
  FomRun r = run_fom(*as, false, true);
  write_probes_csv("wb_probes_test.csv", r.report);
  const auto rows = parse_csv("wb_probes_test.csv");
  REQUIRE(rows.size() == r.report.probes.size());
  for (size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k][0] == r.report.probes[k].time);
    CHECK(rows[k][1] == r.report.probes[k].inletPressure);
    CHECK(rows[k][2] == r.report.probes[k].outletFlowRates[0]);
  }
  write_report_csv("wb_report_test.csv", r.report);
  const auto rrows = parse_csv("wb_report_test.csv");
  REQUIRE(rrows.size() == r.report.times.size());
  for (size_t k = 0; k < rrows.size(); ++k) {
    CHECK(rrows[k][1] == r.report.newtonIters[k]);
    CHECK(rrows[k][2] == r.report.krylovIters[k]);
  }
}

TEST_CASE("placement rejects incompatible ports") {
  Scenario sc = testing::tube_chain(2, 1, 1.0);
  sc.blocks[1].parentPort = 3;
  CHECK_THROWS_AS(build_scenario(sc), ConfigError);

  // a bifurcation needs a width-1 feed
  Scenario sb = testing::tube_chain(1, 1, 1.0);
  sb.blocks[0].params.radiusRatio = 1.4;
  BlockSpec bif;
  bif.kind = BlockKind::B;
  bif.parent = 0;
  bif.parentPort = 1;
  sb.blocks.push_back(bif);
  CHECK_THROWS_AS(build_scenario(sb), ConfigError);
}

TEST_CASE("bifurcation chain assembles and places children") {
  Scenario sc;
  BlockSpec root;
  root.kind = BlockKind::B;
  sc.blocks.push_back(root);
  BlockSpec top;
  top.kind = BlockKind::T1;
  top.parent = 0;
  top.parentPort = 1;
  sc.blocks.push_back(top);
  sc.refinement = 1;
  sc.waveform = "constant";
  sc.inflowRate = 0.5;
  sc.multiplierOrder = 1;
  auto as = build_scenario(sc);
  CHECK(as->system.blocks.size() == 2);
  // child tube inherited the branch width
  CHECK(as->geoms[1].params().radiusRatio == doctest::Approx(0.7));
  // free outlets: B's second branch and the tube outlet
  CHECK(free_outlets(*as).size() == 2);
}

}  // TEST_SUITE
