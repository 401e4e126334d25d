#include "rbe/rom.hpp"

#include <cmath>

#include "rbe/errors.hpp"
#include "rbe/geomap.hpp"

namespace rbe {

namespace {

DenseMatrix wall_identity(const SystemBlock& b) {
  DenseMatrix Iw = DenseMatrix::Zero(b.space->numVelocityDofs(),
                                     b.space->numVelocityDofs());
  for (int d : b.wallDofs) Iw(d, d) = 1.0;
  return Iw;
}

}  // namespace

void ReducedModel::build(int nc) {
  layout = BlockLayout{};
  int off = 0;
  for (size_t j = 0; j < blocks.size(); ++j) {
    auto& rb = blocks[j];
    const auto& fb = fom->blocks[j];
    const int N = static_cast<int>(rb.Vu.cols());
    const int Np = static_cast<int>(rb.Vp.cols());
    if (nc < 0 || nc > N)
      throw Error("ReducedModel::build: Nc out of range");
    rb.Nc = nc;

    rb.MN = rb.Vu.transpose() * fb.Mc * rb.Vu;
    rb.KN = rb.Vu.transpose() * fb.Kc * rb.Vu;
    rb.DN = rb.Vp.transpose() * (fb.Dc * rb.Vu);
    rb.IwN = rb.Vu.transpose() * (wall_identity(fb) * rb.Vu);
    rb.couplings.clear();
    for (const auto& c : fb.couplings)
      rb.couplings.push_back({c.segment, DenseMatrix(c.B * rb.Vu)});

    if (convective == ConvectiveMode::Truncated && nc > 0) {
      DenseMatrix Vm = rb.Vu;  // advecting field honors the wall pinning
      for (int d : fb.wallDofs) Vm.row(d).setZero();
      rb.tensor =
          assemble_convective_tensor(*fb.space, fb.geom, fb.rho, Vm, N, nc);
    }

    BlockLayout::Block lb;
    lb.uOffset = off;
    lb.nu = N;
    lb.pOffset = off + N;
    lb.np = Np;
    off += N + Np;
    layout.blocks.push_back(lb);
  }
  for (size_t i = 0; i < fom->layout.lambdas.size(); ++i) {
    layout.lambdas.push_back({off, fom->layout.lambdas[i].n});
    off += fom->layout.lambdas[i].n;
  }
  layout.total = off;
  buildTangent();
}

void ReducedModel::buildTangent() {
  const double ts = timeScale();
  tangent_.ts = ts;
  tangent_.blockLU.clear();
  // fixed tangent: per-block dense saddle, no convective part
  for (size_t j = 0; j < blocks.size(); ++j) {
    auto& rb = blocks[j];
    const int N = static_cast<int>(rb.Vu.cols());
    const int Np = static_cast<int>(rb.Vp.cols());
    DenseMatrix A = DenseMatrix::Zero(N + Np, N + Np);
    A.topLeftCorner(N, N) = ts * rb.KN + rb.IwN;
    if (!steady) A.topLeftCorner(N, N) += rb.MN;
    A.topRightCorner(N, Np) = ts * rb.DN.transpose();
    A.bottomLeftCorner(Np, N) = ts * rb.DN;
    tangent_.blockLU.emplace_back(A);
  }
  const int nl = layout.total - layout.multiplierStart();
  tangent_.S = DenseMatrix::Zero(nl, nl);
  const int mstart = layout.multiplierStart();
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& rb = blocks[j];
    if (rb.couplings.empty()) continue;
    const auto& lb = layout.blocks[j];
    int cols = 0;
    for (const auto& c : rb.couplings) cols += static_cast<int>(c.BN.rows());
    DenseMatrix rhs = DenseMatrix::Zero(lb.nu + lb.np, cols);
    std::vector<int> colAt(cols);
    int at = 0;
    for (const auto& c : rb.couplings) {
      rhs.block(0, at, lb.nu, c.BN.rows()) = ts * c.BN.transpose();
      const auto& seg = layout.lambdas[c.segment];
      for (int q = 0; q < c.BN.rows(); ++q)
        colAt[at + q] = seg.offset - mstart + q;
      at += static_cast<int>(c.BN.rows());
    }
    const DenseMatrix sol = tangent_.blockLU[j].solve(rhs);
    for (const auto& cI : rb.couplings) {
      const auto& segI = layout.lambdas[cI.segment];
      const DenseMatrix rows = ts * (cI.BN * sol.topRows(lb.nu));
      for (int q = 0; q < cols; ++q)
        tangent_.S.block(segI.offset - mstart, colAt[q], cI.BN.rows(), 1) -=
            rows.col(q);
    }
  }
  if (nl > 0) {
    tangent_.luS.compute(tangent_.S);
    tangent_.singular = !tangent_.luS.isInvertible();
    Eigen::BDCSVD<DenseMatrix> svd(tangent_.S);
    tangent_.schurMinSingular =
        svd.singularValues().size() ? svd.singularValues().tail(1)(0) : 0.0;
  }
  ++tangent_.builds;
  builtDt_ = dt;
  builtOrder_ = scheme.order();
  builtSteady_ = steady;
}

void ReducedModel::ensureTangent() {
  if (tangent_.builds == 0 || builtDt_ != dt ||
      builtOrder_ != scheme.order() || builtSteady_ != steady)
    buildTangent();
}

Eigen::VectorXd ReducedModel::reducedConvective(int j,
                                                const Eigen::VectorXd& uN,
                                                ConvectiveMode mode) const {
  const auto& rb = blocks[j];
  const auto& fb = fom->blocks[j];
  const int N = static_cast<int>(rb.Vu.cols());
  if (uN.size() != N) throw Error("reducedConvective: size mismatch");
  if (mode == ConvectiveMode::Exact) {
    Eigen::VectorXd u = rb.Vu * uN;
    for (int d : fb.wallDofs) u(d) = 0.0;
    SpMat C = assemble_convective(*fb.space, fb.geom, fb.rho, u);
    constrain_rows_cols(C, fb.wallDofs);
    return rb.Vu.transpose() * (C * (rb.Vu * uN));
  }
  if (rb.tensor.empty() && rb.Nc > 0)
    throw Error("reducedConvective: tensor not assembled");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(N);
  const Eigen::VectorXd uc = uN.head(rb.Nc);
  for (int i = 0; i < N; ++i)
    c(i) = uc.dot(rb.tensor[i] * uc);
  return c;
}

Eigen::VectorXd ReducedModel::residual(
    const Eigen::VectorXd& Y, double t,
    const std::deque<Eigen::VectorXd>& history) const {
  if (Y.size() != layout.total)
    throw Error("ReducedModel::residual: state size mismatch");
  if (!steady && static_cast<int>(history.size()) < scheme.order())
    throw Error("ReducedModel::residual: missing BDF history");
  const double ts = timeScale();
  Eigen::VectorXd R = Eigen::VectorXd::Zero(layout.total);
  const Eigen::VectorXd G = fom->constraintData(t);
  const int mstart = layout.multiplierStart();

  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& rb = blocks[j];
    const auto& lb = layout.blocks[j];
    const auto u = Y.segment(lb.uOffset, lb.nu);
    const auto p = Y.segment(lb.pOffset, lb.np);

    Eigen::VectorXd ru =
        rb.KN * u + reducedConvective(static_cast<int>(j), u, convective) +
        rb.DN.transpose() * p;
    for (const auto& c : rb.couplings) {
      const auto& seg = layout.lambdas[c.segment];
      ru += c.BN.transpose() * Y.segment(seg.offset, seg.n);
      R.segment(seg.offset, seg.n) += ts * (c.BN * u);
    }
    R.segment(lb.uOffset, lb.nu) = ts * ru + rb.IwN * u;
    R.segment(lb.pOffset, lb.np) = ts * (rb.DN * u);
    if (!steady) {
      Eigen::VectorXd du = u;
      for (int k = 0; k < scheme.order(); ++k)
        du -= scheme.alpha[k] * history[k].segment(lb.uOffset, lb.nu);
      R.segment(lb.uOffset, lb.nu) += rb.MN * du;
    }
  }
  for (size_t i = 0; i < layout.lambdas.size(); ++i) {
    const auto& seg = layout.lambdas[i];
    R.segment(seg.offset, seg.n) -= ts * G.segment(seg.offset - mstart, seg.n);
  }
  return R;
}

Eigen::VectorXd ReducedModel::solveTangent(const Eigen::VectorXd& rhs) const {
  if (tangent_.singular)
    throw SolverError(
        "ReducedModel: singular reduced Schur complement "
        "(coupling supremizers missing?)");
  const int mstart = layout.multiplierStart();
  const double ts = tangent_.ts;
  Eigen::VectorXd out(layout.total);
  std::vector<Eigen::VectorXd> Zw(blocks.size());
  Eigen::VectorXd rl = rhs.tail(layout.total - mstart);
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& lb = layout.blocks[j];
    Eigen::VectorXd lrhs(lb.nu + lb.np);
    lrhs << rhs.segment(lb.uOffset, lb.nu), rhs.segment(lb.pOffset, lb.np);
    Zw[j] = tangent_.blockLU[j].solve(lrhs);
    for (const auto& c : blocks[j].couplings) {
      const auto& seg = layout.lambdas[c.segment];
      rl.segment(seg.offset - mstart, seg.n) -= ts * (c.BN * Zw[j].head(lb.nu));
    }
  }
  Eigen::VectorXd xl = rl.size() > 0 ? Eigen::VectorXd(tangent_.luS.solve(rl))
                                     : Eigen::VectorXd();
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& lb = layout.blocks[j];
    Eigen::VectorXd corr = Eigen::VectorXd::Zero(lb.nu + lb.np);
    for (const auto& c : blocks[j].couplings) {
      const auto& seg = layout.lambdas[c.segment];
      corr.head(lb.nu) +=
          ts * (c.BN.transpose() * xl.segment(seg.offset - mstart, seg.n));
    }
    Eigen::VectorXd xw = Zw[j];
    if (corr.squaredNorm() > 0) xw -= tangent_.blockLU[j].solve(corr);
    out.segment(lb.uOffset, lb.nu) = xw.head(lb.nu);
    out.segment(lb.pOffset, lb.np) = xw.tail(lb.np);
  }
  if (rl.size() > 0) out.tail(layout.total - mstart) = xl;
  return out;
}

Eigen::VectorXd ReducedModel::reconstruct(const Eigen::VectorXd& Y) const {
  Eigen::VectorXd full = Eigen::VectorXd::Zero(fom->layout.total);
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& rb = blocks[j];
    const auto& lb = layout.blocks[j];
    const auto& fb = fom->layout.blocks[j];
    full.segment(fb.uOffset, fb.nu) = rb.Vu * Y.segment(lb.uOffset, lb.nu);
    full.segment(fb.pOffset, fb.np) = rb.Vp * Y.segment(lb.pOffset, lb.np);
  }
  const int mstart = layout.multiplierStart();
  const int fmstart = fom->layout.multiplierStart();
  full.tail(fom->layout.total - fmstart) = Y.tail(layout.total - mstart);
  return full;
}

Eigen::VectorXd ReducedModel::reduceState(const Eigen::VectorXd& Yfull) const {
  Eigen::VectorXd Y = Eigen::VectorXd::Zero(layout.total);
  for (size_t j = 0; j < blocks.size(); ++j) {
    const auto& rb = blocks[j];
    const auto& lb = layout.blocks[j];
    const auto& fb = fom->layout.blocks[j];
    const auto uf = Yfull.segment(fb.uOffset, fb.nu);
    const auto pf = Yfull.segment(fb.pOffset, fb.np);
    Y.segment(lb.uOffset, lb.nu) =
        (rb.Vu.transpose() * rb.Vu).ldlt().solve(rb.Vu.transpose() * uf);
    Y.segment(lb.pOffset, lb.np) =
        (rb.Vp.transpose() * rb.Vp).ldlt().solve(rb.Vp.transpose() * pf);
  }
  Y.tail(layout.total - layout.multiplierStart()) =
      Yfull.tail(fom->layout.total - fom->layout.multiplierStart());
  return Y;
}

ReducedModel project_operators(
    const GlobalSystem& fom,
    const std::function<const PodBasis&(BlockKind)>& velocityBasis,
    const std::function<const PodBasis&(BlockKind)>& pressureBasis,
    ConvectiveMode mode, int nc) {
  ReducedModel model;
  model.fom = &fom;
  model.convective = mode;
  model.steady = fom.steady;
  model.dt = fom.dt;
  model.scheme = fom.scheme;
  for (const auto& fb : fom.blocks) {
    const BlockKind kind =
        fb.geom ? fb.geom->kind() : BlockKind::T1;
    const PodBasis& vb = velocityBasis(kind);
    const PodBasis& pb = pressureBasis(kind);
    ReducedBlock rb;
    rb.Vp = pb.modes;
    // physical-frame velocity basis: Piola pushforward column by column
    rb.Vu.resize(fb.space->numVelocityDofs(), vb.modes.cols());
    if (fb.geom) {
      const Eigen::MatrixXd& nodes = fb.space->velocityNodes();
      for (int k = 0; k < vb.modes.cols(); ++k)
        rb.Vu.col(k) = piola_pushforward(*fb.geom, nodes, vb.modes.col(k));
    } else {
      rb.Vu = vb.modes;
    }
    model.blocks.push_back(std::move(rb));
  }
  int effNc = nc;
  for (const auto& rb : model.blocks)
    effNc = std::min(effNc, static_cast<int>(rb.Vu.cols()));
  model.build(mode == ConvectiveMode::Truncated ? effNc : 0);
  return model;
}

ReducedModel identity_reduced_model(const GlobalSystem& fom) {
  ReducedModel model;
  model.fom = &fom;
  model.convective = ConvectiveMode::Exact;
  model.steady = fom.steady;
  model.dt = fom.dt;
  model.scheme = fom.scheme;
  for (const auto& fb : fom.blocks) {
    ReducedBlock rb;
    rb.Vu = DenseMatrix::Identity(fb.space->numVelocityDofs(),
                                  fb.space->numVelocityDofs());
    rb.Vp = DenseMatrix::Identity(fb.space->numPressureDofs(),
                                  fb.space->numPressureDofs());
    model.blocks.push_back(std::move(rb));
  }
  model.build(0);
  return model;
}

RomTrajectory rom_time_loop(ReducedModel& model, const RomLoopConfig& cfg,
                            std::vector<RomStepStats>* stats) {
  if (cfg.dt <= 0 || cfg.tEnd <= cfg.t0)
    throw Error("rom_time_loop: bad time window");
  RomTrajectory traj;
  std::deque<Eigen::VectorXd> history;
  Eigen::VectorXd Y = Eigen::VectorXd::Zero(model.layout.total);
  history.push_front(Y);

  const double tStart = std::min(cfg.rampStart, cfg.t0);
  const int nSteps =
      static_cast<int>(std::llround((cfg.tEnd - tStart) / cfg.dt));
  traj.states.push_back({tStart, Y});

  BdfScheme full = bdf_coefficients(cfg.sigma);
  for (int k = 0; k < nSteps; ++k) {
    const double t = tStart + (k + 1) * cfg.dt;
    model.steady = false;
    model.dt = cfg.dt;
    const bool boot = static_cast<int>(history.size()) < full.order();
    model.scheme = boot ? bdf_coefficients(1) : full;
    model.ensureTangent();
    // Newton with the fixed tangent
    Eigen::VectorXd R = model.residual(Y, t, history);
    const double r0 = R.norm();
    int it = 0;
    if (r0 > 0) {
      for (;; ++it) {
        if (R.norm() / r0 < cfg.newtonTol) break;
        if (it >= cfg.newtonMaxIters)
          throw SolverError("rom_time_loop: Newton did not converge at step " +
                            std::to_string(k));
        Y += model.solveTangent(-R);
        R = model.residual(Y, t, history);
      }
    }
    history.push_front(Y);
    while (static_cast<int>(history.size()) > 2) history.pop_back();
    traj.states.push_back({t, Y});
    if (stats) stats->push_back({it});
  }
  return traj;
}

}  // namespace rbe
