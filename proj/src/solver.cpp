#include "rbe/solver.hpp"

#include <cmath>

#include "rbe/errors.hpp"

namespace rbe {

bool schur_reuse_policy(int counter, int period) {
  if (period < 1) throw Error("schur_reuse_policy: period must be >= 1");
  return counter % period == 0;
}

namespace {

// one Arnoldi cycle; returns true if converged
bool gmres_cycle(const ApplyFn& A, const ApplyFn& M, bool flexible,
                 const Eigen::VectorXd& b, Eigen::VectorXd& x, double tol,
                 int m, int& itersUsed, int maxIters) {
  const int n = static_cast<int>(b.size());
  Eigen::VectorXd r = b - A(x);
  const double bnorm = b.norm() > 0 ? b.norm() : 1.0;
  double beta = r.norm();
  if (beta / bnorm < tol) return true;

  Eigen::MatrixXd V(n, m + 1), Z(n, flexible ? m : 0);
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(m + 1, m);
  Eigen::VectorXd cs(m), sn(m), g = Eigen::VectorXd::Zero(m + 1);
  V.col(0) = r / beta;
  g(0) = beta;

  int k = 0;
  for (; k < m && itersUsed < maxIters; ++k, ++itersUsed) {
    Eigen::VectorXd z = M ? M(V.col(k)) : V.col(k);
    if (flexible) Z.col(k) = z;
    Eigen::VectorXd w = A(z);
    for (int i = 0; i <= k; ++i) {
      H(i, k) = w.dot(V.col(i));
      w -= H(i, k) * V.col(i);
    }
    H(k + 1, k) = w.norm();
    const bool happy = H(k + 1, k) < 1e-14 * beta;
    if (!happy) V.col(k + 1) = w / H(k + 1, k);

    for (int i = 0; i < k; ++i) {
      const double t = cs(i) * H(i, k) + sn(i) * H(i + 1, k);
      H(i + 1, k) = -sn(i) * H(i, k) + cs(i) * H(i + 1, k);
      H(i, k) = t;
    }
    const double denom = std::hypot(H(k, k), H(k + 1, k));
    cs(k) = H(k, k) / denom;
    sn(k) = H(k + 1, k) / denom;
    H(k, k) = denom;
    H(k + 1, k) = 0.0;
    g(k + 1) = -sn(k) * g(k);
    g(k) = cs(k) * g(k);

    if (std::abs(g(k + 1)) / bnorm < tol || happy) {
      ++k;
      ++itersUsed;
      break;
    }
  }
  if (k == 0) return false;
  const Eigen::VectorXd y = H.topLeftCorner(k, k)
                                .triangularView<Eigen::Upper>()
                                .solve(g.head(k));
  if (flexible) {
    x += Z.leftCols(k) * y;
  } else {
    const Eigen::VectorXd u = V.leftCols(k) * y;
    x += M ? M(u) : u;
  }
  return (b - A(x)).norm() / bnorm < tol;
}

}  // namespace

KrylovResult krylov_solve(const ApplyFn& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& x0, const KrylovConfig& cfg,
                          const ApplyFn& precond) {
  if (cfg.restart < 1) throw Error("krylov_solve: restart must be >= 1");
  KrylovResult res;
  res.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero();
    res.converged = true;
    return res;
  }
  const bool flexible = cfg.method == KrylovConfig::Method::Fgmres;
  int iters = 0;
  bool ok = false;
  while (iters < cfg.maxIters && !ok)
    ok = gmres_cycle(A, precond, flexible, b, res.x, cfg.tol, cfg.restart,
                     iters, cfg.maxIters);
  res.iterations = iters;
  res.relativeResidual = (b - A(res.x)).norm() / bnorm;
  res.converged = res.relativeResidual <= cfg.tol;
  return res;
}

void BlockInnerSolvers::build(const GlobalSystem::Tangent& tan,
                              InnerSolveMode mode, double innerTol) {
  sys_ = tan.sys;
  ts_ = tan.ts;
  blocks_.clear();
  for (size_t j = 0; j < sys_->blocks.size(); ++j) {
    const auto& sb = sys_->blocks[j];
    const auto& lb = sys_->layout.blocks[j];
    Block b;
    b.nu = lb.nu;
    b.np = lb.np;
    b.mode = mode;
    b.innerTol = innerTol;

    // assembled block saddle [[F, ts D^T],[ts D, 0]]
    std::vector<Eigen::Triplet<double>> trips;
    const SpMat& F = tan.F[j];
    for (int k = 0; k < F.outerSize(); ++k)
      for (SpMat::InnerIterator it(F, k); it; ++it)
        trips.emplace_back(it.row(), it.col(), it.value());
    for (int k = 0; k < sb.Dc.outerSize(); ++k)
      for (SpMat::InnerIterator it(sb.Dc, k); it; ++it) {
        trips.emplace_back(b.nu + it.row(), it.col(), ts_ * it.value());
        trips.emplace_back(it.col(), b.nu + it.row(), ts_ * it.value());
      }
    SpMat saddle(b.nu + b.np, b.nu + b.np);
    saddle.setFromTriplets(trips.begin(), trips.end());
    saddle.makeCompressed();

    if (mode == InnerSolveMode::Direct) {
      b.lu = std::make_unique<Eigen::SparseLU<SpMat>>();
      b.lu->compute(saddle);
      if (b.lu->info() != Eigen::Success)
        throw SolverError("inner solver: block factorization failed");
    } else {
      b.invDiag.resize(b.nu);
      for (int i = 0; i < b.nu; ++i) {
        const double d = F.coeff(i, i);
        if (d == 0.0)
          throw SolverError(
              "SIMPLE: zero momentum diagonal (degenerate mesh or dt)");
        b.invDiag(i) = 1.0 / d;
      }
      // pressure Schur ts^2 D diag(F)^-1 D^T
      SpMat Dw = sb.Dc;
      for (int k = 0; k < Dw.outerSize(); ++k)
        for (SpMat::InnerIterator it(Dw, k); it; ++it)
          it.valueRef() *= b.invDiag(it.col());
      SpMat PS = (ts_ * ts_) * (Dw * SpMat(sb.Dc.transpose()));
      b.pschur = std::make_unique<Eigen::SimplicialLDLT<SpMat>>();
      b.pschur->compute(PS);
      if (b.pschur->info() != Eigen::Success)
        throw SolverError("SIMPLE: pressure Schur factorization failed");
      if (mode == InnerSolveMode::InnerGmres) b.saddle = std::move(saddle);
    }
    blocks_.push_back(std::move(b));
  }
}

Eigen::VectorXd BlockInnerSolvers::simpleApply(
    const Block& b, int j, const Eigen::VectorXd& rhs) const {
  const auto& sb = sys_->blocks[j];
  const Eigen::VectorXd fu = rhs.head(b.nu);
  const Eigen::VectorXd fp = rhs.tail(b.np);
  const Eigen::VectorXd ustar = b.invDiag.asDiagonal() * fu;
  // pressure solve: -(ts^2 D diagF^-1 D^T) p = fp - ts D u*
  const Eigen::VectorXd rp = fp - ts_ * (sb.Dc * ustar);
  const Eigen::VectorXd p = -b.pschur->solve(rp);
  Eigen::VectorXd u =
      ustar - b.invDiag.asDiagonal() * (ts_ * (sb.Dc.transpose() * p));
  Eigen::VectorXd out(b.nu + b.np);
  out << u, p;
  return out;
}

Eigen::VectorXd BlockInnerSolvers::solve(int block,
                                         const Eigen::VectorXd& rhs) const {
  const Block& b = blocks_[block];
  if (b.mode == InnerSolveMode::Direct) {
    Eigen::VectorXd x = b.lu->solve(rhs);
    return x;
  }
  if (b.mode == InnerSolveMode::Simple) return simpleApply(b, block, rhs);
  // InnerGmres: SIMPLE-preconditioned GMRES on the block saddle
  KrylovConfig cfg;
  cfg.method = KrylovConfig::Method::Gmres;
  cfg.tol = b.innerTol;
  cfg.restart = 100;
  cfg.maxIters = 400;
  auto A = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return b.saddle * x;
  };
  auto M = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return simpleApply(b, block, x);
  };
  return krylov_solve(A, rhs, Eigen::VectorXd::Zero(rhs.size()), cfg, M).x;
}

Eigen::MatrixXd build_schur(const GlobalSystem::Tangent& tan,
                            const BlockInnerSolvers& inner) {
  const GlobalSystem& sys = *tan.sys;
  const auto& layout = sys.layout;
  const int nl = layout.total - layout.multiplierStart();
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(nl, nl);
  const double ts = tan.ts;
  for (size_t j = 0; j < sys.blocks.size(); ++j) {
    const auto& sb = sys.blocks[j];
    if (sb.couplings.empty()) continue;
    const auto& lb = layout.blocks[j];
    int cols = 0;
    for (const auto& c : sb.couplings) cols += static_cast<int>(c.B.rows());
    Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(lb.nu + lb.np, cols);
    std::vector<int> colSeg(cols);
    {
      int at = 0;
      for (const auto& c : sb.couplings) {
        rhs.block(0, at, lb.nu, c.B.rows()) = ts * c.B.transpose();
        const auto& seg = layout.lambdas[c.segment];
        for (int q = 0; q < c.B.rows(); ++q)
          colSeg[at + q] = seg.offset - layout.multiplierStart() + q;
        at += static_cast<int>(c.B.rows());
      }
    }
    Eigen::MatrixXd sol(lb.nu + lb.np, cols);
    for (int q = 0; q < cols; ++q) sol.col(q) = inner.solve(static_cast<int>(j), rhs.col(q));
    for (const auto& cI : sb.couplings) {
      const auto& segI = layout.lambdas[cI.segment];
      const Eigen::MatrixXd rows = ts * (cI.B * sol.topRows(lb.nu));
      for (int q = 0; q < cols; ++q)
        S.block(segI.offset - layout.multiplierStart(), colSeg[q],
                cI.B.rows(), 1) -= rows.col(q);
    }
  }
  return S;
}

Eigen::MatrixXd build_schur(const GlobalSystem::Tangent& tan,
                            InnerSolveMode mode, double innerTol) {
  BlockInnerSolvers inner;
  inner.build(tan, mode, innerTol);
  return build_schur(tan, inner);
}

void SaddlePreconditioner::update(const GlobalSystem::Tangent& tan) {
  tan_ = &tan;
  inner_.build(tan, cfg_.inner, cfg_.innerTol);
  if (schur_reuse_policy(counter_, cfg_.schurReuse) ||
      S_.rows() != tan.sys->layout.total - tan.sys->layout.multiplierStart()) {
    S_ = build_schur(tan, inner_);
    if (S_.rows() > 0) {
      luS_.compute(S_);
      if (!luS_.isInvertible())
        throw SolverError("preconditioner: singular Schur complement");
    }
    ++schurBuilds_;
  }
  ++counter_;
}

Eigen::VectorXd SaddlePreconditioner::apply(const Eigen::VectorXd& rhs) const {
  if (!tan_) throw SolverError("preconditioner: not built");
  const GlobalSystem& sys = *tan_->sys;
  const auto& layout = sys.layout;
  const int mstart = layout.multiplierStart();
  const double ts = tan_->ts;
  Eigen::VectorXd out(layout.total);

  // Z_w = Atilde^-1 rhs_w (computed once), r_lambda = rhs_l - Btilde Z_w
  std::vector<Eigen::VectorXd> Zw(sys.blocks.size());
  Eigen::VectorXd rl = rhs.tail(layout.total - mstart);
  for (size_t j = 0; j < sys.blocks.size(); ++j) {
    const auto& lb = layout.blocks[j];
    Eigen::VectorXd lrhs(lb.nu + lb.np);
    lrhs << rhs.segment(lb.uOffset, lb.nu), rhs.segment(lb.pOffset, lb.np);
    Zw[j] = inner_.solve(static_cast<int>(j), lrhs);
    for (const auto& c : sys.blocks[j].couplings) {
      const auto& seg = layout.lambdas[c.segment];
      rl.segment(seg.offset - mstart, seg.n) -= ts * (c.B * Zw[j].head(lb.nu));
    }
  }
  // X_lambda = S^-1 r_lambda
  Eigen::VectorXd xl =
      rl.size() > 0 ? Eigen::VectorXd(luS_.solve(rl)) : Eigen::VectorXd();
  // X_w = Z_w - Atilde^-1 Btilde^T X_lambda
  for (size_t j = 0; j < sys.blocks.size(); ++j) {
    const auto& lb = layout.blocks[j];
    Eigen::VectorXd corr = Eigen::VectorXd::Zero(lb.nu + lb.np);
    for (const auto& c : sys.blocks[j].couplings) {
      const auto& seg = layout.lambdas[c.segment];
      corr.head(lb.nu) +=
          ts * (c.B.transpose() * xl.segment(seg.offset - mstart, seg.n));
    }
    Eigen::VectorXd xw = Zw[j];
    if (corr.squaredNorm() > 0) xw -= inner_.solve(static_cast<int>(j), corr);
    out.segment(lb.uOffset, lb.nu) = xw.head(lb.nu);
    out.segment(lb.pOffset, lb.np) = xw.tail(lb.np);
  }
  if (rl.size() > 0) out.tail(layout.total - mstart) = xl;
  return out;
}

NewtonResult newton_solve(const GlobalSystem& sys, Eigen::VectorXd Y0,
                          double t, const NewtonConfig& ncfg,
                          const KrylovConfig& kcfg,
                          SaddlePreconditioner& prec) {
  if (ncfg.tol <= 0) throw Error("newton_solve: tolerance must be > 0");
  NewtonResult res;
  res.Y = std::move(Y0);
  double r0 = -1.0;
  for (int l = 0;; ++l) {
    const Eigen::VectorXd R = sys.residual(res.Y, t);
    const double rn = R.norm();
    res.residualHistory.push_back(rn);
    if (l == 0) {
      r0 = rn;
      if (r0 == 0.0) break;
    }
    if (rn / r0 < ncfg.tol) break;
    if (l >= ncfg.maxIters)
      throw SolverError("newton_solve: maximum iterations exceeded");

    const auto tan = sys.tangent(res.Y, ncfg.linearization);
    prec.update(tan);
    auto A = [&](const Eigen::VectorXd& x) { return tan.apply(x); };
    auto M = [&](const Eigen::VectorXd& x) { return prec.apply(x); };
    const KrylovResult lin =
        krylov_solve(A, -R, Eigen::VectorXd::Zero(R.size()), kcfg, M);
    if (!lin.converged)
      throw SolverError("newton_solve: linear solver breakdown");
    res.Y += lin.x;
    res.krylovIterations += lin.iterations;
    ++res.krylovSolves;
    res.iterations = l + 1;
  }
  return res;
}

}  // namespace rbe
