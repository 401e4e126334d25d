#ifndef RBE_SOLVER_HPP
#define RBE_SOLVER_HPP

#include <functional>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "rbe/assembly.hpp"

namespace rbe {

struct NewtonConfig {
  double tol = 1e-10;  // relative residual
  int maxIters = 30;
  Linearization linearization = Linearization::Newton;
};

struct KrylovConfig {
  enum class Method { Gmres, Fgmres };
  Method method = Method::Fgmres;
  double tol = 1e-10;
  int restart = 200;
  int maxIters = 2000;
};

enum class InnerSolveMode { Simple, Direct, InnerGmres };

struct PrecondConfig {
  InnerSolveMode inner = InnerSolveMode::Direct;
  double innerTol = 1e-2;  // InnerGmres only
  int schurReuse = 1;      // rebuild period (1 = every build request)
};

/// Rebuild exactly when the request counter is a multiple of the period.
bool schur_reuse_policy(int counter, int period);

using ApplyFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct KrylovResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double relativeResidual = 0.0;
  bool converged = false;
};

/// Right-preconditioned GMRES / flexible GMRES with restart.
KrylovResult krylov_solve(const ApplyFn& A, const Eigen::VectorXd& b,
                          const Eigen::VectorXd& x0, const KrylovConfig& cfg,
                          const ApplyFn& precond);

/// Per-block saddle solvers feeding the Schur complement and the
/// preconditioner application.
class BlockInnerSolvers {
 public:
  void build(const GlobalSystem::Tangent& tan, InnerSolveMode mode,
             double innerTol);
  /// Solve the block saddle system [[F, ts D^T],[ts D, 0]] (approximately,
  /// depending on the mode).
  Eigen::VectorXd solve(int block, const Eigen::VectorXd& rhs) const;

 private:
  struct Block {
    int nu = 0, np = 0;
    InnerSolveMode mode = InnerSolveMode::Direct;
    double innerTol = 1e-2;
    std::unique_ptr<Eigen::SparseLU<SpMat>> lu;            // Direct
    Eigen::VectorXd invDiag;                               // Simple
    std::unique_ptr<Eigen::SimplicialLDLT<SpMat>> pschur;  // Simple
    SpMat saddle;                                          // InnerGmres
  };
  std::vector<Block> blocks_;
  const GlobalSystem* sys_ = nullptr;
  double ts_ = 1.0;

  Eigen::VectorXd simpleApply(const Block& b, int j,
                              const Eigen::VectorXd& rhs) const;
  friend class SaddlePreconditioner;
};

/// Dense multiplier-space Schur complement S = -Btilde Atilde^-1 Btilde^T,
/// accumulated block by block with the given inner solver.
Eigen::MatrixXd build_schur(const GlobalSystem::Tangent& tan,
                            const BlockInnerSolvers& inner);
Eigen::MatrixXd build_schur(const GlobalSystem::Tangent& tan,
                            InnerSolveMode mode, double innerTol = 1e-2);

/// Block-LDU preconditioner: two inner solves per application and one dense
/// Schur solve. The Schur complement is rebuilt per the reuse policy.
class SaddlePreconditioner {
 public:
  explicit SaddlePreconditioner(PrecondConfig cfg = {}) : cfg_(cfg) {}

  /// Refresh per-block solvers; rebuild the Schur complement when the reuse
  /// policy says so (every call counts as one build request).
  void update(const GlobalSystem::Tangent& tan);

  Eigen::VectorXd apply(const Eigen::VectorXd& rhs) const;

  const Eigen::MatrixXd& schur() const { return S_; }
  int schurBuilds() const { return schurBuilds_; }
  void resetCounter() { counter_ = 0; }
  const PrecondConfig& config() const { return cfg_; }

 private:
  PrecondConfig cfg_;
  BlockInnerSolvers inner_;
  const GlobalSystem::Tangent* tan_ = nullptr;
  Eigen::MatrixXd S_;
  Eigen::FullPivLU<Eigen::MatrixXd> luS_;
  int counter_ = 0;
  int schurBuilds_ = 0;
};

struct NewtonResult {
  Eigen::VectorXd Y;
  int iterations = 0;
  std::vector<double> residualHistory;
  int krylovIterations = 0;  // summed over Newton iterations
  int krylovSolves = 0;
};

/// Newton-Raphson on the global residual with relative stopping criterion
/// |R(Y^l)| / |R(Y^0)| < tol. Throws SolverError on max iterations or
/// Krylov breakdown.
NewtonResult newton_solve(const GlobalSystem& sys, Eigen::VectorXd Y0,
                          double t, const NewtonConfig& ncfg,
                          const KrylovConfig& kcfg,
                          SaddlePreconditioner& prec);

}  // namespace rbe

#endif
