#ifndef RBE_ROM_HPP
#define RBE_ROM_HPP

#include <vector>

#include <Eigen/Dense>

#include "rbe/assembly.hpp"
#include "rbe/pod.hpp"
#include "rbe/solver.hpp"

namespace rbe {

enum class ConvectiveMode { Exact, Truncated };

/// Reduced operators of one subdomain. The velocity basis lives in the
/// physical frame (Piola pushforward of the reference modes); the pressure
/// basis is used as-is.
struct ReducedBlock {
  DenseMatrix Vu;  // nu x N
  DenseMatrix Vp;  // np x Np
  DenseMatrix MN, KN, IwN;  // N x N
  DenseMatrix DN;           // Np x N
  struct CouplingRef {
    int segment = 0;
    DenseMatrix BN;  // nl x N
  };
  std::vector<CouplingRef> couplings;
  std::vector<DenseMatrix> tensor;  // T[i](l,m), i < N, l,m < Nc
  int Nc = 0;
};

struct RomState {
  double time = 0.0;
  Eigen::VectorXd Y;  // reduced layout
};

struct RomTrajectory {
  std::vector<RomState> states;
};

struct RomStepStats {
  int newtonIterations = 0;
};

/// Online reduced model sharing the FOM's multiplier layout.
class ReducedModel {
 public:
  const GlobalSystem* fom = nullptr;
  std::vector<ReducedBlock> blocks;
  BlockLayout layout;
  ConvectiveMode convective = ConvectiveMode::Exact;

  bool steady = false;
  double dt = 1.0;
  BdfScheme scheme = bdf_coefficients(1);
  double timeScale() const { return steady ? 1.0 : dt * scheme.beta; }

  /// Factorized constant-in-time tangent (convective terms dropped).
  struct FixedTangent {
    double ts = 1.0;
    std::vector<Eigen::PartialPivLU<DenseMatrix>> blockLU;
    DenseMatrix S;
    Eigen::FullPivLU<DenseMatrix> luS;
    bool singular = false;
    double schurMinSingular = 0.0;
    int builds = 0;
  };
  const FixedTangent& fixedTangent() const { return tangent_; }

  /// Assemble projections, the truncated convective tensor, and factorize
  /// the reduced tangent. Throws on a singular reduced Schur complement.
  void build(int nc);

  /// Reduced convective residual block c^N for subdomain j.
  Eigen::VectorXd reducedConvective(int j, const Eigen::VectorXd& uN,
                                    ConvectiveMode mode) const;

  Eigen::VectorXd residual(const Eigen::VectorXd& Y, double t,
                           const std::deque<Eigen::VectorXd>& history) const;

  /// Direct solve of the fixed reduced tangent.
  Eigen::VectorXd solveTangent(const Eigen::VectorXd& rhs) const;

  /// Full-order state (FOM layout) from a reduced state.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& Y) const;

  /// Reduced counterpart of a full-order state (L2 coefficient projection
  /// through the X-orthonormality of the bases is not assumed; uses normal
  /// equations on the basis columns).
  Eigen::VectorXd reduceState(const Eigen::VectorXd& Yfull) const;

  int reducedSchurSize() const { return static_cast<int>(tangent_.S.rows()); }

  /// Refactorize the fixed tangent when dt / scheme / steady changed.
  void ensureTangent();

 private:
  void buildTangent();

  FixedTangent tangent_;
  double builtDt_ = -1.0;
  int builtOrder_ = -1;
  bool builtSteady_ = false;
};

/// Build a model from per-kind enriched bases. Blocks of the same kind share
/// reference-frame modes; each block pushes them forward through its own map.
ReducedModel project_operators(
    const GlobalSystem& fom,
    const std::function<const PodBasis&(BlockKind)>& velocityBasis,
    const std::function<const PodBasis&(BlockKind)>& pressureBasis,
    ConvectiveMode mode, int nc);

/// Degenerate reduction: identity bases on every block (testing hook).
ReducedModel identity_reduced_model(const GlobalSystem& fom);

/// Implicit time loop with the fixed factorized tangent; Newton on the
/// reduced residual at every step.
struct RomLoopConfig {
  double t0 = 0.0, tEnd = 0.3, dt = 2.5e-3;
  double rampStart = 0.0;  // equal to t0 disables the ramp window
  int sigma = 2;
  double newtonTol = 1e-10;
  int newtonMaxIters = 50;
};
RomTrajectory rom_time_loop(ReducedModel& model, const RomLoopConfig& cfg,
                            std::vector<RomStepStats>* stats = nullptr);

}  // namespace rbe

#endif
