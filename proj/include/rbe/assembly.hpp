#ifndef RBE_ASSEMBLY_HPP
#define RBE_ASSEMBLY_HPP

#include <deque>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "rbe/coupling.hpp"
#include "rbe/fem.hpp"

namespace rbe {

struct BdfScheme {
  std::vector<double> alpha;
  double beta = 1.0;
  int order() const { return static_cast<int>(alpha.size()); }
};

/// sigma=1: alpha={1}, beta=1 (backward Euler); sigma=2: {4/3,-1/3}, 2/3.
BdfScheme bdf_coefficients(int sigma);

/// Global unknown layout: per subdomain velocity then pressure, then the
/// multiplier segments (interior interfaces first, inlets after).
struct BlockLayout {
  struct Block {
    int uOffset = 0, nu = 0, pOffset = 0, np = 0;
  };
  struct Segment {
    int offset = 0, n = 0;
  };
  std::vector<Block> blocks;
  std::vector<Segment> lambdas;
  int total = 0;

  int multiplierStart() const {
    return lambdas.empty() ? total : lambdas.front().offset;
  }
};

enum class Linearization { Newton, Picard };

struct SystemBlock {
  const TaylorHoodSpace* space = nullptr;
  const BlockGeometry* geom = nullptr;  // nullptr = reference configuration
  double rho = 1.0, mu = 1.0;
  BlockOperators ops;    // raw operators
  SpMat Mc, Kc, Dc;      // wall rows/columns eliminated
  std::vector<int> wallDofs;

  struct CouplingRef {
    int segment = 0;          // multiplier segment index
    Eigen::MatrixXd B;        // sign applied, wall columns zeroed
  };
  std::vector<CouplingRef> couplings;
  std::vector<FacetTag> neumannPorts;  // free outlet ports of this block

  // optional manufactured-data hooks
  std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)> forcing;
  std::function<Eigen::Vector2d(const Eigen::Vector2d&, double)> outletTraction;
};

struct InletData {
  int block = 0;
  int segment = 0;
  Eigen::VectorXd rhsUnit;  // B_in * (unit-rate profile dofs)
  std::function<double(double)> rate;  // flow-rate scale Q(t)
};

/// Assembled coupled system: per-block operators, coupling blocks, BDF state.
class GlobalSystem {
 public:
  std::vector<SystemBlock> blocks;
  std::vector<InterfaceDescriptor> interfaces;
  MultiplierBasis basis;
  BlockLayout layout;

  bool steady = false;
  double dt = 1.0;
  BdfScheme scheme = bdf_coefficients(1);
  std::vector<InletData> inlets;
  std::deque<Eigen::VectorXd> history;  // most recent first

  double timeScale() const { return steady ? 1.0 : dt * scheme.beta; }

  void buildLayout();

  /// Multiplier data vector G(t) stacked over segments.
  Eigen::VectorXd constraintData(double t) const;

  /// BDF (or steady) residual at state Y and time t.
  Eigen::VectorXd residual(const Eigen::VectorXd& Y, double t) const;

  /// Tangent operator at state Y; holds per-block sparse momentum blocks.
  struct Tangent {
    const GlobalSystem* sys = nullptr;
    double ts = 1.0;
    bool withMass = false;
    std::vector<SpMat> F;  // per block, wall unit diagonal included
    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  };
  Tangent tangent(const Eigen::VectorXd& Y,
                  Linearization mode = Linearization::Newton) const;

  void pushHistory(const Eigen::VectorXd& Y);
};

}  // namespace rbe

#endif
