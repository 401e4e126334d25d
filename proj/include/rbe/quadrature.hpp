#ifndef RBE_QUADRATURE_HPP
#define RBE_QUADRATURE_HPP

#include <vector>

#include <Eigen/Dense>

namespace rbe {

/// Symmetric quadrature on the unit triangle {x,y>=0, x+y<=1}.
/// Weights sum to 1/2 (the reference area).
struct TriangleRule {
  std::vector<Eigen::Vector2d> points;
  std::vector<double> weights;
};

/// Rule exact for polynomials up to the given degree (2, 4 or 5).
const TriangleRule& triangle_rule(int degree);

/// Gauss-Legendre rule on [-1,1], exact to degree 2n-1.
struct GaussRule {
  std::vector<double> points;
  std::vector<double> weights;
};
const GaussRule& gauss_legendre(int n);

}  // namespace rbe

#endif
