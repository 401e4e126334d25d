#ifndef RBE_TESTS_HELPERS_HPP
#define RBE_TESTS_HELPERS_HPP

#include <functional>
#include <random>

#include "rbe/fem.hpp"
#include "rbe/geomap.hpp"

namespace rbe::testing {

using VecField = std::function<Eigen::Vector2d(const Eigen::Vector2d&)>;

/// Piola pullback of an analytic physical field as a reference-frame callable.
inline VecField pulled_back_field(const BlockGeometry& geom, VecField v) {
  return [&geom, v](const Eigen::Vector2d& xhat) -> Eigen::Vector2d {
    const Eigen::Matrix2d J = geom.jacobian(xhat);
    return J.determinant() * (J.inverse() * v(geom.map(xhat)));
  };
}

/// Central finite-difference divergence of a reference-frame callable.
inline double fd_divergence(const VecField& f, const Eigen::Vector2d& x,
                            double eps = 1e-6) {
  const Eigen::Vector2d ex(eps, 0), ey(0, eps);
  return (f(x + ex).x() - f(x - ex).x() + f(x + ey).y() - f(x - ey).y()) /
         (2 * eps);
}

/// Weak divergence residual of a callable field against the P1 test space
/// on the reference mesh (independent finite-difference oracle).
inline Eigen::VectorXd weak_divergence_fd(const TaylorHoodSpace& space,
                                          const VecField& fhat) {
  return assemble_divergence_functional(
      space, [&](int, const Eigen::Vector2d& xhat) {
        return fd_divergence(fhat, xhat);
      });
}

/// Reference-frame evaluation of a FE velocity field defined by mapped-basis
/// composition (coefficients are nodal values).
inline VecField fe_field(const TaylorHoodSpace& space,
                         const Eigen::VectorXd& u) {
  return [&space, u](const Eigen::Vector2d& xhat) -> Eigen::Vector2d {
    const int cell = space.locateCell(xhat);
    return space.evalVelocity(cell, xhat, u);
  };
}

inline std::mt19937_64 rng(unsigned long long seed) {
  return std::mt19937_64(seed);
}

inline double urand(std::mt19937_64& g, double a, double b) {
  return uniform_in(g, a, b);
}

}  // namespace rbe::testing

#endif
