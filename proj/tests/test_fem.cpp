#include <doctest.h>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "rbe/errors.hpp"
#include "rbe/fem.hpp"
#include "rbe/linalg.hpp"
#include "rbe/quadrature.hpp"

using namespace rbe;

namespace {

constexpr double kRho = 1.06;
constexpr double kMu = 0.04;

Eigen::VectorXd interp_u(const TaylorHoodSpace& s, rbe::testing::VecField f) {
  return interpolate_velocity(s, nullptr, f);
}

}  // namespace

TEST_SUITE("fem") {

TEST_CASE("mass identity on constant fields") {
  const auto mesh = generate_reference_block(BlockKind::T1, 2);
  const TaylorHoodSpace space(mesh);
  const auto ops = assemble_static(space, nullptr, kRho, kMu);
  const Eigen::VectorXd ones =
      Eigen::VectorXd::Ones(space.numVelocityDofs());
  CHECK(ones.dot(ops.M * ones) ==
        doctest::Approx(kRho * 2.0 * 1.0).epsilon(1e-10));
}

TEST_CASE("stiffness annihilates rigid motions") {
  const auto mesh = generate_reference_block(BlockKind::T1, 2);
  const TaylorHoodSpace space(mesh);
  const auto ops = assemble_static(space, nullptr, kRho, kMu);
  const Eigen::VectorXd v = interp_u(space, [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-x.y(), x.x());
  });
  CHECK((ops.K * v).cwiseAbs().maxCoeff() <= 1e-10);
  const Eigen::VectorXd c = interp_u(space, [](const Eigen::Vector2d&) {
    return Eigen::Vector2d(0.3, -0.7);
  });
  CHECK((ops.K * c).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("Poiseuille profile is discretely divergence free") {
  const auto mesh = generate_reference_block(BlockKind::T1, 2);
  const TaylorHoodSpace space(mesh);
  const auto ops = assemble_static(space, nullptr, kRho, kMu);
  const Eigen::VectorXd u = interp_u(space, [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(1.0 - 4.0 * x.y() * x.y(), 0.0);
  });
  CHECK((ops.D * u).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("convective operator basics") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const TaylorHoodSpace space(mesh);
  const Eigen::VectorXd zero =
      Eigen::VectorXd::Zero(space.numVelocityDofs());
  CHECK(SpMat(assemble_convective(space, nullptr, kRho, zero)).norm() == 0.0);

  auto g = testing::rng(3);
  Eigen::VectorXd u(space.numVelocityDofs());
  for (int i = 0; i < u.size(); ++i) u(i) = testing::urand(g, -1, 1);
  const SpMat C1 = assemble_convective(space, nullptr, kRho, u);
  const SpMat C3 = assemble_convective(space, nullptr, kRho, 3.0 * u);
  CHECK((DenseMatrix(C3) - 3.0 * DenseMatrix(C1)).cwiseAbs().maxCoeff() <=
        1e-12 * DenseMatrix(C1).cwiseAbs().maxCoeff());

  CHECK_THROWS_AS(assemble_convective(space, nullptr, kRho, u.head(4)), Error);

  // Poiseuille self-advection vanishes
  const Eigen::VectorXd up = interp_u(space, [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(1.0 - 4.0 * x.y() * x.y(), 0.0);
  });
  const SpMat Cp = assemble_convective(space, nullptr, kRho, up);
  CHECK((Cp * up).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("convective tangent matches finite differences") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const TaylorHoodSpace space(mesh);
  auto g = testing::rng(9);
  Eigen::VectorXd u(space.numVelocityDofs()), w(space.numVelocityDofs());
  for (int i = 0; i < u.size(); ++i) {
    u(i) = testing::urand(g, -1, 1);
    w(i) = testing::urand(g, -1, 1);
  }
  auto cu = [&](const Eigen::VectorXd& x) -> Eigen::VectorXd {
    return assemble_convective(space, nullptr, kRho, x) * x;
  };
  const SpMat C = assemble_convective(space, nullptr, kRho, u);
  const SpMat Cp = assemble_convective_prime(space, nullptr, kRho, u);
  const double eps = 1e-7;
  const Eigen::VectorXd fd = (cu(u + eps * w) - cu(u - eps * w)) / (2 * eps);
  const Eigen::VectorXd an = (C + Cp) * w;
  CHECK((fd - an).norm() <= 1e-6 * std::max(1.0, an.norm()));
}

TEST_CASE("trilinear form consistent with the convective matrix") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const TaylorHoodSpace space(mesh);
  auto g = testing::rng(13);
  DenseMatrix modes(space.numVelocityDofs(), 2);
  for (int i = 0; i < modes.size(); ++i)
    modes.data()[i] = testing::urand(g, -1, 1);
  const double a = testing::urand(g, -1, 1), b = testing::urand(g, -1, 1);
  const Eigen::VectorXd u = a * modes.col(0) + b * modes.col(1);
  const Eigen::VectorXd proj =
      modes.transpose() *
      (assemble_convective(space, nullptr, kRho, u) * u);
  const Eigen::Vector2d coef(a, b);
  for (int i = 0; i < 2; ++i) {
    double ci = 0;
    for (int l = 0; l < 2; ++l)
      for (int m = 0; m < 2; ++m)
        ci += coef(l) * coef(m) *
              convective_trilinear(space, nullptr, kRho, modes, i, l, m);
    CHECK(ci == doctest::Approx(proj(i)).epsilon(1e-12));
  }
  // zero mode wipes the form
  DenseMatrix withZero = modes;
  withZero.col(1).setZero();
  CHECK(convective_trilinear(space, nullptr, kRho, withZero, 0, 1, 0) == 0.0);
  CHECK_THROWS_AS(convective_trilinear(space, nullptr, kRho, modes, 0, 2, 0),
                  Error);
}

TEST_CASE("interpolation is exact for quadratics") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const TaylorHoodSpace space(mesh);
  auto f = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(1 + 2 * x.x() + x.y() + x.x() * x.x(),
                           x.x() * x.y() - x.y() * x.y());
  };
  const Eigen::VectorXd u = interp_u(space, f);
  // exact at arbitrary points, not only nodes
  auto g = testing::rng(31);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d x(testing::urand(g, 0, 1),
                            testing::urand(g, -0.5, 0.5));
    const int cell = space.locateCell(x);
    CHECK((space.evalVelocity(cell, x, u) - f(x)).norm() <= 1e-12);
  }
  const Eigen::VectorXd c = interp_u(space, [](const Eigen::Vector2d&) {
    return Eigen::Vector2d(4.2, -1.0);
  });
  for (int i = 0; i < space.numVelocityNodes(); ++i) {
    CHECK(c(2 * i) == doctest::Approx(4.2));
    CHECK(c(2 * i + 1) == doctest::Approx(-1.0));
  }
}

TEST_CASE("parabolic inflow carries the prescribed flow rate") {
  const double Q0 = 0.73;
  const auto mesh = generate_reference_block(BlockKind::T1, 2);
  const TaylorHoodSpace space(mesh);
  const Eigen::VectorXd u = interp_u(space, [&](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(Q0 * 1.5 * (1.0 - 4.0 * x.y() * x.y()), 0.0);
  });
  // flow rate through the inlet by facet quadrature
  double rate = 0;
  const auto& gr = gauss_legendre(4);
  for (const auto& pf : tagged_port_facets(space, {FacetKind::Inlet, 0})) {
    const Eigen::Vector2d a = mesh.vertices.row(pf.verts[0]).head<2>();
    const Eigen::Vector2d b = mesh.vertices.row(pf.verts[1]).head<2>();
    for (size_t q = 0; q < gr.points.size(); ++q) {
      const double t = 0.5 * (gr.points[q] + 1.0);
      const Eigen::Vector2d xhat = (1 - t) * a + t * b;
      rate += gr.weights[q] * 0.5 * (b - a).norm() *
              space.evalVelocity(pf.cell, xhat, u).x();
    }
  }
  CHECK(rate == doctest::Approx(Q0).epsilon(1e-10));
}

TEST_CASE("norm matrices are positive definite") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const TaylorHoodSpace space(mesh);
  const auto ops = assemble_static(space, nullptr, kRho, kMu);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> esM{DenseMatrix(ops.M)};
  CHECK(esM.eigenvalues().minCoeff() > 0);
  Eigen::SelfAdjointEigenSolver<DenseMatrix> esP{DenseMatrix(ops.Xp)};
  CHECK(esP.eigenvalues().minCoeff() > 0);
  auto g = testing::rng(77);
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd x(space.numVelocityDofs());
    for (int i = 0; i < x.size(); ++i) x(i) = testing::urand(g, -1, 1);
    CHECK(x.dot(ops.Xu * x) > 0);
  }
}

TEST_CASE("divergence has full row rank and a stable inf-sup trend") {
  double prev = -1;
  for (int r = 1; r <= 3; ++r) {
    const auto mesh = generate_reference_block(BlockKind::T1, r);
    const TaylorHoodSpace space(mesh);
    auto ops = assemble_static(space, nullptr, kRho, kMu);
    // wall-constrained pair, as used in the solver
    SpMat D = ops.D, Xu = ops.Xu;
    constrain_rows_cols(D, space.wallDofs(), false, true);
    constrain_rows_cols(Xu, space.wallDofs());
    for (int d : space.wallDofs()) Xu.coeffRef(d, d) = 1.0;
    const double beta = generalized_min_singular(D, Xu, ops.Xp);
    CHECK(beta > 0);
    if (prev > 0) CHECK(beta >= 0.8 * prev);
    prev = beta;
  }
}

TEST_CASE("degenerate cell is rejected") {
  SimplicialMesh m;
  m.dim = 2;
  m.vertices.resize(4, 2);
  m.vertices << 0, 0, 1, 0, 2, 0, 0, 1;  // first three collinear
  m.cells.resize(2, 3);
  m.cells << 0, 1, 2, 0, 1, 3;
  const auto bnd = m.boundaryFacets();
  for (const auto& f : bnd) m.facetTags[f] = {FacetKind::Wall, 0};
  CHECK_THROWS_AS(
      [&] {
        const TaylorHoodSpace space(m);
        assemble_static(space, nullptr, 1.0, 1.0);
      }(),
      Error);
}

}  // TEST_SUITE
