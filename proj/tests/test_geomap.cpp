#include <doctest.h>

#include "helpers.hpp"
#include "rbe/errors.hpp"
#include "rbe/fem.hpp"
#include "rbe/geomap.hpp"
#include "rbe/quadrature.hpp"

using namespace rbe;

namespace {

Eigen::Matrix2d fd_jacobian(const BlockGeometry& g, const Eigen::Vector2d& x,
                            double eps = 1e-7) {
  Eigen::Matrix2d J;
  const Eigen::Vector2d ex(eps, 0), ey(0, eps);
  J.col(0) = (g.map(x + ex) - g.map(x - ex)) / (2 * eps);
  J.col(1) = (g.map(x + ey) - g.map(x - ey)) / (2 * eps);
  return J;
}

GeoParams tube_params(double bend, double len, double rad) {
  GeoParams p;
  p.bend = bend;
  p.lengthRatio = len;
  p.radiusRatio = rad;
  return p;
}

}  // namespace

TEST_SUITE("geomap") {

TEST_CASE("identity parameters give the identity map") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const auto g = build_map(BlockKind::T1, GeoParams{}, mesh);
  auto rngen = testing::rng(1);
  for (int i = 0; i < 10; ++i) {
    const Eigen::Vector2d x(testing::urand(rngen, 0, 1),
                            testing::urand(rngen, -0.5, 0.5));
    CHECK((g.map(x) - x).norm() <= 1e-14);
    CHECK((g.jacobian(x) - Eigen::Matrix2d::Identity()).norm() <= 1e-14);
  }
}

TEST_CASE("radius scaling doubles the port length") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const auto g = build_map(BlockKind::T1, tube_params(0, 1, 2), mesh);
  CHECK(g.ports()[1].width == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(g.ports()[0].width == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("bent tube: outlet normal rotated, Jacobian matches FD") {
  const auto mesh = generate_reference_block(BlockKind::T2, 1);
  const auto g = build_map(BlockKind::T2, tube_params(0.2, 1, 1), mesh);
  const Eigen::Vector2d n = g.ports()[1].outwardNormal;
  CHECK(n.x() == doctest::Approx(std::cos(0.2)).epsilon(1e-12));
  CHECK(n.y() == doctest::Approx(std::sin(0.2)).epsilon(1e-12));

  auto rngen = testing::rng(17);
  for (int i = 0; i < 20; ++i) {
    const Eigen::Vector2d x(testing::urand(rngen, 0.01, 1.99),
                            testing::urand(rngen, -0.49, 0.49));
    CHECK((g.jacobian(x) - fd_jacobian(g, x)).norm() <= 1e-6);
    CHECK(g.jacobian(x).determinant() > 0);
  }
}

TEST_CASE("pure rotation Jacobian") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  GeoParams p;
  p.rotation = 0.7;
  const auto g = build_map(BlockKind::T1, p, mesh);
  Eigen::Matrix2d R;
  R << std::cos(0.7), -std::sin(0.7), std::sin(0.7), std::cos(0.7);
  CHECK((g.jacobian({0.3, 0.1}) - R).norm() <= 1e-14);
}

TEST_CASE("mid-axis bend Jacobian against finite differences") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const auto g = build_map(BlockKind::T1, tube_params(0.1, 1, 1), mesh);
  const Eigen::Vector2d x(0.5, 0.0);
  CHECK((g.jacobian(x) - fd_jacobian(g, x)).norm() <= 1e-6);
}

TEST_CASE("piola pullback: identity and scaling maps") {
  const auto mesh = generate_reference_block(BlockKind::T1, 2);
  const TaylorHoodSpace space(mesh);
  const auto& nodes = space.velocityNodes();

  const auto gid = build_map(BlockKind::T1, GeoParams{}, mesh);
  auto rngen = testing::rng(5);
  Eigen::VectorXd v(space.numVelocityDofs());
  for (int i = 0; i < v.size(); ++i) v(i) = testing::urand(rngen, -1, 1);
  CHECK((piola_pullback(gid, nodes, v) - v).norm() <= 1e-14);

  // uniform scaling x = c xhat: vhat(xhat) = c v(c xhat)
  const double c = 2.0;
  const auto gs = build_map(BlockKind::T1, tube_params(0, c, c), mesh);
  auto f = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(std::sin(x.x()), x.x() * x.y());
  };
  Eigen::VectorXd vphys(space.numVelocityDofs());
  for (int i = 0; i < nodes.rows(); ++i)
    vphys.segment<2>(2 * i) = f(gs.map(nodes.row(i).head<2>()));
  const Eigen::VectorXd vhat = piola_pullback(gs, nodes, vphys);
  for (int i = 0; i < nodes.rows(); ++i) {
    const Eigen::Vector2d expect = c * f(c * nodes.row(i).head<2>());
    CHECK((vhat.segment<2>(2 * i) - expect).norm() <= 1e-12);
  }
}

TEST_CASE("piola round trip is the identity") {
  const auto mesh = generate_reference_block(BlockKind::T2, 1);
  const TaylorHoodSpace space(mesh);
  const auto g = build_map(BlockKind::T2, tube_params(0.15, 1.2, 0.8), mesh);
  auto rngen = testing::rng(23);
  Eigen::VectorXd v(space.numVelocityDofs());
  for (int i = 0; i < v.size(); ++i) v(i) = testing::urand(rngen, -1, 1);
  const Eigen::VectorXd back =
      piola_pushforward(g, space.velocityNodes(),
                        piola_pullback(g, space.velocityNodes(), v));
  CHECK((back - v).cwiseAbs().maxCoeff() <= 1e-12);

  // scaling map halves the pullback's factor on the way back
  const auto gs = build_map(BlockKind::T1, tube_params(0, 2, 2), mesh);
}

TEST_CASE("divergence-free field stays divergence-free under pullback") {
  // analytic v = (-y, x), bend map, FD divergence oracle on the reference mesh
  const auto mesh = generate_reference_block(BlockKind::T1, 2);
  const TaylorHoodSpace space(mesh);
  const auto g = build_map(BlockKind::T1, tube_params(0.25, 1.1, 0.9), mesh);
  auto v = [](const Eigen::Vector2d& x) {
    return Eigen::Vector2d(-x.y(), x.x());
  };
  const auto vhat = testing::pulled_back_field(g, v);
  const Eigen::VectorXd r = testing::weak_divergence_fd(space, vhat);
  CHECK(r.norm() <= 1e-8);
}

TEST_CASE("det J positive over sampled admissible parameters") {
  const auto meshT = generate_reference_block(BlockKind::T1, 1);
  const auto& rule = triangle_rule(5);
  auto rngen = testing::rng(99);
  GeoParams center;
  center.lengthRatio = 1.25;
  ParamHalfWidths hw;
  hw.bend = 0.6;
  hw.lengthRatio = 0.7;
  hw.radiusRatio = 0.7;
  for (int s = 0; s < 25; ++s) {
    GeoParams p;
    // rejection-free: clamp draws into the admissible joint set
    p.bend = testing::urand(rngen, -0.6, 0.6);
    p.lengthRatio = testing::urand(rngen, 0.5, 2.0);
    p.radiusRatio = testing::urand(rngen, 0.5, 2.0);
    if (!params_admissible(BlockKind::T1, p)) {
      --s;
      continue;
    }
    const auto g = build_map(BlockKind::T1, p, meshT);
    for (int c = 0; c < meshT.numCells(); ++c) {
      const Eigen::Vector2d a = meshT.vertices.row(meshT.cells(c, 0)).head<2>();
      const Eigen::Vector2d b = meshT.vertices.row(meshT.cells(c, 1)).head<2>();
      const Eigen::Vector2d d = meshT.vertices.row(meshT.cells(c, 2)).head<2>();
      for (const auto& q : rule.points) {
        const Eigen::Vector2d xhat =
            a + q.x() * (b - a) + q.y() * (d - a);
        CHECK(g.assemblyJacobian(c, xhat).determinant() > 0);
      }
    }
  }

  const auto meshB = generate_reference_block(BlockKind::B, 1);
  for (int s = 0; s < 10; ++s) {
    GeoParams p;
    p.outletAngles[0] = testing::urand(rngen, -M_PI / 6, M_PI / 6);
    p.outletAngles[1] = testing::urand(rngen, -M_PI / 6, M_PI / 6);
    const auto g = build_map(BlockKind::B, p, meshB);
    for (int c = 0; c < meshB.numCells(); ++c)
      CHECK(g.assemblyJacobian(c, Eigen::Vector2d::Zero()).determinant() > 0);
  }
}

TEST_CASE("ports map to straight segments") {
  const auto mesh = generate_reference_block(BlockKind::T2, 2);
  const auto g = build_map(BlockKind::T2, tube_params(0.3, 1.4, 1.3), mesh);
  for (int port = 0; port < 2; ++port) {
    const auto& pp = g.ports()[port];
    const Eigen::Vector2d t = (pp.p1 - pp.p0).normalized();
    for (const auto& f :
         mesh.taggedFacets(reference_ports(BlockKind::T2)[port].tag)) {
      for (int v : f) {
        const Eigen::Vector2d x = g.map(mesh.vertices.row(v).head<2>());
        const Eigen::Vector2d rel = x - pp.p0;
        CHECK((rel - rel.dot(t) * t).norm() <= 1e-10);
      }
    }
  }
}

TEST_CASE("bifurcation map rotates outlet ports and reports Q") {
  const auto mesh = generate_reference_block(BlockKind::B, 1);
  GeoParams p;
  p.outletAngles[0] = 0.3;
  p.outletAngles[1] = -0.2;
  p.rotation = 0.1;
  const auto g = build_map(BlockKind::B, p, mesh);
  const auto ref = reference_ports(BlockKind::B);
  Eigen::Matrix2d Q, R0;
  Q << std::cos(0.1), -std::sin(0.1), std::sin(0.1), std::cos(0.1);
  R0 << std::cos(0.3), -std::sin(0.3), std::sin(0.3), std::cos(0.3);
  CHECK((g.ports()[1].outwardNormal - Q * R0 * ref[1].outwardNormal).norm() <=
        1e-13);
  CHECK(g.ports()[1].width == doctest::Approx(0.7).epsilon(1e-12));
  CHECK((g.jacobian({0.5, 0.0}) - Q).norm() <= 1e-14);
}

TEST_CASE("parameter sampling") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  GeoParams center = tube_params(0.05, 1.2, 1.1);
  ParamHalfWidths zero;
  auto g1 = testing::rng(42);
  const GeoParams exact = sample_params(BlockKind::T1, center, zero, g1);
  CHECK(exact.bend == center.bend);
  CHECK(exact.lengthRatio == center.lengthRatio);
  CHECK(exact.radiusRatio == center.radiusRatio);

  ParamHalfWidths hw;
  hw.bend = 0.02;
  hw.lengthRatio = 0.1;
  hw.radiusRatio = 0.1;
  auto ga = testing::rng(7);
  auto gb = testing::rng(7);
  const GeoParams a = sample_params(BlockKind::T1, center, hw, ga);
  const GeoParams b = sample_params(BlockKind::T1, center, hw, gb);
  CHECK(a.bend == b.bend);
  CHECK(a.lengthRatio == b.lengthRatio);
  CHECK(a.radiusRatio == b.radiusRatio);

  // empirical mean of 1e4 draws within 3 sigma
  auto gm = testing::rng(123);
  double sum = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i)
    sum += sample_params(BlockKind::T1, center, hw, gm).lengthRatio;
  const double mean = sum / n;
  const double sigma = (2 * hw.lengthRatio) / std::sqrt(12.0) / std::sqrt(n);
  CHECK(std::abs(mean - center.lengthRatio) <= 3 * sigma);

  // interval escaping the bounds
  ParamHalfWidths big;
  big.radiusRatio = 1.5;
  auto ge = testing::rng(1);
  CHECK_THROWS_AS(sample_params(BlockKind::T1, center, big, ge), Error);
}

TEST_CASE("errors: bad parameters and out-of-domain points") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  CHECK_THROWS_AS(build_map(BlockKind::T1, tube_params(1.0, 1, 1), mesh),
                  Error);
  CHECK_THROWS_AS(build_map(BlockKind::T1, tube_params(0, 0.3, 1), mesh),
                  Error);
  // joint curvature bound: individually legal corner that folds the tube
  CHECK_FALSE(params_admissible(BlockKind::T1, tube_params(M_PI / 4, 0.5, 2)));
  const auto g = build_map(BlockKind::T1, GeoParams{}, mesh);
  CHECK_THROWS_AS(g.jacobian({2.0, 0.0}), Error);
  CHECK_THROWS_AS(g.jacobian({0.5, 0.7}), Error);
}

}  // TEST_SUITE
