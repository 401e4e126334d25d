#include <doctest.h>

#include "helpers.hpp"
#include "rbe/coupling.hpp"
#include "rbe/errors.hpp"
#include "rbe/quadrature.hpp"

using namespace rbe;

namespace {

// Gram matrix of the scalar disk family up to degree nmax by polar quadrature
DenseMatrix disk_gram(int nmax) {
  std::vector<std::pair<int, int>> idx;
  for (int n = 0; n <= nmax; ++n)
    for (int k = 0; k <= n; ++k) idx.emplace_back(n, k);
  const int m = static_cast<int>(idx.size());
  DenseMatrix G = DenseMatrix::Zero(m, m);
  const auto& gr = gauss_legendre(24);
  const int nAng = 64;
  for (int ia = 0; ia < nAng; ++ia) {
    const double th = 2.0 * M_PI * ia / nAng;
    const double wth = 2.0 * M_PI / nAng;
    for (size_t iq = 0; iq < gr.points.size(); ++iq) {
      const double r = 0.5 * (gr.points[iq] + 1.0);
      const double wr = 0.5 * gr.weights[iq] * r;  // polar Jacobian
      const double x = r * std::cos(th), y = r * std::sin(th);
      Eigen::VectorXd vals(m);
      for (int i = 0; i < m; ++i)
        vals(i) = disk_basis_eval(idx[i].first, idx[i].second, x, y);
      G += (wth * wr) * vals * vals.transpose();
    }
  }
  return G;
}

}  // namespace

TEST_SUITE("coupling") {

TEST_CASE("disk basis point values") {
  CHECK(disk_basis_eval(0, 0, 0.3, -0.2) ==
        doctest::Approx(1.0 / std::sqrt(M_PI)).epsilon(1e-14));
  // U_2(t) = 4t^2 - 1 along the k=0 ray
  const double x = 0.41, y = -0.33;
  CHECK(disk_basis_eval(2, 0, x, y) ==
        doctest::Approx((4 * x * x - 1) / std::sqrt(M_PI)).epsilon(1e-13));
  CHECK_THROWS_AS(disk_basis_eval(2, 3, 0, 0), Error);
  CHECK_THROWS_AS(disk_basis_eval(1, 0, 1.2, 0.2), Error);
}

TEST_CASE("disk family is orthonormal under quadrature") {
  const DenseMatrix G = disk_gram(4);
  CHECK((G - DenseMatrix::Identity(G.rows(), G.cols()))
            .cwiseAbs()
            .maxCoeff() <= 1e-8);
}

TEST_CASE("segment basis recurrence and orthogonality") {
  auto g = testing::rng(2);
  for (int i = 0; i < 20; ++i) {
    const double s = testing::urand(g, -1, 1);
    CHECK(segment_basis_eval(3, s) ==
          doctest::Approx(2 * s * segment_basis_eval(2, s) -
                          segment_basis_eval(1, s))
              .epsilon(1e-13));
  }
  CHECK(segment_basis_eval(0, 0.37) == 1.0);
  CHECK_THROWS_AS(segment_basis_eval(1, 1.5), Error);

  // weight (2/pi) sqrt(1-s^2); substitute s = cos(phi)
  const auto& gr = gauss_legendre(64);
  for (int n = 0; n <= 5; ++n)
    for (int m = 0; m <= 5; ++m) {
      double acc = 0;
      for (size_t q = 0; q < gr.points.size(); ++q) {
        const double phi = 0.5 * (gr.points[q] + 1.0) * M_PI;
        const double w = 0.5 * M_PI * gr.weights[q];
        const double s = std::cos(phi);
        acc += w * (2.0 / M_PI) * segment_basis_eval(n, s) *
               segment_basis_eval(m, s) * std::sin(phi) * std::sin(phi);
      }
      CHECK(acc == doctest::Approx(n == m ? 1.0 : 0.0).epsilon(1e-10));
    }
}

TEST_CASE("multiplier basis counts") {
  CHECK(build_multiplier_basis(5, 3).count() == 63);
  CHECK(build_multiplier_basis(0, 2).count() == 2);
  CHECK(build_multiplier_basis(5, 2).count() == 12);
  const auto b = build_multiplier_basis(2, 2);
  // component-major layout
  CHECK(b.eval(0, 0.5).y() == 0.0);
  CHECK(b.eval(3, 0.5).x() == 0.0);
  CHECK(b.eval(4, 0.3).y() == doctest::Approx(2 * 0.3));
}

TEST_CASE("coupling rows against analytic facet integrals") {
  const auto mesh = generate_reference_block(BlockKind::T1, 2);
  const TaylorHoodSpace space(mesh);
  const auto geom = build_map(BlockKind::T1, GeoParams{}, mesh);
  const auto basis = build_multiplier_basis(2, 2);

  InterfaceDescriptor ifc;
  ifc.type = InterfaceType::Interior;
  const auto& pp = geom.ports()[1];
  ifc.p0 = pp.p0;
  ifc.p1 = pp.p1;
  ifc.normalOwner = pp.outwardNormal;
  ifc.sides.push_back({0, {FacetKind::Outlet, 0}, 1.0});
  const DenseMatrix B = assemble_coupling(space, geom, ifc, basis, 0);
  CHECK(B.rows() == basis.count());
  CHECK(B.cols() == space.numVelocityDofs());

  // constant multiplier x constant unit velocity component = port length
  const Eigen::VectorXd onesX = interpolate_velocity(
      space, nullptr,
      [](const Eigen::Vector2d&) { return Eigen::Vector2d(1.0, 0.0); });
  CHECK((B * onesX)(0) == doctest::Approx(1.0).epsilon(1e-12));  // U_0 = 1
  CHECK((B * onesX)(3) == doctest::Approx(0.0).epsilon(1e-12));  // y rows

  // locality: nothing from basis functions away from the port
  for (int q = 0; q < space.numVelocityDofs(); ++q) {
    const int node = q / 2;
    if (space.velocityNodes()(node, 0) < 1.0 - 1e-9)
      CHECK(B.col(q).cwiseAbs().maxCoeff() == 0.0);
  }

  // opposite side carries the opposite sign on conforming traces
  ifc.sides.push_back({0, {FacetKind::Outlet, 0}, -1.0});
  const DenseMatrix Bm = assemble_coupling(space, geom, ifc, basis, 1);
  CHECK((B + Bm).cwiseAbs().maxCoeff() <= 1e-14);
}

TEST_CASE("inlet coupling rhs") {
  const auto mesh = generate_reference_block(BlockKind::T1, 1);
  const TaylorHoodSpace space(mesh);
  const auto geom = build_map(BlockKind::T1, GeoParams{}, mesh);
  const auto basis = build_multiplier_basis(2, 2);
  InterfaceDescriptor ifc;
  ifc.type = InterfaceType::Inlet;
  const auto& pp = geom.ports()[0];
  ifc.p0 = pp.p0;
  ifc.p1 = pp.p1;
  ifc.normalOwner = pp.outwardNormal;
  ifc.sides.push_back({0, {FacetKind::Inlet, 0}, 1.0});
  const auto inlet = assemble_inlet_coupling(space, geom, ifc, basis);

  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(space.numVelocityDofs());
  CHECK(inlet.rhs(zero).norm() == 0.0);
  auto g = testing::rng(4);
  Eigen::VectorXd gd(space.numVelocityDofs());
  for (int i = 0; i < gd.size(); ++i) gd(i) = testing::urand(g, -1, 1);
  CHECK((inlet.rhs(2 * gd) - 2 * inlet.rhs(gd)).norm() <= 1e-14);

  ifc.type = InterfaceType::Interior;
  CHECK_THROWS_AS(assemble_inlet_coupling(space, geom, ifc, basis), Error);
}

}  // TEST_SUITE
