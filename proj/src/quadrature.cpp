#include "rbe/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include "rbe/errors.hpp"

namespace rbe {

namespace {

TriangleRule make_triangle_rule(int degree) {
  TriangleRule r;
  auto addSym = [&](double a, double b, double w) {
    // permutations of barycentric (a, b, b)
    r.points.emplace_back(b, b);
    r.points.emplace_back(a, b);
    r.points.emplace_back(b, a);
    for (int i = 0; i < 3; ++i) r.weights.push_back(w * 0.5);
  };
  switch (degree) {
    case 1:
    case 2:
      addSym(0.0, 0.5, 1.0 / 3.0);
      break;
    case 3:
    case 4:
      addSym(0.108103018168070, 0.445948490915965, 0.223381589678011);
      addSym(0.816847572980459, 0.091576213509771, 0.109951743655322);
      break;
    case 5:
      r.points.emplace_back(1.0 / 3.0, 1.0 / 3.0);
      r.weights.push_back(0.225 * 0.5);
      addSym(0.059715871789770, 0.470142064105115, 0.132394152788506);
      addSym(0.797426985353087, 0.101286507323456, 0.125939180544827);
      break;
    default:
      throw Error("triangle_rule: unsupported degree");
  }
  return r;
}

GaussRule make_gauss_legendre(int n) {
  if (n < 1) throw Error("gauss_legendre: n must be >= 1");
  GaussRule r;
  r.points.resize(n);
  r.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton from the Chebyshev estimate
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    r.points[n - 1 - i] = x;
    r.weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return r;
}

}  // namespace

const TriangleRule& triangle_rule(int degree) {
  static std::map<int, TriangleRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(degree);
  if (it == cache.end()) it = cache.emplace(degree, make_triangle_rule(degree)).first;
  return it->second;
}

const GaussRule& gauss_legendre(int n) {
  static std::map<int, GaussRule> cache;
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, make_gauss_legendre(n)).first;
  return it->second;
}

}  // namespace rbe
