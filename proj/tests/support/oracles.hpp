#pragma once

// Reference computations kept independent of the library's own algorithms.

#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <functional>
#include <random>

#include "vpd/vpd.hpp"

namespace oracle {

inline constexpr double kPi = 3.14159265358979323846;

/// (1/2pi) mean of log(1/|y|) over the h1 x h2 cell centred at the origin, by nested
/// tanh-sinh quadrature on one quadrant.
inline double self_cell(double h1, double h2) {
  boost::math::quadrature::tanh_sinh<double> q;
  const double a = 0.5 * h1, b = 0.5 * h2;
  auto inner = [&](double x) {
    return q.integrate([x](double y) { return -std::log(std::hypot(x, y)); }, 0.0, b, 1e-14);
  };
  const double quadrant = q.integrate(inner, 0.0, a, 1e-13);
  return 4.0 * quadrant / (2.0 * kPi * h1 * h2);
}

/// Half-plane Green's function written out from its definition.
inline double green(vpd::Point x, vpd::Point y) {
  const double d = std::hypot(x.x1 - y.x1, x.x2 - y.x2);
  const double m = std::hypot(-x.x1 - y.x1, x.x2 - y.x2);
  return std::log(m / d) / (2.0 * kPi);
}

/// Brute-force O(N^2) discrete G zeta with the same discretisation rule (midpoint off
/// the diagonal, cell mean on it, midpoint image everywhere).
inline vpd::ScalarField direct_apply(const vpd::ScalarField& zeta) {
  const vpd::GridSpec& g = zeta.grid();
  const double area = g.cell_area();
  const double self = self_cell(g.h1(), g.h2());
  vpd::ScalarField out(g);
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      const vpd::Point x = g.center(i, j);
      double s = 0.0;
      for (int ip = 0; ip < g.n1(); ++ip) {
        for (int jp = 0; jp < g.n2(); ++jp) {
          const double v = zeta(ip, jp);
          if (v == 0.0) continue;
          const vpd::Point y = g.center(ip, jp);
          double k;
          if (ip == i && jp == j) {
            k = self - std::log(1.0 / (2.0 * x.x1)) / (2.0 * kPi);
          } else {
            k = green(x, y);
          }
          s += v * area * k;
        }
      }
      out(i, j) = s;
    }
  }
  return out;
}

/// sup_t (a t - F(t)) over a uniform grid of [0, t_max].
inline double legendre(const std::function<double(double)>& F, double a, double t_max, int n) {
  double best = 0.0;  // t = 0
  for (int k = 1; k <= n; ++k) {
    const double t = t_max * k / n;
    best = std::max(best, a * t - F(t));
  }
  return best;
}

inline vpd::ScalarField random_field(const vpd::GridSpec& g, std::mt19937_64& rng, double lo = -1.0,
                                     double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  vpd::ScalarField f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = u(rng);
  return f;
}

/// Observed convergence order from errors on grids refined by `ratio`.
inline double observed_order(double e_coarse, double e_fine, double ratio) {
  return std::log(e_coarse / e_fine) / std::log(ratio);
}

}  // namespace oracle
