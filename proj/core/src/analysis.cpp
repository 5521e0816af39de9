#include "vpd/analysis.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <thread>

namespace vpd {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

EnergyParts energy_breakdown(const ScalarField& zeta, const SolverConfig& config, double rho,
                             GreenStrategy strategy) {
  const GreenOperator op(zeta.grid(), strategy);
  const TruncatedProfile prof(config.profile, rho);
  const double eps2 = config.epsilon * config.epsilon;
  const double sup = prof.sup_f();

  EnergyParts e;
  e.quadratic = 0.5 * inner_product(zeta, op.apply(zeta));
  e.linear = config.W * moment_x1(zeta);
  double pen = 0.0;
  bool admissible = true;
  for (double z : zeta.values()) {
    if (z == 0.0) continue;
    if (z < 0.0 || z > sup / eps2) {
      admissible = false;
      break;
    }
    pen += prof.J(std::min(eps2 * z, sup));
  }
  e.penalty = admissible ? zeta.grid().cell_area() * pen / eps2 : kInf;
  e.total = std::isfinite(e.penalty) ? e.quadratic - e.linear - e.penalty : -kInf;
  return e;
}

double energy(const ScalarField& zeta, const SolverConfig& config, double rho) {
  return energy_breakdown(zeta, config, rho).total;
}

CoreEnergy core_energy(const SolutionBundle& bundle, const SolverConfig& config) {
  const ScalarField& zeta = bundle.state.zeta;
  const TruncatedProfile prof(config.profile, bundle.rho_final);
  const double eps2 = config.epsilon * config.epsilon;
  CoreEnergy c;
  c.I = inner_product(zeta, bundle.psi);
  double pen = 0.0;
  for (double z : zeta.values()) {
    if (z > 0.0) pen += prof.J(std::min(eps2 * z, prof.sup_f()));
  }
  c.J = zeta.grid().cell_area() * pen / eps2;
  return c;
}

double kirchhoff_routh(double t, double kappa, double W) {
  if (!(t > 0.0)) throw std::invalid_argument("kirchhoff_routh: t must be positive");
  return kappa * kappa / (4.0 * kPi) * std::log(1.0 / (2.0 * t)) + kappa * W * t;
}

double argmin_kirchhoff_routh(double kappa, double W) {
  if (!(kappa > 0.0) || !(W > 0.0)) throw std::invalid_argument("argmin_kirchhoff_routh: kappa, W > 0");
  // Golden section in u = log t, where the functional is convex. Points are compared
  // through the difference g(c) - g(d), evaluated without cancellation.
  const double a0 = kappa * kappa / (4.0 * kPi), a1 = kappa * W;
  auto lower = [&](double c, double d) {  // g(c) < g(d)
    return -a0 * (c - d) + a1 * std::exp(d) * std::expm1(c - d) < 0.0;
  };
  double a = -1.0, b = 1.0;
  while (lower(a, a + 1e-3)) a -= 2.0 * (b - a);
  while (lower(b, b - 1e-3)) b += 2.0 * (b - a);
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - phi * (b - a), d = a + phi * (b - a);
  for (int it = 0; it < 400 && b - a > 1e-14 * std::max(1.0, std::abs(a)); ++it) {
    if (lower(c, d)) {
      b = d;
      d = c;
      c = b - phi * (b - a);
    } else {
      a = c;
      c = d;
      d = a + phi * (b - a);
    }
  }
  return std::exp(0.5 * (a + b));
}

PointVortexReference point_vortex_reference(double kappa, double r) {
  if (!(kappa > 0.0) || !(r > 0.0)) throw std::invalid_argument("point_vortex_reference: kappa, r > 0");
  return {kappa / (4.0 * kPi * r), {r, 0.0}, {-r, 0.0}};
}

SweepRecord make_record(double epsilon, const SolutionBundle& b) {
  SweepRecord rec;
  rec.epsilon = epsilon;
  rec.lambda = 1.0 / (epsilon * epsilon);
  rec.mu = b.mu;
  rec.energy_E = b.energy_E;
  rec.core_energy_I = b.core_energy_I;
  rec.penalty_J = b.penalty_J;
  rec.diameter = b.support.diameter;
  rec.centroid = b.support.centroid;
  rec.residual = b.residual_L1;
  rec.converged = b.converged;
  return rec;
}

unsigned sweep_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("VPD_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) n = static_cast<unsigned>(v);
  }
  return n;
}

SweepResult sweep(const SolverConfig& base, const std::vector<double>& epsilons, unsigned threads) {
  if (epsilons.empty()) throw std::invalid_argument("sweep: no epsilon values");
  for (std::size_t k = 1; k < epsilons.size(); ++k) {
    if (!(epsilons[k] < epsilons[k - 1])) throw std::invalid_argument("sweep: epsilons must decrease");
  }
  const std::size_t n = epsilons.size();
  std::vector<SweepRecord> records(n);
  std::vector<std::optional<SolutionBundle>> bundles(n);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t k = next++; k < n; k = next++) {
      SolverConfig c = base;
      c.epsilon = epsilons[k];
      try {
        bundles[k] = solve(c);
        records[k] = make_record(c.epsilon, *bundles[k]);
      } catch (const std::exception& ex) {
        records[k].epsilon = c.epsilon;
        records[k].lambda = 1.0 / (c.epsilon * c.epsilon);
        records[k].error = ex.what();
      }
    }
  };
  const unsigned workers = std::min<unsigned>(threads ? threads : sweep_threads(), static_cast<unsigned>(n));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < workers; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  return SweepResult{std::move(records), std::move(bundles)};
}

std::string observable_name(Observable o) { return o == Observable::mu ? "mu" : "energy_E"; }

double expected_slope(Observable o, double kappa) {
  return o == Observable::mu ? kappa / (2.0 * kPi) : kappa * kappa / (4.0 * kPi);
}

FitResult fit_linear(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw std::invalid_argument("fit_linear: size mismatch");
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("fit_linear: at least three points are required");
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (y[k] - my);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (!(sxx > 1e-300)) throw std::invalid_argument("fit_linear: degenerate abscissae");
  FitResult f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.n_points = static_cast<int>(n);
  double ssr = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double r = y[k] - (f.slope * x[k] + f.intercept);
    ssr += r * r;
  }
  f.r_squared = syy > 0.0 ? std::clamp(1.0 - ssr / syy, 0.0, 1.0) : 1.0;
  return f;
}

FitResult fit_loglinear(const std::vector<SweepRecord>& records, Observable observable) {
  std::vector<double> x, y;
  for (const auto& r : records) {
    if (!r.converged) continue;
    x.push_back(std::log(1.0 / r.epsilon));
    y.push_back(observable == Observable::mu ? r.mu : r.energy_E);
  }
  if (x.size() < 3) throw std::invalid_argument("fit_loglinear: fewer than three converged records");
  return fit_linear(x, y);
}

RescaledCore core_rescale(const ScalarField& zeta, double epsilon) {
  const GridSpec& g = zeta.grid();
  RescaledCore out;
  double n = 0.0, s1 = 0.0, s2 = 0.0;
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      if (zeta(i, j) > 0.0) {
        n += 1.0;
        s1 += g.x1(i);
        s2 += g.x2(j);
      }
    }
  }
  if (n == 0.0) throw std::invalid_argument("core_rescale: empty support");
  const Point c{s1 / n, s2 / n};
  out.centroid = c;
  out.h1 = g.h1() / epsilon;
  out.h2 = g.h2() / epsilon;
  const double eps2 = epsilon * epsilon;
  double m11 = 0.0, m22 = 0.0, m12 = 0.0;
  double faces = 0.0;
  auto positive = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.n1() && j < g.n2() && zeta(i, j) > 0.0;
  };
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      if (!(zeta(i, j) > 0.0)) continue;
      const Point p{(g.x1(i) - c.x1) / epsilon, (g.x2(j) - c.x2) / epsilon};
      out.centers.push_back(p);
      out.values.push_back(eps2 * zeta(i, j));
      m11 += p.x1 * p.x1 + out.h1 * out.h1 / 12.0;
      m22 += p.x2 * p.x2 + out.h2 * out.h2 / 12.0;
      m12 += p.x1 * p.x2;
      if (!positive(i - 1, j)) faces += out.h2;
      if (!positive(i + 1, j)) faces += out.h2;
      if (!positive(i, j - 1)) faces += out.h1;
      if (!positive(i, j + 1)) faces += out.h1;
    }
  }
  const double tr = m11 + m22;
  const double disc = std::sqrt(std::max(0.0, 0.25 * (m11 - m22) * (m11 - m22) + m12 * m12));
  const double lmax = 0.5 * tr + disc, lmin = 0.5 * tr - disc;
  out.aspect_ratio = lmin > 0.0 ? std::sqrt(lmax / lmin) : kInf;
  const double area = n * out.h1 * out.h2;
  out.isoperimetric_ratio = 4.0 * kPi * area / (faces * faces);
  out.equivalent_radius = std::sqrt(area / kPi);
  return out;
}

RescaledCore core_rescale(const SolutionBundle& bundle, const SolverConfig& config) {
  return core_rescale(bundle.state.zeta, config.epsilon);
}

}  // namespace vpd
