#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <random>

#include "oracles.hpp"
#include "vpd/analysis.hpp"

using namespace vpd;

TEST(Energy, ZeroField) {
  const SolverConfig c = make_config(0.05, 1.0, 1.0, Profile::heaviside(), 32, 32);
  const EnergyParts e = energy_breakdown(ScalarField(c.grid, FieldRole::vorticity), c);
  EXPECT_EQ(e.total, 0.0);
  EXPECT_EQ(e.quadratic, 0.0);
  EXPECT_EQ(e.linear, 0.0);
  EXPECT_EQ(e.penalty, 0.0);
}

TEST(Energy, OutsideConjugateDomainIsMinusInfinity) {
  const SolverConfig c = make_config(0.05, 1.0, 1.0, Profile::heaviside(), 32, 32);
  ScalarField z(c.grid, FieldRole::vorticity);
  z(10, 10) = 2.0 / (c.epsilon * c.epsilon);
  EXPECT_EQ(energy(z, c), -std::numeric_limits<double>::infinity());
  z(10, 10) = 1.0 / (c.epsilon * c.epsilon);
  EXPECT_TRUE(std::isfinite(energy(z, c)));
}

TEST(Energy, TermsMatchDirectSums) {
  std::mt19937_64 rng(40);
  SolverConfig c = make_config(0.1, 1.0, 1.0, Profile::power(2), 24, 20);
  const ScalarField z = oracle::random_field(c.grid, rng, 0.0, 50.0);
  const EnergyParts e = energy_breakdown(z, c, 3.0);
  const ScalarField gz = oracle::direct_apply(z);
  double quad = 0.0, lin = 0.0, pen = 0.0;
  for (int i = 0; i < c.grid.n1(); ++i) {
    for (int j = 0; j < c.grid.n2(); ++j) {
      quad += 0.5 * z(i, j) * gz(i, j) * c.grid.cell_area();
      lin += c.W * c.grid.x1(i) * z(i, j) * c.grid.cell_area();
      const double a = 0.01 * z(i, j);
      pen += (2.0 / 3.0) * std::pow(a, 1.5) * c.grid.cell_area() / 0.01;
    }
  }
  EXPECT_NEAR(e.quadratic, quad, 1e-10 * quad);
  EXPECT_NEAR(e.linear, lin, 1e-12 * lin);
  EXPECT_NEAR(e.penalty, pen, 1e-12 * pen);
  EXPECT_NEAR(e.total, quad - lin - pen, 1e-10 * quad);
}

TEST(Energy, MatchesSolverRunningEnergy) {
  for (const Profile& p : {Profile::heaviside(), Profile::power(1)}) {
    SolverConfig c = make_config(0.05, 1.0, 1.0, p, 128, 128);
    double rho = std::numeric_limits<double>::infinity();
    if (!p.bounded()) {
      rho = 1.0;
      c.rho_policy = RhoPolicy::fixed(rho);
    }
    const Solver s(c);
    IterationState st = s.initialize();
    for (int k = 0; k < 6; ++k) {
      EXPECT_NEAR(energy(st.zeta, c, rho), st.energy, 1e-12 * std::abs(st.energy));
      st = s.relaxation_step(st);
    }
  }
}

TEST(Energy, ConvergedIdentities) {
  const SolverConfig c = make_config(0.05, 1.0, 1.0, Profile::power(1), 128, 128);
  const SolutionBundle b = solve(c);
  ASSERT_TRUE(b.converged);
  const CoreEnergy ce = core_energy(b, c);
  EXPECT_NEAR(ce.I, b.core_energy_I, 1e-14);
  EXPECT_NEAR(ce.J, b.penalty_J, 1e-12 * b.penalty_J);
  const double lin = c.W * moment_x1(b.state.zeta);
  const double lhs = 2.0 * b.energy_E;
  const double rhs = ce.I - lin - 2.0 * ce.J + b.mu * c.kappa;
  EXPECT_NEAR(lhs, rhs, 1e-8 * std::abs(lhs));
  EXPECT_LE(ce.J, ce.I + 1e-10);
}

TEST(Energy, HeavisidePenaltyIsExactlyZero) {
  const SolverConfig c = make_config(0.05, 1.0, 1.0, Profile::heaviside(), 128, 128);
  const SolutionBundle b = solve(c);
  EXPECT_EQ(core_energy(b, c).J, 0.0);
  EXPECT_EQ(b.penalty_J, 0.0);
}

TEST(KirchhoffRouth, Examples) {
  const double pi = oracle::kPi;
  EXPECT_NEAR(argmin_kirchhoff_routh(4.0 * pi, 1.0), 1.0, 1e-8);
  EXPECT_NEAR(argmin_kirchhoff_routh(1.0, 1.0 / (4.0 * pi)), 1.0, 1e-8);
  EXPECT_NEAR(argmin_kirchhoff_routh(2.0, 1.0 / (4.0 * pi)), 2.0, 1e-8);
  EXPECT_THROW(kirchhoff_routh(0.0, 1.0, 1.0), std::invalid_argument);
  EXPECT_THROW(kirchhoff_routh(-1.0, 1.0, 1.0), std::invalid_argument);
  // Derivative vanishes at t = r when W = kappa / (4 pi r).
  const double r = 1.7, kappa = 2.3, W = kappa / (4.0 * pi * r), h = 1e-5;
  const double d = (kirchhoff_routh(r + h, kappa, W) - kirchhoff_routh(r - h, kappa, W)) / (2.0 * h);
  EXPECT_NEAR(d, 0.0, 1e-8);
  EXPECT_GT(kirchhoff_routh(1e-12, 1.0, 1.0), kirchhoff_routh(1.0, 1.0, 1.0) + 1.0);
  EXPECT_GT(kirchhoff_routh(1e6, 1.0, 1.0), 1e5);
}

TEST(KirchhoffRouth, RandomPairsMatchClosedForm) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> lk(-3.0, 3.0), lw(-4.0, 2.0);
  for (int t = 0; t < 200; ++t) {
    const double kappa = std::exp(lk(rng)), W = std::exp(lw(rng));
    const double exact = kappa / (4.0 * oracle::kPi * W);
    EXPECT_NEAR(argmin_kirchhoff_routh(kappa, W), exact, 1e-8 * exact);
  }
}

TEST(PointVortex, Reference) {
  const PointVortexReference a = point_vortex_reference(4.0 * oracle::kPi, 1.0);
  EXPECT_NEAR(a.W, 1.0, 1e-15);
  const PointVortexReference b = point_vortex_reference(1.0, 1.0);
  EXPECT_NEAR(b.W, 1.0 / (4.0 * oracle::kPi), 1e-17);
  for (double t : {0.0, 0.5, 3.0}) {
    const auto [p1, p2] = b.at(t);
    EXPECT_EQ(p1.x1, 1.0);
    EXPECT_EQ(p2.x1, -1.0);
    EXPECT_DOUBLE_EQ(p1.x2, -b.W * t);
    EXPECT_DOUBLE_EQ(p2.x2, -b.W * t);
  }
  EXPECT_THROW(point_vortex_reference(0.0, 1.0), std::invalid_argument);
}

TEST(Fit, SyntheticAffineData) {
  const double kappa = 1.0, slope = kappa / (2.0 * oracle::kPi);
  std::vector<SweepRecord> recs;
  for (double eps : {0.1, 0.07, 0.05, 0.035, 0.025}) {
    SweepRecord r;
    r.epsilon = eps;
    r.mu = slope * std::log(1.0 / eps) + 0.3;
    r.energy_E = 0.7;
    r.converged = true;
    recs.push_back(r);
  }
  const FitResult f = fit_loglinear(recs, Observable::mu);
  EXPECT_NEAR(f.slope, slope, 1e-12);
  EXPECT_NEAR(f.intercept, 0.3, 1e-12);
  EXPECT_NEAR(f.r_squared, 1.0, 1e-12);
  EXPECT_EQ(f.n_points, 5);
  const FitResult g = fit_loglinear(recs, Observable::energy_E);
  EXPECT_NEAR(g.slope, 0.0, 1e-12);
  EXPECT_NEAR(g.intercept, 0.7, 1e-12);

  recs[1].converged = false;
  EXPECT_EQ(fit_loglinear(recs, Observable::mu).n_points, 4);
  recs[2].converged = recs[3].converged = false;
  EXPECT_THROW(fit_loglinear(recs, Observable::mu), std::invalid_argument);
}

TEST(Fit, RandomAffineLaws) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (int t = 0; t < 100; ++t) {
    const double a = u(rng), b = u(rng);
    std::vector<double> x, y;
    for (int k = 0; k < 6; ++k) {
      x.push_back(u(rng));
      y.push_back(a * x.back() + b);
    }
    const FitResult f = fit_linear(x, y);
    EXPECT_NEAR(f.slope, a, 1e-12 * std::max(1.0, std::abs(a)));
    EXPECT_NEAR(f.intercept, b, 1e-12 * std::max(1.0, std::abs(b)) * 10.0);
  }
}

TEST(Fit, Errors) {
  EXPECT_THROW(fit_linear({1.0, 2.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_THROW(fit_linear({1.0, 1.0, 1.0}, {1.0, 2.0, 3.0}), std::invalid_argument);
  EXPECT_THROW(fit_linear({1.0, 2.0, 3.0}, {1.0, 2.0}), std::invalid_argument);
  EXPECT_NEAR(expected_slope(Observable::mu, 2.0), 1.0 / oracle::kPi, 1e-15);
  EXPECT_NEAR(expected_slope(Observable::energy_E, 2.0), 1.0 / oracle::kPi, 1e-15);
  EXPECT_EQ(observable_name(Observable::mu), "mu");
  EXPECT_EQ(observable_name(Observable::energy_E), "energy_E");
}

TEST(CoreRescale, DiskHasUnitAspect) {
  const GridSpec g = build_grid(1.0, 256, 256);
  ScalarField z(g, FieldRole::vorticity);
  const double eps = 0.05, radius = 0.1;
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      if (distance(g.center(i, j), {1.0, 0.0}) < radius) z(i, j) = 1.0;
    }
  }
  const RescaledCore core = core_rescale(z, eps);
  EXPECT_NEAR(core.aspect_ratio, 1.0, std::max(g.h1(), g.h2()) / radius);
  EXPECT_NEAR(core.equivalent_radius, radius / eps, 2.0 * std::max(core.h1, core.h2));
  EXPECT_NEAR(core.centroid.x1, 1.0, g.h1());
  EXPECT_NEAR(core.centroid.x2, 0.0, 1e-14);
  EXPECT_GT(core.isoperimetric_ratio, 0.5);
  EXPECT_LE(core.isoperimetric_ratio, 1.0);
  for (double v : core.values) EXPECT_DOUBLE_EQ(v, eps * eps);
}

TEST(CoreRescale, ElongatedSupport) {
  const GridSpec g = build_grid(1.0, 64, 64);
  ScalarField z(g, FieldRole::vorticity);
  for (int i = 20; i < 40; ++i) {
    for (int j = 30; j < 34; ++j) z(i, j) = 1.0;
  }
  const RescaledCore core = core_rescale(z, 0.1);
  // 20 x 4 cells of 0.0234375 x 0.03125: side lengths 0.46875 and 0.125.
  EXPECT_NEAR(core.aspect_ratio, 0.46875 / 0.125, 1e-12);
  EXPECT_THROW(core_rescale(ScalarField(g, FieldRole::vorticity), 0.1), std::invalid_argument);
}

TEST(Sweep, SmallHeavisideSweep) {
  const SolverConfig base = make_config(0.1, 1.0, 1.0, Profile::heaviside(), 128, 128);
  const std::vector<double> eps{0.1, 0.07, 0.05};
  const SweepResult r = sweep(base, eps, 2);
  ASSERT_EQ(r.records.size(), 3u);
  for (std::size_t k = 0; k < 3; ++k) {
    const SweepRecord& rec = r.records[k];
    EXPECT_EQ(rec.epsilon, eps[k]);
    EXPECT_NEAR(rec.lambda * rec.epsilon * rec.epsilon, 1.0, 1e-14);
    EXPECT_TRUE(rec.converged);
    EXPECT_TRUE(rec.error.empty());
    ASSERT_TRUE(r.bundles[k].has_value());
    EXPECT_EQ(rec.mu, r.bundles[k]->mu);
  }
  EXPECT_LT(r.records[0].mu, r.records[2].mu);
  // Parallel and serial runs agree exactly.
  const SweepResult serial = sweep(base, eps, 1);
  for (std::size_t k = 0; k < 3; ++k) EXPECT_EQ(serial.records[k].energy_E, r.records[k].energy_E);
}

TEST(Sweep, FailedSolveBecomesErrorRecord) {
  const SolverConfig base = make_config(0.1, 1.0, 1.0, Profile::heaviside(), 64, 64);
  const SweepResult r = sweep(base, {0.7, 0.1, 0.07}, 2);
  EXPECT_FALSE(r.records[0].converged);
  EXPECT_FALSE(r.records[0].error.empty());
  EXPECT_FALSE(r.bundles[0].has_value());
  EXPECT_TRUE(r.records[1].converged);
}

TEST(Sweep, RejectsNonDecreasingEpsilons) {
  const SolverConfig base = make_config(0.1, 1.0, 1.0, Profile::heaviside(), 32, 32);
  EXPECT_THROW(sweep(base, {0.05, 0.07, 0.1}), std::invalid_argument);
  EXPECT_THROW(sweep(base, {0.1, 0.1, 0.05}), std::invalid_argument);
  EXPECT_THROW(sweep(base, {}), std::invalid_argument);
}

TEST(Sweep, ThreadCountFromEnvironment) {
  ::setenv("VPD_THREADS", "3", 1);
  EXPECT_EQ(sweep_threads(), 3u);
  ::setenv("VPD_THREADS", "junk", 1);
  EXPECT_GE(sweep_threads(), 1u);
  ::unsetenv("VPD_THREADS");
  EXPECT_GE(sweep_threads(), 1u);
}
