#pragma once

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "vpd/geometry.hpp"
#include "vpd/kernel.hpp"
#include "vpd/solver.hpp"

namespace vpd {

/// Energy terms evaluated from a vorticity field alone (the solver's running values are not used).
EnergyParts energy_breakdown(const ScalarField& zeta, const SolverConfig& config,
                             double rho = std::numeric_limits<double>::infinity(),
                             GreenStrategy strategy = GreenStrategy::fft);

/// E = (1/2) int zeta G zeta - W int x1 zeta - eps^-2 int J_rho(eps^2 zeta); -inf when inadmissible.
double energy(const ScalarField& zeta, const SolverConfig& config,
              double rho = std::numeric_limits<double>::infinity());

struct CoreEnergy {
  double I = 0.0;  // int zeta psi
  double J = 0.0;  // eps^-2 int J_rho(eps^2 zeta)
};

CoreEnergy core_energy(const SolutionBundle& bundle, const SolverConfig& config);

/// (kappa^2 / 4 pi) log(1 / 2t) + kappa W t.
double kirchhoff_routh(double t, double kappa, double W);

/// Golden-section minimiser of kirchhoff_routh over t > 0.
double argmin_kirchhoff_routh(double kappa, double W);

struct PointVortexReference {
  double W = 0.0;
  Point b1{};  // (r, 0)
  Point b2{};  // (-r, 0)

  /// Positions of the two point vortices at time t; both move along -e2 at speed W.
  std::pair<Point, Point> at(double t) const { return {{b1.x1, b1.x2 - W * t}, {b2.x1, b2.x2 - W * t}}; }
};

PointVortexReference point_vortex_reference(double kappa, double r);

struct SweepRecord {
  double epsilon = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double energy_E = 0.0;
  double core_energy_I = 0.0;
  double penalty_J = 0.0;
  double diameter = 0.0;
  Point centroid{};
  double residual = 0.0;
  bool converged = false;
  std::string error;
};

SweepRecord make_record(double epsilon, const SolutionBundle& bundle);

struct SweepResult {
  std::vector<SweepRecord> records;
  std::vector<std::optional<SolutionBundle>> bundles;  // empty where the solve threw
};

/// Worker count: VPD_THREADS when set, else the hardware concurrency.
unsigned sweep_threads();

/// One solve per epsilon (strictly decreasing), run in parallel on `threads` workers
/// (0 = sweep_threads()). A failing solve yields an unconverged record with `error` set.
SweepResult sweep(const SolverConfig& base, const std::vector<double>& epsilons, unsigned threads = 0);

enum class Observable { mu, energy_E };

std::string observable_name(Observable o);
/// Coefficient of log(1/eps) in the asymptotic law: kappa / 2pi for mu, kappa^2 / 4pi for E.
double expected_slope(Observable o, double kappa);

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  int n_points = 0;
};

/// Ordinary least squares y = slope x + intercept. Throws on fewer than three points or
/// coincident abscissae.
FitResult fit_linear(const std::vector<double>& x, const std::vector<double>& y);

/// Fit of the observable against log(1/eps) over the converged records.
FitResult fit_loglinear(const std::vector<SweepRecord>& records, Observable observable);

/// Core support recentred at its centroid with lengths divided by eps.
struct RescaledCore {
  std::vector<Point> centers;  // scaled offsets of the support cells
  std::vector<double> values;  // eps^2 zeta on those cells
  double h1 = 0.0;             // scaled cell sides
  double h2 = 0.0;
  Point centroid{};            // unscaled centroid of the support
  /// sqrt of the eigenvalue ratio of the support's second-moment tensor (cells as
  /// uniform rectangles).
  double aspect_ratio = 1.0;
  /// 4 pi area / perimeter^2 of the cell union.
  double isoperimetric_ratio = 0.0;
  /// Radius of the disk with the support's area, scaled.
  double equivalent_radius = 0.0;
};

RescaledCore core_rescale(const SolutionBundle& bundle, const SolverConfig& config);
RescaledCore core_rescale(const ScalarField& zeta, double epsilon);

}  // namespace vpd
