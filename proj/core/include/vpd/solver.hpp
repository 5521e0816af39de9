#pragma once

#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "vpd/geometry.hpp"
#include "vpd/kernel.hpp"
#include "vpd/profiles.hpp"

namespace vpd {

/// Rejected run configuration (bad parameters, or a violated admissibility constraint).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Numerical failure during a solve (bracket failure, runaway truncation level).
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RhoPolicy {
  enum class Kind { none, fixed, adaptive };
  Kind kind = Kind::none;
  double rho = std::numeric_limits<double>::infinity();
  double rho_init = 1.0;
  double growth = 2.0;
  double cap = 1048576.0;  // 2^20

  static RhoPolicy none() { return {}; }
  static RhoPolicy fixed(double rho) { return {Kind::fixed, rho}; }
  static RhoPolicy adaptive(double rho_init = 1.0, double growth = 2.0, double cap = 1048576.0) {
    return {Kind::adaptive, std::numeric_limits<double>::infinity(), rho_init, growth, cap};
  }
};

struct SolverConfig {
  double epsilon = 0.05;  // lambda = 1 / epsilon^2
  double kappa = 1.0;
  double r = 1.0;
  double W = 1.0 / (4.0 * 3.14159265358979323846);  // kappa / (4 pi r)
  Profile profile = Profile::heaviside();
  RhoPolicy rho_policy{};
  int max_iter = 500;
  double tol_mass = 1e-12;
  double tol_fixed_point = 1e-9;
  bool symmetrize = true;
  /// Energy-safeguarded extrapolation along the slowly converging direction.
  bool accelerate = true;
  GridSpec grid = build_grid(1.0, 256, 256);
  /// Admissible region D; cells whose centres lie in D may carry vorticity.
  Rect domain = default_domain(1.0);

  double lambda() const { return 1.0 / (epsilon * epsilon); }
};

/// Configuration on the default window D = (r/2, 2r) x (-1, 1) with W = kappa / (4 pi r).
/// Unbounded profiles get the adaptive truncation policy.
SolverConfig make_config(double epsilon, double kappa, double r, const Profile& profile, int n1 = 256,
                         int n2 = 256);

/// Throws ConfigError when the configuration is inconsistent or violates
/// (sup f_rho / eps^2) |D| > kappa for the truncation level `rho`.
void validate_config(const SolverConfig& config, double rho);
void validate_config(const SolverConfig& config);

struct IterationState {
  ScalarField zeta;
  ScalarField g_zeta;
  double mu = 0.0;
  double energy = 0.0;
  int iter = 0;
  std::vector<std::size_t> partial_cells;
};

struct MultiplierSolve {
  double mu = 0.0;
  /// Largest shift found with tau(-mu_lower) > kappa; the bracket is [mu_lower, mu].
  double mu_lower = 0.0;
  /// Fraction of the jump added on partially filled cells.
  double theta = 0.0;
  double mass_upper = 0.0;  // tau(-mu_lower)
  double mass_lower = 0.0;  // tau(-mu)
  int bisection_steps = 0;
  bool clamped_at_zero = false;
  std::vector<std::size_t> partial_cells;
};

struct EnergyParts {
  double quadratic = 0.0;  // (1/2) int zeta G zeta
  double linear = 0.0;     // W int x1 zeta
  double penalty = 0.0;    // eps^-2 int J(eps^2 zeta)
  double total = 0.0;      // -inf when eps^2 zeta leaves the domain of J
};

struct IterationRecord {
  int iter = 0;
  double mu = 0.0;
  double mass = 0.0;
  double max_zeta = 0.0;
  double energy_before = 0.0;
  double energy_relaxed = 0.0;
  double energy_symmetrized = 0.0;
  double relative_change = 0.0;
  bool extrapolated = false;
  double rho = 0.0;
};

struct SolutionBundle {
  SolutionBundle(IterationState s, ScalarField p) : state(std::move(s)), psi(std::move(p)) {}

  IterationState state;
  ScalarField psi;
  double mu = 0.0;
  double mass = 0.0;
  double energy_E = 0.0;
  double core_energy_I = 0.0;
  double penalty_J = 0.0;
  double moment_x1 = 0.0;
  SupportStats support;
  double residual_L1 = 0.0;
  /// Largest psi over window cells outside D and over probe points off the window.
  double psi_outside_max = -std::numeric_limits<double>::infinity();
  double psi_max_in_domain = 0.0;
  double rho_final = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  int rho_escalations = 0;
  /// Worst single-step relative energy decrease (0 when energy never fell).
  double max_energy_drop = 0.0;
  std::vector<std::size_t> partial_cells;
  std::vector<IterationRecord> history;
};

/// The variational engine for one configuration.
///
/// Each iteration solves for the flux constant mu that saturates the circulation
/// constraint, maps zeta to eps^-2 f_rho(G zeta - W x1 - mu) on D, and optionally
/// Steiner-symmetrizes about x2 = 0. Every accepted sub-step is checked for energy ascent.
class Solver {
 public:
  explicit Solver(SolverConfig config);

  const SolverConfig& config() const { return config_; }
  const GreenOperator& green() const { return green_; }
  const TruncatedProfile& profile() const { return profile_; }
  /// Change the truncation level (re-validates the admissibility constraint).
  void set_rho(double rho);
  double eps2() const { return eps2_; }
  /// Largest admissible vorticity value, sup f_rho / eps^2.
  double zeta_cap() const { return profile_.sup_f() / eps2_; }
  bool in_domain(std::size_t cell) const { return in_domain_[cell] != 0; }
  double domain_area() const { return domain_area_; }

  /// Uniform patch of value sup f_rho / (2 eps^2) on the ball of radius
  /// eps sqrt(2 kappa / (pi sup f_rho)) about (r, 0), rescaled to mass kappa.
  IterationState initialize() const;
  /// eps^-2 int_D f_rho(g_zeta - W x1 + t).
  double tau(const ScalarField& g_zeta, double t) const;
  MultiplierSolve solve_multiplier(const ScalarField& g_zeta) const;
  /// eps^-2 f_rho(g - W x1 - mu) on D with partial filling from `ms`.
  ScalarField update_map(const ScalarField& g_zeta, const MultiplierSolve& ms) const;
  EnergyParts energy_parts(const ScalarField& zeta, const ScalarField& g_zeta) const;
  IterationState relaxation_step(const IterationState& state) const;
  IterationState make_state(ScalarField zeta, int iter) const;

  SolutionBundle solve() const;
  /// Continue from `start` (used by the truncation loop).
  SolutionBundle solve_from(IterationState start) const;
  /// Recompute psi, mu, energies, support and residual from a vorticity field.
  SolutionBundle assemble(IterationState state) const;

 private:
  SolverConfig config_;
  TruncatedProfile profile_;
  GreenOperator green_;
  double eps2_;
  std::vector<char> in_domain_;
  double domain_area_ = 0.0;
};

/// Columnwise symmetric-decreasing rearrangement about the window midline. Values are
/// sorted in decreasing order and dealt alternately to the innermost free cell above
/// and then below the line.
ScalarField steiner_symmetrize(const ScalarField& zeta);

struct ResidualReport {
  double residual_L1 = 0.0;
  double psi_outside_max = -std::numeric_limits<double>::infinity();
};

/// h1 h2 sum |zeta - eps^-2 f_rho(psi)| over the window (partially filled cells excluded),
/// and the largest psi off D.
ResidualReport residual_L1(const Solver& solver, const ScalarField& zeta, const ScalarField& psi,
                           double mu, const std::vector<std::size_t>& partial_cells);
ResidualReport residual_L1(const Solver& solver, const SolutionBundle& bundle);

/// Full solve including the adaptive truncation loop.
SolutionBundle solve(const SolverConfig& config);

}  // namespace vpd
