#include "vpd/solver.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

namespace vpd {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();
// Jumps smaller than this fraction of the filled value are rounding, not plateaus.
constexpr double kPartialThreshold = 1e-8;

double initial_rho(const SolverConfig& config) {
  switch (config.rho_policy.kind) {
    case RhoPolicy::Kind::none:
      return kInf;
    case RhoPolicy::Kind::fixed:
      return config.rho_policy.rho;
    case RhoPolicy::Kind::adaptive:
      return config.rho_policy.rho_init;
  }
  return kInf;
}

std::vector<char> domain_mask(const GridSpec& grid, const Rect& domain) {
  std::vector<char> mask(grid.size(), 0);
  for (int i = 0; i < grid.n1(); ++i) {
    for (int j = 0; j < grid.n2(); ++j) {
      mask[grid.index(i, j)] = domain.contains(grid.center(i, j)) ? 1 : 0;
    }
  }
  return mask;
}

double discrete_area(const GridSpec& grid, const std::vector<char>& mask) {
  const auto cells = std::count(mask.begin(), mask.end(), char{1});
  return static_cast<double>(cells) * grid.cell_area();
}

double l1_distance(const ScalarField& a, const ScalarField& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += std::abs(a[k] - b[k]);
  return s;
}

double l1_norm(const ScalarField& a) {
  double s = 0.0;
  for (double v : a.values()) s += std::abs(v);
  return s;
}

double relative_drop(double before, double after) {
  if (!(after < before)) return 0.0;
  if (std::isinf(before) || std::isinf(after)) return kInf;
  return (before - after) / std::max(std::abs(before), 1e-300);
}

// Probe points just off each edge of D and on a coarse lattice around it.
std::vector<Point> outside_probes(const Rect& d, const GridSpec& grid) {
  std::vector<Point> out;
  const double delta = std::max(grid.h1(), grid.h2());
  const int per_edge = 32;
  for (int k = 0; k <= per_edge; ++k) {
    const double s = static_cast<double>(k) / per_edge;
    const double x1 = d.x1_min + s * (d.x1_max - d.x1_min);
    const double x2 = d.x2_min + s * (d.x2_max - d.x2_min);
    out.push_back({x1, d.x2_max + delta});
    out.push_back({x1, d.x2_min - delta});
    if (d.x1_min - delta > 0.0) out.push_back({d.x1_min - delta, x2});
    out.push_back({d.x1_max + delta, x2});
  }
  const Rect outer{delta, 2.0 * d.x1_max, d.x2_min - d.x1_max, d.x2_max + d.x1_max};
  const Rect inflated{d.x1_min - delta, d.x1_max + delta, d.x2_min - delta, d.x2_max + delta};
  const int n = 16;
  for (int a = 0; a <= n; ++a) {
    for (int b = 0; b <= n; ++b) {
      const Point p{outer.x1_min + (outer.x1_max - outer.x1_min) * a / n,
                    outer.x2_min + (outer.x2_max - outer.x2_min) * b / n};
      if (!inflated.contains(p)) out.push_back(p);
    }
  }
  return out;
}

}  // namespace

SolverConfig make_config(double epsilon, double kappa, double r, const Profile& profile, int n1, int n2) {
  SolverConfig c;
  c.epsilon = epsilon;
  c.kappa = kappa;
  c.r = r;
  c.W = kappa / (4.0 * kPi * r);
  c.profile = profile;
  c.rho_policy = profile.bounded() ? RhoPolicy::none() : RhoPolicy::adaptive();
  c.grid = build_grid(r, n1, n2);
  c.domain = default_domain(r);
  return c;
}

void validate_config(const SolverConfig& config, double rho) {
  auto fail = [](const std::string& msg) { throw ConfigError(msg); };
  if (!(config.epsilon > 0.0) || !std::isfinite(config.epsilon)) fail("epsilon must be positive");
  if (!(config.kappa > 0.0) || !std::isfinite(config.kappa)) fail("kappa must be positive");
  if (!(config.r > 0.0) || !std::isfinite(config.r)) fail("r must be positive");
  if (!(config.W > 0.0) || !std::isfinite(config.W)) fail("W must be positive");
  const double k = 4.0 * kPi * config.r * config.W;
  if (std::abs(k - config.kappa) > 1e-12 * config.kappa) {
    fail("inconsistent travelling speed: 4 pi r W must equal kappa");
  }
  if (config.max_iter < 1) fail("max_iter must be at least 1");
  if (!(config.tol_mass > 0.0)) fail("tol_mass must be positive");
  if (!(config.tol_fixed_point > 0.0)) fail("tol_fixed_point must be positive");
  const Rect& d = config.domain;
  if (!(d.x1_min > 0.0) || !(d.x1_max > d.x1_min) || !(d.x2_max > d.x2_min)) {
    fail("domain D must be a nonempty rectangle in x1 > 0");
  }
  if (!config.grid.window().contains(d)) fail("grid window must contain the domain D");

  const RhoPolicy& p = config.rho_policy;
  if (p.kind == RhoPolicy::Kind::adaptive) {
    if (!(p.rho_init > 0.0) || !std::isfinite(p.rho_init)) fail("rho_init must be positive");
    if (!(p.growth > 1.0)) fail("rho growth factor must exceed 1");
    if (!(p.cap >= p.rho_init)) fail("rho cap must be at least rho_init");
  }
  if (p.kind == RhoPolicy::Kind::fixed && (!(p.rho > 0.0) || !std::isfinite(p.rho))) {
    fail("fixed rho must be positive and finite");
  }
  if (!(rho > 0.0)) fail("rho must be positive");
  if (!config.profile.bounded() && !std::isfinite(rho)) {
    fail("unbounded profile " + config.profile.describe() + " needs a fixed or adaptive rho policy");
  }
  const TruncatedProfile fr(config.profile, rho);
  const double area = discrete_area(config.grid, domain_mask(config.grid, d));
  if (!(fr.sup_f() / (config.epsilon * config.epsilon) * area > config.kappa)) {
    std::ostringstream os;
    os << "admissibility constraint (sup f / eps^2)|D| > kappa fails: sup f = " << fr.sup_f()
       << ", eps = " << config.epsilon << ", |D| = " << area << ", kappa = " << config.kappa;
    fail(os.str());
  }
}

void validate_config(const SolverConfig& config) { validate_config(config, initial_rho(config)); }

Solver::Solver(SolverConfig config)
    : config_(std::move(config)),
      profile_(config_.profile, initial_rho(config_)),
      green_(config_.grid, GreenStrategy::fft),
      eps2_(config_.epsilon * config_.epsilon) {
  validate_config(config_, profile_.rho());
  in_domain_ = domain_mask(config_.grid, config_.domain);
  domain_area_ = discrete_area(config_.grid, in_domain_);
}

void Solver::set_rho(double rho) {
  validate_config(config_, rho);
  profile_ = TruncatedProfile(config_.profile, rho);
}

IterationState Solver::initialize() const {
  const GridSpec& g = config_.grid;
  const double sup = profile_.sup_f();
  const double radius = config_.epsilon * std::sqrt(2.0 * config_.kappa / (kPi * sup));
  const Point c{config_.r, 0.0};
  const Rect& d = config_.domain;
  if (!(c.x1 - radius > d.x1_min && c.x1 + radius < d.x1_max && c.x2 - radius > d.x2_min &&
        c.x2 + radius < d.x2_max)) {
    std::ostringstream os;
    os << "initial patch of radius " << radius << " about (" << c.x1 << ", 0) does not fit in D"
       << " (epsilon too large for the window)";
    throw ConfigError(os.str());
  }
  std::vector<std::size_t> cells;
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      const std::size_t k = g.index(i, j);
      if (in_domain_[k] && distance(g.center(i, j), c) < radius) cells.push_back(k);
    }
  }
  if (cells.empty()) throw ConfigError("initial patch contains no cell centre; refine the grid");
  const double value = config_.kappa / (static_cast<double>(cells.size()) * g.cell_area());
  if (value > zeta_cap()) {
    throw ConfigError("initial patch is under-resolved: rescaled value exceeds sup f / eps^2");
  }
  ScalarField zeta(g, FieldRole::vorticity);
  for (std::size_t k : cells) zeta[k] = value;
  IterationState s = make_state(std::move(zeta), 0);
  s.mu = 0.0;
  return s;
}

double Solver::tau(const ScalarField& g_zeta, double t) const {
  const GridSpec& g = config_.grid;
  double sum = 0.0;
  for (int i = 0; i < g.n1(); ++i) {
    const double shift = t - config_.W * g.x1(i);
    for (int j = 0; j < g.n2(); ++j) {
      const std::size_t k = g.index(i, j);
      if (in_domain_[k]) sum += profile_.f(g_zeta[k] + shift);
    }
  }
  return sum * g.cell_area() / eps2_;
}

MultiplierSolve Solver::solve_multiplier(const ScalarField& g_zeta) const {
  const GridSpec& g = config_.grid;
  if (!(g_zeta.grid() == g)) throw std::invalid_argument("solve_multiplier: grid mismatch");
  std::vector<double> phi;
  std::vector<std::size_t> index;
  phi.reserve(g.size());
  index.reserve(g.size());
  for (int i = 0; i < g.n1(); ++i) {
    const double wx = config_.W * g.x1(i);
    for (int j = 0; j < g.n2(); ++j) {
      const std::size_t k = g.index(i, j);
      if (!in_domain_[k]) continue;
      phi.push_back(g_zeta[k] - wx);
      index.push_back(k);
    }
  }
  // Mass in units of f: tau(-mu) = scale * S(mu).
  const double scale = g.cell_area() / eps2_;
  const double target = config_.kappa / scale;
  auto S = [&](double mu) {
    double s = 0.0;
    for (double v : phi) s += profile_.f(v - mu);
    return s;
  };

  MultiplierSolve out;
  const double s0 = S(0.0);
  if (s0 <= target) {
    out.mu = 0.0;
    out.clamped_at_zero = true;
    out.mass_lower = out.mass_upper = s0 * scale;
    return out;
  }
  const double mu_max = config_.kappa / (2.0 * kPi) * std::log(1.0 / config_.epsilon) + 10.0;
  const double s_max = S(mu_max);
  if (s_max > target) {
    std::ostringstream os;
    os << "multiplier bracket failure: tau(-" << mu_max << ") = " << s_max * scale << " > kappa = "
       << config_.kappa << " (window or epsilon misconfigured)";
    throw SolverError(os.str());
  }
  double lo = 0.0, hi = mu_max;
  double s_lo = s0, s_hi = s_max;
  for (int it = 0; it < 200; ++it) {
    const double mid = lo + 0.5 * (hi - lo);
    if (mid <= lo || mid >= hi) break;
    const double s = S(mid);
    ++out.bisection_steps;
    if (s <= target) {
      hi = mid;
      s_hi = s;
    } else {
      lo = mid;
      s_lo = s;
    }
  }
  out.mu = hi;
  out.mass_lower = s_hi * scale;
  out.mass_upper = s_lo * scale;
  out.theta = s_lo > s_hi ? std::clamp((target - s_hi) / (s_lo - s_hi), 0.0, 1.0) : 0.0;
  for (std::size_t m = 0; m < phi.size(); ++m) {
    const double a = profile_.f(phi[m] - hi);
    const double b = profile_.f(phi[m] - lo);
    if (b - a > kPartialThreshold * b) out.partial_cells.push_back(index[m]);
  }
  out.mu_lower = lo;
  return out;
}

ScalarField Solver::update_map(const ScalarField& g_zeta, const MultiplierSolve& ms) const {
  const GridSpec& g = config_.grid;
  ScalarField out(g, FieldRole::vorticity);
  const bool blend = ms.theta > 0.0 && ms.mu_lower < ms.mu;
  for (int i = 0; i < g.n1(); ++i) {
    const double wx = config_.W * g.x1(i);
    for (int j = 0; j < g.n2(); ++j) {
      const std::size_t k = g.index(i, j);
      if (!in_domain_[k]) continue;
      const double phi = g_zeta[k] - wx;
      double v = profile_.f(phi - ms.mu);
      if (blend) {
        const double top = profile_.f(phi - ms.mu_lower);
        if (top > v) v = std::min(top, v + ms.theta * (top - v));
      }
      out[k] = v / eps2_;
    }
  }
  return out;
}

EnergyParts Solver::energy_parts(const ScalarField& zeta, const ScalarField& g_zeta) const {
  const GridSpec& g = config_.grid;
  const double cap = zeta_cap();
  const double sup = profile_.sup_f();
  double quad = 0.0, lin = 0.0, pen = 0.0;
  bool admissible = true;
  for (int i = 0; i < g.n1(); ++i) {
    const double x1 = g.x1(i);
    for (int j = 0; j < g.n2(); ++j) {
      const std::size_t k = g.index(i, j);
      const double z = zeta[k];
      if (z == 0.0) continue;
      quad += z * g_zeta[k];
      lin += x1 * z;
      if (z < 0.0 || z > cap) {
        admissible = false;
        continue;
      }
      pen += profile_.J(std::min(eps2_ * z, sup));
    }
  }
  const double area = g.cell_area();
  EnergyParts e;
  e.quadratic = 0.5 * area * quad;
  e.linear = config_.W * area * lin;
  e.penalty = area * pen / eps2_;
  e.total = admissible ? e.quadratic - e.linear - e.penalty : -kInf;
  if (std::isinf(e.penalty)) e.total = -kInf;
  return e;
}

IterationState Solver::make_state(ScalarField zeta, int iter) const {
  ScalarField g = green_.apply(zeta);
  const double energy = energy_parts(zeta, g).total;
  return IterationState{std::move(zeta), std::move(g), 0.0, energy, iter, {}};
}

IterationState Solver::relaxation_step(const IterationState& state) const {
  MultiplierSolve ms = solve_multiplier(state.g_zeta);
  IterationState next = make_state(update_map(state.g_zeta, ms), state.iter + 1);
  next.mu = ms.mu;
  next.partial_cells = std::move(ms.partial_cells);
  return next;
}

ScalarField steiner_symmetrize(const ScalarField& zeta) {
  const GridSpec& g = zeta.grid();
  const int n2 = g.n2();
  if (n2 % 2 != 0) throw std::invalid_argument("steiner_symmetrize needs an even number of rows");
  ScalarField out(g, zeta.role());
  std::vector<double> column(static_cast<std::size_t>(n2));
  const int half = n2 / 2;
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < n2; ++j) column[static_cast<std::size_t>(j)] = zeta(i, j);
    std::sort(column.begin(), column.end(), std::greater<>());
    for (int m = 0; m < n2; ++m) {
      const int j = (m % 2 == 0) ? half + m / 2 : half - 1 - m / 2;
      out(i, j) = column[static_cast<std::size_t>(m)];
    }
  }
  return out;
}

ResidualReport residual_L1(const Solver& solver, const ScalarField& zeta, const ScalarField& psi,
                           double mu, const std::vector<std::size_t>& partial_cells) {
  const GridSpec& g = zeta.grid();
  const SolverConfig& c = solver.config();
  std::vector<char> skip(g.size(), 0);
  for (std::size_t k : partial_cells) skip[k] = 1;
  ResidualReport out;
  double sum = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!solver.in_domain(k)) out.psi_outside_max = std::max(out.psi_outside_max, psi[k]);
    if (skip[k]) continue;
    sum += std::abs(zeta[k] - solver.profile().f(psi[k]) / solver.eps2());
  }
  out.residual_L1 = sum * g.cell_area();
  for (const Point& p : outside_probes(c.domain, g)) {
    const double v = solver.green().potential_at(zeta, p) - c.W * p.x1 - mu;
    out.psi_outside_max = std::max(out.psi_outside_max, v);
  }
  return out;
}

ResidualReport residual_L1(const Solver& solver, const SolutionBundle& bundle) {
  return residual_L1(solver, bundle.state.zeta, bundle.psi, bundle.mu, bundle.partial_cells);
}

SolutionBundle Solver::assemble(IterationState state) const {
  MultiplierSolve ms = solve_multiplier(state.g_zeta);
  ScalarField psi = stream_from_potential(state.g_zeta, config_.W, ms.mu);
  const int iterations = state.iter;
  SolutionBundle b(std::move(state), std::move(psi));
  b.mu = ms.mu;
  b.partial_cells = std::move(ms.partial_cells);
  const EnergyParts e = energy_parts(b.state.zeta, b.state.g_zeta);
  b.energy_E = e.total;
  b.penalty_J = e.penalty;
  b.core_energy_I = inner_product(b.state.zeta, b.psi);
  b.mass = integrate(b.state.zeta);
  b.moment_x1 = vpd::moment_x1(b.state.zeta);
  b.support = support_stats(b.state.zeta, 0.0, config_.domain);
  const ResidualReport r = residual_L1(*this, b);
  b.residual_L1 = r.residual_L1;
  b.psi_outside_max = r.psi_outside_max;
  b.psi_max_in_domain = -kInf;
  for (std::size_t k = 0; k < b.psi.size(); ++k) {
    if (in_domain_[k]) b.psi_max_in_domain = std::max(b.psi_max_in_domain, b.psi[k]);
  }
  b.rho_final = profile_.rho();
  b.iterations = iterations;
  return b;
}

SolutionBundle Solver::solve() const { return solve_from(initialize()); }

SolutionBundle Solver::solve_from(IterationState start) const {
  IterationState s = std::move(start);
  std::vector<IterationRecord> history;
  double max_drop = 0.0;
  bool converged = false;

  // Extrapolation bookkeeping: the previous iterate and the last two step lengths.
  std::optional<IterationState> prev;
  double last_step = 0.0, last_ratio = 0.0;
  int stable_ratios = 0;

  for (int it = 0; it < config_.max_iter; ++it) {
    IterationRecord rec;
    rec.rho = profile_.rho();
    rec.energy_before = s.energy;
    IterationState next = relaxation_step(s);
    rec.mu = next.mu;

    if (config_.accelerate && prev && stable_ratios >= 2) {
      const double q = last_ratio;
      const double beta = std::min(q / (1.0 - q), 1e4);
      ScalarField gy = axpby(1.0 + beta, s.g_zeta, -beta, prev->g_zeta);
      MultiplierSolve ms = solve_multiplier(gy);
      IterationState cand = make_state(update_map(gy, ms), s.iter + 1);
      if (cand.energy > next.energy) {
        MultiplierSolve own = solve_multiplier(cand.g_zeta);
        cand.mu = own.mu;
        cand.partial_cells = std::move(own.partial_cells);
        next = std::move(cand);
        rec.extrapolated = true;
      }
    }
    rec.energy_relaxed = next.energy;
    max_drop = std::max(max_drop, relative_drop(s.energy, next.energy));

    if (config_.symmetrize) {
      ScalarField sym = steiner_symmetrize(next.zeta);
      if (!(sym == next.zeta)) {
        IterationState ss = make_state(std::move(sym), next.iter);
        ss.mu = next.mu;
        ss.partial_cells = std::move(next.partial_cells);
        max_drop = std::max(max_drop, relative_drop(next.energy, ss.energy));
        next = std::move(ss);
      }
    }
    rec.energy_symmetrized = next.energy;
    rec.iter = next.iter;
    rec.mass = integrate(next.zeta);
    rec.max_zeta = next.zeta.max();

    const double step = l1_distance(next.zeta, s.zeta);
    const double base = l1_norm(s.zeta);
    rec.relative_change = base > 0.0 ? step / base : (step > 0.0 ? kInf : 0.0);
    history.push_back(rec);

    if (rec.extrapolated) {
      stable_ratios = 0;
      last_step = 0.0;
    } else if (last_step > 0.0 && step > 0.0) {
      const double q = step / last_step;
      const bool in_range = q > 0.5 && q < 1.0;
      const bool steady = std::abs(q - last_ratio) <= 0.25 * (1.0 - q);
      stable_ratios = in_range && steady ? stable_ratios + 1 : (in_range ? 1 : 0);
      last_ratio = q;
      last_step = step;
    } else {
      last_step = step;
    }

    prev = std::move(s);
    s = std::move(next);
    if (!rec.extrapolated && rec.relative_change <= config_.tol_fixed_point) {
      const MultiplierSolve ms = solve_multiplier(s.g_zeta);
      const ScalarField psi = stream_from_potential(s.g_zeta, config_.W, ms.mu);
      double res = 0.0;
      std::vector<char> skip(psi.size(), 0);
      for (std::size_t k : ms.partial_cells) skip[k] = 1;
      for (std::size_t k = 0; k < psi.size(); ++k) {
        if (!skip[k]) res += std::abs(s.zeta[k] - profile_.f(psi[k]) / eps2_);
      }
      if (res * config_.grid.cell_area() <= config_.tol_fixed_point * config_.kappa) {
        converged = true;
        break;
      }
    }
  }

  SolutionBundle b = assemble(std::move(s));
  b.converged = converged;
  b.max_energy_drop = max_drop;
  b.history = std::move(history);
  return b;
}

SolutionBundle solve(const SolverConfig& config) {
  Solver solver(config);
  SolutionBundle b = solver.solve();
  if (config.rho_policy.kind != RhoPolicy::Kind::adaptive) return b;
  const RhoPolicy& p = config.rho_policy;
  double rho = solver.profile().rho();
  int escalations = 0;
  while (b.converged && !(b.psi_max_in_domain < rho)) {
    rho *= p.growth;
    if (rho > p.cap) {
      std::ostringstream os;
      os << "truncation level escalated past the cap " << p.cap << " (max psi = " << b.psi_max_in_domain
         << "); the growth condition (H3) appears to fail for " << config.profile.describe();
      throw SolverError(os.str());
    }
    solver.set_rho(rho);
    ++escalations;
    std::vector<IterationRecord> history = std::move(b.history);
    const double drop = b.max_energy_drop;
    b = solver.solve_from(solver.make_state(std::move(b.state.zeta), b.iterations));
    history.insert(history.end(), b.history.begin(), b.history.end());
    b.history = std::move(history);
    b.max_energy_drop = std::max(b.max_energy_drop, drop);
  }
  b.rho_escalations = escalations;
  return b;
}

}  // namespace vpd
