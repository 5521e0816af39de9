#pragma once

#include <cmath>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace vpd {

enum class ProfileKind { heaviside, power, tabulated };

/// A vorticity function f with f = 0 on (-inf, 0], f > 0 on (0, inf), f nondecreasing,
/// together with its primitive F(s) = int_0^s f and the convex conjugate
/// J(a) = sup_t (a t - F(t)). J takes the value +inf off its effective domain.
///
/// Tabulated profiles interpolate linearly between nodes (s_k, f_k); a repeated abscissa
/// encodes a jump, and f is held at its last value beyond the table. Because the
/// interpolant is piecewise linear, F is piecewise quadratic and J is obtained exactly by
/// inverting the graph of f.
class Profile {
 public:
  static Profile heaviside();
  static Profile power(double p);
  static Profile tabulated(std::vector<double> s, std::vector<double> f);
  /// Two-column CSV (s, f(s)); a non-numeric first line is treated as a header.
  static Profile load_table(const std::string& path);

  ProfileKind kind() const { return kind_; }
  double exponent() const { return exponent_; }
  const std::vector<double>& table_s() const;
  const std::vector<double>& table_f() const;

  double f(double s) const;
  double F(double s) const;
  double J(double a) const;
  /// +inf for power profiles.
  double sup_f() const;
  bool bounded() const { return kind_ != ProfileKind::power; }

  std::string describe() const;

 private:
  struct Table;
  Profile(ProfileKind kind, double exponent, std::shared_ptr<const Table> table)
      : kind_(kind), exponent_(exponent), table_(std::move(table)) {}

  ProfileKind kind_;
  double exponent_;
  std::shared_ptr<const Table> table_;
};

/// f capped at level rho: f_rho(s) = f(min(s, rho)). rho = +inf leaves f untouched.
class TruncatedProfile {
 public:
  TruncatedProfile(Profile base, double rho);

  const Profile& base() const { return base_; }
  double rho() const { return rho_; }
  bool truncated() const { return std::isfinite(rho_); }

  double f(double s) const;
  double F(double s) const;
  double J(double a) const;
  double sup_f() const { return sup_f_; }

 private:
  Profile base_;
  double rho_;
  double f_rho_;
  double F_rho_;
  double sup_f_;
};

TruncatedProfile truncate(const Profile& profile, double rho);

struct H2Constants {
  double theta0 = 0.0;
  double theta1 = 0.0;
};

struct H2Options {
  double s_max = 100.0;
  int samples = 2000;
  double default_theta1 = 1.0;
};

/// Constants with F(s) <= theta0 f(s) s + theta1 f(s), checked on a sample grid of
/// (0, s_max]. Closed form for power profiles; otherwise a grid search. The check is
/// only as strong as the sampled horizon: a bounded f satisfies it on any finite horizon
/// but never on all of [0, inf).
std::optional<H2Constants> validate_H2(const Profile& profile, const H2Options& options = {});

/// Growth threshold 4 pi min(2 theta0, 2 - 2 theta0) / kappa.
double theta2(double theta0, double kappa);

struct H3Check {
  bool pass = false;
  double witness_s = 0.0;
  double witness_value = 0.0;
};

/// Advisory finite-horizon proxy for liminf f(s) exp(-theta2 s) = 0: samples the tail
/// [s_max/2, s_max] and passes when some sample falls below `tolerance`. The heaviside
/// profile passes outright.
H3Check check_H3(const Profile& profile, double theta2, double s_max, double tolerance = 1e-8,
                 int samples = 4000);

}  // namespace vpd
