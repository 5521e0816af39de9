#include "vpd/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace vpd {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

struct Profile::Table {
  std::vector<double> s;
  std::vector<double> f;
  std::vector<double> F;  // primitive at the nodes
};

Profile Profile::heaviside() { return Profile(ProfileKind::heaviside, 0.0, nullptr); }

Profile Profile::power(double p) {
  if (!(p > 0.0) || !std::isfinite(p)) throw std::invalid_argument("power profile needs p > 0");
  return Profile(ProfileKind::power, p, nullptr);
}

Profile Profile::tabulated(std::vector<double> s, std::vector<double> f) {
  if (s.size() != f.size() || s.size() < 2) {
    throw std::invalid_argument("tabulated profile needs at least two (s, f) rows");
  }
  if (s.front() != 0.0 || f.front() != 0.0) {
    throw std::invalid_argument("tabulated profile must start at (0, 0)");
  }
  for (std::size_t k = 0; k < s.size(); ++k) {
    if (!std::isfinite(s[k]) || !std::isfinite(f[k])) {
      throw std::invalid_argument("tabulated profile has non-finite entries");
    }
    if (k > 0 && (s[k] < s[k - 1] || f[k] < f[k - 1])) {
      throw std::invalid_argument("tabulated profile must be nondecreasing in s and f");
    }
  }
  // f > 0 for every s > 0: the first node past s = 0 (or the top of a jump at 0) is positive.
  std::size_t k = 1;
  while (k < s.size() && s[k] == 0.0) ++k;
  if (f[k - 1] <= 0.0 && (k == s.size() || f[k] <= 0.0)) {
    throw std::invalid_argument("tabulated profile must be positive for s > 0");
  }
  auto table = std::make_shared<Table>();
  table->F.assign(s.size(), 0.0);
  for (std::size_t m = 1; m < s.size(); ++m) {
    table->F[m] = table->F[m - 1] + 0.5 * (s[m] - s[m - 1]) * (f[m - 1] + f[m]);
  }
  table->s = std::move(s);
  table->f = std::move(f);
  return Profile(ProfileKind::tabulated, 0.0, std::move(table));
}

Profile Profile::load_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open profile table " + path);
  std::vector<double> s, f;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream row(line);
    double a, b;
    if (!(row >> a >> b)) {
      if (first) {
        first = false;
        continue;
      }
      throw std::invalid_argument("malformed row in profile table " + path + ": " + line);
    }
    first = false;
    s.push_back(a);
    f.push_back(b);
  }
  return tabulated(std::move(s), std::move(f));
}

const std::vector<double>& Profile::table_s() const {
  static const std::vector<double> empty;
  return table_ ? table_->s : empty;
}

const std::vector<double>& Profile::table_f() const {
  static const std::vector<double> empty;
  return table_ ? table_->f : empty;
}

double Profile::f(double s) const {
  if (!(s > 0.0)) return 0.0;
  switch (kind_) {
    case ProfileKind::heaviside:
      return 1.0;
    case ProfileKind::power:
      return std::pow(s, exponent_);
    case ProfileKind::tabulated: {
      const auto& t = *table_;
      const auto it = std::lower_bound(t.s.begin(), t.s.end(), s);
      if (it == t.s.end()) return t.f.back();
      const std::size_t k = static_cast<std::size_t>(it - t.s.begin());
      // Node k-1 is the last node strictly left of s, i.e. the top of any jump there.
      const double w = (s - t.s[k - 1]) / (t.s[k] - t.s[k - 1]);
      return t.f[k - 1] + w * (t.f[k] - t.f[k - 1]);
    }
  }
  return 0.0;
}

double Profile::F(double s) const {
  if (!(s > 0.0)) return 0.0;
  switch (kind_) {
    case ProfileKind::heaviside:
      return s;
    case ProfileKind::power:
      return std::pow(s, exponent_ + 1.0) / (exponent_ + 1.0);
    case ProfileKind::tabulated: {
      const auto& t = *table_;
      const auto it = std::lower_bound(t.s.begin(), t.s.end(), s);
      if (it == t.s.end()) return t.F.back() + t.f.back() * (s - t.s.back());
      const std::size_t k = static_cast<std::size_t>(it - t.s.begin());
      return t.F[k - 1] + 0.5 * (s - t.s[k - 1]) * (t.f[k - 1] + f(s));
    }
  }
  return 0.0;
}

double Profile::J(double a) const {
  if (a < 0.0 || std::isnan(a)) return kInf;
  switch (kind_) {
    case ProfileKind::heaviside:
      return a <= 1.0 ? 0.0 : kInf;
    case ProfileKind::power: {
      const double p = exponent_;
      return p / (p + 1.0) * std::pow(a, (p + 1.0) / p);
    }
    case ProfileKind::tabulated: {
      const auto& t = *table_;
      if (a > t.f.back()) return kInf;
      if (a == 0.0) return 0.0;
      // The generalised inverse t* of f at level a; J(a) = a t* - F(t*).
      const auto it = std::lower_bound(t.f.begin(), t.f.end(), a);
      const std::size_t k = static_cast<std::size_t>(it - t.f.begin());
      double ts;
      if (t.s[k] == t.s[k - 1]) {
        ts = t.s[k];
      } else {
        ts = t.s[k - 1] + (a - t.f[k - 1]) * (t.s[k] - t.s[k - 1]) / (t.f[k] - t.f[k - 1]);
      }
      return a * ts - F(ts);
    }
  }
  return kInf;
}

double Profile::sup_f() const {
  switch (kind_) {
    case ProfileKind::heaviside:
      return 1.0;
    case ProfileKind::power:
      return kInf;
    case ProfileKind::tabulated:
      return table_->f.back();
  }
  return kInf;
}

std::string Profile::describe() const {
  switch (kind_) {
    case ProfileKind::heaviside:
      return "heaviside";
    case ProfileKind::power: {
      std::ostringstream os;
      os << "power(" << exponent_ << ")";
      return os.str();
    }
    case ProfileKind::tabulated:
      return "tabulated(" + std::to_string(table_->s.size()) + " nodes)";
  }
  return "unknown";
}

TruncatedProfile::TruncatedProfile(Profile base, double rho) : base_(std::move(base)), rho_(rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("truncation level rho must be positive");
  if (std::isfinite(rho_)) {
    f_rho_ = base_.f(rho_);
    F_rho_ = base_.F(rho_);
    sup_f_ = f_rho_;
  } else {
    f_rho_ = kInf;
    F_rho_ = kInf;
    sup_f_ = base_.sup_f();
  }
}

double TruncatedProfile::f(double s) const { return s <= rho_ ? base_.f(s) : f_rho_; }

double TruncatedProfile::F(double s) const {
  return s <= rho_ ? base_.F(s) : F_rho_ + f_rho_ * (s - rho_);
}

double TruncatedProfile::J(double a) const { return a <= sup_f_ ? base_.J(a) : kInf; }

TruncatedProfile truncate(const Profile& profile, double rho) { return TruncatedProfile(profile, rho); }

std::optional<H2Constants> validate_H2(const Profile& profile, const H2Options& options) {
  auto holds = [&](double t0, double t1) {
    for (int k = 1; k <= options.samples; ++k) {
      const double s = options.s_max * k / options.samples;
      const double fs = profile.f(s);
      const double rhs = t0 * fs * s + t1 * fs;
      if (profile.F(s) > rhs * (1.0 + 1e-12) + 1e-300) return false;
    }
    return true;
  };
  if (profile.kind() == ProfileKind::power) {
    // F = f s / (p + 1), so the inequality holds with theta1 free.
    const H2Constants c{1.0 / (profile.exponent() + 1.0), options.default_theta1};
    if (holds(c.theta0, c.theta1)) return c;
    return std::nullopt;
  }
  for (int a = 1; a <= 19; ++a) {
    const double t0 = 0.05 * a;
    for (int b = -3; b <= 6; ++b) {
      const double t1 = std::pow(10.0, b);
      for (double m : {1.0, 2.0, 5.0}) {
        if (holds(t0, m * t1)) return H2Constants{t0, m * t1};
      }
    }
  }
  return std::nullopt;
}

double theta2(double theta0, double kappa) {
  if (!(theta0 > 0.0 && theta0 < 1.0)) throw std::invalid_argument("theta0 must lie in (0, 1)");
  if (!(kappa > 0.0)) throw std::invalid_argument("kappa must be positive");
  return 4.0 * std::acos(-1.0) * std::min(2.0 * theta0, 2.0 - 2.0 * theta0) / kappa;
}

H3Check check_H3(const Profile& profile, double theta2, double s_max, double tolerance, int samples) {
  if (!(s_max > 0.0)) throw std::invalid_argument("s_max must be positive");
  H3Check out;
  if (profile.kind() == ProfileKind::heaviside) {
    out.pass = true;
    out.witness_s = s_max;
    out.witness_value = std::exp(-theta2 * s_max);
    return out;
  }
  out.witness_value = kInf;
  for (int k = 0; k <= samples; ++k) {
    const double s = 0.5 * s_max + 0.5 * s_max * k / samples;
    const double v = profile.f(s) * std::exp(-theta2 * s);
    if (v < out.witness_value) {
      out.witness_value = v;
      out.witness_s = s;
    }
  }
  out.pass = out.witness_value <= tolerance;
  return out;
}

}  // namespace vpd
