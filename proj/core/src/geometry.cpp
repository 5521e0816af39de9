#include "vpd/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace vpd {

double distance(Point a, Point b) { return std::hypot(a.x1 - b.x1, a.x2 - b.x2); }

Rect default_domain(double r) { return Rect{0.5 * r, 2.0 * r, -1.0, 1.0}; }

GridSpec::GridSpec(Rect window, int n1, int n2) : window_(window), n1_(n1), n2_(n2) {
  if (!(window.x1_min > 0.0)) {
    throw std::invalid_argument("grid window must lie in the half-plane x1 > 0");
  }
  if (!(window.x1_max > window.x1_min) || !(window.x2_max > window.x2_min)) {
    throw std::invalid_argument("grid window has nonpositive extent");
  }
  if (n1 < 2 || n2 < 2) {
    throw std::invalid_argument("grid needs at least 2 cells per direction");
  }
  if (n2 % 2 != 0) {
    throw std::invalid_argument("n2 must be even (got " + std::to_string(n2) + ")");
  }
  h1_ = (window.x1_max - window.x1_min) / n1;
  h2_ = (window.x2_max - window.x2_min) / n2;
  x2_mid_ = 0.5 * (window.x2_min + window.x2_max);
  if (!(h1_ > 0.0) || !(h2_ > 0.0) || !std::isfinite(h1_) || !std::isfinite(h2_)) {
    throw std::invalid_argument("grid cell sizes must be positive and finite");
  }
}

Rect GridSpec::cell(int i, int j) const {
  const double c1 = x1(i);
  const double c2 = x2(j);
  return Rect{c1 - 0.5 * h1_, c1 + 0.5 * h1_, c2 - 0.5 * h2_, c2 + 0.5 * h2_};
}

std::pair<int, int> GridSpec::locate(Point p) const {
  const double s1 = (p.x1 - window_.x1_min) / h1_;
  const double s2 = (p.x2 - window_.x2_min) / h2_;
  if (!(s1 >= 0.0 && s1 < n1_ && s2 >= 0.0 && s2 < n2_)) return {-1, -1};
  return {static_cast<int>(s1), static_cast<int>(s2)};
}

GridSpec build_grid(double r, int n1, int n2) {
  if (!(r > 0.0)) throw std::invalid_argument("r must be positive");
  return GridSpec(default_domain(r), n1, n2);
}

ScalarField::ScalarField(GridSpec grid, FieldRole role)
    : grid_(grid), role_(role), values_(grid.size(), 0.0) {}

ScalarField::ScalarField(GridSpec grid, std::vector<double> values, FieldRole role)
    : grid_(grid), role_(role), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw std::invalid_argument("field size does not match grid");
  }
  check_invariants();
}

void ScalarField::check_invariants() const {
  for (double v : values_) {
    if (!std::isfinite(v)) throw std::invalid_argument("field contains non-finite values");
    if (role_ == FieldRole::vorticity && v < 0.0) {
      throw std::invalid_argument("vorticity must be nonnegative");
    }
  }
}

double ScalarField::max() const { return *std::max_element(values_.begin(), values_.end()); }
double ScalarField::min() const { return *std::min_element(values_.begin(), values_.end()); }

double integrate(const ScalarField& field) {
  double sum = 0.0;
  for (double v : field.values()) sum += v;
  return field.grid().cell_area() * sum;
}

double moment_x1(const ScalarField& field) {
  const GridSpec& g = field.grid();
  double sum = 0.0;
  for (int i = 0; i < g.n1(); ++i) {
    double column = 0.0;
    for (int j = 0; j < g.n2(); ++j) column += field(i, j);
    sum += g.x1(i) * column;
  }
  return g.cell_area() * sum;
}

double inner_product(const ScalarField& a, const ScalarField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("inner_product: grid mismatch");
  double sum = 0.0;
  const auto av = a.values();
  const auto bv = b.values();
  for (std::size_t k = 0; k < av.size(); ++k) sum += av[k] * bv[k];
  return a.grid().cell_area() * sum;
}

ScalarField axpby(double a, const ScalarField& u, double b, const ScalarField& v) {
  if (!(u.grid() == v.grid())) throw std::invalid_argument("axpby: grid mismatch");
  ScalarField out(u.grid(), FieldRole::generic);
  for (std::size_t k = 0; k < u.size(); ++k) out[k] = a * u[k] + b * v[k];
  return out;
}

bool is_even_in_x2(const ScalarField& field) {
  const GridSpec& g = field.grid();
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2() / 2; ++j) {
      if (field(i, j) != field(i, g.n2() - 1 - j)) return false;
    }
  }
  return true;
}

FullPlaneField::FullPlaneField(const ScalarField& half)
    : half_grid_(half.grid()), values_(2 * half.size(), 0.0) {
  const int n1 = half_grid_.n1();
  const int n2 = half_grid_.n2();
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      const double v = half(i, j);
      values_[static_cast<std::size_t>(n1 + i) * n2 + j] = v;
      values_[static_cast<std::size_t>(n1 - 1 - i) * n2 + j] = -v;
    }
  }
}

double FullPlaneField::x1(int k) const {
  const int n1 = half_grid_.n1();
  return k >= n1 ? half_grid_.x1(k - n1) : -half_grid_.x1(n1 - 1 - k);
}

double FullPlaneField::integrate_left() const {
  // Same summation order as the half-plane field, so the result is its exact negation.
  const int n1 = half_grid_.n1();
  const int n2 = half_grid_.n2();
  double sum = 0.0;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) sum += (*this)(n1 - 1 - i, j);
  }
  return half_grid_.cell_area() * sum;
}

double FullPlaneField::integrate_right() const {
  double sum = 0.0;
  for (std::size_t k = values_.size() / 2; k < values_.size(); ++k) sum += values_[k];
  return half_grid_.cell_area() * sum;
}

double FullPlaneField::integrate() const {
  // Pairwise so that exact cancellation is independent of summation order.
  const int n1 = half_grid_.n1();
  const int n2 = half_grid_.n2();
  double sum = 0.0;
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) sum += (*this)(n1 + i, j) + (*this)(n1 - 1 - i, j);
  }
  return half_grid_.cell_area() * sum;
}

FullPlaneField extend_odd(const ScalarField& zeta) { return FullPlaneField(zeta); }

SupportStats support_stats(const ScalarField& zeta, double threshold, const Rect& domain) {
  if (threshold < 0.0) throw std::invalid_argument("support threshold must be >= 0");
  const GridSpec& g = zeta.grid();
  SupportStats s;
  s.centroid = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
  s.dist_to_boundary = std::numeric_limits<double>::infinity();

  auto inside = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.n1() && j < g.n2() && zeta(i, j) > threshold;
  };

  double mass = 0.0, m1 = 0.0, m2 = 0.0;
  std::vector<Point> rim;
  s.i_min = g.n1();
  s.j_min = g.n2();
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) {
      if (!inside(i, j)) continue;
      ++s.cells;
      const double v = zeta(i, j);
      const Point c = g.center(i, j);
      mass += v;
      m1 += v * c.x1;
      m2 += v * c.x2;
      s.i_min = std::min(s.i_min, i);
      s.i_max = std::max(s.i_max, i);
      s.j_min = std::min(s.j_min, j);
      s.j_max = std::max(s.j_max, j);
      const Rect cell = g.cell(i, j);
      const double d = std::min({cell.x1_min - domain.x1_min, domain.x1_max - cell.x1_max,
                                 cell.x2_min - domain.x2_min, domain.x2_max - cell.x2_max});
      s.dist_to_boundary = std::min(s.dist_to_boundary, d);
      // Extreme points of the support lie on its rim.
      if (!inside(i - 1, j) || !inside(i + 1, j) || !inside(i, j - 1) || !inside(i, j + 1)) {
        rim.push_back(c);
      }
    }
  }
  if (s.cells == 0) {
    s.i_min = 0;
    s.j_min = 0;
    s.dist_to_boundary = 0.0;
    return s;
  }
  s.empty = false;
  s.area = static_cast<double>(s.cells) * g.cell_area();
  if (mass > 0.0) {
    s.centroid = {m1 / mass, m2 / mass};
  }
  double diam2 = 0.0;
  for (std::size_t a = 0; a < rim.size(); ++a) {
    for (std::size_t b = a + 1; b < rim.size(); ++b) {
      const double d1 = rim[a].x1 - rim[b].x1;
      const double d2 = rim[a].x2 - rim[b].x2;
      diam2 = std::max(diam2, d1 * d1 + d2 * d2);
    }
  }
  s.diameter = std::sqrt(diam2);
  const double e1 = (s.i_max - s.i_min + 1) * g.h1();
  const double e2 = (s.j_max - s.j_min + 1) * g.h2();
  s.aspect_ratio = std::max(e1, e2) / std::min(e1, e2);
  return s;
}

SupportStats support_stats(const ScalarField& zeta, double threshold) {
  return support_stats(zeta, threshold, zeta.grid().window());
}

}  // namespace vpd
