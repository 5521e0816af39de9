#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace vpd {

struct Point {
  double x1 = 0.0;
  double x2 = 0.0;
};

double distance(Point a, Point b);

/// Axis-aligned rectangle in the (x1, x2) plane.
struct Rect {
  double x1_min = 0.0;
  double x1_max = 0.0;
  double x2_min = 0.0;
  double x2_max = 0.0;

  double area() const { return (x1_max - x1_min) * (x2_max - x2_min); }
  bool contains(Point p) const {
    return p.x1 > x1_min && p.x1 < x1_max && p.x2 > x2_min && p.x2 < x2_max;
  }
  bool contains(const Rect& inner) const {
    return inner.x1_min >= x1_min && inner.x1_max <= x1_max && inner.x2_min >= x2_min &&
           inner.x2_max <= x2_max;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

/// The region D = (r/2, 2r) x (-1, 1) in which the vortex core is sought.
Rect default_domain(double r);

/// Uniform cell-centred discretisation of a window lying in the half-plane x1 > 0.
///
/// Cells are indexed (i, j) with i along x1 and j along x2; storage is row-major in i,
/// so the flat index of (i, j) is i * n2 + j. n2 must be even so that the line through
/// the middle of the window is a cell interface and reflection in x2 maps cells onto cells.
class GridSpec {
 public:
  GridSpec(Rect window, int n1, int n2);

  const Rect& window() const { return window_; }
  int n1() const { return n1_; }
  int n2() const { return n2_; }
  double h1() const { return h1_; }
  double h2() const { return h2_; }
  double cell_area() const { return h1_ * h2_; }
  std::size_t size() const { return static_cast<std::size_t>(n1_) * static_cast<std::size_t>(n2_); }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(i) * static_cast<std::size_t>(n2_) + static_cast<std::size_t>(j);
  }
  double x1(int i) const { return window_.x1_min + (i + 0.5) * h1_; }
  // Computed about the window midline so that x2(j) and x2(n2-1-j) mirror exactly.
  double x2(int j) const { return x2_mid_ + (j + 0.5 - 0.5 * n2_) * h2_; }
  Point center(int i, int j) const { return {x1(i), x2(j)}; }
  Rect cell(int i, int j) const;

  /// Index of the cell containing p, or -1 components when p is outside the window.
  std::pair<int, int> locate(Point p) const;

  friend bool operator==(const GridSpec& a, const GridSpec& b) {
    return a.window_ == b.window_ && a.n1_ == b.n1_ && a.n2_ == b.n2_;
  }

 private:
  Rect window_;
  int n1_;
  int n2_;
  double h1_;
  double h2_;
  double x2_mid_;
};

/// Grid on the default window D for pair half-separation r.
GridSpec build_grid(double r, int n1, int n2);

enum class FieldRole { vorticity, stream, generic };

/// Piecewise-constant field on a GridSpec.
class ScalarField {
 public:
  explicit ScalarField(GridSpec grid, FieldRole role = FieldRole::generic);
  ScalarField(GridSpec grid, std::vector<double> values, FieldRole role = FieldRole::generic);

  const GridSpec& grid() const { return grid_; }
  FieldRole role() const { return role_; }

  double operator()(int i, int j) const { return values_[grid_.index(i, j)]; }
  double& operator()(int i, int j) { return values_[grid_.index(i, j)]; }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  /// Throws std::invalid_argument on non-finite values, or negative vorticity.
  void check_invariants() const;

  double max() const;
  double min() const;

  friend bool operator==(const ScalarField& a, const ScalarField& b) {
    return a.grid_ == b.grid_ && a.values_ == b.values_;
  }

 private:
  GridSpec grid_;
  FieldRole role_;
  std::vector<double> values_;
};

/// h1*h2*sum(values).
double integrate(const ScalarField& field);

/// h1*h2*sum(x1 * values), the impulse-like moment entering the energy.
double moment_x1(const ScalarField& field);

/// h1*h2*sum(a*b).
double inner_product(const ScalarField& a, const ScalarField& b);

/// a*u + b*v on a common grid.
ScalarField axpby(double a, const ScalarField& u, double b, const ScalarField& v);

/// True when field(i, j) == field(i, n2-1-j) bit for bit.
bool is_even_in_x2(const ScalarField& field);

/// Full-plane vortex pair built from a half-plane vorticity by odd reflection in x1.
///
/// Column k in [0, n1) is the mirror image of half-plane column n1-1-k, so x1 increases
/// with k over the whole 2*n1 columns; columns [n1, 2*n1) are the half-plane field itself.
/// The strip |x1| < x1_min carries no vorticity.
class FullPlaneField {
 public:
  explicit FullPlaneField(const ScalarField& half);

  const GridSpec& half_grid() const { return half_grid_; }
  int columns() const { return 2 * half_grid_.n1(); }
  int rows() const { return half_grid_.n2(); }
  double x1(int k) const;
  double x2(int j) const { return half_grid_.x2(j); }
  double operator()(int k, int j) const {
    return values_[static_cast<std::size_t>(k) * static_cast<std::size_t>(rows()) +
                   static_cast<std::size_t>(j)];
  }
  double integrate() const;
  /// Integral over x1 < 0 (left) or x1 > 0 (right).
  double integrate_left() const;
  double integrate_right() const;

 private:
  GridSpec half_grid_;
  std::vector<double> values_;
};

FullPlaneField extend_odd(const ScalarField& zeta);

struct SupportStats {
  bool empty = true;
  std::size_t cells = 0;
  double diameter = 0.0;
  Point centroid{};  // NaN components when empty
  double dist_to_boundary = 0.0;
  double area = 0.0;
  double aspect_ratio = 1.0;
  // Index bounding box of the support, inclusive.
  int i_min = 0, i_max = -1, j_min = 0, j_max = -1;
};

/// Statistics of {cells : value > threshold}. Distances to the boundary are measured from
/// cell faces to the edges of `domain`. Aspect ratio is the ratio of the larger to the
/// smaller side of the cell-covered bounding box.
SupportStats support_stats(const ScalarField& zeta, double threshold, const Rect& domain);
SupportStats support_stats(const ScalarField& zeta, double threshold = 0.0);

}  // namespace vpd
