#pragma once

#include <memory>

#include "vpd/geometry.hpp"

namespace vpd {

/// Free-space potential (1/2pi) log(1/|d|) of a unit point vortex.
double log_kernel(double d1, double d2);

/// Half-plane Green's function (1/2pi) log(|xbar - y| / |x - y|), xbar = (-x1, x2).
double green_function(Point x, Point y);

/// Exact integral of log(1/|p - y|) over y in `rect`.
double rect_log_integral(Point p, const Rect& rect);

/// Mean over an h1 x h2 cell of (1/2pi) log(1/|c - y|), c the cell centre.
/// Scales as (1/2pi)(log(1/h) + c0) for square cells.
double self_cell_coefficient(double h1, double h2);

enum class GreenStrategy { direct, fft };

/// Discrete Green's operator of -Laplace on the half-plane x1 > 0 with zero Dirichlet data.
///
/// Off-diagonal interactions use the midpoint rule on the kernel, the diagonal uses the
/// cell-averaged self coefficient, and the Dirichlet condition on x1 = 0 is imposed by an
/// odd image in x1. The fft strategy evaluates the two Toeplitz sums (direct and image)
/// as zero-padded convolutions; the direct strategy sums them cell by cell.
///
/// Immutable after construction; apply() may be called concurrently.
class GreenOperator {
 public:
  explicit GreenOperator(const GridSpec& grid, GreenStrategy strategy = GreenStrategy::fft);
  ~GreenOperator();
  GreenOperator(const GreenOperator&);
  GreenOperator& operator=(const GreenOperator&);
  GreenOperator(GreenOperator&&) noexcept;
  GreenOperator& operator=(GreenOperator&&) noexcept;

  const GridSpec& grid() const { return grid_; }
  GreenStrategy strategy() const { return strategy_; }
  double self_coefficient() const { return self_coefficient_; }

  /// G zeta at every cell centre of the window. When zeta is even in x2 the result is
  /// made exactly even as well.
  ScalarField apply(const ScalarField& zeta) const;

  /// G zeta at an arbitrary point of the half-plane, by direct summation. The cell
  /// containing x (if any) is integrated exactly.
  double potential_at(const ScalarField& zeta, Point x) const;

  /// Matrix entry: contribution of a unit-valued cell (i', j') to the potential at the
  /// centre of cell (i, j), including the cell area.
  double coefficient(int i, int j, int ip, int jp) const;

 private:
  ScalarField apply_direct(const ScalarField& zeta) const;
  ScalarField apply_fft(const ScalarField& zeta) const;

  struct FftPlan;
  GridSpec grid_;
  GreenStrategy strategy_;
  double self_coefficient_;
  std::shared_ptr<const FftPlan> fft_;
};

ScalarField green_apply(const GreenOperator& op, const ScalarField& zeta);

/// integral of eta * G eta.
double quadratic_form(const GreenOperator& op, const ScalarField& eta);

/// psi = G zeta - W x1 - mu.
ScalarField stream_total(const GreenOperator& op, const ScalarField& zeta, double W, double mu);

/// Same, from an already computed G zeta.
ScalarField stream_from_potential(const ScalarField& g_zeta, double W, double mu);

struct VectorField {
  ScalarField v1;
  ScalarField v2;
};

/// v = (d psi/d x2, -d psi/d x1); centred differences inside, second-order one-sided at
/// the window edges.
VectorField velocity_from_stream(const ScalarField& psi);

}  // namespace vpd
