#include "vpd/kernel.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace vpd {

namespace {

constexpr double kInvTwoPi = 0.5 / std::numbers::pi;

// FFTW planning is not thread-safe; execution with the new-array interface is.
std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

// Antiderivative of (1/2) log(u^2 + v^2) in both variables.
double log_antiderivative(double u, double v) {
  double out = 0.0;
  const double r2 = u * u + v * v;
  if (u != 0.0 && v != 0.0) out += u * v * std::log(r2) - 3.0 * u * v;
  if (u != 0.0) out += u * u * std::atan(v / u);
  if (v != 0.0) out += v * v * std::atan(u / v);
  return 0.5 * out;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};
using RealBuffer = std::unique_ptr<double[], FftwFree>;
using ComplexBuffer = std::unique_ptr<fftw_complex[], FftwFree>;

RealBuffer alloc_real(std::size_t n) { return RealBuffer(fftw_alloc_real(n)); }
ComplexBuffer alloc_complex(std::size_t n) { return ComplexBuffer(fftw_alloc_complex(n)); }

}  // namespace

double log_kernel(double d1, double d2) {
  return -0.5 * kInvTwoPi * std::log(d1 * d1 + d2 * d2);
}

double green_function(Point x, Point y) {
  const double direct2 = (x.x1 - y.x1) * (x.x1 - y.x1) + (x.x2 - y.x2) * (x.x2 - y.x2);
  const double image2 = (x.x1 + y.x1) * (x.x1 + y.x1) + (x.x2 - y.x2) * (x.x2 - y.x2);
  return 0.5 * kInvTwoPi * std::log(image2 / direct2);
}

double rect_log_integral(Point p, const Rect& rect) {
  const double a1 = rect.x1_min - p.x1, b1 = rect.x1_max - p.x1;
  const double a2 = rect.x2_min - p.x2, b2 = rect.x2_max - p.x2;
  const double log_r = log_antiderivative(b1, b2) - log_antiderivative(a1, b2) -
                       log_antiderivative(b1, a2) + log_antiderivative(a1, a2);
  return -log_r;
}

double self_cell_coefficient(double h1, double h2) {
  if (!(h1 > 0.0) || !(h2 > 0.0)) throw std::invalid_argument("cell sizes must be positive");
  // Four congruent quadrants around the centre.
  const double quadrant = -log_antiderivative(0.5 * h1, 0.5 * h2);
  return kInvTwoPi * 4.0 * quadrant / (h1 * h2);
}

struct GreenOperator::FftPlan {
  int p1 = 0;  // padded sizes
  int p2 = 0;
  int p2c = 0;  // complex columns, p2/2 + 1
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  ComplexBuffer direct_hat;  // transform of the free-space kernel
  ComplexBuffer image_hat;   // transform of the image kernel

  FftPlan(const GridSpec& g, double self_coefficient);
  ~FftPlan() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  std::size_t real_size() const { return static_cast<std::size_t>(p1) * p2; }
  std::size_t complex_size() const { return static_cast<std::size_t>(p1) * p2c; }
};

GreenOperator::FftPlan::FftPlan(const GridSpec& g, double self_coefficient) {
  const int n1 = g.n1(), n2 = g.n2();
  p1 = 2 * n1;
  p2 = 2 * n2;
  p2c = p2 / 2 + 1;
  RealBuffer real = alloc_real(real_size());
  ComplexBuffer spec = alloc_complex(complex_size());
  {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    forward = fftw_plan_dft_r2c_2d(p1, p2, real.get(), spec.get(), FFTW_ESTIMATE);
    backward = fftw_plan_dft_c2r_2d(p1, p2, spec.get(), real.get(), FFTW_ESTIMATE);
  }
  if (!forward || !backward) throw std::runtime_error("FFTW planning failed");

  const double h1 = g.h1(), h2 = g.h2(), area = g.cell_area();
  const double two_x1_min = 2.0 * g.window().x1_min;
  auto offset = [](int a, int n, int p) { return a < n ? a : (a > n ? a - p : 0); };

  direct_hat = alloc_complex(complex_size());
  image_hat = alloc_complex(complex_size());

  for (int a = 0; a < p1; ++a) {
    const int d1 = offset(a, n1, p1);
    for (int b = 0; b < p2; ++b) {
      const int d2 = offset(b, n2, p2);
      double k = 0.0;
      if (a != n1 && b != n2) {
        k = (d1 == 0 && d2 == 0) ? area * self_coefficient : area * log_kernel(d1 * h1, d2 * h2);
      }
      real[static_cast<std::size_t>(a) * p2 + b] = k;
    }
  }
  fftw_execute_dft_r2c(forward, real.get(), direct_hat.get());

  for (int a = 0; a < p1; ++a) {
    const int d1 = offset(a, n1, p1);
    for (int b = 0; b < p2; ++b) {
      const int d2 = offset(b, n2, p2);
      double k = 0.0;
      if (a != n1 && b != n2) {
        k = area * log_kernel(two_x1_min + (d1 + n1) * h1, d2 * h2);
      }
      real[static_cast<std::size_t>(a) * p2 + b] = k;
    }
  }
  fftw_execute_dft_r2c(forward, real.get(), image_hat.get());
}

GreenOperator::GreenOperator(const GridSpec& grid, GreenStrategy strategy)
    : grid_(grid), strategy_(strategy), self_coefficient_(self_cell_coefficient(grid.h1(), grid.h2())) {
  if (!std::isfinite(self_coefficient_)) throw std::runtime_error("self-cell coefficient not finite");
  if (strategy_ == GreenStrategy::fft) fft_ = std::make_shared<const FftPlan>(grid_, self_coefficient_);
}

GreenOperator::~GreenOperator() = default;
GreenOperator::GreenOperator(const GreenOperator&) = default;
GreenOperator& GreenOperator::operator=(const GreenOperator&) = default;
GreenOperator::GreenOperator(GreenOperator&&) noexcept = default;
GreenOperator& GreenOperator::operator=(GreenOperator&&) noexcept = default;

double GreenOperator::coefficient(int i, int j, int ip, int jp) const {
  const double area = grid_.cell_area();
  const double d1 = (i - ip) * grid_.h1();
  const double d2 = (j - jp) * grid_.h2();
  const double direct = (i == ip && j == jp) ? area * self_coefficient_ : area * log_kernel(d1, d2);
  const double s1 = 2.0 * grid_.window().x1_min + (i + ip + 1) * grid_.h1();
  return direct - area * log_kernel(s1, d2);
}

ScalarField GreenOperator::apply(const ScalarField& zeta) const {
  if (!(zeta.grid() == grid_)) throw std::invalid_argument("green_apply: grid mismatch");
  ScalarField out = strategy_ == GreenStrategy::fft ? apply_fft(zeta) : apply_direct(zeta);
  if (is_even_in_x2(zeta)) {
    const int n2 = grid_.n2();
    for (int i = 0; i < grid_.n1(); ++i) {
      for (int j = 0; j < n2 / 2; ++j) {
        const double m = 0.5 * (out(i, j) + out(i, n2 - 1 - j));
        out(i, j) = m;
        out(i, n2 - 1 - j) = m;
      }
    }
  }
  return out;
}

ScalarField GreenOperator::apply_direct(const ScalarField& zeta) const {
  const int n1 = grid_.n1(), n2 = grid_.n2();
  ScalarField out(grid_, FieldRole::stream);
  std::vector<std::size_t> nonzero;
  for (std::size_t k = 0; k < zeta.size(); ++k) {
    if (zeta[k] != 0.0) nonzero.push_back(k);
  }
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      double sum = 0.0;
      for (std::size_t k : nonzero) {
        const int ip = static_cast<int>(k / n2);
        const int jp = static_cast<int>(k % n2);
        sum += coefficient(i, j, ip, jp) * zeta[k];
      }
      out(i, j) = sum;
    }
  }
  return out;
}

ScalarField GreenOperator::apply_fft(const ScalarField& zeta) const {
  const FftPlan& f = *fft_;
  const int n1 = grid_.n1(), n2 = grid_.n2();
  RealBuffer real = alloc_real(f.real_size());
  ComplexBuffer zhat = alloc_complex(f.complex_size());
  ComplexBuffer ihat = alloc_complex(f.complex_size());

  std::fill(real.get(), real.get() + f.real_size(), 0.0);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) real[static_cast<std::size_t>(i) * f.p2 + j] = zeta(i, j);
  }
  fftw_execute_dft_r2c(f.forward, real.get(), zhat.get());

  // Field flipped in x1 for the image sum.
  std::fill(real.get(), real.get() + f.real_size(), 0.0);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) real[static_cast<std::size_t>(n1 - 1 - i) * f.p2 + j] = zeta(i, j);
  }
  fftw_execute_dft_r2c(f.forward, real.get(), ihat.get());

  for (std::size_t k = 0; k < f.complex_size(); ++k) {
    const double zr = zhat[k][0], zi = zhat[k][1];
    const double ir = ihat[k][0], ii = ihat[k][1];
    const double dr = f.direct_hat[k][0], di = f.direct_hat[k][1];
    const double mr = f.image_hat[k][0], mi = f.image_hat[k][1];
    zhat[k][0] = (zr * dr - zi * di) - (ir * mr - ii * mi);
    zhat[k][1] = (zr * di + zi * dr) - (ir * mi + ii * mr);
  }
  fftw_execute_dft_c2r(f.backward, zhat.get(), real.get());

  const double scale = 1.0 / (static_cast<double>(f.p1) * f.p2);
  ScalarField out(grid_, FieldRole::stream);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) out(i, j) = scale * real[static_cast<std::size_t>(i) * f.p2 + j];
  }
  return out;
}

double GreenOperator::potential_at(const ScalarField& zeta, Point x) const {
  if (!(zeta.grid() == grid_)) throw std::invalid_argument("potential_at: grid mismatch");
  if (x.x1 < 0.0) throw std::invalid_argument("potential_at: point outside the half-plane");
  const auto [ci, cj] = grid_.locate(x);
  const double area = grid_.cell_area();
  const Point mirror{-x.x1, x.x2};
  double sum = 0.0;
  for (int i = 0; i < grid_.n1(); ++i) {
    for (int j = 0; j < grid_.n2(); ++j) {
      const double v = zeta(i, j);
      if (v == 0.0) continue;
      const Point y = grid_.center(i, j);
      double direct;
      if (i == ci && j == cj) {
        direct = kInvTwoPi * rect_log_integral(x, grid_.cell(i, j));
      } else {
        direct = area * log_kernel(x.x1 - y.x1, x.x2 - y.x2);
      }
      sum += v * (direct - area * log_kernel(mirror.x1 - y.x1, mirror.x2 - y.x2));
    }
  }
  return sum;
}

ScalarField green_apply(const GreenOperator& op, const ScalarField& zeta) { return op.apply(zeta); }

double quadratic_form(const GreenOperator& op, const ScalarField& eta) {
  return inner_product(eta, op.apply(eta));
}

ScalarField stream_from_potential(const ScalarField& g_zeta, double W, double mu) {
  const GridSpec& g = g_zeta.grid();
  ScalarField psi(g, FieldRole::stream);
  for (int i = 0; i < g.n1(); ++i) {
    const double lin = W * g.x1(i) + mu;
    for (int j = 0; j < g.n2(); ++j) psi(i, j) = g_zeta(i, j) - lin;
  }
  return psi;
}

ScalarField stream_total(const GreenOperator& op, const ScalarField& zeta, double W, double mu) {
  return stream_from_potential(op.apply(zeta), W, mu);
}

namespace {

// Derivative along a line of n samples with spacing h at index k.
double line_derivative(const std::vector<double>& f, int k, double h) {
  const int n = static_cast<int>(f.size());
  if (n == 2) return (f[1] - f[0]) / h;
  if (k == 0) return (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
  if (k == n - 1) return (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
  return (f[k + 1] - f[k - 1]) / (2.0 * h);
}

}  // namespace

VectorField velocity_from_stream(const ScalarField& psi) {
  const GridSpec& g = psi.grid();
  VectorField v{ScalarField(g), ScalarField(g)};
  std::vector<double> line;
  line.resize(g.n2());
  for (int i = 0; i < g.n1(); ++i) {
    for (int j = 0; j < g.n2(); ++j) line[j] = psi(i, j);
    for (int j = 0; j < g.n2(); ++j) v.v1(i, j) = line_derivative(line, j, g.h2());
  }
  line.resize(g.n1());
  for (int j = 0; j < g.n2(); ++j) {
    for (int i = 0; i < g.n1(); ++i) line[i] = psi(i, j);
    for (int i = 0; i < g.n1(); ++i) v.v2(i, j) = -line_derivative(line, i, g.h1());
  }
  return v;
}

}  // namespace vpd
