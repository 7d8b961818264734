#include "wide/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <stdexcept>

namespace wide {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct SpaceGrid::Plans {
  fftw_plan r2c = nullptr;
  fftw_plan c2r = nullptr;
  ~Plans() {
    std::lock_guard<std::mutex> lock(planner_mutex());
    if (r2c) fftw_destroy_plan(r2c);
    if (c2r) fftw_destroy_plan(c2r);
  }
};

SpaceGrid::SpaceGrid(int dim, int points_per_axis, double length)
    : dim_(dim), n_(points_per_axis), length_(length) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("SpaceGrid: dim must be 1 or 2");
  if (n_ < 8 || (n_ & (n_ - 1)) != 0)
    throw std::invalid_argument("SpaceGrid: points_per_axis must be a power of two >= 8");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("SpaceGrid: length must be positive");
  const std::size_t n = static_cast<std::size_t>(n_);
  size_ = dim == 1 ? n : n * n;
  spectral_size_ = dim == 1 ? n / 2 + 1 : n * (n / 2 + 1);

  plans_ = std::make_shared<Plans>();
  std::vector<double> real(size_);
  std::vector<std::complex<double>> spec(spectral_size_);
  auto* c = reinterpret_cast<fftw_complex*>(spec.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard<std::mutex> lock(planner_mutex());
  if (dim == 1) {
    plans_->r2c = fftw_plan_dft_r2c_1d(n_, real.data(), c, flags);
    plans_->c2r = fftw_plan_dft_c2r_1d(n_, c, real.data(), flags | FFTW_DESTROY_INPUT);
  } else {
    plans_->r2c = fftw_plan_dft_r2c_2d(n_, n_, real.data(), c, flags);
    plans_->c2r = fftw_plan_dft_c2r_2d(n_, n_, c, real.data(), flags | FFTW_DESTROY_INPUT);
  }
  if (!plans_->r2c || !plans_->c2r) throw std::runtime_error("SpaceGrid: FFT planning failed");
}

GridPtr make_grid(int dim, int points_per_axis, double length) {
  return std::make_shared<const SpaceGrid>(dim, points_per_axis, length);
}

double SpaceGrid::cell_volume() const {
  const double h = spacing();
  return dim_ == 1 ? h : h * h;
}

double SpaceGrid::wavenumber(int j) const {
  const int signed_j = j <= n_ / 2 ? j : j - n_;
  return kTwoPi * signed_j / length_;
}

std::array<double, 2> SpaceGrid::mode_k(std::size_t mode) const {
  if (dim_ == 1) return {wavenumber(static_cast<int>(mode)), 0.0};
  const std::size_t half = static_cast<std::size_t>(n_ / 2 + 1);
  return {wavenumber(static_cast<int>(mode / half)), wavenumber(static_cast<int>(mode % half))};
}

bool SpaceGrid::mode_nyquist(std::size_t mode, int axis) const {
  const std::size_t nyq = static_cast<std::size_t>(n_ / 2);
  if (dim_ == 1) return axis == 0 && mode == nyq;
  const std::size_t half = nyq + 1;
  return axis == 0 ? mode / half == nyq : mode % half == nyq;
}

double SpaceGrid::mode_multiplicity(std::size_t mode) const {
  const std::size_t nyq = static_cast<std::size_t>(n_ / 2);
  const std::size_t last = dim_ == 1 ? mode : mode % (nyq + 1);
  return (last == 0 || last == nyq) ? 1.0 : 2.0;
}

void SpaceGrid::forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  if (in.size() != size_ || out.size() != spectral_size_)
    throw std::invalid_argument("SpaceGrid::forward: size mismatch");
  fftw_execute_dft_r2c(plans_->r2c, const_cast<double*>(in.data()),
                       reinterpret_cast<fftw_complex*>(out.data()));
}

void SpaceGrid::inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  if (in.size() != spectral_size_ || out.size() != size_)
    throw std::invalid_argument("SpaceGrid::inverse: size mismatch");
  std::vector<std::complex<double>> work(in.begin(), in.end());
  fftw_execute_dft_c2r(plans_->c2r, reinterpret_cast<fftw_complex*>(work.data()), out.data());
  const double scale = 1.0 / static_cast<double>(size_);
  for (double& x : out) x *= scale;
}

void SpaceGrid::apply_symbol(std::span<const double> in, std::span<double> out,
                             const std::function<std::complex<double>(std::size_t)>& symbol) const {
  std::vector<std::complex<double>> spec(spectral_size_);
  forward(in, spec);
  for (std::size_t m = 0; m < spectral_size_; ++m) spec[m] *= symbol(m);
  inverse(spec, out);
}

void SpaceGrid::derivative(std::span<const double> in, std::span<double> out, int ax, int ay) const {
  if (ax < 0 || ay < 0 || (dim_ == 1 && ay != 0))
    throw std::invalid_argument("SpaceGrid::derivative: invalid order");
  if (ax == 0 && ay == 0) {
    if (out.data() != in.data()) std::copy(in.begin(), in.end(), out.begin());
    return;
  }
  apply_symbol(in, out, [&](std::size_t m) {
    if ((ax % 2 == 1 && mode_nyquist(m, 0)) || (ay % 2 == 1 && mode_nyquist(m, 1)))
      return std::complex<double>(0.0);
    const auto k = mode_k(m);
    std::complex<double> f(1.0);
    const std::complex<double> ikx(0.0, k[0]), iky(0.0, k[1]);
    for (int i = 0; i < ax; ++i) f *= ikx;
    for (int i = 0; i < ay; ++i) f *= iky;
    return f;
  });
}

void SpaceGrid::laplace_power(std::span<const double> in, std::span<double> out, double power) const {
  apply_symbol(in, out, [&](std::size_t m) {
    const auto k = mode_k(m);
    const double k2 = k[0] * k[0] + k[1] * k[1];
    if (k2 == 0.0) return std::complex<double>(power == 0.0 ? 1.0 : 0.0);
    return std::complex<double>(std::pow(k2, power));
  });
}

double SpaceGrid::inner(std::span<const double> a, std::span<const double> b) const {
  if (a.size() != size_ || b.size() != size_) throw std::invalid_argument("SpaceGrid::inner: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < size_; ++i) s += a[i] * b[i];
  return s * cell_volume();
}

double SpaceGrid::norm(std::span<const double> a) const { return std::sqrt(inner(a, a)); }

void require_same_grid(const SpaceGrid& a, const SpaceGrid& b) {
  if (!(a == b)) throw std::invalid_argument("grid mismatch");
}

Field::Field(GridPtr g) : grid(std::move(g)) {
  if (!grid) throw std::invalid_argument("Field: null grid");
  values.assign(grid->size(), 0.0);
}

Field::Field(GridPtr g, std::vector<double> v) : grid(std::move(g)), values(std::move(v)) {
  if (!grid) throw std::invalid_argument("Field: null grid");
  if (values.size() != grid->size()) throw std::invalid_argument("Field: length does not match grid");
  for (double x : values) {
    if (!std::isfinite(x)) throw std::invalid_argument("Field: non-finite value");
  }
}

Field Field::from_function(GridPtr g, const std::function<double(double, double)>& f) {
  Field out(g);
  const int n = g->points_per_axis();
  if (g->dim() == 1) {
    for (int i = 0; i < n; ++i) out.values[i] = f(g->coord(i), 0.0);
  } else {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out.values[static_cast<std::size_t>(i) * n + j] = f(g->coord(i), g->coord(j));
  }
  return out;
}

double Field::inner(const Field& other) const {
  require_same_grid(*grid, *other.grid);
  return grid->inner(values, other.values);
}

}  // namespace wide
