#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <vector>

namespace wide {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Periodic torus [0, L)^dim sampled on points_per_axis^dim nodes. Values are
// stored row-major with x as the slow axis. The spectral side follows the
// real-to-complex layout: in 2D, mode (i, j) with i in [0, n) along x and
// j in [0, n/2] along y.
class SpaceGrid {
public:
  SpaceGrid(int dim, int points_per_axis, double length = kTwoPi);

  int dim() const { return dim_; }
  int points_per_axis() const { return n_; }
  double length() const { return length_; }
  std::size_t size() const { return size_; }
  double spacing() const { return length_ / n_; }
  double cell_volume() const;
  double coord(int i) const { return i * spacing(); }

  std::size_t spectral_size() const { return spectral_size_; }
  // Signed wavenumber 2 pi j / L of axis index j (Nyquist taken positive).
  double wavenumber(int j) const;
  std::array<double, 2> mode_k(std::size_t mode) const;
  // True if the mode sits on the Nyquist index along the given axis.
  bool mode_nyquist(std::size_t mode, int axis) const;
  // Number of full-spectrum modes represented by this r2c mode (1 or 2).
  double mode_multiplicity(std::size_t mode) const;

  void forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // Normalized inverse: inverse(forward(v)) == v.
  void inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

  // out = F^{-1}[ symbol(mode) * F[in] ]. in and out may alias.
  void apply_symbol(std::span<const double> in, std::span<double> out,
                    const std::function<std::complex<double>(std::size_t mode)>& symbol) const;
  // out = d^ax/dx^ax d^ay/dy^ay in. Odd orders along an axis drop that
  // axis' Nyquist mode so the discrete operator stays skew-adjoint.
  void derivative(std::span<const double> in, std::span<double> out, int ax, int ay) const;
  // out = |k|^{2 power} in, with 0^0 = 1.
  void laplace_power(std::span<const double> in, std::span<double> out, double power) const;

  double inner(std::span<const double> a, std::span<const double> b) const;
  double norm(std::span<const double> a) const;

  bool operator==(const SpaceGrid& other) const {
    return dim_ == other.dim_ && n_ == other.n_ && length_ == other.length_;
  }

private:
  struct Plans;
  int dim_;
  int n_;
  double length_;
  std::size_t size_;
  std::size_t spectral_size_;
  std::shared_ptr<Plans> plans_;
};

using GridPtr = std::shared_ptr<const SpaceGrid>;

GridPtr make_grid(int dim, int points_per_axis, double length = kTwoPi);

// A real field on a grid.
struct Field {
  GridPtr grid;
  std::vector<double> values;

  explicit Field(GridPtr g);
  Field(GridPtr g, std::vector<double> v);

  static Field from_function(GridPtr g, const std::function<double(double, double)>& f);

  std::size_t size() const { return values.size(); }
  double norm() const { return grid->norm(values); }
  double inner(const Field& other) const;
};

// Throws invalid_argument unless both fields live on equal grids.
void require_same_grid(const SpaceGrid& a, const SpaceGrid& b);

}  // namespace wide
