#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wide/grid.hpp"

namespace wide {

// Frames u_i on a uniform time mesh t_i = i * ds. Frames live in one shared
// buffer so relabelled views (rescale) do not copy.
class Trajectory {
public:
  Trajectory(GridPtr grid, double ds, std::size_t count, double eps = 1.0);
  Trajectory(GridPtr grid, double ds, double eps, std::shared_ptr<std::vector<double>> data);

  const GridPtr& grid() const { return grid_; }
  double ds() const { return ds_; }
  std::size_t count() const { return count_; }
  // epsilon of the run that produced the frames (metadata).
  double eps() const { return eps_; }
  double time(std::size_t i) const { return static_cast<double>(i) * ds_; }
  double end_time() const { return time(count_ - 1); }

  std::span<double> frame(std::size_t i);
  std::span<const double> frame(std::size_t i) const;
  Field field(std::size_t i) const;
  std::span<double> data() { return *data_; }
  std::span<const double> data() const { return *data_; }

  // Linear interpolation in time; clamps to the last frame beyond the end.
  void sample(double t, std::span<double> out) const;

  Trajectory clone() const;
  bool shares_frames_with(const Trajectory& other) const { return data_ == other.data_; }
  const std::shared_ptr<std::vector<double>>& buffer() const { return data_; }

private:
  GridPtr grid_;
  double ds_;
  std::size_t count_;
  double eps_;
  std::shared_ptr<std::vector<double>> data_;
};

// Relabels time by t = eps * s (step eps * ds); frames are shared.
Trajectory rescale(const Trajectory& u, double eps);

inline constexpr const char* kSchemaLine = "# wide-wave schema 1";

// CSV: schema comment, header "t,v0,...", one row per kept frame.
void write_csv(const Trajectory& u, const std::string& path, std::size_t stride = 1, double t_max = -1.0);

// Binary: "WIDE1", u64 dim, u64 points_per_axis, u64 count, f64 ds, f64 eps,
// then count * points frames of f64, all little-endian.
void write_binary(const Trajectory& u, const std::string& path);
Trajectory read_binary(const std::string& path, double length = kTwoPi);

}  // namespace wide
