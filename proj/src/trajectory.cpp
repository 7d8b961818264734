#include "wide/trajectory.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace wide {

Trajectory::Trajectory(GridPtr grid, double ds, std::size_t count, double eps)
    : grid_(std::move(grid)), ds_(ds), count_(count), eps_(eps) {
  if (!grid_) throw std::invalid_argument("Trajectory: null grid");
  if (!(ds > 0.0)) throw std::invalid_argument("Trajectory: ds must be positive");
  if (count < 2) throw std::invalid_argument("Trajectory: need at least 2 frames");
  data_ = std::make_shared<std::vector<double>>(count * grid_->size(), 0.0);
}

Trajectory::Trajectory(GridPtr grid, double ds, double eps, std::shared_ptr<std::vector<double>> data)
    : grid_(std::move(grid)), ds_(ds), eps_(eps), data_(std::move(data)) {
  if (!grid_ || !data_) throw std::invalid_argument("Trajectory: null grid or data");
  if (!(ds > 0.0)) throw std::invalid_argument("Trajectory: ds must be positive");
  if (data_->size() % grid_->size() != 0) throw std::invalid_argument("Trajectory: data size mismatch");
  count_ = data_->size() / grid_->size();
  if (count_ < 2) throw std::invalid_argument("Trajectory: need at least 2 frames");
}

std::span<double> Trajectory::frame(std::size_t i) {
  if (i >= count_) throw std::out_of_range("Trajectory::frame");
  return {data_->data() + i * grid_->size(), grid_->size()};
}

std::span<const double> Trajectory::frame(std::size_t i) const {
  if (i >= count_) throw std::out_of_range("Trajectory::frame");
  return {data_->data() + i * grid_->size(), grid_->size()};
}

Field Trajectory::field(std::size_t i) const {
  const auto f = frame(i);
  return Field(grid_, std::vector<double>(f.begin(), f.end()));
}

void Trajectory::sample(double t, std::span<double> out) const {
  if (!(t >= 0.0)) throw std::invalid_argument("Trajectory::sample: negative time");
  const double x = t / ds_;
  std::size_t j = static_cast<std::size_t>(std::floor(x));
  if (j >= count_ - 1) {
    const auto f = frame(count_ - 1);
    std::copy(f.begin(), f.end(), out.begin());
    return;
  }
  const double w = x - static_cast<double>(j);
  const auto a = frame(j), b = frame(j + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - w) * a[i] + w * b[i];
}

Trajectory Trajectory::clone() const {
  return Trajectory(grid_, ds_, eps_, std::make_shared<std::vector<double>>(*data_));
}

Trajectory rescale(const Trajectory& u, double eps) {
  if (!(eps > 0.0)) throw std::invalid_argument("rescale: eps must be positive");
  return Trajectory(u.grid(), eps * u.ds(), u.eps(), u.buffer());
}

void write_csv(const Trajectory& u, const std::string& path, std::size_t stride, double t_max) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw std::runtime_error("cannot write " + path);
  std::fprintf(f, "%s\nt", kSchemaLine);
  for (std::size_t j = 0; j < u.grid()->size(); ++j) std::fprintf(f, ",v%zu", j);
  std::fputc('\n', f);
  if (stride == 0) stride = 1;
  for (std::size_t i = 0; i < u.count(); i += stride) {
    if (t_max >= 0.0 && u.time(i) > t_max + 1e-12) break;
    std::fprintf(f, "%.17g", u.time(i));
    for (double v : u.frame(i)) std::fprintf(f, ",%.17g", v);
    std::fputc('\n', f);
  }
  if (std::fclose(f) != 0) throw std::runtime_error("write failed: " + path);
}

namespace {

template <class T>
void put_le(std::ofstream& out, T value) {
  static_assert(sizeof(T) == 8);
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(bits >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

template <class T>
T get_le(std::ifstream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  if (!in) throw std::runtime_error("binary trajectory: truncated file");
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return std::bit_cast<T>(bits);
}

}  // namespace

void write_binary(const Trajectory& u, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out.write("WIDE1", 5);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(u.grid()->dim()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(u.grid()->points_per_axis()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(u.count()));
  put_le<double>(out, u.ds());
  put_le<double>(out, u.eps());
  for (double v : u.data()) put_le<double>(out, v);
  if (!out) throw std::runtime_error("write failed: " + path);
}

Trajectory read_binary(const std::string& path, double length) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  char magic[5];
  in.read(magic, 5);
  if (!in || std::memcmp(magic, "WIDE1", 5) != 0) throw std::runtime_error(path + ": bad magic");
  const auto dim = get_le<std::uint64_t>(in);
  const auto ppa = get_le<std::uint64_t>(in);
  const auto count = get_le<std::uint64_t>(in);
  const double ds = get_le<double>(in);
  const double eps = get_le<double>(in);
  if (dim < 1 || dim > 2 || ppa > (1u << 16) || count > (1u << 26))
    throw std::runtime_error(path + ": implausible header");
  auto grid = make_grid(static_cast<int>(dim), static_cast<int>(ppa), length);
  auto data = std::make_shared<std::vector<double>>(static_cast<std::size_t>(count) * grid->size());
  for (double& v : *data) v = get_le<double>(in);
  return Trajectory(grid, ds, eps, data);
}

}  // namespace wide
