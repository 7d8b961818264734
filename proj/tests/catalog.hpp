#pragma once

#include <random>
#include <vector>

#include "wide/energy.hpp"

namespace testcat {

inline std::vector<wide::EnergySpec> all_specs() {
  using namespace wide;
  return {
      EnergySpec(ZeroEnergy{}),
      EnergySpec(GeneralSemilinear{1.0, {}}),
      EnergySpec(GeneralSemilinear{1.0, {{0, 1.0, 2.0}}}),
      EnergySpec(GeneralSemilinear{2.0, {}}),
      EnergySpec(GeneralSemilinear{1.0, {{0, 1.0, 4.0}}}),
      EnergySpec(GeneralSemilinear{1.0, {{0, 0.5, 3.0}}}),
      EnergySpec(SineGordon{}),
      EnergySpec(PLaplacian{4.0, std::nullopt, 1e-8}),
      EnergySpec(PLaplacian{3.0, PLaplacian::Lower{4.0, 1.0}, 1e-8}),
      EnergySpec(PLaplacian{1.5, std::nullopt, 1e-2}),
      EnergySpec(GeneralSemilinear{2.0, {{1, 1.0, 4.0}, {0, 1.0, 3.0}}}),
      EnergySpec(Kirchhoff{}),
      EnergySpec(FractionalNLW{0.5, 1.0, 4.0}),
      EnergySpec(FractionalNLW{0.3, 0.0, 4.0}),
  };
}

// Smooth random field: a few low Fourier modes with random amplitudes.
inline wide::Field random_field(const wide::GridPtr& g, std::mt19937_64& rng, double amplitude = 1.0,
                                int modes = 4) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double k0 = wide::kTwoPi / g->length();
  struct M {
    double a, kx, ky, ph;
  };
  std::vector<M> ms;
  for (int j = 0; j < modes; ++j) {
    const int kx = static_cast<int>(std::floor(4.0 * (u(rng) + 1.0)));
    const int ky = g->dim() == 2 ? static_cast<int>(std::floor(3.0 * (u(rng) + 1.0))) - 3 : 0;
    ms.push_back({amplitude * u(rng) / (1.0 + j), kx * k0, ky * k0, 3.14159 * u(rng)});
  }
  return wide::Field::from_function(g, [&](double x, double y) {
    double s = 0.0;
    for (const M& m : ms) s += m.a * std::cos(m.kx * x + m.ky * y + m.ph);
    return s;
  });
}

}  // namespace testcat
