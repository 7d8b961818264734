#pragma once

#include "wide/energy.hpp"
#include "wide/source.hpp"
#include "wide/timeweight.hpp"
#include "wide/trajectory.hpp"

namespace wide {

// Classical problem w'' = -grad W(w) + f, w(0) = w0, w'(0) = w1 on [0, T].
struct RefConfig {
  EnergySpec energy;
  SourceSpec source;
  Field w0;
  Field w1;
  double dt = 1e-3;
  double T = 1.0;

  // Throws unless dt sqrt(stiffness) <= 1.8 at w0 and the fields share a grid.
  void validate() const;
};

// Largest stable step with the 1.8 margin, scaled by safety.
double stable_step(const EnergySpec& energy, const Field& w0, double safety = 0.9);

// Stormer-Verlet (velocity form); frames at every step, physical time.
// Throws std::runtime_error naming the step if |w| exceeds 1e12.
Trajectory integrate(const RefConfig& c);

// Same, also returning the velocity frames.
struct RefSolution {
  Trajectory position;
  Trajectory velocity;
};
RefSolution integrate_with_velocity(const RefConfig& c);

// Per node |E(t) - E(0) - int_0^t (f, w')| with E = 1/2 |w'|^2 + W(w).
TimeSeries energy_identity_defect(const RefSolution& sol, const RefConfig& c);

}  // namespace wide
