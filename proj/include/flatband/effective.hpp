#pragma once

// Perturbative flatband dynamics of the disorder-averaged state: momentum-
// resolved decay into the dispersive band near each band intersection, and
// trace-preserving dephasing inside the flatband.
//
// Momentum arguments named `dp` are measured from an intersection (p - p_j).

#include "flatband/disorder.hpp"
#include "flatband/lattice.hpp"
#include "flatband/state.hpp"

#include <vector>

namespace flatband {

// sin(x)/x, with the series used for |x| < 1e-4.
double sinc(double x);

struct QuadratureConfig {
  int intervals = 2048;        // trapezoid panels over [-q_max, q_max]
  double tail = 1e-12;         // q_max chosen so G_0(q_max) = tail * G_0(0)
  double tolerance = 1e-8;     // relative agreement required between h and 2h rules
};

class EffectiveModel {
 public:
  EffectiveModel(const LatticeParams& lattice, const DisorderSpec& disorder, QuadratureConfig quad = {});

  const LatticeParams& lattice() const { return lattice_; }
  const DisorderSpec& disorder() const { return spectral_.spec(); }
  const SpectralDensity& spectral() const { return spectral_; }
  const std::vector<Intersection>& intersections() const { return intersections_; }
  double q_max() const { return q_max_; }

  // Gamma_t(dp) = (4/hbar^2) \int dq G~_1(q) t sinc[v t (q - dp)/hbar]
  double decay_rate(double dp, double t, double velocity) const;
  // Gamma-bar_t(dp) = (2/hbar^2) \int dq G~_1(q) t^2 sinc^2[v t (q - dp)/(2 hbar)]
  double decay_exposure(double dp, double t, double velocity) const;
  // Long-time form pi t (1 - delta) G_0(dp) / (hbar |v|)
  double decay_exposure_asymptotic(double dp, double t, double velocity) const;

  // Rate at absolute momentum p from one intersection, minimum image on the zone.
  double decay_rate_at(double p, double t, const Intersection& x) const;
  double decay_exposure_at(double p, double t, const Intersection& x) const;

  // F-bar_t(x) by quadrature, and the closed form t^2 (1+delta)/2 (C(0) - C(x)) / hbar^2.
  double dephasing_exponent(double x, double t) const;
  double dephasing_exponent_closed(double x, double t) const;

  // <dp^2>_0 + (1 + delta) C_0 t^2 / ell^2. Gaussian disorder only.
  double variance_prediction(double t, double initial_variance) const;

  // \int dq G~_0(q) over the whole line (equals (1+delta)/2 C(0)).
  double dephasing_weight() const;

 private:
  LatticeParams lattice_;
  SpectralDensity spectral_;
  QuadratureConfig quad_;
  std::vector<Intersection> intersections_;
  double q_max_ = 0.0;
  double h_ = 0.0;
  std::vector<double> nodes_;
  std::vector<double> g_tilde0_;  // G~_0 at the quadrature nodes
  std::vector<double> g_tilde1_;
};

// Flatband momentum distribution on momentum_grid().
struct MomentumDensity {
  std::vector<double> values;
  double time = 0.0;

  double total() const;
};

struct MasterOptions {
  bool dephasing = true;
  bool decay = true;
  int only_intersection = 0;   // 0: all intersections, otherwise the 1-based index
  bool asymptotic_rates = false;
  double dt = 0.0;              // 0: automatic
};

struct MomentumTrajectory {
  std::vector<double> momenta;
  std::vector<MomentumDensity> states;  // one per output time
  double dt = 0.0;
  int halvings = 0;
  std::size_t steps = 0;
};

// d/dt rho(p) = -sum_j Gamma_t^{(j)}(p - p_j) rho(p) + (2t/hbar^2) \int dq G~_0(q) [rho(p-q) - rho(p)],
// discretized as a circular convolution on the momentum grid, integrated with
// classical RK4 and time-dependent coefficients at the stage times.
MomentumTrajectory evolve_momentum_master(const MomentumDensity& initial, const EffectiveModel& model,
                                          const TimeGrid& grid, const MasterOptions& options = {});

// rho_0(p) exp(-Gamma-bar_t(p - p_j)) for a single intersection.
MomentumDensity direct_decay_solution(const MomentumDensity& initial, double t, const EffectiveModel& model,
                                      int intersection = 1);

struct LifetimeEstimate {
  double tau = 0.0;
  Intersection nearest;
  bool unbounded = false;  // delta = -1: no dephasing channel
};

// tau = |p_0 - p_j| ell / sqrt(C_0 (1 + delta)), p_j the nearest intersection.
LifetimeEstimate lifetime_estimate(double p0, const EffectiveModel& model);

}  // namespace flatband
