#pragma once

#include "flatband/lattice.hpp"

#include <span>
#include <vector>

namespace flatband {

enum class Basis { ab, fd };

// Amplitudes over (cell, sublattice), slot 2j + s.
struct TwoBandState {
  ComplexVector amplitudes;
  Basis basis = Basis::ab;

  int cells() const { return static_cast<int>(amplitudes.size() / 2); }
  double norm() const { return amplitudes.norm(); }
  TwoBandState in_ab() const;
  TwoBandState in_fd() const;
};

// psi(x_j) ~ exp(-(x_j - x0)^2 / (2 sigma_x2) + i p0 x_j) in the f channel only,
// with x_j - x0 taken as the minimum image on the ring.
TwoBandState gaussian_flatband_state(const LatticeParams& params, double x0, double sigma_x2, double p0);

struct TimeGrid {
  std::vector<double> times;

  static constexpr double kDefaultBound = 1.0e4;

  static TimeGrid uniform(double t_max, int points);
  double t_max() const { return times.empty() ? 0.0 : times.back(); }
  void validate(double bound = kDefaultBound) const;
};

}  // namespace flatband
