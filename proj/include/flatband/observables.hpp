#pragma once

#include "flatband/lattice.hpp"
#include "flatband/state.hpp"

#include <span>
#include <vector>

namespace flatband {

// Inclusive window of cells whose minimum-image distance to center is <= half_width.
struct CarrierWindow {
  double center = 0.0;  // in cells
  int half_width = 8;

  void validate(int N) const;
  bool contains(int cell, int N) const;
};

Eigen::VectorXcd flatband_channel(const TwoBandState& state);
Eigen::VectorXcd dispersive_channel(const TwoBandState& state);

double flatband_population_full(const TwoBandState& state);
double flatband_population_partial(const TwoBandState& state, const CarrierWindow& window);
std::vector<double> flatband_position_density(const TwoBandState& state);

// Unitary DFT from cell amplitudes onto the momentum grid of momentum_grid():
// phi(p_n) = N^{-1/2} sum_j psi(j) exp(-i p_n x_j).
class MomentumTransform {
 public:
  explicit MomentumTransform(const LatticeParams& params);

  const std::vector<double>& momenta() const { return momenta_; }
  const ComplexMatrix& matrix() const { return dft_; }

  // Column-wise |DFT|^2; input is N x T.
  Eigen::MatrixXd densities(const ComplexMatrix& cell_amplitudes) const;

 private:
  std::vector<double> momenta_;
  ComplexMatrix dft_;
};

struct BandMomentumDensities {
  std::vector<double> momenta;
  std::vector<double> flat;
  std::vector<double> dispersive;
};

BandMomentumDensities momentum_density(const TwoBandState& state, const LatticeParams& params);

struct MomentumMoments {
  double mean = 0.0;
  double variance = 0.0;
};

// Circular mean, then variance from minimum-image differences about it. The
// density is renormalized internally. Warns when a noticeable fraction of the
// weight sits near the antipode of the mean, where the variance is ill-defined.
MomentumMoments momentum_moments(std::span<const double> momenta, std::span<const double> density, double a = 1.0,
                                 bool warn_on_wrap = true);
double momentum_variance(std::span<const double> momenta, std::span<const double> density, double a = 1.0);

// Weight fraction within 10% of the zone width from the antipode of the mean.
double antipodal_weight(std::span<const double> momenta, std::span<const double> density, double mean, double a);

// rho_f(x, x') averaged over the given states.
ComplexMatrix flatband_density_matrix(std::span<const TwoBandState> states);

// |rho_f(x, x + s)| averaged over x, for s = 0 .. N-1 (periodic).
std::vector<double> coherence_profile(const ComplexMatrix& rho_f);

}  // namespace flatband
