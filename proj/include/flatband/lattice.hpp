#pragma once

// Clean cross-stitch lattice: two sublattices a, b per cell, all nearest
// neighbours interconnected, periodic boundary conditions.
//
// Site ordering: cell j, sublattice s (a = 0, b = 1) lives at row 2*j + s.
// Natural units hbar = 1 throughout; J and a are kept explicit.

#include <Eigen/Core>

#include <complex>
#include <span>
#include <vector>

namespace flatband {

using cplx = std::complex<double>;
using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;

inline constexpr double kHbar = 1.0;
inline constexpr double kPi = 3.14159265358979323846;

struct LatticeParams {
  double J = 1.0;     // hopping energy
  double t_ab = 0.0;  // dimensionless intracell hopping
  int N = 100;        // number of cells
  double a = 1.0;     // lattice constant

  void validate() const;
  int sites() const { return 2 * N; }
  double length() const { return N * a; }
  bool has_intersections() const;
};

struct BandStructure {
  LatticeParams params;

  double flat() const { return params.J * params.t_ab; }
  double dispersive(double k) const;
  double dispersive_slope(double k) const;
  double dispersive_min() const { return -4.0 * params.J - params.J * params.t_ab; }
  double dispersive_max() const { return 4.0 * params.J - params.J * params.t_ab; }
};

struct Intersection {
  int index = 1;          // 1 or 2
  double momentum = 0.0;  // hbar/a
  double velocity = 0.0;  // dE_d/dp at the crossing, a J / hbar
};

RealMatrix build_clean_hamiltonian(const LatticeParams& params);

// Empty when |t_ab| >= 2. Otherwise p_1 > 0 first, p_2 = -p_1, v_2 = -v_1.
std::vector<Intersection> find_intersections(const LatticeParams& params);

struct BandRow {
  double k;
  double e_flat;
  double e_disp;
};

// Momenta outside (-pi/a, pi/a] are folded back into the zone with a warning.
std::vector<BandRow> band_energies(const LatticeParams& params, std::span<const double> ks);

double fold_to_zone(double k, double a);

// Minimum-image difference p - q on the periodic zone.
double zone_difference(double p, double q, double a);

// p_n = 2 pi n / (N a), n = -floor(N/2)+1 .. floor(N/2), ascending (odd N: symmetric).
std::vector<double> momentum_grid(const LatticeParams& params);
int momentum_index_offset(int N);

// |f> = (|a> - |b>)/sqrt 2, |d> = (|a> + |b>)/sqrt 2, applied cell by cell.
// Layout is preserved: slot 2j holds f (or a), slot 2j+1 holds d (or b).
ComplexVector to_fd_basis(const ComplexVector& ab);
ComplexVector to_ab_basis(const ComplexVector& fd);

// One unitary per cell, returned as a 2x2 matrix acting on (a, b).
Eigen::Matrix2d fd_transform();

}  // namespace flatband
