#include "flatband/lattice.hpp"

#include "flatband/errors.hpp"

#include <cmath>
#include <string>

namespace flatband {

void LatticeParams::validate() const {
  if (N < 4) throw ParameterError("N must be at least 4, got " + std::to_string(N));
  if (!(J > 0.0) || !std::isfinite(J)) throw ParameterError("J must be positive");
  if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("a must be positive");
  if (!std::isfinite(t_ab)) throw ParameterError("t_ab must be finite");
}

bool LatticeParams::has_intersections() const { return std::abs(t_ab) < 2.0; }

double BandStructure::dispersive(double k) const {
  return -4.0 * params.J * std::cos(k * params.a / kHbar) - params.J * params.t_ab;
}

double BandStructure::dispersive_slope(double k) const {
  return 4.0 * params.J * (params.a / kHbar) * std::sin(k * params.a / kHbar);
}

RealMatrix build_clean_hamiltonian(const LatticeParams& params) {
  params.validate();
  const int n = params.N;
  const double J = params.J;
  RealMatrix h = RealMatrix::Zero(2 * n, 2 * n);
  for (int j = 0; j < n; ++j) {
    const int right = (j + 1) % n;
    // -J (|j><j+1| + h.c.) (x) (1 + sigma_x): couples every site of j to every site of j+1.
    for (int s = 0; s < 2; ++s) {
      for (int s2 = 0; s2 < 2; ++s2) {
        h(2 * j + s, 2 * right + s2) += -J;
        h(2 * right + s2, 2 * j + s) += -J;
      }
    }
    h(2 * j, 2 * j + 1) += -J * params.t_ab;
    h(2 * j + 1, 2 * j) += -J * params.t_ab;
  }
  return h;
}

std::vector<Intersection> find_intersections(const LatticeParams& params) {
  params.validate();
  if (!params.has_intersections()) return {};
  const BandStructure bands{params};
  const double p1 = (kHbar / params.a) * std::acos(-params.t_ab / 2.0);
  const double v1 = bands.dispersive_slope(p1);
  return {Intersection{1, p1, v1}, Intersection{2, -p1, -v1}};
}

double fold_to_zone(double k, double a) {
  const double period = 2.0 * kPi * kHbar / a;
  const double half = 0.5 * period;
  double folded = std::fmod(k + half, period);
  if (folded <= 0.0) folded += period;
  return folded - half;  // (-half, half]
}

double zone_difference(double p, double q, double a) {
  const double period = 2.0 * kPi * kHbar / a;
  double d = std::remainder(p - q, period);
  if (d == -0.5 * period) d = 0.5 * period;
  return d;
}

std::vector<BandRow> band_energies(const LatticeParams& params, std::span<const double> ks) {
  params.validate();
  const BandStructure bands{params};
  const double edge = kPi * kHbar / params.a;
  std::vector<BandRow> rows;
  rows.reserve(ks.size());
  bool warned = false;
  for (double k : ks) {
    double kk = k;
    if (k <= -edge || k > edge) {
      kk = fold_to_zone(k, params.a);
      if (!warned) {
        warn("band_energies: momentum " + std::to_string(k) + " outside the Brillouin zone, folded back");
        warned = true;
      }
    }
    rows.push_back({kk, bands.flat(), bands.dispersive(kk)});
  }
  return rows;
}

int momentum_index_offset(int N) { return N % 2 == 0 ? -(N / 2) + 1 : -(N / 2); }

std::vector<double> momentum_grid(const LatticeParams& params) {
  std::vector<double> p(static_cast<std::size_t>(params.N));
  const int n0 = momentum_index_offset(params.N);
  for (int i = 0; i < params.N; ++i) {
    p[static_cast<std::size_t>(i)] = 2.0 * kPi * kHbar * (n0 + i) / (params.N * params.a);
  }
  return p;
}

Eigen::Matrix2d fd_transform() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2d u;
  u << r, -r,  // <f| = (<a| - <b|)/sqrt 2
      r, r;    // <d| = (<a| + <b|)/sqrt 2
  return u;
}

ComplexVector to_fd_basis(const ComplexVector& ab) {
  if (ab.size() % 2 != 0) throw ShapeError("two-band state must have an even number of amplitudes");
  const double r = 1.0 / std::sqrt(2.0);
  ComplexVector out(ab.size());
  for (Eigen::Index j = 0; j < ab.size() / 2; ++j) {
    const cplx a = ab(2 * j), b = ab(2 * j + 1);
    out(2 * j) = r * (a - b);
    out(2 * j + 1) = r * (a + b);
  }
  return out;
}

ComplexVector to_ab_basis(const ComplexVector& fd) {
  if (fd.size() % 2 != 0) throw ShapeError("two-band state must have an even number of amplitudes");
  const double r = 1.0 / std::sqrt(2.0);
  ComplexVector out(fd.size());
  for (Eigen::Index j = 0; j < fd.size() / 2; ++j) {
    const cplx f = fd(2 * j), d = fd(2 * j + 1);
    out(2 * j) = r * (f + d);
    out(2 * j + 1) = r * (d - f);
  }
  return out;
}

}  // namespace flatband
