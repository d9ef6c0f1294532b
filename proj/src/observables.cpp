#include "flatband/observables.hpp"

#include "flatband/errors.hpp"

#include <cmath>
#include <string>

namespace flatband {

void CarrierWindow::validate(int N) const {
  if (half_width < 0 || 2 * half_width + 1 > N)
    throw ParameterError("carrier window must satisfy 0 < 2h+1 <= N, got h=" + std::to_string(half_width));
}

bool CarrierWindow::contains(int cell, int N) const {
  const double d = std::remainder(cell - center, static_cast<double>(N));
  return std::abs(d) <= half_width + 1e-12;
}

Eigen::VectorXcd flatband_channel(const TwoBandState& state) {
  const ComplexVector fd = state.in_fd().amplitudes;
  Eigen::VectorXcd f(fd.size() / 2);
  for (Eigen::Index j = 0; j < f.size(); ++j) f(j) = fd(2 * j);
  return f;
}

Eigen::VectorXcd dispersive_channel(const TwoBandState& state) {
  const ComplexVector fd = state.in_fd().amplitudes;
  Eigen::VectorXcd d(fd.size() / 2);
  for (Eigen::Index j = 0; j < d.size(); ++j) d(j) = fd(2 * j + 1);
  return d;
}

double flatband_population_full(const TwoBandState& state) { return flatband_channel(state).squaredNorm(); }

double flatband_population_partial(const TwoBandState& state, const CarrierWindow& window) {
  const Eigen::VectorXcd f = flatband_channel(state);
  const int n = static_cast<int>(f.size());
  double sum = 0.0;
  for (int j = 0; j < n; ++j)
    if (window.contains(j, n)) sum += std::norm(f(j));
  return sum;
}

std::vector<double> flatband_position_density(const TwoBandState& state) {
  const Eigen::VectorXcd f = flatband_channel(state);
  std::vector<double> out(static_cast<std::size_t>(f.size()));
  for (Eigen::Index j = 0; j < f.size(); ++j) out[static_cast<std::size_t>(j)] = std::norm(f(j));
  return out;
}

MomentumTransform::MomentumTransform(const LatticeParams& params) : momenta_(momentum_grid(params)) {
  const int n = params.N;
  dft_.resize(n, n);
  const double norm = 1.0 / std::sqrt(static_cast<double>(n));
  const int n0 = momentum_index_offset(n);
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < n; ++j) {
      // exact integer phase reduction keeps the table accurate for large N
      const long m = static_cast<long>(n0 + r) * j % n;
      const double phase = -2.0 * kPi * static_cast<double>(m) / n;
      dft_(r, j) = norm * cplx(std::cos(phase), std::sin(phase));
    }
  }
}

Eigen::MatrixXd MomentumTransform::densities(const ComplexMatrix& cell_amplitudes) const {
  if (cell_amplitudes.rows() != dft_.cols()) throw ShapeError("momentum transform: wrong number of cells");
  return (dft_ * cell_amplitudes).cwiseAbs2();
}

BandMomentumDensities momentum_density(const TwoBandState& state, const LatticeParams& params) {
  if (state.cells() != params.N) throw ShapeError("state size does not match lattice");
  const MomentumTransform ft(params);
  const Eigen::VectorXd pf = ft.densities(flatband_channel(state));
  const Eigen::VectorXd pd = ft.densities(dispersive_channel(state));
  BandMomentumDensities out;
  out.momenta = ft.momenta();
  out.flat.assign(pf.data(), pf.data() + pf.size());
  out.dispersive.assign(pd.data(), pd.data() + pd.size());
  return out;
}

double antipodal_weight(std::span<const double> momenta, std::span<const double> density, double mean, double a) {
  const double edge = 0.9 * kPi * kHbar / a;
  double total = 0.0, far = 0.0;
  for (std::size_t i = 0; i < momenta.size(); ++i) {
    total += density[i];
    if (std::abs(zone_difference(momenta[i], mean, a)) > edge) far += density[i];
  }
  return total > 0.0 ? far / total : 0.0;
}

MomentumMoments momentum_moments(std::span<const double> momenta, std::span<const double> density, double a,
                                 bool warn_on_wrap) {
  if (momenta.size() != density.size()) throw ShapeError("momentum density and grid differ in length");
  double total = 0.0;
  cplx phasor = 0.0;
  for (std::size_t i = 0; i < momenta.size(); ++i) {
    total += density[i];
    phasor += density[i] * std::polar(1.0, momenta[i] * a / kHbar);
  }
  if (!(total > 0.0)) throw ParameterError("momentum density has no weight");
  double mean = std::arg(phasor) * kHbar / a;
  const double circular_mean = mean;
  double shift = 0.0;
  for (std::size_t i = 0; i < momenta.size(); ++i) shift += density[i] * zone_difference(momenta[i], mean, a);
  mean = fold_to_zone(mean + shift / total, a);
  double var = 0.0;
  for (std::size_t i = 0; i < momenta.size(); ++i) {
    const double d = zone_difference(momenta[i], mean, a);
    var += density[i] * d * d;
  }
  if (warn_on_wrap && antipodal_weight(momenta, density, circular_mean, a) > 1e-3) {
    warn("momentum_variance: weight near both zone edges relative to the mean; variance ill-defined on the circle");
  }
  return {mean, var / total};
}

double momentum_variance(std::span<const double> momenta, std::span<const double> density, double a) {
  return momentum_moments(momenta, density, a).variance;
}

ComplexMatrix flatband_density_matrix(std::span<const TwoBandState> states) {
  if (states.empty()) throw ParameterError("flatband_density_matrix needs at least one state");
  const int n = states.front().cells();
  ComplexMatrix rho = ComplexMatrix::Zero(n, n);
  for (const auto& s : states) {
    if (s.cells() != n) throw ShapeError("states differ in size");
    const Eigen::VectorXcd f = flatband_channel(s);
    rho.noalias() += f * f.adjoint();
  }
  rho /= static_cast<double>(states.size());
  return rho;
}

std::vector<double> coherence_profile(const ComplexMatrix& rho_f) {
  if (rho_f.rows() != rho_f.cols()) throw ShapeError("density matrix must be square");
  const Eigen::Index n = rho_f.rows();
  std::vector<double> profile(static_cast<std::size_t>(n), 0.0);
  for (Eigen::Index s = 0; s < n; ++s) {
    double acc = 0.0;
    for (Eigen::Index x = 0; x < n; ++x) acc += std::abs(rho_f(x, (x + s) % n));
    profile[static_cast<std::size_t>(s)] = acc / static_cast<double>(n);
  }
  return profile;
}

}  // namespace flatband
