#include "flatband/state.hpp"

#include "flatband/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace flatband {

TwoBandState TwoBandState::in_ab() const {
  if (basis == Basis::ab) return *this;
  return {to_ab_basis(amplitudes), Basis::ab};
}

TwoBandState TwoBandState::in_fd() const {
  if (basis == Basis::fd) return *this;
  return {to_fd_basis(amplitudes), Basis::fd};
}

TwoBandState gaussian_flatband_state(const LatticeParams& params, double x0, double sigma_x2, double p0) {
  params.validate();
  const double length = params.length();
  if (!(x0 >= 0.0 && x0 < length)) throw ParameterError("x0 must lie in [0, N a)");
  if (!(sigma_x2 > 0.0)) throw ParameterError("sigma_x2 must be positive");

  const int n = params.N;
  Eigen::VectorXcd psi(n);
  for (int j = 0; j < n; ++j) {
    double d = std::remainder(j * params.a - x0, length);
    const double x = x0 + d;  // unwrapped so the plane-wave phase is continuous across the packet
    psi(j) = std::exp(cplx(-d * d / (2.0 * sigma_x2), p0 * x / kHbar));
  }
  psi /= psi.norm();

  std::vector<double> mass(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) mass[static_cast<std::size_t>(j)] = std::norm(psi(j));
  std::sort(mass.begin(), mass.end(), std::greater<>());
  double acc = 0.0;
  int carriers = 0;
  for (double m : mass) {
    acc += m;
    ++carriers;
    if (acc >= 0.99) break;
  }
  if (carriers < 3) {
    warn("gaussian_flatband_state: fewer than 3 cells carry 99% of the weight; continuum picture does not apply");
  }

  TwoBandState s;
  s.amplitudes.resize(2 * n);
  const double r = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < n; ++j) {
    s.amplitudes(2 * j) = r * psi(j);
    s.amplitudes(2 * j + 1) = -r * psi(j);
  }
  return s;
}

TimeGrid TimeGrid::uniform(double t_max, int points) {
  if (points < 1) throw ParameterError("time grid needs at least one point");
  if (points > 1 && !(t_max > 0.0)) throw ParameterError("t_max must be positive");
  TimeGrid g;
  g.times.resize(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    g.times[static_cast<std::size_t>(i)] = points == 1 ? 0.0 : t_max * i / (points - 1);
  }
  return g;
}

void TimeGrid::validate(double bound) const {
  if (times.empty()) throw ParameterError("time grid is empty");
  if (times.front() != 0.0) throw ParameterError("time grid must start at 0");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1])) throw ParameterError("time grid must be strictly ascending");
  }
  if (!(times.back() <= bound)) throw ParameterError("t_max exceeds the configured bound");
}

}  // namespace flatband
