#include "flatband/errors.hpp"
#include "flatband/observables.hpp"
#include "flatband/state.hpp"

#include <doctest.h>

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

using namespace flatband;

namespace {

struct WarningCapture {
  std::vector<std::string> messages;
  WarningHandler previous;
  WarningCapture() {
    previous = set_warning_handler([this](std::string_view m) { messages.emplace_back(m); });
  }
  ~WarningCapture() { set_warning_handler(previous); }
};

LatticeParams lattice(int N = 100) {
  LatticeParams p;
  p.t_ab = 0.6;
  p.N = N;
  return p;
}

TwoBandState from_fd(const Eigen::VectorXcd& f, const Eigen::VectorXcd& d) {
  TwoBandState s;
  s.basis = Basis::fd;
  s.amplitudes.resize(2 * f.size());
  for (Eigen::Index j = 0; j < f.size(); ++j) {
    s.amplitudes(2 * j) = f(j);
    s.amplitudes(2 * j + 1) = d(j);
  }
  return s.in_ab();
}

// |psi|^2 ~ exp(-d^2 / sigma2), summed by brute force.
double window_fraction_oracle(int N, double x0, double sigma2, int h) {
  double in = 0.0, all = 0.0;
  for (int j = 0; j < N; ++j) {
    const double d = std::remainder(j - x0, N);
    const double w = std::exp(-d * d / sigma2);
    all += w;
    if (std::abs(d) <= h) in += w;
  }
  return in / all;
}

}  // namespace

TEST_CASE("gaussian flatband state") {
  const auto params = lattice();
  const auto s = gaussian_flatband_state(params, 50.0, 12.0, 1.26);
  CHECK(s.basis == Basis::ab);
  CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-14));
  for (int j = 0; j < params.N; ++j) CHECK(std::abs(s.amplitudes(2 * j) + s.amplitudes(2 * j + 1)) < 1e-15);
  CHECK(flatband_population_full(s) == doctest::Approx(1.0).epsilon(1e-14));

  const auto f = flatband_channel(s);
  // envelope and phase
  const double ratio = std::abs(f(53)) / std::abs(f(50));
  CHECK(ratio == doctest::Approx(std::exp(-9.0 / 24.0)).epsilon(1e-12));
  CHECK(std::arg(f(51) / f(50)) == doctest::Approx(1.26).epsilon(1e-12));

  SUBCASE("packet across the boundary keeps a continuous phase") {
    const auto w = gaussian_flatband_state(params, 0.5, 12.0, 0.3);
    const auto fw = flatband_channel(w);
    CHECK(std::arg(fw(0) / fw(99)) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(std::abs(fw(1)) == doctest::Approx(std::abs(fw(0))).epsilon(1e-12));
  }
  SUBCASE("errors and warnings") {
    CHECK_THROWS_AS(gaussian_flatband_state(params, -1.0, 12.0, 0.0), ParameterError);
    CHECK_THROWS_AS(gaussian_flatband_state(params, 100.0, 12.0, 0.0), ParameterError);
    CHECK_THROWS_AS(gaussian_flatband_state(params, 50.0, 0.0, 0.0), ParameterError);
    WarningCapture cap;
    gaussian_flatband_state(params, 50.0, 0.2, 0.0);
    CHECK(cap.messages.size() == 1);
    gaussian_flatband_state(params, 50.0, 12.0, 0.0);
    CHECK(cap.messages.size() == 1);
  }
}

TEST_CASE("time grid") {
  const auto g = TimeGrid::uniform(40.0, 81);
  REQUIRE(g.times.size() == 81);
  CHECK(g.times[1] == doctest::Approx(0.5));
  CHECK(g.t_max() == 40.0);
  CHECK_NOTHROW(g.validate());
  CHECK(TimeGrid::uniform(0.0, 1).times == std::vector<double>{0.0});
  CHECK_THROWS_AS(TimeGrid::uniform(10.0, 0), ParameterError);
  CHECK_THROWS_AS(TimeGrid::uniform(-1.0, 5), ParameterError);
  const TimeGrid late{{1.0, 2.0}}, repeated{{0.0, 2.0, 2.0}}, empty{};
  CHECK_THROWS_AS(late.validate(), ParameterError);
  CHECK_THROWS_AS(repeated.validate(), ParameterError);
  CHECK_THROWS_AS(empty.validate(), ParameterError);
  CHECK_THROWS_AS(TimeGrid::uniform(2e4, 3).validate(), ParameterError);
  CHECK_NOTHROW(TimeGrid::uniform(2e4, 3).validate(1e5));
}

TEST_CASE("populations") {
  const int N = 20;
  const Eigen::VectorXcd zero = Eigen::VectorXcd::Zero(N);
  const Eigen::VectorXcd flat = Eigen::VectorXcd::Constant(N, 1.0 / std::sqrt(double(N)));
  CHECK(flatband_population_full(from_fd(flat, zero)) == doctest::Approx(1.0));
  CHECK(flatband_population_full(from_fd(zero, flat)) == doctest::Approx(0.0));
  CHECK(flatband_population_full(from_fd(flat / std::sqrt(2.0), flat / std::sqrt(2.0))) == doctest::Approx(0.5));

  // a alone: half flat, half dispersive
  TwoBandState a_only;
  a_only.amplitudes = ComplexVector::Zero(2 * N);
  a_only.amplitudes(0) = 1.0;
  CHECK(flatband_population_full(a_only) == doctest::Approx(0.5));
  CHECK(flatband_population_full(a_only.in_fd()) == doctest::Approx(0.5));

  SUBCASE("window") {
    CarrierWindow w{10.0, 3};
    CHECK(w.contains(7, N));
    CHECK(w.contains(13, N));
    CHECK_FALSE(w.contains(14, N));
    CarrierWindow edge{1.0, 3};
    CHECK(edge.contains(18, N));
    CHECK_FALSE(edge.contains(17, N));
    CHECK_THROWS_AS((CarrierWindow{10.0, 10}).validate(N), ParameterError);
    CHECK_THROWS_AS((CarrierWindow{10.0, -1}).validate(N), ParameterError);
    CHECK_NOTHROW((CarrierWindow{10.0, 9}).validate(N));

    const auto s = from_fd(flat, zero);
    CHECK(flatband_population_partial(s, w) == doctest::Approx(7.0 / N));
    CHECK(flatband_population_partial(s, CarrierWindow{10.0, 9}) == doctest::Approx(19.0 / N));

    Eigen::VectorXcd local = Eigen::VectorXcd::Zero(N);
    local(0) = 1.0;
    CHECK(flatband_population_partial(from_fd(local, zero), w) == 0.0);
  }
  SUBCASE("preset state in the 17-cell carrier window") {
    const auto params = lattice();
    const auto s = gaussian_flatband_state(params, 50.0, 12.0, 0.0);
    const double frac = flatband_population_partial(s, CarrierWindow{50.0, 8});
    CHECK(frac == doctest::Approx(window_fraction_oracle(100, 50.0, 12.0, 8)).epsilon(1e-12));
    CHECK(frac <= flatband_population_full(s));
    CHECK(flatband_population_partial(s, CarrierWindow{50.0, 49}) ==
          doctest::Approx(flatband_population_full(s) - std::norm(flatband_channel(s)(0))));
  }
}

TEST_CASE("position density") {
  const auto s = gaussian_flatband_state(lattice(), 30.0, 8.0, 0.4);
  const auto rho = flatband_position_density(s);
  REQUIRE(rho.size() == 100);
  CHECK(std::accumulate(rho.begin(), rho.end(), 0.0) == doctest::Approx(1.0));
  CHECK(rho[30] == *std::max_element(rho.begin(), rho.end()));
}

TEST_CASE("momentum densities") {
  const auto params = lattice();
  const auto grid = momentum_grid(params);

  SUBCASE("plane wave at a grid momentum") {
    const int n = 61;
    Eigen::VectorXcd f(params.N);
    for (int j = 0; j < params.N; ++j) f(j) = std::exp(cplx(0.0, grid[n] * j)) / std::sqrt(100.0);
    const auto m = momentum_density(from_fd(f, Eigen::VectorXcd::Zero(params.N)), params);
    for (int i = 0; i < params.N; ++i) {
      CHECK(m.flat[i] == doctest::Approx(i == n ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
      CHECK(m.dispersive[i] == doctest::Approx(0.0).scale(1.0));
    }
  }
  SUBCASE("transform matches the defining sum") {
    MomentumTransform T(params);
    const auto s = gaussian_flatband_state(params, 47.0, 12.0, 0.9);
    const auto f = flatband_channel(s);
    for (int n : {0, 17, 49, 99}) {
      cplx acc = 0.0;
      for (int j = 0; j < params.N; ++j) acc += f(j) * std::exp(cplx(0.0, -grid[n] * j));
      acc /= std::sqrt(100.0);
      CHECK(std::abs((T.matrix().row(n) * f)(0) - acc) < 1e-13);
    }
    CHECK_THROWS_AS(T.densities(ComplexMatrix::Zero(99, 1)), ShapeError);
  }
  SUBCASE("parseval") {
    TwoBandState s;
    s.amplitudes = ComplexVector::Random(2 * params.N);
    s.amplitudes /= s.amplitudes.norm();
    const auto m = momentum_density(s, params);
    const double total = std::accumulate(m.flat.begin(), m.flat.end(), 0.0) +
                         std::accumulate(m.dispersive.begin(), m.dispersive.end(), 0.0);
    CHECK(std::abs(total - 1.0) < 1e-12);
    CHECK(std::abs(std::accumulate(m.flat.begin(), m.flat.end(), 0.0) - flatband_population_full(s)) < 1e-12);
  }
  SUBCASE("real envelope gives a symmetric density") {
    const auto s = gaussian_flatband_state(params, 50.0, 12.0, 0.0);
    const auto m = momentum_density(s, params);
    // p_n and -p_n sit at indices 49 + k and 49 - k
    for (int k = 1; k < 50; ++k) CHECK(std::abs(m.flat[49 + k] - m.flat[49 - k]) < 1e-10);
  }
  SUBCASE("gaussian momentum variance") {
    // |psi|^2 ~ exp(-x^2/sigma2) has |phi|^2 ~ exp(-p^2 sigma2), variance 1/(2 sigma2).
    // Oracle: the same continuum density sampled on the grid, plus a direct evaluation.
    const double sigma2 = 12.0;
    const auto s = gaussian_flatband_state(params, 50.0, sigma2, 0.0);
    const auto m = momentum_density(s, params);
    const double var = momentum_variance(m.momenta, m.flat);
    CHECK(var == doctest::Approx(1.0 / (2.0 * sigma2)).epsilon(0.05));

    double w = 0.0, wp2 = 0.0;
    for (double p : grid) {
      const double g = std::exp(-p * p * sigma2);
      w += g;
      wp2 += g * p * p;
    }
    CHECK(var == doctest::Approx(wp2 / w).epsilon(1e-6));
  }
  CHECK_THROWS_AS(momentum_density(gaussian_flatband_state(lattice(50), 25.0, 12.0, 0.0), params), ShapeError);
}

TEST_CASE("momentum moments") {
  const auto params = lattice(20);
  const auto p = momentum_grid(params);
  std::vector<double> rho(p.size(), 0.0);

  rho[5] = 1.0;
  CHECK(momentum_variance(p, rho) == doctest::Approx(0.0).scale(1.0));

  std::fill(rho.begin(), rho.end(), 0.0);
  rho[9 + 3] = 0.5;
  rho[9 - 3] = 0.5;
  CHECK(momentum_variance(p, rho) == doctest::Approx(p[12] * p[12]));

  SUBCASE("packet straddling the zone edge") {
    std::fill(rho.begin(), rho.end(), 0.0);
    rho.back() = 0.5;  // pi
    rho.front() = 0.25;
    rho[rho.size() - 2] = 0.25;
    const double dp = 2 * kPi / 20;
    const auto mm = momentum_moments(p, rho, 1.0, false);
    CHECK(std::abs(zone_difference(mm.mean, kPi, 1.0)) < 1e-12);
    CHECK(mm.variance == doctest::Approx(0.5 * dp * dp));
  }
  SUBCASE("antipodal weight warns") {
    std::fill(rho.begin(), rho.end(), 0.0);
    rho[9] = 0.9;
    rho[19] = 0.1;
    WarningCapture cap;
    momentum_variance(p, rho);
    CHECK(cap.messages.size() == 1);
    CHECK(antipodal_weight(p, rho, 0.0, 1.0) == doctest::Approx(0.1));
    momentum_moments(p, rho, 1.0, false);
    CHECK(cap.messages.size() == 1);
  }
  SUBCASE("unnormalized input and errors") {
    std::fill(rho.begin(), rho.end(), 0.0);
    rho[9 + 2] = 3.0;
    rho[9 - 2] = 3.0;
    CHECK(momentum_variance(p, rho) == doctest::Approx(p[11] * p[11]));
    CHECK_THROWS_AS(momentum_variance(p, std::vector<double>(20, 0.0)), ParameterError);
    CHECK_THROWS_AS(momentum_variance(p, std::vector<double>(19, 1.0)), ShapeError);
  }
}

TEST_CASE("coherence profile") {
  const auto params = lattice(40);
  const auto s = gaussian_flatband_state(params, 20.0, 6.0, 0.7);
  const TwoBandState states[] = {s};
  const auto rho = flatband_density_matrix(states);
  REQUIRE(rho.rows() == 40);
  CHECK((rho - rho.adjoint()).norm() < 1e-15);
  CHECK(rho.trace().real() == doctest::Approx(1.0));
  const auto prof = coherence_profile(rho);
  REQUIRE(prof.size() == 40);
  const auto f = flatband_channel(s);
  for (int sep : {0, 1, 5, 39}) {
    double ref = 0.0;
    for (int x = 0; x < 40; ++x) ref += std::abs(f(x)) * std::abs(f((x + sep) % 40));
    CHECK(prof[sep] == doctest::Approx(ref / 40.0).epsilon(1e-12));
  }
  CHECK(prof[0] == doctest::Approx(1.0 / 40.0));

  // averaging two states with opposite relative phase on one bond
  TwoBandState s2 = s;
  for (int j = 20; j < 40; ++j) {
    s2.amplitudes(2 * j) *= -1.0;
    s2.amplitudes(2 * j + 1) *= -1.0;
  }
  const TwoBandState pair[] = {s, s2};
  const auto rho2 = flatband_density_matrix(pair);
  CHECK(std::abs(rho2(19, 20)) < 1e-15);
  CHECK(std::abs(rho2(20, 21)) == doctest::Approx(std::abs(rho(20, 21))));
  CHECK(coherence_profile(rho2)[0] == doctest::Approx(prof[0]));

  CHECK_THROWS_AS(flatband_density_matrix(std::span<const TwoBandState>{}), ParameterError);
  CHECK_THROWS_AS(coherence_profile(ComplexMatrix::Zero(3, 4)), ShapeError);
}
