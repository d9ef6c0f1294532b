#include "flatband/effective.hpp"

#include "flatband/errors.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

namespace flatband {

double sinc(double x) {
  if (std::abs(x) < 1e-4) {
    const double x2 = x * x;
    return 1.0 - x2 / 6.0 + x2 * x2 / 120.0;
  }
  return std::sin(x) / x;
}

namespace {

struct TrapezoidSums {
  double fine = 0.0;    // step h
  double coarse = 0.0;  // step 2h, even nodes only
  double l1 = 0.0;
};

// Both rules share the same nodes, so the error check costs nothing extra.
template <typename F>
TrapezoidSums trapezoid_pair(const std::vector<double>& g, double h, F&& f) {
  TrapezoidSums s;
  const std::size_t last = g.size() - 1;
  for (std::size_t k = 0; k <= last; ++k) {
    if (g[k] == 0.0) continue;
    const double v = g[k] * f(k);
    const double end = (k == 0 || k == last) ? 0.5 : 1.0;
    s.fine += end * v;
    s.l1 += end * std::abs(v);
    if (k % 2 == 0) s.coarse += end * v;
  }
  s.fine *= h;
  s.coarse *= 2.0 * h;
  s.l1 *= h;
  return s;
}

// sin(theta_0 + k*step) for k = 0..n-1 by complex rotation, re-anchored every 64 nodes.
void sine_table(double theta0, double step, std::size_t n, std::vector<double>& sines, std::vector<double>& angles) {
  sines.resize(n);
  angles.resize(n);
  const cplx rot = std::polar(1.0, step);
  cplx z;
  for (std::size_t k = 0; k < n; ++k) {
    const double theta = theta0 + static_cast<double>(k) * step;
    if (k % 64 == 0) {
      z = std::polar(1.0, theta);
    } else {
      z *= rot;
    }
    sines[k] = z.imag();
    angles[k] = theta;
  }
}

double sinc_from(double s, double theta) { return std::abs(theta) < 1e-4 ? sinc(theta) : s / theta; }

}  // namespace

EffectiveModel::EffectiveModel(const LatticeParams& lattice, const DisorderSpec& disorder, QuadratureConfig quad)
    : lattice_(lattice), spectral_(disorder), quad_(quad) {
  lattice_.validate();
  disorder.validate();
  if (quad_.intervals < 2 || quad_.intervals % 2 != 0) throw ParameterError("quadrature needs an even number of panels");
  intersections_ = find_intersections(lattice_);
  if (disorder.kind == DisorderKind::gaussian) {
    q_max_ = 2.0 * std::sqrt(-std::log(quad_.tail)) * kHbar / disorder.ell;
    h_ = 2.0 * q_max_ / quad_.intervals;
    const auto n = static_cast<std::size_t>(quad_.intervals) + 1;
    nodes_.resize(n), g_tilde0_.resize(n), g_tilde1_.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      nodes_[k] = -q_max_ + static_cast<double>(k) * h_;
      g_tilde0_[k] = spectral_.g_tilde0(nodes_[k]);
      g_tilde1_[k] = spectral_.g_tilde1(nodes_[k]);
    }
  }
}

namespace {

double checked(const TrapezoidSums& s, double tol, const char* what, double arg, double t) {
  const double diff = std::abs(s.fine - s.coarse);
  if (diff > tol * std::abs(s.fine) + 1e-13 * s.l1) {
    std::ostringstream os;
    os << what << ": quadrature not converged at argument " << arg << ", t=" << t << " (h-rule " << s.fine
       << ", 2h-rule " << s.coarse << ")";
    throw NumericalError(os.str());
  }
  return s.fine;
}

}  // namespace

double EffectiveModel::decay_rate(double dp, double t, double velocity) const {
  if (t < 0.0) throw ParameterError("decay_rate requires t >= 0");
  if (t == 0.0 || disorder().delta == 1.0) return 0.0;
  if (disorder().kind == DisorderKind::white_noise) {
    return 4.0 * kPi * spectral_.g_tilde1(0.0) / (kHbar * std::abs(velocity));
  }
  const double b = velocity * t / kHbar;
  std::vector<double> s, theta;
  sine_table(b * (nodes_.front() - dp), b * h_, nodes_.size(), s, theta);
  const auto sums = trapezoid_pair(g_tilde1_, h_, [&](std::size_t k) { return sinc_from(s[k], theta[k]); });
  return 4.0 * t / (kHbar * kHbar) * checked(sums, quad_.tolerance, "decay_rate", dp, t);
}

double EffectiveModel::decay_exposure(double dp, double t, double velocity) const {
  if (t < 0.0) throw ParameterError("decay_exposure requires t >= 0");
  if (t == 0.0 || disorder().delta == 1.0) return 0.0;
  if (disorder().kind == DisorderKind::white_noise) {
    return 4.0 * kPi * spectral_.g_tilde1(0.0) * t / (kHbar * std::abs(velocity));
  }
  const double b = 0.5 * velocity * t / kHbar;
  std::vector<double> s, theta;
  sine_table(b * (nodes_.front() - dp), b * h_, nodes_.size(), s, theta);
  const auto sums = trapezoid_pair(g_tilde1_, h_, [&](std::size_t k) {
    const double v = sinc_from(s[k], theta[k]);
    return v * v;
  });
  return 2.0 * t * t / (kHbar * kHbar) * checked(sums, quad_.tolerance, "decay_exposure", dp, t);
}

double EffectiveModel::decay_exposure_asymptotic(double dp, double t, double velocity) const {
  if (t < 0.0) throw ParameterError("decay_exposure_asymptotic requires t >= 0");
  if (disorder().delta == 1.0 || t == 0.0) return 0.0;
  return kPi * t / (kHbar * std::abs(velocity)) * (1.0 - disorder().delta) * spectral_.g0(dp);
}

double EffectiveModel::decay_rate_at(double p, double t, const Intersection& x) const {
  return decay_rate(zone_difference(p, x.momentum, lattice_.a), t, x.velocity);
}

double EffectiveModel::decay_exposure_at(double p, double t, const Intersection& x) const {
  return decay_exposure(zone_difference(p, x.momentum, lattice_.a), t, x.velocity);
}

double EffectiveModel::dephasing_exponent(double x, double t) const {
  if (t < 0.0) throw ParameterError("dephasing_exponent requires t >= 0");
  if (disorder().kind == DisorderKind::white_noise) return dephasing_exponent_closed(x, t);
  if (x == 0.0 || t == 0.0 || disorder().delta == -1.0) return 0.0;
  // 1 - cos(qx) = 2 sin^2(qx/2) avoids cancellation at small separations
  const auto sums = trapezoid_pair(g_tilde0_, h_, [&](std::size_t k) {
    const double s = std::sin(0.5 * nodes_[k] * x / kHbar);
    return 2.0 * s * s;
  });
  return t * t / (kHbar * kHbar) * checked(sums, quad_.tolerance, "dephasing_exponent", x, t);
}

double EffectiveModel::dephasing_exponent_closed(double x, double t) const {
  const auto& d = disorder();
  const double pre = t * t * (1.0 + d.delta) / (2.0 * kHbar * kHbar);
  if (d.kind == DisorderKind::white_noise) return x == 0.0 ? 0.0 : pre * d.C0 / lattice_.a;
  const double r = x / d.ell;
  return pre * d.C0 * -std::expm1(-r * r);
}

double EffectiveModel::variance_prediction(double t, double initial_variance) const {
  const auto& d = disorder();
  if (d.kind != DisorderKind::gaussian)
    throw UnsupportedError("variance_prediction: \\int q^2 G~_0(q) dq diverges for white-noise disorder");
  return initial_variance + (1.0 + d.delta) * d.C0 * t * t / (d.ell * d.ell);
}

double EffectiveModel::dephasing_weight() const {
  const auto& d = disorder();
  return 0.5 * (1.0 + d.delta) * correlation_C(d, 0.0, lattice_.a);
}

double MomentumDensity::total() const { return std::accumulate(values.begin(), values.end(), 0.0); }

namespace {

class MasterRhs {
 public:
  MasterRhs(const EffectiveModel& model, const MasterOptions& opt) : model_(model), opt_(opt) {
    const auto& lat = model.lattice();
    momenta_ = momentum_grid(lat);
    const int n = lat.N;
    if (opt.decay) {
      for (const auto& x : model.intersections())
        if (opt.only_intersection == 0 || opt.only_intersection == x.index) active_.push_back(x);
      if (opt.only_intersection != 0 && active_.empty() && !model.intersections().empty())
        throw ParameterError("no intersection with index " + std::to_string(opt.only_intersection));
    }
    if (opt.dephasing) {
      const double dq = 2.0 * kPi * kHbar / lat.length();
      kernel_.resize(static_cast<std::size_t>(n));
      for (int m = 0; m < n; ++m) {
        const double q = zone_difference(dq * m, 0.0, lat.a);
        kernel_[static_cast<std::size_t>(m)] = dq * model.spectral().g_tilde0(q);
      }
      const double discrete = std::accumulate(kernel_.begin(), kernel_.end(), 0.0);
      const double target = model.dephasing_weight();
      if (discrete > 0.0)
        for (auto& w : kernel_) w *= target / discrete;
      kernel_sum_ = std::accumulate(kernel_.begin(), kernel_.end(), 0.0);
    }
  }

  const std::vector<double>& momenta() const { return momenta_; }
  bool has_decay() const { return !active_.empty(); }
  double kernel_sum() const { return kernel_sum_; }

  const std::vector<double>& rates(double t) {
    for (const auto& [time, values] : cache_)
      if (time == t) return values;
    if (cache_.size() >= 4) cache_.pop_front();
    std::vector<double> g(momenta_.size(), 0.0);
    const double a = model_.lattice().a;
    for (const auto& x : active_) {
      for (std::size_t n = 0; n < momenta_.size(); ++n) {
        const double dp = zone_difference(momenta_[n], x.momentum, a);
        // asymptotic mode: time derivative of the long-time exposure
        g[n] += opt_.asymptotic_rates ? model_.decay_exposure_asymptotic(dp, 1.0, x.velocity)
                                      : model_.decay_rate(dp, t, x.velocity);
      }
    }
    cache_.emplace_back(t, std::move(g));
    return cache_.back().second;
  }

  void operator()(double t, const std::vector<double>& rho, std::vector<double>& out) {
    const std::size_t n = rho.size();
    out.assign(n, 0.0);
    if (has_decay()) {
      const auto& g = rates(t);
      for (std::size_t i = 0; i < n; ++i) out[i] -= g[i] * rho[i];
    }
    if (!kernel_.empty() && kernel_sum_ > 0.0) {
      const double pre = 2.0 * t / (kHbar * kHbar);
      for (std::size_t i = 0; i < n; ++i) {
        double conv = 0.0;
        for (std::size_t m = 0; m < n; ++m) conv += kernel_[m] * rho[(i + n - m) % n];
        out[i] += pre * (conv - kernel_sum_ * rho[i]);
      }
    }
  }

 private:
  const EffectiveModel& model_;
  MasterOptions opt_;
  std::vector<double> momenta_;
  std::vector<Intersection> active_;
  std::vector<double> kernel_;
  double kernel_sum_ = 0.0;
  std::deque<std::pair<double, std::vector<double>>> cache_;  // stage times are revisited by the next step
};

constexpr double kNegativityFloor = -1e-9;
constexpr int kMaxHalvings = 20;

bool any_negative(const std::vector<double>& v) {
  return std::any_of(v.begin(), v.end(), [](double x) { return x < kNegativityFloor; });
}

// One classical RK4 step; false if any stage state dips below the negativity floor.
bool rk4_step(MasterRhs& rhs, double t, double dt, std::vector<double>& y) {
  const std::size_t n = y.size();
  std::vector<double> k1, k2, k3, k4, tmp(n);
  rhs(t, y, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  if (any_negative(tmp)) return false;
  rhs(t + 0.5 * dt, tmp, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  if (any_negative(tmp)) return false;
  rhs(t + 0.5 * dt, tmp, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
  if (any_negative(tmp)) return false;
  rhs(t + dt, tmp, k4);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  if (any_negative(tmp)) return false;
  y.swap(tmp);
  return true;
}

// Advances y over [t, t + span] in `steps` equal steps, splitting any rejected step in two.
void advance(MasterRhs& rhs, double t, double span, std::vector<double>& y, int depth, MomentumTrajectory& traj) {
  std::vector<double> trial = y;
  if (rk4_step(rhs, t, span, trial)) {
    y.swap(trial);
    ++traj.steps;
    return;
  }
  if (depth >= kMaxHalvings)
    throw NumericalError("evolve_momentum_master: negative density persists after 20 step halvings at t=" +
                         std::to_string(t));
  traj.halvings = std::max(traj.halvings, depth + 1);
  advance(rhs, t, 0.5 * span, y, depth + 1, traj);
  advance(rhs, t + 0.5 * span, 0.5 * span, y, depth + 1, traj);
}

void check_density(const MomentumDensity& rho, int n) {
  if (static_cast<int>(rho.values.size()) != n) throw ShapeError("momentum density does not match the lattice");
  for (double v : rho.values)
    if (!std::isfinite(v) || v < -1e-12) throw ParameterError("momentum density must be finite and non-negative");
}

}  // namespace

MomentumTrajectory evolve_momentum_master(const MomentumDensity& initial, const EffectiveModel& model,
                                          const TimeGrid& grid, const MasterOptions& options) {
  grid.validate();
  check_density(initial, model.lattice().N);
  MasterRhs rhs(model, options);

  MomentumTrajectory traj;
  traj.momenta = rhs.momenta();

  double dt = options.dt;
  if (dt <= 0.0) {
    dt = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < grid.times.size(); ++i) dt = std::min(dt, grid.times[i] - grid.times[i - 1]);
    const double t_max = grid.t_max();
    if (rhs.has_decay() && t_max > 0.0) {
      const auto& g = rhs.rates(t_max);
      const double gmax = *std::max_element(g.begin(), g.end());
      if (gmax > 0.0) dt = std::min(dt, 0.0099 / gmax);
    }
    if (rhs.kernel_sum() > 0.0 && t_max > 0.0) dt = std::min(dt, 0.125 / (t_max * rhs.kernel_sum()));
    if (!std::isfinite(dt)) dt = 1.0;
  }
  traj.dt = dt;

  std::vector<double> y = initial.values;
  traj.states.push_back({y, grid.times.front()});
  for (std::size_t i = 1; i < grid.times.size(); ++i) {
    const double t0 = grid.times[i - 1];
    const double span = grid.times[i] - t0;
    const auto steps = static_cast<std::size_t>(std::ceil(span / dt - 1e-9));
    const double h = span / static_cast<double>(steps);
    for (std::size_t s = 0; s < steps; ++s) advance(rhs, t0 + static_cast<double>(s) * h, h, y, 0, traj);
    traj.states.push_back({y, grid.times[i]});
  }
  return traj;
}

MomentumDensity direct_decay_solution(const MomentumDensity& initial, double t, const EffectiveModel& model,
                                      int intersection) {
  check_density(initial, model.lattice().N);
  MomentumDensity out{initial.values, t};
  const auto& xs = model.intersections();
  if (xs.empty()) return out;
  const auto it = std::find_if(xs.begin(), xs.end(), [&](const Intersection& x) { return x.index == intersection; });
  if (it == xs.end()) throw ParameterError("no intersection with index " + std::to_string(intersection));
  const auto p = momentum_grid(model.lattice());
  for (std::size_t n = 0; n < p.size(); ++n) out.values[n] *= std::exp(-model.decay_exposure_at(p[n], t, *it));
  return out;
}

LifetimeEstimate lifetime_estimate(double p0, const EffectiveModel& model) {
  const auto& d = model.disorder();
  if (d.kind != DisorderKind::gaussian) throw UnsupportedError("lifetime_estimate needs a finite correlation length");
  const auto& xs = model.intersections();
  if (xs.empty()) throw ParameterError("lifetime_estimate needs at least one band intersection");
  LifetimeEstimate est;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    const double dist = std::abs(zone_difference(p0, x.momentum, model.lattice().a));
    if (dist < best) best = dist, est.nearest = x;
  }
  if (d.delta <= -1.0) {
    est.unbounded = true;
    est.tau = std::numeric_limits<double>::infinity();
    return est;
  }
  est.tau = best * d.ell / std::sqrt(d.C0 * (1.0 + d.delta));
  return est;
}

}  // namespace flatband
