#include "flatband/propagator.hpp"

#include "flatband/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <optional>
#include <thread>

namespace flatband {

RealMatrix build_disordered_hamiltonian(const RealMatrix& clean, const DisorderRealization& realization) {
  const auto n = static_cast<Eigen::Index>(realization.Va.size());
  if (realization.Vb.size() != realization.Va.size() || clean.rows() != 2 * n || clean.cols() != 2 * n)
    throw ShapeError("disorder realization does not match the Hamiltonian dimension");
  RealMatrix h = clean;
  for (Eigen::Index j = 0; j < n; ++j) {
    h(2 * j, 2 * j) += realization.Va[static_cast<std::size_t>(j)];
    h(2 * j + 1, 2 * j + 1) += realization.Vb[static_cast<std::size_t>(j)];
  }
  return h;
}

Propagator::Propagator(const RealMatrix& hamiltonian, long realization) : hamiltonian_(hamiltonian) {
  if (hamiltonian.rows() != hamiltonian.cols()) throw ShapeError("Hamiltonian must be square");
  const double scale = std::max(1.0, hamiltonian.cwiseAbs().maxCoeff());
  if ((hamiltonian - hamiltonian.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw ParameterError("Hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<RealMatrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success) throw NumericalError("eigendecomposition failed", realization);
  eigenvalues_ = solver.eigenvalues();
  eigenvectors_ = solver.eigenvectors();
}

ComplexMatrix Propagator::evolve(const ComplexVector& psi0, std::span<const double> times) const {
  if (psi0.size() != hamiltonian_.rows()) throw ShapeError("state size does not match the Hamiltonian");
  const ComplexVector c = eigenvectors_.transpose().cast<cplx>() * psi0;
  const auto dim = eigenvalues_.size();
  const auto nt = static_cast<Eigen::Index>(times.size());
  ComplexMatrix coeff(dim, nt);
  for (Eigen::Index k = 0; k < nt; ++k) {
    const double t = times[static_cast<std::size_t>(k)];
    for (Eigen::Index i = 0; i < dim; ++i) coeff(i, k) = c(i) * std::polar(1.0, -eigenvalues_(i) * t / kHbar);
  }
  ComplexMatrix out = eigenvectors_.cast<cplx>() * coeff;
  for (Eigen::Index k = 0; k < nt; ++k)
    if (times[static_cast<std::size_t>(k)] == 0.0) out.col(k) = psi0;
  return out;
}

ComplexVector Propagator::evolve(const ComplexVector& psi0, double t) const {
  const double ts[] = {t};
  return evolve(psi0, std::span<const double>(ts, 1)).col(0);
}

double Propagator::energy(const ComplexVector& psi) const {
  return (psi.adjoint() * (hamiltonian_.cast<cplx>() * psi))(0).real();
}

std::vector<TwoBandState> propagate(const RealMatrix& hamiltonian, const TwoBandState& psi0, const TimeGrid& grid) {
  grid.validate();
  const Propagator prop(hamiltonian);
  const TwoBandState start = psi0.in_ab();
  const ComplexMatrix states = prop.evolve(start.amplitudes, grid.times);
  std::vector<TwoBandState> out;
  out.reserve(grid.times.size());
  for (Eigen::Index k = 0; k < states.cols(); ++k) out.push_back({states.col(k), Basis::ab});
  return out;
}

unsigned resolve_thread_count(unsigned requested) {
  unsigned n = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FLATBAND_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && cap > 0) n = std::min(n, static_cast<unsigned>(cap));
  }
  return std::max(1u, n);
}

namespace {

// Everything one realization contributes to the ensemble sums.
struct RealizationRecord {
  Eigen::VectorXd full, partial;
  Eigen::MatrixXd xdist, pf, pd;      // cell/momentum x time
  Eigen::MatrixXd moments;            // 3 x time: sum rho, sum rho d, sum rho d^2
  std::vector<ComplexMatrix> rho;
  double norm_drift = 0.0;
  double energy_drift = 0.0;
};

struct Workspace {
  const DisorderSpec& spec;
  const LatticeParams& params;
  const RealMatrix& clean;
  const ComplexVector& psi0;
  const TimeGrid& grid;
  const EnsembleOptions& options;
  const MomentumTransform& ft;
  const std::vector<bool>& in_window;
  double reference_momentum;
};

RealizationRecord simulate_one(const Workspace& w, std::uint64_t index) {
  const DisorderRealization real = sample_realization(w.spec, w.params, index);
  const Propagator prop(build_disordered_hamiltonian(w.clean, real), static_cast<long>(index));
  const ComplexMatrix psi = prop.evolve(w.psi0, w.grid.times);

  const Eigen::Index n = w.params.N;
  const Eigen::Index nt = psi.cols();
  const double r = 1.0 / std::sqrt(2.0);
  ComplexMatrix f(n, nt), d(n, nt);
  for (Eigen::Index j = 0; j < n; ++j) {
    f.row(j) = r * (psi.row(2 * j) - psi.row(2 * j + 1));
    d.row(j) = r * (psi.row(2 * j) + psi.row(2 * j + 1));
  }

  RealizationRecord rec;
  rec.xdist = f.cwiseAbs2();
  rec.full = rec.xdist.colwise().sum().transpose();
  rec.partial = Eigen::VectorXd::Zero(nt);
  for (Eigen::Index j = 0; j < n; ++j)
    if (w.in_window[static_cast<std::size_t>(j)]) rec.partial += rec.xdist.row(j).transpose();
  rec.pf = w.ft.densities(f);
  rec.pd = w.ft.densities(d);

  rec.moments.resize(3, nt);
  const auto& p = w.ft.momenta();
  for (Eigen::Index k = 0; k < nt; ++k) {
    double m0 = 0.0, m1 = 0.0, m2 = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dp = zone_difference(p[static_cast<std::size_t>(i)], w.reference_momentum, w.params.a);
      const double rho = rec.pf(i, k);
      m0 += rho, m1 += rho * dp, m2 += rho * dp * dp;
    }
    rec.moments.col(k) << m0, m1, m2;
  }

  const double norm0 = w.psi0.norm();
  const double e0 = prop.energy(w.psi0);
  const ComplexMatrix hpsi = prop.hamiltonian().cast<cplx>() * psi;
  for (Eigen::Index k = 0; k < nt; ++k) {
    rec.norm_drift = std::max(rec.norm_drift, std::abs(psi.col(k).norm() - norm0));
    const double e = psi.col(k).dot(hpsi.col(k)).real();
    rec.energy_drift = std::max(rec.energy_drift, std::abs(e - e0));
  }

  for (std::size_t k : w.options.coherence_times) {
    const auto col = static_cast<Eigen::Index>(k);
    rec.rho.push_back(f.col(col) * f.col(col).adjoint());
  }
  return rec;
}

// Running sums, folded strictly in realization-index order.
struct Accumulator {
  Eigen::VectorXd full, full2, partial, partial2;
  Eigen::MatrixXd xdist, pf, pd;
  Eigen::MatrixXd moments;               // 3 x T
  std::vector<Eigen::Matrix3d> moment2;  // per time
  std::vector<ComplexMatrix> rho;
  double norm_drift = 0.0, energy_drift = 0.0;
  std::size_t count = 0;

  void add(const RealizationRecord& r) {
    if (count == 0) {
      full = Eigen::VectorXd::Zero(r.full.size());
      full2 = full, partial = full, partial2 = full;
      xdist = Eigen::MatrixXd::Zero(r.xdist.rows(), r.xdist.cols());
      pf = Eigen::MatrixXd::Zero(r.pf.rows(), r.pf.cols());
      pd = pf;
      moments = Eigen::MatrixXd::Zero(3, r.moments.cols());
      moment2.assign(static_cast<std::size_t>(r.moments.cols()), Eigen::Matrix3d::Zero());
      for (const auto& m : r.rho) rho.push_back(ComplexMatrix::Zero(m.rows(), m.cols()));
    }
    full += r.full;
    full2 += r.full.cwiseAbs2();
    partial += r.partial;
    partial2 += r.partial.cwiseAbs2();
    xdist += r.xdist;
    pf += r.pf;
    pd += r.pd;
    moments += r.moments;
    for (Eigen::Index k = 0; k < r.moments.cols(); ++k) {
      const Eigen::Vector3d m = r.moments.col(k);
      moment2[static_cast<std::size_t>(k)] += m * m.transpose();
    }
    for (std::size_t i = 0; i < r.rho.size(); ++i) rho[i] += r.rho[i];
    norm_drift = std::max(norm_drift, r.norm_drift);
    energy_drift = std::max(energy_drift, r.energy_drift);
    ++count;
  }
};

double standard_error(double sum, double sum2, std::size_t k) {
  if (k < 2) return 0.0;
  const double kd = static_cast<double>(k);
  const double mean = sum / kd;
  const double var = std::max(0.0, (sum2 - kd * mean * mean) / (kd - 1.0));
  return std::sqrt(var / kd);
}

// Delta-method error of the mixture variance M2/M0 - (M1/M0)^2.
double variance_standard_error(const Eigen::Vector3d& sum, const Eigen::Matrix3d& sum2, std::size_t k) {
  if (k < 2) return 0.0;
  const double kd = static_cast<double>(k);
  const Eigen::Vector3d m = sum / kd;
  const Eigen::Matrix3d cov = (sum2 - kd * m * m.transpose()) / (kd - 1.0);
  const double m0 = m(0);
  if (!(m0 > 0.0)) return 0.0;
  Eigen::Vector3d g;
  g << -m(2) / (m0 * m0) + 2.0 * m(1) * m(1) / (m0 * m0 * m0), -2.0 * m(1) / (m0 * m0), 1.0 / m0;
  return std::sqrt(std::max(0.0, g.dot(cov * g)) / kd);
}

}  // namespace

EnsembleResult run_ensemble(const DisorderSpec& spec, const LatticeParams& params, const TwoBandState& psi0,
                            const TimeGrid& grid, const EnsembleOptions& options) {
  spec.validate();
  params.validate();
  grid.validate();
  options.window.validate(params.N);
  if (options.realizations < 1) throw ParameterError("ensemble needs at least one realization");
  if (psi0.cells() != params.N) throw ShapeError("initial state does not match the lattice");
  for (std::size_t k : options.coherence_times)
    if (k >= grid.times.size()) throw ParameterError("coherence time index out of range");

  const RealMatrix clean = build_clean_hamiltonian(params);
  const ComplexVector start = psi0.in_ab().amplitudes;
  const MomentumTransform ft(params);
  std::vector<bool> in_window(static_cast<std::size_t>(params.N));
  for (int j = 0; j < params.N; ++j) in_window[static_cast<std::size_t>(j)] = options.window.contains(j, params.N);

  const BandMomentumDensities initial = momentum_density({start, Basis::ab}, params);
  const double reference = momentum_moments(initial.momenta, initial.flat, params.a, false).mean;

  const Workspace ws{spec, params, clean, start, grid, options, ft, in_window, reference};

  const unsigned threads = resolve_thread_count(options.threads);
  const std::size_t block = std::max<std::size_t>(1, 4 * static_cast<std::size_t>(threads));
  const std::size_t total = options.realizations;

  Accumulator acc;
  std::vector<std::optional<RealizationRecord>> slots(std::min(block, total));
  std::vector<std::exception_ptr> errors(slots.size());

  for (std::size_t begin = 0; begin < total; begin += block) {
    const std::size_t count = std::min(block, total - begin);
    auto work = [&](std::size_t worker) {
      for (std::size_t i = worker; i < count; i += threads) {
        try {
          slots[i] = simulate_one(ws, options.first_index + begin + i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    if (threads == 1 || count == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < std::min<std::size_t>(threads, count); ++t) pool.emplace_back(work, t);
    }
    for (std::size_t i = 0; i < count; ++i) {
      if (errors[i]) std::rethrow_exception(errors[i]);
      acc.add(*slots[i]);
      slots[i].reset();
    }
  }

  EnsembleResult res;
  res.times = grid.times;
  res.momenta = ft.momenta();
  res.realizations = acc.count;
  const double kd = static_cast<double>(acc.count);
  const auto nt = grid.times.size();

  res.xdist = (acc.xdist / kd).transpose();
  res.pdist_f = (acc.pf / kd).transpose();
  res.pdist_d = (acc.pd / kd).transpose();
  res.pop_full.resize(nt), res.pop_full_se.resize(nt);
  res.pop_partial.resize(nt), res.pop_partial_se.resize(nt);
  res.mom_variance.resize(nt), res.mom_variance_se.resize(nt);
  bool wrap_warning = false;
  for (std::size_t k = 0; k < nt; ++k) {
    const auto kk = static_cast<Eigen::Index>(k);
    res.pop_full[k] = acc.full(kk) / kd;
    res.pop_full_se[k] = standard_error(acc.full(kk), acc.full2(kk), acc.count);
    res.pop_partial[k] = acc.partial(kk) / kd;
    res.pop_partial_se[k] = standard_error(acc.partial(kk), acc.partial2(kk), acc.count);
    const Eigen::VectorXd row = res.pdist_f.row(kk).transpose();
    const std::span<const double> density(row.data(), static_cast<std::size_t>(row.size()));
    const MomentumMoments mm = momentum_moments(res.momenta, density, params.a, false);
    wrap_warning = wrap_warning || antipodal_weight(res.momenta, density, mm.mean, params.a) > 1e-3;
    res.mom_variance[k] = mm.variance;
    res.mom_variance_se[k] = variance_standard_error(acc.moments.col(kk), acc.moment2[k], acc.count);
  }
  if (wrap_warning) warn("run_ensemble: flatband momentum weight reaches the antipode of its mean; variance ill-defined");

  res.coherence_times = options.coherence_times;
  for (auto& m : acc.rho) res.coherence.push_back(m / kd);
  res.max_norm_drift = acc.norm_drift;
  res.max_energy_drift = acc.energy_drift;
  return res;
}

}  // namespace flatband
