#pragma once

// Exact single-realization evolution by dense eigendecomposition, and the
// disorder ensemble built on top of it.

#include "flatband/disorder.hpp"
#include "flatband/lattice.hpp"
#include "flatband/observables.hpp"
#include "flatband/state.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace flatband {

// Adds V_a(j) to row (j, a) and V_b(j) to row (j, b) of the diagonal.
RealMatrix build_disordered_hamiltonian(const RealMatrix& clean, const DisorderRealization& realization);

class Propagator {
 public:
  // Throws NumericalError tagged with `realization` if the eigensolver fails.
  explicit Propagator(const RealMatrix& hamiltonian, long realization = -1);

  // psi(t) = U exp(-i Lambda t / hbar) U^T psi0; columns follow `times`.
  ComplexMatrix evolve(const ComplexVector& psi0, std::span<const double> times) const;
  ComplexVector evolve(const ComplexVector& psi0, double t) const;

  double energy(const ComplexVector& psi) const;
  const Eigen::VectorXd& eigenvalues() const { return eigenvalues_; }
  const RealMatrix& hamiltonian() const { return hamiltonian_; }

 private:
  RealMatrix hamiltonian_;
  Eigen::VectorXd eigenvalues_;
  RealMatrix eigenvectors_;
};

std::vector<TwoBandState> propagate(const RealMatrix& hamiltonian, const TwoBandState& psi0, const TimeGrid& grid);

struct EnsembleOptions {
  std::size_t realizations = 200;
  CarrierWindow window{50.0, 8};
  unsigned threads = 0;  // 0: hardware concurrency, capped by FLATBAND_THREADS
  std::uint64_t first_index = 0;
  // Output-time indices at which the averaged flatband density matrix is kept.
  std::vector<std::size_t> coherence_times;
};

struct EnsembleResult {
  std::vector<double> times;
  std::vector<double> momenta;
  std::size_t realizations = 0;

  std::vector<double> pop_full, pop_full_se;
  std::vector<double> pop_partial, pop_partial_se;
  std::vector<double> mom_variance, mom_variance_se;

  Eigen::MatrixXd xdist;    // time x cell, flatband position density
  Eigen::MatrixXd pdist_f;  // time x momentum
  Eigen::MatrixXd pdist_d;

  std::vector<std::size_t> coherence_times;
  std::vector<ComplexMatrix> coherence;  // averaged rho_f at coherence_times

  double max_norm_drift = 0.0;    // max over realizations and times of | |psi(t)| - |psi0| |
  double max_energy_drift = 0.0;  // same for <H_eps>
};

unsigned resolve_thread_count(unsigned requested);

EnsembleResult run_ensemble(const DisorderSpec& spec, const LatticeParams& params, const TwoBandState& psi0,
                            const TimeGrid& grid, const EnsembleOptions& options);

}  // namespace flatband
