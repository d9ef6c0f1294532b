#pragma once

// Correlated on-site disorder for the two sublattices.
//
// Intra-sublattice correlation C(x) is Gaussian, C_0 exp(-(x/ell)^2), or
// on-lattice white noise. The inter-sublattice correlation is delta * C(x).

#include "flatband/lattice.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace flatband {

enum class DisorderKind { gaussian, white_noise };

const char* to_string(DisorderKind kind);

struct DisorderSpec {
  DisorderKind kind = DisorderKind::gaussian;
  double C0 = 0.0;     // variance of the on-site potential, J^2
  double ell = 1.0;    // correlation length, units of a (unused for white noise)
  double delta = 0.0;  // inter-sublattice correlation factor in [-1, 1]
  std::uint64_t master_seed = 0;

  // C_0 = W^2 / 12, the variance of a uniform distribution on [-W/2, W/2].
  static DisorderSpec from_amplitude(double W, double ell, double delta, std::uint64_t seed = 0,
                                     DisorderKind kind = DisorderKind::gaussian);

  double amplitude() const;  // W such that C_0 = W^2/12
  void validate() const;
};

struct DisorderRealization {
  std::vector<double> Va;
  std::vector<double> Vb;
  std::uint64_t index = 0;
};

// C_aa(x) = C_bb(x). White noise: C_0/a at x = 0, else 0.
double correlation_C(const DisorderSpec& spec, double x, double a = 1.0);
double cross_correlation_C(const DisorderSpec& spec, double x, double a = 1.0);

// Fourier density with C(x) = \int dq exp(i q x / hbar) G_0(q).
double spectral_G0(const DisorderSpec& spec, double q);

class SpectralDensity {
 public:
  explicit SpectralDensity(DisorderSpec spec) : spec_(spec) {}

  double g0(double q) const { return spectral_G0(spec_, q); }
  double g_tilde0(double q) const { return g0(q) * (1.0 + spec_.delta) / 2.0; }
  double g_tilde1(double q) const { return g0(q) * (1.0 - spec_.delta) / 4.0; }

  const DisorderSpec& spec() const { return spec_; }

 private:
  DisorderSpec spec_;
};

// Stateless per-realization seed; the same (master, index) always maps to the same seed.
std::uint64_t realization_seed(std::uint64_t master_seed, std::uint64_t index);

DisorderRealization sample_realization(const DisorderSpec& spec, const LatticeParams& params,
                                       std::uint64_t index);

// Circular covariance estimators indexed by separation s = 0 .. N-1 (in cells).
struct CorrelationEstimate {
  std::vector<double> caa, cbb, cab;
  std::vector<double> se_aa, se_bb, se_ab;
  double mean_a = 0.0;
  double mean_b = 0.0;
  std::size_t realizations = 0;
};

CorrelationEstimate empirical_correlations(std::span<const DisorderRealization> ensemble);

void write_realization_csv(std::ostream& os, const DisorderRealization& r);

}  // namespace flatband
