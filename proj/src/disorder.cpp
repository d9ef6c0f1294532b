#include "flatband/disorder.hpp"

#include "flatband/csv.hpp"
#include "flatband/errors.hpp"

#include <cmath>
#include <ostream>
#include <random>

namespace flatband {

const char* to_string(DisorderKind kind) {
  return kind == DisorderKind::gaussian ? "gaussian" : "white";
}

DisorderSpec DisorderSpec::from_amplitude(double W, double ell, double delta, std::uint64_t seed,
                                          DisorderKind kind) {
  DisorderSpec s;
  s.kind = kind;
  s.C0 = W * W / 12.0;
  s.ell = ell;
  s.delta = delta;
  s.master_seed = seed;
  return s;
}

double DisorderSpec::amplitude() const { return std::sqrt(12.0 * C0); }

void DisorderSpec::validate() const {
  if (!(C0 > 0.0) || !std::isfinite(C0)) throw ParameterError("C0 must be positive");
  if (kind == DisorderKind::gaussian && (!(ell > 0.0) || !std::isfinite(ell)))
    throw ParameterError("ell must be positive for Gaussian disorder");
  if (!(delta >= -1.0 && delta <= 1.0)) throw ParameterError("delta must lie in [-1, 1]");
}

double correlation_C(const DisorderSpec& spec, double x, double a) {
  if (spec.kind == DisorderKind::white_noise) return x == 0.0 ? spec.C0 / a : 0.0;
  const double r = x / spec.ell;
  return spec.C0 * std::exp(-r * r);
}

double cross_correlation_C(const DisorderSpec& spec, double x, double a) {
  return spec.delta * correlation_C(spec, x, a);
}

double spectral_G0(const DisorderSpec& spec, double q) {
  if (spec.kind == DisorderKind::white_noise) return spec.C0 / (2.0 * kPi * kHbar);
  const double u = q * spec.ell / kHbar;
  return spec.C0 * spec.ell / (2.0 * std::sqrt(kPi) * kHbar) * std::exp(-0.25 * u * u);
}

std::uint64_t realization_seed(std::uint64_t master_seed, std::uint64_t index) {
  // splitmix64 finalizer over a combination of both words
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(master_seed) ^ (index * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

namespace {

// Uniform on [-1/2, 1/2) from the top 53 bits; std distributions are not
// specified bit-exactly across standard libraries.
double centered_uniform(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53 - 0.5;
}

// Zero-mean field with variance C(0) and correlation C(x), periodic over N cells.
std::vector<double> correlated_field(const DisorderSpec& spec, const LatticeParams& params,
                                     std::mt19937_64& eng) {
  const int n = params.N;
  const double W = spec.amplitude();
  std::vector<double> noise(static_cast<std::size_t>(n));
  for (auto& v : noise) v = W * centered_uniform(eng);

  if (spec.kind == DisorderKind::white_noise) {
    const double scale = 1.0 / std::sqrt(params.a);
    for (auto& v : noise) v *= scale;
    return noise;
  }

  // Kernel exp(-x^2/w^2), w = ell/sqrt2, so its autocorrelation goes as exp(-x^2/ell^2).
  const double w = spec.ell / std::sqrt(2.0);
  std::vector<double> kernel(static_cast<std::size_t>(n));
  double norm2 = 0.0;
  for (int m = 0; m < n; ++m) {
    const int d = std::min(m, n - m);
    const double x = d * params.a / w;
    kernel[static_cast<std::size_t>(m)] = std::exp(-x * x);
    norm2 += kernel[static_cast<std::size_t>(m)] * kernel[static_cast<std::size_t>(m)];
  }
  const double base_variance = W * W / 12.0;
  const double scale = std::sqrt(spec.C0 / (base_variance * norm2));

  std::vector<double> field(static_cast<std::size_t>(n), 0.0);
  for (int j = 0; j < n; ++j) {
    double acc = 0.0;
    for (int m = 0; m < n; ++m) {
      acc += kernel[static_cast<std::size_t>(m)] * noise[static_cast<std::size_t>((j - m + n) % n)];
    }
    field[static_cast<std::size_t>(j)] = scale * acc;
  }
  return field;
}

}  // namespace

DisorderRealization sample_realization(const DisorderSpec& spec, const LatticeParams& params,
                                       std::uint64_t index) {
  spec.validate();
  params.validate();
  std::mt19937_64 eng(realization_seed(spec.master_seed, index));
  DisorderRealization r;
  r.index = index;
  r.Va = correlated_field(spec, params, eng);
  const std::vector<double> independent = correlated_field(spec, params, eng);
  const double c = std::sqrt(1.0 - spec.delta * spec.delta);
  r.Vb.resize(r.Va.size());
  for (std::size_t j = 0; j < r.Va.size(); ++j) {
    r.Vb[j] = spec.delta * r.Va[j] + c * independent[j];
  }
  return r;
}

CorrelationEstimate empirical_correlations(std::span<const DisorderRealization> ensemble) {
  const std::size_t k = ensemble.size();
  if (k < 100) throw StatisticsError("empirical_correlations needs at least 100 realizations, got " + std::to_string(k));
  const std::size_t n = ensemble.front().Va.size();
  for (const auto& r : ensemble) {
    if (r.Va.size() != n || r.Vb.size() != n) throw ShapeError("realizations differ in length");
  }

  CorrelationEstimate est;
  est.realizations = k;
  auto zero = [n] { return std::vector<double>(n, 0.0); };
  std::vector<double> s_aa = zero(), s_bb = zero(), s_ab = zero();
  std::vector<double> q_aa = zero(), q_bb = zero(), q_ab = zero();
  double sum_a = 0.0, sum_b = 0.0;

  // Disorder has zero mean by construction, so products need no mean subtraction.
  // Each realization contributes one circular average per separation; those are i.i.d.
  for (const auto& r : ensemble) {
    for (std::size_t s = 0; s < n; ++s) {
      double aa = 0.0, bb = 0.0, ab = 0.0;
      for (std::size_t x = 0; x < n; ++x) {
        const std::size_t y = (x + s) % n;
        aa += r.Va[x] * r.Va[y];
        bb += r.Vb[x] * r.Vb[y];
        ab += r.Va[x] * r.Vb[y];
      }
      aa /= n, bb /= n, ab /= n;
      s_aa[s] += aa, s_bb[s] += bb, s_ab[s] += ab;
      q_aa[s] += aa * aa, q_bb[s] += bb * bb, q_ab[s] += ab * ab;
    }
    for (std::size_t x = 0; x < n; ++x) sum_a += r.Va[x], sum_b += r.Vb[x];
  }

  const double kd = static_cast<double>(k);
  auto finish = [kd](const std::vector<double>& s, const std::vector<double>& q, std::vector<double>& mean,
                     std::vector<double>& se) {
    mean.resize(s.size());
    se.resize(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
      mean[i] = s[i] / kd;
      const double var = std::max(0.0, (q[i] - kd * mean[i] * mean[i]) / (kd - 1.0));
      se[i] = std::sqrt(var / kd);
    }
  };
  finish(s_aa, q_aa, est.caa, est.se_aa);
  finish(s_bb, q_bb, est.cbb, est.se_bb);
  finish(s_ab, q_ab, est.cab, est.se_ab);
  est.mean_a = sum_a / (kd * n);
  est.mean_b = sum_b / (kd * n);
  return est;
}

void write_realization_csv(std::ostream& os, const DisorderRealization& r) {
  CsvWriter csv(os, {"cell_index", "V_a", "V_b"});
  for (std::size_t j = 0; j < r.Va.size(); ++j) {
    csv.row(j, r.Va[j], r.Vb[j]);
  }
}

}  // namespace flatband
