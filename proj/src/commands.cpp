#include "flatband/commands.hpp"

#include "flatband/csv.hpp"
#include "flatband/errors.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace flatband {

namespace {

std::ofstream open_output(const fs::path& file) {
  std::error_code ec;
  fs::create_directories(file.parent_path(), ec);
  std::ofstream os(file, std::ios::binary);
  if (!os) throw IoError("cannot write " + file.string());
  return os;
}

void close_checked(std::ofstream& os, const fs::path& file) {
  os.close();
  if (!os) throw IoError("failed writing " + file.string());
}

fs::path write_echo(const RunConfig& config, const fs::path& out) {
  const fs::path file = out / "resolved_config.txt";
  auto os = open_output(file);
  os << config.echo();
  close_checked(os, file);
  return file;
}

}  // namespace

CommandResult cmd_bands(const RunConfig& config, const fs::path& out) {
  const auto& lat = config.lattice;
  const auto ks = momentum_grid(lat);
  const auto rows = band_energies(lat, ks);
  const auto xs = find_intersections(lat);

  CommandResult res;
  const fs::path file = out / "bands.csv";
  auto os = open_output(file);
  std::ostringstream note;
  if (xs.empty()) {
    note << "no intersections (|t_ab| >= 2)";
  } else {
    note << "intersections:";
    for (const auto& x : xs) note << " p" << x.index << '=' << format_double(x.momentum) << " v" << x.index << '='
                                  << format_double(x.velocity);
  }
  os << "# " << note.str() << '\n';
  CsvWriter csv(os, {"k", "E_f", "E_d"});
  for (const auto& r : rows) csv.row(r.k, r.e_flat, r.e_disp);
  close_checked(os, file);
  res.files = {file, write_echo(config, out)};
  res.report = note.str();
  return res;
}

CommandResult cmd_sample(const RunConfig& config, const fs::path& out) {
  const auto real = sample_realization(config.disorder, config.lattice, config.realization);
  const fs::path file = out / "realization.csv";
  auto os = open_output(file);
  write_realization_csv(os, real);
  close_checked(os, file);
  return {{file, write_echo(config, out)}, "realization " + std::to_string(config.realization)};
}

EnsembleResult run_config_ensemble(const RunConfig& config) {
  EnsembleOptions opt;
  opt.realizations = config.K;
  opt.window = config.window();
  return run_ensemble(config.disorder, config.lattice, config.initial_state(), config.grid(), opt);
}

std::vector<fs::path> write_ensemble(const EnsembleResult& r, const fs::path& out) {
  const std::size_t nt = r.times.size();
  std::vector<fs::path> files;
  {
    const fs::path file = out / "scalars.csv";
    auto os = open_output(file);
    CsvWriter csv(os, {"time", "pop_full", "pop_partial", "mom_variance", "pop_full_stderr", "pop_partial_stderr",
                       "mom_variance_stderr"});
    for (std::size_t k = 0; k < nt; ++k)
      csv.row(r.times[k], r.pop_full[k], r.pop_partial[k], r.mom_variance[k], r.pop_full_se[k], r.pop_partial_se[k],
              r.mom_variance_se[k]);
    close_checked(os, file);
    files.push_back(file);
  }
  {
    const fs::path file = out / "xdist.csv";
    auto os = open_output(file);
    CsvWriter csv(os, {"time", "cell", "density"});
    for (std::size_t k = 0; k < nt; ++k)
      for (Eigen::Index j = 0; j < r.xdist.cols(); ++j)
        csv.row(r.times[k], static_cast<long>(j), r.xdist(static_cast<Eigen::Index>(k), j));
    close_checked(os, file);
    files.push_back(file);
  }
  {
    const fs::path file = out / "pdist.csv";
    auto os = open_output(file);
    CsvWriter csv(os, {"time", "p", "density_f", "density_d"});
    for (std::size_t k = 0; k < nt; ++k)
      for (std::size_t n = 0; n < r.momenta.size(); ++n) {
        const auto kk = static_cast<Eigen::Index>(k);
        const auto nn = static_cast<Eigen::Index>(n);
        csv.row(r.times[k], r.momenta[n], r.pdist_f(kk, nn), r.pdist_d(kk, nn));
      }
    close_checked(os, file);
    files.push_back(file);
  }
  return files;
}

CommandResult cmd_evolve(const RunConfig& config, const fs::path& out) {
  const EnsembleResult r = run_config_ensemble(config);
  CommandResult res;
  res.files = write_ensemble(r, out);
  res.files.push_back(write_echo(config, out));
  std::ostringstream os;
  os << "K=" << r.realizations << " max_norm_drift=" << r.max_norm_drift << " max_energy_drift=" << r.max_energy_drift;
  res.report = os.str();
  return res;
}

Prediction run_config_prediction(const RunConfig& config) {
  const EffectiveModel model(config.lattice, config.disorder);
  const auto dens = momentum_density(config.initial_state(), config.lattice);
  const MomentumDensity initial{dens.flat, 0.0};
  const TimeGrid grid = config.grid();
  MasterOptions asym;
  asym.asymptotic_rates = true;
  return {evolve_momentum_master(initial, model, grid), evolve_momentum_master(initial, model, grid, asym)};
}

std::vector<fs::path> write_prediction(const Prediction& pr, const fs::path& out) {
  std::vector<fs::path> files;
  const auto& ex = pr.exact_rates;
  {
    const fs::path file = out / "survival_pred.csv";
    auto os = open_output(file);
    CsvWriter csv(os, {"time", "survival_pred", "survival_pred_asymptotic"});
    for (std::size_t k = 0; k < ex.states.size(); ++k)
      csv.row(ex.states[k].time, ex.states[k].total(), pr.asymptotic_rates.states[k].total());
    close_checked(os, file);
    files.push_back(file);
  }
  {
    const fs::path file = out / "pdist_pred.csv";
    auto os = open_output(file);
    CsvWriter csv(os, {"time", "p", "density_f"});
    for (const auto& s : ex.states)
      for (std::size_t n = 0; n < ex.momenta.size(); ++n) csv.row(s.time, ex.momenta[n], s.values[n]);
    close_checked(os, file);
    files.push_back(file);
  }
  return files;
}

CommandResult cmd_predict(const RunConfig& config, const fs::path& out) {
  const Prediction pr = run_config_prediction(config);
  CommandResult res;
  res.files = write_prediction(pr, out);
  res.files.push_back(write_echo(config, out));
  res.report = "dt=" + format_double(pr.exact_rates.dt) + " steps=" + std::to_string(pr.exact_rates.steps);
  return res;
}

CommandResult cmd_lifetime(const RunConfig& config, const fs::path& out) {
  const EffectiveModel model(config.lattice, config.disorder);
  const LifetimeEstimate est = lifetime_estimate(config.p0, model);
  std::ostringstream line;
  if (est.unbounded) {
    line << "tau=inf (delta=-1, no dephasing channel)";
  } else {
    line << "tau=" << format_double(est.tau);
  }
  line << " nearest_intersection=" << est.nearest.index << " p=" << format_double(est.nearest.momentum)
       << " v=" << format_double(est.nearest.velocity);
  const fs::path file = out / "lifetime.txt";
  auto os = open_output(file);
  os << line.str() << '\n';
  close_checked(os, file);
  return {{file, write_echo(config, out)}, line.str()};
}

CompareReport cmd_compare(const fs::path& exact_dir, const fs::path& pred_dir, const fs::path& out) {
  const CsvTable exact = read_csv_file((exact_dir / "scalars.csv").string());
  const CsvTable pred = read_csv_file((pred_dir / "survival_pred.csv").string());
  const auto te = exact.values("time");
  const auto tp = pred.values("time");
  const auto se = exact.values("pop_partial");
  const auto err = exact.values("pop_partial_stderr");
  const auto sp = pred.values("survival_pred");

  const std::size_t n = std::min(te.size(), tp.size());
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(te[k] - tp[k]) > 1e-9 * std::max(1.0, std::abs(te[k])))
      throw JoinError("time grids differ; first mismatch at exact t=" + format_double(te[k]) +
                      " vs predicted t=" + format_double(tp[k]));
  }
  if (te.size() != tp.size()) {
    const double first = te.size() > n ? te[n] : tp[n];
    throw JoinError("time grids differ in length; first unmatched time t=" + format_double(first));
  }

  CompareReport rep;
  rep.file = out / "compare.csv";
  auto os = open_output(rep.file);
  CsvWriter csv(os, {"time", "survival_exact", "survival_pred", "abs_diff", "stderr_exact"});
  for (std::size_t k = 0; k < n; ++k) {
    const double d = std::abs(se[k] - sp[k]);
    rep.times.push_back(te[k]);
    rep.survival_exact.push_back(se[k]);
    rep.survival_pred.push_back(sp[k]);
    rep.abs_diff.push_back(d);
    rep.stderr_exact.push_back(err[k]);
    if (te[k] <= kCompareHorizon + 1e-12) rep.max_abs_diff = std::max(rep.max_abs_diff, d);
    csv.row(te[k], se[k], sp[k], d, err[k]);
  }
  csv.row(std::string("max_abs_diff_t_le_20"), std::string(), std::string(), rep.max_abs_diff, std::string());
  close_checked(os, rep.file);
  return rep;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParameterError*>(&e) ||
      dynamic_cast<const UnsupportedError*>(&e))
    return 2;
  if (dynamic_cast<const IoError*>(&e) || dynamic_cast<const JoinError*>(&e)) return 4;
  return 3;
}

}  // namespace flatband
