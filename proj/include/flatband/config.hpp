#pragma once

// Flat key=value run configuration with named experiment presets.

#include "flatband/disorder.hpp"
#include "flatband/lattice.hpp"
#include "flatband/observables.hpp"
#include "flatband/state.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace flatband {

struct RunConfig {
  std::string preset;  // empty when none
  LatticeParams lattice;
  DisorderSpec disorder;
  bool amplitude_from_W = true;  // which of W / C0 was given; echoed back the same way
  double W = 0.0;                // as given, when amplitude_from_W

  double x0 = 0.0;
  double sigma_x2 = 12.0;
  double p0 = 0.0;

  double t_max = 40.0;
  int n_times = 81;
  std::size_t K = 200;
  int window_half_width = 8;
  std::uint64_t realization = 0;  // index written by `sample`
  std::string out = ".";

  TimeGrid grid() const { return TimeGrid::uniform(t_max, n_times); }
  CarrierWindow window() const { return {x0 / lattice.a, window_half_width}; }
  TwoBandState initial_state() const;

  // Resolved key=value text; parse_config(echo()) reproduces this config.
  std::string echo() const;

  bool operator==(const RunConfig&) const;
};

const std::vector<std::string>& preset_names();
RunConfig preset_config(std::string_view name);

RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::string& path);

}  // namespace flatband
