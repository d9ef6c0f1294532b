#include "flatband/config.hpp"

#include "flatband/csv.hpp"
#include "flatband/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace flatband {

bool RunConfig::operator==(const RunConfig& o) const {
  auto same_lattice = [](const LatticeParams& x, const LatticeParams& y) {
    return x.J == y.J && x.t_ab == y.t_ab && x.N == y.N && x.a == y.a;
  };
  auto same_disorder = [](const DisorderSpec& x, const DisorderSpec& y) {
    return x.kind == y.kind && x.C0 == y.C0 && x.ell == y.ell && x.delta == y.delta &&
           x.master_seed == y.master_seed;
  };
  return preset == o.preset && same_lattice(lattice, o.lattice) && same_disorder(disorder, o.disorder) &&
         amplitude_from_W == o.amplitude_from_W && W == o.W && x0 == o.x0 && sigma_x2 == o.sigma_x2 && p0 == o.p0 &&
         t_max == o.t_max && n_times == o.n_times && K == o.K && window_half_width == o.window_half_width &&
         realization == o.realization && out == o.out;
}

TwoBandState RunConfig::initial_state() const { return gaussian_flatband_state(lattice, x0, sigma_x2, p0); }

std::string RunConfig::echo() const {
  std::ostringstream os;
  os << "# resolved configuration\n";
  if (!preset.empty()) os << "preset=" << preset << '\n';
  os << "J=" << format_double(lattice.J) << '\n';
  os << "t_ab=" << format_double(lattice.t_ab) << '\n';
  os << "N=" << lattice.N << '\n';
  os << "a=" << format_double(lattice.a) << '\n';
  if (amplitude_from_W) {
    os << "W=" << format_double(W) << '\n';
  } else {
    os << "C0=" << format_double(disorder.C0) << '\n';
  }
  os << "ell=" << format_double(disorder.ell) << '\n';
  os << "delta=" << format_double(disorder.delta) << '\n';
  os << "kind=" << to_string(disorder.kind) << '\n';
  os << "seed=" << disorder.master_seed << '\n';
  os << "x0=" << format_double(x0) << '\n';
  os << "sigma_x2=" << format_double(sigma_x2) << '\n';
  os << "p0=" << format_double(p0) << '\n';
  os << "t_max=" << format_double(t_max) << '\n';
  os << "n_times=" << n_times << '\n';
  os << "K=" << K << '\n';
  os << "window=" << window_half_width << '\n';
  os << "realization=" << realization << '\n';
  os << "out=" << out << '\n';
  return os.str();
}

namespace {

constexpr std::uint64_t kDefaultSeed = 1;

RunConfig figure_preset(double t_ab, double p0, const char* name) {
  RunConfig c;
  c.preset = name;
  c.lattice = LatticeParams{1.0, t_ab, 100, 1.0};
  c.disorder = DisorderSpec::from_amplitude(0.5, 6.0, 0.0, kDefaultSeed);
  c.amplitude_from_W = true;
  c.W = 0.5;
  c.x0 = 50.0;
  c.sigma_x2 = 12.0;
  c.p0 = p0;
  c.t_max = 40.0;
  c.n_times = 81;
  c.K = 200;
  c.window_half_width = 8;
  return c;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries) : entries_(std::move(entries)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  int line(const std::string& key) const { return has(key) ? entries_.at(key).line : 0; }

  std::optional<double> real(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    double v = 0.0;
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto r = std::from_chars(b, end, v);
    if (r.ec != std::errc() || r.ptr != end || !std::isfinite(v))
      throw ConfigError(key + ": expected a finite number, got '" + e.value + "'", key, e.line);
    return v;
  }

  template <typename Int>
  std::optional<Int> integer(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    const auto& e = entries_.at(key);
    Int v{};
    const char* b = e.value.data();
    const char* end = b + e.value.size();
    auto r = std::from_chars(b, end, v);
    if (r.ec != std::errc() || r.ptr != end)
      throw ConfigError(key + ": expected an integer, got '" + e.value + "'", key, e.line);
    return v;
  }

  std::optional<std::string> text(const std::string& key) const {
    if (!has(key)) return std::nullopt;
    return entries_.at(key).value;
  }

  [[noreturn]] void range_error(const std::string& key, const std::string& rule) const {
    throw ConfigError(key + ": value " + entries_.at(key).value + " out of range (" + rule + ")", key, line(key));
  }

 private:
  std::map<std::string, Entry> entries_;
};

const std::map<std::string, std::string>& aliases() {
  static const std::map<std::string, std::string> m{{"p_0", "p0"}, {"x_0", "x0"}, {"C_0", "C0"}};
  return m;
}

const std::vector<std::string>& known_keys() {
  static const std::vector<std::string> k{"preset", "J",  "t_ab",     "N",  "a",     "W",       "C0",
                                          "ell",    "delta", "kind",  "seed", "x0", "sigma_x2", "p0",
                                          "t_max",  "n_times", "K",    "window", "realization", "out"};
  return k;
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names{"fig2-case-i", "fig2-case-ii"};
  return names;
}

RunConfig preset_config(std::string_view name) {
  if (name == "fig2-case-i") return figure_preset(1.0, 1.26, "fig2-case-i");
  if (name == "fig2-case-ii") return figure_preset(0.6, 0.0, "fig2-case-ii");
  throw ConfigError("unknown preset '" + std::string(name) + "'", "preset");
}

RunConfig parse_config(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key=value, got '" + line + "'", {}, lineno);
    std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (auto it = aliases().find(key); it != aliases().end()) key = it->second;
    bool known = false;
    for (const auto& k : known_keys()) known = known || k == key;
    if (!known) throw ConfigError("unknown key '" + key + "'", key, lineno);
    if (value.empty()) throw ConfigError(key + ": empty value", key, lineno);
    if (entries.count(key)) throw ConfigError("duplicate key '" + key + "'", key, lineno);
    entries.emplace(key, Entry{value, lineno});
  }
  const Reader r(std::move(entries));

  RunConfig c;
  bool have_x0 = false;
  if (auto name = r.text("preset")) {
    try {
      c = preset_config(*name);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), "preset", r.line("preset"));
    }
    have_x0 = true;
  } else {
    c.disorder.master_seed = kDefaultSeed;
    for (const char* key : {"t_ab", "N"})
      if (!r.has(key)) throw ConfigError(std::string("missing required key '") + key + "'", key);
    if (!r.has("W") && !r.has("C0")) throw ConfigError("missing required key 'W' (or 'C0')", "W");
  }

  if (auto v = r.real("J")) {
    if (!(*v > 0.0)) r.range_error("J", "J > 0");
    c.lattice.J = *v;
  }
  if (auto v = r.real("t_ab")) c.lattice.t_ab = *v;
  if (auto v = r.integer<int>("N")) {
    if (*v < 4) r.range_error("N", "N >= 4");
    c.lattice.N = *v;
  }
  if (auto v = r.real("a")) {
    if (!(*v > 0.0)) r.range_error("a", "a > 0");
    c.lattice.a = *v;
  }
  if (r.has("W") && r.has("C0")) throw ConfigError("give either W or C0, not both", "C0", r.line("C0"));
  if (auto v = r.real("W")) {
    if (!(*v > 0.0)) r.range_error("W", "W > 0");
    c.disorder.C0 = *v * *v / 12.0;
    c.amplitude_from_W = true;
    c.W = *v;
  }
  if (auto v = r.real("C0")) {
    if (!(*v > 0.0)) r.range_error("C0", "C0 > 0");
    c.disorder.C0 = *v;
    c.amplitude_from_W = false;
    c.W = 0.0;
  }
  if (auto v = r.text("kind")) {
    if (*v == "gaussian") {
      c.disorder.kind = DisorderKind::gaussian;
    } else if (*v == "white") {
      c.disorder.kind = DisorderKind::white_noise;
    } else {
      throw ConfigError("kind: expected 'gaussian' or 'white', got '" + *v + "'", "kind", r.line("kind"));
    }
  }
  if (auto v = r.real("ell")) {
    if (!(*v > 0.0)) r.range_error("ell", "ell > 0");
    c.disorder.ell = *v;
  } else if (c.preset.empty() && c.disorder.kind == DisorderKind::gaussian) {
    throw ConfigError("missing required key 'ell' for Gaussian disorder", "ell");
  }
  if (auto v = r.real("delta")) {
    if (!(*v >= -1.0 && *v <= 1.0)) r.range_error("delta", "-1 <= delta <= 1");
    c.disorder.delta = *v;
  }
  if (auto v = r.integer<std::uint64_t>("seed")) c.disorder.master_seed = *v;
  if (auto v = r.real("x0")) {
    c.x0 = *v;
    have_x0 = true;
  }
  if (!have_x0) c.x0 = 0.5 * c.lattice.N * c.lattice.a;
  if (!(c.x0 >= 0.0 && c.x0 < c.lattice.length())) {
    if (r.has("x0")) r.range_error("x0", "0 <= x0 < N a");
    throw ConfigError("x0 outside the lattice for the given N", "x0");
  }
  if (auto v = r.real("sigma_x2")) {
    if (!(*v > 0.0)) r.range_error("sigma_x2", "sigma_x2 > 0");
    c.sigma_x2 = *v;
  }
  if (auto v = r.real("p0")) c.p0 = *v;
  if (auto v = r.real("t_max")) {
    if (!(*v > 0.0 && *v <= TimeGrid::kDefaultBound)) r.range_error("t_max", "0 < t_max <= 1e4");
    c.t_max = *v;
  }
  if (auto v = r.integer<int>("n_times")) {
    if (*v < 2) r.range_error("n_times", "n_times >= 2");
    c.n_times = *v;
  }
  if (auto v = r.integer<long long>("K")) {
    if (*v < 1) r.range_error("K", "K >= 1");
    c.K = static_cast<std::size_t>(*v);
  }
  if (auto v = r.integer<int>("window")) {
    if (*v < 0) r.range_error("window", "window >= 0");
    c.window_half_width = *v;
  }
  if (2 * c.window_half_width + 1 > c.lattice.N) {
    if (r.has("window")) r.range_error("window", "2*window+1 <= N");
    throw ConfigError("carrier window wider than the lattice", "window");
  }
  if (auto v = r.integer<std::uint64_t>("realization")) c.realization = *v;
  if (auto v = r.text("out")) c.out = *v;

  try {
    c.lattice.validate();
    c.disorder.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(e.what());
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace flatband
