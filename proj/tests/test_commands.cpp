#include "flatband/commands.hpp"
#include "flatband/csv.hpp"
#include "flatband/errors.hpp"

#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace flatband;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("flatband_cmd_" + std::to_string(rd()) + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

RunConfig small_config() {
  return parse_config("t_ab=0.6\nN=30\nW=0.5\nell=4\nx0=15\nsigma_x2=6\nK=3\nt_max=6\nn_times=7\nwindow=4\n");
}

}  // namespace

TEST_CASE("bands") {
  TempDir dir;
  auto cfg = small_config();
  const auto res = cmd_bands(cfg, dir.path);
  REQUIRE(res.files.size() == 2);
  const auto table = read_csv_file((dir.path / "bands.csv").string());
  CHECK(table.header == std::vector<std::string>{"k", "E_f", "E_d"});
  CHECK(table.rows.size() == 30);
  CHECK(slurp(dir.path / "bands.csv").find("# intersections: p1=1.8754889808102941") != std::string::npos);
  CHECK(parse_config(slurp(dir.path / "resolved_config.txt")) == cfg);

  cfg.lattice.t_ab = 2.5;
  const auto none = cmd_bands(cfg, dir.path);
  CHECK(none.report.find("no intersections") != std::string::npos);
  CHECK(slurp(dir.path / "bands.csv").find("no intersections") != std::string::npos);
}

TEST_CASE("sample") {
  TempDir dir;
  auto cfg = small_config();
  cfg.realization = 4;
  cmd_sample(cfg, dir.path);
  const auto table = read_csv_file((dir.path / "realization.csv").string());
  const auto r = sample_realization(cfg.disorder, cfg.lattice, 4);
  REQUIRE(table.rows.size() == 30);
  CHECK(table.values("V_a")[7] == r.Va[7]);
  CHECK(table.values("V_b")[29] == r.Vb[29]);
}

TEST_CASE("evolve is byte-reproducible") {
  TempDir a, b;
  auto cfg = small_config();
  cfg.K = 1;
  cmd_evolve(cfg, a.path);
  cmd_evolve(cfg, b.path);
  for (const char* f : {"scalars.csv", "xdist.csv", "pdist.csv", "resolved_config.txt"})
    CHECK(slurp(a.path / f) == slurp(b.path / f));

  const auto scalars = read_csv_file((a.path / "scalars.csv").string());
  CHECK(scalars.header == std::vector<std::string>{"time", "pop_full", "pop_partial", "mom_variance", "pop_full_stderr",
                                                   "pop_partial_stderr", "mom_variance_stderr"});
  CHECK(scalars.rows.size() == 7);
  CHECK(read_csv_file((a.path / "xdist.csv").string()).rows.size() == 7 * 30);
  const auto pdist = read_csv_file((a.path / "pdist.csv").string());
  CHECK(pdist.header == std::vector<std::string>{"time", "p", "density_f", "density_d"});
  CHECK(pdist.rows.size() == 7 * 30);

  // full precision on disk
  const auto res = run_config_ensemble(cfg);
  CHECK(scalars.values("pop_partial")[3] == res.pop_partial[3]);
}

TEST_CASE("predict, lifetime and compare") {
  TempDir exact, pred, out;
  const auto cfg = small_config();
  cmd_evolve(cfg, exact.path);
  cmd_predict(cfg, pred.path);
  const auto surv = read_csv_file((pred.path / "survival_pred.csv").string());
  CHECK(surv.header == std::vector<std::string>{"time", "survival_pred", "survival_pred_asymptotic"});
  CHECK(surv.rows.size() == 7);
  CHECK(surv.values("survival_pred")[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(read_csv_file((pred.path / "pdist_pred.csv").string()).rows.size() == 7 * 30);

  const auto rep = cmd_compare(exact.path, pred.path, out.path);
  REQUIRE(rep.times.size() == 7);
  const auto table = read_csv_file(rep.file.string());
  CHECK(table.header == std::vector<std::string>{"time", "survival_exact", "survival_pred", "abs_diff", "stderr_exact"});
  REQUIRE(table.labelled_rows.size() == 1);
  CHECK(table.labelled_rows[0][0] == "max_abs_diff_t_le_20");
  CHECK(std::stod(table.labelled_rows[0][3]) == rep.max_abs_diff);
  for (std::size_t k = 0; k < 7; ++k)
    CHECK(rep.abs_diff[k] == doctest::Approx(std::abs(rep.survival_exact[k] - rep.survival_pred[k])));

  SUBCASE("identical inputs") {
    // a prediction directory whose survival is the exact curve itself
    TempDir same;
    const auto sc = read_csv_file((exact.path / "scalars.csv").string());
    std::ofstream os(same.path / "survival_pred.csv");
    CsvWriter csv(os, {"time", "survival_pred", "survival_pred_asymptotic"});
    for (std::size_t k = 0; k < sc.rows.size(); ++k)
      csv.row(sc.values("time")[k], sc.values("pop_partial")[k], sc.values("pop_partial")[k]);
    os.close();
    const auto zero = cmd_compare(exact.path, same.path, out.path);
    for (double d : zero.abs_diff) CHECK(d == 0.0);
    CHECK(zero.max_abs_diff == 0.0);
  }
  SUBCASE("grid mismatch") {
    TempDir other;
    auto shifted = cfg;
    shifted.t_max = 7.0;
    cmd_predict(shifted, other.path);
    try {
      cmd_compare(exact.path, other.path, out.path);
      FAIL("expected a join error");
    } catch (const JoinError& e) {
      CHECK(std::string(e.what()).find("t=1") != std::string::npos);
    }
    auto longer = cfg;
    longer.t_max = 12.0;
    longer.n_times = 13;
    cmd_predict(longer, other.path);
    CHECK_THROWS_AS(cmd_compare(exact.path, other.path, out.path), JoinError);
    CHECK_THROWS_AS(cmd_compare(exact.path, out.path / "missing", out.path), IoError);
  }
  SUBCASE("lifetime") {
    const auto res = cmd_lifetime(parse_config("preset=fig2-case-ii"), out.path);
    const std::string line = slurp(out.path / "lifetime.txt");
    CHECK(line.rfind("tau=77.96", 0) == 0);
    CHECK(line.find("nearest_intersection=1") != std::string::npos);
    CHECK(line.find("p=1.8754889808102941") != std::string::npos);
    const auto inf = cmd_lifetime(parse_config("preset=fig2-case-ii\ndelta=-1"), out.path);
    CHECK(inf.report.rfind("tau=inf", 0) == 0);
  }
}

TEST_CASE("exit codes") {
  CHECK(exit_code_for(ConfigError("x")) == 2);
  CHECK(exit_code_for(ParameterError("x")) == 2);
  CHECK(exit_code_for(UnsupportedError("x")) == 2);
  CHECK(exit_code_for(NumericalError("x")) == 3);
  CHECK(exit_code_for(std::runtime_error("x")) == 3);
  CHECK(exit_code_for(IoError("x")) == 4);
  CHECK(exit_code_for(JoinError("x")) == 4);
}

#ifdef FLATBAND_LAB_EXE
namespace {
int run_tool(const std::string& args) {
  const std::string cmd = std::string("\"") + FLATBAND_LAB_EXE + "\" " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}
}  // namespace

TEST_CASE("command line tool") {
  TempDir dir;
  const auto good = dir.path / "good.cfg";
  write_file(good, "preset=fig2-case-ii\n");
  const auto bad = dir.path / "bad.cfg";
  write_file(bad, "preset=fig2-case-ii\ndelta=1.5\n");
  const auto white = dir.path / "white.cfg";
  write_file(white, "preset=fig2-case-ii\nkind=white\n");
  const std::string out = " --out \"" + (dir.path / "o").string() + "\"";

  CHECK(run_tool("lifetime --config \"" + good.string() + "\"" + out) == 0);
  CHECK(fs::exists(dir.path / "o" / "lifetime.txt"));
  CHECK(run_tool("bands --config \"" + good.string() + "\"" + out) == 0);
  CHECK(run_tool("lifetime --config \"" + bad.string() + "\"" + out) == 2);
  CHECK(run_tool("lifetime --config \"" + white.string() + "\"" + out) == 2);
  CHECK(run_tool("lifetime --config \"" + (dir.path / "nope.cfg").string() + "\"") == 4);
  CHECK(run_tool("frobnicate --config \"" + good.string() + "\"") == 2);
  CHECK(run_tool("lifetime") == 2);
  CHECK(run_tool("compare --exact \"" + dir.path.string() + "\" --pred \"" + dir.path.string() + "\"" + out) == 4);
  CHECK(run_tool("compare") == 2);
}
#endif
