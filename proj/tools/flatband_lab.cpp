// flatband-lab <bands|sample|evolve|predict|compare|lifetime> --config <path> [--out <dir>]

#include "flatband/commands.hpp"
#include "flatband/errors.hpp"

#include <CLI11.hpp>

#include <iostream>

namespace {

using namespace flatband;

int run(const std::string& command, const std::string& config_path, const std::string& out_dir,
        const std::string& exact_dir, const std::string& pred_dir) {
  if (command == "compare") {
    if (exact_dir.empty() || pred_dir.empty()) throw ConfigError("compare needs --exact and --pred directories");
    const fs::path out = out_dir.empty() ? fs::path(".") : fs::path(out_dir);
    const auto rep = cmd_compare(exact_dir, pred_dir, out);
    std::cout << "max_abs_diff(t<=20)=" << rep.max_abs_diff << " -> " << rep.file.string() << '\n';
    return 0;
  }
  if (config_path.empty()) throw ConfigError(command + " needs --config");
  RunConfig config = load_config(config_path);
  if (!out_dir.empty()) config.out = out_dir;
  const fs::path out(config.out);

  CommandResult res;
  if (command == "bands") {
    res = cmd_bands(config, out);
  } else if (command == "sample") {
    res = cmd_sample(config, out);
  } else if (command == "evolve") {
    res = cmd_evolve(config, out);
  } else if (command == "predict") {
    res = cmd_predict(config, out);
  } else if (command == "lifetime") {
    res = cmd_lifetime(config, out);
  } else {
    throw ConfigError("unknown command '" + command + "'");
  }
  std::cout << res.report << '\n';
  for (const auto& f : res.files) std::cout << "  wrote " << f.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Disorder-induced decay of flatband states in the cross-stitch lattice"};
  std::string command, config_path, out_dir, exact_dir, pred_dir;
  app.add_option("command", command, "bands | sample | evolve | predict | compare | lifetime")
      ->required()
      ->check(CLI::IsMember({"bands", "sample", "evolve", "predict", "compare", "lifetime"}));
  app.add_option("--config", config_path, "key=value configuration file");
  app.add_option("--out", out_dir, "output directory (overrides the config's out key)");
  app.add_option("--exact", exact_dir, "compare: directory holding scalars.csv from evolve");
  app.add_option("--pred", pred_dir, "compare: directory holding survival_pred.csv from predict");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    return run(command, config_path, out_dir, exact_dir, pred_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return flatband::exit_code_for(e);
  }
}
