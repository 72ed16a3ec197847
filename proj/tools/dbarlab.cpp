// Configuration-driven laboratory for the pseudo-holomorphic map energy and
// its negative-gradient flow. See README.md for the config format.

#include <CLI11.hpp>

#include "dbar/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for pseudo-holomorphic map flows"};
  std::string config_path;
  std::string output_dir = "out";
  std::int64_t seed_override = -1;
  bool quiet = false;
  app.add_option("--config", config_path, "run configuration file")->required();
  app.add_option("--output", output_dir, "output directory (default ./out)");
  app.add_option("--seed", seed_override, "override the config seed");
  app.add_flag("--quiet", quiet, "suppress the summary line");
  CLI11_PARSE(app, argc, argv);

  dbar::CommandOptions opt;
  opt.output_dir = output_dir;
  opt.quiet = quiet;
  try {
    dbar::RunConfig cfg = dbar::parse_config_file(config_path);
    if (seed_override >= 0) cfg.seed = static_cast<std::uint64_t>(seed_override);
    return dbar::dispatch(cfg, opt);
  } catch (const dbar::config_error& e) {
    std::cerr << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
