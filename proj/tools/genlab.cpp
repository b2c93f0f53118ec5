// genlab command-line front end.
//
//   genlab run    --config cfg.json [--workers N] [--out DIR]
//   genlab plot   --rows results.csv --kind divergence_vs_width --out p.svg
//   genlab verify
//
// Exit codes: 0 success, 1 runtime/cell failure, 2 usage or config error.

#include <cstdlib>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "genlab/common.hpp"
#include "genlab/svg_plot.hpp"
#include "genlab/sweep.hpp"
#include "genlab/verify.hpp"

namespace {

// GENLAB_SEED overrides the configured master seed (sweep reruns without
// editing the config).  Anything but a bare unsigned decimal is rejected.
void apply_seed_env(genlab::SweepSpec& spec) {
  const char* env = std::getenv("GENLAB_SEED");
  if (!env || !*env) return;
  char* end = nullptr;
  errno = 0;
  const unsigned long long v = std::strtoull(env, &end, 10);
  if (errno != 0 || end == env || *end != '\0' || env[0] == '-')
    throw genlab::ConfigError(std::string("GENLAB_SEED is not a valid seed: '") +
                              env + "'");
  spec.master_seed = v;
}

int cmd_run(const std::string& config_path, int workers,
            const std::string& out_override) {
  genlab::SweepSpec spec = genlab::load_sweep_config(config_path);
  if (!out_override.empty()) spec.out_dir = out_override;
  apply_seed_env(spec);
  if (spec.out_dir.empty())
    throw genlab::ConfigError("run requires an output directory");

  const genlab::ExperimentResult result =
      genlab::run_experiment(spec, workers, std::cout);
  if (result.failed_cells > 0) {
    std::cerr << "genlab: " << result.failed_cells
              << " cell(s) failed; see results.csv status column\n";
    return 1;
  }
  return 0;
}

int cmd_plot(const std::string& rows_path, const std::string& kind_name,
             const std::string& out_path) {
  const genlab::PlotKind kind = genlab::plot_kind_from_string(kind_name);
  const std::vector<genlab::SweepRow> rows = genlab::read_rows_csv(rows_path);
  genlab::write_svg_plot(rows, kind, out_path);
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"genlab: WGAN capacity-sweep laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  int workers = 1;
  std::string out_override;
  CLI::App* run = app.add_subcommand("run", "train a sweep and write artifacts");
  run->add_option("--config", config_path, "sweep config JSON")->required();
  run->add_option("--workers", workers, "parallel cells")->check(CLI::Range(1, 64));
  run->add_option("--out", out_override, "override the config's out_dir");

  std::string rows_path, kind_name, plot_out;
  CLI::App* plot = app.add_subcommand("plot", "render an SVG from results.csv");
  plot->add_option("--rows", rows_path, "results.csv path")->required();
  plot->add_option("--kind", kind_name,
                   "divergence_vs_width | gap_vs_width | frechet_vs_divergence")
      ->required();
  plot->add_option("--out", plot_out, "output SVG path")->required();

  CLI::App* verify = app.add_subcommand("verify", "self-check the installation");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);  // help text, exit 0
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, workers, out_override);
    if (plot->parsed()) return cmd_plot(rows_path, kind_name, plot_out);
    if (verify->parsed()) return genlab::run_verify(std::cout) ? 0 : 1;
  } catch (const genlab::ConfigError& e) {
    std::cerr << "genlab: config error: " << e.what() << "\n";
    return 2;
  } catch (const genlab::SpecError& e) {
    std::cerr << "genlab: config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "genlab: error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
