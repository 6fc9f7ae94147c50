#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "riskgraph/error.hpp"
#include "riskgraph/pipeline.hpp"

namespace {

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> day;
  std::optional<std::string> variant;
  std::optional<std::string> out;
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool config_required) {
  auto* opt = cmd->add_option("--config", flags.config_path, "pipeline config JSON");
  if (config_required) opt->required();
  cmd->add_option("--seed", flags.seed, "master seed override");
  cmd->add_option("--day", flags.day, "prediction day override");
  cmd->add_option("--variant", flags.variant,
                  "model variant: knn-gcn | diffusion-gcn | diffusion-gcn-age | logistic | knn");
  cmd->add_option("--out", flags.out, "output directory override");
}

riskgraph::PipelineConfig resolve(const CommonFlags& flags) {
  riskgraph::PipelineConfig cfg = riskgraph::load_config(flags.config_path);
  if (flags.seed) cfg.master_seed = *flags.seed;
  if (flags.day) cfg.day = *flags.day;
  if (flags.variant) cfg.variant = *flags.variant;
  if (flags.out) cfg.out_dir = *flags.out;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"graph-based progressive hospital-transfer risk prediction toolkit"};
  app.require_subcommand(1);

  CommonFlags generate_flags, run_flags, analyze_flags;
  std::vector<std::string> report_dirs;

  auto* generate = app.add_subcommand("generate", "write a synthetic cohort as CSV files");
  add_common(generate, generate_flags, true);

  auto* run = app.add_subcommand("run", "train one model variant and evaluate a day-T task");
  add_common(run, run_flags, true);

  auto* analyze =
      app.add_subcommand("analyze", "post-hoc graph clustering and survival analysis");
  add_common(analyze, analyze_flags, true);

  auto* report = app.add_subcommand("report", "combine run reports into one table");
  report->add_option("dirs", report_dirs, "run output directories")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (generate->parsed()) {
      riskgraph::cmd_generate(resolve(generate_flags), std::cout);
    } else if (run->parsed()) {
      riskgraph::cmd_run(resolve(run_flags), std::cout);
    } else if (analyze->parsed()) {
      riskgraph::cmd_analyze(resolve(analyze_flags), std::cout);
    } else if (report->parsed()) {
      riskgraph::cmd_report(report_dirs, std::cout);
    }
  } catch (const riskgraph::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
