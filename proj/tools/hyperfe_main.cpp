#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "hyperfe/config.hpp"
#include "hyperfe/pipeline.hpp"

namespace {

hyperfe::Strain2D parse_eps_bar(const std::string& text) {
  std::istringstream in(text);
  double v[3];
  char sep;
  for (int i = 0; i < 3; ++i) {
    if (i > 0 && !((in >> sep) && sep == ','))
      throw std::invalid_argument("--eps-bar expects \"a,b,c\"");
    if (!(in >> v[i]))
      throw std::invalid_argument("--eps-bar expects three numbers");
  }
  std::string rest;
  if (in >> rest) throw std::invalid_argument("--eps-bar has trailing input");
  return {v[0], v[1], v[2]};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiscale solid-mechanics pipeline: RVE data generation, "
               "POD + branch-net training, and macro solves with a reference "
               "or hybrid micro evaluator"};
  app.require_subcommand(1);
  app.fallthrough();  // accept global options after the subcommand too

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("--config", config_path, "Run configuration file (TOML)");
  app.add_option("--seed", seed, "Override sampling and training seeds");
  app.add_option("--threads", threads, "Override the sample-parallelism degree");

  auto* generate =
      app.add_subcommand("generate", "Sample strains and solve the cell "
                                     "problems into a snapshot artifact");
  auto* train_cmd =
      app.add_subcommand("train", "Compute the POD basis and train the "
                                  "branch network");
  auto* eval_rve = app.add_subcommand(
      "eval-rve", "Compare reference and surrogate RVE fields at one strain");
  std::string eps_text = "-0.011,-0.036,0.017";
  eval_rve->add_option("--eps-bar", eps_text,
                       "Macro strain \"eps_xx,eps_yy,gamma_xy\"");
  auto* solve =
      app.add_subcommand("solve", "Run the macroscale Newton solve");
  std::string evaluator = "hybrid";
  solve->add_option("--evaluator", evaluator, "fe2 or hybrid")
      ->check(CLI::IsMember({"fe2", "hybrid"}));
  auto* benchmark = app.add_subcommand(
      "benchmark", "Solve with both evaluators and report errors + speed-up");

  CLI11_PARSE(app, argc, argv);

  try {
    hyperfe::RunConfig config = hyperfe::load_config(config_path);
    if (seed) {
      config.sampling.seed = *seed;
      config.training.seed = *seed;
    }
    if (threads) config.sampling.threads = *threads;
    config.validate();

    if (generate->parsed()) return hyperfe::cmd_generate(config);
    if (train_cmd->parsed()) return hyperfe::cmd_train(config);
    if (eval_rve->parsed())
      return hyperfe::cmd_eval_rve(config, parse_eps_bar(eps_text));
    if (solve->parsed()) return hyperfe::cmd_solve(config, evaluator);
    if (benchmark->parsed()) return hyperfe::cmd_benchmark(config);
    std::cerr << "error: no command given\n";
    return 2;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  }
}
