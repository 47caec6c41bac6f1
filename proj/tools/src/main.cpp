#include <iostream>

#include <CLI11.hpp>

#include "l2t_cli/run.hpp"

using l2t::cli::Command;
using l2t::cli::RunConfig;

namespace {

void add_common(CLI::App* app, RunConfig& cfg, bool input) {
  if (input) {
    app->add_option("--complex", cfg.complex_path, "cell complex or chain complex JSON")->required();
    app->add_option("--rep", cfg.rep_path, "representation JSON (cell complexes)");
    app->add_option("--backend", cfg.backend, "default representation: matrix (trivial), group or family (regular)");
    app->add_option("--epsilon", cfg.epsilon, "spectral split point override");
  }
  app->add_option("--grid", cfg.grid, "sample count for Family backends (default 4096)");
  app->add_option("--tol-rank", cfg.tol_rank, "relative rank tolerance");
  app->add_option("--tol-slack", cfg.tol_slack, "verdict slack in nats");
  app->add_option("--tol-agree", cfg.tol_agree, "agreement tolerance for consistency checks");
  app->add_option("--seed", cfg.seed, "seed for random suites");
  app->add_option("--out", cfg.out_dir, "output directory (default: report on stdout)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"L2-torsion of cochain complexes and CW complexes", "l2torsion"};
  app.require_subcommand(1);
  RunConfig cfg;
  const std::pair<Command, const char*> commands[] = {
      {Command::Torsion, "torsion as a determinant line element, with the scalar when available"},
      {Command::FkDet, "extended Fuglede-Kadison determinants of the differentials and Laplacians"},
      {Command::Density, "spectral density functions of the differentials as CSV"},
      {Command::DetClass, "determinant-class verdicts per degree"},
      {Command::Checks, "randomized consistency suites"},
      {Command::Examples, "write the bundled example inputs"},
  };
  for (const auto& [cmd, help] : commands) {
    CLI::App* sub = app.add_subcommand(l2t::cli::to_string(cmd), help);
    const bool input = cmd != Command::Checks && cmd != Command::Examples;
    add_common(sub, cfg, input);
    if (cmd == Command::Checks) sub->add_option("--suite", cfg.suite, "fk, epsilon, subdivision, exactseq or all");
    sub->callback([&cfg, cmd = cmd] { cfg.command = cmd; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return l2t::cli::kExitInvalid;
  }
  return l2t::cli::run(cfg, std::cout, std::cerr);
}
