// qdm: noise budget, simulation, scatter recovery and spectra from the command line.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qdm/commands.hpp"
#include "qdm/error.hpp"
#include "qdm/run_config.hpp"

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "key = value configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "noise seed, overrides the config");
}

qdm::RunConfig resolve(const Common& c) {
  qdm::RunConfig cfg = c.config.empty() ? qdm::RunConfig{} : qdm::load_run_config(c.config);
  if (c.seed) cfg.sim.noise.seed = *c.seed;
  if (!c.out.empty()) cfg.output_dir = c.out;
  return cfg;
}

void print_summary(const qdm::KeyValueFile& kv) {
  for (const auto& [k, v] : kv.entries) std::cout << k << " = " << v << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum dense metrology toolkit"};
  app.require_subcommand(1);

  Common common;
  qdm::BudgetRequest budget;
  auto* budget_cmd = app.add_subcommand("budget", "sweep the SNR reduction factor over squeezing and efficiency");
  budget_cmd->add_option("--out", common.out, "output directory");
  budget_cmd->add_option("--db-min", budget.db_min, "smallest squeezing in dB");
  budget_cmd->add_option("--db-max", budget.db_max, "largest squeezing in dB");
  budget_cmd->add_option("--db-step", budget.db_step, "squeezing step in dB");
  budget_cmd->add_option("--eta-min", budget.eta_min, "smallest detection efficiency");
  budget_cmd->add_option("--eta-max", budget.eta_max, "largest detection efficiency");
  budget_cmd->add_option("--eta-step", budget.eta_step, "efficiency step");

  auto* sim_cmd = app.add_subcommand("simulate", "write a synthetic two-channel dataset");
  add_common(sim_cmd, common);

  std::string dataset;
  auto* fit_cmd = app.add_subcommand("fit", "fit and subtract the scatter disturbance from a dataset");
  add_common(fit_cmd, common);
  fit_cmd->add_option("dataset", dataset, "dataset CSV (t,bhd1,bhd2)")->required()->check(CLI::ExistingFile);

  std::string channel = "bhd2";
  std::string shot;
  auto* psd_cmd = app.add_subcommand("psd", "Welch spectrum of one channel");
  add_common(psd_cmd, common);
  psd_cmd->add_option("dataset", dataset, "dataset CSV (t,bhd1,bhd2)")->required()->check(CLI::ExistingFile);
  psd_cmd->add_option("--channel", channel, "bhd1 or bhd2")->check(CLI::IsMember({"bhd1", "bhd2"}));
  psd_cmd->add_option("--shot", shot, "shot reference CSV for dB output")->check(CLI::ExistingFile);

  auto* pipe_cmd = app.add_subcommand("pipeline", "simulate, fit, subtract and write spectra and a summary");
  add_common(pipe_cmd, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (*budget_cmd) {
      const std::filesystem::path dir = std::filesystem::path(common.out.empty() ? "out" : common.out);
      qdm::cmd_budget(budget, dir / "budget.csv", std::cout);
    } else if (*sim_cmd) {
      const qdm::RunConfig cfg = resolve(common);
      const qdm::SimulateReport rep = qdm::cmd_simulate(cfg, cfg.output_dir);
      std::cout << "wrote " << rep.rows << " rows to " << rep.dataset.string() << '\n';
    } else if (*fit_cmd) {
      const qdm::RunConfig cfg = resolve(common);
      const qdm::RecoveryResult rec = qdm::cmd_fit(dataset, cfg, cfg.output_dir);
      print_summary(qdm::fit_report(rec));
      if (rec.fit && !rec.fit->converged) {
        std::cerr << "fit did not converge\n";
        return 2;
      }
    } else if (*psd_cmd) {
      const qdm::RunConfig cfg = resolve(common);
      std::optional<std::filesystem::path> shot_path;
      if (!shot.empty()) shot_path = shot;
      for (const auto& p : qdm::cmd_psd(dataset, channel, shot_path, cfg, cfg.output_dir)) {
        std::cout << "wrote " << p.string() << '\n';
      }
    } else if (*pipe_cmd) {
      const qdm::RunConfig cfg = resolve(common);
      print_summary(qdm::cmd_pipeline(cfg, cfg.output_dir).to_key_values());
    }
  } catch (const qdm::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return qdm::exit_code_for(e.code());
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
