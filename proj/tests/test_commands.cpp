#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "qdm/commands.hpp"
#include "qdm/dataset_io.hpp"
#include "qdm/error.hpp"

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("qdm_test_commands_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::size_t count_lines(const fs::path& p) {
  const std::string text = slurp(p);
  return std::size_t(std::count(text.begin(), text.end(), '\n'));
}

int run_cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(QDM_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

double summary_value(const qdm::KeyValueFile& kv, const std::string& key) {
  const std::string* v = kv.find(key);
  REQUIRE(v != nullptr);
  return std::stod(*v);
}

}  // namespace

TEST_CASE("exit codes by error class") {
  CHECK(qdm::exit_code_for(qdm::ErrorCode::Config) == 1);
  CHECK(qdm::exit_code_for(qdm::ErrorCode::Parse) == 1);
  CHECK(qdm::exit_code_for(qdm::ErrorCode::DegenerateAmplitude) == 2);
  CHECK(qdm::exit_code_for(qdm::ErrorCode::SingularDesign) == 2);
  CHECK(qdm::exit_code_for(qdm::ErrorCode::Io) == 3);
}

TEST_CASE("budget command") {
  const fs::path dir = scratch("budget");
  std::ostringstream log;
  const qdm::BudgetReport rep = qdm::cmd_budget({}, dir / "budget.csv", log);
  CHECK(log.str().find("2.000000 2.000000") != std::string::npos);
  CHECK(rep.min_factor >= 1.5);
  CHECK(rep.min_factor < 2.0);
  CHECK(std::abs(rep.grid.factors(20, 25) - 1.581) < 1e-3);
  CHECK(count_lines(dir / "budget.csv") == 32);

  std::ifstream in(dir / "budget.csv");
  std::string header;
  std::string row;
  std::getline(in, header);
  CHECK(header.rfind("squeezing_db,eta_0.5,eta_0.51,", 0) == 0);
  for (int i = 0; i <= 20; ++i) std::getline(in, row);
  CHECK(row.rfind("10,", 0) == 0);
  CHECK(row.find(",1.58107,") != std::string::npos);

  CHECK_THROWS_AS(qdm::cmd_budget({.db_min = -1.0}, dir / "x.csv", log), qdm::Error);
}

TEST_CASE("simulate command") {
  const fs::path a = scratch("sim_a");
  const fs::path b = scratch("sim_b");
  const qdm::RunConfig cfg;
  const qdm::SimulateReport rep = qdm::cmd_simulate(cfg, a);
  qdm::cmd_simulate(cfg, b);
  CHECK(rep.rows == 81920);
  CHECK(count_lines(a / "dataset.csv") == 81921);
  CHECK(count_lines(a / "shot_reference.csv") == 81921);
  for (const char* f : {"dataset.csv", "shot_reference.csv", "dataset.meta"}) CHECK(slurp(a / f) == slurp(b / f));

  const qdm::KeyValueFile meta = qdm::read_key_values(a / "dataset.meta");
  CHECK(*meta.find("seed") == "20161026");
  CHECK(meta.find("scatter.m1") != nullptr);
  const qdm::RunConfig back = qdm::parse_run_config(meta);
  CHECK(qdm::to_key_values(back).entries == meta.entries);
}

TEST_CASE("fit on simulated files matches the pipeline fit") {
  const fs::path pipe = scratch("pipe");
  const fs::path fit = scratch("fit");
  const qdm::RunConfig cfg;
  const qdm::PipelineSummary sum = qdm::cmd_pipeline(cfg, pipe);
  qdm::cmd_fit(pipe / "dataset.csv", cfg, fit);
  CHECK(slurp(pipe / "fit_report.txt") == slurp(fit / "fit_report.txt"));
  CHECK(slurp(pipe / "cleaned.csv") == slurp(fit / "cleaned.csv"));

  SUBCASE("summary levels") {
    CHECK(sum.status == "subtracted");
    CHECK(sum.converged);
    CHECK(std::abs(sum.bhd2_cleaned_high_db + 5.0) < 1.0);
    CHECK(std::abs(sum.bhd2_cleaned_low_db + 5.0) < 1.0);
    CHECK(sum.bhd2_original_low_db > 0.0);
    CHECK(std::abs(sum.bhd2_cleaned_low_db - sum.bhd2_reference_low_db) < 1.0);
    CHECK(std::abs(sum.bhd2_cleaned_high_db - sum.bhd2_reference_high_db) < 1.0);
    REQUIRE(sum.snr_cleaned);
    CHECK(*sum.snr_cleaned > *sum.snr_original);

    const qdm::KeyValueFile kv = qdm::read_key_values(pipe / "summary.txt");
    CHECK(summary_value(kv, "level.bhd2_cleaned.high_band_db") == doctest::Approx(sum.bhd2_cleaned_high_db).epsilon(1e-5));
    CHECK(*kv.find("status") == "subtracted");
  }
  SUBCASE("spectra files") {
    for (const char* f : {"psd_bhd1_original.csv", "psd_bhd2_original.csv", "psd_bhd2_cleaned.csv",
                          "psd_bhd2_reference.csv", "psd_shot_bhd1.csv", "psd_shot_bhd2.csv", "db_bhd2_cleaned.csv"}) {
      CHECK(count_lines(pipe / f) == 2050);
    }
    CHECK(slurp(pipe / "db_bhd2_cleaned.csv").rfind("freq_hz,db_rel_shot\n", 0) == 0);
    CHECK(slurp(pipe / "psd_bhd2_cleaned.csv").rfind("freq_hz,psd\n", 0) == 0);
  }
}

TEST_CASE("pipeline without a disturbance passes through") {
  const fs::path dir = scratch("quiet");
  qdm::RunConfig cfg;
  cfg.sim.scatter.amplitude = 0.0;
  cfg.sim.scatter.a_prime = 0.0;
  const qdm::PipelineSummary sum = qdm::cmd_pipeline(cfg, dir);
  CHECK(sum.status == "pass-through");
  CHECK(sum.note.find("pass-through") != std::string::npos);
  const qdm::Dataset original = qdm::read_dataset_csv(dir / "dataset.csv");
  const qdm::Dataset cleaned = qdm::read_dataset_csv(dir / "cleaned.csv");
  CHECK((original.bhd2.samples() - cleaned.bhd2.samples()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("psd command") {
  const fs::path dir = scratch("psd");
  qdm::RunConfig cfg;
  cfg.sim.duration = 2.0;
  cfg.sim.chirp.duration = 2.0;
  qdm::cmd_simulate(cfg, dir);
  const auto files = qdm::cmd_psd(dir / "dataset.csv", "bhd1", dir / "shot_reference.csv", cfg, dir);
  REQUIRE(files.size() == 3);
  for (const auto& f : files) CHECK(fs::exists(f));
  CHECK_THROWS_AS(qdm::cmd_psd(dir / "dataset.csv", "bhd3", std::nullopt, cfg, dir), qdm::Error);
}

TEST_CASE("command line") {
  const fs::path dir = scratch("cli");
  const fs::path log = dir / "log.txt";

  SUBCASE("budget prints the zero-squeezing row") {
    CHECK(run_cli("budget --out " + (dir / "b").string(), log) == 0);
    CHECK(slurp(log).find("2.000000") != std::string::npos);
    CHECK(fs::exists(dir / "b" / "budget.csv"));
  }
  SUBCASE("bad config is a validation error and writes nothing") {
    {
      std::ofstream cfg(dir / "bad.cfg");
      cfg << "duration = 0\nunknown.key = 3\n";
    }
    CHECK(run_cli("simulate --config " + (dir / "bad.cfg").string() + " --out " + (dir / "o").string(), log) == 1);
    const std::string text = slurp(log);
    CHECK(text.find("duration") != std::string::npos);
    CHECK(text.find("unknown.key") != std::string::npos);
    CHECK_FALSE(fs::exists(dir / "o"));
  }
  SUBCASE("seed override") {
    {
      std::ofstream cfg(dir / "short.cfg");
      cfg << "duration = 1\n";
    }
    const std::string base = "simulate --config " + (dir / "short.cfg").string();
    CHECK(run_cli(base + " --seed 1 --out " + (dir / "s1").string(), log) == 0);
    CHECK(run_cli(base + " --seed 2 --out " + (dir / "s2").string(), log) == 0);
    CHECK(run_cli(base + " --seed 1 --out " + (dir / "s3").string(), log) == 0);
    CHECK(slurp(dir / "s1" / "dataset.csv") == slurp(dir / "s3" / "dataset.csv"));
    CHECK(slurp(dir / "s1" / "dataset.csv") != slurp(dir / "s2" / "dataset.csv"));
    CHECK(*qdm::read_key_values(dir / "s2" / "dataset.meta").find("seed") == "2");
  }
  SUBCASE("malformed dataset") {
    {
      std::ofstream csv(dir / "broken.csv");
      csv << "t,bhd1,bhd2\n0,1,2\n0.5,1\n";
    }
    CHECK(run_cli("fit " + (dir / "broken.csv").string() + " --out " + (dir / "f").string(), log) == 1);
    CHECK(slurp(log).find("row 3") != std::string::npos);
  }
  SUBCASE("unknown subcommand") {
    CHECK(run_cli("transmogrify", log) == 1);
  }
}
