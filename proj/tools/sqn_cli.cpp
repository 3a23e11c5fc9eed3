// Command-line front end: experiment runs, trace comparison, spectrum
// diagnostics, and toy-data generation.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sqn/diagnostics.hpp"
#include "sqn/errors.hpp"
#include "sqn/harness.hpp"

namespace fs = std::filesystem;
using sqn::ConfigError;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_run(const std::string& config_path) {
  sqn::RunConfig cfg = sqn::parse_run_config(read_file(config_path));
  if (cfg.out_dir.empty()) {
    cfg.out_dir = "runs/" + cfg.method + "-" + cfg.problem;
  }
  const sqn::ExperimentResult res = sqn::run_experiment(cfg);
  std::size_t aborted = 0;
  for (const sqn::SeedOutcome& o : res.outcomes) {
    if (o.aborted) {
      ++aborted;
      std::cerr << "seed " << o.seed << " aborted: " << o.reason << "\n";
    }
  }
  std::cout << "wrote " << res.trace_paths.size() << " trace file(s) and "
            << res.summary_path << "\n";
  if (aborted > 0) {
    std::cout << aborted << " of " << res.outcomes.size()
              << " seed(s) aborted\n";
  }
  return res.exit_code;
}

int cmd_compare(const std::vector<std::string>& dirs,
                const std::string& out_path) {
  const std::string csv = sqn::compare_report(dirs);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + out_path);
  out << csv;
  std::cout << "wrote " << out_path << "\n";
  return 0;
}

struct SpectrumConfig {
  std::string problem = "toy-small";
  std::string out_dir = "spectra";
  std::uint64_t data_seed = 7;
  std::vector<std::uint64_t> seeds = {1};
  std::int64_t iterations = 40;
  std::size_t memory = 16;
  double radius = 0.01;
  double init_scale = 0.5;
  std::vector<std::int64_t> checkpoints;  // default: evenly spaced
};

SpectrumConfig parse_spectrum_config(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  SpectrumConfig cfg;
  try {
    cfg.problem = j.value("problem", cfg.problem);
    cfg.out_dir = j.value("out_dir", cfg.out_dir);
    cfg.data_seed = j.value("data_seed", cfg.data_seed);
    if (j.contains("seeds")) {
      cfg.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
    }
    cfg.iterations = j.value("iterations", cfg.iterations);
    cfg.memory = j.value("memory", cfg.memory);
    cfg.radius = j.value("radius", cfg.radius);
    cfg.init_scale = j.value("init_scale", cfg.init_scale);
    if (j.contains("checkpoints")) {
      cfg.checkpoints = j["checkpoints"].get<std::vector<std::int64_t>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config field error: ") + e.what());
  }
  if (cfg.seeds.empty()) throw ConfigError("seed list must not be empty");
  if (cfg.iterations < 1) throw ConfigError("iterations must be positive");
  return cfg;
}

int cmd_spectrum(const std::string& config_path) {
  const SpectrumConfig cfg = parse_spectrum_config(read_file(config_path));

  sqn::RunConfig pcfg;
  pcfg.method = "sr1";  // only the problem fields matter here
  pcfg.problem = cfg.problem;
  pcfg.data_seed = cfg.data_seed;
  pcfg.init_scale = cfg.init_scale;
  pcfg.validate();
  const sqn::ProblemBundle problem = sqn::make_problem(pcfg);

  const std::vector<std::int64_t> checkpoints =
      cfg.checkpoints.empty() ? sqn::default_checkpoints(cfg.iterations)
                              : cfg.checkpoints;
  fs::create_directories(cfg.out_dir);

  for (const std::uint64_t seed : cfg.seeds) {
    const sqn::Vector w0 = sqn::initial_point(pcfg, problem, seed);
    const auto snaps =
        sqn::spectrum_run(*problem.objective, w0, cfg.iterations, cfg.memory,
                          cfg.radius, checkpoints, seed);
    for (const sqn::SpectrumSnapshot& snap : snaps) {
      const std::string path =
          (fs::path(cfg.out_dir) /
           ("spectrum_seed" + std::to_string(seed) + "_ckpt" +
            std::to_string(snap.checkpoint) + ".csv"))
              .string();
      std::ofstream out(path, std::ios::binary);
      out << sqn::spectrum_to_csv(snap);
      std::cout << "seed " << seed << " checkpoint " << snap.checkpoint
                << ": match(slsr1,true)="
                << sqn::spectrum_match(snap.slsr1_eigs, snap.true_eigs)
                << " match(lsr1,true)="
                << sqn::spectrum_match(snap.lsr1_eigs, snap.true_eigs)
                << " match(sr1,true)="
                << sqn::spectrum_match(snap.sr1_eigs, snap.true_eigs) << "\n";
    }
  }
  std::cout << "wrote spectra under " << cfg.out_dir << "\n";
  return 0;
}

int cmd_gen_data(std::uint64_t seed, const std::string& out_path) {
  const sqn::Dataset data = sqn::gen_toy_dataset(seed);
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + out_path);
  out << sqn::dataset_to_csv(data);
  std::cout << "wrote " << data.size() << " samples to " << out_path << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sampled quasi-Newton benchmark toolkit"};
  app.require_subcommand(1);

  std::string run_config;
  CLI::App* run = app.add_subcommand("run", "run one experiment config");
  run->add_option("--config", run_config, "JSON run configuration")
      ->required();

  std::vector<std::string> compare_dirs;
  std::string compare_out = "compare.csv";
  CLI::App* compare =
      app.add_subcommand("compare", "tabulate traces across runs");
  compare->add_option("dirs", compare_dirs, "trace directories")->required();
  compare->add_option("--out", compare_out, "output CSV path");

  std::string spectrum_config;
  CLI::App* spectrum =
      app.add_subcommand("spectrum", "eigenvalue spectrum diagnostics");
  spectrum->add_option("--config", spectrum_config, "JSON configuration")
      ->required();

  std::uint64_t gen_seed = 7;
  std::string gen_out = "toy.csv";
  CLI::App* gen = app.add_subcommand("gen-data", "write the toy dataset");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output CSV path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_config);
    if (compare->parsed()) return cmd_compare(compare_dirs, compare_out);
    if (spectrum->parsed()) return cmd_spectrum(spectrum_config);
    if (gen->parsed()) return cmd_gen_data(gen_seed, gen_out);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
