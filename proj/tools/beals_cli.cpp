#include <cstdio>
#include <iostream>

#include "CLI11.hpp"

#include "beals/experiments.hpp"

namespace {

int run(const std::string& command, const std::string& config_path, const std::string& out, int workers) {
  beals::ExperimentConfig cfg;
  try {
    cfg = beals::load_experiment_config(beals::Config::load(config_path), command);
    if (!out.empty()) cfg.out_dir = out;
    if (workers > 0) cfg.workers = workers;
  } catch (const beals::Error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  beals::RunReport rep;
  try {
    rep = beals::run_experiment(cfg);
  } catch (const beals::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const beals::Error& e) {
    std::cerr << command << " failed: " << e.what() << "\n";
    return 1;
  }
  for (const auto& c : rep.checks)
    std::printf("%-4s %-20s %.6g %s %.6g\n", c.pass ? "ok" : "FAIL", c.name.c_str(), c.value, c.op.c_str(),
                c.tolerance);
  std::printf("%s: %s (%.2f s) -> %s/%s.json\n", command.c_str(), rep.passed() ? "pass" : "fail", rep.seconds,
              cfg.out_dir.c_str(), command.c_str());
  return rep.passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gabor-frame experiments for magnetic pseudodifferential operators"};
  app.require_subcommand(1);
  std::string config, out;
  int workers = 0;
  std::string chosen;
  for (const char* name : {"frame-check", "geometry-check", "roundtrip", "gauge-check"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "experiment config file")->required();
    sub->add_option("--out", out, "output directory (overrides output.dir)");
    sub->add_option("--workers", workers, "worker threads (overrides run.workers)")->check(CLI::PositiveNumber);
    sub->callback([&chosen, name] { chosen = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  return run(chosen, config, out, workers);
}
