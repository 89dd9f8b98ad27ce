#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

#include "CLI11.hpp"
#include "ovm/errors.hpp"
#include "ovm/harness.hpp"

namespace {

nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ovm::Error(ovm::ErrorCode::IoError, "cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ovm::Error(ovm::ErrorCode::ConfigError, path + ": " + e.what());
  }
}

void print_verdicts(const ovm::ReportBundle& b) {
  for (const auto& v : b.verdicts)
    std::printf("%s %s: observed %.6g, required %s\n", v.pass ? "PASS" : "FAIL", v.name.c_str(), v.observed,
                v.threshold.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Collapsing Gibbons-Hawking fields: experiments and reports"};
  app.require_subcommand(1);

  std::string out_dir, formats = "csv,json,svg";
  std::optional<std::uint64_t> seed;
  int jobs = int(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--out", out_dir, "Output directory (overrides output_dir in the config)");
  app.add_option("--seed", seed, "Random seed (overrides seed in the config)");
  app.add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", formats, "Comma-separated subset of csv,json,svg");

  std::string config_path, bundle_path;
  auto* run = app.add_subcommand("run", "Run the experiment described by a JSON config");
  run->add_option("config", config_path, "Config file")->required();
  run->fallthrough();
  auto* emit = app.add_subcommand("emit", "Re-render the outputs of a saved bundle.json");
  emit->add_option("bundle", bundle_path, "bundle.json written by a previous run")->required();
  emit->fallthrough();
  auto* list = app.add_subcommand("list-experiments", "List experiment names");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) {
      for (const auto& info : ovm::list_experiments()) std::printf("%-18s %s\n", info.name.c_str(), info.summary.c_str());
      return 0;
    }
    const auto fmt = ovm::parse_formats(formats);
    if (run->parsed()) {
      auto config = ovm::config_from_json(read_json(config_path));
      if (seed) config.seed = *seed;
      if (!out_dir.empty()) config.output_dir = out_dir;
      const auto bundle = ovm::run(config, jobs);
      ovm::emit(bundle, config.output_dir, fmt);
      print_verdicts(bundle);
      std::fprintf(stderr, "%s finished in %.2f s; outputs in %s\n", ovm::to_string(bundle.experiment).c_str(),
                   bundle.wall_time_s, config.output_dir.c_str());
      return bundle.all_pass() ? 0 : 1;
    }
    const auto bundle = ovm::bundle_from_json(read_json(bundle_path));
    ovm::emit(bundle, out_dir.empty() ? bundle.config.output_dir : out_dir, fmt);
    print_verdicts(bundle);
    return bundle.all_pass() ? 0 : 1;
  } catch (const ovm::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
}
