// Command-line front end: run, compare, validate and report.
//
// Exit codes: 0 success, 1 configuration error, 2 runtime failure.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "harmonic/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

void emit(const std::string& content, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  harmonic::write_file_atomic(path, content);
}

void emit_timing(const nlohmann::json& timing, const std::string& path) {
  if (path.empty() || path == "-") return;
  harmonic::write_file_atomic(path + ".timing.json", timing.dump(2) + "\n");
}

int warn_failures(const harmonic::ExperimentReport& report) {
  for (const auto& r : report.repetitions) {
    if (!r.ok) std::cerr << "repetition " << r.index << " failed: " << r.error << '\n';
  }
  if (report.successes() == 0) {
    std::cerr << "error: every repetition failed\n";
    return kExitRuntime;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evidence estimation from posterior samples"};
  app.require_subcommand(1);

  std::string config_path, second_path, output, format = "json", report_path;

  auto* run = app.add_subcommand("run", "Run the experiment described by a config file");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("-o,--output", output, "report path; overrides the config, '-' for stdout");
  run->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* compare = app.add_subcommand("compare", "Bayes factor z1 / z2 between two configs, per repetition");
  compare->add_option("first", config_path, "config for model 1")->required();
  compare->add_option("second", second_path, "config for model 2")->required();
  compare->add_option("-o,--output", output, "report path, default stdout");
  compare->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  auto* validate = app.add_subcommand("validate", "Check a config and print it with defaults filled in");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  auto* report = app.add_subcommand("report", "Re-render a saved JSON report");
  report->add_option("path", report_path, "report written by run or compare")->required();
  report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  report->add_option("-o,--output", output, "destination, default stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  harmonic::ExperimentConfig first, second;
  try {
    if (!report->parsed()) first = harmonic::load_config(config_path);
    if (compare->parsed()) second = harmonic::load_config(second_path);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const auto fmt = harmonic::report_format_from_string(format);
    if (validate->parsed()) {
      std::cout << first.to_json().dump(2) << '\n';
      return 0;
    }
    if (run->parsed()) {
      const std::string path = output.empty() ? first.output : output;
      const auto result = harmonic::run_experiment(first);
      emit(harmonic::render_report(result.to_json(), fmt), path);
      emit_timing(result.timing_json(), path);
      return warn_failures(result);
    }
    if (compare->parsed()) {
      const auto result = harmonic::compare_models(first, second);
      emit(harmonic::render_report(result.to_json(), fmt), output);
      const int a = warn_failures(result.first);
      const int b = warn_failures(result.second);
      if (a || b || result.bayes_factors.empty()) return kExitRuntime;
      return 0;
    }
    std::ifstream in(report_path);
    if (!in) throw std::runtime_error("cannot open report " + report_path);
    const auto parsed = nlohmann::json::parse(in);
    emit(harmonic::render_report(parsed, fmt), output);
    return 0;
  } catch (const harmonic::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
