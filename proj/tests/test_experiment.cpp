#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <sys/wait.h>

#include "harmonic/experiment.hpp"

using namespace harmonic;
namespace fs = std::filesystem;

namespace {

nlohmann::json small_config(int model = 1) {
  return {{"name", "radiata-small"},
          {"benchmark", {{"name", "radiata"}, {"model", model}}},
          {"sampler", {{"nwalkers", 20}, {"nsamples", 300}, {"nburn", 100}}},
          {"model", {{"kind", "hypersphere"}}},
          {"repetitions", 2},
          {"seed", 3}};
}

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "harmonic_experiment_test";
  fs::create_directories(dir);
  return dir;
}

fs::path write_json(const std::string& name, const nlohmann::json& j) {
  const fs::path p = scratch() / name;
  std::ofstream(p) << j.dump(2);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args) {
  const char* exe = std::getenv("HARMONIC_CLI");
  REQUIRE(exe != nullptr);
  const int status = std::system((std::string(exe) + " " + args + " > /dev/null 2>&1").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST_CASE("config parsing fills defaults and rejects mistakes") {
  const auto c = parse_config(small_config());
  CHECK(c.training_proportion == 0.5);
  CHECK(c.candidates.size() == 1);
  CHECK(c.benchmark["data"] == "");
  // the echoed config parses back to the same echo
  nlohmann::json echo = c.to_json();
  CHECK(parse_config(echo).to_json() == echo);

  auto bad = small_config();
  bad["samplr"] = nlohmann::json::object();
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config();
  bad["benchmark"]["name"] = "nope";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config();
  bad["split"] = {{"training_proportion", 1.5}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config();
  bad["sampler"]["nwalkers"] = 4;  // fewer than twice the dimension
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config();
  bad["model"] = {{"kind", "kde"}, {"radius", 0}};
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config();
  bad["models"] = nlohmann::json::array({bad["model"]});
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
  bad = small_config();
  bad["sampler"]["nsamples"] = "many";
  CHECK_THROWS_AS(parse_config(bad), ConfigError);
}

TEST_CASE("repetition seeds are derived, distinct and stable") {
  const auto a = RepetitionSeeds::derive(7, 0);
  const auto b = RepetitionSeeds::derive(7, 1);
  CHECK(a.repetition != b.repetition);
  CHECK(a.sampler != a.initial);
  CHECK(a.split != a.cross_validation);
  CHECK(RepetitionSeeds::derive(7, 0).fit == a.fit);
}

TEST_CASE("an in-process run is deterministic and reports every repetition") {
  const auto config = parse_config(small_config());
  const auto r1 = run_experiment(config);
  const auto r2 = run_experiment(config);
  CHECK(r1.to_json() == r2.to_json());
  CHECK(r1.successes() == 2);
  const auto j = r1.to_json();
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["benchmark"]["ground_truth"]["kind"] == "analytic");
  CHECK(j["repetitions"].size() == 2);
  CHECK(j["repetitions"][0]["seeds"]["repetition"] != j["repetitions"][1]["seeds"]["repetition"]);
  CHECK(j["aggregate"]["successes"] == 2);
}

TEST_CASE("a failing repetition is recorded and the run continues") {
  auto j = small_config();
  j["benchmark"] = {{"name", "gaussian"}, {"ndim", 2}};
  j["model"] = {{"kind", "mgmm"}, {"ncomponents", 5000}};
  const auto report = run_experiment(parse_config(j));
  CHECK(report.successes() == 0);
  CHECK(report.repetitions.size() == 2);
  CHECK_FALSE(report.repetitions[0].error.empty());
  const auto out = report.to_json();
  CHECK(out["repetitions"][0]["status"] == "failed");
  CHECK(out["aggregate"]["mean_ln_z"].is_null());
}

TEST_CASE("CSV rendering has a header and one row per repetition") {
  const auto report = run_experiment(parse_config(small_config())).to_json();
  const std::string csv = render_report(report, ReportFormat::csv);
  std::istringstream in(csv);
  std::string line;
  std::vector<std::string> lines;
  while (std::getline(in, line)) lines.push_back(line);
  REQUIRE(lines.size() == 3);
  CHECK(lines[0].find("ln_evidence_mean") != std::string::npos);
  CHECK(lines[0].find(",error") != std::string::npos);
  const auto cols = [](const std::string& s) { return std::count(s.begin(), s.end(), ','); };
  CHECK(cols(lines[1]) == cols(lines[0]));
  CHECK(lines[1].find(",ok,") != std::string::npos);
}

TEST_CASE("CLI: exit codes, byte-identical reruns, report round trip, compare") {
  const fs::path cfg = write_json("run.json", small_config());
  const fs::path out1 = scratch() / "out1.json";
  const fs::path out2 = scratch() / "out2.json";
  CHECK(cli("run " + cfg.string() + " -o " + out1.string()) == 0);
  CHECK(cli("run " + cfg.string() + " -o " + out2.string()) == 0);
  CHECK(slurp(out1) == slurp(out2));
  CHECK(fs::exists(out1.string() + ".timing.json"));

  const fs::path rendered = scratch() / "rendered.json";
  CHECK(cli("report " + out1.string() + " --format json -o " + rendered.string()) == 0);
  CHECK(slurp(rendered) == slurp(out1));
  const fs::path csv = scratch() / "rendered.csv";
  CHECK(cli("report " + out1.string() + " --format csv -o " + csv.string()) == 0);
  CHECK(slurp(csv) == render_report(nlohmann::json::parse(slurp(out1)), ReportFormat::csv));

  CHECK(cli("validate " + cfg.string()) == 0);
  auto broken = small_config();
  broken["repetitions"] = 0;
  CHECK(cli("validate " + write_json("broken.json", broken).string()) == 1);
  CHECK(cli("run " + write_json("broken2.json", broken).string()) == 1);
  std::ofstream(scratch() / "notjson.json") << "{ nope";
  CHECK(cli("run " + (scratch() / "notjson.json").string()) == 1);
  CHECK(cli("run /nonexistent/config.json") == 1);
  CHECK(cli("report /nonexistent/report.json") == 2);

  auto failing = small_config();
  failing["benchmark"] = {{"name", "gaussian"}, {"ndim", 2}};
  failing["model"] = {{"kind", "mgmm"}, {"ncomponents", 5000}};
  CHECK(cli("run " + write_json("failing.json", failing).string() + " -o " + (scratch() / "f.json").string()) == 2);

  const fs::path cmp = scratch() / "cmp.json";
  CHECK(cli("compare " + cfg.string() + " " + cfg.string() + " -o " + cmp.string()) == 0);
  const auto bf = nlohmann::json::parse(slurp(cmp));
  REQUIRE(bf["bayes_factors"].size() == 2);
  for (const auto& e : bf["bayes_factors"]) CHECK(e["ln_bf"].get<double>() == 0.0);

  const fs::path cmp2 = scratch() / "cmp2.json";
  CHECK(cli("compare " + cfg.string() + " " + write_json("run2.json", small_config(2)).string() + " -o " + cmp2.string()) == 0);
  const auto bf2 = nlohmann::json::parse(slurp(cmp2));
  // model 2 is strongly preferred: ln(z1/z2) is about -8.4
  CHECK(bf2["bayes_factors"][0]["ln_bf"].get<double>() == doctest::Approx(-8.42).epsilon(0.01));
}
