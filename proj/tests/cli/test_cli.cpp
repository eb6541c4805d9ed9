#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "leocell/dataset.hpp"
#include "leocell/model_io.hpp"
#include "leocell/regress.hpp"

namespace fs = std::filesystem;
using namespace leocell;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(LEOCELL_CLI_PATH) + " " + args + " 2>&1";
  RunResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return r;
  char buf[4096];
  while (std::fgets(buf, sizeof buf, pipe)) r.output += buf;
  const int status = pclose(pipe);
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string data_file(const std::string& name) {
  return (fs::path(LEOCELL_DATA_DIR) / name).string();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("leocell_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  std::string simulate_canonical(const std::string& name = "sim") {
    const RunResult r = run("simulate --default-grid --noise 0 --seed 1 --out " + path(name));
    EXPECT_EQ(r.exit_code, 0) << r.output;
    return path(name) + "/dataset.csv";
  }

  fs::path dir_;
};

TEST_F(Cli, SimulateDefaultGridWrites156Rows) {
  const std::string csv = simulate_canonical();
  std::istringstream lines(slurp(csv));
  std::string line;
  std::getline(lines, line);
  EXPECT_EQ(line, "temperature_c,dod_pct,cycle,rc_pct,eodv_v");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  EXPECT_EQ(rows, 156);
  EXPECT_EQ(read_csv(csv).size(), 156u);
}

TEST_F(Cli, SimulateIsReproducibleExceptTimestamp) {
  const std::string a = simulate_canonical("a");
  const std::string b = simulate_canonical("b");
  EXPECT_EQ(slurp(a), slurp(b));

  auto ma = nlohmann::json::parse(slurp(path("a") + "/manifest.json"));
  auto mb = nlohmann::json::parse(slurp(path("b") + "/manifest.json"));
  EXPECT_EQ(ma["subcommand"], "simulate");
  EXPECT_EQ(ma["seed"], "1");
  EXPECT_TRUE(ma.contains("version"));
  EXPECT_TRUE(ma.contains("timestamp"));
  EXPECT_EQ(ma["config"], mb["config"]);
}

TEST_F(Cli, SimulateFromManifestConfigReproducesDataset) {
  const std::string csv = simulate_canonical("a");
  run("simulate --noise-rc 0.5 --seed 9 --out " + path("noisy"));
  auto manifest = nlohmann::json::parse(slurp(path("noisy") + "/manifest.json"));
  std::ofstream conf(path("replay.conf"));
  for (const auto& [k, v] : manifest["config"].items()) conf << k << '=' << v.get<std::string>() << '\n';
  conf.close();
  const RunResult r = run("--config " + path("replay.conf") + " simulate --out " + path("replay"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(slurp(path("noisy") + "/dataset.csv"), slurp(path("replay") + "/dataset.csv"));
  EXPECT_NE(slurp(csv), slurp(path("replay") + "/dataset.csv"));
}

TEST_F(Cli, ZeroCycleStepIsUsageError) {
  const RunResult r = run("simulate --cycle-step 0 --out " + path("x"));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("cycle_step"), std::string::npos) << r.output;
}

TEST_F(Cli, UnknownSubcommandIsUsageError) {
  EXPECT_EQ(run("frobnicate").exit_code, 1);
  EXPECT_EQ(run("").exit_code, 1);
}

TEST_F(Cli, FitOlsPrintsPublishedEquations) {
  const std::string csv = simulate_canonical();
  RunResult r = run("fit-ols " + csv + " --target rc");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("RC = 110.2900 - 0.7551*T - 0.2977*DOD - 0.0014*C"), std::string::npos)
      << r.output;
  r = run("fit-ols " + csv + " --target eodv");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("EODV = 4.3156 - 0.1297*T - 0.0093*DOD - 7.1705E-06*C"),
            std::string::npos)
      << r.output;
}

TEST_F(Cli, FitOlsModelFileReloadsIdentically) {
  const std::string csv = simulate_canonical();
  ASSERT_EQ(run("fit-ols " + csv + " --out " + path("fit")).exit_code, 0);
  const LinearModel direct = fit_ols(read_csv(csv), Target::RC);
  const LinearModel loaded = load_linear(path("fit") + "/model.txt");
  EXPECT_EQ(loaded, direct);
}

TEST_F(Cli, FitOlsMissingTargetIsValidationError) {
  std::ofstream(path("rc_only.csv")) << "temperature_c,dod_pct,cycle,rc_pct,eodv_v\n"
                                        "10,10,0,99,\n10,20,0,96,\n20,20,0,90,\n"
                                        "10,30,1000,92,\n20,30,0,85,\n";
  const RunResult r = run("fit-ols " + path("rc_only.csv") + " --target eodv");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("EODV"), std::string::npos) << r.output;
}

TEST_F(Cli, RankDeficientFitIsNumericFailure) {
  std::ofstream(path("one_setting.csv")) << "temperature_c,dod_pct,cycle,rc_pct,eodv_v\n"
                                            "10,10,0,99,\n10,10,1000,98,\n"
                                            "10,10,2000,97,\n10,10,3000,96,\n";
  const RunResult r = run("fit-ols " + path("one_setting.csv"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("temperature_c"), std::string::npos) << r.output;
}

TEST_F(Cli, PredictPublishedLinearModel) {
  const RunResult r = run("--quiet predict " + data_file("linear_rc.model") +
                          " --t 10 --dod 10 --cycle 0");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output, "99.762\n");
}

TEST_F(Cli, PredictRefusesExtrapolationWithoutFlag) {
  RunResult r = run("predict " + data_file("linear_rc.model") + " --t 50 --dod 10 --cycle 0");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("temperature_c"), std::string::npos) << r.output;
  r = run("--quiet predict " + data_file("linear_rc.model") +
          " --t 50 --dod 10 --cycle 0 --allow-extrapolation");
  EXPECT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output, "69.55799999999999\n");
}

TEST_F(Cli, PredictSweepWritesPerSettingAndCombinedCsv) {
  const RunResult r = run("predict " + data_file("linear_eodv.model") +
                          " --sweep --cycle-step 5000 --out " + path("sweep"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  int files = 0;
  for (const auto& e : fs::directory_iterator(path("sweep"))) {
    if (e.path().filename().string().rfind("sweep_T", 0) == 0) ++files;
  }
  EXPECT_EQ(files, 6);
  const std::string combined = slurp(path("sweep") + "/sweep.csv");
  EXPECT_EQ(combined.rfind("temperature_c,dod_pct,cycle,eodv_v\n", 0), 0u);
  EXPECT_EQ(std::count(combined.begin(), combined.end(), '\n'), 1 + 6 * 6);
  EXPECT_NE(slurp(path("sweep") + "/sweep_T10_DOD10.csv").find("10,10,0,2.9255999999999998\n"),
            std::string::npos);
}

TEST_F(Cli, EvaluateOwnGeneratingModelHasZeroError) {
  const std::string csv = simulate_canonical();
  const RunResult r = run("evaluate " + data_file("linear_rc.model") + " " + csv +
                          " --out " + path("ev"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto report = nlohmann::json::parse(slurp(path("ev") + "/report.json"));
  EXPECT_EQ(report["n"], 156);
  EXPECT_NEAR(report["aape_pct"]["value"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(report["bland_altman"]["bias"].get<double>(), 0.0, 1e-12);
  EXPECT_NEAR(report["correlation"]["pearson_r"].get<double>(), 1.0, 1e-12);
  EXPECT_EQ(slurp(path("ev") + "/one_to_one.csv").rfind("series,observed,predicted\n", 0), 0u);
  EXPECT_EQ(slurp(path("ev") + "/bland_altman.csv")
                .rfind("mean,difference_predicted_minus_observed\n", 0),
            0u);
}

TEST_F(Cli, EvaluatePercentModeAndOddSplit) {
  const std::string csv = simulate_canonical();
  const RunResult r = run("evaluate " + data_file("linear_rc.model") + " " + csv +
                          " --ba-mode percent --split even-odd --out " + path("ev"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(nlohmann::json::parse(slurp(path("ev") + "/report.json"))["n"], 78);
  EXPECT_EQ(slurp(path("ev") + "/bland_altman.csv")
                .rfind("mean,pct_difference_predicted_minus_observed\n", 0),
            0u);
}

TEST_F(Cli, CycleLifeWorkedExample) {
  RunResult r = run("cycle-life --t 10 --dod 10");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output, "failure at cycle 42688 (RC)\n");
  r = run("cycle-life --model " + data_file("linear_rc.model") + " --model " +
          data_file("linear_eodv.model") + " --t 10 --dod 10 --out " + path("cl"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto j = nlohmann::json::parse(slurp(path("cl") + "/cycle_life.json"));
  EXPECT_EQ(j["cycle"], 42688);
  EXPECT_EQ(j["criterion"], "RC");
}

TEST_F(Cli, CycleLifeFloorsAboveStartFailImmediately) {
  const RunResult r = run("cycle-life --t 10 --dod 10 --rc-floor 200 --eodv-floor 10");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output, "failure at cycle 0 (RC+EODV)\n");
}

TEST_F(Cli, CycleLifeZeroSlopeReportsNoFailure) {
  std::ofstream(path("flat.conf")) << "rc_coeff_cycle=0\neodv_coeff_cycle=0\n";
  const RunResult r = run("--config " + path("flat.conf") + " cycle-life --t 10 --dod 10");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(r.output, "no failure within 1000000 cycles\n");
}

TEST_F(Cli, TrainResumeAndTargetMismatch) {
  const std::string csv = simulate_canonical();
  RunResult r = run("train " + csv + " --error-target 2 --out " + path("t1"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("converged         yes"), std::string::npos) << r.output;
  const std::string model = path("t1") + "/model.txt";
  EXPECT_TRUE(fs::exists(path("t1") + "/training_report.json"));
  EXPECT_EQ(slurp(path("t1") + "/error_history.csv").rfind("epoch,train_mape_pct\n0,", 0), 0u);

  r = run("train " + csv + " --target eodv --resume " + model);
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("predicts RC"), std::string::npos) << r.output;

  r = run("train " + csv + " --resume " + model + " --error-target 1 --out " + path("t2"));
  ASSERT_EQ(r.exit_code, 0) << r.output;
  auto first = nlohmann::json::parse(slurp(path("t1") + "/training_report.json"));
  auto second = nlohmann::json::parse(slurp(path("t2") + "/training_report.json"));
  EXPECT_EQ(second["epochs_trained"].get<long>(),
            first["epochs_trained"].get<long>() + second["epochs_run"].get<long>());
}

TEST_F(Cli, TrainIsDeterministic) {
  const std::string csv = simulate_canonical();
  ASSERT_EQ(run("train " + csv + " --max-epochs 50 --seed 4 --out " + path("a")).exit_code, 0);
  ASSERT_EQ(run("train " + csv + " --max-epochs 50 --seed 4 --out " + path("b")).exit_code, 0);
  EXPECT_EQ(slurp(path("a") + "/model.txt"), slurp(path("b") + "/model.txt"));
  EXPECT_EQ(slurp(path("a") + "/error_history.csv"), slurp(path("b") + "/error_history.csv"));
}

TEST_F(Cli, InvalidTrainingFlagIsValidationError) {
  const std::string csv = simulate_canonical();
  EXPECT_EQ(run("train " + csv + " --learning-rate -1").exit_code, 1);
  EXPECT_EQ(run("train " + csv + " --momentum 1").exit_code, 1);
  EXPECT_EQ(run("train " + csv + " --layers 3,9,2").exit_code, 1);
}

}  // namespace
