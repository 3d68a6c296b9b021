// Copyright 2026 The exosim Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.


#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "exosim/cli.hpp"

using exosim::cli::cli_main;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli_main(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario_path(const char* name) {
  return std::string(EXOSIM_SCENARIO_DIR) + "/" + name;
}

std::filesystem::path temp_file(const std::string& name, const std::string& text) {
  auto p = std::filesystem::temp_directory_path() / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST(Cli, CheckValidScenario) {
  const auto r = run({"check", scenario_path("grasp.esc")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("ok"), std::string::npos);
}

TEST(Cli, CheckReportsEveryError) {
  const auto p = temp_file("exosim_bad.esc", "at 1 object rocket\nat x tap\n");
  const auto r = run({"check", p.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("unknown object 'rocket' (line 1, column 13)"), std::string::npos);
  EXPECT_NE(r.err.find("line 2"), std::string::npos);
}

TEST(Cli, MissingFileIsUsageError) {
  EXPECT_EQ(run({"check", "/nonexistent/x.esc"}).code, 2);
}

TEST(Cli, UnknownFlagIsUsageError) {
  const auto r = run({"run", scenario_path("grasp.esc"), "--bogus"});
  EXPECT_EQ(r.code, 2);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, NoSubcommandIsUsageError) { EXPECT_EQ(run({}).code, 2); }

TEST(Cli, OutOfRangeThresholdRejected) {
  EXPECT_EQ(run({"driver", "--vth", "1.5"}).code, 2);
}

TEST(Cli, RunGraspPrintsJsonSummary) {
  const auto trace = std::filesystem::temp_directory_path() / "exosim_grasp.csv";
  const auto r = run({"run", scenario_path("grasp.esc"), "--out", trace.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("\"grasp_cycles\": 1"), std::string::npos) << r.out;
  EXPECT_GT(std::filesystem::file_size(trace), 100u);
}

TEST(Cli, RunHibernateExitsFour) {
  EXPECT_EQ(run({"run", scenario_path("hibernate.esc"), "--summary", "text"}).code, 4);
}

TEST(Cli, BatteryCalibrationPoint) {
  const auto r = run({"battery", "--current-ma", "230", "--hours", "3"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "11.35\n");
}

TEST(Cli, DriverReportsPeak) {
  const auto csv = std::filesystem::temp_directory_path() / "exosim_drv.csv";
  const auto r = run({"driver", "--load", "solenoid", "--soft-start", "off",
                      "--out", csv.string()});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("peak_W "), std::string::npos);
  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "t,v_gs,v_ds,i_d,p_fet");
}

TEST(Cli, BinaryExitStatus) {
  const std::string bin = EXOSIM_BIN;
  auto status = [&](const std::string& args) {
    const int raw = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  };
  EXPECT_EQ(status("check " + scenario_path("grasp.esc")), 0);
  EXPECT_EQ(status("run " + scenario_path("hibernate.esc")), 4);
  EXPECT_EQ(status("run --nope"), 2);
}
