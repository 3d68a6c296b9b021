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

#include "exosim/cli.hpp"

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "exosim/driver_model.hpp"
#include "exosim/error.hpp"
#include "exosim/peripherals.hpp"
#include "exosim/scenario.hpp"
#include "exosim/simulation.hpp"

namespace exosim::cli {

namespace {

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string summary = "json";
  std::string trace = "events";
  double fps = 10.0;
  long latency_ms = 51;
  std::string watchdog = "halt";
};

struct DriverArgs {
  std::string load = "motor";
  std::string soft_start = "on";
  double dt = 5e-6;
  double t_end = 0.0;
  double v_th = 0.8;
  double steady_ma = 395.0;
  std::string out;
};

struct BatteryArgs {
  double current_ma = 0.0;
  double hours = 0.0;
  double v0 = peripherals::BatteryParams{}.v_full;
};

std::optional<scenario::Scenario> load_scenario(const std::string& path,
                                                std::ostream& err) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    err << fmt::format("{}: cannot open file\n", path);
    return std::nullopt;
  }
  std::stringstream buf;
  buf << in.rdbuf();
  auto result = scenario::parse_scenario(buf.str());
  if (!result.ok()) {
    for (const auto& d : result.errors)
      err << fmt::format("{}: {}\n", path, scenario::to_string(d));
    return std::nullopt;
  }
  return std::move(result.scenario);
}

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  const auto s = load_scenario(a.scenario, err);
  if (!s) return kExitUsage;

  sim::SimConfig config;
  config.seed = sim::resolve_seed(a.seed, *s);
  config.detector.frame_period = peripherals::DetectorConfig::period_for_fps(a.fps);
  config.detector.latency = a.latency_ms;
  config.watchdog =
      a.watchdog == "log" ? sim::WatchdogPolicy::Log : sim::WatchdogPolicy::Halt;

  std::optional<sim::Simulation> simulation;
  try {
    simulation.emplace(*s, config);
  } catch (const ConfigError& e) {
    err << fmt::format("{}: {}\n", a.scenario, e.what());
    return kExitUsage;
  }

  std::ofstream trace_file;
  std::optional<sim::TraceWriter> writer;
  if (!a.out.empty()) {
    trace_file.open(a.out, std::ios::binary | std::ios::trunc);
    if (!trace_file) {
      err << fmt::format("{}: cannot write file\n", a.out);
      return kExitFailure;
    }
    writer.emplace(trace_file, a.trace == "full" ? sim::TraceMode::Full
                                                 : sim::TraceMode::Events);
  }

  const auto summary = simulation->run([&](const sim::TraceRecord& r) {
    if (writer) writer->write(r);
  });
  if (trace_file.is_open()) trace_file.close();

  if (a.summary == "text")
    out << sim::summary_text(summary);
  else
    out << sim::summary_json(summary) << '\n';
  return sim::exit_code(summary);
}

int do_check(const std::string& path, std::ostream& out, std::ostream& err) {
  const auto s = load_scenario(path, err);
  if (!s) return kExitUsage;
  out << fmt::format("{}: ok, {} events, duration {} s\n", path,
                     s->events.size(), s->duration);
  return kExitOk;
}

int do_driver(const DriverArgs& a, std::ostream& out, std::ostream& err) {
  const bool soft = a.soft_start == "on";
  const auto load = a.load == "solenoid"
                        ? driver::LoadParams::solenoid()
                        : driver::LoadParams::motor(a.steady_ma / 1000.0);
  const auto mosfet = driver::MosfetParams::with_threshold(a.v_th);
  driver::GateDrive gate;
  gate.soft_start = soft;
  const double t_end = a.t_end > 0.0 ? a.t_end : (soft ? 5.0 * gate.tau() : 0.05);

  std::vector<driver::TransientSample> series;
  try {
    series = driver::transient_simulate(load, mosfet, gate, t_end, a.dt);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }

  if (!a.out.empty()) {
    std::ofstream csv(a.out, std::ios::binary | std::ios::trunc);
    if (!csv) {
      err << fmt::format("{}: cannot write file\n", a.out);
      return kExitFailure;
    }
    csv << "t,v_gs,v_ds,i_d,p_fet\n";
    for (const auto& s : series)
      csv << fmt::format("{:.9g},{:.9g},{:.9g},{:.9g},{:.9g}\n", s.t, s.v_gs,
                         s.v_ds, s.i_d, s.p_fet);
  }

  const double peak = driver::peak_dissipation(series);
  out << fmt::format("load {} soft_start {} v_th {}\n", a.load, a.soft_start,
                     a.v_th);
  out << fmt::format("steady_i_A {:.4f}\n", series.back().i_d);
  out << fmt::format("peak_W {:.4f}\n", peak);
  out << fmt::format("limit_W {} ({})\n", mosfet.p_max,
                     peak < mosfet.p_max ? "ok" : "exceeded");
  return kExitOk;
}

int do_battery(const BatteryArgs& a, std::ostream& out, std::ostream& err) {
  try {
    auto b = peripherals::BatteryState::at_voltage(a.v0);
    b = peripherals::battery_step(b, a.current_ma, a.hours * 3600.0);
    out << fmt::format("{:.2f}\n", b.voltage());
  } catch (const Error& e) {
    err << e.what() << '\n';
    return kExitUsage;
  }
  return kExitOk;
}

}  // namespace

int cli_main(std::span<const std::string> args, std::ostream& out,
             std::ostream& err) {
  CLI::App app{"Hand exoskeleton firmware simulator", "exosim"};
  app.require_subcommand(1);

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Run a scenario");
  run_cmd->add_option("scenario", run.scenario, "Scenario file")->required();
  run_cmd->add_option("--seed", run.seed, "Detector RNG seed");
  run_cmd->add_option("--out", run.out, "Trace CSV path");
  run_cmd->add_option("--summary", run.summary, "Summary format")
      ->check(CLI::IsMember({"json", "text"}));
  run_cmd->add_option("--trace", run.trace, "Trace rows: every tick or events only")
      ->check(CLI::IsMember({"full", "events"}));
  run_cmd->add_option("--fps", run.fps, "Detector frame rate")
      ->check(CLI::PositiveNumber);
  run_cmd->add_option("--latency-ms", run.latency_ms, "Inference latency")
      ->check(CLI::NonNegativeNumber);
  run_cmd->add_option("--watchdog", run.watchdog, "Action on watchdog expiry")
      ->check(CLI::IsMember({"halt", "log"}));

  DriverArgs drv;
  auto* drv_cmd = app.add_subcommand("driver", "Simulate the MOSFET driver turn-on");
  drv_cmd->add_option("--load", drv.load)->check(CLI::IsMember({"motor", "solenoid"}));
  drv_cmd->add_option("--soft-start", drv.soft_start)->check(CLI::IsMember({"on", "off"}));
  drv_cmd->add_option("--dt", drv.dt, "Integration step [s]")->check(CLI::PositiveNumber);
  drv_cmd->add_option("--t-end", drv.t_end, "Simulated time [s]");
  drv_cmd->add_option("--vth", drv.v_th, "MOSFET threshold [V]")->check(CLI::Range(0.5, 1.1));
  drv_cmd->add_option("--steady-ma", drv.steady_ma, "Motor steady current [mA]")
      ->check(CLI::PositiveNumber);
  drv_cmd->add_option("--out", drv.out, "Transient CSV path");

  BatteryArgs bat;
  auto* bat_cmd = app.add_subcommand("battery", "Constant-current discharge");
  bat_cmd->add_option("--current-ma", bat.current_ma)->required()->check(CLI::NonNegativeNumber);
  bat_cmd->add_option("--hours", bat.hours)->required()->check(CLI::NonNegativeNumber);
  bat_cmd->add_option("--v0", bat.v0, "Starting voltage");

  std::string check_path;
  auto* check_cmd = app.add_subcommand("check", "Parse a scenario and report errors");
  check_cmd->add_option("scenario", check_path)->required();

  try {
    // CLI11 consumes arguments from the back.
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    err << sub->help();
    return kExitUsage;
  }

  if (run_cmd->parsed()) return do_run(run, out, err);
  if (drv_cmd->parsed()) return do_driver(drv, out, err);
  if (bat_cmd->parsed()) return do_battery(bat, out, err);
  return do_check(check_path, out, err);
}

}  // namespace exosim::cli
