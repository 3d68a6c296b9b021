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

#include "exosim/simulation.hpp"

#include <charconv>
#include <cstdlib>
#include <ostream>

#include <fmt/format.h>
#include <json.hpp>

namespace exosim::sim {

namespace p = peripherals;
namespace fw = firmware;

namespace {

p::BatteryState initial_battery(const scenario::Scenario& s) {
  p::BatteryParams params;
  if (s.battery_slope) params.slope_v_per_mah = *s.battery_slope;
  return p::BatteryState::at_voltage(s.initial.battery_v, params);
}

p::Visibility visibility(const scenario::EnvState& env) {
  return {env.visible_object.value_or(p::kNoObject), env.score,
          env.detect_prob};
}

}  // namespace

int exit_code(const RunSummary& s) {
  if (s.stop == StopReason::Watchdog) return 3;
  if (s.hibernated_at) return 4;
  return 0;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> cli,
                           const scenario::Scenario& s) {
  if (cli) return *cli;
  if (s.seed) return *s.seed;
  if (const char* env = std::getenv("EXOSIM_SEED")) {
    std::uint64_t v = 0;
    const std::string_view text(env);
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec == std::errc{} && ptr == text.data() + text.size()) return v;
  }
  return 0;
}

Simulation::Simulation(const scenario::Scenario& s, SimConfig config)
    : config_(config),
      world_(p::Detector(config.detector, config.seed), initial_battery(s)),
      env_(s),
      end_tick_(scenario::event_tick(s.duration)) {
  ids_ = fw::install_firmware(kernel_, world_, config_.firmware);
  world_.hand.laser_on = true;

  // Tick 0: the environment as scripted at t = 0 and the first capture.
  const auto& env = env_.advance_to(0);
  world_.true_distance_mm = env.true_distance_mm;
  if (env.tap_pending) world_.tap = p::tap_service(world_.tap, p::TapEvent::Tap);
  world_.detector.on_tick(0, visibility(env));
  if (end_tick_ <= 0) stop_ = StopReason::End;
}

const TraceRecord& Simulation::step() {
  if (stop_) return record_;
  const Tick t = kernel_.now() + 1;

  const auto& env = env_.advance_to(t);
  world_.true_distance_mm = env.true_distance_mm;
  if (env.tap_pending) world_.tap = p::tap_service(world_.tap, p::TapEvent::Tap);
  world_.detector.on_tick(t, visibility(env));
  world_.hand = p::plant_step(world_.hand, 1);

  world_.events.clear();
  const auto kernel_events = kernel_.advance_tick();

  const double current =
      p::system_current(world_.motor.mode, world_.hand, config_.currents);
  world_.battery = p::battery_step(world_.battery, current, 1e-3);

  auto& r = record_;
  r.tick = t;
  const auto running = kernel_.running();
  r.running_task = running ? kernel_.task(*running).name : std::string();
  r.motor = world_.motor.mode;
  r.hand = world_.hand.phase;
  r.detected_id = world_.last_frame ? world_.last_frame->object_id : 0;
  r.debounce_count = world_.debounce.object_count;
  r.range_mm = world_.buffers.range_mm;
  r.tap_latched = world_.tap.latched;
  r.laser_on = world_.hand.laser_on;
  r.battery_v = world_.battery.voltage();
  r.current_ma = current;
  r.events.clear();

  for (const auto& e : world_.events) {
    r.events.emplace_back(fw::to_string(e.kind));
    switch (e.kind) {
      case fw::FirmwareEventKind::Trigger: ++grasp_cycles_; break;
      case fw::FirmwareEventKind::Release: ++releases_; break;
      case fw::FirmwareEventKind::Timeout: ++timeouts_; break;
      default: break;
    }
  }
  bool watchdog_now = false;
  for (const auto& e : kernel_events) {
    const auto& name = kernel_.task(e.task).name;
    switch (e.kind) {
      case kernel::EventKind::TaskSwitch: break;
      case kernel::EventKind::TaskSuspend:
        r.events.push_back("suspend:" + name);
        break;
      case kernel::EventKind::TaskResume:
        r.events.push_back("resume:" + name);
        break;
      case kernel::EventKind::WatchdogExpired:
        r.events.emplace_back("watchdog");
        watchdog_now = true;
        break;
      case kernel::EventKind::Fault:
        r.events.push_back(fmt::format("fault:{}:{}", name, e.detail));
        break;
    }
  }

  if (watchdog_now) {
    watchdog_at_ = t;
    if (config_.watchdog == WatchdogPolicy::Halt) stop_ = StopReason::Watchdog;
  }
  if (!stop_ && world_.hibernated_at &&
      t >= *world_.hibernated_at + config_.hibernate_grace)
    stop_ = StopReason::Hibernate;
  if (!stop_ && t >= end_tick_) stop_ = StopReason::End;
  return r;
}

RunSummary Simulation::run(
    const std::function<void(const TraceRecord&)>& sink) {
  while (!finished()) {
    const auto& r = step();
    if (sink) sink(r);
  }
  return summary();
}

RunSummary Simulation::summary() const {
  RunSummary s;
  s.grasp_cycles = grasp_cycles_;
  s.releases_by_tap = releases_;
  s.timeouts = timeouts_;
  s.final_battery_v = world_.battery.voltage();
  if (world_.hibernated_at)
    s.hibernated_at = kernel::ticks_to_seconds(*world_.hibernated_at);
  s.watchdog_expired = watchdog_at_.has_value();
  if (watchdog_at_) s.watchdog_expired_at = kernel::ticks_to_seconds(*watchdog_at_);
  s.stop = stop_.value_or(StopReason::End);
  s.ticks = kernel_.now();
  return s;
}

// ---------------------------------------------------------------------------
// Output

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\r\n") == std::string_view::npos)
    return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string format_trace_row(const TraceRecord& r) {
  std::string events;
  for (const auto& e : r.events) {
    if (!events.empty()) events += ';';
    events += e;
  }
  return fmt::format("{},{:.3f},{},{},{},{},{},{},{},{},{:.4f},{},{}", r.tick,
                     kernel::ticks_to_seconds(r.tick),
                     csv_field(r.running_task), fw::to_string(r.motor),
                     p::to_string(r.hand), r.detected_id, r.debounce_count,
                     r.range_mm, r.tap_latched ? 1 : 0, r.laser_on ? 1 : 0,
                     r.battery_v, r.current_ma, csv_field(events));
}

TraceWriter::TraceWriter(std::ostream& out, TraceMode mode)
    : out_(&out), mode_(mode) {
  *out_ << kTraceHeader << '\n';
}

void TraceWriter::write(const TraceRecord& r) {
  if (mode_ == TraceMode::Events && r.events.empty()) return;
  *out_ << format_trace_row(r) << '\n';
}

std::string summary_json(const RunSummary& s) {
  nlohmann::ordered_json j;
  j["grasp_cycles"] = s.grasp_cycles;
  j["releases_by_tap"] = s.releases_by_tap;
  j["timeouts"] = s.timeouts;
  j["final_battery_v"] = s.final_battery_v;
  j["hibernated_at"] =
      s.hibernated_at ? nlohmann::ordered_json(*s.hibernated_at) : nullptr;
  j["watchdog_expired"] = s.watchdog_expired;
  return j.dump(2);
}

std::string summary_text(const RunSummary& s) {
  return fmt::format(
      "grasp_cycles     {}\n"
      "releases_by_tap  {}\n"
      "timeouts         {}\n"
      "final_battery_v  {:.4f}\n"
      "hibernated_at    {}\n"
      "watchdog_expired {}\n",
      s.grasp_cycles, s.releases_by_tap, s.timeouts, s.final_battery_v,
      s.hibernated_at ? fmt::format("{:.3f} s", *s.hibernated_at) : "-",
      s.watchdog_expired ? "yes" : "no");
}

}  // namespace exosim::sim
