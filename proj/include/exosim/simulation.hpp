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

#ifndef EXOSIM_SIMULATION_HPP
#define EXOSIM_SIMULATION_HPP

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "exosim/firmware.hpp"
#include "exosim/kernel.hpp"
#include "exosim/peripherals.hpp"
#include "exosim/scenario.hpp"

namespace exosim::sim {

using kernel::Tick;

enum class WatchdogPolicy : std::uint8_t {
  Halt,  ///< stop the run at expiry (exit code 3)
  Log,   ///< record the expiry and keep running
};

enum class StopReason : std::uint8_t { End, Hibernate, Watchdog };

struct SimConfig {
  std::uint64_t seed = 0;
  peripherals::DetectorConfig detector;
  peripherals::CurrentProfile currents;
  firmware::FirmwareConfig firmware;
  WatchdogPolicy watchdog = WatchdogPolicy::Halt;
  /// Run continues this long after hibernation before stopping.
  Tick hibernate_grace = 5000;
};

struct TraceRecord {
  Tick tick = 0;
  std::string running_task;  ///< empty when nothing ran
  firmware::MotorMode motor = firmware::MotorMode::Idle;
  peripherals::HandPhase hand = peripherals::HandPhase::Rest;
  int detected_id = 0;
  int debounce_count = 0;
  int range_mm = 0;
  bool tap_latched = false;
  bool laser_on = false;
  double battery_v = 0.0;
  double current_ma = 0.0;
  std::vector<std::string> events;
};

struct RunSummary {
  int grasp_cycles = 0;
  int releases_by_tap = 0;
  int timeouts = 0;
  double final_battery_v = 0.0;
  std::optional<double> hibernated_at;  ///< seconds
  bool watchdog_expired = false;
  std::optional<double> watchdog_expired_at;  ///< seconds
  StopReason stop = StopReason::End;
  Tick ticks = 0;
};

/// Exit code of the CLI for a finished run: 0 clean, 3 watchdog, 4
/// hibernation.
int exit_code(const RunSummary& s);

/// One scenario run: kernel, firmware and plant advanced together, one tick
/// per step().
class Simulation {
 public:
  /// `s` must outlive the simulation. Throws ConfigError for a scenario
  /// whose initial battery voltage the battery model cannot represent.
  Simulation(const scenario::Scenario& s, SimConfig config);

  Simulation(const Simulation&) = delete;
  Simulation& operator=(const Simulation&) = delete;

  /// Advances one tick; returns the record for it. No-op once finished().
  const TraceRecord& step();
  bool finished() const { return stop_.has_value(); }

  /// Steps until finished, handing every record to `sink` (may be empty).
  RunSummary run(const std::function<void(const TraceRecord&)>& sink = {});

  RunSummary summary() const;

  kernel::Kernel& kernel() { return kernel_; }
  const kernel::Kernel& kernel() const { return kernel_; }
  const firmware::World& world() const { return world_; }
  const firmware::TaskIds& tasks() const { return ids_; }
  Tick end_tick() const { return end_tick_; }

 private:
  SimConfig config_;
  kernel::Kernel kernel_;
  firmware::World world_;
  firmware::TaskIds ids_;
  scenario::EnvCursor env_;
  Tick end_tick_;
  TraceRecord record_;
  int grasp_cycles_ = 0;
  int releases_ = 0;
  int timeouts_ = 0;
  std::optional<Tick> watchdog_at_;
  std::optional<StopReason> stop_;
};

/// Resolves the detector seed: explicit value, else the scenario header,
/// else $EXOSIM_SEED, else 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> cli,
                           const scenario::Scenario& s);

// ---------------------------------------------------------------------------
// Output formats

enum class TraceMode : std::uint8_t { Full, Events };

inline constexpr const char* kTraceHeader =
    "tick,t_s,running_task,motor_state,hand_state,detected_id,debounce_count,"
    "range_mm,tap_latched,laser_on,battery_v,current_mA,event";

/// RFC-4180 field quoting: fields holding a comma, quote or line break are
/// wrapped in quotes with inner quotes doubled.
std::string csv_field(std::string_view s);

std::string format_trace_row(const TraceRecord& r);

/// Writes the header and then the records the mode keeps.
class TraceWriter {
 public:
  TraceWriter(std::ostream& out, TraceMode mode);
  void write(const TraceRecord& r);

 private:
  std::ostream* out_;
  TraceMode mode_;
};

std::string summary_json(const RunSummary& s);
std::string summary_text(const RunSummary& s);

}  // namespace exosim::sim

#endif  // EXOSIM_SIMULATION_HPP
