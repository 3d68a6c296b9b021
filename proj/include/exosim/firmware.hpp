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

// The four control tasks of the hand controller, written as kernel steps.
//
//   MotorTask      grasp state machine (Idle -> OpenHand -> CloseHand -> Idle)
//   BatteryTask    per-minute voltage sampling, runtime estimate, hibernation
//   InferenceTask  detector polling, laser, debounce and trigger
//   SensorTask     ranger / tap latch polling into shared buffers, watchdog

#ifndef EXOSIM_FIRMWARE_HPP
#define EXOSIM_FIRMWARE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "exosim/kernel.hpp"
#include "exosim/peripherals.hpp"

namespace exosim::firmware {

using kernel::Kernel;
using kernel::TaskId;
using kernel::Tick;

enum class MotorMode : std::uint8_t { Idle, OpenHand, CloseHand };

std::string_view to_string(MotorMode m);

/// The four edges of the grasp state machine.
bool is_legal_transition(MotorMode from, MotorMode to);

struct MotorState {
  MotorMode mode = MotorMode::Idle;
  Tick open_entry_tick = 0;  ///< valid in OpenHand
  bool entry_pending = false;  ///< entry actions of `mode` not yet run
};

struct DebounceState {
  int last_object_id = peripherals::kNoObject;
  int object_count = 0;
  bool operator==(const DebounceState&) const = default;
};

struct DebounceResult {
  DebounceState state;
  bool trigger = false;
};

inline constexpr int kTriggerCount = 6;

/// One detector frame through the debounce counter. A repeat of the last
/// nonzero id counts up; any other id restarts the run at that id (count 1,
/// or 0 for no detection). Fires when the run reaches six and the motor is
/// not already opening, which resets the count.
DebounceResult debounce_update(DebounceState d, int object_id, MotorMode motor);

struct SensorBuffers {
  int range_mm = peripherals::kTofMaxRangeMm;
  Tick range_tick = 0;
  bool tap_latched = false;
};

struct BatterySample {
  double voltage = 0.0;
  Tick tick = 0;
};

inline constexpr std::size_t kEstimatorWindow = 10;
inline constexpr double kCutoffVolts = 9.0;

struct RuntimeEstimatorState {
  std::vector<BatterySample> samples;
  Tick window_start_tick = 0;
  Tick next_sample_tick = 0;
};

/// Minutes until the battery reaches `cutoff_v` by linear extrapolation
/// over the window, or nothing when the voltage has not fallen. Requires
/// exactly ten samples and elapsed_min > 0.
std::optional<double> estimate_runtime(std::span<const BatterySample> samples,
                                       double elapsed_min,
                                       double cutoff_v = kCutoffVolts);

struct FirmwareConfig {
  int grasp_range_mm = 30;
  Tick motor_poll = 100;
  Tick open_timeout = 10000;
  Tick sensor_poll = 50;
  Tick battery_period = 60000;
  double hibernate_below_min = 30.0;
  Tick range_stale_after = 1000;
};

enum class FirmwareEventKind : std::uint8_t {
  Trigger,
  Grasp,
  Release,
  Timeout,
  Hibernate,
  RangeStale,
};

std::string_view to_string(FirmwareEventKind k);

struct FirmwareEvent {
  FirmwareEventKind kind;
  Tick tick = 0;
  std::string detail;
};

/// Everything the tasks touch: the simulated devices and the firmware's own
/// globals. The simulation owns it; tasks hold a reference.
struct World {
  // Devices.
  peripherals::Detector detector;
  peripherals::HandPlant hand;
  peripherals::TapLatch tap;
  peripherals::BatteryState battery;
  double true_distance_mm = peripherals::kTofMaxRangeMm;

  // Firmware globals.
  MotorState motor;
  DebounceState debounce;
  SensorBuffers buffers;
  RuntimeEstimatorState estimator;
  std::optional<peripherals::DetectionFrame> last_frame;
  std::optional<Tick> hibernated_at;

  /// Appended by the tasks; the simulation drains it every tick.
  std::vector<FirmwareEvent> events;

  World(peripherals::Detector d, peripherals::BatteryState b)
      : detector(std::move(d)), battery(b) {}
};

struct TaskIds {
  TaskId motor = 0;
  TaskId battery = 0;
  TaskId inference = 0;
  TaskId sensor = 0;
};

inline constexpr int kMotorPriority = 3;
inline constexpr int kBatteryPriority = 3;
inline constexpr int kInferencePriority = 2;
inline constexpr int kSensorPriority = 1;

/// Spawns the four tasks in the order Motor, Battery, Inference, Sensor.
/// `world` must outlive the kernel's use of the tasks.
TaskIds install_firmware(Kernel& k, World& world, FirmwareConfig config = {});

}  // namespace exosim::firmware

#endif  // EXOSIM_FIRMWARE_HPP
