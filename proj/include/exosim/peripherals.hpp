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

#ifndef EXOSIM_PERIPHERALS_HPP
#define EXOSIM_PERIPHERALS_HPP

#include <cstdint>
#include <deque>
#include <optional>
#include <random>
#include <string_view>

#include "exosim/kernel.hpp"

namespace exosim::firmware {
enum class MotorMode : std::uint8_t;
}

namespace exosim::peripherals {

using kernel::Tick;

// ---------------------------------------------------------------------------
// Battery: coulomb counter with a linear voltage law.

struct BatteryParams {
  double capacity_mah = 1300.0;
  double v_full = 12.89;
  /// Volts lost per mAh drawn. Calibrated from the 3 h hold-state
  /// discharge (1.54 V over 690 mAh).
  double slope_v_per_mah = 2.2319e-3;
};

struct BatteryState {
  BatteryParams params;
  double consumed_mah = 0.0;

  double voltage() const {
    return params.v_full - params.slope_v_per_mah * consumed_mah;
  }

  /// State whose voltage equals `v`. Throws ConfigError when `v` is above
  /// v_full or would need more than the full capacity drawn.
  static BatteryState at_voltage(double v, BatteryParams params = {});
};

/// Draws `current_ma` for `dt_s` seconds. Consumption clamps at capacity.
BatteryState battery_step(BatteryState b, double current_ma, double dt_s);

// ---------------------------------------------------------------------------
// Time-of-flight ranger.

inline constexpr int kTofMaxRangeMm = 255;

/// min(true distance, 255) rounded to whole millimetres.
int tof_read(double true_distance_mm);

// ---------------------------------------------------------------------------
// Accelerometer tap latch (the TapDetected register).

struct TapLatch {
  bool enabled = false;
  bool latched = false;
  bool operator==(const TapLatch&) const = default;
};

enum class TapEvent : std::uint8_t { Tap, Clear, Enable, Disable };

TapLatch tap_service(TapLatch latch, TapEvent event);

// ---------------------------------------------------------------------------
// Object detector stub.

inline constexpr int kNoObject = 0;

struct DetectionFrame {
  int object_id = kNoObject;  ///< 0 = nothing, 1..6 = class index
  double score = 0.0;
  Tick frame_tick = 0;      ///< capture time
  Tick available_tick = 0;  ///< capture + inference latency
  bool operator==(const DetectionFrame&) const = default;
};

/// What the camera would see at the capture instant.
struct Visibility {
  int object_id = kNoObject;
  double score = 0.0;
  double detect_prob = 0.0;
};

struct DetectorConfig {
  Tick frame_period = 100;  ///< 10 FPS
  Tick latency = 51;

  /// Period for a frame rate, rounded up so frames are never closer than
  /// 1/fps apart.
  static Tick period_for_fps(double fps);
};

/// Seeded source of detection hits. The sequence is fixed by the standard:
/// draw n is the n-th mt19937_64 output mapped to [0,1) by its top 53 bits.
class DetectionRng {
 public:
  explicit DetectionRng(std::uint64_t seed) : engine_(seed) {}
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  std::mt19937_64 engine_;
};

/// Free-running camera plus fixed-latency inference.
///
/// Frames are captured on the grid k * frame_period (from tick 0), one random
/// draw per capture, and become available `latency` ticks later. poll()
/// returns the newest available frame not yet delivered; older undelivered
/// frames are dropped, as a camera ring buffer would.
class Detector {
 public:
  Detector(DetectorConfig config, std::uint64_t seed)
      : config_(config), rng_(seed) {}

  /// Advances the camera to `now`, capturing on grid ticks.
  void on_tick(Tick now, const Visibility& scene);

  /// Newest undelivered frame with available_tick <= now, if any.
  std::optional<DetectionFrame> poll(Tick now);

  /// Earliest tick at which poll() can next return a frame.
  Tick next_available_tick(Tick now) const;

  const DetectorConfig& config() const { return config_; }

 private:
  DetectorConfig config_;
  DetectionRng rng_;
  std::deque<DetectionFrame> in_flight_;
  std::optional<DetectionFrame> ready_;
};

// ---------------------------------------------------------------------------
// Pneumatic hand.

enum class HandPhase : std::uint8_t { Rest, Opening, Open, Closing, Closed };

std::string_view to_string(HandPhase p);

enum class HandCommand : std::uint8_t { Open, Close, Rest };

struct HandPlant {
  HandPhase phase = HandPhase::Rest;
  Tick transition_elapsed = 0;
  Tick t_open = 2000;
  Tick t_close = 2000;
  bool laser_on = true;
};

/// Opening/Closing restart their timer on every command; Rest is immediate.
HandPlant plant_command(HandPlant h, HandCommand cmd);
HandPlant plant_step(HandPlant h, Tick dt);

struct CurrentProfile {
  double idle_ma = 100.0;
  double opening_ma = 250.0;
  double closing_ma = 625.0;
  double holding_ma = 230.0;
};

/// System draw for the current actuator phase. The hand phase decides:
/// Opening, Closing and Closed (holding) have their own draw, everything
/// else is the idle baseline.
double system_current(firmware::MotorMode motor, const HandPlant& hand,
                      const CurrentProfile& profile = {});

}  // namespace exosim::peripherals

#endif  // EXOSIM_PERIPHERALS_HPP
