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

#include "exosim/peripherals.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "exosim/error.hpp"

namespace exosim::peripherals {

namespace {
constexpr double kSecondsPerHour = 3600.0;
}

BatteryState BatteryState::at_voltage(double v, BatteryParams params) {
  if (!(params.slope_v_per_mah > 0.0) || !(params.capacity_mah > 0.0))
    throw ConfigError("battery slope and capacity must be positive");
  const double consumed = (params.v_full - v) / params.slope_v_per_mah;
  if (consumed < 0.0)
    throw ConfigError(fmt::format(
        "initial battery voltage {} V is above the full voltage {} V", v,
        params.v_full));
  if (consumed > params.capacity_mah)
    throw ConfigError(fmt::format(
        "initial battery voltage {} V is below the model floor {:.4f} V", v,
        params.v_full - params.slope_v_per_mah * params.capacity_mah));
  return BatteryState{params, consumed};
}

BatteryState battery_step(BatteryState b, double current_ma, double dt_s) {
  if (current_ma < 0.0 || dt_s < 0.0)
    throw PreconditionError("battery_step: current and dt must be >= 0");
  b.consumed_mah = std::min(b.params.capacity_mah,
                            b.consumed_mah + current_ma * dt_s / kSecondsPerHour);
  return b;
}

int tof_read(double true_distance_mm) {
  if (!(true_distance_mm >= 0.0))
    throw PreconditionError("tof_read: distance must be >= 0");
  return static_cast<int>(
      std::lround(std::min(true_distance_mm, double{kTofMaxRangeMm})));
}

TapLatch tap_service(TapLatch latch, TapEvent event) {
  switch (event) {
    case TapEvent::Tap:
      if (latch.enabled) latch.latched = true;
      break;
    case TapEvent::Clear: latch.latched = false; break;
    case TapEvent::Enable: latch.enabled = true; break;
    case TapEvent::Disable: latch.enabled = false; break;
  }
  return latch;
}

// ---------------------------------------------------------------------------
// Detector

Tick DetectorConfig::period_for_fps(double fps) {
  if (!(fps > 0.0)) throw ConfigError("frame rate must be positive");
  const double ms = 1000.0 / fps;
  // Guard against 1000/10 landing a hair above 100.
  return static_cast<Tick>(std::ceil(ms - 1e-9));
}

void Detector::on_tick(Tick now, const Visibility& scene) {
  if (now % config_.frame_period == 0) {
    const double u = rng_.uniform01();
    DetectionFrame f;
    f.frame_tick = now;
    f.available_tick = now + config_.latency;
    if (scene.object_id != kNoObject && u < scene.detect_prob) {
      f.object_id = scene.object_id;
      f.score = scene.score;
    }
    in_flight_.push_back(f);
  }
  while (!in_flight_.empty() && in_flight_.front().available_tick <= now) {
    ready_ = in_flight_.front();
    in_flight_.pop_front();
  }
}

std::optional<DetectionFrame> Detector::poll(Tick now) {
  if (!ready_ || ready_->available_tick > now) return std::nullopt;
  auto f = ready_;
  ready_.reset();
  return f;
}

Tick Detector::next_available_tick(Tick now) const {
  if (ready_) return now;
  if (!in_flight_.empty()) return in_flight_.front().available_tick;
  const Tick p = config_.frame_period;
  const Tick next_capture = (now / p + 1) * p;
  return next_capture + config_.latency;
}

// ---------------------------------------------------------------------------
// Hand plant

std::string_view to_string(HandPhase p) {
  switch (p) {
    case HandPhase::Rest: return "Rest";
    case HandPhase::Opening: return "Opening";
    case HandPhase::Open: return "Open";
    case HandPhase::Closing: return "Closing";
    case HandPhase::Closed: return "Closed";
  }
  return "?";
}

HandPlant plant_command(HandPlant h, HandCommand cmd) {
  switch (cmd) {
    case HandCommand::Open: h.phase = HandPhase::Opening; break;
    case HandCommand::Close: h.phase = HandPhase::Closing; break;
    case HandCommand::Rest: h.phase = HandPhase::Rest; break;
  }
  h.transition_elapsed = 0;
  return h;
}

HandPlant plant_step(HandPlant h, Tick dt) {
  if (h.phase == HandPhase::Opening) {
    h.transition_elapsed += dt;
    if (h.transition_elapsed >= h.t_open) h.phase = HandPhase::Open;
  } else if (h.phase == HandPhase::Closing) {
    h.transition_elapsed += dt;
    if (h.transition_elapsed >= h.t_close) h.phase = HandPhase::Closed;
  }
  return h;
}

double system_current([[maybe_unused]] firmware::MotorMode motor,
                      const HandPlant& hand, const CurrentProfile& profile) {
  switch (hand.phase) {
    case HandPhase::Opening: return profile.opening_ma;
    case HandPhase::Closing: return profile.closing_ma;
    case HandPhase::Closed: return profile.holding_ma;
    case HandPhase::Rest:
    case HandPhase::Open: break;
  }
  return profile.idle_ma;
}

}  // namespace exosim::peripherals
