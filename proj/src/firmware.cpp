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

#include "exosim/firmware.hpp"

#include <fmt/format.h>

#include "exosim/error.hpp"

namespace exosim::firmware {

namespace p = peripherals;

std::string_view to_string(MotorMode m) {
  switch (m) {
    case MotorMode::Idle: return "Idle";
    case MotorMode::OpenHand: return "OpenHand";
    case MotorMode::CloseHand: return "CloseHand";
  }
  return "?";
}

std::string_view to_string(FirmwareEventKind k) {
  switch (k) {
    case FirmwareEventKind::Trigger: return "trigger";
    case FirmwareEventKind::Grasp: return "grasp";
    case FirmwareEventKind::Release: return "release";
    case FirmwareEventKind::Timeout: return "timeout";
    case FirmwareEventKind::Hibernate: return "hibernate";
    case FirmwareEventKind::RangeStale: return "warning:range_stale";
  }
  return "?";
}

bool is_legal_transition(MotorMode from, MotorMode to) {
  using enum MotorMode;
  return (from == Idle && to == OpenHand) ||
         (from == OpenHand && (to == CloseHand || to == Idle)) ||
         (from == CloseHand && to == Idle);
}

DebounceResult debounce_update(DebounceState d, int object_id,
                               MotorMode motor) {
  if (object_id != p::kNoObject && object_id == d.last_object_id) {
    ++d.object_count;
  } else {
    d.last_object_id = object_id;
    d.object_count = object_id != p::kNoObject ? 1 : 0;
  }
  const bool trigger =
      d.object_count >= kTriggerCount && motor != MotorMode::OpenHand;
  if (trigger) d.object_count = 0;
  return {d, trigger};
}

std::optional<double> estimate_runtime(std::span<const BatterySample> samples,
                                       double elapsed_min, double cutoff_v) {
  if (samples.size() != kEstimatorWindow)
    throw PreconditionError(fmt::format(
        "estimate_runtime needs {} samples, got {}", kEstimatorWindow,
        samples.size()));
  if (!(elapsed_min > 0.0))
    throw PreconditionError("estimate_runtime needs elapsed time > 0");
  const double first = samples.front().voltage;
  const double last = samples.back().voltage;
  if (first <= last) return std::nullopt;
  const double volts_per_min = (first - last) / elapsed_min;
  return (last - cutoff_v) / volts_per_min;
}

namespace {

void emit(World& w, FirmwareEventKind kind, Tick now, std::string detail = {}) {
  w.events.push_back({kind, now, std::move(detail)});
}

void enter(World& w, MotorMode to) {
  if (!is_legal_transition(w.motor.mode, to))
    throw StateError(fmt::format("illegal motor transition {} -> {}",
                                 to_string(w.motor.mode), to_string(to)));
  w.motor.mode = to;
  w.motor.entry_pending = true;
}

void motor_step(Kernel& k, TaskId self, World& w, const TaskIds& ids,
                const FirmwareConfig& cfg) {
  const Tick now = k.now();
  auto& m = w.motor;

  if (m.mode == MotorMode::Idle) {
    k.wait_notify(self);
    return;
  }

  if (m.mode == MotorMode::OpenHand) {
    if (m.entry_pending) {
      m.entry_pending = false;
      k.suspend_task(ids.inference);
      w.hand = p::plant_command(w.hand, p::HandCommand::Open);
      m.open_entry_tick = now;
    }
    if (now - w.buffers.range_tick > cfg.range_stale_after)
      emit(w, FirmwareEventKind::RangeStale, now,
           fmt::format("{} ms", now - w.buffers.range_tick));
    if (w.buffers.range_mm < cfg.grasp_range_mm) {
      w.tap = p::tap_service(w.tap, p::TapEvent::Clear);
      enter(w, MotorMode::CloseHand);
      emit(w, FirmwareEventKind::Grasp, now);
      // Fall through to the CloseHand entry in this same slice.
    } else if (now - m.open_entry_tick >= cfg.open_timeout) {
      w.hand = p::plant_command(w.hand, p::HandCommand::Rest);
      k.resume_task(ids.inference);
      enter(w, MotorMode::Idle);
      m.entry_pending = false;
      emit(w, FirmwareEventKind::Timeout, now);
      k.wait_notify(self);
      return;
    } else {
      k.delay_task(self, std::chrono::milliseconds(cfg.motor_poll));
      return;
    }
  }

  // CloseHand.
  if (m.entry_pending) {
    m.entry_pending = false;
    w.hand = p::plant_command(w.hand, p::HandCommand::Close);
  }
  if (w.tap.latched) {
    w.hand = p::plant_command(w.hand, p::HandCommand::Rest);
    k.resume_task(ids.inference);
    enter(w, MotorMode::Idle);
    m.entry_pending = false;
    emit(w, FirmwareEventKind::Release, now);
    k.wait_notify(self);
    return;
  }
  k.delay_task(self, std::chrono::milliseconds(cfg.motor_poll));
}

void battery_step(Kernel& k, TaskId self, World& w, const TaskIds& ids,
                  const FirmwareConfig& cfg) {
  const Tick now = k.now();
  auto& est = w.estimator;
  if (est.samples.empty()) {
    est.window_start_tick = now;
    if (est.next_sample_tick == 0) est.next_sample_tick = now;
  }
  est.samples.push_back({w.battery.voltage(), now});

  if (est.samples.size() == kEstimatorWindow) {
    const double elapsed_min = static_cast<double>(now - est.window_start_tick) /
                               static_cast<double>(cfg.battery_period);
    const auto runtime = estimate_runtime(est.samples, elapsed_min);
    est.samples.clear();
    if (!w.hibernated_at && runtime && *runtime < cfg.hibernate_below_min) {
      k.suspend_task(ids.motor);
      k.suspend_task(ids.inference);
      k.suspend_task(ids.sensor);
      w.hibernated_at = now;
      emit(w, FirmwareEventKind::Hibernate, now,
           fmt::format("{:.1f} min", *runtime));
    }
  }

  // Fixed cadence regardless of when this slice actually got the CPU.
  est.next_sample_tick += cfg.battery_period;
  k.delay_until(self, est.next_sample_tick);
}

void inference_step(Kernel& k, TaskId self, World& w, const TaskIds& ids) {
  const Tick now = k.now();
  const auto frame = w.detector.poll(now);
  if (frame) {
    const int id = frame->object_id;
    const int previous = w.debounce.last_object_id;
    if (id != p::kNoObject && previous != p::kNoObject) {
      w.hand.laser_on = false;
    } else if (id == p::kNoObject && w.motor.mode == MotorMode::Idle) {
      w.hand.laser_on = true;
    }
    w.last_frame = frame;

    const auto r = debounce_update(w.debounce, id, w.motor.mode);
    w.debounce = r.state;
    if (r.trigger) {
      w.tap = p::tap_service(w.tap, p::TapEvent::Enable);
      enter(w, MotorMode::OpenHand);
      k.notify(ids.motor);
      emit(w, FirmwareEventKind::Trigger, now, fmt::format("id {}", id));
    }
  }
  // Block on the camera until the next frame is ready.
  k.delay_until(self, w.detector.next_available_tick(now));
}

void sensor_step(Kernel& k, TaskId self, World& w, const FirmwareConfig& cfg) {
  const Tick now = k.now();
  w.buffers.range_mm = p::tof_read(w.true_distance_mm);
  w.buffers.range_tick = now;
  w.buffers.tap_latched = w.tap.latched;
  k.watchdog().kick(now);
  k.delay_task(self, std::chrono::milliseconds(cfg.sensor_poll));
}

}  // namespace

TaskIds install_firmware(Kernel& k, World& world, FirmwareConfig config) {
  // Ids are sequential in spawn order; the steps need them before spawning.
  TaskIds ids;
  const auto base = static_cast<TaskId>(k.tasks().size());
  ids.motor = base;
  ids.battery = base + 1;
  ids.inference = base + 2;
  ids.sensor = base + 3;

  k.spawn_task("MotorTask", kMotorPriority,
               [&world, ids, config](Kernel& kk, TaskId self) {
                 motor_step(kk, self, world, ids, config);
               });
  k.spawn_task("BatteryTask", kBatteryPriority,
               [&world, ids, config](Kernel& kk, TaskId self) {
                 battery_step(kk, self, world, ids, config);
               });
  k.spawn_task("InferenceTask", kInferencePriority,
               [&world, ids](Kernel& kk, TaskId self) {
                 inference_step(kk, self, world, ids);
               });
  k.spawn_task("SensorTask", kSensorPriority,
               [&world, config](Kernel& kk, TaskId self) {
                 sensor_step(kk, self, world, config);
               });
  return ids;
}

}  // namespace exosim::firmware
