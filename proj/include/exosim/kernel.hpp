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

#ifndef EXOSIM_KERNEL_HPP
#define EXOSIM_KERNEL_HPP

#include <chrono>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace exosim::kernel {

/// Ticks since kernel start. One tick is one millisecond.
using Tick = std::int64_t;
using TaskId = std::uint32_t;

inline constexpr std::chrono::milliseconds kTickPeriod{1};
inline constexpr Tick kNever = std::numeric_limits<Tick>::max();

/// Converts a duration to ticks, rounding up to the next whole tick.
constexpr Tick to_ticks(std::chrono::nanoseconds d) {
  const auto period = std::chrono::nanoseconds(kTickPeriod).count();
  const auto n = d.count();
  return n <= 0 ? 0 : (n + period - 1) / period;
}

constexpr double ticks_to_seconds(Tick t) {
  return static_cast<double>(t) *
         std::chrono::duration<double>(kTickPeriod).count();
}

/// Virtual clock. Only ever moves forward, one tick at a time.
class SimClock {
 public:
  Tick now() const { return ticks_; }
  double seconds() const { return ticks_to_seconds(ticks_); }
  void advance() { ++ticks_; }

 private:
  Tick ticks_ = 0;
};

enum class TaskState : std::uint8_t { Ready, Running, Blocked, Suspended };

std::string_view to_string(TaskState s);

class Kernel;

/// One run-to-completion slice of a task. It may delay, wait, suspend or
/// resume tasks through the kernel, but must never block the host thread.
using StepFn = std::function<void(Kernel&, TaskId)>;

struct TaskRecord {
  TaskId id = 0;
  std::string name;
  int priority = 0;
  TaskState state = TaskState::Ready;
  Tick wake_tick = 0;
  StepFn step;
  bool waiting_notify = false;
  bool notify_pending = false;
  std::uint64_t slices = 0;
};

/// Per-priority FIFO of Ready task ids. Index is the priority.
class ReadyLists {
 public:
  void push_back(int priority, TaskId id);
  /// Returns false when the id was not present at that priority.
  bool remove(int priority, TaskId id);
  bool contains(int priority, TaskId id) const;
  bool empty() const;
  /// Highest priority with at least one Ready task.
  std::optional<int> top_priority() const;
  std::span<const TaskId> at(int priority) const;
  std::size_t size() const;

 private:
  std::vector<std::vector<TaskId>> lists_;
};

/// Chooses the task for the next slot: the head of the highest non-empty
/// priority list, skipping `last_run` when it sits at the head of a list
/// that has another candidate (round-robin with a one-tick slice).
std::optional<TaskId> pick_next_task(const ReadyLists& ready,
                                     std::optional<TaskId> last_run);

class Watchdog {
 public:
  explicit Watchdog(Tick timeout = to_ticks(std::chrono::seconds(8)))
      : timeout_(timeout) {}

  void kick(Tick now) {
    if (!expired_) last_kick_ = now;
  }
  /// True once now - last kick reaches the timeout. Sticky until reset().
  bool check(Tick now) {
    if (!expired_ && now - last_kick_ >= timeout_) expired_ = true;
    return expired_;
  }
  void reset(Tick now) {
    expired_ = false;
    last_kick_ = now;
  }

  bool expired() const { return expired_; }
  Tick last_kick() const { return last_kick_; }
  Tick timeout() const { return timeout_; }
  Tick expiry_tick() const { return last_kick_ + timeout_; }

 private:
  Tick timeout_;
  Tick last_kick_ = 0;
  bool expired_ = false;
};

enum class EventKind : std::uint8_t {
  TaskSwitch,
  TaskSuspend,
  TaskResume,
  WatchdogExpired,
  Fault,
};

std::string_view to_string(EventKind k);

struct KernelEvent {
  EventKind kind = EventKind::TaskSwitch;
  Tick tick = 0;
  TaskId task = 0;
  std::string detail;
};

struct KernelConfig {
  Tick watchdog_timeout = to_ticks(std::chrono::seconds(8));
  bool watchdog_enabled = true;
};

/// Deterministic single-core scheduler over a virtual clock.
///
/// Each advance_tick() promotes due Blocked tasks, picks exactly one Ready
/// task (or none), runs its step once, rotates it to the tail of its
/// priority list if it is still runnable, then checks the watchdog.
class Kernel {
 public:
  explicit Kernel(KernelConfig config = {});

  Kernel(const Kernel&) = delete;
  Kernel& operator=(const Kernel&) = delete;

  TaskId spawn_task(std::string name, int priority, StepFn step);

  /// Runs one tick. The returned span is valid until the next call.
  std::span<const KernelEvent> advance_tick();

  void delay_task(TaskId id, std::chrono::milliseconds delay);
  void delay_until(TaskId id, Tick wake_tick);

  /// Accepts Suspended or Ready (resume); anything else is rejected.
  void set_task_state(TaskId id, TaskState new_state);
  void suspend_task(TaskId id) { set_task_state(id, TaskState::Suspended); }
  void resume_task(TaskId id) { set_task_state(id, TaskState::Ready); }

  /// Blocks the task until notify(). Returns immediately (task stays
  /// runnable) if a notification is already pending.
  void wait_notify(TaskId id);
  void notify(TaskId id);

  Tick now() const { return clock_.now(); }
  double seconds() const { return clock_.seconds(); }
  /// Task that ran during the most recent tick, if any.
  std::optional<TaskId> running() const { return running_; }
  std::optional<TaskId> last_run() const { return last_run_; }

  const TaskRecord& task(TaskId id) const;
  std::span<const TaskRecord> tasks() const { return tasks_; }
  std::optional<TaskId> find(std::string_view name) const;
  const ReadyLists& ready_lists() const { return ready_; }

  Watchdog& watchdog() { return watchdog_; }
  const Watchdog& watchdog() const { return watchdog_; }

 private:
  TaskRecord& record(TaskId id);
  void make_ready(TaskRecord& t);
  void detach(TaskRecord& t);
  void emit(EventKind kind, TaskId task, std::string detail = {});

  KernelConfig config_;
  SimClock clock_;
  std::vector<TaskRecord> tasks_;
  ReadyLists ready_;
  Watchdog watchdog_;
  std::optional<TaskId> running_;
  std::optional<TaskId> last_run_;
  bool in_tick_ = false;
  std::vector<KernelEvent> tick_events_;
  std::vector<KernelEvent> external_events_;
};

}  // namespace exosim::kernel

#endif  // EXOSIM_KERNEL_HPP
