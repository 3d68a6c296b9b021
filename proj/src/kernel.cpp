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

#include "exosim/kernel.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "exosim/error.hpp"

namespace exosim::kernel {

std::string_view to_string(TaskState s) {
  switch (s) {
    case TaskState::Ready: return "Ready";
    case TaskState::Running: return "Running";
    case TaskState::Blocked: return "Blocked";
    case TaskState::Suspended: return "Suspended";
  }
  return "?";
}

std::string_view to_string(EventKind k) {
  switch (k) {
    case EventKind::TaskSwitch: return "task_switch";
    case EventKind::TaskSuspend: return "task_suspend";
    case EventKind::TaskResume: return "task_resume";
    case EventKind::WatchdogExpired: return "watchdog_expired";
    case EventKind::Fault: return "fault";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// ReadyLists

void ReadyLists::push_back(int priority, TaskId id) {
  if (static_cast<std::size_t>(priority) >= lists_.size())
    lists_.resize(static_cast<std::size_t>(priority) + 1);
  lists_[static_cast<std::size_t>(priority)].push_back(id);
}

bool ReadyLists::remove(int priority, TaskId id) {
  if (priority < 0 || static_cast<std::size_t>(priority) >= lists_.size())
    return false;
  auto& list = lists_[static_cast<std::size_t>(priority)];
  auto it = std::find(list.begin(), list.end(), id);
  if (it == list.end()) return false;
  list.erase(it);
  return true;
}

bool ReadyLists::contains(int priority, TaskId id) const {
  const auto list = at(priority);
  return std::find(list.begin(), list.end(), id) != list.end();
}

bool ReadyLists::empty() const {
  return std::all_of(lists_.begin(), lists_.end(),
                     [](const auto& l) { return l.empty(); });
}

std::optional<int> ReadyLists::top_priority() const {
  for (auto p = static_cast<int>(lists_.size()) - 1; p >= 0; --p) {
    if (!lists_[static_cast<std::size_t>(p)].empty()) return p;
  }
  return std::nullopt;
}

std::span<const TaskId> ReadyLists::at(int priority) const {
  if (priority < 0 || static_cast<std::size_t>(priority) >= lists_.size())
    return {};
  return lists_[static_cast<std::size_t>(priority)];
}

std::size_t ReadyLists::size() const {
  std::size_t n = 0;
  for (const auto& l : lists_) n += l.size();
  return n;
}

std::optional<TaskId> pick_next_task(const ReadyLists& ready,
                                     std::optional<TaskId> last_run) {
  const auto top = ready.top_priority();
  if (!top) return std::nullopt;
  const auto list = ready.at(*top);
  if (list.size() > 1 && last_run && list.front() == *last_run)
    return list[1];
  return list.front();
}

// ---------------------------------------------------------------------------
// Kernel

Kernel::Kernel(KernelConfig config)
    : config_(config), watchdog_(config.watchdog_timeout) {}

TaskId Kernel::spawn_task(std::string name, int priority, StepFn step) {
  if (priority < 0)
    throw ConfigError(fmt::format("task '{}': negative priority {}", name,
                                  priority));
  if (find(name))
    throw ConfigError(fmt::format("task '{}' already exists", name));
  if (!step) throw ConfigError(fmt::format("task '{}' has no step", name));

  TaskRecord t;
  t.id = static_cast<TaskId>(tasks_.size());
  t.name = std::move(name);
  t.priority = priority;
  t.state = TaskState::Ready;
  t.step = std::move(step);
  ready_.push_back(priority, t.id);
  tasks_.push_back(std::move(t));
  return tasks_.back().id;
}

std::span<const KernelEvent> Kernel::advance_tick() {
  tick_events_.clear();
  tick_events_.swap(external_events_);

  clock_.advance();
  const Tick now = clock_.now();
  in_tick_ = true;

  // Id order keeps promotion deterministic when several wake together.
  for (auto& t : tasks_) {
    if (t.state == TaskState::Blocked && t.wake_tick <= now) {
      t.waiting_notify = false;
      make_ready(t);
    }
  }

  running_ = pick_next_task(ready_, last_run_);
  if (running_) {
    auto& t = tasks_[*running_];
    ready_.remove(t.priority, t.id);
    t.state = TaskState::Running;
    if (last_run_ != running_) emit(EventKind::TaskSwitch, t.id);

    try {
      t.step(*this, t.id);
    } catch (const StateError& e) {
      emit(EventKind::Fault, t.id, e.what());
    } catch (const LookupError& e) {
      emit(EventKind::Fault, t.id, e.what());
    }

    ++t.slices;
    if (t.state == TaskState::Running) make_ready(t);
    last_run_ = running_;
  }

  if (config_.watchdog_enabled && !watchdog_.expired() &&
      watchdog_.check(now)) {
    emit(EventKind::WatchdogExpired, running_.value_or(0));
  }
  in_tick_ = false;
  return tick_events_;
}

void Kernel::delay_task(TaskId id, std::chrono::milliseconds delay) {
  if (delay.count() < 0)
    throw StateError(fmt::format("negative delay {} ms", delay.count()));
  delay_until(id, now() + to_ticks(delay));
}

void Kernel::delay_until(TaskId id, Tick wake_tick) {
  auto& t = record(id);
  if (t.state != TaskState::Running && t.state != TaskState::Ready)
    throw StateError(fmt::format("cannot delay task '{}' while {}", t.name,
                                 to_string(t.state)));
  detach(t);
  t.state = TaskState::Blocked;
  t.wake_tick = wake_tick;
}

void Kernel::set_task_state(TaskId id, TaskState new_state) {
  auto& t = record(id);
  switch (new_state) {
    case TaskState::Suspended:
      if (t.state == TaskState::Suspended) return;
      detach(t);
      t.state = TaskState::Suspended;
      t.waiting_notify = false;
      emit(EventKind::TaskSuspend, t.id);
      return;
    case TaskState::Ready:
      if (t.state != TaskState::Suspended) return;
      make_ready(t);
      emit(EventKind::TaskResume, t.id);
      return;
    case TaskState::Running:
    case TaskState::Blocked:
      break;
  }
  throw StateError(fmt::format("set_task_state: {} is not a valid target",
                               to_string(new_state)));
}

void Kernel::wait_notify(TaskId id) {
  auto& t = record(id);
  if (t.notify_pending) {
    t.notify_pending = false;
    return;
  }
  delay_until(id, kNever);
  t.waiting_notify = true;
}

void Kernel::notify(TaskId id) {
  auto& t = record(id);
  if (t.state == TaskState::Blocked && t.waiting_notify) {
    t.waiting_notify = false;
    make_ready(t);
  } else {
    t.notify_pending = true;
  }
}

const TaskRecord& Kernel::task(TaskId id) const {
  if (id >= tasks_.size())
    throw LookupError(fmt::format("unknown task id {}", id));
  return tasks_[id];
}

std::optional<TaskId> Kernel::find(std::string_view name) const {
  for (const auto& t : tasks_)
    if (t.name == name) return t.id;
  return std::nullopt;
}

TaskRecord& Kernel::record(TaskId id) {
  if (id >= tasks_.size())
    throw LookupError(fmt::format("unknown task id {}", id));
  return tasks_[id];
}

void Kernel::make_ready(TaskRecord& t) {
  t.state = TaskState::Ready;
  ready_.push_back(t.priority, t.id);
}

void Kernel::detach(TaskRecord& t) {
  if (t.state == TaskState::Ready) ready_.remove(t.priority, t.id);
}

void Kernel::emit(EventKind kind, TaskId task, std::string detail) {
  auto& sink = in_tick_ ? tick_events_ : external_events_;
  // Out-of-tick events are reported with the tick at which they happened.
  sink.push_back(KernelEvent{kind, clock_.now(), task, std::move(detail)});
}

}  // namespace exosim::kernel
