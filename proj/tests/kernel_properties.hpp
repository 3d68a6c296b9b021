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


// Random task-set harness shared by the kernel tests and the acceptance run.

#ifndef EXOSIM_TESTS_KERNEL_PROPERTIES_HPP
#define EXOSIM_TESTS_KERNEL_PROPERTIES_HPP

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "exosim/kernel.hpp"

namespace props {

using namespace exosim::kernel;

struct Script {
  int priority;
  int max_delay;      // 0 = never blocks
  int block_percent;  // chance of delaying after a step
};

struct Observation {
  std::string trace;
  bool dominance_ok = true;
  bool suspension_ok = true;
};

// Runs a random task set with external suspend/resume noise and checks the
// per-tick invariants from inside the steps.
inline Observation run_random(std::uint64_t seed, int ticks) {
  std::mt19937_64 rng(seed);
  const int n = 2 + static_cast<int>(rng() % 5);
  std::vector<Script> scripts;
  for (int i = 0; i < n; ++i)
    scripts.push_back({static_cast<int>(rng() % 4),
                       static_cast<int>(rng() % 6),
                       static_cast<int>(rng() % 60)});

  Kernel k;
  Observation obs;
  std::vector<bool> suspended(static_cast<std::size_t>(n), false);
  std::mt19937_64 step_rng(seed ^ 0x5555);
  for (int i = 0; i < n; ++i) {
    const auto s = scripts[static_cast<std::size_t>(i)];
    k.spawn_task("T" + std::to_string(i), s.priority,
                 [&, s](Kernel& kk, TaskId self) {
                   const auto top = kk.ready_lists().top_priority();
                   if (top && *top > s.priority) obs.dominance_ok = false;
                   if (suspended[self]) obs.suspension_ok = false;
                   if (s.max_delay > 0 &&
                       static_cast<int>(step_rng() % 100) < s.block_percent)
                     kk.delay_task(self, std::chrono::milliseconds(
                                             1 + step_rng() % s.max_delay));
                 });
  }
  for (int t = 0; t < ticks; ++t) {
    if (rng() % 10 == 0) {
      const auto id = static_cast<TaskId>(rng() % static_cast<unsigned>(n));
      if (suspended[id]) {
        k.resume_task(id);
        suspended[id] = false;
      } else {
        k.suspend_task(id);
        suspended[id] = true;
      }
    }
    for (const auto& e : k.advance_tick())
      obs.trace += fmt::format("{}:{}:{};", e.tick, static_cast<int>(e.kind),
                               e.task);
    obs.trace += k.running() ? std::to_string(*k.running()) : "-";
    obs.trace += ',';
  }
  return obs;
}

// Two equal-priority tasks under random lower-priority noise. Returns the
// first tick at which their slice counts differ by more than one, or -1.
inline int fairness_violation(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int prio = 1 + static_cast<int>(rng() % 3);
  Kernel k;
  auto noop = [](Kernel&, TaskId) {};
  const auto a = k.spawn_task("A", prio, noop);
  const auto b = k.spawn_task("B", prio, noop);
  const int extra = static_cast<int>(rng() % 3);
  for (int i = 0; i < extra; ++i) {
    const int delay = 1 + static_cast<int>(rng() % 7);
    k.spawn_task("L" + std::to_string(i), static_cast<int>(rng() % prio),
                 [delay](Kernel& kk, TaskId self) {
                   kk.delay_task(self, std::chrono::milliseconds(delay));
                 });
  }
  const int ticks = 20 + static_cast<int>(rng() % 200);
  for (int t = 0; t < ticks; ++t) {
    k.advance_tick();
    const auto sa = static_cast<long long>(k.task(a).slices);
    const auto sb = static_cast<long long>(k.task(b).slices);
    if (std::llabs(sa - sb) > 1) return t;
  }
  return -1;
}

}  // namespace props

#endif  // EXOSIM_TESTS_KERNEL_PROPERTIES_HPP
