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

#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <string>

#include <fmt/format.h>

#include "exosim/error.hpp"
#include "exosim/firmware.hpp"
#include "exosim/simulation.hpp"
#include "oracles.hpp"

using namespace exosim;
using namespace exosim::firmware;

namespace {

scenario::Scenario parse(const std::string& text) {
  auto r = scenario::parse_scenario(text);
  EXPECT_TRUE(r.ok()) << (r.ok() ? "" : scenario::to_string(r.errors[0]));
  return r.scenario;
}

std::vector<BatterySample> linear_window(double v_first, double v_last) {
  std::vector<BatterySample> s;
  for (int i = 0; i < 10; ++i)
    s.push_back({v_first + (v_last - v_first) * i / 9.0, i * 60000});
  return s;
}

bool has_event(const sim::TraceRecord& r, std::string_view name) {
  return std::find(r.events.begin(), r.events.end(), name) != r.events.end();
}

}  // namespace

TEST(MotorTransitions, OnlyFourEdgesAreLegal) {
  using enum MotorMode;
  int legal = 0;
  for (auto a : {Idle, OpenHand, CloseHand})
    for (auto b : {Idle, OpenHand, CloseHand}) legal += is_legal_transition(a, b);
  EXPECT_EQ(legal, 4);
  EXPECT_TRUE(is_legal_transition(Idle, OpenHand));
  EXPECT_TRUE(is_legal_transition(OpenHand, CloseHand));
  EXPECT_TRUE(is_legal_transition(OpenHand, Idle));
  EXPECT_TRUE(is_legal_transition(CloseHand, Idle));
}

TEST(Debounce, SixthEqualFrameTriggers) {
  DebounceState d;
  for (int i = 1; i <= 6; ++i) {
    const auto r = debounce_update(d, 3, MotorMode::Idle);
    EXPECT_EQ(r.trigger, i == 6) << i;
    d = r.state;
  }
  EXPECT_EQ(d.object_count, 0);
}

TEST(Debounce, AlternatingIdsNeverTrigger) {
  DebounceState d;
  for (int i = 0; i < 100; ++i) {
    const auto r = debounce_update(d, i % 2 ? 4 : 3, MotorMode::Idle);
    ASSERT_FALSE(r.trigger);
    d = r.state;
  }
}

TEST(Debounce, DifferentIdRestartsRun) {
  DebounceState d;
  for (int i = 0; i < 5; ++i) d = debounce_update(d, 3, MotorMode::Idle).state;
  const auto r = debounce_update(d, 5, MotorMode::Idle);
  EXPECT_FALSE(r.trigger);
  EXPECT_EQ(r.state.last_object_id, 5);
  EXPECT_EQ(r.state.object_count, 1);
}

TEST(Debounce, NoRetriggerWhileOpening) {
  DebounceState d;
  for (int i = 0; i < 5; ++i) d = debounce_update(d, 3, MotorMode::Idle).state;
  EXPECT_FALSE(debounce_update(d, 3, MotorMode::OpenHand).trigger);
}

TEST(DebounceProperty, MatchesBruteForceOracle) {
  std::uint64_t master = 99;
  for (int c = 0; c < 100000; ++c) {
    std::mt19937_64 rng(oracle::splitmix(master));
    const std::size_t len = 1 + rng() % 50;
    // Few distinct ids make long runs likely.
    const int alphabet = 1 + static_cast<int>(rng() % 7);
    std::vector<int> ids(len);
    std::vector<bool> opening(len);
    for (std::size_t i = 0; i < len; ++i) {
      ids[i] = static_cast<int>(rng() % static_cast<unsigned>(alphabet));
      opening[i] = rng() % 8 == 0;
    }
    const auto want = oracle::debounce_triggers(ids, opening);
    DebounceState d;
    for (std::size_t i = 0; i < len; ++i) {
      const auto r = debounce_update(
          d, ids[i], opening[i] ? MotorMode::OpenHand : MotorMode::Idle);
      ASSERT_EQ(r.trigger, want[i]) << "case " << c << " frame " << i;
      d = r.state;
    }
  }
}

TEST(Estimator, ConstantVoltageGivesNothing) {
  EXPECT_FALSE(estimate_runtime(linear_window(12.0, 12.0), 10.0));
}

TEST(Estimator, TenthOfAVoltInTenMinutes) {
  const auto r = estimate_runtime(linear_window(12.0, 11.9), 10.0);
  ASSERT_TRUE(r);
  EXPECT_NEAR(*r, *oracle::runtime_minutes(12.0, 11.9, 10.0), 1e-9);
  EXPECT_NEAR(*r, 290.0, 1e-9);
}

TEST(Estimator, AtCutoffIsZero) {
  const auto r = estimate_runtime(linear_window(9.5, 9.0), 9.0);
  ASSERT_TRUE(r);
  EXPECT_DOUBLE_EQ(*r, 0.0);
}

TEST(Estimator, Preconditions) {
  auto w = linear_window(12.0, 11.0);
  w.pop_back();
  EXPECT_THROW(estimate_runtime(w, 9.0), PreconditionError);
  EXPECT_THROW(estimate_runtime(linear_window(12.0, 11.0), 0.0),
               PreconditionError);
}

// ---------------------------------------------------------------------------
// Task behaviour inside a full simulation

TEST(MotorTask, CloseOnNearRangeThenReleaseOnTap) {
  const auto s = parse(
      "at 0 object cup\nat 0 distance 120\nat 1 distance 25\nat 4 tap\nat 4.5 end\n");
  sim::Simulation sim(s, {});
  Tick grasp = -1, release = -1;
  bool latch_cleared_on_grasp = false;
  sim.run([&](const sim::TraceRecord& r) {
    if (has_event(r, "grasp")) {
      grasp = r.tick;
      latch_cleared_on_grasp = !r.tap_latched;
    }
    if (has_event(r, "release")) release = r.tick;
  });
  EXPECT_GT(grasp, 1000);
  EXPECT_LE(grasp, 1000 + 50 + 100 + 1);
  EXPECT_TRUE(latch_cleared_on_grasp);
  EXPECT_GE(release, 4000);
  EXPECT_LE(release, 4000 + 100 + 1);
  EXPECT_EQ(sim.world().hand.phase, peripherals::HandPhase::Rest);
  EXPECT_EQ(sim.world().motor.mode, MotorMode::Idle);
}

TEST(MotorTask, TimeoutAfterTenSecondsFromEntry) {
  const auto s = parse("at 0 object cup\nat 0 distance 120\nat 12 end\n");
  sim::Simulation sim(s, {});
  Tick entry = -1, timeout = -1;
  sim.run([&](const sim::TraceRecord& r) {
    if (has_event(r, "suspend:InferenceTask") && entry < 0) entry = r.tick;
    if (has_event(r, "timeout")) timeout = r.tick;
  });
  ASSERT_GT(entry, 0);
  EXPECT_GE(timeout - entry, 10000);
  EXPECT_LE(timeout - entry, 10100);
  // The cup is still in view, so the hand re-arms after six fresh frames.
  EXPECT_EQ(sim.summary().grasp_cycles, 2);
}

TEST(SensorTask, RangeBufferFollowsDistance) {
  const auto s = parse("at 0 distance 400\nat 1 distance 25\nat 2 end\n");
  sim::Simulation sim(s, {});
  Tick first25 = -1;
  sim.run([&](const sim::TraceRecord& r) {
    if (r.tick < 1000) {
      ASSERT_TRUE(r.tick < 4 || r.range_mm == 255) << r.tick;
    }
    if (first25 < 0 && r.range_mm == 25) first25 = r.tick;
  });
  EXPECT_GE(first25, 1000);
  EXPECT_LE(first25, 1050);
}

TEST(SensorTask, SuspendedSensorStopsWatchdogKicks) {
  const auto s = parse("at 30 end\n");
  sim::Simulation sim(s, {});
  while (sim.kernel().now() < 2000) sim.step();
  // Suspend straight after a kick.
  while (sim.kernel().watchdog().last_kick() != sim.kernel().now()) sim.step();
  const Tick kicked = sim.kernel().now();
  sim.kernel().suspend_task(sim.tasks().sensor);
  Tick expired = -1;
  while (!sim.finished()) {
    const auto& r = sim.step();
    if (has_event(r, "watchdog")) expired = r.tick;
  }
  EXPECT_EQ(expired, kicked + 8000);
  EXPECT_EQ(sim::exit_code(sim.summary()), 3);
}

TEST(BatteryTask, SamplesEveryMinuteAndNoHibernationOnSlowDrain) {
  const auto s = parse("at 1200 end\n");
  sim::Simulation sim(s, {});
  std::vector<Tick> samples;
  sim.run([&](const sim::TraceRecord& r) {
    if (r.running_task == "BatteryTask") samples.push_back(r.tick);
  });
  ASSERT_GE(samples.size(), 20u);
  for (std::size_t i = 1; i < samples.size(); ++i)
    EXPECT_NEAR(static_cast<double>(samples[i] - samples[i - 1]), 60000.0, 1.0);
  EXPECT_FALSE(sim.summary().hibernated_at);
}

TEST(BatteryTask, HibernationSuspendsEverythingElse) {
  const auto s = parse("battery 12.0\nbattery_slope 0.042\nat 1500 end\n");
  sim::SimConfig cfg;
  cfg.hibernate_grace = 120000;  // watch two more battery samples
  cfg.watchdog = sim::WatchdogPolicy::Log;
  sim::Simulation sim(s, cfg);
  Tick hib = -1;
  std::vector<std::string> after;
  sim.run([&](const sim::TraceRecord& r) {
    if (has_event(r, "hibernate")) hib = r.tick;
    else if (hib >= 0 && !r.running_task.empty()) after.push_back(r.running_task);
  });
  ASSERT_GT(hib, 0);
  ASSERT_FALSE(after.empty());
  for (const auto& name : after) EXPECT_EQ(name, "BatteryTask");
  const auto& k = sim.kernel();
  for (auto id : {sim.tasks().motor, sim.tasks().inference, sim.tasks().sensor})
    EXPECT_EQ(k.task(id).state, kernel::TaskState::Suspended);
}

// Random scenarios: the motor only takes legal edges, inference never runs
// mid-grasp, timeouts and tap releases meet their deadlines.
TEST(FirmwareProperty, RandomScenariosKeepInvariants) {
  std::uint64_t master = 31337;
  for (int c = 0; c < 60; ++c) {
    std::mt19937_64 rng(oracle::splitmix(master));
    std::string text = fmt::format("seed {}\n", rng() % 1000);
    double t = 0.0;
    while (t < 60.0) {
      t += 0.1 * static_cast<double>(1 + rng() % 60);
      switch (rng() % 5) {
        case 0: text += fmt::format("at {:.1f} object {} prob=0.{}\n", t, 1 + rng() % 6, 5 + rng() % 5); break;
        case 1: text += fmt::format("at {:.1f} clear\n", t); break;
        case 2: text += fmt::format("at {:.1f} distance {}\n", t, rng() % 200); break;
        case 3: text += fmt::format("at {:.1f} distance ramp {} {} over {}\n", t, rng() % 200, rng() % 200, 1 + rng() % 5); break;
        default: text += fmt::format("at {:.1f} tap\n", t); break;
      }
    }
    text += "at 70 end\n";
    const auto s = parse(text);
    sim::Simulation sim(s, {});
    MotorMode prev = MotorMode::Idle;
    Tick open_entry = -1, latched_at = -1;
    sim.run([&](const sim::TraceRecord& r) {
      if (r.motor != prev) ASSERT_TRUE(is_legal_transition(prev, r.motor)) << c;
      if (r.running_task == "InferenceTask" && r.motor != MotorMode::Idle)
        ASSERT_TRUE(has_event(r, "trigger")) << c << " tick " << r.tick;
      if (has_event(r, "suspend:InferenceTask")) open_entry = r.tick;
      if (has_event(r, "timeout")) ASSERT_LE(r.tick - open_entry, 10100) << c;
      if (r.motor == MotorMode::CloseHand && r.tap_latched && latched_at < 0)
        latched_at = r.tick;
      if (has_event(r, "release")) {
        ASSERT_GE(latched_at, 0);
        ASSERT_LE(r.tick - latched_at, 101) << c;
        latched_at = -1;
      }
      for (const auto& e : r.events) ASSERT_NE(e.rfind("fault", 0), 0u) << e;
      prev = r.motor;
    });
    const auto sum = sim.summary();
    EXPECT_LE(sum.grasp_cycles - sum.releases_by_tap - sum.timeouts, 1);
    EXPECT_GE(sum.grasp_cycles - sum.releases_by_tap - sum.timeouts, 0);
  }
}
