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

// Scenario files: a line-oriented timeline of what the exoskeleton sees.
//
//   # comment
//   battery 12.8            initial battery voltage (header)
//   seed 42                 detector RNG seed (header)
//   battery_slope 0.042     volts per mAh (header, optional)
//   at 0 object cup score=0.9 prob=1.0
//   at 2 distance ramp 120 25 over 3
//   at 5 distance 40
//   at 6 light 0.5
//   at 7 clear
//   at 9 tap
//   at 10 end

#ifndef EXOSIM_SCENARIO_HPP
#define EXOSIM_SCENARIO_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "exosim/kernel.hpp"

namespace exosim::scenario {

inline constexpr std::array<std::string_view, 6> kObjectNames = {
    "ball", "bottle", "cube", "cup", "pen", "spoon"};

/// 1..6 for a known class name.
std::optional<int> object_id_from_name(std::string_view name);
/// Inverse of object_id_from_name; empty for ids outside 1..6.
std::string_view object_name(int id);

struct ObjectShown {
  int id = 0;
  double score = 1.0;
  double prob = 1.0;
  bool operator==(const ObjectShown&) const = default;
};
struct ObjectCleared {
  bool operator==(const ObjectCleared&) const = default;
};
struct DistanceSet {
  double mm = 0.0;
  bool operator==(const DistanceSet&) const = default;
};
struct DistanceRamp {
  double from_mm = 0.0;
  double to_mm = 0.0;
  double over_s = 0.0;
  bool operator==(const DistanceRamp&) const = default;
};
struct Tap {
  bool operator==(const Tap&) const = default;
};
struct Light {
  double multiplier = 1.0;
  bool operator==(const Light&) const = default;
};
struct End {
  bool operator==(const End&) const = default;
};

using EventPayload = std::variant<ObjectShown, ObjectCleared, DistanceSet,
                                  DistanceRamp, Tap, Light, End>;

struct ScenarioEvent {
  double at = 0.0;
  EventPayload what;
  bool operator==(const ScenarioEvent&) const = default;
};

inline constexpr double kDefaultBatteryVolts = 12.89;
inline constexpr double kMinBatteryVolts = 9.0;
inline constexpr double kDefaultDistanceMm = 255.0;

struct InitialConditions {
  double battery_v = kDefaultBatteryVolts;
  double distance_mm = kDefaultDistanceMm;
  bool operator==(const InitialConditions&) const = default;
};

struct Scenario {
  std::vector<ScenarioEvent> events;  ///< stable-sorted by time
  double duration = 0.0;
  InitialConditions initial;
  std::optional<std::uint64_t> seed;
  std::optional<double> battery_slope;
  bool operator==(const Scenario&) const = default;
};

struct Diagnostic {
  int line = 0;
  int column = 0;
  std::string message;
};

std::string to_string(const Diagnostic& d);

struct ParseResult {
  Scenario scenario;
  std::vector<Diagnostic> errors;
  bool ok() const { return errors.empty(); }
};

/// Parses the whole text, collecting every error rather than stopping at the
/// first one.
ParseResult parse_scenario(std::string_view text);

/// Canonical text form; parse_scenario(format_scenario(s)) reproduces s.
std::string format_scenario(const Scenario& s);

/// Environment signals at one instant.
struct EnvState {
  std::optional<int> visible_object;
  double score = 0.0;
  double detect_prob = 0.0;  ///< object prob x light, clamped to [0,1]
  double light = 1.0;
  double true_distance_mm = kDefaultDistanceMm;
  bool tap_pending = false;
  bool operator==(const EnvState&) const = default;
};

/// Folds every event up to and including the tick containing t, so that
/// events stamped between ticks apply at the next whole millisecond. Throws
/// std::out_of_range outside [0, duration].
EnvState env_at(const Scenario& s, double t);

/// Tick at which an event stamped `at` seconds first applies.
kernel::Tick event_tick(double at);

namespace detail {
/// Running fold of timeline events; shared by env_at and EnvCursor.
struct EnvFold {
  std::optional<ObjectShown> object;
  std::variant<DistanceSet, DistanceRamp> distance;
  double distance_since = 0.0;
  double light = 1.0;

  explicit EnvFold(const InitialConditions& init)
      : distance(DistanceSet{init.distance_mm}) {}
  void apply(const ScenarioEvent& e);
  EnvState evaluate(double t) const;
};
}  // namespace detail

/// Incremental env_at for a simulation walking forward one tick at a time.
/// Matches env_at(s, tick / 1000) at every tick it is advanced to.
class EnvCursor {
 public:
  explicit EnvCursor(const Scenario& s);
  /// `tick` must not go backwards.
  const EnvState& advance_to(kernel::Tick tick);
  const EnvState& current() const { return env_; }

 private:
  const Scenario* scenario_;
  std::size_t next_ = 0;
  detail::EnvFold fold_;
  EnvState env_;
};

}  // namespace exosim::scenario

#endif  // EXOSIM_SCENARIO_HPP
