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

#include "exosim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace exosim::scenario {

std::optional<int> object_id_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kObjectNames.size(); ++i)
    if (kObjectNames[i] == name) return static_cast<int>(i) + 1;
  return std::nullopt;
}

std::string_view object_name(int id) {
  if (id < 1 || id > static_cast<int>(kObjectNames.size())) return {};
  return kObjectNames[static_cast<std::size_t>(id) - 1];
}

std::string to_string(const Diagnostic& d) {
  return fmt::format("{} (line {}, column {})", d.message, d.line, d.column);
}

kernel::Tick event_tick(double at) {
  return static_cast<kernel::Tick>(std::ceil(at * 1000.0 - 1e-6));
}

namespace {

struct Token {
  std::string_view text;
  int column = 0;
};

std::vector<Token> tokenize(std::string_view line) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' ||
                               line[i] == '\r'))
      ++i;
    if (i >= line.size() || line[i] == '#') break;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t' &&
           line[i] != '\r' && line[i] != '#')
      ++i;
    out.push_back({line.substr(start, i - start), static_cast<int>(start) + 1});
  }
  return out;
}

std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::optional<std::uint64_t> to_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || p != end) return std::nullopt;
  return v;
}

/// Parser state for one file. Each line is handled independently so that
/// every error in the file is reported.
class Parser {
 public:
  ParseResult run(std::string_view text) {
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const auto nl = text.find('\n', pos);
      const auto line =
          text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                         : nl - pos);
      ++line_no;
      line_ = line_no;
      parse_line(tokenize(line));
      if (nl == std::string_view::npos) break;
      pos = nl + 1;
    }
    finish();
    return std::move(result_);
  }

 private:
  void error(int column, std::string message) {
    result_.errors.push_back({line_, column, std::move(message)});
  }

  std::optional<double> number(const Token& t) {
    auto v = to_double(t.text);
    if (!v) error(t.column, fmt::format("invalid number '{}'", t.text));
    return v;
  }

  std::optional<double> ranged(const Token& t, std::string_view what,
                               double lo, double hi) {
    auto v = number(t);
    if (v && (*v < lo || *v > hi)) {
      error(t.column, fmt::format("{} {} out of range [{}, {}]", what, t.text,
                                  lo, hi));
      return std::nullopt;
    }
    return v;
  }

  bool arity(const std::vector<Token>& toks, std::size_t want,
             std::string_view what) {
    if (toks.size() < want) {
      const int col = toks.empty() ? 1
                                   : toks.back().column +
                                         static_cast<int>(toks.back().text.size());
      error(col, fmt::format("missing argument for '{}'", what));
      return false;
    }
    if (toks.size() > want) {
      error(toks[want].column,
            fmt::format("unexpected token '{}'", toks[want].text));
      return false;
    }
    return true;
  }

  void parse_line(const std::vector<Token>& toks) {
    if (toks.empty()) return;
    const auto& head = toks[0];
    if (head.text == "at") {
      parse_event(toks);
    } else if (head.text == "battery") {
      if (!arity(toks, 2, "battery") || !once(seen_battery_, head)) return;
      auto v = number(toks[1]);
      if (!v) return;
      if (*v <= kMinBatteryVolts || *v > kDefaultBatteryVolts) {
        error(toks[1].column,
              fmt::format("battery {} out of range ({}, {}]", toks[1].text,
                          kMinBatteryVolts, kDefaultBatteryVolts));
        return;
      }
      result_.scenario.initial.battery_v = *v;
    } else if (head.text == "seed") {
      if (!arity(toks, 2, "seed") || !once(seen_seed_, head)) return;
      auto v = to_u64(toks[1].text);
      if (!v) {
        error(toks[1].column, fmt::format("invalid seed '{}'", toks[1].text));
        return;
      }
      result_.scenario.seed = *v;
    } else if (head.text == "battery_slope") {
      if (!arity(toks, 2, "battery_slope") || !once(seen_slope_, head)) return;
      auto v = number(toks[1]);
      if (!v) return;
      if (*v <= 0.0) {
        error(toks[1].column, "battery_slope must be > 0");
        return;
      }
      result_.scenario.battery_slope = *v;
    } else {
      error(head.column, fmt::format("unknown keyword '{}'", head.text));
    }
  }

  bool once(bool& seen, const Token& t) {
    if (seen) {
      error(t.column, fmt::format("duplicate '{}' directive", t.text));
      return false;
    }
    seen = true;
    return true;
  }

  void parse_event(const std::vector<Token>& toks) {
    if (toks.size() < 3) {
      arity(toks, 3, "at");
      return;
    }
    auto at = number(toks[1]);
    if (!at) return;
    if (*at < 0.0) {
      error(toks[1].column, "time must be >= 0");
      return;
    }
    const auto& kw = toks[2];
    std::optional<EventPayload> what;
    if (kw.text == "object") {
      what = parse_object(toks);
    } else if (kw.text == "clear") {
      if (arity(toks, 3, "clear")) what = ObjectCleared{};
    } else if (kw.text == "distance") {
      what = parse_distance(toks);
    } else if (kw.text == "tap") {
      if (arity(toks, 3, "tap")) what = Tap{};
    } else if (kw.text == "light") {
      if (arity(toks, 4, "light"))
        if (auto m = ranged(toks[3], "light", 0.0, 1.0)) what = Light{*m};
    } else if (kw.text == "end") {
      if (arity(toks, 3, "end")) {
        if (end_line_) {
          error(kw.column,
                fmt::format("duplicate end (first at line {})", end_line_));
        } else {
          end_line_ = line_;
          end_at_ = *at;
          what = End{};
        }
      }
    } else {
      error(kw.column, fmt::format("unknown keyword '{}'", kw.text));
    }
    if (what) {
      result_.scenario.events.push_back({*at, std::move(*what)});
      lines_.push_back(line_);
    }
  }

  std::optional<EventPayload> parse_object(const std::vector<Token>& toks) {
    if (toks.size() < 4) {
      arity(toks, 4, "object");
      return std::nullopt;
    }
    ObjectShown obj;
    bool ok = true;
    const auto& name = toks[3];
    if (auto id = object_id_from_name(name.text)) {
      obj.id = *id;
    } else if (auto n = to_u64(name.text)) {
      if (*n < 1 || *n > kObjectNames.size()) {
        error(name.column,
              fmt::format("object id {} out of range [1, 6]", name.text));
        ok = false;
      } else {
        obj.id = static_cast<int>(*n);
      }
    } else {
      error(name.column, fmt::format("unknown object '{}'", name.text));
      ok = false;
    }
    for (std::size_t i = 4; i < toks.size(); ++i) {
      const auto& t = toks[i];
      const auto eq = t.text.find('=');
      const auto key = t.text.substr(0, eq);
      if (eq == std::string_view::npos || (key != "score" && key != "prob")) {
        error(t.column, fmt::format("unexpected token '{}'", t.text));
        ok = false;
        continue;
      }
      Token value{t.text.substr(eq + 1), t.column + static_cast<int>(eq) + 1};
      auto v = ranged(value, key, 0.0, 1.0);
      if (!v) {
        ok = false;
        continue;
      }
      (key == "score" ? obj.score : obj.prob) = *v;
    }
    if (!ok) return std::nullopt;
    return obj;
  }

  std::optional<EventPayload> parse_distance(const std::vector<Token>& toks) {
    if (toks.size() >= 4 && toks[3].text == "ramp") {
      if (!arity(toks, 8, "distance ramp")) return std::nullopt;
      if (toks[6].text != "over") {
        error(toks[6].column,
              fmt::format("expected 'over', found '{}'", toks[6].text));
        return std::nullopt;
      }
      auto from = ranged(toks[4], "distance", 0.0, HUGE_VAL);
      auto to = ranged(toks[5], "distance", 0.0, HUGE_VAL);
      auto over = number(toks[7]);
      if (over && *over <= 0.0) {
        error(toks[7].column, "ramp duration must be > 0");
        over.reset();
      }
      if (!from || !to || !over) return std::nullopt;
      return DistanceRamp{*from, *to, *over};
    }
    if (!arity(toks, 4, "distance")) return std::nullopt;
    if (auto mm = ranged(toks[3], "distance", 0.0, HUGE_VAL))
      return DistanceSet{*mm};
    return std::nullopt;
  }

  void finish() {
    auto& s = result_.scenario;
    if (end_line_) {
      for (std::size_t i = 0; i < s.events.size(); ++i) {
        if (s.events[i].at > end_at_) {
          result_.errors.push_back(
              {end_line_, 1,
               fmt::format("end at {} precedes event at {} (line {})", end_at_,
                           s.events[i].at, lines_[i])});
        }
      }
    }
    std::stable_sort(s.events.begin(), s.events.end(),
                     [](const ScenarioEvent& a, const ScenarioEvent& b) {
                       return a.at < b.at;
                     });
    double last = 0.0;
    for (const auto& e : s.events) last = std::max(last, e.at);
    s.duration = end_line_ ? end_at_ : last;
  }

  ParseResult result_;
  int line_ = 0;
  std::vector<int> lines_;
  int end_line_ = 0;
  double end_at_ = 0.0;
  bool seen_battery_ = false;
  bool seen_seed_ = false;
  bool seen_slope_ = false;
};

struct Formatter {
  std::string& out;
  double at;

  void operator()(const ObjectShown& o) const {
    out += fmt::format("at {} object {} score={} prob={}\n", at,
                       object_name(o.id), o.score, o.prob);
  }
  void operator()(const ObjectCleared&) const {
    out += fmt::format("at {} clear\n", at);
  }
  void operator()(const DistanceSet& d) const {
    out += fmt::format("at {} distance {}\n", at, d.mm);
  }
  void operator()(const DistanceRamp& r) const {
    out += fmt::format("at {} distance ramp {} {} over {}\n", at, r.from_mm,
                       r.to_mm, r.over_s);
  }
  void operator()(const Tap&) const { out += fmt::format("at {} tap\n", at); }
  void operator()(const Light& l) const {
    out += fmt::format("at {} light {}\n", at, l.multiplier);
  }
  void operator()(const End&) const { out += fmt::format("at {} end\n", at); }
};

}  // namespace

ParseResult parse_scenario(std::string_view text) { return Parser{}.run(text); }

std::string format_scenario(const Scenario& s) {
  std::string out = fmt::format("battery {}\n", s.initial.battery_v);
  if (s.seed) out += fmt::format("seed {}\n", *s.seed);
  if (s.battery_slope) out += fmt::format("battery_slope {}\n", *s.battery_slope);
  for (const auto& e : s.events) std::visit(Formatter{out, e.at}, e.what);
  return out;
}

// ---------------------------------------------------------------------------
// Environment fold

namespace detail {

void EnvFold::apply(const ScenarioEvent& e) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ObjectShown>) {
          object = p;
        } else if constexpr (std::is_same_v<T, ObjectCleared>) {
          object.reset();
        } else if constexpr (std::is_same_v<T, DistanceSet> ||
                             std::is_same_v<T, DistanceRamp>) {
          distance = p;
          distance_since = e.at;
        } else if constexpr (std::is_same_v<T, Light>) {
          light = p.multiplier;
        }
      },
      e.what);
}

EnvState EnvFold::evaluate(double t) const {
  EnvState env;
  env.light = light;
  if (object) {
    env.visible_object = object->id;
    env.score = object->score;
    env.detect_prob = std::clamp(object->prob * light, 0.0, 1.0);
  }
  if (const auto* set = std::get_if<DistanceSet>(&distance)) {
    env.true_distance_mm = set->mm;
  } else {
    const auto& r = std::get<DistanceRamp>(distance);
    const double u = (t - distance_since) / r.over_s;
    env.true_distance_mm =
        u >= 1.0 ? r.to_mm : r.from_mm + (r.to_mm - r.from_mm) * std::max(u, 0.0);
  }
  return env;
}

}  // namespace detail

EnvState env_at(const Scenario& s, double t) {
  if (!(t >= 0.0) || t > s.duration)
    throw std::out_of_range(
        fmt::format("env_at: t={} outside [0, {}]", t, s.duration));
  detail::EnvFold fold(s.initial);
  const auto tick = event_tick(t);
  bool tap = false;
  for (const auto& e : s.events) {
    if (event_tick(e.at) > tick) break;
    fold.apply(e);
    if (std::holds_alternative<Tap>(e.what) && event_tick(e.at) == tick)
      tap = true;
  }
  auto env = fold.evaluate(t);
  env.tap_pending = tap;
  return env;
}

EnvCursor::EnvCursor(const Scenario& s)
    : scenario_(&s), fold_(s.initial), env_(fold_.evaluate(0.0)) {}

const EnvState& EnvCursor::advance_to(kernel::Tick tick) {
  const auto& events = scenario_->events;
  bool tap = false;
  while (next_ < events.size() && event_tick(events[next_].at) <= tick) {
    const auto& e = events[next_++];
    fold_.apply(e);
    if (std::holds_alternative<Tap>(e.what) && event_tick(e.at) == tick)
      tap = true;
  }
  env_ = fold_.evaluate(kernel::ticks_to_seconds(tick));
  env_.tap_pending = tap;
  return env_;
}

}  // namespace exosim::scenario
