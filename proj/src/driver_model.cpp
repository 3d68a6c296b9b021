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

#include "exosim/driver_model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

namespace exosim::driver {

std::string_view to_string(LoadKind k) {
  return k == LoadKind::Motor ? "motor" : "solenoid";
}

LoadParams LoadParams::solenoid() {
  LoadParams p;
  p.kind = LoadKind::Solenoid;
  p.resistance = 23.1;
  p.inductance = 6.73e-3;
  p.supply = 3.3;
  return p;
}

LoadParams LoadParams::motor(double steady_current_a, double mech_tau_s) {
  LoadParams p;
  p.kind = LoadKind::Motor;
  const double r_switch = MosfetParams{}.rds_on_ref;
  // Mechanical load seen electrically as a resistance R_m = E / i.
  const double r_mech = p.supply / steady_current_a - p.resistance - r_switch;
  if (!(r_mech > 0.0) || !(mech_tau_s > 0.0))
    throw ConfigError(fmt::format(
        "motor steady current {} A is not reachable at {} V", steady_current_a,
        p.supply));
  p.back_emf_coeff = kMotorKe;
  p.friction = kMotorKe * kMotorKe / r_mech;
  // Spin-up time constant including electrical damping through the winding.
  p.inertia = mech_tau_s * (p.friction + kMotorKe * kMotorKe /
                                             (p.resistance + r_switch));
  return p;
}

MosfetParams MosfetParams::with_threshold(double v_th) {
  MosfetParams m;
  m.v_th = v_th;
  m.k_gain = 1.0 / (2.0 * m.rds_on_ref * (m.v_ref - v_th));
  return m;
}

double gate_voltage(double t, const GateDrive& drive) {
  if (t <= 0.0) return 0.0;
  if (!drive.soft_start) return drive.v_logic;
  return drive.v_logic * -std::expm1(-t / drive.tau());
}

double mosfet_current(double v_gs, double v_ds, const MosfetParams& m) {
  if (m.model == SwitchModel::FixedResistance)
    return v_gs > m.v_th ? v_ds / m.rds_on_ref : 0.0;
  const double vov = v_gs - m.v_th;
  if (vov <= 0.0) return 0.0;
  if (v_ds >= vov) return m.k_gain * vov * vov;
  return m.k_gain * (2.0 * vov * v_ds - v_ds * v_ds);
}

namespace {

struct Probe {
  double operator()(double v) const { return mosfet_current(v_gs, v, m) - i_d; }
  double v_gs;
  double i_d;
  const MosfetParams& m;
};

double solve_drain(double v_gs, double i_d, const MosfetParams& m,
                   std::size_t step) {
  if (i_d <= 0.0) return 0.0;
  if (m.model == SwitchModel::FixedResistance) return i_d * m.rds_on_ref;
  const double vov = v_gs - m.v_th;
  const Probe f{v_gs, i_d, m};
  const double f_lo = -i_d;
  const double f_hi = f(vov);
  if (!(vov > 0.0) || f_hi < 0.0)
    throw NumericalError(
        fmt::format("drain solve at step {}: {} A exceeds saturation current",
                    step, i_d),
        step);
  if (f_hi == 0.0) return vov;
  std::uintmax_t iters = 100;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      f, 0.0, vov, f_lo, f_hi, boost::math::tools::eps_tolerance<double>(48),
      iters);
  if (iters >= 100)
    throw NumericalError(
        fmt::format("drain solve at step {} did not converge", step), step);
  return 0.5 * (lo + hi);
}

/// Operating point of the switch for a given state and gate voltage.
struct Regime {
  double v_ds;
  double di_dt;
};

struct Circuit {
  const LoadParams& load;
  const MosfetParams& m;
  double v_gs = 0.0;
  double dvgs_dt = 0.0;
  std::size_t step = 0;

  double sat_current() const {
    if (m.model == SwitchModel::FixedResistance)
      return std::numeric_limits<double>::infinity();
    const double vov = std::max(0.0, v_gs - m.v_th);
    return m.k_gain * vov * vov;
  }

  Regime solve(double i, double w) const {
    const double e = load.back_emf_coeff * w;
    const double drive = load.supply - load.resistance * i - e;
    const double i_sat = sat_current();
    if (i < i_sat) {
      const double v_ds = solve_drain(v_gs, i, m, step);
      return {v_ds, (drive - v_ds) / load.inductance};
    }
    // Current-limited: the device holds i on the saturation curve as long
    // as KVL leaves it at least v_ov across it.
    const double vov = std::max(0.0, v_gs - m.v_th);
    const double di_sat = 2.0 * m.k_gain * vov * dvgs_dt;
    const double v_req = drive - load.inductance * di_sat;
    if (v_req < vov) return {vov, (drive - vov) / load.inductance};
    return {v_req, di_sat};
  }

  std::array<double, 2> rhs(double i, double w) const {
    const double di = solve(i, w).di_dt;
    double dw = 0.0;
    if (load.inertia > 0.0)
      dw = (load.back_emf_coeff * i - load.friction * w) / load.inertia;
    return {di, dw};
  }
};

TransientSample sample_at(double t, double v_gs_report, const Circuit& c,
                          double i, double w) {
  TransientSample s;
  s.t = t;
  s.v_gs = v_gs_report;
  s.i_d = i;
  s.i_load = i;
  s.v_emf = c.load.back_emf_coeff * w;
  s.v_ds = c.solve(i, w).v_ds;
  s.p_fet = s.v_ds * s.i_d;
  return s;
}

void check_load(const LoadParams& load) {
  if (!(load.resistance > 0.0) || !(load.inductance > 0.0))
    throw PreconditionError("load resistance and inductance must be > 0");
}

}  // namespace

double triode_drain_voltage(double v_gs, double i_d, const MosfetParams& m) {
  return solve_drain(v_gs, i_d, m, 0);
}

std::vector<TransientSample> transient_simulate(const LoadParams& load,
                                                const MosfetParams& m,
                                                const GateDrive& drive,
                                                double t_end, double dt) {
  check_load(load);
  if (!(dt > 0.0) || dt > load.electrical_tau() / 20.0 * (1.0 + 1e-12))
    throw PreconditionError(fmt::format(
        "dt {} s must be in (0, L/R/20 = {} s]", dt,
        load.electrical_tau() / 20.0));
  if (!(t_end > 0.0))
    throw PreconditionError("t_end must be > 0");
  if (drive.soft_start && t_end < 5.0 * drive.tau() * (1.0 - 1e-12))
    throw PreconditionError(fmt::format(
        "t_end {} s must cover 5 gate time constants ({} s)", t_end,
        5.0 * drive.tau()));

  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  std::vector<TransientSample> out;
  out.reserve(steps + 1);

  // Hard drive steps to v_logic at 0+; the integrator sees the right limit.
  auto gate = [&](double t) {
    return drive.soft_start ? gate_voltage(t, drive) : drive.v_logic;
  };
  auto gate_slope = [&](double t) {
    return drive.soft_start
               ? drive.v_logic / drive.tau() * std::exp(-t / drive.tau())
               : 0.0;
  };

  Circuit c{load, m};
  double i = 0.0;
  double w = 0.0;
  c.v_gs = gate_voltage(0.0, drive);
  out.push_back(sample_at(0.0, c.v_gs, c, i, w));

  for (std::size_t n = 0; n < steps; ++n) {
    const double t = static_cast<double>(n) * dt;
    c.step = n;
    auto at = [&](double tt, double ii, double ww) {
      c.v_gs = gate(tt);
      c.dvgs_dt = gate_slope(tt);
      return c.rhs(std::max(0.0, ii), ww);
    };
    const auto k1 = at(t, i, w);
    const auto k2 = at(t + dt / 2, i + dt / 2 * k1[0], w + dt / 2 * k1[1]);
    const auto k3 = at(t + dt / 2, i + dt / 2 * k2[0], w + dt / 2 * k2[1]);
    const auto k4 = at(t + dt, i + dt * k3[0], w + dt * k3[1]);
    i += dt / 6 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
    w += dt / 6 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);

    const double t_next = static_cast<double>(n + 1) * dt;
    c.v_gs = gate(t_next);
    c.dvgs_dt = gate_slope(t_next);
    c.step = n + 1;
    i = std::clamp(i, 0.0, c.sat_current());
    out.push_back(sample_at(t_next, gate_voltage(t_next, drive), c, i, w));
  }
  return out;
}

std::vector<TransientSample> turnoff_transient(const LoadParams& load,
                                               double i0, bool flyback,
                                               double t_end, double dt) {
  check_load(load);
  if (!(i0 >= 0.0)) throw PreconditionError("initial current must be >= 0");

  const double r_loop = flyback ? load.resistance
                                : load.resistance + kOpenSwitchOhms;
  const double tau = load.inductance / r_loop;
  if (t_end <= 0.0)
    t_end = flyback ? 10.0 * load.electrical_tau() : 20.0 * tau;
  if (dt <= 0.0) dt = flyback ? load.electrical_tau() / 200.0 : tau / 20.0;
  if (!(dt > 0.0) || dt > t_end)
    throw PreconditionError("turn-off step must be in (0, t_end]");

  // Rotor running at its steady speed for i0.
  double w = 0.0;
  if (load.friction > 0.0) w = load.back_emf_coeff * i0 / load.friction;
  double i = i0;

  auto sample = [&](double t) {
    TransientSample s;
    s.t = t;
    s.v_emf = load.back_emf_coeff * w;
    s.i_load = i;
    if (flyback) {
      s.v_ds = i > 0.0 ? load.supply + kDiodeDrop : load.supply - s.v_emf;
      s.i_d = 0.0;
    } else {
      s.v_ds = i * kOpenSwitchOhms;
      s.i_d = i;
    }
    s.p_fet = s.v_ds * s.i_d;
    return s;
  };

  const auto steps = static_cast<std::size_t>(std::llround(t_end / dt));
  std::vector<TransientSample> out;
  out.reserve(steps + 1);
  out.push_back(sample(0.0));
  const double decay = std::exp(-dt / tau);
  for (std::size_t n = 0; n < steps; ++n) {
    // Exact RL update with the back-EMF frozen across the step.
    const double e = load.back_emf_coeff * w;
    const double forcing = flyback ? -(e + kDiodeDrop) : load.supply - e;
    const double i_inf = forcing / r_loop;
    const double i_prev = i;
    if (flyback && i <= 0.0) {
      i = 0.0;
    } else {
      i = i_inf + (i - i_inf) * decay;
      if (flyback) i = std::max(i, 0.0);
    }
    if (load.inertia > 0.0) {
      const double a = load.friction / load.inertia;
      const double drive = load.back_emf_coeff * 0.5 * (i + i_prev) /
                           load.inertia;
      const double w_inf = a > 0.0 ? drive / a : w;
      w = w_inf + (w - w_inf) * std::exp(-a * dt);
    }
    out.push_back(sample(static_cast<double>(n + 1) * dt));
  }
  return out;
}

double peak_dissipation(std::span<const TransientSample> series) {
  if (series.empty())
    throw std::invalid_argument("peak_dissipation of an empty series");
  double peak = series.front().p_fet;
  for (const auto& s : series) peak = std::max(peak, s.p_fet);
  return peak;
}

}  // namespace exosim::driver
