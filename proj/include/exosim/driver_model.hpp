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

// Low-side N-MOSFET driving an inductive load (pump motor or valve
// solenoid), with an optional RC soft start on the gate and a flyback diode
// across the load.
//
//   V_supply --[ R  L  E(w) ]-- drain
//                                 |
//   gate --[R_g]--+-- G  MOSFET   |
//                 C_g            source -- GND

#ifndef EXOSIM_DRIVER_MODEL_HPP
#define EXOSIM_DRIVER_MODEL_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "exosim/error.hpp"

namespace exosim::driver {

enum class LoadKind { Motor, Solenoid };

std::string_view to_string(LoadKind k);

struct LoadParams {
  LoadKind kind = LoadKind::Motor;
  double resistance = 3.99;    ///< ohm
  double inductance = 2e-3;    ///< henry
  double supply = 5.0;         ///< volt
  double back_emf_coeff = 0.0; ///< V*s/rad, zero for the solenoid
  double friction = 0.0;       ///< N*m*s/rad
  double inertia = 0.0;        ///< kg*m^2

  double electrical_tau() const { return inductance / resistance; }

  static LoadParams solenoid();
  /// Pump motor whose steady current at `supply` equals `steady_current_a`
  /// (0.395 closing, 0.25 opening) and whose rotor spins up with
  /// `mech_tau_s`.
  static LoadParams motor(double steady_current_a = 0.395,
                          double mech_tau_s = 0.010);
};

inline constexpr double kMotorKe = 0.004;  ///< V*s/rad

enum class SwitchModel { SquareLaw, FixedResistance };

struct MosfetParams {
  double v_th = 0.8;
  double k_gain = 9.43;     ///< A/V^2
  double rds_on_ref = 0.053; ///< ohm at v_gs = v_ref
  double v_ref = 1.8;
  double p_max = 1.3;        ///< W
  SwitchModel model = SwitchModel::SquareLaw;

  /// Square-law device with the given threshold, its gain refitted so the
  /// triode small-signal resistance at v_ref stays rds_on_ref.
  static MosfetParams with_threshold(double v_th);
};

struct GateDrive {
  double v_logic = 1.8;
  bool soft_start = true;
  double r_gate = 100e3;
  double c_gate = 1e-6;

  double tau() const { return r_gate * c_gate; }
};

struct TransientSample {
  double t = 0.0;
  double v_gs = 0.0;
  double v_ds = 0.0;
  double i_d = 0.0;
  double p_fet = 0.0;
  double i_load = 0.0;  ///< equals i_d while on; flyback current after turn-off
  double v_emf = 0.0;
};

/// Root-find failure, reported with the integration step it happened at.
class NumericalError : public Error {
 public:
  NumericalError(const std::string& what, std::size_t step)
      : Error(what), step_(step) {}
  std::size_t step() const { return step_; }

 private:
  std::size_t step_;
};

double gate_voltage(double t, const GateDrive& drive);

/// Drain current for a low-side switch (v_ds >= 0).
double mosfet_current(double v_gs, double v_ds, const MosfetParams& m);

/// Drain voltage at which the device conducts `i_d` in triode. Requires
/// i_d below the saturation current for v_gs.
double triode_drain_voltage(double v_gs, double i_d, const MosfetParams& m);

/// Turn-on transient from rest: fixed-step RK4 over inductor current and
/// rotor speed, with the drain voltage solved from KVL each step.
/// Requires dt <= (L/R)/20 and, with soft start, t_end >= 5 RC.
std::vector<TransientSample> transient_simulate(const LoadParams& load,
                                                const MosfetParams& m,
                                                const GateDrive& drive,
                                                double t_end,
                                                double dt = 5e-6);

inline constexpr double kDiodeDrop = 0.7;
inline constexpr double kOpenSwitchOhms = 1e6;

/// Switch opened with `i0` flowing. With flyback the drain clamps at
/// supply + diode drop while the load current decays through the diode;
/// without, the current is forced through a 1 Mohm open-switch proxy.
std::vector<TransientSample> turnoff_transient(const LoadParams& load,
                                               double i0, bool flyback,
                                               double t_end = 0.0,
                                               double dt = 0.0);

/// Largest p_fet. Throws std::invalid_argument on an empty series.
double peak_dissipation(std::span<const TransientSample> series);

}  // namespace exosim::driver

#endif  // EXOSIM_DRIVER_MODEL_HPP
