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

#include <cmath>
#include <stdexcept>

#include "exosim/driver_model.hpp"
#include "exosim/error.hpp"
#include "oracles.hpp"

using namespace exosim;
using namespace exosim::driver;

namespace {

GateDrive hard() {
  GateDrive g;
  g.soft_start = false;
  return g;
}

// Trapezoid integral of f over the series.
template <typename F>
double integrate(const std::vector<TransientSample>& s, F f) {
  double sum = 0.0;
  for (std::size_t n = 1; n < s.size(); ++n)
    sum += 0.5 * (f(s[n - 1]) + f(s[n])) * (s[n].t - s[n - 1].t);
  return sum;
}

}  // namespace

TEST(Gate, ZeroAtStart) {
  EXPECT_EQ(gate_voltage(0.0, GateDrive{}), 0.0);
  EXPECT_EQ(gate_voltage(0.0, hard()), 0.0);
}

TEST(Gate, SoftStartFollowsRcCharge) {
  EXPECT_NEAR(gate_voltage(0.1, GateDrive{}), 1.138, 5e-4);
  for (double t : {1e-4, 0.01, 0.05, 0.3, 0.5})
    EXPECT_NEAR(gate_voltage(t, GateDrive{}), oracle::rc_charge(1.8, t, 0.1),
                1e-12);
}

TEST(Gate, HardDriveIsAStep) {
  EXPECT_EQ(gate_voltage(1e-6, hard()), 1.8);
}

TEST(Gate, SoftStartMonotoneAndBounded) {
  double prev = -1.0;
  for (int n = 0; n <= 10000; ++n) {
    const double v = gate_voltage(n * 1e-4, GateDrive{});
    if (n > 0) ASSERT_GT(v, prev);
    ASSERT_LE(v, 1.8);
    prev = v;
  }
}

TEST(Mosfet, DefaultGainMatchesOnResistance) {
  const MosfetParams m;
  EXPECT_NEAR(m.k_gain, MosfetParams::with_threshold(0.8).k_gain, 0.01);
  // Small-signal resistance at v_gs = 1.8 V.
  const double r = 1e-4 / mosfet_current(1.8, 1e-4, m);
  EXPECT_NEAR(r, 0.053, 0.053 * 0.05);
}

TEST(Mosfet, RegionsOfOperation) {
  const MosfetParams m;
  EXPECT_EQ(mosfet_current(0.5, 1.0, m), 0.0);
  EXPECT_NEAR(mosfet_current(1.8, 0.010, m), 0.189, 0.002);
  EXPECT_NEAR(mosfet_current(1.0, 5.0, m), 9.43 * 0.04, 1e-9);
  EXPECT_NEAR(mosfet_current(1.0, 5.0, m), 0.377, 0.001);
}

TEST(Mosfet, TriodeSolveMatchesClosedForm) {
  const MosfetParams m;
  for (double vgs : {0.9, 1.2, 1.8}) {
    const double vov = vgs - m.v_th;
    const double i_sat = m.k_gain * vov * vov;
    for (double frac : {0.0, 0.01, 0.3, 0.9, 0.999}) {
      const double i = frac * i_sat;
      EXPECT_NEAR(triode_drain_voltage(vgs, i, m),
                  i > 0 ? oracle::triode_vds(m.k_gain, vov, i) : 0.0, 1e-9);
    }
  }
}

TEST(Mosfet, TriodeSolveAboveSaturationIsNumericalError) {
  EXPECT_THROW(triode_drain_voltage(1.0, 1.0, MosfetParams{}), NumericalError);
}

TEST(Transient, SolenoidMatchesRlStepWithFixedResistance) {
  auto m = MosfetParams{};
  m.model = SwitchModel::FixedResistance;
  const auto load = LoadParams::solenoid();
  const auto s = transient_simulate(load, m, hard(), 0.05, 5e-6);
  const double r = load.resistance + m.rds_on_ref;
  for (const auto& x : s) {
    const double want = oracle::rl_step(load.supply, r, load.inductance, x.t);
    ASSERT_NEAR(x.i_d, want, 1e-6 + 0.005 * want) << x.t;
  }
}

TEST(Transient, SolenoidSquareLawSteadyState) {
  const auto load = LoadParams::solenoid();
  const auto s = transient_simulate(load, MosfetParams{}, hard(), 0.05, 5e-6);
  EXPECT_NEAR(s.back().i_d, 3.3 / (23.1 + 0.053), 0.5e-3);
  // Within 5 L/R the current is at its final value.
  const double t5 = 5 * load.electrical_tau();
  for (const auto& x : s)
    if (x.t >= t5) ASSERT_NEAR(x.i_d, s.back().i_d, 0.01 * s.back().i_d);
  // After the transient the switch dissipates I^2 Rds.
  EXPECT_NEAR(s.back().p_fet, 0.1425 * 0.1425 * 0.053, 0.05e-3);
}

TEST(Transient, SeriesIsUniformAndPowerConsistent) {
  const auto s =
      transient_simulate(LoadParams::motor(), MosfetParams{}, GateDrive{}, 0.5);
  ASSERT_EQ(s.size(), 100001u);
  for (std::size_t n = 0; n < s.size(); ++n) {
    ASSERT_NEAR(s[n].t, n * 5e-6, 1e-12);
    ASSERT_GE(s[n].p_fet, 0.0);
    ASSERT_DOUBLE_EQ(s[n].p_fet, s[n].v_ds * s[n].i_d);
  }
}

TEST(Transient, MotorSoftStartStaysBelowRating) {
  const auto s =
      transient_simulate(LoadParams::motor(), MosfetParams{}, GateDrive{}, 0.5);
  EXPECT_LT(peak_dissipation(s), 1.3);
  EXPECT_NEAR(s.back().i_d, 0.395, 0.01);
}

TEST(Transient, OpenLoadMotorCalibration) {
  const auto s = transient_simulate(LoadParams::motor(0.25), MosfetParams{},
                                    hard(), 0.1);
  EXPECT_NEAR(s.back().i_d, 0.25, 0.005);
}

TEST(Transient, EnergyBalance) {
  for (bool soft : {true, false}) {
    GateDrive g;
    g.soft_start = soft;
    const auto load = LoadParams::motor();
    const auto s = transient_simulate(load, MosfetParams{}, g, soft ? 0.5 : 0.05);
    const double supplied = integrate(s, [&](const auto& x) { return load.supply * x.i_d; });
    const double resistive = integrate(s, [&](const auto& x) { return load.resistance * x.i_d * x.i_d; });
    const double fet = integrate(s, [](const auto& x) { return x.p_fet; });
    const double mech = integrate(s, [](const auto& x) { return x.v_emf * x.i_d; });
    const double stored = 0.5 * load.inductance * s.back().i_d * s.back().i_d;
    EXPECT_NEAR(resistive + fet + mech + stored, supplied, 0.01 * supplied) << soft;
  }
}

TEST(Transient, HalvingStepBarelyMovesPeak) {
  for (auto load : {LoadParams::motor(), LoadParams::solenoid()}) {
    const double coarse = peak_dissipation(
        transient_simulate(load, MosfetParams{}, GateDrive{}, 0.5, 10e-6));
    const double fine = peak_dissipation(
        transient_simulate(load, MosfetParams{}, GateDrive{}, 0.5, 5e-6));
    EXPECT_LT(std::abs(coarse - fine) / fine, 0.005);
  }
}

TEST(Transient, Preconditions) {
  const auto motor = LoadParams::motor();
  EXPECT_THROW(transient_simulate(motor, {}, GateDrive{}, 0.5, 1e-4),
               PreconditionError);
  EXPECT_THROW(transient_simulate(motor, {}, GateDrive{}, 0.2, 5e-6),
               PreconditionError);
  EXPECT_NO_THROW(transient_simulate(motor, {}, hard(), 0.002, 5e-6));
}

TEST(Turnoff, FlybackClampsAtSupplyPlusDiode) {
  const auto s = turnoff_transient(LoadParams::motor(), 0.395, true);
  double vmax = 0.0;
  for (const auto& x : s) vmax = std::max(vmax, x.v_ds);
  EXPECT_LE(vmax, 5.7 + 1e-3);
  EXPECT_NEAR(vmax, 5.7, 1e-12);
}

TEST(Turnoff, FlybackCurrentDecaysMonotonically) {
  for (auto load : {LoadParams::motor(), LoadParams::solenoid()}) {
    const double i0 = load.kind == LoadKind::Motor ? 0.395 : 0.1425;
    const auto s = turnoff_transient(load, i0, true);
    for (std::size_t n = 1; n < s.size(); ++n)
      ASSERT_LE(s[n].i_load, s[n - 1].i_load);
    const double t10 = 10 * load.electrical_tau();
    for (const auto& x : s)
      if (x.t >= t10) ASSERT_LT(x.i_load, 1e-3);
  }
}

TEST(Turnoff, SolenoidFlybackMatchesRlDecay) {
  const auto load = LoadParams::solenoid();
  const auto s = turnoff_transient(load, 0.1425, true);
  for (const auto& x : s)
    ASSERT_NEAR(x.i_load,
                oracle::rl_decay(0.1425, load.resistance, load.inductance,
                                 kDiodeDrop, x.t),
                1e-9);
}

TEST(Turnoff, WithoutFlybackTheSwitchSeesTheSpike) {
  const auto s = turnoff_transient(LoadParams::motor(), 0.395, false);
  EXPECT_NEAR(s.front().v_ds, 0.395 * kOpenSwitchOhms, 1.0);
  EXPECT_GT(peak_dissipation(s), 1.3);
}

TEST(Turnoff, ZeroCurrentIsFlatAtSupply) {
  for (bool fb : {true, false}) {
    const auto s = turnoff_transient(LoadParams::solenoid(), 0.0, fb);
    for (const auto& x : s) {
      if (fb) {
        ASSERT_EQ(x.i_load, 0.0);
        ASSERT_EQ(x.v_ds, 3.3);
      } else {
        ASSERT_LE(x.i_load, 3.3 / kOpenSwitchOhms);
      }
    }
  }
  EXPECT_THROW(turnoff_transient(LoadParams::solenoid(), -0.1, true),
               PreconditionError);
}

TEST(Peak, EmptyAndZeroSeries) {
  EXPECT_THROW(peak_dissipation({}), std::invalid_argument);
  std::vector<TransientSample> zeros(10);
  EXPECT_EQ(peak_dissipation(zeros), 0.0);
}
