#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "socdfn/battsim.hpp"

namespace socdfn {
namespace {

CellParams cell() { return CellParams{}; }

// Mean current of generate_drive_cycle(CycleConfig{}), pinned from the reference run.
constexpr double kDefaultCycleMeanCurrent = -0.50207750992331912;

TEST(DriveCycle, SeedDeterministicAndSized) {
  CycleConfig cfg;
  cfg.duration = 5000;
  cfg.dt = 2;
  cfg.seed = 7;
  const auto a = generate_drive_cycle(cfg);
  EXPECT_EQ(a.size(), 2500u);
  EXPECT_EQ(a, generate_drive_cycle(cfg));
  cfg.seed = 8;
  EXPECT_NE(a, generate_drive_cycle(cfg));
}

TEST(DriveCycle, RespectsCurrentBounds) {
  CycleConfig cfg;
  cfg.seed = 3;
  const auto p = generate_drive_cycle(cfg);
  for (double i : p) {
    EXPECT_GE(i, -cfg.peak_discharge);
    EXPECT_LE(i, cfg.regen_peak());
  }
  EXPECT_TRUE(std::any_of(p.begin(), p.end(), [](double i) { return i > 0; }));
}

TEST(DriveCycle, NoRegenMeansDischargeOnly) {
  CycleConfig cfg;
  cfg.regen_fraction = 0.0;
  cfg.seed = 11;
  for (double i : generate_drive_cycle(cfg)) EXPECT_LE(i, 0.0);
}

TEST(DriveCycle, RegenFractionApproximatelyHonoured) {
  CycleConfig cfg;
  cfg.duration = 200000;
  cfg.seed = 5;
  const auto p = generate_drive_cycle(cfg);
  const auto charging = std::count_if(p.begin(), p.end(), [](double i) { return i > 0; });
  EXPECT_NEAR(static_cast<double>(charging) / static_cast<double>(p.size()), cfg.regen_fraction, 0.02);
}

TEST(DriveCycle, DefaultMeanCurrentIsDischarging) {
  CycleConfig cfg;  // defaults, seed 0
  const auto p = generate_drive_cycle(cfg);
  const double mean = std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
  EXPECT_LT(mean, 0.0);
  // Regression value of the reference generator.
  EXPECT_NEAR(mean, kDefaultCycleMeanCurrent, 1e-12);
}

TEST(DriveCycle, RejectsInvalidConfig) {
  CycleConfig cfg;
  cfg.dt = 0;
  EXPECT_THROW(generate_drive_cycle(cfg), ConfigError);
  cfg.dt = 10;
  cfg.duration = 5;
  EXPECT_THROW(generate_drive_cycle(cfg), ConfigError);
}

TEST(SimulateCell, OneCDischargeEmptiesCellInOneHour) {
  const std::vector<double> profile(3600, -2.9);
  const auto sim = simulate_cell(profile, cell(), 100.0, 1.0);
  ASSERT_EQ(sim.dataset.size(), 3600u);
  EXPECT_NEAR(sim.final_soc_unclamped, 0.0, 1e-9);
  EXPECT_NEAR(sim.dataset.records.back().soc, 0.0, 1e-9);
  EXPECT_FALSE(sim.truncated);
}

TEST(SimulateCell, HalfHourAtOneCIsHalfCharge) {
  const std::vector<double> profile(1800, -2.9);
  const auto sim = simulate_cell(profile, cell(), 100.0, 1.0);
  EXPECT_NEAR(sim.dataset.records.back().soc, 50.0, 1e-9);
}

TEST(SimulateCell, ZeroCurrentIsEquilibrium) {
  const std::vector<double> profile(5000, 0.0);
  auto p = cell();
  const auto sim = simulate_cell(profile, p, 63.0, 1.0);
  for (const auto& r : sim.dataset.records) {
    EXPECT_EQ(r.soc, 63.0);
    EXPECT_DOUBLE_EQ(r.voltage, p.ocv(63.0));
    EXPECT_DOUBLE_EQ(r.temperature, p.ambient);
  }
}

TEST(SimulateCell, TemperatureRelaxesToAmbient) {
  std::vector<double> profile(3000, -2.5);
  profile.resize(20000, 0.0);
  auto p = cell();
  const auto sim = simulate_cell(profile, p, 100.0, 1.0);
  EXPECT_GT(sim.dataset.records[2999].temperature, p.ambient + 0.5);
  EXPECT_NEAR(sim.dataset.records.back().temperature, p.ambient, 1e-6);
}

TEST(SimulateCell, ChargeConservation) {
  CycleConfig cfg;
  cfg.duration = 8000;
  cfg.seed = 21;
  const auto profile = generate_drive_cycle(cfg);
  const auto p = cell();
  const auto sim = simulate_cell(profile, p, 90.0, cfg.dt);
  ASSERT_FALSE(sim.truncated);
  double coulombs = 0;
  for (double i : profile) coulombs += i * cfg.dt;
  EXPECT_NEAR(sim.final_soc_unclamped, 90.0 + 100.0 / (3600.0 * p.capacity_ah) * coulombs, 1e-9);
}

TEST(SimulateCell, StrictlyDecreasingUnderDischarge) {
  std::vector<double> profile(2000);
  for (std::size_t k = 0; k < profile.size(); ++k) profile[k] = -0.5 - 0.001 * static_cast<double>(k % 7);
  const auto sim = simulate_cell(profile, cell(), 80.0, 1.0);
  for (std::size_t k = 1; k < sim.dataset.size(); ++k)
    EXPECT_LT(sim.dataset.records[k].soc, sim.dataset.records[k - 1].soc);
}

TEST(SimulateCell, ZeroCurrentVoltageStaysInOcvBand) {
  const auto p = cell();
  for (double soc : {0.5, 10.0, 50.0, 99.0, 100.0}) {
    const auto sim = simulate_cell(std::vector<double>(3, 0.0), p, soc, 1.0);
    for (const auto& r : sim.dataset.records) {
      EXPECT_GE(r.voltage, p.ocv_empty);
      EXPECT_LE(r.voltage, p.ocv_full);
    }
  }
}

TEST(SimulateCell, ClampsAndTruncatesAtEmpty) {
  const std::vector<double> profile(5000, -2.9);
  const auto sim = simulate_cell(profile, cell(), 10.0, 1.0);
  EXPECT_TRUE(sim.truncated);
  EXPECT_EQ(sim.dataset.records.back().soc, 0.0);
  EXPECT_LT(sim.dataset.size(), 400u);
  for (const auto& r : sim.dataset.records) EXPECT_GE(r.soc, 0.0);
}

TEST(SimulateCell, ChargingClampsAtFull) {
  const auto sim = simulate_cell(std::vector<double>(100, 1.0), cell(), 100.0, 1.0);
  for (const auto& r : sim.dataset.records) EXPECT_EQ(r.soc, 100.0);
}

TEST(SimulateCell, NoiseTouchesMeasurementsNotLabels) {
  CycleConfig cfg;
  cfg.duration = 3000;
  cfg.seed = 2;
  const auto profile = generate_drive_cycle(cfg);
  const auto clean = simulate_cell(profile, cell(), 100.0, 1.0);
  const auto noisy = simulate_cell(profile, cell(), 100.0, 1.0, {0.01, 0.05, 0.2, 9});
  ASSERT_EQ(clean.dataset.size(), noisy.dataset.size());
  bool differs = false;
  for (std::size_t k = 0; k < clean.dataset.size(); ++k) {
    EXPECT_EQ(clean.dataset.records[k].soc, noisy.dataset.records[k].soc);
    differs |= clean.dataset.records[k].voltage != noisy.dataset.records[k].voltage;
  }
  EXPECT_TRUE(differs);
}

TEST(SimulateCell, RejectsInvalidInputs) {
  EXPECT_THROW(simulate_cell({-1.0}, cell(), 0.0, 1.0), ConfigError);
  EXPECT_THROW(simulate_cell({-1.0}, cell(), 101.0, 1.0), ConfigError);
  auto p = cell();
  p.capacity_ah = 0;
  EXPECT_THROW(simulate_cell({-1.0}, p, 50.0, 1.0), ConfigError);
  p = cell();
  p.ocv_full = p.ocv_empty;
  EXPECT_THROW(simulate_cell({-1.0}, p, 50.0, 1.0), ConfigError);
}

}  // namespace
}  // namespace socdfn
