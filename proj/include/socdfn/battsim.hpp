#pragma once

// Synthetic drive-cycle cell simulator. SOC labels come from exact Coulomb
// counting, so they act as ground truth for the estimator.
//
// Sign convention: charging current is positive, discharging negative.

#include <cstdint>
#include <vector>

#include "socdfn/dataset.hpp"

namespace socdfn {

struct CellParams {
  double capacity_ah = 2.9;     // 18650PF nominal
  double ocv_full = 4.2;        // V at 100 %
  double ocv_empty = 3.0;       // V at 0 %
  double r_internal = 0.06;     // ohm
  double thermal_tau = 900.0;   // s
  double ambient = 25.0;        // degC
  double heat_coeff = 12.0;     // K/W of i^2 R dissipation

  void validate() const;

  /// Linear open-circuit voltage map for SOC in percent.
  double ocv(double soc_pct) const { return ocv_empty + (ocv_full - ocv_empty) * soc_pct / 100.0; }
};

/// Gaussian sensor noise added to the recorded channels only; the SOC label
/// stays exact.
struct MeasurementNoise {
  double voltage_std = 0.0;      // V
  double current_std = 0.0;      // A
  double temperature_std = 0.0;  // degC
  std::uint64_t seed = 0;
};

struct CycleConfig {
  double duration = 20000.0;   // s
  double dt = 1.0;             // s
  double peak_discharge = 1.8; // A (magnitude)
  double regen_fraction = 0.08;
  std::uint64_t seed = 0;

  void validate() const;
  /// Largest charging current a regen pulse may reach.
  double regen_peak() const { return 0.5 * peak_discharge; }
};

/// Per-step current profile (A): slow ramps between random demand levels,
/// short high-current acceleration pulses and occasional regenerative
/// (charging) pulses. Length is floor(duration / dt).
std::vector<double> generate_drive_cycle(const CycleConfig& cfg);

struct SimulationResult {
  Dataset dataset;
  double final_soc_unclamped = 0.0;  // soc0 + Coulomb count, before the [0,100] clamp
  bool truncated = false;            // stopped early because SOC reached 0
};

/// Integrates the profile step by step. Record k holds the state at
/// t = (k+1)*dt after applying profile[k] for dt seconds:
///   soc  = clamp(soc0 + 100 * sum(i*dt) / (3600*capacity), 0, 100)
///   v    = ocv(soc) + i * r_internal
///   temp = first-order lag toward ambient + heat_coeff * i^2 * r_internal
/// Simulation stops after the first record whose SOC hits 0.
SimulationResult simulate_cell(const std::vector<double>& profile, const CellParams& p, double soc0, double dt,
                               const MeasurementNoise& noise = {});

}  // namespace socdfn
