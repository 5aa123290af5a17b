#include "socdfn/battsim.hpp"

#include <algorithm>
#include <cmath>

#include "socdfn/rng.hpp"

namespace socdfn {

void CellParams::validate() const {
  if (!(capacity_ah > 0.0)) throw ConfigError("cell capacity must be positive");
  if (!(ocv_full > ocv_empty)) throw ConfigError("ocv_full must exceed ocv_empty");
  if (!(r_internal >= 0.0)) throw ConfigError("internal resistance must be non-negative");
  if (!(thermal_tau > 0.0)) throw ConfigError("thermal time constant must be positive");
}

void CycleConfig::validate() const {
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(duration >= dt)) throw ConfigError("duration must be at least one step");
  if (!(peak_discharge >= 0.0)) throw ConfigError("peak discharge must be non-negative");
  if (!(regen_fraction >= 0.0 && regen_fraction <= 1.0)) throw ConfigError("regen fraction must lie in [0,1]");
}

std::vector<double> generate_drive_cycle(const CycleConfig& cfg) {
  cfg.validate();
  const auto steps = static_cast<std::size_t>(std::floor(cfg.duration / cfg.dt));
  std::vector<double> profile(steps, 0.0);
  Rng rng(cfg.seed);

  const double peak = cfg.peak_discharge;
  // Pulse lengths are in seconds; converted to steps so dt does not change the shape.
  auto span_steps = [&](double lo_s, double hi_s) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(rng.uniform(lo_s, hi_s) / cfg.dt)));
  };
  constexpr double kMeanRegenSeconds = 10.0;
  // Start probability per step so that on average regen_fraction of steps are charging.
  const double regen_start =
      cfg.regen_fraction >= 1.0 ? 1.0 : cfg.regen_fraction / (kMeanRegenSeconds / cfg.dt * (1.0 - cfg.regen_fraction));
  const double pulse_start = 0.01 * cfg.dt;

  double level = 0.0;
  double target = 0.0;
  std::size_t ramp_left = 0;
  std::size_t pulse_left = 0;
  double pulse_amp = 0.0;
  std::size_t regen_left = 0;
  double regen_amp = 0.0;

  for (std::size_t k = 0; k < steps; ++k) {
    if (ramp_left == 0) {
      // New cruise segment: ramp toward a fresh demand level.
      target = -rng.uniform(0.05, 0.45) * peak;
      ramp_left = span_steps(60.0, 400.0);
    }
    level += (target - level) / static_cast<double>(ramp_left);
    --ramp_left;

    if (regen_left == 0 && pulse_left == 0) {
      if (rng.bernoulli(regen_start)) {
        regen_left = span_steps(4.0, 16.0);
        regen_amp = rng.uniform(0.2, 1.0) * cfg.regen_peak();
      } else if (rng.bernoulli(pulse_start)) {
        pulse_left = span_steps(5.0, 25.0);
        pulse_amp = -rng.uniform(0.5, 1.0) * peak;
      }
    }

    double i = level;
    if (regen_left > 0) {
      i = regen_amp;
      --regen_left;
    } else if (pulse_left > 0) {
      i = pulse_amp;
      --pulse_left;
    }
    profile[k] = std::clamp(i, -peak, cfg.regen_fraction > 0.0 ? cfg.regen_peak() : 0.0);
  }
  return profile;
}

SimulationResult simulate_cell(const std::vector<double>& profile, const CellParams& p, double soc0, double dt,
                               const MeasurementNoise& noise) {
  p.validate();
  if (!(soc0 > 0.0 && soc0 <= 100.0)) throw ConfigError("initial SOC must lie in (0,100]");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");

  SimulationResult result;
  result.dataset.name = "battsim";
  result.dataset.records.reserve(profile.size());
  result.final_soc_unclamped = soc0;

  Rng rng(noise.seed);
  const bool noisy = noise.voltage_std > 0.0 || noise.current_std > 0.0 || noise.temperature_std > 0.0;
  const double soc_per_coulomb = 100.0 / (3600.0 * p.capacity_ah);
  const double lag = 1.0 - std::exp(-dt / p.thermal_tau);

  double charge = 0.0;  // accumulated A*s
  double temperature = p.ambient;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    const double i = profile[k];
    charge += i * dt;
    const double soc_raw = soc0 + soc_per_coulomb * charge;
    result.final_soc_unclamped = soc_raw;
    const double soc = std::clamp(soc_raw, 0.0, 100.0);

    const double heat_target = p.ambient + p.heat_coeff * i * i * p.r_internal;
    temperature += lag * (heat_target - temperature);

    SampleRecord r{static_cast<double>(k + 1) * dt, p.ocv(soc) + i * p.r_internal, i, temperature, soc};
    if (noisy) {
      r.voltage += noise.voltage_std * rng.normal();
      r.current += noise.current_std * rng.normal();
      r.temperature += noise.temperature_std * rng.normal();
    }
    result.dataset.records.push_back(r);
    if (soc_raw <= 0.0) {
      result.truncated = k + 1 < profile.size();
      break;
    }
  }
  return result;
}

}  // namespace socdfn
