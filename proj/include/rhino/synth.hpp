#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "rhino/data.hpp"
#include "rhino/rng.hpp"

namespace rhino {

/// Synthetic highway scenes: a 7-vehicle neighborhood over three lanes
/// with constant-velocity, lane-change (half-cosine lateral profile) and
/// car-following behaviors. Scenarios come in pairs with identical
/// histories and divergent futures: the maneuver starts exactly at the
/// first future frame.
struct SynthConfig {
  int64_t scenarios = 10;
  uint64_t seed = 1;
  int64_t frames = 80;
  int64_t history_len = 30;
  double dt = 0.1;
  double lane_width = 3.5;
  double speed_min = 24.0;
  double speed_max = 32.0;
  double lane_change_duration_s = 4.0;
};

namespace detail {

struct VehicleSpec {
  int64_t id;
  int64_t lane;       // 1 = right, 2 = center, 3 = left
  double x0;
  double speed;
  double accel;       // mild constant acceleration for car-following flavor
  int lane_change;    // -1 right, 0 none, +1 left
};

}  // namespace detail

inline std::vector<TrajectoryRecord> synth_scenario(const SynthConfig& cfg, int64_t index) {
  // paired base parameters: scenarios 2k and 2k+1 share them
  SeededRng rng(cfg.seed * 7919 + static_cast<uint64_t>(index / 2));
  const bool maneuver = (index % 2) == 1;
  const int change_dir = (index / 2) % 2 == 0 ? +1 : -1;

  const double base_speed = rng.uniform(cfg.speed_min, cfg.speed_max);
  std::vector<detail::VehicleSpec> specs = {
      {1, 2, 100.0, base_speed, 0.0, maneuver ? change_dir : 0},             // TAR
      {2, 2, 100.0 + rng.uniform(22.0, 30.0), base_speed + rng.uniform(-1.0, 1.0), rng.uniform(-0.2, 0.0), 0},  // P
      {3, 2, 100.0 - rng.uniform(22.0, 30.0), base_speed + rng.uniform(-1.0, 1.0), rng.uniform(0.0, 0.2), 0},   // F
      {4, 3, 100.0 + rng.uniform(10.0, 20.0), base_speed + rng.uniform(-2.0, 2.0), 0.0, 0},  // LP
      {5, 3, 100.0 - rng.uniform(12.0, 24.0), base_speed + rng.uniform(-2.0, 2.0), 0.0, 0},  // LF
      {6, 1, 100.0 + rng.uniform(10.0, 20.0), base_speed + rng.uniform(-2.0, 2.0), 0.0, 0},  // RP
      {7, 1, 100.0 - rng.uniform(12.0, 24.0), base_speed + rng.uniform(-2.0, 2.0), 0.0, 0},  // RF
  };

  const int64_t t_change = cfg.history_len;  // first future frame
  const double dur = cfg.lane_change_duration_s / cfg.dt;

  std::vector<TrajectoryRecord> records;
  for (int64_t f = 0; f < cfg.frames; ++f) {
    const double t = static_cast<double>(f) * cfg.dt;
    for (const auto& v : specs) {
      TrajectoryRecord r;
      r.frame = f;
      r.vehicle_id = v.id;
      r.x = v.x0 + v.speed * t + 0.5 * v.accel * t * t;
      r.vx = v.speed + v.accel * t;
      double y = static_cast<double>(v.lane) * cfg.lane_width;
      double vy = 0.0;
      int64_t lane = v.lane;
      if (v.lane_change != 0 && f >= t_change) {
        const double u = std::min(static_cast<double>(f - t_change) / dur, 1.0);
        const double shift = cfg.lane_width * 0.5 * (1.0 - std::cos(M_PI * u));
        y += v.lane_change * shift;
        if (u < 1.0)
          vy = v.lane_change * cfg.lane_width * 0.5 * M_PI * std::sin(M_PI * u) / (dur * cfg.dt);
        if (u >= 0.5) lane = v.lane + v.lane_change;
      }
      r.y = y;
      r.vy = vy;
      r.lane_id = lane;
      records.push_back(r);
    }
  }
  return records;
}

inline std::vector<std::vector<TrajectoryRecord>> synth_dataset(const SynthConfig& cfg) {
  std::vector<std::vector<TrajectoryRecord>> out;
  out.reserve(static_cast<size_t>(cfg.scenarios));
  for (int64_t i = 0; i < cfg.scenarios; ++i) out.push_back(synth_scenario(cfg, i));
  return out;
}

}  // namespace rhino
