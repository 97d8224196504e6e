#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rhino/array.hpp"
#include "rhino/data.hpp"

namespace rhino {

/// Neighborhood slots in assignment order; index 0 is the target.
inline const std::vector<std::string>& slot_names() {
  static const std::vector<std::string> names = {"TAR", "P", "F", "LP", "LF", "RP", "RF"};
  return names;
}

/// Lateral intention classes.
enum : int64_t { kIntentLeft = 0, kIntentKeep = 1, kIntentRight = 2 };

/// One windowed training/evaluation sample. Agents are compacted: row 0
/// is the target and rows 1.. are the neighbors that were present for
/// the full window, so the mask is all-true by construction. Coordinates
/// are relative to the target's position at the last history frame.
struct ScenarioBatch {
  DenseArray history;           // [T x N x 4] (x, y, vx, vy)
  DenseArray future_truth;      // [F x N x 2]
  std::vector<bool> neighbor_mask;
  int64_t target_index = 0;
  DenseArray intention_labels;  // [N x 3] one-hot {left, keep, right}
  std::vector<std::string> slot_labels;
  std::vector<int64_t> vehicle_ids;
  double anchor_x = 0.0;  // target position at the anchor frame, absolute
  double anchor_y = 0.0;
  int64_t anchor_frame = 0;

  int64_t n_agents() const { return history.dim(1); }
  int64_t history_len() const { return history.dim(0); }
  int64_t future_len() const { return future_truth.dim(0); }
};

struct WindowConfig {
  int64_t history_len = 30;
  int64_t future_len = 50;
  int64_t neighborhood = 6;  // named slots beyond the target
  int64_t stride = 10;
  double lat_threshold = 1.5;  // meters of lateral displacement per intention class
  bool left_is_positive_y = true;
};

struct WindowResult {
  std::vector<ScenarioBatch> scenarios;
  int64_t skipped = 0;  // targets without a full window
};

namespace detail {

struct Track {
  int64_t vehicle_id;
  int64_t first_frame;
  std::vector<TrajectoryRecord> rows;  // consecutive frames

  bool covers(int64_t f0, int64_t f1) const {
    return first_frame <= f0 && f1 <= first_frame + static_cast<int64_t>(rows.size()) - 1;
  }
  const TrajectoryRecord& at_frame(int64_t f) const { return rows[static_cast<size_t>(f - first_frame)]; }
};

inline std::vector<Track> build_tracks(const std::vector<TrajectoryRecord>& records) {
  std::map<int64_t, std::vector<TrajectoryRecord>> by_vehicle;
  for (const TrajectoryRecord& r : records) by_vehicle[r.vehicle_id].push_back(r);
  std::vector<Track> tracks;
  for (auto& [vid, rows] : by_vehicle) {
    std::sort(rows.begin(), rows.end(),
              [](const TrajectoryRecord& a, const TrajectoryRecord& b) { return a.frame < b.frame; });
    // split at frame gaps so each track has consecutive frames
    Track cur{vid, rows.front().frame, {}};
    for (const TrajectoryRecord& r : rows) {
      if (!cur.rows.empty() && r.frame != cur.rows.back().frame + 1) {
        tracks.push_back(cur);
        cur = Track{vid, r.frame, {}};
      }
      cur.rows.push_back(r);
    }
    tracks.push_back(cur);
  }
  return tracks;
}

}  // namespace detail

inline DenseArray one_hot_intention(int64_t cls) {
  DenseArray v({3});
  v[cls] = 1.0;
  return v;
}

inline int64_t label_from_displacement(double dy, double threshold, bool left_is_positive_y) {
  double left_disp = left_is_positive_y ? dy : -dy;
  if (left_disp >= threshold) return kIntentLeft;
  if (left_disp <= -threshold) return kIntentRight;
  return kIntentKeep;
}

/// Slides windows of history_len + future_len frames over every vehicle
/// as the target, assigning up to `neighborhood` neighbors by relative
/// lane and longitudinal position at the anchor (last history) frame.
inline WindowResult window_scenarios(const std::vector<TrajectoryRecord>& records, const WindowConfig& cfg) {
  WindowResult result;
  const int64_t window = cfg.history_len + cfg.future_len;
  auto tracks = detail::build_tracks(records);

  for (const auto& target : tracks) {
    const int64_t len = static_cast<int64_t>(target.rows.size());
    if (len < window) {
      ++result.skipped;
      continue;
    }
    for (int64_t f0 = target.first_frame; f0 + window - 1 <= target.first_frame + len - 1; f0 += cfg.stride) {
      const int64_t f_last = f0 + window - 1;
      const int64_t fa = f0 + cfg.history_len - 1;  // anchor
      const TrajectoryRecord& tar = target.at_frame(fa);

      // candidate neighbors: full coverage of the window
      struct Cand {
        const detail::Track* track;
        double x, y;
        int64_t lane;
      };
      std::vector<Cand> cands;
      for (const auto& nb : tracks) {
        if (nb.vehicle_id == target.vehicle_id || !nb.covers(f0, f_last)) continue;
        const TrajectoryRecord& r = nb.at_frame(fa);
        cands.push_back({&nb, r.x, r.y, r.lane_id});
      }

      const int64_t left_lane = tar.lane_id + (cfg.left_is_positive_y ? 1 : -1);
      const int64_t right_lane = tar.lane_id - (cfg.left_is_positive_y ? 1 : -1);
      auto pick = [&](int64_t lane, bool ahead) -> const detail::Track* {
        const detail::Track* best = nullptr;
        double best_dx = 0.0;
        for (const Cand& c : cands) {
          if (c.lane != lane) continue;
          double dx = c.x - tar.x;
          bool qualifies = ahead ? dx >= 0.0 : dx < 0.0;
          if (lane == tar.lane_id && dx == 0.0) qualifies = false;  // co-located in-lane
          if (!qualifies) continue;
          double key = std::abs(dx);
          if (best == nullptr || key < best_dx) {
            best = c.track;
            best_dx = key;
          }
        }
        return best;
      };

      struct SlotPick {
        const char* name;
        const detail::Track* track;
      };
      std::vector<SlotPick> picks = {
          {"P", pick(tar.lane_id, true)},  {"F", pick(tar.lane_id, false)},
          {"LP", pick(left_lane, true)},   {"LF", pick(left_lane, false)},
          {"RP", pick(right_lane, true)},  {"RF", pick(right_lane, false)},
      };

      std::vector<const detail::Track*> agents = {&target};
      std::vector<std::string> labels = {"TAR"};
      for (const SlotPick& p : picks) {
        if (p.track == nullptr) continue;
        if (static_cast<int64_t>(agents.size()) - 1 >= cfg.neighborhood) break;
        agents.push_back(p.track);
        labels.push_back(p.name);
      }
      const int64_t n = static_cast<int64_t>(agents.size());

      ScenarioBatch sc;
      sc.history = DenseArray({cfg.history_len, n, 4});
      sc.future_truth = DenseArray({cfg.future_len, n, 2});
      sc.intention_labels = DenseArray({n, 3});
      sc.neighbor_mask.assign(static_cast<size_t>(n), true);
      sc.slot_labels = labels;
      sc.anchor_x = tar.x;
      sc.anchor_y = tar.y;
      sc.anchor_frame = fa;
      for (int64_t a = 0; a < n; ++a) {
        const detail::Track* tr = agents[static_cast<size_t>(a)];
        sc.vehicle_ids.push_back(tr->vehicle_id);
        for (int64_t t = 0; t < cfg.history_len; ++t) {
          const TrajectoryRecord& r = tr->at_frame(f0 + t);
          sc.history(t, a, 0) = r.x - tar.x;
          sc.history(t, a, 1) = r.y - tar.y;
          sc.history(t, a, 2) = r.vx;
          sc.history(t, a, 3) = r.vy;
        }
        for (int64_t t = 0; t < cfg.future_len; ++t) {
          const TrajectoryRecord& r = tr->at_frame(fa + 1 + t);
          sc.future_truth(t, a, 0) = r.x - tar.x;
          sc.future_truth(t, a, 1) = r.y - tar.y;
        }
        double dy = tr->at_frame(f_last).y - tr->at_frame(fa).y;
        int64_t cls = label_from_displacement(dy, cfg.lat_threshold, cfg.left_is_positive_y);
        sc.intention_labels(a, cls) = 1.0;
      }
      result.scenarios.push_back(std::move(sc));
    }
  }
  return result;
}

inline nlohmann::json array_to_json(const DenseArray& a) {
  nlohmann::json j;
  j["shape"] = a.shape();
  j["data"] = a.vec_data();
  return j;
}

/// Debug dump: shapes plus flattened arrays.
inline nlohmann::json scenario_to_json(const ScenarioBatch& sc) {
  nlohmann::json j;
  j["history"] = array_to_json(sc.history);
  j["future_truth"] = array_to_json(sc.future_truth);
  j["intention_labels"] = array_to_json(sc.intention_labels);
  j["neighbor_mask"] = std::vector<int>(sc.neighbor_mask.begin(), sc.neighbor_mask.end());
  j["target_index"] = sc.target_index;
  j["slot_labels"] = sc.slot_labels;
  j["vehicle_ids"] = sc.vehicle_ids;
  j["anchor"] = {sc.anchor_x, sc.anchor_y};
  j["anchor_frame"] = sc.anchor_frame;
  return j;
}

}  // namespace rhino
