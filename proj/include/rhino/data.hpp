#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rhino/error.hpp"

namespace rhino {

constexpr double kFeetToMeters = 0.3048;

/// One sample of one vehicle at 10 Hz. x is longitudinal, y lateral,
/// both in meters; velocities in m/s.
struct TrajectoryRecord {
  int64_t frame = 0;
  int64_t vehicle_id = 0;
  double x = 0.0;
  double y = 0.0;
  double vx = 0.0;
  double vy = 0.0;
  int64_t lane_id = 0;
};

enum class DataFormat { Canonical, Ngsim, Highd };

inline DataFormat parse_format(const std::string& s) {
  if (s == "canonical") return DataFormat::Canonical;
  if (s == "ngsim") return DataFormat::Ngsim;
  if (s == "highd") return DataFormat::Highd;
  throw ConfigError("unknown data format '" + s + "' (expected canonical|ngsim|highd)");
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, int64_t row) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size())
    throw IngestError("row " + std::to_string(row) + ": bad number '" + s + "'");
  return v;
}

inline int64_t parse_int(const std::string& s, int64_t row) {
  double v = parse_double(s, row);
  return static_cast<int64_t>(v);
}

inline std::string shortest_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

inline int64_t require_column(const std::vector<std::string>& header, const std::string& name) {
  for (size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return static_cast<int64_t>(i);
  throw IngestError("row 1: missing column '" + name + "'");
}

inline void check_monotone_frames(std::vector<TrajectoryRecord>& records) {
  std::map<int64_t, int64_t> last_frame;
  int64_t row = 1;
  for (const TrajectoryRecord& r : records) {
    ++row;
    auto it = last_frame.find(r.vehicle_id);
    if (it != last_frame.end() && r.frame <= it->second)
      throw IngestError("row " + std::to_string(row) + ": non-monotone frames for vehicle " +
                        std::to_string(r.vehicle_id));
    last_frame[r.vehicle_id] = r.frame;
  }
}

}  // namespace detail

/// Fills missing velocities from positions by central differences
/// (one-sided at the ends), per vehicle, assuming dt seconds per frame.
inline void recompute_velocities(std::vector<TrajectoryRecord>& records, double dt) {
  std::map<int64_t, std::vector<size_t>> by_vehicle;
  for (size_t i = 0; i < records.size(); ++i) by_vehicle[records[i].vehicle_id].push_back(i);
  for (auto& [vid, idx] : by_vehicle) {
    const size_t n = idx.size();
    for (size_t k = 0; k < n; ++k) {
      size_t lo = k > 0 ? idx[k - 1] : idx[k];
      size_t hi = k + 1 < n ? idx[k + 1] : idx[k];
      double span = static_cast<double>(records[hi].frame - records[lo].frame) * dt;
      if (span <= 0.0) continue;
      records[idx[k]].vx = (records[hi].x - records[lo].x) / span;
      records[idx[k]].vy = (records[hi].y - records[lo].y) / span;
    }
  }
}

/// Linear-interpolation resampling from src_hz to dst_hz, per vehicle.
/// Frames are renumbered on the destination clock.
inline std::vector<TrajectoryRecord> resample_records(const std::vector<TrajectoryRecord>& records,
                                                      double src_hz, double dst_hz) {
  std::map<int64_t, std::vector<TrajectoryRecord>> by_vehicle;
  for (const TrajectoryRecord& r : records) by_vehicle[r.vehicle_id].push_back(r);
  std::vector<TrajectoryRecord> out;
  for (auto& [vid, rs] : by_vehicle) {
    if (rs.size() < 2) continue;
    const double t0 = static_cast<double>(rs.front().frame) / src_hz;
    const double t1 = static_cast<double>(rs.back().frame) / src_hz;
    for (int64_t j = static_cast<int64_t>(std::ceil(t0 * dst_hz - 1e-9));; ++j) {
      const double t = static_cast<double>(j) / dst_hz;
      if (t > t1 + 1e-9) break;
      // locate the bracketing source pair
      size_t hi = 0;
      while (hi + 1 < rs.size() && static_cast<double>(rs[hi].frame) / src_hz < t - 1e-9) ++hi;
      size_t lo = hi > 0 ? hi - 1 : 0;
      const double ta = static_cast<double>(rs[lo].frame) / src_hz;
      const double tb = static_cast<double>(rs[hi].frame) / src_hz;
      const double w = (tb > ta) ? (t - ta) / (tb - ta) : 0.0;
      TrajectoryRecord r;
      r.frame = j;
      r.vehicle_id = vid;
      r.lane_id = w < 0.5 ? rs[lo].lane_id : rs[hi].lane_id;
      r.x = rs[lo].x + w * (rs[hi].x - rs[lo].x);
      r.y = rs[lo].y + w * (rs[hi].y - rs[lo].y);
      r.vx = rs[lo].vx + w * (rs[hi].vx - rs[lo].vx);
      r.vy = rs[lo].vy + w * (rs[hi].vy - rs[lo].vy);
      out.push_back(r);
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
    if (a.frame != b.frame) return a.frame < b.frame;
    return a.vehicle_id < b.vehicle_id;
  });
  return out;
}

inline std::vector<TrajectoryRecord> ingest_stream(std::istream& in, DataFormat format) {
  std::string line;
  if (!std::getline(in, line)) throw IngestError("row 1: empty file");
  auto header = detail::split_csv(line);
  std::vector<TrajectoryRecord> records;

  if (format == DataFormat::Canonical) {
    const std::vector<std::string> expected = {"frame", "vehicle_id", "x", "y", "vx", "vy", "lane_id"};
    if (header != expected) throw IngestError("row 1: canonical header mismatch");
    int64_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      auto f = detail::split_csv(line);
      if (f.size() != 7) throw IngestError("row " + std::to_string(row) + ": expected 7 fields");
      TrajectoryRecord r;
      r.frame = detail::parse_int(f[0], row);
      r.vehicle_id = detail::parse_int(f[1], row);
      r.x = detail::parse_double(f[2], row);
      r.y = detail::parse_double(f[3], row);
      r.vx = detail::parse_double(f[4], row);
      r.vy = detail::parse_double(f[5], row);
      r.lane_id = detail::parse_int(f[6], row);
      records.push_back(r);
    }
    detail::check_monotone_frames(records);
    return records;
  }

  if (format == DataFormat::Ngsim) {
    // positions arrive in feet; Local_Y runs along the road
    int64_t c_vid = detail::require_column(header, "Vehicle_ID");
    int64_t c_frame = detail::require_column(header, "Frame_ID");
    int64_t c_lx = detail::require_column(header, "Local_X");
    int64_t c_ly = detail::require_column(header, "Local_Y");
    int64_t c_lane = detail::require_column(header, "Lane_ID");
    int64_t row = 1;
    while (std::getline(in, line)) {
      ++row;
      if (line.empty()) continue;
      auto f = detail::split_csv(line);
      TrajectoryRecord r;
      r.vehicle_id = detail::parse_int(f[static_cast<size_t>(c_vid)], row);
      r.frame = detail::parse_int(f[static_cast<size_t>(c_frame)], row);
      r.x = detail::parse_double(f[static_cast<size_t>(c_ly)], row) * kFeetToMeters;
      r.y = detail::parse_double(f[static_cast<size_t>(c_lx)], row) * kFeetToMeters;
      r.lane_id = detail::parse_int(f[static_cast<size_t>(c_lane)], row);
      records.push_back(r);
    }
    std::stable_sort(records.begin(), records.end(),
                     [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
                       if (a.vehicle_id != b.vehicle_id) return a.vehicle_id < b.vehicle_id;
                       return a.frame < b.frame;
                     });
    detail::check_monotone_frames(records);
    recompute_velocities(records, 0.1);  // NGSIM records at 10 Hz
    return records;
  }

  // HighD: 25 Hz with velocities present; resampled to the 10 Hz clock
  int64_t c_frame = detail::require_column(header, "frame");
  int64_t c_id = detail::require_column(header, "id");
  int64_t c_x = detail::require_column(header, "x");
  int64_t c_y = detail::require_column(header, "y");
  int64_t c_vx = detail::require_column(header, "xVelocity");
  int64_t c_vy = detail::require_column(header, "yVelocity");
  int64_t c_lane = detail::require_column(header, "laneId");
  int64_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    auto f = detail::split_csv(line);
    TrajectoryRecord r;
    r.frame = detail::parse_int(f[static_cast<size_t>(c_frame)], row);
    r.vehicle_id = detail::parse_int(f[static_cast<size_t>(c_id)], row);
    r.x = detail::parse_double(f[static_cast<size_t>(c_x)], row);
    r.y = detail::parse_double(f[static_cast<size_t>(c_y)], row);
    r.vx = detail::parse_double(f[static_cast<size_t>(c_vx)], row);
    r.vy = detail::parse_double(f[static_cast<size_t>(c_vy)], row);
    r.lane_id = detail::parse_int(f[static_cast<size_t>(c_lane)], row);
    records.push_back(r);
  }
  std::stable_sort(records.begin(), records.end(),
                   [](const TrajectoryRecord& a, const TrajectoryRecord& b) {
                     if (a.vehicle_id != b.vehicle_id) return a.vehicle_id < b.vehicle_id;
                     return a.frame < b.frame;
                   });
  detail::check_monotone_frames(records);
  return resample_records(records, 25.0, 10.0);
}

inline std::vector<TrajectoryRecord> ingest(const std::string& path, DataFormat format) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path);
  try {
    return ingest_stream(in, format);
  } catch (const IngestError& e) {
    throw IngestError(path + ": " + e.what());
  }
}

/// Canonical CSV writer; doubles use the shortest round-tripping form so
/// parse-emit is the identity.
inline void write_canonical(std::ostream& os, const std::vector<TrajectoryRecord>& records) {
  os << "frame,vehicle_id,x,y,vx,vy,lane_id\n";
  for (const TrajectoryRecord& r : records) {
    os << r.frame << "," << r.vehicle_id << "," << detail::shortest_double(r.x) << ","
       << detail::shortest_double(r.y) << "," << detail::shortest_double(r.vx) << ","
       << detail::shortest_double(r.vy) << "," << r.lane_id << "\n";
  }
}

inline void write_canonical_file(const std::string& path, const std::vector<TrajectoryRecord>& records) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write " + path);
  write_canonical(os, records);
}

}  // namespace rhino
