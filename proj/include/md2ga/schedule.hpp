#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace md2ga {

// How the K decoder ranges tile the padded timeline t = 1..T_p+T_f.
//  Incremental:      nested prefixes with staggered endpoints (the default)
//  FullAll:          every decoder covers the whole timeline
//  DisjointSegments: future frames split into K non-overlapping chunks
enum class ScheduleMode { Incremental, FullAll, DisjointSegments };

inline const char* mode_name(ScheduleMode m) {
  switch (m) {
    case ScheduleMode::Incremental: return "incremental";
    case ScheduleMode::FullAll: return "full_all";
    case ScheduleMode::DisjointSegments: return "disjoint";
  }
  return "?";
}

inline ScheduleMode parse_mode(const std::string& s) {
  if (s == "incremental") return ScheduleMode::Incremental;
  if (s == "full_all" || s == "full-all") return ScheduleMode::FullAll;
  if (s == "disjoint") return ScheduleMode::DisjointSegments;
  throw std::invalid_argument("unknown schedule mode '" + s +
                              "' (expected incremental|full-all|disjoint)");
}

// Frames are 1-based throughout; decoder k covers the inclusive frame range
// [cover_begin(k), cover_end(k)] and lengths[k-1] counts those frames.
struct HorizonSchedule {
  int t_p = 0;
  int t_f = 0;
  int num_decoders = 0;
  ScheduleMode mode = ScheduleMode::Incremental;
  std::vector<int> lengths;
  std::vector<int> segment_starts;  // DisjointSegments only

  int total_len() const { return t_p + t_f; }

  int cover_begin(int k) const {
    if (mode != ScheduleMode::DisjointSegments || k == 1) return 1;
    return segment_starts[static_cast<size_t>(k - 1)];
  }

  int cover_end(int k) const {
    return cover_begin(k) + lengths[static_cast<size_t>(k - 1)] - 1;
  }
};

inline HorizonSchedule compute_horizons(int t_p, int t_f, int k,
                                        ScheduleMode mode) {
  if (t_p < 1) throw std::invalid_argument("compute_horizons: T_p must be >= 1");
  if (t_f < 2) throw std::invalid_argument("compute_horizons: T_f must be >= 2");
  if (k < 2) throw std::invalid_argument("compute_horizons: K must be >= 2");
  if (k > t_f && mode != ScheduleMode::FullAll) {
    throw std::invalid_argument(
        "compute_horizons: K=" + std::to_string(k) + " exceeds T_f=" +
        std::to_string(t_f) + ", which would duplicate horizons");
  }

  HorizonSchedule s;
  s.t_p = t_p;
  s.t_f = t_f;
  s.num_decoders = k;
  s.mode = mode;

  switch (mode) {
    case ScheduleMode::Incremental:
      // L_k = floor((k-1)(T_f-1)/(K-1)) + 1 + T_p
      for (int i = 1; i <= k; ++i)
        s.lengths.push_back((i - 1) * (t_f - 1) / (k - 1) + 1 + t_p);
      break;
    case ScheduleMode::FullAll:
      s.lengths.assign(static_cast<size_t>(k), t_p + t_f);
      break;
    case ScheduleMode::DisjointSegments: {
      // future frames split K ways; the remainder goes to the last decoder,
      // and decoder 1 additionally covers the whole history
      const int base = t_f / k;
      int start = t_p + 1;
      for (int i = 1; i <= k; ++i) {
        const int seg = (i == k) ? t_f - base * (k - 1) : base;
        s.segment_starts.push_back(start);
        s.lengths.push_back(i == 1 ? t_p + seg : seg);
        start += seg;
      }
      break;
    }
  }
  return s;
}

struct MaskMatrix {
  int num_decoders = 0;
  int total_len = 0;
  std::vector<std::uint8_t> entries;  // row-major K x (T_p+T_f)

  // 1-based decoder and frame indices, matching the schedule contract
  bool at(int k, int t) const {
    return entries[static_cast<size_t>(k - 1) * total_len + (t - 1)] != 0;
  }
};

inline MaskMatrix build_mask(const HorizonSchedule& s) {
  MaskMatrix m;
  m.num_decoders = s.num_decoders;
  m.total_len = s.total_len();
  m.entries.assign(static_cast<size_t>(m.num_decoders) * m.total_len, 0);
  for (int k = 1; k <= s.num_decoders; ++k) {
    const int lo = s.cover_begin(k), hi = s.cover_end(k);
    for (int t = lo; t <= hi; ++t)
      m.entries[static_cast<size_t>(k - 1) * m.total_len + (t - 1)] = 1;
  }
  return m;
}

}  // namespace md2ga
