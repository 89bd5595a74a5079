#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "md2ga/io.hpp"
#include "md2ga/motion.hpp"
#include "md2ga/rng.hpp"

namespace md2ga {

struct SyntheticConfig {
  int joints = 8;
  int dims = 3;
  int t_p = 10;
  int t_f = 10;
  int count = 64;
  double freq_lo = 0.5;   // cycles per sequence
  double freq_hi = 2.5;
  double amp_lo = 0.5;
  double amp_hi = 2.0;
  double noise_std = 0.01;
  int num_classes = 4;
  std::uint64_t seed = 1;
};

// Sequences carry the full T_p+T_f frames; history()/future() slice out the
// conditioning and target parts.
struct Dataset {
  int t_p = 0;
  int t_f = 0;
  int joints = 0;
  int dims = 0;
  std::vector<MotionSequence> sequences;
  std::vector<int> labels;  // one action class per sequence

  size_t size() const { return sequences.size(); }
  int total_len() const { return t_p + t_f; }
  MotionSequence history(size_t i) const { return sequences[i].slice(0, t_p); }
  MotionSequence future(size_t i) const { return sequences[i].slice(t_p, t_f); }
};

// Each action class is a (frequency, phase/amplitude/offset pattern)
// archetype; sequences of a class differ only by a per-sequence global phase
// shift plus observation noise. Extrapolating a phase-shifted sinusoid gets
// harder the farther out the target frame is, which is exactly the regime
// the multi-range design is meant to exercise.
inline Dataset gen_synthetic(const SyntheticConfig& cfg) {
  if (cfg.count < 1) throw std::invalid_argument("gen_synthetic: count must be >= 1");
  if (cfg.freq_lo > cfg.freq_hi)
    throw std::invalid_argument("gen_synthetic: frequency range inverted");
  if (cfg.amp_lo > cfg.amp_hi)
    throw std::invalid_argument("gen_synthetic: amplitude range inverted");
  if (cfg.noise_std < 0)
    throw std::invalid_argument("gen_synthetic: noise std must be >= 0");
  if (cfg.num_classes < 1)
    throw std::invalid_argument("gen_synthetic: need at least one class");

  const int total = cfg.t_p + cfg.t_f;
  const size_t per_frame = static_cast<size_t>(cfg.joints) * cfg.dims;

  struct ClassParams {
    double freq;
    std::vector<double> phase, amp, offset;  // per (joint, dim)
  };
  std::vector<ClassParams> classes;
  for (int c = 0; c < cfg.num_classes; ++c) {
    Rng rng(derive_seed(cfg.seed, 1000000 + static_cast<std::uint64_t>(c)));
    ClassParams p;
    p.freq = rng.uniform(cfg.freq_lo, cfg.freq_hi);
    for (size_t i = 0; i < per_frame; ++i) {
      p.phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
      p.amp.push_back(rng.uniform(cfg.amp_lo, cfg.amp_hi));
      p.offset.push_back(rng.uniform(-1.0, 1.0));
    }
    classes.push_back(std::move(p));
  }

  Dataset ds;
  ds.t_p = cfg.t_p;
  ds.t_f = cfg.t_f;
  ds.joints = cfg.joints;
  ds.dims = cfg.dims;
  for (int i = 0; i < cfg.count; ++i) {
    const int label = i % cfg.num_classes;
    const auto& cp = classes[static_cast<size_t>(label)];
    Rng rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i)));
    const double shift = rng.uniform(0.0, 2.0 * std::numbers::pi);
    auto seq = MotionSequence::zeros(total, cfg.joints, cfg.dims);
    for (int t = 0; t < total; ++t)
      for (size_t f = 0; f < per_frame; ++f) {
        const double angle =
            2.0 * std::numbers::pi * cp.freq * (t + 1) / total + cp.phase[f] + shift;
        seq.coords[static_cast<size_t>(t) * per_frame + f] =
            cp.amp[f] * std::sin(angle) + cp.offset[f] +
            (cfg.noise_std > 0 ? rng.normal(0.0, cfg.noise_std) : 0.0);
      }
    ds.sequences.push_back(std::move(seq));
    ds.labels.push_back(label);
  }
  return ds;
}

namespace detail {

inline nlohmann::json dataset_manifest(const Dataset& ds, std::uint64_t csv_checksum) {
  nlohmann::json j;
  j["t_p"] = ds.t_p;
  j["t_f"] = ds.t_f;
  j["joints"] = ds.joints;
  j["dims"] = ds.dims;
  j["count"] = ds.sequences.size();
  j["labels"] = ds.labels;
  j["csv_checksum_fnv1a64"] = csv_checksum;
  return j;
}

}  // namespace detail

// Rows are `seq_id,frame,joint,coord_0..coord_{D-1}` under a header line;
// frames are 1-based, seq ids and joints 0-based. A `<path>.json` sidecar
// holds shapes, labels, and an FNV-1a checksum of the CSV bytes. Doubles are
// printed with enough digits to round-trip bit-exactly.
inline void save_csv(const Dataset& ds, const std::filesystem::path& path,
                     const nlohmann::json& generator_config = {}) {
  std::string csv = "seq_id,frame,joint";
  for (int d = 0; d < ds.dims; ++d) csv += ",coord_" + std::to_string(d);
  csv += "\n";
  for (size_t i = 0; i < ds.sequences.size(); ++i) {
    const auto& seq = ds.sequences[i];
    for (int t = 0; t < seq.frames; ++t)
      for (int j = 0; j < seq.joints; ++j) {
        csv += std::to_string(i) + "," + std::to_string(t + 1) + "," + std::to_string(j);
        for (int d = 0; d < seq.dims; ++d) csv += "," + format_double(seq.at(t, j, d));
        csv += "\n";
      }
  }
  auto manifest = detail::dataset_manifest(ds, fnv1a64(csv));
  if (!generator_config.is_null() && !generator_config.empty())
    manifest["generator"] = generator_config;
  write_file_atomic(path, csv);
  write_file_atomic(path.string() + ".json", manifest.dump(2) + "\n");
}

inline Dataset load_csv(const std::filesystem::path& path) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(path.string() + ".json"));
  } catch (const nlohmann::json::parse_error& e) {
    throw std::runtime_error("bad dataset manifest " + path.string() + ".json: " +
                             e.what());
  }

  Dataset ds;
  ds.t_p = manifest.at("t_p").get<int>();
  ds.t_f = manifest.at("t_f").get<int>();
  ds.joints = manifest.at("joints").get<int>();
  ds.dims = manifest.at("dims").get<int>();
  const size_t count = manifest.at("count").get<size_t>();
  ds.labels = manifest.at("labels").get<std::vector<int>>();
  if (ds.labels.size() != count)
    throw std::runtime_error(path.string() + ".json: label count disagrees with count");

  const std::string csv = read_file(path);
  if (const auto want = manifest.at("csv_checksum_fnv1a64").get<std::uint64_t>();
      fnv1a64(csv) != want)
    throw std::runtime_error(path.string() + ": checksum mismatch against manifest");

  const int total = ds.t_p + ds.t_f;
  ds.sequences.assign(count, MotionSequence::zeros(total, ds.joints, ds.dims));
  std::vector<bool> seen(count * static_cast<size_t>(total) * ds.joints, false);

  size_t pos = 0, line_no = 0;
  auto next_line = [&](std::string& out) {
    if (pos >= csv.size()) return false;
    const size_t nl = csv.find('\n', pos);
    out = csv.substr(pos, nl == std::string::npos ? std::string::npos : nl - pos);
    pos = nl == std::string::npos ? csv.size() : nl + 1;
    ++line_no;
    return true;
  };
  auto fail = [&](const std::string& why) -> std::runtime_error {
    return std::runtime_error(path.string() + ":" + std::to_string(line_no) + ": " + why);
  };

  std::string line;
  if (!next_line(line)) throw fail("missing header");
  std::string want_header = "seq_id,frame,joint";
  for (int d = 0; d < ds.dims; ++d) want_header += ",coord_" + std::to_string(d);
  if (line != want_header) throw fail("unexpected header '" + line + "'");

  while (next_line(line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    size_t start = 0;
    while (true) {
      const size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma == std::string::npos
                                              ? std::string::npos
                                              : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 3 + static_cast<size_t>(ds.dims))
      throw fail("expected " + std::to_string(3 + ds.dims) + " fields, got " +
                 std::to_string(fields.size()));
    size_t seq, frame, joint;
    try {
      seq = std::stoul(fields[0]);
      frame = std::stoul(fields[1]);
      joint = std::stoul(fields[2]);
    } catch (const std::exception&) {
      throw fail("non-numeric index in '" + line + "'");
    }
    if (seq >= count) throw fail("seq_id " + fields[0] + " out of range");
    if (frame < 1 || frame > static_cast<size_t>(total))
      throw fail("frame " + fields[1] + " out of range 1.." + std::to_string(total));
    if (joint >= static_cast<size_t>(ds.joints))
      throw fail("joint " + fields[2] + " out of range");
    for (int d = 0; d < ds.dims; ++d) {
      char* end = nullptr;
      const std::string& s = fields[static_cast<size_t>(3 + d)];
      const double v = std::strtod(s.c_str(), &end);
      if (end != s.c_str() + s.size() || s.empty())
        throw fail("bad coordinate '" + s + "'");
      ds.sequences[seq].at(static_cast<int>(frame) - 1, static_cast<int>(joint), d) = v;
    }
    seen[(seq * total + (frame - 1)) * static_cast<size_t>(ds.joints) + joint] = true;
  }
  for (size_t i = 0; i < seen.size(); ++i)
    if (!seen[i])
      throw std::runtime_error(path.string() + ": truncated: missing rows (first gap at flat index " +
                               std::to_string(i) + ")");
  return ds;
}

inline std::array<Dataset, 3> split(const Dataset& ds, double train_frac,
                                    double val_frac, double test_frac,
                                    std::uint64_t seed) {
  const double sum = train_frac + val_frac + test_frac;
  if (train_frac < 0 || val_frac < 0 || test_frac < 0 || std::abs(sum - 1.0) > 1e-9)
    throw std::invalid_argument("split: fractions must be nonnegative and sum to 1");
  std::vector<size_t> order(ds.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(derive_seed(seed, 0x59117));
  rng.shuffle(order);

  const size_t n = ds.size();
  const size_t n_train = static_cast<size_t>(std::llround(train_frac * static_cast<double>(n)));
  const size_t n_val = std::min(n - n_train,
      static_cast<size_t>(std::llround(val_frac * static_cast<double>(n))));

  std::array<Dataset, 3> out;
  for (auto& part : out) {
    part.t_p = ds.t_p;
    part.t_f = ds.t_f;
    part.joints = ds.joints;
    part.dims = ds.dims;
  }
  for (size_t i = 0; i < n; ++i) {
    const size_t src = order[i];
    Dataset& part = out[i < n_train ? 0 : (i < n_train + n_val ? 1 : 2)];
    part.sequences.push_back(ds.sequences[src]);
    part.labels.push_back(ds.labels[src]);
  }
  return out;
}

// Repeat-last-frame reference predictor: T_f copies of the final history frame.
inline MotionSequence zero_velocity_baseline(const MotionSequence& history, int t_f) {
  if (t_f < 1) throw std::invalid_argument("zero_velocity_baseline: T_f must be >= 1");
  auto out = MotionSequence::zeros(t_f, history.joints, history.dims);
  const size_t per_frame = static_cast<size_t>(history.joints) * history.dims;
  const double* last = history.frame(history.frames - 1);
  for (int t = 0; t < t_f; ++t)
    std::copy(last, last + per_frame, out.coords.begin() + static_cast<long>(t * per_frame));
  return out;
}

}  // namespace md2ga
