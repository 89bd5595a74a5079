#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "md2ga/adam.hpp"
#include "md2ga/aggregation.hpp"
#include "md2ga/data.hpp"
#include "md2ga/model.hpp"
#include "md2ga/objective.hpp"
#include "md2ga/rng.hpp"
#include "md2ga/schedule.hpp"
#include "md2ga/tensor.hpp"

namespace md2ga {

enum class EvalMode { Blended, LastDecoderOnly };

inline const char* eval_mode_name(EvalMode m) {
  return m == EvalMode::Blended ? "blended" : "last_decoder_only";
}

inline EvalMode parse_eval_mode(const std::string& s) {
  if (s == "blended") return EvalMode::Blended;
  if (s == "last_decoder_only") return EvalMode::LastDecoderOnly;
  throw std::invalid_argument("unknown eval mode '" + s +
                              "' (expected blended|last_decoder_only)");
}

enum class AttentionKind { Learned, Uniform };

struct TrainConfig {
  ModelConfig model;
  double lr = 1e-3;
  int epochs = 100;
  int batch_size = 16;
  std::uint64_t seed = 1;
  double clip_norm = 0.0;  // 0 disables clipping
  bool single_decoder = false;
  bool no_l1 = false;
  bool no_l2 = false;
  bool no_ga = false;
  EvalMode eval_mode = EvalMode::Blended;

  void validate() const {
    if (single_decoder && (no_l1 || no_l2 || no_ga))
      throw std::invalid_argument(
          "train: single_decoder already removes the multi-range machinery; "
          "it cannot combine with no_l1/no_l2/no_ga");
    if (epochs < 0 || batch_size < 1)
      throw std::invalid_argument("train: epochs must be >= 0 and batch size >= 1");
    if (lr <= 0) throw std::invalid_argument("train: learning rate must be positive");
  }

  AttentionKind attention_kind() const {
    return (single_decoder || no_ga) ? AttentionKind::Uniform : AttentionKind::Learned;
  }

  LossFlags loss_flags() const {
    LossFlags f;
    f.no_l1 = no_l1;
    f.no_l2 = single_decoder ? true : no_l2;  // the baseline trains on l1 alone
    return f;
  }
};

struct SequenceForward {
  DecoderOutputSet outputs;
  Tensor omega;      // undefined under uniform attention
  Tensor attention;  // K x (T_p + T_f)
  Tensor blended;    // (T_p + T_f) x (J * D)
};

inline SequenceForward forward_sequence(const Model& m, const MotionSequence& history,
                                        AttentionKind kind) {
  SequenceForward f;
  auto padded = pad_input(history, m.schedule.total_len());
  auto latent = encode(m, embed_frames(m, padded));
  f.outputs = decode_all(m, latent, history);
  if (kind == AttentionKind::Learned) {
    f.omega = gate(m, history);
    f.attention = masked_attention(f.omega, m.mask);
  } else {
    f.attention = uniform_attention(m.mask);
  }
  f.blended = blend(f.outputs, f.attention, m.schedule);
  return f;
}

inline MotionSequence tensor_to_sequence(const Tensor& t, int joints, int dims) {
  MotionSequence out;
  out.frames = t.rows();
  out.joints = joints;
  out.dims = dims;
  out.coords.assign(t.values().begin(), t.values().end());
  return out;
}

// Scores future frames only (T_p+1..T_p+T_f), per-frame values averaged over
// the dataset.  Blended mode scores P; last_decoder_only scores Y_K alone —
// the deployment where blending served purely as a training-time auxiliary.
inline EvalReport evaluate(const Model& m, const Dataset& ds, EvalMode mode,
                           AttentionKind kind) {
  if (ds.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  if (ds.t_p != m.config.t_p || ds.t_f != m.config.t_f || ds.joints != m.config.joints ||
      ds.dims != m.config.dims)
    throw std::invalid_argument("evaluate: dataset shape does not match model");
  const int k_last = m.schedule.num_decoders;
  if (mode == EvalMode::LastDecoderOnly &&
      (m.schedule.cover_begin(k_last) > m.config.t_p + 1 ||
       m.schedule.cover_end(k_last) < m.config.t_p + m.config.t_f))
    throw std::invalid_argument(
        "evaluate: last decoder does not cover the whole future in this mode");

  EvalReport report;
  report.mode = eval_mode_name(mode);
  report.first_frame = m.config.t_p + 1;
  report.last_frame = m.config.t_p + m.config.t_f;
  report.per_frame_mpjpe.assign(static_cast<size_t>(m.config.t_f), 0.0);

  for (size_t i = 0; i < ds.size(); ++i) {
    auto f = forward_sequence(m, ds.history(i), kind);
    MotionSequence pred;
    if (mode == EvalMode::Blended) {
      pred = tensor_to_sequence(f.blended, ds.joints, ds.dims)
                 .slice(m.config.t_p, m.config.t_f);
    } else {
      const auto& y = f.outputs[static_cast<size_t>(k_last - 1)];
      const int first_row = m.config.t_p + 1 - m.schedule.cover_begin(k_last);
      pred = tensor_to_sequence(y, ds.joints, ds.dims).slice(first_row, m.config.t_f);
    }
    auto r = mpjpe(pred, ds.future(i), 1, m.config.t_f);
    for (size_t t = 0; t < r.per_frame_mpjpe.size(); ++t)
      report.per_frame_mpjpe[t] += r.per_frame_mpjpe[t];
  }
  double sum = 0.0;
  for (auto& v : report.per_frame_mpjpe) {
    v /= static_cast<double>(ds.size());
    sum += v;
  }
  report.average_mpjpe = sum / static_cast<double>(report.per_frame_mpjpe.size());
  return report;
}

// Reference score: repeat-last-frame prediction against the same future frames.
inline EvalReport zero_velocity_report(const Dataset& ds) {
  if (ds.size() == 0) throw std::invalid_argument("zero_velocity_report: empty dataset");
  EvalReport report;
  report.mode = "zero_velocity";
  report.first_frame = ds.t_p + 1;
  report.last_frame = ds.t_p + ds.t_f;
  report.per_frame_mpjpe.assign(static_cast<size_t>(ds.t_f), 0.0);
  for (size_t i = 0; i < ds.size(); ++i) {
    auto r = mpjpe(zero_velocity_baseline(ds.history(i), ds.t_f), ds.future(i), 1, ds.t_f);
    for (size_t t = 0; t < r.per_frame_mpjpe.size(); ++t)
      report.per_frame_mpjpe[t] += r.per_frame_mpjpe[t];
  }
  double sum = 0.0;
  for (auto& v : report.per_frame_mpjpe) {
    v /= static_cast<double>(ds.size());
    sum += v;
  }
  report.average_mpjpe = sum / static_cast<double>(report.per_frame_mpjpe.size());
  return report;
}

struct EpochRecord {
  int epoch = 0;  // 1-based
  double l1 = 0.0;
  double l2 = 0.0;
  double total = 0.0;
  double val_mpjpe = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> history;
};

inline std::string history_csv(const std::vector<EpochRecord>& history) {
  std::string csv = "epoch,l1,l2,total,val_mpjpe\n";
  for (const auto& r : history)
    csv += std::to_string(r.epoch) + "," + format_double(r.l1) + "," +
           format_double(r.l2) + "," + format_double(r.total) + "," +
           format_double(r.val_mpjpe) + "\n";
  return csv;
}

// Deterministic minibatch training: the model is built from (config, seed),
// batch order for epoch e comes from derive_seed(seed, e), and losses are
// averaged per batch before the Adam step.  A non-finite loss aborts with
// epoch/batch context rather than training through garbage.
inline TrainResult train(const TrainConfig& cfg, const Dataset& train_set,
                         const Dataset& val_set) {
  cfg.validate();
  if (train_set.size() == 0) throw std::invalid_argument("train: empty training set");

  ModelConfig mc = cfg.model;
  mc.seed = cfg.seed;
  if (cfg.single_decoder) mc.num_decoders = 1;
  if (train_set.t_p != mc.t_p || train_set.t_f != mc.t_f ||
      train_set.joints != mc.joints || train_set.dims != mc.dims)
    throw std::invalid_argument("train: dataset shape does not match model config");

  TrainResult result{build_model(mc), {}};
  Model& m = result.model;
  auto params = m.named_params();
  auto state = init_adam(params);
  AdamConfig adam;
  adam.lr = cfg.lr;
  adam.clip_norm = cfg.clip_norm;

  const auto kind = cfg.attention_kind();
  const auto flags = cfg.loss_flags();

  std::vector<size_t> order(train_set.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    Rng shuffle_rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order);

    double epoch_l1 = 0.0, epoch_l2 = 0.0, epoch_total = 0.0;
    for (size_t batch_start = 0; batch_start < order.size();
         batch_start += static_cast<size_t>(cfg.batch_size)) {
      const size_t batch_end =
          std::min(order.size(), batch_start + static_cast<size_t>(cfg.batch_size));
      const double inv = 1.0 / static_cast<double>(batch_end - batch_start);
      for (auto& [name, t] : params) t.zero_grad();

      for (size_t bi = batch_start; bi < batch_end; ++bi) {
        const size_t idx = order[bi];
        auto f = forward_sequence(m, train_set.history(idx), kind);
        auto truth = sequence_tensor(train_set.sequences[idx]);
        auto loss =
            total_loss(f.blended, f.outputs, truth, m.schedule, m.config.joints, flags);
        const double total_v = loss.total_value();
        if (!std::isfinite(total_v))
          throw std::runtime_error(
              "train: non-finite loss at epoch " + std::to_string(epoch) + ", batch " +
              std::to_string(batch_start / static_cast<size_t>(cfg.batch_size) + 1) +
              ", sequence " + std::to_string(idx));
        epoch_l1 += loss.l1_value();
        epoch_l2 += loss.l2_value();
        epoch_total += total_v;
        backward(scale(loss.total, inv));
      }
      adam_step(params, state, adam);
    }

    EpochRecord rec;
    rec.epoch = epoch;
    const double n = static_cast<double>(train_set.size());
    rec.l1 = epoch_l1 / n;
    rec.l2 = epoch_l2 / n;
    rec.total = epoch_total / n;
    rec.val_mpjpe = val_set.size() > 0
                        ? evaluate(m, val_set, cfg.eval_mode, kind).average_mpjpe
                        : std::numeric_limits<double>::quiet_NaN();
    result.history.push_back(rec);
  }
  return result;
}

struct ConsistencyMatrix {
  int num_decoders = 0;
  std::vector<double> entries;  // K x K, row-major

  double at(int i, int j) const {
    return entries[static_cast<size_t>(i - 1) * num_decoders + (j - 1)];
  }
};

// Pairwise decoder agreement: entry (i, j) is the mean per-joint distance
// between Y_i and Y_j over the frames both cover, averaged over the dataset.
inline ConsistencyMatrix consistency_matrix(const Model& m, const Dataset& ds,
                                            AttentionKind kind = AttentionKind::Learned) {
  if (ds.size() == 0) throw std::invalid_argument("consistency_matrix: empty dataset");
  if (m.schedule.mode != ScheduleMode::Incremental)
    throw std::invalid_argument(
        "consistency_matrix: defined for nested (incremental) ranges only");
  const int k_count = m.schedule.num_decoders;
  ConsistencyMatrix cm;
  cm.num_decoders = k_count;
  cm.entries.assign(static_cast<size_t>(k_count) * k_count, 0.0);

  for (size_t s = 0; s < ds.size(); ++s) {
    auto f = forward_sequence(m, ds.history(s), kind);
    for (int i = 1; i <= k_count; ++i)
      for (int j = i + 1; j <= k_count; ++j) {
        const int shared =
            std::min(m.schedule.lengths[static_cast<size_t>(i - 1)],
                     m.schedule.lengths[static_cast<size_t>(j - 1)]);
        auto yi = tensor_to_sequence(f.outputs[static_cast<size_t>(i - 1)], ds.joints,
                                     ds.dims);
        auto yj = tensor_to_sequence(f.outputs[static_cast<size_t>(j - 1)], ds.joints,
                                     ds.dims);
        const double d =
            mpjpe(yi.slice(0, shared), yj.slice(0, shared), 1, shared).average_mpjpe;
        cm.entries[static_cast<size_t>(i - 1) * k_count + (j - 1)] += d;
      }
  }
  for (int i = 1; i <= k_count; ++i)
    for (int j = i + 1; j <= k_count; ++j) {
      auto& upper = cm.entries[static_cast<size_t>(i - 1) * k_count + (j - 1)];
      upper /= static_cast<double>(ds.size());
      cm.entries[static_cast<size_t>(j - 1) * k_count + (i - 1)] = upper;  // exact mirror
    }
  return cm;
}

struct Fig1Setting {
  int t_f = 0;
  std::vector<double> mean_per_frame;  // averaged over seeds
};

struct Fig1Config {
  SyntheticConfig data;        // template; t_f and seed overridden per run
  TrainConfig train;           // template; forced to the sole-decoder baseline
  std::vector<int> horizons;   // the Pre-x grid
  std::vector<std::uint64_t> seeds;
  double val_fraction = 0.25;
};

// One fresh sole-decoder model per (horizon, seed); per-frame validation
// error curves averaged over seeds.  This exists to show error growing with
// prediction distance, one curve per horizon setting.
inline std::vector<Fig1Setting> fig1_harness(const Fig1Config& cfg) {
  if (cfg.horizons.empty() || cfg.seeds.empty())
    throw std::invalid_argument("fig1_harness: need at least one horizon and seed");
  std::vector<Fig1Setting> settings;
  for (int t_f : cfg.horizons) {
    Fig1Setting setting;
    setting.t_f = t_f;
    setting.mean_per_frame.assign(static_cast<size_t>(t_f), 0.0);
    for (std::uint64_t seed : cfg.seeds) {
      SyntheticConfig dc = cfg.data;
      dc.t_f = t_f;
      dc.seed = seed;
      auto ds = gen_synthetic(dc);
      auto [train_set, val_set, rest] =
          split(ds, 1.0 - cfg.val_fraction, cfg.val_fraction, 0.0, seed);
      TrainConfig tc = cfg.train;
      tc.model.t_p = dc.t_p;
      tc.model.t_f = t_f;
      tc.model.joints = dc.joints;
      tc.model.dims = dc.dims;
      tc.single_decoder = true;
      tc.no_l1 = tc.no_l2 = tc.no_ga = false;
      tc.seed = seed;
      auto result = train(tc, train_set, val_set);
      auto report = evaluate(result.model, val_set, EvalMode::Blended,
                             AttentionKind::Uniform);
      for (size_t t = 0; t < report.per_frame_mpjpe.size(); ++t)
        setting.mean_per_frame[t] += report.per_frame_mpjpe[t];
    }
    for (auto& v : setting.mean_per_frame) v /= static_cast<double>(cfg.seeds.size());
    settings.push_back(std::move(setting));
  }
  return settings;
}

}  // namespace md2ga
