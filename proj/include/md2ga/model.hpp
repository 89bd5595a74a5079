#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "md2ga/motion.hpp"
#include "md2ga/rng.hpp"
#include "md2ga/schedule.hpp"
#include "md2ga/tensor.hpp"

namespace md2ga {

enum class EncoderKind { Gcn, Mlp };

inline const char* encoder_name(EncoderKind e) {
  return e == EncoderKind::Gcn ? "gcn" : "mlp";
}

inline EncoderKind parse_encoder(const std::string& s) {
  if (s == "gcn") return EncoderKind::Gcn;
  if (s == "mlp") return EncoderKind::Mlp;
  throw std::invalid_argument("unknown encoder '" + s + "' (expected gcn|mlp)");
}

struct ModelConfig {
  int joints = 8;
  int dims = 3;
  int t_p = 10;
  int t_f = 10;
  int num_decoders = 6;           // 1 selects the sole-decoder baseline
  ScheduleMode mode = ScheduleMode::Incremental;
  EncoderKind encoder = EncoderKind::Gcn;
  int embed_hidden = 64;          // frame-embedding MLP hidden width
  int embed_width = 0;            // H; 0 resolves to J*D (gcn) or 64 (mlp)
  int encoder_blocks = 2;
  int head_hidden = 64;           // decoder-head MLP hidden width
  int gate_hidden = 256;          // both gating hidden layers
  std::uint64_t seed = 1;

  int coord_width() const { return joints * dims; }
  int total_len() const { return t_p + t_f; }
  int resolved_embed_width() const {
    if (embed_width > 0) return embed_width;
    return encoder == EncoderKind::Gcn ? coord_width() : 64;
  }
  int latent_size() const { return resolved_embed_width() * total_len(); }
};

struct EncoderBlockParams {
  Tensor a;  // gcn: N x N adjacency; mlp: H x H weight
  Tensor b;  // gcn: total_len x total_len weight; mlp: H bias
};

struct HeadParams {
  Tensor w1, b1, w2, b2;
};

struct ModelParams {
  Tensor embed_w1, embed_b1, embed_w2, embed_b2;
  std::vector<EncoderBlockParams> blocks;
  std::vector<HeadParams> heads;
  Tensor gate_w1, gate_b1, gate_w2, gate_b2, gate_w3, gate_b3;  // absent for K=1
  bool has_gate = false;

  // stable enumeration order: initialization, optimizer state, and
  // checkpoints all key off this
  std::vector<std::pair<std::string, Tensor>> named(EncoderKind enc) const {
    std::vector<std::pair<std::string, Tensor>> out{
        {"embed.w1", embed_w1},
        {"embed.b1", embed_b1},
        {"embed.w2", embed_w2},
        {"embed.b2", embed_b2},
    };
    const bool gcn = enc == EncoderKind::Gcn;
    for (size_t i = 0; i < blocks.size(); ++i) {
      const std::string p = "enc." + std::to_string(i + 1);
      out.emplace_back(p + (gcn ? ".adj" : ".w"), blocks[i].a);
      out.emplace_back(p + (gcn ? ".w" : ".b"), blocks[i].b);
    }
    for (size_t k = 0; k < heads.size(); ++k) {
      const std::string p = "head" + std::to_string(k + 1);
      out.emplace_back(p + ".w1", heads[k].w1);
      out.emplace_back(p + ".b1", heads[k].b1);
      out.emplace_back(p + ".w2", heads[k].w2);
      out.emplace_back(p + ".b2", heads[k].b2);
    }
    if (has_gate) {
      out.emplace_back("gate.w1", gate_w1);
      out.emplace_back("gate.b1", gate_b1);
      out.emplace_back("gate.w2", gate_w2);
      out.emplace_back("gate.b2", gate_b2);
      out.emplace_back("gate.w3", gate_w3);
      out.emplace_back("gate.b3", gate_b3);
    }
    return out;
  }
};

struct Model {
  ModelConfig config;
  HorizonSchedule schedule;
  MaskMatrix mask;
  ModelParams params;

  std::vector<std::pair<std::string, Tensor>> named_params() const {
    return params.named(config.encoder);
  }
};

namespace detail {

inline Tensor glorot(Rng& rng, int fan_in, int fan_out, std::vector<int> shape) {
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = rng.uniform(-bound, bound);
  return Tensor::from_values(std::move(shape), std::move(v), /*requires_grad=*/true);
}

}  // namespace detail

inline Model build_model(const ModelConfig& cfg) {
  if (cfg.joints < 1 || (cfg.dims != 2 && cfg.dims != 3))
    throw std::invalid_argument("build_model: J must be >= 1 and D in {2,3}");
  if (cfg.num_decoders < 1)
    throw std::invalid_argument("build_model: need at least one decoder");
  const int h = cfg.resolved_embed_width();
  if (cfg.encoder == EncoderKind::Gcn && h != cfg.coord_width())
    throw std::invalid_argument(
        "build_model: graph encoder needs embed width J*D = " +
        std::to_string(cfg.coord_width()) + ", got " + std::to_string(h));

  Model m;
  m.config = cfg;
  if (cfg.num_decoders == 1) {
    // sole-decoder baseline: one head covering the whole timeline
    m.schedule.t_p = cfg.t_p;
    m.schedule.t_f = cfg.t_f;
    m.schedule.num_decoders = 1;
    m.schedule.mode = cfg.mode;
    m.schedule.lengths = {cfg.total_len()};
  } else {
    m.schedule = compute_horizons(cfg.t_p, cfg.t_f, cfg.num_decoders, cfg.mode);
  }
  m.mask = build_mask(m.schedule);

  Rng rng(derive_seed(cfg.seed, 0xA110C));
  const int in = cfg.coord_width();
  auto& p = m.params;
  p.embed_w1 = detail::glorot(rng, in, cfg.embed_hidden, {in, cfg.embed_hidden});
  p.embed_b1 = Tensor::zeros({cfg.embed_hidden}, true);
  p.embed_w2 = detail::glorot(rng, cfg.embed_hidden, h, {cfg.embed_hidden, h});
  p.embed_b2 = Tensor::zeros({h}, true);

  const int total = cfg.total_len();
  for (int b = 0; b < cfg.encoder_blocks; ++b) {
    EncoderBlockParams blk;
    if (cfg.encoder == EncoderKind::Gcn) {
      blk.a = detail::glorot(rng, h, h, {h, h});              // adjacency
      blk.b = detail::glorot(rng, total, total, {total, total});
    } else {
      blk.a = detail::glorot(rng, h, h, {h, h});
      blk.b = Tensor::zeros({h}, true);
    }
    p.blocks.push_back(std::move(blk));
  }

  const int flat = cfg.latent_size();
  for (int k = 1; k <= cfg.num_decoders; ++k) {
    const int out_len = m.schedule.lengths[static_cast<size_t>(k - 1)];
    const int out = out_len * in;
    HeadParams head;
    head.w1 = detail::glorot(rng, flat, cfg.head_hidden, {flat, cfg.head_hidden});
    head.b1 = Tensor::zeros({cfg.head_hidden}, true);
    head.w2 = detail::glorot(rng, cfg.head_hidden, out, {cfg.head_hidden, out});
    head.b2 = Tensor::zeros({out}, true);
    p.heads.push_back(std::move(head));
  }

  if (cfg.num_decoders >= 2) {
    p.has_gate = true;
    const int gin = cfg.t_p * in;
    const int gh = cfg.gate_hidden;
    p.gate_w1 = detail::glorot(rng, gin, gh, {gin, gh});
    p.gate_b1 = Tensor::zeros({gh}, true);
    p.gate_w2 = detail::glorot(rng, gh, gh, {gh, gh});
    p.gate_b2 = Tensor::zeros({gh}, true);
    p.gate_w3 = detail::glorot(rng, gh, cfg.num_decoders, {gh, cfg.num_decoders});
    p.gate_b3 = Tensor::zeros({cfg.num_decoders}, true);
  }
  return m;
}

// Repeat-last-frame padding: frames beyond T_p copy frame T_p.
inline MotionSequence pad_input(const MotionSequence& x, int total_len) {
  if (total_len < x.frames)
    throw std::invalid_argument("pad_input: target length " +
                                std::to_string(total_len) + " shorter than input " +
                                std::to_string(x.frames));
  auto out = MotionSequence::zeros(total_len, x.joints, x.dims);
  const size_t per_frame = static_cast<size_t>(x.joints) * x.dims;
  std::copy(x.coords.begin(), x.coords.end(), out.coords.begin());
  const double* last = x.frame(x.frames - 1);
  for (int t = x.frames; t < total_len; ++t)
    std::copy(last, last + per_frame,
              out.coords.begin() + static_cast<long>(t * per_frame));
  return out;
}

// Constant (untracked) tensor view of a sequence, one frame per row.
inline Tensor sequence_tensor(const MotionSequence& x) {
  return Tensor::from_values({x.frames, x.joints * x.dims}, x.coords);
}

// Per-frame two-layer MLP over the flattened coordinates: rows of the result
// are W2·relu(W1·x_t + b1) + b2.
inline Tensor embed_frames(const Model& m, const MotionSequence& x_padded) {
  if (x_padded.joints != m.config.joints || x_padded.dims != m.config.dims)
    throw std::invalid_argument("embed_frames: sequence shape does not match model");
  const auto& p = m.params;
  auto x = sequence_tensor(x_padded);
  auto hidden = relu(add_row_bias(matmul(x, p.embed_w1), p.embed_b1));
  return add_row_bias(matmul(hidden, p.embed_w2), p.embed_b2);
}

// Graph path: residual blocks y <- y + relu(adj . y . w) over J*D nodes with
// the time axis as features. MLP path: per-frame residual blocks.
inline Tensor encode(const Model& m, const Tensor& x_hat) {
  const auto& p = m.params;
  if (m.config.encoder == EncoderKind::Gcn) {
    Tensor y = transpose(x_hat);  // nodes x time
    for (const auto& blk : p.blocks)
      y = add(y, relu(matmul(matmul(blk.a, y), blk.b)));
    return y;
  }
  Tensor y = x_hat;
  for (const auto& blk : p.blocks)
    y = add(y, relu(add_row_bias(matmul(y, blk.a), blk.b)));
  return y;
}

using DecoderOutputSet = std::vector<Tensor>;

// Head k maps the flattened latent through a two-layer MLP to its covered
// frames, plus the padded-input residual over those frames.
inline DecoderOutputSet decode_all(const Model& m, const Tensor& latent,
                                   const MotionSequence& x) {
  if (static_cast<int>(m.params.heads.size()) != m.schedule.num_decoders)
    throw std::invalid_argument("decode_all: head count does not match schedule");
  const int coord = m.config.coord_width();
  auto flat = reshape(latent, {1, static_cast<int>(latent.size())});
  const auto padded = pad_input(x, m.schedule.total_len());

  DecoderOutputSet outputs;
  for (int k = 1; k <= m.schedule.num_decoders; ++k) {
    const auto& head = m.params.heads[static_cast<size_t>(k - 1)];
    const int len = m.schedule.lengths[static_cast<size_t>(k - 1)];
    auto hidden = relu(add_row_bias(matmul(flat, head.w1), head.b1));
    auto delta = reshape(add_row_bias(matmul(hidden, head.w2), head.b2), {len, coord});
    auto residual = sequence_tensor(padded.slice(m.schedule.cover_begin(k) - 1, len));
    outputs.push_back(add(delta, residual));
  }
  return outputs;
}

}  // namespace md2ga
