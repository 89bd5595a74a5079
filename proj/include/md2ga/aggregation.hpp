#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "md2ga/model.hpp"
#include "md2ga/motion.hpp"
#include "md2ga/schedule.hpp"
#include "md2ga/tensor.hpp"

namespace md2ga {

// Blending coefficients from the flattened history: a three-layer MLP with a
// softmax head, so the K entries sum to 1.
inline Tensor gate(const Model& m, const MotionSequence& history) {
  const auto& p = m.params;
  if (!p.has_gate)
    throw std::invalid_argument("gate: model has no gating network (K < 2)");
  if (history.frames != m.config.t_p)
    throw std::invalid_argument("gate: expected " + std::to_string(m.config.t_p) +
                                " history frames, got " + std::to_string(history.frames));
  auto x = Tensor::from_values({1, history.frames * history.joints * history.dims},
                               history.coords);
  auto h1 = relu(add_row_bias(matmul(x, p.gate_w1), p.gate_b1));
  auto h2 = relu(add_row_bias(matmul(h1, p.gate_w2), p.gate_b2));
  auto logits = add_row_bias(matmul(h2, p.gate_w3), p.gate_b3);
  return reshape(softmax(logits, 1), {m.config.num_decoders});
}

// A[k][t] = exp(w_k) * B[k][t] / sum_k' exp(w_k') * B[k'][t].  The gate's
// output is exponentiated again, exactly as the design states; a per-column
// renormalized softmax-of-softmax.  Columns with one active decoder come out
// exactly 1.
inline Tensor masked_attention(const Tensor& omega, const MaskMatrix& mask) {
  const int k_count = mask.num_decoders;
  const int total = mask.total_len;
  if (static_cast<int>(omega.size()) != k_count)
    throw std::invalid_argument("masked_attention: omega size " +
                                std::to_string(omega.size()) + " vs " +
                                std::to_string(k_count) + " mask rows");
  std::vector<double> ex(static_cast<size_t>(k_count));
  for (int k = 0; k < k_count; ++k) ex[static_cast<size_t>(k)] = std::exp(omega[static_cast<size_t>(k)]);

  std::vector<double> a(static_cast<size_t>(k_count) * total, 0.0);
  for (int t = 1; t <= total; ++t) {
    double denom = 0.0;
    int active = 0;
    int only = -1;
    for (int k = 1; k <= k_count; ++k)
      if (mask.at(k, t)) {
        denom += ex[static_cast<size_t>(k - 1)];
        ++active;
        only = k;
      }
    if (active == 0)
      throw std::invalid_argument("masked_attention: mask column " +
                                  std::to_string(t) + " has no active decoder");
    for (int k = 1; k <= k_count; ++k)
      if (mask.at(k, t))
        a[static_cast<size_t>(k - 1) * total + (t - 1)] =
            active == 1 && k == only ? 1.0 : ex[static_cast<size_t>(k - 1)] / denom;
  }

  return Tensor::from_op(
      {k_count, total}, std::move(a), {omega},
      [k_count, total](detail::TensorNode& self) {
        auto& p = *self.parents[0];
        if (!p.requires_grad) return;
        // per column this is a softmax over the active set, so
        // dw_k += A_kt * (dA_kt - sum_i dA_it * A_it)
        for (int t = 0; t < total; ++t) {
          double gs = 0.0;
          for (int k = 0; k < k_count; ++k)
            gs += self.grad[static_cast<size_t>(k) * total + t] *
                  self.values[static_cast<size_t>(k) * total + t];
          for (int k = 0; k < k_count; ++k) {
            const size_t idx = static_cast<size_t>(k) * total + t;
            p.grad[static_cast<size_t>(k)] += self.values[idx] * (self.grad[idx] - gs);
          }
        }
      });
}

// Gating-free control: every active decoder gets equal weight.
inline Tensor uniform_attention(const MaskMatrix& mask) {
  std::vector<double> a(static_cast<size_t>(mask.num_decoders) * mask.total_len, 0.0);
  for (int t = 1; t <= mask.total_len; ++t) {
    int active = 0;
    for (int k = 1; k <= mask.num_decoders; ++k) active += mask.at(k, t);
    if (active == 0)
      throw std::invalid_argument("uniform_attention: mask column " +
                                  std::to_string(t) + " has no active decoder");
    for (int k = 1; k <= mask.num_decoders; ++k)
      if (mask.at(k, t))
        a[static_cast<size_t>(k - 1) * mask.total_len + (t - 1)] = 1.0 / active;
  }
  return Tensor::from_values({mask.num_decoders, mask.total_len}, std::move(a));
}

// P_t = sum over active k of A[k][t] * Y_{k,t}.  Computed anchored on the
// last active decoder, P_t = Y_a + sum_{k != a} A[k][t] (Y_k - Y_a), which is
// the same convex combination (columns of A sum to 1) but is bitwise exact in
// the cases the contracts pin down: one active decoder passes its output
// through untouched, and identical decoder outputs blend to that value.
inline Tensor blend(const DecoderOutputSet& outputs, const Tensor& attention,
                    const HorizonSchedule& schedule) {
  const int k_count = schedule.num_decoders;
  const int total = schedule.total_len();
  if (static_cast<int>(outputs.size()) != k_count)
    throw std::invalid_argument("blend: expected " + std::to_string(k_count) +
                                " decoder outputs, got " + std::to_string(outputs.size()));
  if (attention.shape() != std::vector<int>{k_count, total})
    throw std::invalid_argument("blend: attention shape " +
                                detail::shape_str(attention.shape()) +
                                " does not match schedule");
  const int coord = outputs[0].cols();
  for (int k = 1; k <= k_count; ++k) {
    const auto& y = outputs[static_cast<size_t>(k - 1)];
    if (y.rows() != schedule.lengths[static_cast<size_t>(k - 1)] || y.cols() != coord)
      throw std::invalid_argument("blend: output " + std::to_string(k) +
                                  " shape " + detail::shape_str(y.shape()) +
                                  " does not match its horizon");
  }

  // per column: active decoders and the anchor (last active)
  std::vector<std::vector<int>> active(static_cast<size_t>(total));
  for (int t = 1; t <= total; ++t)
    for (int k = 1; k <= k_count; ++k)
      if (t >= schedule.cover_begin(k) && t <= schedule.cover_end(k))
        active[static_cast<size_t>(t - 1)].push_back(k);

  std::vector<double> p(static_cast<size_t>(total) * coord);
  const double* av = attention.values().data();
  for (int t = 1; t <= total; ++t) {
    const auto& act = active[static_cast<size_t>(t - 1)];
    const int a = act.back();
    const double* ya =
        outputs[static_cast<size_t>(a - 1)].values().data() +
        static_cast<size_t>(t - schedule.cover_begin(a)) * coord;
    double* out = p.data() + static_cast<size_t>(t - 1) * coord;
    std::copy(ya, ya + coord, out);
    for (int k : act) {
      if (k == a) continue;
      const double w = av[static_cast<size_t>(k - 1) * total + (t - 1)];
      const double* yk = outputs[static_cast<size_t>(k - 1)].values().data() +
                         static_cast<size_t>(t - schedule.cover_begin(k)) * coord;
      for (int c = 0; c < coord; ++c) out[c] += w * (yk[c] - ya[c]);
    }
  }

  std::vector<Tensor> parents(outputs.begin(), outputs.end());
  parents.push_back(attention);
  HorizonSchedule sched = schedule;
  return Tensor::from_op(
      {total, coord}, std::move(p), std::move(parents),
      [sched, active, coord, total, k_count](detail::TensorNode& self) {
        auto& patt = *self.parents[static_cast<size_t>(k_count)];
        const double* av = patt.values.data();
        for (int t = 1; t <= total; ++t) {
          const auto& act = active[static_cast<size_t>(t - 1)];
          const int a = act.back();
          const double* g = self.grad.data() + static_cast<size_t>(t - 1) * coord;
          auto& pa = *self.parents[static_cast<size_t>(a - 1)];
          const size_t arow = static_cast<size_t>(t - sched.cover_begin(a)) * coord;
          double other = 0.0;
          for (int k : act)
            if (k != a) other += av[static_cast<size_t>(k - 1) * total + (t - 1)];
          if (pa.requires_grad)
            for (int c = 0; c < coord; ++c)
              pa.grad[arow + c] += g[c] * (1.0 - other);
          for (int k : act) {
            if (k == a) continue;
            auto& pk = *self.parents[static_cast<size_t>(k - 1)];
            const size_t krow = static_cast<size_t>(t - sched.cover_begin(k)) * coord;
            const double w = av[static_cast<size_t>(k - 1) * total + (t - 1)];
            if (pk.requires_grad)
              for (int c = 0; c < coord; ++c) pk.grad[krow + c] += g[c] * w;
            if (patt.requires_grad) {
              double acc = 0.0;
              for (int c = 0; c < coord; ++c)
                acc += g[c] * (pk.values[krow + c] - pa.values[arow + c]);
              patt.grad[static_cast<size_t>(k - 1) * total + (t - 1)] += acc;
            }
          }
        }
      });
}

}  // namespace md2ga
