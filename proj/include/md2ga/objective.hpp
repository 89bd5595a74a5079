#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "md2ga/io.hpp"
#include "md2ga/model.hpp"
#include "md2ga/motion.hpp"
#include "md2ga/schedule.hpp"
#include "md2ga/tensor.hpp"

namespace md2ga {

// Mean over frames and joints of the squared per-joint error between the
// blended prediction and the full-length ground truth (history + future).
inline Tensor loss_l1(const Tensor& blended, const Tensor& truth, int joints) {
  detail::check_same_shape(blended, truth, "loss_l1");
  const double scale = 1.0 / (static_cast<double>(blended.rows()) * joints);
  return sse_scaled(blended, truth, scale);
}

// Each decoder scored against the ground truth over its covered frames,
// normalized by its own range length, then summed over decoders.
inline Tensor loss_l2(const DecoderOutputSet& outputs, const Tensor& truth,
                      const HorizonSchedule& schedule, int joints) {
  if (static_cast<int>(outputs.size()) != schedule.num_decoders)
    throw std::invalid_argument("loss_l2: output count does not match schedule");
  Tensor total;
  const int coord = truth.cols();
  for (int k = 1; k <= schedule.num_decoders; ++k) {
    const int len = schedule.lengths[static_cast<size_t>(k - 1)];
    const int first = schedule.cover_begin(k) - 1;  // 0-based frame row
    std::vector<double> slice(static_cast<size_t>(len) * coord);
    std::copy(truth.values().begin() + static_cast<long>(first) * coord,
              truth.values().begin() + static_cast<long>(first + len) * coord,
              slice.begin());
    auto target = Tensor::from_values({len, coord}, std::move(slice));
    auto term = sse_scaled(outputs[static_cast<size_t>(k - 1)], target,
                           1.0 / (static_cast<double>(len) * joints));
    total = total.defined() ? add(total, term) : term;
  }
  return total;
}

struct LossFlags {
  bool no_l1 = false;
  bool no_l2 = false;
};

struct LossBreakdown {
  Tensor l1;     // always evaluated, for reporting
  Tensor l2;
  Tensor total;  // the term(s) actually minimized
  double l1_value() const { return l1.item(); }
  double l2_value() const { return l2.item(); }
  double total_value() const { return total.item(); }
};

inline LossBreakdown total_loss(const Tensor& blended, const DecoderOutputSet& outputs,
                                const Tensor& truth, const HorizonSchedule& schedule,
                                int joints, LossFlags flags = {}) {
  if (flags.no_l1 && flags.no_l2)
    throw std::invalid_argument("total_loss: cannot drop both loss terms");
  LossBreakdown out;
  out.l1 = loss_l1(blended, truth, joints);
  out.l2 = loss_l2(outputs, truth, schedule, joints);
  out.total = flags.no_l1 ? out.l2 : (flags.no_l2 ? out.l1 : add(out.l1, out.l2));
  return out;
}

struct EvalReport {
  std::vector<double> per_frame_mpjpe;
  double average_mpjpe = 0.0;
  int first_frame = 0;  // 1-based inclusive frame labels
  int last_frame = 0;
  std::string mode;
};

// Mean per-joint position error: unsquared Euclidean distance averaged over
// joints, per frame, over the 1-based inclusive range [first, last].
inline EvalReport mpjpe(const MotionSequence& pred, const MotionSequence& truth,
                        int first_frame, int last_frame) {
  if (pred.frames != truth.frames || pred.joints != truth.joints ||
      pred.dims != truth.dims)
    throw std::invalid_argument("mpjpe: prediction and truth shapes disagree");
  if (first_frame < 1 || last_frame > pred.frames || first_frame > last_frame)
    throw std::invalid_argument("mpjpe: empty or out-of-range frame range");
  EvalReport r;
  r.first_frame = first_frame;
  r.last_frame = last_frame;
  double sum = 0.0;
  for (int t = first_frame - 1; t < last_frame; ++t) {
    double frame_err = 0.0;
    for (int j = 0; j < pred.joints; ++j) {
      double sq = 0.0;
      for (int d = 0; d < pred.dims; ++d) {
        const double diff = pred.at(t, j, d) - truth.at(t, j, d);
        sq += diff * diff;
      }
      frame_err += std::sqrt(sq);
    }
    frame_err /= pred.joints;
    r.per_frame_mpjpe.push_back(frame_err);
    sum += frame_err;
  }
  r.average_mpjpe = sum / static_cast<double>(r.per_frame_mpjpe.size());
  return r;
}

inline nlohmann::json eval_report_json(const EvalReport& r) {
  return nlohmann::json{{"mode", r.mode},
                        {"first_frame", r.first_frame},
                        {"last_frame", r.last_frame},
                        {"per_frame_mpjpe", r.per_frame_mpjpe},
                        {"average_mpjpe", r.average_mpjpe}};
}

inline std::string eval_report_csv(const EvalReport& r) {
  std::string csv = "frame,mpjpe\n";
  for (size_t i = 0; i < r.per_frame_mpjpe.size(); ++i)
    csv += std::to_string(r.first_frame + static_cast<int>(i)) + "," +
           format_double(r.per_frame_mpjpe[i]) + "\n";
  return csv;
}

}  // namespace md2ga
