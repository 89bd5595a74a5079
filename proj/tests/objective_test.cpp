#include "md2ga/objective.hpp"

#include <gtest/gtest.h>

#include <cmath>

#include "md2ga/grad_check.hpp"
#include "md2ga/rng.hpp"

using md2ga::compute_horizons;
using md2ga::EvalReport;
using md2ga::MotionSequence;
using md2ga::ScheduleMode;
using md2ga::Tensor;

TEST(LossL1, PerfectPredictionIsZero) {
  auto p = Tensor::from_values({3, 2}, {1, 2, 3, 4, 5, 6});
  EXPECT_DOUBLE_EQ(md2ga::loss_l1(p, p, 1).item(), 0.0);
}

TEST(LossL1, HandValue) {
  // 2 frames, 1 joint (D=3): errors (1,0,0) and (0,0,0) -> (1+0)/(2*1)
  auto p = Tensor::from_values({2, 3}, {1, 0, 0, 0, 0, 0});
  auto g = Tensor::from_values({2, 3}, {0, 0, 0, 0, 0, 0});
  EXPECT_DOUBLE_EQ(md2ga::loss_l1(p, g, 1).item(), 0.5);
}

TEST(LossL1, QuadraticInTheError) {
  md2ga::Rng rng(3);
  std::vector<double> pv(12), gv(12);
  for (auto& v : pv) v = rng.uniform(-1, 1);
  for (auto& v : gv) v = rng.uniform(-1, 1);
  auto g = Tensor::from_values({4, 3}, gv);
  auto p1 = Tensor::from_values({4, 3}, pv);
  std::vector<double> doubled(12);
  for (size_t i = 0; i < 12; ++i) doubled[i] = gv[i] + 2 * (pv[i] - gv[i]);
  auto p2 = Tensor::from_values({4, 3}, doubled);
  EXPECT_NEAR(md2ga::loss_l1(p2, g, 1).item(), 4 * md2ga::loss_l1(p1, g, 1).item(),
              1e-12);
}

TEST(LossL1, GradientIsTwoErrOverTJ) {
  md2ga::Rng rng(5);
  std::vector<double> pv(8), gv(8);
  for (auto& v : pv) v = rng.uniform(-1, 1);
  for (auto& v : gv) v = rng.uniform(-1, 1);
  auto p = Tensor::from_values({4, 2}, pv, true);
  auto g = Tensor::from_values({4, 2}, gv);
  const int joints = 2;  // J=2, D=1-ish layout: scale uses frames*joints
  backward(md2ga::loss_l1(p, g, joints));
  for (size_t i = 0; i < 8; ++i)
    EXPECT_NEAR(p.grad()[i], 2.0 * (pv[i] - gv[i]) / (4.0 * joints), 1e-15);

  auto report = md2ga::grad_check([&] { return md2ga::loss_l1(p, g, joints); },
                                  {p}, 1e-5, 1e-4);
  EXPECT_TRUE(report.pass);
}

TEST(LossL2, HandValue) {
  // K=2 over T_p=1, T_f=2 gives covered lengths (2, 3); J=1, D=3.
  auto sched = compute_horizons(1, 2, 2, ScheduleMode::Incremental);
  ASSERT_EQ(sched.lengths, (std::vector<int>{2, 3}));
  auto truth = Tensor::from_values({3, 3}, std::vector<double>(9, 0.0));
  md2ga::DecoderOutputSet outs;
  outs.push_back(Tensor::from_values({2, 3}, std::vector<double>(6, 0.0)));
  std::vector<double> y2(9, 0.0);
  y2[8] = 2.0;  // frame 3 off by (0,0,2)
  outs.push_back(Tensor::from_values({3, 3}, y2));
  EXPECT_NEAR(md2ga::loss_l2(outs, truth, sched, 1).item(), 4.0 / 3.0, 1e-15);
}

TEST(LossL2, PerfectDecodersAreZeroRegardlessOfK) {
  for (int k : {2, 4, 5}) {
    auto sched = compute_horizons(2, 5, k, ScheduleMode::Incremental);
    std::vector<double> tv(7 * 2);
    for (size_t i = 0; i < tv.size(); ++i) tv[i] = 0.1 * static_cast<double>(i);
    auto truth = Tensor::from_values({7, 2}, tv);
    md2ga::DecoderOutputSet outs;
    for (int kk = 1; kk <= k; ++kk) {
      const int len = sched.lengths[static_cast<size_t>(kk - 1)];
      outs.push_back(Tensor::from_values(
          {len, 2}, std::vector<double>(tv.begin(), tv.begin() + len * 2)));
    }
    EXPECT_DOUBLE_EQ(md2ga::loss_l2(outs, truth, sched, 1).item(), 0.0);
  }
}

TEST(TotalLoss, SumsAndRespectsAblations) {
  auto sched = compute_horizons(1, 2, 2, ScheduleMode::Incremental);
  auto truth = Tensor::from_values({3, 3}, std::vector<double>(9, 0.0));
  std::vector<double> pv(9, 0.0);
  pv[0] = 1.0;  // l1 = 1 / (3*1)
  auto blended = Tensor::from_values({3, 3}, pv);
  md2ga::DecoderOutputSet outs;
  outs.push_back(Tensor::from_values({2, 3}, std::vector<double>(6, 0.0)));
  std::vector<double> y2(9, 0.0);
  y2[8] = 2.0;
  outs.push_back(Tensor::from_values({3, 3}, y2));

  auto both = md2ga::total_loss(blended, outs, truth, sched, 1);
  EXPECT_DOUBLE_EQ(both.total_value(), both.l1_value() + both.l2_value());
  EXPECT_NEAR(both.l2_value(), 4.0 / 3.0, 1e-15);

  md2ga::LossFlags no_l2;
  no_l2.no_l2 = true;
  auto only_l1 = md2ga::total_loss(blended, outs, truth, sched, 1, no_l2);
  EXPECT_EQ(only_l1.total_value(), only_l1.l1_value());  // bitwise same node
  EXPECT_NEAR(only_l1.l2_value(), 4.0 / 3.0, 1e-15);     // still reported

  md2ga::LossFlags no_l1;
  no_l1.no_l1 = true;
  auto only_l2 = md2ga::total_loss(blended, outs, truth, sched, 1, no_l1);
  EXPECT_EQ(only_l2.total_value(), only_l2.l2_value());

  md2ga::LossFlags both_off;
  both_off.no_l1 = both_off.no_l2 = true;
  EXPECT_THROW(md2ga::total_loss(blended, outs, truth, sched, 1, both_off),
               std::invalid_argument);
}

TEST(TotalLoss, CombinedHandValue) {
  // l1 = 0.5 and l2 = 4/3 from the two hand cases -> total about 1.8333
  auto sched = compute_horizons(1, 2, 2, ScheduleMode::Incremental);
  auto truth = Tensor::from_values({3, 3}, std::vector<double>(9, 0.0));
  std::vector<double> pv(9, 0.0);
  pv[0] = 1.2247448713915890;  // sqrt(1.5): ||err||^2 = 1.5 over 3 frames, J=1 -> 0.5
  auto blended = Tensor::from_values({3, 3}, pv);
  md2ga::DecoderOutputSet outs;
  outs.push_back(Tensor::from_values({2, 3}, std::vector<double>(6, 0.0)));
  std::vector<double> y2(9, 0.0);
  y2[8] = 2.0;
  outs.push_back(Tensor::from_values({3, 3}, y2));
  auto loss = md2ga::total_loss(blended, outs, truth, sched, 1);
  EXPECT_NEAR(loss.l1_value(), 0.5, 1e-12);
  EXPECT_NEAR(loss.total_value(), 0.5 + 4.0 / 3.0, 1e-12);
}

TEST(Mpjpe, PythagoreanTriple) {
  auto pred = MotionSequence::zeros(1, 1, 3);
  auto truth = MotionSequence::zeros(1, 1, 3);
  pred.at(0, 0, 0) = 3.0;
  pred.at(0, 0, 1) = 4.0;
  auto r = md2ga::mpjpe(pred, truth, 1, 1);
  ASSERT_EQ(r.per_frame_mpjpe.size(), 1u);
  EXPECT_DOUBLE_EQ(r.per_frame_mpjpe[0], 5.0);
  EXPECT_DOUBLE_EQ(r.average_mpjpe, 5.0);
}

TEST(Mpjpe, ZeroOnExactMatchAndJointMean) {
  auto pred = MotionSequence::zeros(1, 2, 2);
  auto truth = MotionSequence::zeros(1, 2, 2);
  EXPECT_DOUBLE_EQ(md2ga::mpjpe(pred, truth, 1, 1).average_mpjpe, 0.0);
  // joints with error norms 2 and 4 -> mean 3
  pred.at(0, 0, 0) = 2.0;
  pred.at(0, 1, 1) = 4.0;
  EXPECT_DOUBLE_EQ(md2ga::mpjpe(pred, truth, 1, 1).average_mpjpe, 3.0);
}

TEST(Mpjpe, InvariantUnderJointPermutation) {
  md2ga::Rng rng(7);
  auto pred = MotionSequence::zeros(4, 3, 3);
  auto truth = MotionSequence::zeros(4, 3, 3);
  for (auto& v : pred.coords) v = rng.uniform(-2, 2);
  for (auto& v : truth.coords) v = rng.uniform(-2, 2);
  auto permute = [](const MotionSequence& s) {
    auto out = s;
    const int perm[3] = {2, 0, 1};
    for (int t = 0; t < s.frames; ++t)
      for (int j = 0; j < 3; ++j)
        for (int d = 0; d < 3; ++d) out.at(t, j, d) = s.at(t, perm[j], d);
    return out;
  };
  auto a = md2ga::mpjpe(pred, truth, 1, 4);
  auto b = md2ga::mpjpe(permute(pred), permute(truth), 1, 4);
  for (size_t i = 0; i < a.per_frame_mpjpe.size(); ++i)
    EXPECT_DOUBLE_EQ(a.per_frame_mpjpe[i], b.per_frame_mpjpe[i]);
}

TEST(Mpjpe, RangeValidation) {
  auto pred = MotionSequence::zeros(3, 1, 2);
  auto truth = MotionSequence::zeros(3, 1, 2);
  EXPECT_THROW(md2ga::mpjpe(pred, truth, 2, 1), std::invalid_argument);
  EXPECT_THROW(md2ga::mpjpe(pred, truth, 1, 4), std::invalid_argument);
  EXPECT_THROW(md2ga::mpjpe(pred, truth, 0, 2), std::invalid_argument);
  auto sub = md2ga::mpjpe(pred, truth, 2, 3);
  EXPECT_EQ(sub.per_frame_mpjpe.size(), 2u);
  EXPECT_EQ(sub.first_frame, 2);
}

TEST(EvalReport, SerializesToCsvAndJson) {
  EvalReport r;
  r.mode = "blended";
  r.first_frame = 11;
  r.last_frame = 13;
  r.per_frame_mpjpe = {0.5, 0.25, 1.0};
  r.average_mpjpe = (0.5 + 0.25 + 1.0) / 3;
  auto csv = md2ga::eval_report_csv(r);
  EXPECT_EQ(csv, "frame,mpjpe\n11,0.5\n12,0.25\n13,1\n");
  auto j = md2ga::eval_report_json(r);
  EXPECT_EQ(j["mode"], "blended");
  EXPECT_EQ(j["per_frame_mpjpe"].size(), 3u);
  EXPECT_DOUBLE_EQ(j["average_mpjpe"].get<double>(), r.average_mpjpe);
}
