#include "md2ga/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "md2ga/grad_check.hpp"
#include "md2ga/rng.hpp"

using md2ga::backward;
using md2ga::Tensor;

TEST(Matmul, IdentityLeavesVectorAlone) {
  auto eye = Tensor::from_values({2, 2}, {1, 0, 0, 1});
  auto v = Tensor::from_values({2, 1}, {3, 4});
  auto out = matmul(eye, v);
  EXPECT_EQ(out.shape(), (std::vector<int>{2, 1}));
  EXPECT_DOUBLE_EQ(out[0], 3.0);
  EXPECT_DOUBLE_EQ(out[1], 4.0);
}

TEST(Matmul, RowTimesColumn) {
  auto a = Tensor::from_values({1, 2}, {1, 2});
  auto b = Tensor::from_values({2, 1}, {3, 4});
  EXPECT_DOUBLE_EQ(matmul(a, b).item(), 11.0);
}

TEST(Matmul, IncompatibleInnerDimsThrow) {
  auto a = Tensor::zeros({2, 3});
  auto b = Tensor::zeros({4, 2});
  try {
    matmul(a, b);
    FAIL() << "expected shape error";
  } catch (const std::invalid_argument& e) {
    // the message should name both shapes
    EXPECT_NE(std::string(e.what()).find("(2x3)"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("(4x2)"), std::string::npos);
  }
}

TEST(Matmul, AssociativeOnRandomChains) {
  md2ga::Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    auto rand_mat = [&](int r, int c) {
      std::vector<double> v(static_cast<size_t>(r) * c);
      for (auto& x : v) x = rng.uniform(-2.0, 2.0);
      return Tensor::from_values({r, c}, std::move(v));
    };
    auto a = rand_mat(3, 5), b = rand_mat(5, 4), c = rand_mat(4, 2);
    auto left = matmul(matmul(a, b), c);
    auto right = matmul(a, matmul(b, c));
    for (size_t i = 0; i < left.size(); ++i) {
      double rel = std::abs(left[i] - right[i]) /
                   std::max({1.0, std::abs(left[i]), std::abs(right[i])});
      EXPECT_LT(rel, 1e-9);
    }
  }
}

TEST(Softmax, UniformOnEqualLogits) {
  auto out = softmax(Tensor::from_values({3}, {0, 0, 0}), 0);
  for (size_t i = 0; i < 3; ++i) EXPECT_NEAR(out[i], 1.0 / 3.0, 1e-15);
}

TEST(Softmax, HandValues) {
  auto out = softmax(Tensor::from_values({3}, {1, 2, 3}), 0);
  EXPECT_NEAR(out[0], 0.09003057, 1e-8);
  EXPECT_NEAR(out[1], 0.24472847, 1e-8);
  EXPECT_NEAR(out[2], 0.66524096, 1e-8);
}

TEST(Softmax, OverflowSafe) {
  auto out = softmax(Tensor::from_values({2}, {1000, 0}), 0);
  EXPECT_NEAR(out[0], 1.0, 1e-12);
  EXPECT_NEAR(out[1], 0.0, 1e-12);
}

TEST(Softmax, SlicesArePositiveAndSumToOne) {
  md2ga::Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(24);
    for (auto& x : v) x = rng.uniform(-30.0, 30.0);
    auto x = Tensor::from_values({2, 3, 4}, v);
    for (int axis = 0; axis < 3; ++axis) {
      auto s = softmax(x, axis);
      for (size_t i = 0; i < s.size(); ++i) EXPECT_GT(s[i], 0.0);
      // sum every slice along `axis`
      const int d0 = 2, d1 = 3, d2 = 4;
      auto at = [&](int i, int j, int k) {
        return s[static_cast<size_t>((i * d1 + j) * d2 + k)];
      };
      if (axis == 0) {
        for (int j = 0; j < d1; ++j)
          for (int k = 0; k < d2; ++k) {
            double sum = 0;
            for (int i = 0; i < d0; ++i) sum += at(i, j, k);
            EXPECT_NEAR(sum, 1.0, 1e-12);
          }
      } else if (axis == 1) {
        for (int i = 0; i < d0; ++i)
          for (int k = 0; k < d2; ++k) {
            double sum = 0;
            for (int j = 0; j < d1; ++j) sum += at(i, j, k);
            EXPECT_NEAR(sum, 1.0, 1e-12);
          }
      } else {
        for (int i = 0; i < d0; ++i)
          for (int j = 0; j < d1; ++j) {
            double sum = 0;
            for (int k = 0; k < d2; ++k) sum += at(i, j, k);
            EXPECT_NEAR(sum, 1.0, 1e-12);
          }
      }
    }
  }
}

TEST(Softmax, AxisOutOfRangeThrows) {
  auto x = Tensor::zeros({2, 2});
  EXPECT_THROW(softmax(x, 2), std::invalid_argument);
  EXPECT_THROW(softmax(x, -1), std::invalid_argument);
}

TEST(Backward, QuadraticGradient) {
  auto w = Tensor::from_values({2}, {1, 2}, /*requires_grad=*/true);
  backward(sum(mul(w, w)));
  EXPECT_DOUBLE_EQ(w.grad()[0], 2.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], 4.0);
}

TEST(Backward, ConstantLossLeavesGradZero) {
  auto w = Tensor::from_values({2}, {1, 2}, true);
  auto c = Tensor::from_values({2}, {5, 6});
  backward(sum(c));
  EXPECT_DOUBLE_EQ(w.grad()[0], 0.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], 0.0);
}

TEST(Backward, RepeatedCallsAccumulate) {
  auto w = Tensor::from_values({2}, {1, 2}, true);
  backward(sum(mul(w, w)));
  backward(sum(mul(w, w)));
  EXPECT_DOUBLE_EQ(w.grad()[0], 4.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], 8.0);
}

TEST(Backward, NonScalarLossThrows) {
  auto w = Tensor::from_values({2}, {1, 2}, true);
  EXPECT_THROW(backward(mul(w, w)), std::invalid_argument);
}

TEST(Backward, SharedSubexpressionCountedOnce) {
  // loss = sum(y) + sum(y) with y = w*w must give d/dw = 4w, not 8w
  auto w = Tensor::from_values({2}, {1, 2}, true);
  auto y = mul(w, w);
  backward(add(sum(y), sum(y)));
  EXPECT_DOUBLE_EQ(w.grad()[0], 4.0);
  EXPECT_DOUBLE_EQ(w.grad()[1], 8.0);
}

TEST(GradCheck, QuadraticPassesTightly) {
  auto w = Tensor::from_values({3}, {1.0, -2.0, 0.5}, true);
  auto report = md2ga::grad_check(
      [&] { return sum(mul(w, w)); }, {w}, 1e-5, 1e-4);
  EXPECT_TRUE(report.pass);
  EXPECT_LT(report.max_rel_error, 1e-7);
  EXPECT_DOUBLE_EQ(report.step, 1e-5);
  ASSERT_EQ(report.param_max_rel_error.size(), 1u);
}

TEST(GradCheck, ZeroGradientLossReportsZeroError) {
  auto w = Tensor::from_values({2}, {1, 2}, true);
  auto c = Tensor::from_values({1}, {3});
  auto report = md2ga::grad_check([&] { return sum(c); }, {w}, 1e-5, 1e-4);
  EXPECT_TRUE(report.pass);
  EXPECT_DOUBLE_EQ(report.max_rel_error, 0.0);
}

TEST(GradCheck, DetectsCorruptedGradient) {
  auto w = Tensor::from_values({2}, {1.0, 2.0}, true);
  // identity op whose backward adds a bogus extra +1 per element
  auto corrupt = [](const Tensor& x) {
    std::vector<double> v(x.values().begin(), x.values().end());
    return Tensor::from_op(x.shape(), std::move(v), {x},
                           [](md2ga::detail::TensorNode& self) {
                             auto& p = *self.parents[0];
                             for (size_t i = 0; i < p.grad.size(); ++i)
                               p.grad[i] += self.grad[i] + 1.0;
                           });
  };
  auto report =
      md2ga::grad_check([&] { return sum(mul(corrupt(w), corrupt(w))); }, {w},
                        1e-5, 1e-4);
  EXPECT_FALSE(report.pass);
  EXPECT_GT(report.max_rel_error, 0.1);
}

TEST(GradCheck, CompositeOfAllOpsPasses) {
  // exercises matmul, add_row_bias, relu, softmax, transpose, reshape,
  // add, sub, mul, scale, sse_scaled in one graph
  md2ga::Rng rng(23);
  auto rand_tensor = [&](std::vector<int> shape) {
    std::vector<double> v(md2ga::detail::numel(shape));
    for (auto& x : v) x = rng.uniform(0.2, 1.5);  // keep relu away from its kink
    return Tensor::from_values(std::move(shape), std::move(v), true);
  };
  auto x = rand_tensor({3, 4});
  auto w1 = rand_tensor({4, 5});
  auto b1 = rand_tensor({5});
  auto w2 = rand_tensor({3, 5});
  auto target = Tensor::from_values({5, 3}, std::vector<double>(15, 0.3));

  auto loss_fn = [&] {
    auto h = relu(add_row_bias(matmul(x, w1), b1));       // 3x5
    auto s = softmax(h, 1);                               // 3x5
    auto mixed = sub(mul(s, w2), scale(add(s, w2), 0.1)); // 3x5
    auto flat = reshape(transpose(mixed), {5, 3});        // 5x3
    return sse_scaled(flat, target, 0.5);
  };
  auto report = md2ga::grad_check(loss_fn, {x, w1, b1, w2}, 1e-5, 1e-4);
  EXPECT_TRUE(report.pass) << "max rel error " << report.max_rel_error;
}

TEST(Ops, AddRowBiasBroadcastsPerRow) {
  auto x = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = Tensor::from_values({3}, {10, 20, 30});
  auto out = add_row_bias(x, b);
  std::vector<double> want{11, 22, 33, 14, 25, 36};
  for (size_t i = 0; i < want.size(); ++i) EXPECT_DOUBLE_EQ(out[i], want[i]);
}

TEST(Ops, TransposeRoundTrips) {
  auto x = Tensor::from_values({2, 3}, {1, 2, 3, 4, 5, 6});
  auto tt = transpose(transpose(x));
  for (size_t i = 0; i < x.size(); ++i) EXPECT_DOUBLE_EQ(tt[i], x[i]);
  EXPECT_DOUBLE_EQ(transpose(x)[1], 4.0);  // (0,1) of 3x2 view
}

TEST(Ops, SseScaledMatchesHandValue) {
  auto p = Tensor::from_values({2}, {1, 2});
  auto t = Tensor::from_values({2}, {0, 4});
  // 0.5 * (1 + 4) = 2.5
  EXPECT_DOUBLE_EQ(md2ga::sse_scaled(p, t, 0.5).item(), 2.5);
}

TEST(Ops, ShapeMismatchesThrow) {
  auto a = Tensor::zeros({2, 2});
  auto b = Tensor::zeros({2, 3});
  EXPECT_THROW(add(a, b), std::invalid_argument);
  EXPECT_THROW(sub(a, b), std::invalid_argument);
  EXPECT_THROW(mul(a, b), std::invalid_argument);
  EXPECT_THROW(reshape(a, {3, 3}), std::invalid_argument);
  EXPECT_THROW(md2ga::sse_scaled(a, b, 1.0), std::invalid_argument);
}

TEST(Rng, DeterministicStreams) {
  md2ga::Rng a(42), b(42);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a.next_u64(), b.next_u64());
  EXPECT_NE(md2ga::derive_seed(42, 0), md2ga::derive_seed(42, 1));
  EXPECT_EQ(md2ga::derive_seed(42, 3), md2ga::derive_seed(42, 3));
}

TEST(Rng, NormalMomentsRoughlyRight) {
  md2ga::Rng rng(5);
  double sum = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal(0.0, 1.0);
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.05);
  EXPECT_NEAR(sq / n, 1.0, 0.05);
}

TEST(Rng, ShuffleIsAPermutation) {
  md2ga::Rng rng(9);
  std::vector<int> v(50);
  for (int i = 0; i < 50; ++i) v[static_cast<size_t>(i)] = i;
  auto orig = v;
  rng.shuffle(v);
  EXPECT_NE(v, orig);  // 1/50! odds of flaking
  std::sort(v.begin(), v.end());
  EXPECT_EQ(v, orig);
}
