#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

namespace md2ga {

// T frames of J joints in D spatial dimensions, stored row-major (t, j, d).
// Indices here are 0-based; the 1-based frame numbering of the schedule
// contract only appears in mask/horizon arithmetic.
struct MotionSequence {
  int frames = 0;
  int joints = 0;
  int dims = 0;
  std::vector<double> coords;

  static MotionSequence zeros(int t, int j, int d) {
    MotionSequence m;
    m.frames = t;
    m.joints = j;
    m.dims = d;
    m.coords.assign(static_cast<size_t>(t) * j * d, 0.0);
    return m;
  }

  double& at(int t, int j, int d) {
    return coords[(static_cast<size_t>(t) * joints + j) * dims + d];
  }
  double at(int t, int j, int d) const {
    return coords[(static_cast<size_t>(t) * joints + j) * dims + d];
  }

  const double* frame(int t) const {
    return coords.data() + static_cast<size_t>(t) * joints * dims;
  }

  MotionSequence slice(int first, int count) const {
    MotionSequence out = zeros(count, joints, dims);
    const size_t stride = static_cast<size_t>(joints) * dims;
    std::copy(coords.begin() + static_cast<long>(first * stride),
              coords.begin() + static_cast<long>((first + count) * stride),
              out.coords.begin());
    return out;
  }

  bool all_finite() const {
    for (double v : coords)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

}  // namespace md2ga
