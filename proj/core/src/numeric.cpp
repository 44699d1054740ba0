#include "sstem/numeric.hpp"

#include <algorithm>
#include <cmath>

#include "sstem/error.hpp"

namespace sstem {

double accurate_mean(std::span<const double> values) {
  if (values.empty()) throw Error(ErrorCode::kInvalidArgument, "mean of empty range");
  // Neumaier summation keeps the rounding error of every addition in `lo`.
  double hi = 0.0;
  double lo = 0.0;
  for (double v : values) {
    const double t = hi + v;
    if (std::abs(hi) >= std::abs(v)) {
      lo += (hi - t) + v;
    } else {
      lo += (v - t) + hi;
    }
    hi = t;
  }
  const double n = static_cast<double>(values.size());
  const double q = hi / n;
  const double r = std::fma(-q, n, hi);  // exact remainder of hi / n
  return q + (r + lo) / n;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::kInvalidArgument, "cosine of vectors with different dimensions");
  }
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

double clamp_unit(double value) { return std::clamp(value, 0.0, 1.0); }

}  // namespace sstem
