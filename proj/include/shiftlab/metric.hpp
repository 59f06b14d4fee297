#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>

#include "shiftlab/core.hpp"

namespace shiftlab {

enum class Metric { SupNorm, Euclidean };

inline std::string to_string(Metric m) {
  return m == Metric::SupNorm ? "sup-norm" : "euclidean";
}

inline double distance(Metric m, std::span<const double> a,
                       std::span<const double> b) {
  if (m == Metric::SupNorm) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
      d = std::max(d, std::abs(a[i] - b[i]));
    return d;
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a[i] - b[i];
    s += t * t;
  }
  return std::sqrt(s);
}

inline double norm(Metric m, std::span<const double> a) {
  if (m == Metric::SupNorm) {
    double d = 0.0;
    for (double v : a) d = std::max(d, std::abs(v));
    return d;
  }
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// Bounded metric space: dimension, metric, diameter.
struct MetricSpace {
  int dimension = 1;
  Metric metric = Metric::SupNorm;
  double diameter = 1.0;

  void validate() const {
    if (dimension < 1)
      throw ValidationError("metric space: dimension must be >= 1");
    if (!(diameter > 0.0))
      throw ValidationError("metric space: diameter must be positive");
  }

  double dist(std::span<const double> a, std::span<const double> b) const {
    return distance(metric, a, b);
  }
};

}  // namespace shiftlab
