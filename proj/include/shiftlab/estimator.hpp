#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shiftlab/chains.hpp"
#include "shiftlab/core.hpp"
#include "shiftlab/metric.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab::estimator {

// ---------------------------------------------------------------------------
// Holder test functions

struct HolderSpec {
  double beta = 1.0;  // smoothness in (0, 1]
  double L = 1.0;     // Holder constant
  std::string id = "sine";

  void validate() const {
    if (!(beta > 0.0 && beta <= 1.0))
      throw ValidationError("holder: beta must lie in (0,1]");
    if (!(L > 0.0)) throw ValidationError("holder: L must be positive");
  }
};

struct RegressionFn {
  HolderSpec spec;
  std::function<double(std::span<const double>)> f;
  double operator()(std::span<const double> x) const { return f(x); }
};

namespace detail {

// Weight vector with unit dual norm, so <w, x-y> <= d(x,y).
inline std::vector<double> dual_unit_weights(const MetricSpace& space) {
  const int d = space.dimension;
  std::vector<double> w(static_cast<std::size_t>(d));
  const double v = space.metric == Metric::SupNorm
                       ? 1.0 / d
                       : 1.0 / std::sqrt(static_cast<double>(d));
  std::fill(w.begin(), w.end(), v);
  return w;
}

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace detail

// Registered (beta, L)-Holder test functions:
//   power: L ||x||^beta            ridge: L |<w,x>|^beta, ||w||_dual = 1
//   sine : (L/2pi) sin(2pi <w,x>)  (beta = 1 only)
inline RegressionFn holder_library(const std::string& name, double beta,
                                   double L, const MetricSpace& space) {
  HolderSpec spec{beta, L, name};
  spec.validate();
  space.validate();
  const Metric metric = space.metric;
  if (name == "power") {
    return {spec, [metric, beta, L](std::span<const double> x) {
              return L * std::pow(norm(metric, x), beta);
            }};
  }
  if (name == "ridge") {
    auto w = detail::dual_unit_weights(space);
    return {spec, [w, beta, L](std::span<const double> x) {
              return L * std::pow(std::abs(detail::dot(w, x)), beta);
            }};
  }
  if (name == "sine") {
    if (beta != 1.0)
      throw ValidationError("holder library: sine is registered at beta = 1");
    auto w = detail::dual_unit_weights(space);
    return {spec, [w, L](std::span<const double> x) {
              const double t = 2.0 * std::numbers::pi * detail::dot(w, x);
              return L / (2.0 * std::numbers::pi) * std::sin(t);
            }};
  }
  if (name == "zero") {
    return {spec, [](std::span<const double>) { return 0.0; }};
  }
  if (name == "constant") {
    return {spec, [L](std::span<const double>) { return L; }};
  }
  throw ValidationError("holder library: unknown test function '" + name + "'");
}

// Random-pair certificate that |f(x)-f(y)| <= L d(x,y)^beta on [0,1]^d.
struct HolderAudit {
  bool ok = true;
  double worst_ratio = 0.0;  // max |f(x)-f(y)| / (L d(x,y)^beta)
  std::vector<double> witness_x, witness_y;
};

inline HolderAudit holder_audit(const RegressionFn& fn,
                                const MetricSpace& space, int n_pairs,
                                std::uint64_t seed, double slack = 1e-9) {
  RngStream rng(seed, "holder.audit");
  const int d = space.dimension;
  HolderAudit audit;
  std::vector<double> x(static_cast<std::size_t>(d)),
      y(static_cast<std::size_t>(d));
  for (int i = 0; i < n_pairs; ++i) {
    for (auto& v : x) v = rng.uniform();
    for (auto& v : y) v = rng.uniform();
    const double dist = space.dist(x, y);
    if (dist == 0.0) continue;
    const double lhs = std::abs(fn(x) - fn(y));
    const double ratio =
        lhs / (fn.spec.L * std::pow(dist, fn.spec.beta));
    if (ratio > audit.worst_ratio) {
      audit.worst_ratio = ratio;
      audit.witness_x = x;
      audit.witness_y = y;
    }
  }
  audit.ok = audit.worst_ratio <= 1.0 + slack;
  return audit;
}

// ---------------------------------------------------------------------------
// Uniform-kernel estimator

// Local average of responses over the closed h-ball around the query; zero
// outside the covered region (the union of training balls). Ball membership
// uses closed balls: a query exactly at distance h counts as inside.
struct FittedNW {
  MetricSpace space;
  double h = 0.0;
  std::vector<double> x;  // n * d, training order fixed
  std::vector<double> y;  // n

  std::size_t size() const { return y.size(); }

  void validate() const {
    if (!(h > 0.0)) throw ValidationError("nw: bandwidth must be positive");
    if (y.empty()) throw ValidationError("nw: empty training set");
    if (x.size() != y.size() * static_cast<std::size_t>(space.dimension))
      throw ValidationError("nw: covariate/response size mismatch");
  }
};

inline FittedNW fit_nw(const MetricSpace& space, double h,
                       std::span<const chains::StatePath* const> blocks) {
  FittedNW m;
  m.space = space;
  m.h = h;
  for (const auto* p : blocks) {
    if (!p || p->size() == 0) continue;
    if (!p->has_responses())
      throw ValidationError("nw: training path lacks responses");
    if (p->dim != space.dimension)
      throw ValidationError("nw: path dimension mismatch");
    m.x.insert(m.x.end(), p->states.begin(), p->states.end());
    m.y.insert(m.y.end(), p->responses.begin(), p->responses.end());
  }
  m.validate();
  return m;
}

inline double nw_predict(const FittedNW& m, std::span<const double> q) {
  const int d = m.space.dimension;
  const std::size_t n = m.size();
  const Metric metric = m.space.metric;
  const double h = m.h;
  long long count = 0;
  KahanSum sum;
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<const double> xi{m.x.data() + i * static_cast<std::size_t>(d),
                                     static_cast<std::size_t>(d)};
    if (distance(metric, xi, q) <= h) {
      ++count;
      sum.add(m.y[i]);
    }
  }
  return count > 0 ? sum.value() / static_cast<double>(count) : 0.0;
}

// ---------------------------------------------------------------------------
// Bandwidth rules

// h_n = (n_Q + n_P^{(2 beta + zeta)/(2 beta + alpha)})^{-1/(2 beta + zeta)}
// with zeta = d for alpha >= d and zeta = alpha' for alpha < d.
inline double bandwidth_alpha(double n_p, double n_q, double beta, double alpha,
                              std::optional<double> alpha_prime, int d) {
  if (n_p < 1.0 && n_q < 1.0)
    throw ValidationError("bandwidth: needs at least one block");
  if (!(beta > 0.0 && beta <= 1.0))
    throw ValidationError("bandwidth: beta must lie in (0,1]");
  if (alpha < 0.0 || d < 1) throw ValidationError("bandwidth: bad alpha or d");
  double zeta;
  if (alpha >= static_cast<double>(d)) {
    zeta = static_cast<double>(d);
  } else {
    if (!alpha_prime)
      throw ValidationError("bandwidth: alpha < d requires alpha'");
    if (*alpha_prime > alpha)
      throw ValidationError("bandwidth: alpha' must not exceed alpha");
    zeta = *alpha_prime;
  }
  const double expo = (2.0 * beta + zeta) / (2.0 * beta + alpha);
  const double base = n_q + std::pow(n_p, expo);
  return std::pow(base, -1.0 / (2.0 * beta + zeta));
}

struct EffectiveSampleSize {
  double value = 0.0;
  double max_ratio = 1.0;          // max_i pi^Q_i / pi^P_i
  bool p_block_discarded = false;  // ratio infinite: P block contributes 0
};

// n_eff = n_P / max_i(pi^Q_i / pi^P_i) + n_Q.
inline EffectiveSampleSize effective_sample_size(double n_p, double n_q,
                                                 std::span<const double> pi_p,
                                                 std::span<const double> pi_q) {
  if (pi_p.size() != pi_q.size() || pi_p.empty())
    throw ValidationError("effective sample size: law size mismatch");
  EffectiveSampleSize out;
  double ratio = 0.0;
  for (std::size_t i = 0; i < pi_p.size(); ++i) {
    if (pi_p[i] <= 0.0) {
      if (pi_q[i] > 0.0) {
        out.p_block_discarded = true;
        ratio = std::numeric_limits<double>::infinity();
        break;
      }
      continue;
    }
    ratio = std::max(ratio, pi_q[i] / pi_p[i]);
  }
  out.max_ratio = ratio;
  out.value = (out.p_block_discarded ? 0.0 : n_p / ratio) + n_q;
  return out;
}

// h_n = c (n_eff^{-1/2} ∧ delta).
inline double bandwidth_finite(double n_eff, double delta, double c) {
  if (!(c > 0.0 && c < 1.0))
    throw ValidationError("bandwidth finite: c must lie in (0,1)");
  if (!(n_eff > 0.0) || !(delta > 0.0))
    throw ValidationError("bandwidth finite: invalid arguments");
  return c * std::min(1.0 / std::sqrt(n_eff), delta);
}

}  // namespace shiftlab::estimator
