#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/core.hpp"
#include "shiftlab/metric.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab::chains {

// ---------------------------------------------------------------------------
// Paths

// An ordered chain sample, optionally with responses attached. Regeneration
// contract: the same (spec, seed) always reproduces the identical path.
struct StatePath {
  int dim = 1;
  std::uint64_t seed = 0;
  std::vector<double> states;     // size() * dim, row-major
  std::vector<double> responses;  // empty, or one response per state

  std::size_t size() const {
    return dim > 0 ? states.size() / static_cast<std::size_t>(dim) : 0;
  }
  std::span<const double> state(std::size_t i) const {
    return {states.data() + i * static_cast<std::size_t>(dim),
            static_cast<std::size_t>(dim)};
  }
  bool has_responses() const { return !responses.empty(); }

  void validate() const {
    if (dim < 1) throw ValidationError("path: dim must be >= 1");
    if (states.size() % static_cast<std::size_t>(dim) != 0)
      throw ValidationError("path: state storage not a multiple of dim");
    if (!responses.empty() && responses.size() != size())
      throw ValidationError("path: responses length mismatch");
  }
};

// ---------------------------------------------------------------------------
// Distribution descriptors (initial laws, independence kernels, warm starts)

// Product of uniforms on [lo_i, hi_i]; lo_i == hi_i pins that coordinate.
struct UniformBox {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const {
    if (lo.empty() || lo.size() != hi.size())
      throw ValidationError("uniform-box: lo/hi must be nonempty and matched");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i])
        throw ValidationError("uniform-box: lo must not exceed hi");
  }
};

// Independent Beta(a_i, 1) coordinates on the first k dims of [0,1]^ambient,
// remaining coordinates identically 0.
struct BetaProduct {
  std::vector<double> alphas;
  int ambient_dim = 0;  // 0 means alphas.size()
  int dim() const {
    return ambient_dim > 0 ? ambient_dim : static_cast<int>(alphas.size());
  }
  void validate() const {
    if (alphas.empty()) throw ValidationError("beta-product: needs alphas");
    for (double a : alphas)
      if (!(a > 0.0))
        throw ValidationError("beta-product: alphas must be positive");
    if (ambient_dim > 0 && ambient_dim < static_cast<int>(alphas.size()))
      throw ValidationError("beta-product: ambient_dim smaller than alphas");
  }
};

struct PointMass {
  std::vector<double> x;
  int dim() const { return static_cast<int>(x.size()); }
  void validate() const {
    if (x.empty()) throw ValidationError("point-mass: empty point");
  }
};

using DistDescriptor = std::variant<UniformBox, BetaProduct, PointMass>;

inline int dim(const DistDescriptor& d) {
  return std::visit([](const auto& v) { return v.dim(); }, d);
}

inline void validate(const DistDescriptor& d) {
  std::visit([](const auto& v) { v.validate(); }, d);
}

// Inverse CDF of Beta(a, 1) at u.
inline double beta_inverse_cdf(double a, double u) {
  return std::pow(u, 1.0 / a);
}

inline void draw(const DistDescriptor& d, RngStream& rng, double* out) {
  if (const auto* b = std::get_if<UniformBox>(&d)) {
    for (std::size_t i = 0; i < b->lo.size(); ++i)
      out[i] = b->lo[i] == b->hi[i] ? b->lo[i]
                                    : rng.uniform(b->lo[i], b->hi[i]);
  } else if (const auto* p = std::get_if<BetaProduct>(&d)) {
    const int n = p->dim();
    const int k = static_cast<int>(p->alphas.size());
    for (int i = 0; i < k; ++i)
      out[i] = beta_inverse_cdf(p->alphas[static_cast<std::size_t>(i)],
                                rng.uniform_pos());
    for (int i = k; i < n; ++i) out[i] = 0.0;
  } else {
    const auto& pm = std::get<PointMass>(d);
    std::copy(pm.x.begin(), pm.x.end(), out);
  }
}

// ---------------------------------------------------------------------------
// Finite kernels

struct FiniteKernel {
  Eigen::MatrixXd transition;  // K x K, row-stochastic
  Eigen::MatrixXd states;      // K x d, embedding of the atoms

  int size() const { return static_cast<int>(transition.rows()); }
  int dim() const { return static_cast<int>(states.cols()); }

  Eigen::RowVectorXd state_row(int i) const { return states.row(i); }

  // Smallest pairwise distance between distinct atoms.
  double min_gap(Metric m = Metric::SupNorm) const {
    const int K = size();
    double best = std::numeric_limits<double>::infinity();
    std::vector<double> a(static_cast<std::size_t>(dim())),
        b(static_cast<std::size_t>(dim()));
    for (int i = 0; i < K; ++i) {
      for (int j = i + 1; j < K; ++j) {
        for (int c = 0; c < dim(); ++c) {
          a[static_cast<std::size_t>(c)] = states(i, c);
          b[static_cast<std::size_t>(c)] = states(j, c);
        }
        best = std::min(best, distance(m, a, b));
      }
    }
    return best;
  }

  void validate(double tol = 1e-12) const {
    const int K = size();
    if (K < 1) throw ValidationError("finite kernel: empty transition matrix");
    if (transition.cols() != K)
      throw ValidationError("finite kernel: transition matrix must be square");
    if (states.rows() != K)
      throw ValidationError("finite kernel: one embedded point per state");
    for (int i = 0; i < K; ++i) {
      double row = 0.0;
      for (int j = 0; j < K; ++j) {
        const double p = transition(i, j);
        if (p < -tol || p > 1.0 + tol)
          throw ValidationError("finite kernel: entries must lie in [0,1]");
        row += p;
      }
      if (std::abs(row - 1.0) > tol)
        throw ValidationError("finite kernel: row " + std::to_string(i) +
                              " sums to " + std::to_string(row));
    }
    if (K > 1 && !(min_gap() > 0.0))
      throw ValidationError("finite kernel: embedded atoms must be distinct");
  }
};

namespace detail {

inline std::vector<int> reachable(const Eigen::MatrixXd& t, int from,
                                  bool reverse) {
  const int K = static_cast<int>(t.rows());
  std::vector<int> seen(static_cast<std::size_t>(K), 0);
  std::vector<int> stack{from};
  seen[static_cast<std::size_t>(from)] = 1;
  while (!stack.empty()) {
    const int u = stack.back();
    stack.pop_back();
    for (int v = 0; v < K; ++v) {
      const double p = reverse ? t(v, u) : t(u, v);
      if (p > 0.0 && !seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        stack.push_back(v);
      }
    }
  }
  return seen;
}

}  // namespace detail

inline bool is_irreducible(const FiniteKernel& k) {
  const auto fwd = detail::reachable(k.transition, 0, false);
  const auto bwd = detail::reachable(k.transition, 0, true);
  for (int s : fwd)
    if (!s) return false;
  for (int s : bwd)
    if (!s) return false;
  return true;
}

// gcd of cycle lengths through state 0 (valid on irreducible kernels).
inline int period(const FiniteKernel& k) {
  const int K = k.size();
  std::vector<int> depth(static_cast<std::size_t>(K), -1);
  std::vector<int> queue{0};
  depth[0] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const int u = queue[head];
    for (int v = 0; v < K; ++v) {
      if (k.transition(u, v) > 0.0 && depth[static_cast<std::size_t>(v)] < 0) {
        depth[static_cast<std::size_t>(v)] = depth[static_cast<std::size_t>(u)] + 1;
        queue.push_back(v);
      }
    }
  }
  int g = 0;
  for (int u = 0; u < K; ++u) {
    if (depth[static_cast<std::size_t>(u)] < 0) continue;
    for (int v = 0; v < K; ++v) {
      if (k.transition(u, v) > 0.0 && depth[static_cast<std::size_t>(v)] >= 0)
        g = std::gcd(g, depth[static_cast<std::size_t>(u)] + 1 -
                            depth[static_cast<std::size_t>(v)]);
    }
  }
  return g == 0 ? 1 : std::abs(g);
}

inline bool is_aperiodic(const FiniteKernel& k) { return period(k) == 1; }

// Invariant law of an irreducible kernel (periodicity allowed); used where
// only the stationary vector itself is needed.
inline Eigen::VectorXd invariant_law_irreducible(const FiniteKernel& k) {
  k.validate();
  if (!is_irreducible(k))
    throw ValidationError("stationary law: kernel is reducible");
  const int K = k.size();
  Eigen::MatrixXd a = k.transition.transpose() - Eigen::MatrixXd::Identity(K, K);
  a.row(K - 1).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(K);
  b(K - 1) = 1.0;
  Eigen::VectorXd pi = a.colPivHouseholderQr().solve(b);
  const double resid = (k.transition.transpose() * pi - pi).cwiseAbs().maxCoeff();
  if (resid > 1e-10)
    throw ValidationError("stationary law: linear solve residual " +
                          std::to_string(resid));
  for (int i = 0; i < K; ++i)
    if (!(pi(i) > 0.0))
      throw ValidationError("stationary law: entry " + std::to_string(i) +
                            " not strictly positive");
  pi /= pi.sum();
  return pi;
}

// Invariant law: solves pi^T P = pi^T, sum(pi) = 1 by a direct linear solve.
// Irreducibility and aperiodicity are both required here.
inline Eigen::VectorXd stationary_finite(const FiniteKernel& k) {
  k.validate();
  if (!is_irreducible(k))
    throw ValidationError("stationary law: kernel is reducible");
  if (!is_aperiodic(k))
    throw ValidationError("stationary law: kernel is periodic (period " +
                          std::to_string(period(k)) + ")");
  return invariant_law_irreducible(k);
}

// Exact L^p(pi) norm of the density ratio dmu/dpi on a finite space.
inline double warm_norm_finite(const Eigen::VectorXd& mu,
                               const Eigen::VectorXd& pi, double p) {
  if (mu.size() != pi.size())
    throw ValidationError("warm norm: mu/pi size mismatch");
  if (std::isinf(p)) {
    double m = 0.0;
    for (int i = 0; i < mu.size(); ++i) {
      if (pi(i) <= 0.0 && mu(i) > 0.0)
        return std::numeric_limits<double>::infinity();
      if (pi(i) > 0.0) m = std::max(m, mu(i) / pi(i));
    }
    return m;
  }
  if (!(p > 1.0)) throw ValidationError("warm norm: exponent must be > 1");
  double s = 0.0;
  for (int i = 0; i < mu.size(); ++i) {
    if (pi(i) <= 0.0) {
      if (mu(i) > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    s += pi(i) * std::pow(mu(i) / pi(i), p);
  }
  return std::pow(s, 1.0 / p);
}

namespace detail {

struct CumRows {
  std::vector<double> cum;  // K rows of K cumulative weights
  int K = 0;
  explicit CumRows(const Eigen::MatrixXd& t)
      : cum(static_cast<std::size_t>(t.rows() * t.cols())),
        K(static_cast<int>(t.rows())) {
    for (int i = 0; i < K; ++i) {
      double acc = 0.0;
      for (int j = 0; j < K; ++j) {
        acc += t(i, j);
        cum[static_cast<std::size_t>(i * K + j)] = acc;
      }
    }
  }
  std::span<const double> row(int i) const {
    return {cum.data() + static_cast<std::size_t>(i) * K,
            static_cast<std::size_t>(K)};
  }
};

inline std::vector<double> cumulative(const Eigen::VectorXd& p) {
  std::vector<double> c(static_cast<std::size_t>(p.size()));
  double acc = 0.0;
  for (int i = 0; i < p.size(); ++i) {
    acc += p(i);
    c[static_cast<std::size_t>(i)] = acc;
  }
  return c;
}

}  // namespace detail

// State-index sample of a finite chain; building block for sample_finite_path.
inline std::vector<int> sample_finite_indices(const FiniteKernel& k,
                                              const Eigen::VectorXd& init,
                                              long long n, std::uint64_t seed) {
  k.validate();
  if (init.size() != k.size())
    throw ValidationError("finite path: init length mismatch");
  if (std::abs(init.sum() - 1.0) > 1e-12 || init.minCoeff() < -1e-15)
    throw ValidationError("finite path: init must be a probability vector");
  if (n < 1) throw ValidationError("finite path: n must be >= 1");
  RngStream rng(seed);
  const detail::CumRows rows(k.transition);
  const auto init_cum = detail::cumulative(init);
  std::vector<int> idx(static_cast<std::size_t>(n));
  int s = static_cast<int>(rng.categorical_cum(init_cum));
  idx[0] = s;
  for (long long t = 1; t < n; ++t) {
    s = static_cast<int>(rng.categorical_cum(rows.row(s)));
    idx[static_cast<std::size_t>(t)] = s;
  }
  return idx;
}

inline StatePath sample_finite_path(const FiniteKernel& k,
                                    const Eigen::VectorXd& init, long long n,
                                    std::uint64_t seed) {
  const auto idx = sample_finite_indices(k, init, n, seed);
  StatePath path;
  path.dim = k.dim();
  path.seed = seed;
  path.states.resize(static_cast<std::size_t>(n) * path.dim);
  for (long long t = 0; t < n; ++t)
    for (int c = 0; c < path.dim; ++c)
      path.states[static_cast<std::size_t>(t) * path.dim + c] =
          k.states(idx[static_cast<std::size_t>(t)], c);
  return path;
}

// ---------------------------------------------------------------------------
// Continuous kernel families on [0,1]^d

// One step of the scalar chain X' = F^{-1}_{gamma + x}(u) where F_g is the
// CDF of Beta(1 + g, 1): returns u^{1/(1 + gamma + x)}.
inline double beta_chain_step(double x, double gamma, double u) {
  return beta_inverse_cdf(1.0 + gamma + x, u);
}

struct BetaChainSpec {
  double gamma_base = 0.0;
  void validate() const {
    if (gamma_base < 0.0)
      throw ValidationError("beta chain: gamma must be >= 0");
  }
};

enum class Modulation { Constant, Affine };

// Coordinatewise beta chain: coordinate i refreshes from Beta(g_i * iota_i(x), 1)
// with a modulation iota_i mapping into [floor_eps, 1]. Affine modulation is
// iota_i(x) = eps + (1 - eps) x_i; Constant is iota_i == constant_value.
struct ProductBetaSpec {
  std::vector<double> gammas;  // in (0,1), one per coordinate
  double floor_eps = 1.0;
  Modulation modulation = Modulation::Constant;
  double constant_value = 1.0;

  int dim() const { return static_cast<int>(gammas.size()); }
  void validate() const {
    if (gammas.empty()) throw ValidationError("product beta: needs gammas");
    for (double g : gammas)
      if (!(g > 0.0 && g < 1.0))
        throw ValidationError("product beta: gammas must lie in (0,1)");
    if (!(floor_eps > 0.0 && floor_eps <= 1.0))
      throw ValidationError("product beta: floor must lie in (0,1]");
    if (modulation == Modulation::Constant &&
        (constant_value < floor_eps || constant_value > 1.0))
      throw ValidationError("product beta: constant modulation outside [eps,1]");
  }
  double iota(double xi) const {
    return modulation == Modulation::Constant
               ? constant_value
               : floor_eps + (1.0 - floor_eps) * xi;
  }
};

struct IndependenceSpec {
  DistDescriptor dist;
  int dim() const { return chains::dim(dist); }
  void validate() const { chains::validate(dist); }
};

// Inner chain on [0,1]^{d_inner} embedded by zero-padding into [0,1]^ambient.
struct EmbeddedSpec {
  std::variant<BetaChainSpec, ProductBetaSpec, IndependenceSpec> inner;
  int ambient_dim = 0;

  int inner_dim() const {
    if (std::holds_alternative<BetaChainSpec>(inner)) return 1;
    if (const auto* p = std::get_if<ProductBetaSpec>(&inner)) return p->dim();
    return std::get<IndependenceSpec>(inner).dim();
  }
  void validate() const {
    std::visit([](const auto& s) { s.validate(); }, inner);
    if (ambient_dim < inner_dim())
      throw ValidationError("embedded chain: ambient dim smaller than inner");
  }
};

using ContinuousKernelSpec =
    std::variant<BetaChainSpec, ProductBetaSpec, IndependenceSpec, EmbeddedSpec>;

inline int ambient_dim(const ContinuousKernelSpec& spec) {
  if (std::holds_alternative<BetaChainSpec>(spec)) return 1;
  if (const auto* p = std::get_if<ProductBetaSpec>(&spec)) return p->dim();
  if (const auto* i = std::get_if<IndependenceSpec>(&spec)) return i->dim();
  return std::get<EmbeddedSpec>(spec).ambient_dim;
}

inline void validate(const ContinuousKernelSpec& spec) {
  std::visit([](const auto& s) { s.validate(); }, spec);
}

// In-place transition of the chain described by `spec`.
inline void step_continuous(const ContinuousKernelSpec& spec, RngStream& rng,
                            double* x) {
  if (const auto* b = std::get_if<BetaChainSpec>(&spec)) {
    x[0] = beta_chain_step(x[0], b->gamma_base, rng.uniform_pos());
  } else if (const auto* p = std::get_if<ProductBetaSpec>(&spec)) {
    const int d = p->dim();
    for (int i = 0; i < d; ++i) {
      const double a = p->gammas[static_cast<std::size_t>(i)] * p->iota(x[i]);
      x[i] = beta_inverse_cdf(a, rng.uniform_pos());
    }
  } else if (const auto* ind = std::get_if<IndependenceSpec>(&spec)) {
    draw(ind->dist, rng, x);
  } else {
    const auto& e = std::get<EmbeddedSpec>(spec);
    std::visit(
        [&](const auto& s) {
          ContinuousKernelSpec inner = s;
          step_continuous(inner, rng, x);
        },
        e.inner);
    for (int i = e.inner_dim(); i < e.ambient_dim; ++i) x[i] = 0.0;
  }
}

// ---------------------------------------------------------------------------
// Warm starts

// Initial law mu with warm-start bookkeeping. For continuous families the
// stationary law has no closed form, so a stationary start is realised by a
// long-run burn-in; density_ratio_norm is then user-asserted.
struct WarmStart {
  bool stationary = true;
  std::optional<DistDescriptor> init;  // explicit mu (continuous chains)
  std::vector<double> finite_law;      // explicit mu (finite chains)
  double density_ratio_norm = 1.0;     // ||dmu/dpi||_{L^p(pi)}
  double exponent_p = std::numeric_limits<double>::infinity();
  bool norm_asserted = false;
  int burn_in = 1000;

  void validate() const {
    if (density_ratio_norm < 1.0)
      throw ValidationError("warm start: density ratio norm must be >= 1");
    if (!(exponent_p > 1.0))
      throw ValidationError("warm start: exponent must lie in (1, inf]");
    if (!stationary && !init && finite_law.empty())
      throw ValidationError("warm start: non-stationary start needs a law");
    if (burn_in < 0) throw ValidationError("warm start: negative burn-in");
    if (stationary &&
        (density_ratio_norm != 1.0 || !std::isinf(exponent_p)))
      throw ValidationError("warm start: stationary start has norm 1, p = inf");
  }
};

// Conjugate Holder exponent: p/(p-1) for finite p, 1 for p = inf.
inline double conjugate_exponent(double p) {
  if (std::isinf(p)) return 1.0;
  if (!(p > 1.0)) throw ValidationError("conjugate exponent needs p > 1");
  return p / (p - 1.0);
}

// Initialise the state of a continuous chain according to a warm start.
inline void init_continuous(const ContinuousKernelSpec& spec,
                            const WarmStart& start, RngStream& rng, double* x) {
  const int d = ambient_dim(spec);
  if (start.stationary) {
    for (int i = 0; i < d; ++i) x[i] = rng.uniform();
    if (const auto* e = std::get_if<EmbeddedSpec>(&spec))
      for (int i = e->inner_dim(); i < e->ambient_dim; ++i) x[i] = 0.0;
    for (int b = 0; b < start.burn_in; ++b) step_continuous(spec, rng, x);
  } else {
    if (chains::dim(*start.init) != d)
      throw ValidationError("warm start: law dimension mismatch");
    draw(*start.init, rng, x);
  }
}

inline StatePath sample_continuous_path(const ContinuousKernelSpec& spec,
                                        const WarmStart& start, long long n,
                                        std::uint64_t seed) {
  validate(spec);
  start.validate();
  if (n < 1) throw ValidationError("continuous path: n must be >= 1");
  const int d = ambient_dim(spec);
  StatePath path;
  path.dim = d;
  path.seed = seed;
  path.states.resize(static_cast<std::size_t>(n) * d);
  RngStream rng(seed);
  std::vector<double> x(static_cast<std::size_t>(d));
  init_continuous(spec, start, rng, x.data());
  for (long long t = 0; t < n; ++t) {
    step_continuous(spec, rng, x.data());
    std::copy(x.begin(), x.end(),
              path.states.begin() + static_cast<std::size_t>(t) * d);
  }
  return path;
}

inline StatePath sample_continuous_path(const ContinuousKernelSpec& spec,
                                        std::span<const double> init_point,
                                        long long n, std::uint64_t seed) {
  validate(spec);
  const int d = ambient_dim(spec);
  if (static_cast<int>(init_point.size()) != d)
    throw ValidationError("continuous path: init point dimension mismatch");
  for (double v : init_point)
    if (v < 0.0 || v > 1.0)
      throw ValidationError("continuous path: init point outside [0,1]^d");
  WarmStart ws;
  ws.stationary = false;
  ws.init = PointMass{std::vector<double>(init_point.begin(), init_point.end())};
  ws.density_ratio_norm = 1.0;  // bookkeeping unused for plain simulation
  ws.exponent_p = 2.0;
  ws.norm_asserted = true;
  return sample_continuous_path(spec, ws, n, seed);
}

// ---------------------------------------------------------------------------
// Noise

enum class NoiseShape { Gaussian, BoundedUniform };
enum class NoiseScale { Constant, LinearFirstCoord };

// Conditional noise: xi = varsigma(x) * eps with E[eps] = 0, E[eps^2] <= 1,
// |varsigma| <= sigma. LinearFirstCoord sets varsigma(x) = sigma * x_1.
struct NoiseSpec {
  double sigma = 0.0;
  NoiseShape shape = NoiseShape::Gaussian;
  NoiseScale scale = NoiseScale::Constant;
  double subgaussian_zeta = 0.0;  // 0 -> derived from shape

  void validate() const {
    if (sigma < 0.0) throw ValidationError("noise: sigma must be >= 0");
    if (subgaussian_zeta < 0.0)
      throw ValidationError("noise: zeta must be >= 0");
  }

  double zeta() const {
    if (subgaussian_zeta > 0.0) return subgaussian_zeta;
    if (shape == NoiseShape::Gaussian) return sigma * std::sqrt(2.0);
    // bounded by sigma*sqrt(3): 2 exp(-t^2/zeta^2) >= 1 up to the bound
    return sigma * std::sqrt(3.0 / std::log(2.0));
  }

  double varsigma(std::span<const double> x) const {
    return scale == NoiseScale::Constant ? sigma : sigma * x[0];
  }

  double draw(RngStream& rng, std::span<const double> x) const {
    if (sigma == 0.0) return 0.0;
    const double eps = shape == NoiseShape::Gaussian
                           ? rng.normal()
                           : rng.uniform(-std::sqrt(3.0), std::sqrt(3.0));
    return varsigma(x) * eps;
  }
};

template <class F>
StatePath attach_responses(StatePath path, F&& f_star, const NoiseSpec& noise,
                           std::uint64_t seed) {
  noise.validate();
  path.validate();
  RngStream rng(seed);
  const std::size_t n = path.size();
  path.responses.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto x = path.state(i);
    path.responses[i] = f_star(x) + noise.draw(rng, x);
  }
  return path;
}

// ---------------------------------------------------------------------------
// Unified kernel handle

using KernelSpec = std::variant<FiniteKernel, BetaChainSpec, ProductBetaSpec,
                                IndependenceSpec, EmbeddedSpec>;

inline bool is_finite(const KernelSpec& k) {
  return std::holds_alternative<FiniteKernel>(k);
}

inline int ambient_dim(const KernelSpec& k) {
  if (const auto* f = std::get_if<FiniteKernel>(&k)) return f->dim();
  if (std::holds_alternative<BetaChainSpec>(k)) return 1;
  if (const auto* p = std::get_if<ProductBetaSpec>(&k)) return p->dim();
  if (const auto* i = std::get_if<IndependenceSpec>(&k)) return i->dim();
  return std::get<EmbeddedSpec>(k).ambient_dim;
}

inline void validate(const KernelSpec& k) {
  std::visit([](const auto& s) { s.validate(); }, k);
}

inline ContinuousKernelSpec as_continuous(const KernelSpec& k) {
  if (const auto* b = std::get_if<BetaChainSpec>(&k)) return *b;
  if (const auto* p = std::get_if<ProductBetaSpec>(&k)) return *p;
  if (const auto* i = std::get_if<IndependenceSpec>(&k)) return *i;
  if (const auto* e = std::get_if<EmbeddedSpec>(&k)) return *e;
  throw ValidationError("kernel: finite kernel where a continuous one expected");
}

struct DoeblinPair {
  double epsilon = 0.0;
  int lag = 1;
};

// Closed-form minorisation constants per family (lag 1 throughout).
inline std::optional<DoeblinPair> doeblin_closed_form(const KernelSpec& k) {
  if (const auto* b = std::get_if<BetaChainSpec>(&k)) {
    const double g = b->gamma_base;
    return DoeblinPair{(1.0 + g) / (2.0 + g), 1};
  }
  if (const auto* p = std::get_if<ProductBetaSpec>(&k)) {
    const double base = p->modulation == Modulation::Constant
                            ? p->constant_value
                            : p->floor_eps;
    return DoeblinPair{std::pow(base, p->dim()), 1};
  }
  if (std::holds_alternative<IndependenceSpec>(k)) return DoeblinPair{1.0, 1};
  if (const auto* e = std::get_if<EmbeddedSpec>(&k)) {
    KernelSpec inner = std::visit(
        [](const auto& s) { return KernelSpec{s}; }, e->inner);
    return doeblin_closed_form(inner);
  }
  return std::nullopt;  // finite kernels: computed spectrally instead
}

}  // namespace shiftlab::chains
