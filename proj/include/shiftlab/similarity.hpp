#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/chains.hpp"
#include "shiftlab/core.hpp"
#include "shiftlab/metric.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/parallel.hpp"
#include "shiftlab/rng.hpp"

namespace shiftlab::similarity {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class RhoMethod { Exact, MonteCarlo, ClosedForm };

inline std::string to_string(RhoMethod m) {
  switch (m) {
    case RhoMethod::Exact: return "exact";
    case RhoMethod::MonteCarlo: return "monte-carlo";
    default: return "closed-form";
  }
}

// One evaluation of rho_h(P, Q) = int 1/P(B(x,h)) Q(dx), with provenance.
// rho >= 1 always; +inf signals a target region with vanishing source mass.
struct SimilarityEstimate {
  double h = 0.0;
  double value = 1.0;
  RhoMethod method = RhoMethod::Exact;
  double std_error = 0.0;
  bool explosion = false;
  long long zero_cells = 0;            // MC: outer draws with empty inner count
  std::vector<double> witness;         // a target point with zero ball mass
  long long inner_budget = 0, outer_budget = 0;
};

using RhoCurve = std::vector<SimilarityEstimate>;

// Geometric bandwidth grid, largest first. Default shape: 20 points from D
// down to D/200.
inline std::vector<double> geometric_grid(double from, double to, int points) {
  if (!(from > 0.0) || !(to > 0.0) || points < 1 || from < to)
    throw ValidationError("grid: need from >= to > 0 and points >= 1");
  std::vector<double> g(static_cast<std::size_t>(points));
  if (points == 1) {
    g[0] = from;
    return g;
  }
  const double ratio = std::pow(to / from, 1.0 / (points - 1));
  double h = from;
  for (int i = 0; i < points; ++i) {
    g[static_cast<std::size_t>(i)] = h;
    h *= ratio;
  }
  g.back() = to;
  return g;
}

// ---------------------------------------------------------------------------
// Exact evaluation on finite support

// mu, target: probability vectors over the embedded atoms in `coords`.
inline SimilarityEstimate rho_exact_finite(std::span<const double> mu,
                                           std::span<const double> target,
                                           const Eigen::MatrixXd& coords,
                                           Metric metric, double h) {
  const int K = static_cast<int>(coords.rows());
  const int d = static_cast<int>(coords.cols());
  if (static_cast<int>(mu.size()) != K || static_cast<int>(target.size()) != K)
    throw ValidationError("rho exact: vector/coords size mismatch");
  auto check_prob = [](std::span<const double> v, const char* name) {
    double s = 0.0;
    for (double p : v) {
      if (p < -1e-15) throw ValidationError(std::string("rho exact: negative mass in ") + name);
      s += p;
    }
    if (std::abs(s - 1.0) > 1e-12)
      throw ValidationError(std::string("rho exact: ") + name + " does not sum to 1");
  };
  check_prob(mu, "mu");
  check_prob(target, "target");

  SimilarityEstimate est;
  est.h = h;
  est.method = RhoMethod::Exact;
  std::vector<double> a(static_cast<std::size_t>(d)), b(static_cast<std::size_t>(d));
  KahanSum acc;
  for (int j = 0; j < K; ++j) {
    if (target[static_cast<std::size_t>(j)] <= 0.0) continue;
    for (int c = 0; c < d; ++c) b[static_cast<std::size_t>(c)] = coords(j, c);
    double mass = 0.0;
    for (int i = 0; i < K; ++i) {
      for (int c = 0; c < d; ++c) a[static_cast<std::size_t>(c)] = coords(i, c);
      if (distance(metric, a, b) <= h) mass += mu[static_cast<std::size_t>(i)];
    }
    if (mass <= 0.0) {
      est.value = kInf;
      est.explosion = true;
      est.witness.assign(b.begin(), b.end());
      return est;
    }
    acc.add(target[static_cast<std::size_t>(j)] / mass);
  }
  est.value = acc.value();
  return est;
}

// ---------------------------------------------------------------------------
// Closed-form ball probabilities (sup-norm)

namespace detail {

inline double interval_beta_mass(double a, double lo, double hi) {
  const double l = std::clamp(lo, 0.0, 1.0);
  const double u = std::clamp(hi, 0.0, 1.0);
  if (u <= l) return 0.0;
  return std::pow(u, a) - std::pow(l, a);
}

inline double interval_uniform_mass(double lo, double hi, double blo,
                                    double bhi) {
  if (bhi == blo) return 0.0;  // handled by caller
  const double l = std::max(lo, blo);
  const double u = std::min(hi, bhi);
  return u <= l ? 0.0 : (u - l) / (bhi - blo);
}

}  // namespace detail

// Mass of the closed sup-norm ball B(x,h) under a product-form law.
inline double ball_prob_closed_form(const chains::DistDescriptor& dist,
                                    std::span<const double> x, double h,
                                    Metric metric = Metric::SupNorm) {
  const int d = chains::dim(dist);
  if (static_cast<int>(x.size()) != d)
    throw ValidationError("ball prob: center dimension mismatch");
  if (metric != Metric::SupNorm && d > 1)
    throw ValidationError(
        "ball prob: closed form requires the sup-norm metric (product balls)");
  if (const auto* b = std::get_if<chains::UniformBox>(&dist)) {
    double m = 1.0;
    for (int i = 0; i < d; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      if (b->lo[u] == b->hi[u]) {
        if (std::abs(x[u] - b->lo[u]) > h) return 0.0;
      } else {
        m *= detail::interval_uniform_mass(x[u] - h, x[u] + h, b->lo[u],
                                           b->hi[u]);
        if (m == 0.0) return 0.0;
      }
    }
    return m;
  }
  if (const auto* p = std::get_if<chains::BetaProduct>(&dist)) {
    double m = 1.0;
    const int k = static_cast<int>(p->alphas.size());
    for (int i = 0; i < k; ++i) {
      const std::size_t u = static_cast<std::size_t>(i);
      m *= detail::interval_beta_mass(p->alphas[u], x[u] - h, x[u] + h);
      if (m == 0.0) return 0.0;
    }
    for (int i = k; i < d; ++i)
      if (std::abs(x[static_cast<std::size_t>(i)]) > h) return 0.0;
    return m;
  }
  const auto& pm = std::get<chains::PointMass>(dist);
  return distance(metric, pm.x, x) <= h ? 1.0 : 0.0;
}

// One-step ball mass of the scalar beta chain: Q(y, [x-h, x+h] ∩ [0,1]) with
// Q(y,.) = Beta(1 + gamma + y, 1).
inline double beta_step_ball_prob(double gamma, double y, double x, double h) {
  return detail::interval_beta_mass(1.0 + gamma + y, x - h, x + h);
}

// ---------------------------------------------------------------------------
// Monte Carlo evaluation
//
// TargetSampler concept: int dim(); void draw(RngStream&, double* out).
// SourceSampler concept: int dim();
//   template <class V> void sample_block(RngStream&, long long n, V&& visit);
// where visit(const double*) is called once per drawn point. sample_block
// produces a fresh long-run chain segment on every call.

// Evaluates the whole bandwidth grid in one pass over the source draws:
// per outer target point, every inner distance is binned into the grid.
template <class Source, class Target>
RhoCurve rho_mc_curve(const Source& source, const Target& target,
                      const MetricSpace& space, std::span<const double> h_grid,
                      long long outer_n, long long inner_n,
                      std::uint64_t seed) {
  if (outer_n < 1 || inner_n < 1)
    throw ValidationError("rho mc: budgets must be >= 1");
  if (h_grid.empty()) throw ValidationError("rho mc: empty bandwidth grid");
  std::vector<double> grid(h_grid.begin(), h_grid.end());
  std::vector<std::size_t> order(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
  std::vector<double> sorted(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) sorted[i] = grid[order[i]];

  const int d = space.dimension;
  const std::size_t G = grid.size();
  const std::size_t n_out = static_cast<std::size_t>(outer_n);
  // terms[i*G + g] = 1/p_hat at sorted-grid index g for outer point i
  std::vector<double> terms(n_out * G, 0.0);
  std::vector<double> witness_store(n_out * static_cast<std::size_t>(d), 0.0);
  std::vector<unsigned char> any_zero(n_out, 0);

  const Metric metric = space.metric;
  parallel_for(n_out, [&](std::size_t i) {
    RngStream rng(seed, "rho.outer", i);
    std::vector<double> x(static_cast<std::size_t>(d));
    target.draw(rng, x.data());
    std::vector<long long> bin(G + 1, 0);
    source.sample_block(rng, inner_n, [&](const double* pt) {
      const double dist =
          distance(metric, {pt, static_cast<std::size_t>(d)}, x);
      // count into the first grid slot whose h >= dist
      const auto it = std::lower_bound(sorted.begin(), sorted.end(), dist);
      ++bin[static_cast<std::size_t>(it - sorted.begin())];
    });
    long long cum = 0;
    bool zero = false;
    for (std::size_t g = 0; g < G; ++g) {
      cum += bin[g];
      if (cum == 0) {
        zero = true;
        terms[i * G + g] = kInf;
      } else {
        terms[i * G + g] =
            static_cast<double>(inner_n) / static_cast<double>(cum);
      }
    }
    if (zero) {
      any_zero[i] = 1;
      std::copy(x.begin(), x.end(),
                witness_store.begin() + i * static_cast<std::size_t>(d));
    }
  });

  RhoCurve out(G);
  for (std::size_t g = 0; g < G; ++g) {
    SimilarityEstimate est;
    est.h = sorted[g];
    est.method = RhoMethod::MonteCarlo;
    est.inner_budget = inner_n;
    est.outer_budget = outer_n;
    std::vector<double> finite;
    finite.reserve(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
      const double t = terms[i * G + g];
      if (std::isfinite(t)) {
        finite.push_back(t);
      } else {
        ++est.zero_cells;
        if (est.witness.empty())
          est.witness.assign(
              witness_store.begin() + i * static_cast<std::size_t>(d),
              witness_store.begin() + (i + 1) * static_cast<std::size_t>(d));
      }
    }
    if (est.zero_cells > 0) {
      est.explosion = true;
      est.value = kInf;
    } else {
      est.value = mean(finite);
    }
    est.std_error = std_error(finite);
    out[g] = est;
  }
  // restore caller's grid order
  RhoCurve reordered(G);
  for (std::size_t i = 0; i < G; ++i) reordered[order[i]] = out[i];
  return reordered;
}

template <class Source, class Target>
SimilarityEstimate rho_mc(const Source& source, const Target& target,
                          const MetricSpace& space, double h, long long outer_n,
                          long long inner_n, std::uint64_t seed) {
  const double grid[1] = {h};
  return rho_mc_curve(source, target, space, grid, outer_n, inner_n, seed)[0];
}

// ---------------------------------------------------------------------------
// Samplers

// Finite chain started from an explicit law (typically the invariant one, so
// each block is a stationary segment).
struct FiniteChainSampler {
  const chains::FiniteKernel* kernel = nullptr;
  std::vector<double> start_cum;  // cumulative start law
  std::vector<double> row_cum;    // K rows of cumulative transition weights
  int K = 0, d = 0;

  FiniteChainSampler(const chains::FiniteKernel& k, const Eigen::VectorXd& law)
      : kernel(&k), K(k.size()), d(k.dim()) {
    start_cum.resize(static_cast<std::size_t>(K));
    double acc = 0.0;
    for (int i = 0; i < K; ++i) {
      acc += law(i);
      start_cum[static_cast<std::size_t>(i)] = acc;
    }
    row_cum.resize(static_cast<std::size_t>(K) * K);
    for (int i = 0; i < K; ++i) {
      acc = 0.0;
      for (int j = 0; j < K; ++j) {
        acc += k.transition(i, j);
        row_cum[static_cast<std::size_t>(i * K + j)] = acc;
      }
    }
  }

  int dim() const { return d; }

  void draw(RngStream& rng, double* out) const {
    const int s = static_cast<int>(rng.categorical_cum(start_cum));
    for (int c = 0; c < d; ++c) out[c] = kernel->states(s, c);
  }

  template <class V>
  void sample_block(RngStream& rng, long long n, V&& visit) const {
    std::vector<double> pt(static_cast<std::size_t>(d));
    int s = static_cast<int>(rng.categorical_cum(start_cum));
    for (long long t = 0; t < n; ++t) {
      s = static_cast<int>(rng.categorical_cum(
          {row_cum.data() + static_cast<std::size_t>(s) * K,
           static_cast<std::size_t>(K)}));
      for (int c = 0; c < d; ++c) pt[static_cast<std::size_t>(c)] = kernel->states(s, c);
      visit(pt.data());
    }
  }
};

// I.i.d. draws from a product-form law.
struct IidSampler {
  chains::DistDescriptor dist;
  int dim() const { return chains::dim(dist); }
  void draw(RngStream& rng, double* out) const { chains::draw(dist, rng, out); }
  template <class V>
  void sample_block(RngStream& rng, long long n, V&& visit) const {
    std::vector<double> pt(static_cast<std::size_t>(dim()));
    for (long long t = 0; t < n; ++t) {
      chains::draw(dist, rng, pt.data());
      visit(pt.data());
    }
  }
};

// Continuous chain; every draw/block re-runs the burn-in, so blocks are
// independent long-run segments and single draws are independent long-run
// states.
struct ContinuousChainSampler {
  chains::ContinuousKernelSpec spec;
  chains::WarmStart start;

  int dim() const { return chains::ambient_dim(spec); }

  void draw(RngStream& rng, double* out) const {
    chains::init_continuous(spec, start, rng, out);
    chains::step_continuous(spec, rng, out);
  }

  template <class V>
  void sample_block(RngStream& rng, long long n, V&& visit) const {
    std::vector<double> x(static_cast<std::size_t>(dim()));
    chains::init_continuous(spec, start, rng, x.data());
    for (long long t = 0; t < n; ++t) {
      chains::step_continuous(spec, rng, x.data());
      visit(x.data());
    }
  }
};

// Weighted two-component mixture; blocks split deterministically in
// proportion to the weight so the block is a sample from the mixture mean.
template <class A, class B>
struct MixtureSampler {
  const A* first = nullptr;
  const B* second = nullptr;
  double weight_first = 0.5;

  int dim() const { return first->dim(); }

  void draw(RngStream& rng, double* out) const {
    if (rng.uniform() < weight_first)
      first->draw(rng, out);
    else
      second->draw(rng, out);
  }

  template <class V>
  void sample_block(RngStream& rng, long long n, V&& visit) const {
    const long long na = std::llround(weight_first * static_cast<double>(n));
    if (na > 0) first->sample_block(rng, na, visit);
    if (n - na > 0) second->sample_block(rng, n - na, visit);
  }
};

// ---------------------------------------------------------------------------
// Curve algebra and plug-in bounds

// Mixture upper bound: rho_h(mu_n, pi^Q) <= n min{rho_P/n_P, rho_Q/n_Q}
// pointwise over a shared grid; an infinite branch is absorbed by the min.
inline RhoCurve rho_mixture(long long n_p, long long n_q, const RhoCurve& rho_p,
                            const RhoCurve& rho_q) {
  if (rho_p.size() != rho_q.size())
    throw ValidationError("rho mixture: curves must share a grid");
  const double n = static_cast<double>(n_p + n_q);
  if (!(n > 0)) throw ValidationError("rho mixture: n_P + n_Q must be positive");
  RhoCurve out(rho_p.size());
  for (std::size_t i = 0; i < rho_p.size(); ++i) {
    if (rho_p[i].h != rho_q[i].h)
      throw ValidationError("rho mixture: grid mismatch");
    const double a =
        n_p > 0 ? rho_p[i].value / static_cast<double>(n_p) : kInf;
    const double b =
        n_q > 0 ? rho_q[i].value / static_cast<double>(n_q) : kInf;
    SimilarityEstimate est;
    est.h = rho_p[i].h;
    est.method = RhoMethod::ClosedForm;
    est.value = n * std::min(a, b);
    est.explosion = std::isinf(est.value);
    est.std_error = n * (a <= b ? (n_p > 0 ? rho_p[i].std_error / n_p : 0.0)
                                : (n_q > 0 ? rho_q[i].std_error / n_q : 0.0));
    out[i] = est;
  }
  return out;
}

// Covering bound N_X(eps) <= (1 + 2D/eps)^d for a diameter-D subset of R^d.
inline double covering_number_bound(double diameter, double eps, int d) {
  if (!(diameter > 0.0) || !(eps > 0.0) || d < 1)
    throw ValidationError("covering bound: invalid arguments");
  return std::pow(1.0 + 2.0 * diameter / eps, d);
}

// Self-similarity upper bound rho_h(pi, pi) <= N(h/2) <= (1 + 4D/h)^d.
inline double rho_self_upper(double h, double diameter, int d) {
  if (!(h > 0.0)) throw ValidationError("rho self bound: h must be positive");
  return covering_number_bound(diameter, h / 2.0, d);
}

// ---------------------------------------------------------------------------
// Alpha-family membership

// Grid evidence for sup_{0<h<=D} (h/D)^alpha rho_h <= C. A pass is a
// necessary-condition certificate on the grid, not a proof over all h.
struct AlphaFamilyCheck {
  double alpha = 0.0;
  std::optional<double> alpha_prime;
  double constant = 1.0;
  double sup_value = 0.0;
  double sup_witness_h = 0.0;
  double sup_value_qq = 0.0;  // second condition, when alpha_prime is set
  double sup_witness_h_qq = 0.0;
  bool pass = false;
  bool explosion = false;
  std::vector<double> grid;
};

namespace detail {

inline std::pair<double, double> weighted_sup(const RhoCurve& curve,
                                              double alpha, double diameter,
                                              bool& exploded) {
  double sup = 0.0, wit = 0.0;
  for (const auto& e : curve) {
    if (!(e.h > 0.0) || e.h > diameter)
      throw ValidationError("alpha check: grid must lie in (0, D]");
    if (!std::isfinite(e.value)) {
      exploded = true;
      return {kInf, e.h};
    }
    const double v = std::pow(e.h / diameter, alpha) * e.value;
    if (v > sup) {
      sup = v;
      wit = e.h;
    }
  }
  return {sup, wit};
}

}  // namespace detail

inline AlphaFamilyCheck alpha_family_check(const RhoCurve& curve, double alpha,
                                           double constant, double diameter) {
  if (constant < 1.0)
    throw ValidationError("alpha check: constant must be >= 1");
  AlphaFamilyCheck out;
  out.alpha = alpha;
  out.constant = constant;
  for (const auto& e : curve) out.grid.push_back(e.h);
  bool exploded = false;
  std::tie(out.sup_value, out.sup_witness_h) =
      detail::weighted_sup(curve, alpha, diameter, exploded);
  out.explosion = exploded;
  out.pass = !exploded && out.sup_value <= constant * (1.0 + 1e-12);
  return out;
}

inline AlphaFamilyCheck alpha_family_check(const RhoCurve& curve_pq,
                                           const RhoCurve& curve_qq,
                                           double alpha, double alpha_prime,
                                           double constant, double diameter) {
  AlphaFamilyCheck out = alpha_family_check(curve_pq, alpha, constant, diameter);
  out.alpha_prime = alpha_prime;
  bool exploded = false;
  std::tie(out.sup_value_qq, out.sup_witness_h_qq) =
      detail::weighted_sup(curve_qq, alpha_prime, diameter, exploded);
  out.explosion = out.explosion || exploded;
  out.pass = out.pass && !exploded &&
             out.sup_value_qq <= constant * (1.0 + 1e-12);
  return out;
}

// Least-squares slope of log rho against log(1/h). By default only the lower
// half of the grid enters the fit (the h -> 0 asymptotics are what the slope
// is for).
struct PowerFit {
  double slope = 0.0;
  double stderr_ = 0.0;
  double residual_rms = 0.0;
  int points_used = 0;
};

inline PowerFit alpha_index_fit(const RhoCurve& curve, bool lower_half = true) {
  std::vector<const SimilarityEstimate*> pts;
  for (const auto& e : curve)
    if (std::isfinite(e.value) && e.value > 0.0) pts.push_back(&e);
  if (lower_half && pts.size() >= 6) {
    std::sort(pts.begin(), pts.end(),
              [](const auto* a, const auto* b) { return a->h < b->h; });
    pts.resize(pts.size() / 2);
  }
  if (pts.size() < 3)
    throw ValidationError("alpha fit: need at least 3 finite grid points");
  std::vector<double> x, y;
  for (const auto* e : pts) {
    x.push_back(std::log(1.0 / e->h));
    y.push_back(std::log(e->value));
  }
  const LineFit f = fit_line(x, y);
  PowerFit out;
  out.slope = f.slope;
  out.stderr_ = f.slope_stderr;
  out.residual_rms = f.residual_rms;
  out.points_used = f.n;
  return out;
}

// ---------------------------------------------------------------------------
// Kernel transfer exponents

using BallProbFn =
    std::function<double(std::span<const double> center, double h)>;
using KernelBallProbFn = std::function<double(
    std::span<const double> y, std::span<const double> center, double h)>;

// Grid check of nu^P(B(x,h)) >= C (h/hbar)^gamma Q^{m_Q}(y, B(x,h)) over
// (x, y, h). The worst margin and its witness triple are reported either way.
struct TransferExponentCheck {
  double gamma = 0.0;
  double constant = 1.0;
  double radius = 1.0;
  int m_q = 1;
  double worst_margin = 0.0;
  std::vector<double> witness_x, witness_y;
  double witness_h = 0.0;
  // Relative violation nu / (C (h/hbar)^gamma Q): the most-violated cell; for
  // failing checks this locates the obstruction (the absolute margin shrinks
  // with the ball masses and its argmin sits at an interior h).
  double worst_ratio = kInf;
  std::vector<double> ratio_witness_x, ratio_witness_y;
  double ratio_witness_h = 0.0;
  bool pass = false;
};

inline TransferExponentCheck verify_transfer_exponent(
    const BallProbFn& nu_ball, const KernelBallProbFn& q_ball, double gamma,
    double constant, double radius,
    std::span<const std::vector<double>> x_grid,
    std::span<const std::vector<double>> y_grid, std::span<const double> h_grid,
    int m_q = 1) {
  if (gamma < 0.0 || !(constant > 0.0) || !(radius > 0.0))
    throw ValidationError("transfer check: invalid parameters");
  TransferExponentCheck out;
  out.gamma = gamma;
  out.constant = constant;
  out.radius = radius;
  out.m_q = m_q;
  out.worst_margin = kInf;
  for (double h : h_grid) {
    if (!(h > 0.0) || h > radius)
      throw ValidationError("transfer check: h grid must lie in (0, radius]");
    const double scale = constant * std::pow(h / radius, gamma);
    for (const auto& x : x_grid) {
      const double nu = nu_ball(x, h);
      for (const auto& y : y_grid) {
        const double rhs = scale * q_ball(y, x, h);
        const double margin = nu - rhs;
        if (margin < out.worst_margin) {
          out.worst_margin = margin;
          out.witness_x = x;
          out.witness_y = y;
          out.witness_h = h;
        }
        if (rhs > 0.0 && nu / rhs < out.worst_ratio) {
          out.worst_ratio = nu / rhs;
          out.ratio_witness_x = x;
          out.ratio_witness_y = y;
          out.ratio_witness_h = h;
        }
      }
    }
  }
  out.pass = out.worst_margin >= -1e-12;
  return out;
}

// Membership parameters implied by a kernel transfer exponent: alpha is
// gamma + d_Q with constant (2 k_Q + 1)^{d_Q} / (C eps_P); below dimension d
// the membership is the primed variant with alpha' = d_Q and the constant
// divided by (C eps_P) ∧ 1. The dimension-free fallback always holds.
struct TransferAlphaResult {
  double alpha = 0.0;
  bool primed = false;           // true: alpha < d case (alpha' applies)
  double alpha_prime = 0.0;      // = d_Q in the primed case
  double constant = 1.0;
  double fallback_alpha = 0.0;   // gamma + d
  double fallback_constant = 1.0;
};

inline TransferAlphaResult transfer_to_alpha(double gamma, double d_q,
                                             double k_q, double constant,
                                             double eps_p, int d) {
  if (gamma < 0.0 || !(d_q > 0.0) || k_q < 1.0 || !(constant > 0.0) ||
      !(eps_p > 0.0) || d < 1 || d_q > static_cast<double>(d))
    throw ValidationError("transfer-to-alpha: invalid arguments");
  TransferAlphaResult r;
  r.alpha = gamma + d_q;
  r.primed = r.alpha < static_cast<double>(d);
  const double cov = std::pow(2.0 * k_q + 1.0, d_q);
  if (r.primed) {
    r.alpha_prime = d_q;
    r.constant = cov / std::min(constant * eps_p, 1.0);
  } else {
    r.constant = cov / (constant * eps_p);
  }
  r.fallback_alpha = gamma + static_cast<double>(d);
  r.fallback_constant = std::pow(9.0, d) / (constant * eps_p);
  return r;
}

// ---------------------------------------------------------------------------
// Explosion detection (box supports, sup-norm)

// Axis-aligned support box; lo_i == hi_i embeds a lower-dimensional face.
struct SupportBox {
  std::vector<double> lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const {
    if (lo.empty() || lo.size() != hi.size())
      throw ValidationError("support box: lo/hi must be nonempty and matched");
    for (std::size_t i = 0; i < lo.size(); ++i)
      if (lo[i] > hi[i]) throw ValidationError("support box: lo > hi");
  }
};

struct ExplosionCheck {
  bool explodes = false;
  SupportBox witness;  // target-positive set whose h-fattening misses source
  int dimension = -1;  // coordinate along which the witness escapes
};

// Looks for a target set Lambda with positive mass whose h-neighbourhood has
// zero source mass. For box supports that happens exactly when the target box
// leaves the h-fattened source box along some axis.
inline ExplosionCheck explosion_check(const SupportBox& source,
                                      const SupportBox& target, double h) {
  source.validate();
  target.validate();
  if (source.dim() != target.dim())
    throw ValidationError("explosion check: dimension mismatch");
  if (!(h > 0.0)) throw ValidationError("explosion check: h must be positive");
  ExplosionCheck out;
  for (int i = 0; i < source.dim(); ++i) {
    const std::size_t u = static_cast<std::size_t>(i);
    const double flo = source.lo[u] - h;
    const double fhi = source.hi[u] + h;
    const bool degenerate = target.lo[u] == target.hi[u];
    if (degenerate) {
      if (target.lo[u] < flo || target.lo[u] > fhi) {
        out.explodes = true;
        out.witness = target;  // the whole target lives beyond reach
        out.dimension = i;
        return out;
      }
      continue;
    }
    if (target.hi[u] > fhi) {
      out.explodes = true;
      out.witness = target;
      out.witness.lo[u] = 0.5 * (fhi + target.hi[u]);
      out.dimension = i;
      return out;
    }
    if (target.lo[u] < flo) {
      out.explodes = true;
      out.witness = target;
      out.witness.hi[u] = 0.5 * (flo + target.lo[u]);
      out.dimension = i;
      return out;
    }
  }
  return out;
}

}  // namespace shiftlab::similarity
