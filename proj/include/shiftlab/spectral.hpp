#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>

#include "shiftlab/chains.hpp"
#include "shiftlab/core.hpp"

namespace shiftlab::spectral {

using chains::DoeblinPair;
using chains::FiniteKernel;

// Time reversal w.r.t. the invariant law: P*(i,j) = pi_j p_{ji} / pi_i.
inline FiniteKernel adjoint_finite(const FiniteKernel& k,
                                   const Eigen::VectorXd& pi) {
  k.validate();
  if (pi.size() != k.size() || pi.minCoeff() <= 0.0)
    throw ValidationError("adjoint: pi must be strictly positive");
  if ((k.transition.transpose() * pi - pi).cwiseAbs().maxCoeff() > 1e-10)
    throw ValidationError("adjoint: pi is not invariant for the kernel");
  FiniteKernel out = k;
  const int K = k.size();
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      out.transition(i, j) = pi(j) * k.transition(j, i) / pi(i);
  return out;
}

inline bool is_reversible(const FiniteKernel& k, const Eigen::VectorXd& pi,
                          double tol = 1e-10) {
  const int K = k.size();
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      if (std::abs(pi(i) * k.transition(i, j) - pi(j) * k.transition(j, i)) >
          tol)
        return false;
  return true;
}

namespace detail {

// Spectral radius of P - Pi: the second largest eigenvalue modulus of P.
// Dense QR eigensolver; exact at the matrix sizes used here.
inline double second_eigenvalue_modulus(const Eigen::MatrixXd& t) {
  const int K = static_cast<int>(t.rows());
  if (K == 1) return 0.0;
  Eigen::EigenSolver<Eigen::MatrixXd> es(t, /*computeEigenvectors=*/false);
  const auto& ev = es.eigenvalues();
  // drop the single eigenvalue closest to 1 (the Perron root)
  int drop = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < K; ++i) {
    const double d = std::abs(ev(i) - std::complex<double>(1.0, 0.0));
    if (d < best) {
      best = d;
      drop = i;
    }
  }
  double rho = 0.0;
  for (int i = 0; i < K; ++i)
    if (i != drop) rho = std::max(rho, std::abs(ev(i)));
  return std::min(rho, 1.0);
}

}  // namespace detail

struct AbsoluteGap {
  double value = 0.0;
  bool periodic_warning = false;
};

// gamma_* = 1 - rho(P - Pi). Periodic kernels keep eigenvalues on the unit
// circle, reported as gap 0 with a warning instead of an error.
inline AbsoluteGap absolute_gap_finite(const FiniteKernel& k) {
  k.validate();
  const double rho = detail::second_eigenvalue_modulus(k.transition);
  AbsoluteGap g;
  g.value = std::max(0.0, 1.0 - rho);
  if (g.value <= 1e-12) {
    g.value = 0.0;
    g.periodic_warning = true;
  }
  return g;
}

struct PseudoGap {
  double value = 0.0;
  int argmax_k = 1;
  bool truncated = false;  // maximiser sits at k_max: possible truncation
};

// gamma_ps = max_k (1 - rho((P*)^k P^k - Pi)) / k. With D = diag(pi) and
// A = D^{1/2} P D^{-1/2}, the operator (P*)^k P^k is similar to (A^k)^T A^k,
// so the required spectral radius is its second largest eigenvalue.
inline PseudoGap pseudo_gap_finite(const FiniteKernel& k, int k_max = 50) {
  k.validate();
  if (k_max < 1) throw ValidationError("pseudo gap: k_max must be >= 1");
  const Eigen::VectorXd pi = chains::invariant_law_irreducible(k);
  const int K = k.size();
  const Eigen::VectorXd sq = pi.cwiseSqrt();
  Eigen::MatrixXd a1(K, K);
  for (int i = 0; i < K; ++i)
    for (int j = 0; j < K; ++j)
      a1(i, j) = sq(i) * k.transition(i, j) / sq(j);
  PseudoGap out;
  out.value = 0.0;
  Eigen::MatrixXd ak = Eigen::MatrixXd::Identity(K, K);
  for (int kk = 1; kk <= k_max; ++kk) {
    ak = ak * a1;
    const Eigen::MatrixXd m = ak.transpose() * ak;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const double lambda2 =
        K >= 2 ? std::clamp(es.eigenvalues()(K - 2), 0.0, 1.0) : 0.0;
    const double gap = (1.0 - lambda2) / kk;
    if (gap > out.value) {
      out.value = gap;
      out.argmax_k = kk;
    }
  }
  out.truncated = (out.argmax_k == k_max);
  return out;
}

// Smallest n with sup_x || P^n(x,.) - pi ||_TV <= 1/4, by explicit powers.
inline int mixing_time_finite(const FiniteKernel& k, const Eigen::VectorXd& pi,
                              long long cap = 1000000) {
  k.validate();
  if (pi.size() != k.size())
    throw ValidationError("mixing time: pi length mismatch");
  const int K = k.size();
  Eigen::MatrixXd pn = k.transition;
  for (long long n = 1; n <= cap; ++n) {
    double worst = 0.0;
    for (int i = 0; i < K; ++i) {
      double tv = 0.0;
      for (int j = 0; j < K; ++j) tv += std::abs(pn(i, j) - pi(j));
      worst = std::max(worst, 0.5 * tv);
    }
    if (worst <= 0.25) return static_cast<int>(n);
    pn = pn * k.transition;
  }
  throw ValidationError("mixing time: cap exceeded");
}

struct UniformErgodicRate {
  double kappa = 0.0;  // ||P^n(x,.) - pi||_TV <= c kappa^n
  double c = 0.0;
};

// Minorisation P^m(x,.) >= eps nu translated into the uniform rate:
// kappa = (1-eps)^{1/m}, c = 2 (1-eps)^{-1}.
inline UniformErgodicRate doeblin_to_rate(double epsilon, int m) {
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw ValidationError("doeblin rate: epsilon must lie in (0,1]");
  if (m < 1) throw ValidationError("doeblin rate: lag must be >= 1");
  UniformErgodicRate r;
  r.kappa = std::pow(1.0 - epsilon, 1.0 / m);
  r.c = epsilon < 1.0 ? 2.0 / (1.0 - epsilon)
                      : std::numeric_limits<double>::infinity();
  return r;
}

// Conservative mixing-time bound from the Doeblin constants; epsilon = 1
// means exact stationarity after the minorisation lag.
inline int doeblin_mixing_bound(double epsilon, int m) {
  if (epsilon >= 1.0) return m;
  const UniformErgodicRate r = doeblin_to_rate(epsilon, m);
  const double v = m * std::log(8.0 * r.c) / std::log(1.0 / r.kappa);
  return static_cast<int>(std::ceil(v));
}

// Warm-start Bernstein tail for additive functionals:
//   density_norm * exp( -gamma x^2 / ( pbar (8 (n + 1/gamma) var_f
//                                            + 20 sup_dev x) ) )
inline double bernstein_tail(double gamma_ps, double n, double var_f,
                             double sup_dev, double p_bar, double density_norm,
                             double x) {
  if (!(gamma_ps > 0.0)) throw ValidationError("bernstein: gamma_ps must be > 0");
  if (!(x > 0.0)) throw ValidationError("bernstein: x must be > 0");
  if (var_f < 0.0 || sup_dev < 0.0 || n < 1.0 || p_bar < 1.0 ||
      density_norm < 1.0)
    throw ValidationError("bernstein: invalid argument");
  const double denom =
      p_bar * (8.0 * (n + 1.0 / gamma_ps) * var_f + 20.0 * sup_dev * x);
  if (denom == 0.0) return 0.0;  // constant f: no deviation possible
  return density_norm * std::exp(-gamma_ps * x * x / denom);
}

// Bound on E[ 1 / (1 + sum f(Z_i)) ] for bounded nonnegative f:
//   4 density_norm (20 pbar sup_dev / gamma_ps + 1) / (n pi(f))
inline double negative_moment_bound(double gamma_ps, double n, double pi_f,
                                    double sup_dev, double p_bar,
                                    double density_norm) {
  if (!(gamma_ps > 0.0))
    throw ValidationError("negative moment: gamma_ps must be > 0");
  if (!(pi_f > 0.0))
    throw ValidationError("negative moment: pi(f) must be positive");
  if (n < 1.0 / gamma_ps)
    throw ValidationError("negative moment: requires n >= 1/gamma_ps");
  if (sup_dev < 0.0 || p_bar < 1.0 || density_norm < 1.0)
    throw ValidationError("negative moment: invalid argument");
  return 4.0 * density_norm * (20.0 * p_bar * sup_dev / gamma_ps + 1.0) /
         (n * pi_f);
}

struct SpectralReport {
  double absolute_gap = 0.0;
  bool periodic_warning = false;
  double pseudo_gap = 0.0;
  int pseudo_gap_k = 1;
  bool pseudo_gap_truncated = false;
  int mixing_time = 0;
  double mixing_gap_lower = 0.0;  // 1 / (2 tau)
  bool reversible = false;
  std::optional<DoeblinPair> doeblin;
  bool exact = true;  // false when only Doeblin-derived bounds are available
};

inline SpectralReport analyze_finite(const FiniteKernel& k, int k_max = 50) {
  SpectralReport r;
  const Eigen::VectorXd pi = chains::stationary_finite(k);
  const AbsoluteGap g = absolute_gap_finite(k);
  r.absolute_gap = g.value;
  r.periodic_warning = g.periodic_warning;
  const PseudoGap ps = pseudo_gap_finite(k, k_max);
  r.pseudo_gap = ps.value;
  r.pseudo_gap_k = ps.argmax_k;
  r.pseudo_gap_truncated = ps.truncated;
  r.mixing_time = mixing_time_finite(k, pi);
  r.mixing_gap_lower = 0.5 / r.mixing_time;
  r.reversible = is_reversible(k, pi);
  return r;
}

// Continuous families: gaps are never computed directly; only the bound
// chain Doeblin -> mixing time -> pseudo gap is reported. Independence
// kernels are exact (one step reaches stationarity).
inline SpectralReport analyze_continuous(const chains::KernelSpec& spec) {
  SpectralReport r;
  r.exact = false;
  const auto d = chains::doeblin_closed_form(spec);
  if (!d)
    throw ValidationError("spectral bounds: no closed-form minorisation");
  r.doeblin = d;
  if (std::holds_alternative<chains::IndependenceSpec>(spec)) {
    r.exact = true;
    r.absolute_gap = 1.0;
    r.pseudo_gap = 1.0;
    r.pseudo_gap_k = 1;
    r.mixing_time = 1;
    r.mixing_gap_lower = 0.5;
    return r;
  }
  r.mixing_time = doeblin_mixing_bound(d->epsilon, d->lag);
  r.mixing_gap_lower = 0.5 / r.mixing_time;
  r.pseudo_gap = r.mixing_gap_lower;  // lower bound, flagged by exact=false
  const UniformErgodicRate rate = doeblin_to_rate(d->epsilon, d->lag);
  r.absolute_gap = std::max(0.0, 1.0 - std::sqrt(rate.kappa));
  return r;
}

}  // namespace shiftlab::spectral
