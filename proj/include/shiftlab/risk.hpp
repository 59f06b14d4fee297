#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "shiftlab/chains.hpp"
#include "shiftlab/core.hpp"
#include "shiftlab/estimator.hpp"
#include "shiftlab/metric.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/parallel.hpp"
#include "shiftlab/rng.hpp"
#include "shiftlab/similarity.hpp"

namespace shiftlab::risk {

// Raised when a similarity value needed for a bound or sweep is infinite.
class ExplosionError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Full covariate-shift regression configuration: source/target kernels,
// block sizes, warm starts, regression function and noise.
struct ShiftModel {
  chains::KernelSpec source;
  chains::KernelSpec target;
  long long n_p = 0;
  long long n_q = 0;
  chains::WarmStart warm_p;
  chains::WarmStart warm_q;
  estimator::RegressionFn regression;
  chains::NoiseSpec noise;
  MetricSpace space;

  void validate() const {
    space.validate();
    chains::validate(source);
    chains::validate(target);
    if (chains::ambient_dim(source) != space.dimension ||
        chains::ambient_dim(target) != space.dimension)
      throw ValidationError("model: kernel dimension != metric space dimension");
    if (n_p < 0 || n_q < 0 || n_p + n_q < 1)
      throw ValidationError("model: needs at least one observation");
    warm_p.validate();
    warm_q.validate();
    noise.validate();
    regression.spec.validate();
    if (!regression.f) throw ValidationError("model: missing regression function");
  }
};

// ---------------------------------------------------------------------------
// Sampling machinery

namespace detail {

inline Eigen::VectorXd finite_start_law(const chains::FiniteKernel& k,
                                        const chains::WarmStart& w) {
  if (w.stationary) return chains::stationary_finite(k);
  if (w.finite_law.empty())
    throw ValidationError("warm start: finite chain needs a start vector");
  if (static_cast<int>(w.finite_law.size()) != k.size())
    throw ValidationError("warm start: start vector length mismatch");
  Eigen::VectorXd mu(k.size());
  for (int i = 0; i < k.size(); ++i)
    mu(i) = w.finite_law[static_cast<std::size_t>(i)];
  return mu;
}

}  // namespace detail

// One training block with everything prepared for repeated sampling.
struct PreparedBlock {
  bool finite = false;
  const chains::FiniteKernel* fk = nullptr;
  Eigen::VectorXd start_law;  // finite case
  chains::ContinuousKernelSpec cspec;  // continuous case
  chains::WarmStart warm;
};

inline PreparedBlock prepare_block(const chains::KernelSpec& kernel,
                                   const chains::WarmStart& warm) {
  PreparedBlock b;
  b.warm = warm;
  if (const auto* f = std::get_if<chains::FiniteKernel>(&kernel)) {
    b.finite = true;
    b.fk = f;
    b.start_law = detail::finite_start_law(*f, warm);
  } else {
    b.cspec = chains::as_continuous(kernel);
  }
  return b;
}

struct BlockDraw {
  chains::StatePath path;
  std::vector<int> indices;  // finite chains only
};

inline BlockDraw sample_block(const PreparedBlock& b, long long n,
                              std::uint64_t seed) {
  BlockDraw out;
  if (n <= 0) return out;
  if (b.finite) {
    out.indices = chains::sample_finite_indices(*b.fk, b.start_law, n, seed);
    out.path.dim = b.fk->dim();
    out.path.seed = seed;
    out.path.states.resize(static_cast<std::size_t>(n) * out.path.dim);
    for (long long t = 0; t < n; ++t)
      for (int c = 0; c < out.path.dim; ++c)
        out.path.states[static_cast<std::size_t>(t) * out.path.dim + c] =
            b.fk->states(out.indices[static_cast<std::size_t>(t)], c);
  } else {
    out.path = chains::sample_continuous_path(b.cspec, b.warm, n, seed);
  }
  return out;
}

// Independent test points distributed as the target invariant law: exact
// categorical draws for finite targets, a burn-in 10^3 / thinning 10
// surrogate chain otherwise (the documented source of approximation).
struct TargetPointSource {
  bool finite = false;
  const chains::FiniteKernel* fk = nullptr;
  std::vector<double> pi_cum;
  Eigen::VectorXd pi;
  chains::ContinuousKernelSpec cspec;
  int burn_in = 1000;
  int thinning = 10;

  explicit TargetPointSource(const chains::KernelSpec& target) {
    if (const auto* f = std::get_if<chains::FiniteKernel>(&target)) {
      finite = true;
      fk = f;
      pi = chains::stationary_finite(*f);
      double acc = 0.0;
      for (int i = 0; i < pi.size(); ++i) {
        acc += pi(i);
        pi_cum.push_back(acc);
      }
    } else {
      cspec = chains::as_continuous(target);
    }
  }

  int dim() const {
    return finite ? fk->dim() : chains::ambient_dim(cspec);
  }

  // n points written consecutively into out (n * dim doubles).
  void draw(RngStream& rng, long long n, double* out) const {
    const int d = dim();
    if (finite) {
      for (long long t = 0; t < n; ++t) {
        const int s = static_cast<int>(rng.categorical_cum(pi_cum));
        for (int c = 0; c < d; ++c)
          out[t * d + c] = fk->states(s, c);
      }
      return;
    }
    std::vector<double> x(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) x[static_cast<std::size_t>(i)] = rng.uniform();
    if (const auto* e = std::get_if<chains::EmbeddedSpec>(&cspec))
      for (int i = e->inner_dim(); i < e->ambient_dim; ++i)
        x[static_cast<std::size_t>(i)] = 0.0;
    for (int b = 0; b < burn_in; ++b)
      chains::step_continuous(cspec, rng, x.data());
    for (long long t = 0; t < n; ++t) {
      for (int s = 0; s < thinning; ++s)
        chains::step_continuous(cspec, rng, x.data());
      std::copy(x.begin(), x.end(), out + t * d);
    }
  }
};

// pi^Q(|f*|^2): exact sum for finite targets, 10^5 surrogate draws otherwise.
inline double target_second_moment(const ShiftModel& model, std::uint64_t seed,
                                   long long mc_n = 100000) {
  const TargetPointSource src(model.target);
  const int d = src.dim();
  if (src.finite) {
    double s = 0.0;
    for (int j = 0; j < src.fk->size(); ++j) {
      Eigen::RowVectorXd row = src.fk->states.row(j);
      const double v = model.regression(
          {row.data(), static_cast<std::size_t>(d)});
      s += src.pi(j) * v * v;
    }
    return s;
  }
  RngStream rng(seed, "target.f2");
  std::vector<double> pts(static_cast<std::size_t>(mc_n) * d);
  src.draw(rng, mc_n, pts.data());
  std::vector<double> vals(static_cast<std::size_t>(mc_n));
  for (long long i = 0; i < mc_n; ++i) {
    const double v = model.regression(
        {pts.data() + i * d, static_cast<std::size_t>(d)});
    vals[static_cast<std::size_t>(i)] = v * v;
  }
  return mean(vals);
}

// ---------------------------------------------------------------------------
// Empirical generalization risk

struct RiskReport {
  double risk_mean = 0.0;
  double risk_se = 0.0;
  int reps = 0;
  double h = 0.0;
  long long n_p = 0, n_q = 0;
  long long test_n = 0;
  // Upper-bound side; filled by theoretical_upper_bound.
  bool bound_evaluated = false;
  double bound = 0.0;
  double bias_term = 0.0;
  double stoch_term = 0.0;
  double constant_c = 0.0;
  double rho_used = 0.0;
  double second_moment_used = 0.0;
};

// Mean over replications of the test-sample average of (fhat - f*)^2.
// Each replication regenerates both training blocks and the noise.
inline RiskReport generalization_risk(const ShiftModel& model, double h,
                                      long long test_n, int reps,
                                      std::uint64_t seed) {
  model.validate();
  if (reps < 1) throw ValidationError("risk: reps must be >= 1");
  if (test_n < 1) throw ValidationError("risk: test_n must be >= 1");
  const PreparedBlock bp = prepare_block(model.source, model.warm_p);
  const PreparedBlock bq = prepare_block(model.target, model.warm_q);
  const TargetPointSource test_src(model.target);
  const int d = model.space.dimension;

  std::vector<double> risks(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, "risk.rep", r);
    BlockDraw dp = sample_block(bp, model.n_p, derive_seed(rep_seed, "path-P"));
    BlockDraw dq = sample_block(bq, model.n_q, derive_seed(rep_seed, "path-Q"));
    if (model.n_p > 0)
      dp.path = chains::attach_responses(std::move(dp.path), model.regression,
                                         model.noise,
                                         derive_seed(rep_seed, "noise-P"));
    if (model.n_q > 0)
      dq.path = chains::attach_responses(std::move(dq.path), model.regression,
                                         model.noise,
                                         derive_seed(rep_seed, "noise-Q"));
    std::vector<const chains::StatePath*> blocks;
    if (model.n_p > 0) blocks.push_back(&dp.path);
    if (model.n_q > 0) blocks.push_back(&dq.path);
    const estimator::FittedNW fit = estimator::fit_nw(model.space, h, blocks);

    RngStream trng(rep_seed, "test");
    std::vector<double> pts(static_cast<std::size_t>(test_n) * d);
    test_src.draw(trng, test_n, pts.data());
    KahanSum acc;
    for (long long i = 0; i < test_n; ++i) {
      const std::span<const double> x{pts.data() + i * d,
                                      static_cast<std::size_t>(d)};
      const double e = estimator::nw_predict(fit, x) - model.regression(x);
      acc.add(e * e);
    }
    risks[r] = acc.value() / static_cast<double>(test_n);
  });

  RiskReport rep;
  rep.risk_mean = mean(risks);
  rep.risk_se = std_error(risks);
  rep.reps = reps;
  rep.h = h;
  rep.n_p = model.n_p;
  rep.n_q = model.n_q;
  rep.test_n = test_n;
  return rep;
}

// ---------------------------------------------------------------------------
// Risk upper bound
//
//   L^2 h^{2 beta} + C (pi^Q(|f*|^2) + sigma^2) / n * rho_h(mu_n, pi^Q)
// with
//   C = 12 max{ 3 kP kQ (pbar/gP ∨ qbar/gQ), 28 (kP pbar/gP ∨ kQ qbar/gQ) }
// where kP, kQ are the warm-start density-ratio norms. A missing block drops
// out of both maxima.

struct BoundInputs {
  double gamma_ps_p = 1.0;
  double gamma_ps_q = 1.0;
  double rho = 1.0;               // rho_h(mu_n, pi^Q)
  double second_moment = 0.0;     // pi^Q(|f*|^2)
};

inline RiskReport theoretical_upper_bound(const ShiftModel& model, double h,
                                          const BoundInputs& in,
                                          RiskReport base = {}) {
  model.validate();
  if (!(in.gamma_ps_p > 0.0) || !(in.gamma_ps_q > 0.0))
    throw ValidationError("bound: pseudo spectral gaps must be positive");
  if (model.n_p > 0 &&
      static_cast<double>(model.n_p) < 1.0 / in.gamma_ps_p)
    throw ValidationError("bound: P block violates n_P >= 1/gamma_ps^P");
  if (model.n_q > 0 &&
      static_cast<double>(model.n_q) < 1.0 / in.gamma_ps_q)
    throw ValidationError("bound: Q block violates n_Q >= 1/gamma_ps^Q");
  if (std::isinf(in.rho))
    throw ExplosionError("bound: similarity rho is infinite (explosion)");

  const double kp = model.n_p > 0 ? model.warm_p.density_ratio_norm : 1.0;
  const double kq = model.n_q > 0 ? model.warm_q.density_ratio_norm : 1.0;
  const double rp =
      model.n_p > 0
          ? chains::conjugate_exponent(model.warm_p.exponent_p) / in.gamma_ps_p
          : 0.0;
  const double rq =
      model.n_q > 0
          ? chains::conjugate_exponent(model.warm_q.exponent_p) / in.gamma_ps_q
          : 0.0;
  const double c =
      12.0 * std::max(3.0 * kp * kq * std::max(rp, rq),
                      28.0 * std::max(kp * rp, kq * rq));

  const double beta = model.regression.spec.beta;
  const double L = model.regression.spec.L;
  const double n = static_cast<double>(model.n_p + model.n_q);
  RiskReport out = base;
  out.h = h;
  out.n_p = model.n_p;
  out.n_q = model.n_q;
  out.bound_evaluated = true;
  out.bias_term = L * L * std::pow(h, 2.0 * beta);
  out.stoch_term = c *
                   (in.second_moment + model.noise.sigma * model.noise.sigma) /
                   n * in.rho;
  out.bound = out.bias_term + out.stoch_term;
  out.constant_c = c;
  out.rho_used = in.rho;
  out.second_moment_used = in.second_moment;
  return out;
}

// ---------------------------------------------------------------------------
// Prediction error at a future state of the target chain

struct PredictionErrorEstimate {
  int m = 1;
  double value = 0.0;
  double se = 0.0;
};

namespace detail {

// err^2 at every finite state for one trained model.
inline std::vector<double> state_errors(const ShiftModel& model,
                                        const estimator::FittedNW& fit) {
  const auto& fk = std::get<chains::FiniteKernel>(model.target);
  const int K = fk.size();
  const int d = fk.dim();
  std::vector<double> err2(static_cast<std::size_t>(K));
  std::vector<double> x(static_cast<std::size_t>(d));
  for (int j = 0; j < K; ++j) {
    for (int c = 0; c < d; ++c) x[static_cast<std::size_t>(c)] = fk.states(j, c);
    const double e = estimator::nw_predict(fit, x) - model.regression(x);
    err2[static_cast<std::size_t>(j)] = e * e;
  }
  return err2;
}

struct TrainedRep {
  estimator::FittedNW fit;
  int q_last_index = -1;                // finite targets
  std::vector<double> q_last_state;     // continuous targets
};

inline TrainedRep train_once(const ShiftModel& model, const PreparedBlock& bp,
                             const PreparedBlock& bq, double h,
                             std::uint64_t rep_seed) {
  BlockDraw dp = sample_block(bp, model.n_p, derive_seed(rep_seed, "path-P"));
  BlockDraw dq = sample_block(bq, model.n_q, derive_seed(rep_seed, "path-Q"));
  if (model.n_p > 0)
    dp.path = chains::attach_responses(std::move(dp.path), model.regression,
                                       model.noise,
                                       derive_seed(rep_seed, "noise-P"));
  if (model.n_q > 0)
    dq.path = chains::attach_responses(std::move(dq.path), model.regression,
                                       model.noise,
                                       derive_seed(rep_seed, "noise-Q"));
  std::vector<const chains::StatePath*> blocks;
  if (model.n_p > 0) blocks.push_back(&dp.path);
  if (model.n_q > 0) blocks.push_back(&dq.path);
  TrainedRep out{estimator::fit_nw(model.space, h, blocks), -1, {}};
  if (model.n_q < 1)
    throw ValidationError("prediction error: needs a target block (n_Q >= 1)");
  if (!dq.indices.empty()) out.q_last_index = dq.indices.back();
  const auto last = dq.path.state(dq.path.size() - 1);
  out.q_last_state.assign(last.begin(), last.end());
  return out;
}

}  // namespace detail

// MC estimate of E[(fhat(X^Q_{n_Q - 1 + m}) - f*(X^Q_{n_Q - 1 + m}))^2]: the
// chain that produced the Q block is continued m extra steps per replication.
inline PredictionErrorEstimate prediction_error(const ShiftModel& model,
                                                double h, int m, int reps,
                                                std::uint64_t seed) {
  model.validate();
  if (m < 1) throw ValidationError("prediction error: m must be >= 1");
  const PreparedBlock bp = prepare_block(model.source, model.warm_p);
  const PreparedBlock bq = prepare_block(model.target, model.warm_q);
  const int d = model.space.dimension;

  std::vector<double> vals(static_cast<std::size_t>(reps));
  parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
    const std::uint64_t rep_seed = derive_seed(seed, "pred.rep", r);
    const auto trained = detail::train_once(model, bp, bq, h, rep_seed);
    RngStream rng(rep_seed, "path-Q-future");
    std::vector<double> x = trained.q_last_state;
    if (bq.finite) {
      int s = trained.q_last_index;
      const auto& fk = *bq.fk;
      const chains::detail::CumRows rows(fk.transition);
      for (int t = 0; t < m; ++t)
        s = static_cast<int>(rng.categorical_cum(rows.row(s)));
      for (int c = 0; c < d; ++c) x[static_cast<std::size_t>(c)] = fk.states(s, c);
    } else {
      for (int t = 0; t < m; ++t)
        chains::step_continuous(bq.cspec, rng, x.data());
    }
    const double e =
        estimator::nw_predict(trained.fit, x) - model.regression(x);
    vals[r] = e * e;
  });
  PredictionErrorEstimate est;
  est.m = m;
  est.value = mean(vals);
  est.se = std_error(vals);
  return est;
}

struct GapDecayRow {
  int m = 1;
  double gap = 0.0;        // |prediction error - generalization risk|
  double mean_diff = 0.0;  // signed coupled difference
  double se = 0.0;
};

// Decay table of |prediction_error(m) - generalization_risk|. For finite
// targets the m-step draw and an invariant draw are maximally coupled per
// replication, which removes almost all common variance; for independence
// kernels the two draws coincide and the gap is exactly zero.
inline std::vector<GapDecayRow> gap_vs_generalization(
    const ShiftModel& model, double h, std::span<const int> m_list, int reps,
    std::uint64_t seed) {
  model.validate();
  if (m_list.empty()) throw ValidationError("gap decay: empty m list");
  const PreparedBlock bp = prepare_block(model.source, model.warm_p);
  const PreparedBlock bq = prepare_block(model.target, model.warm_q);
  const int d = model.space.dimension;
  const bool independence =
      std::holds_alternative<chains::IndependenceSpec>(model.target);

  const std::size_t M = m_list.size();
  std::vector<double> diffs(static_cast<std::size_t>(reps) * M, 0.0);

  if (bq.finite) {
    const auto& fk = *bq.fk;
    const int K = fk.size();
    const Eigen::VectorXd pi = chains::stationary_finite(fk);
    // m-step rows and their maximal-coupling decomposition against pi
    std::vector<Eigen::MatrixXd> powers;
    {
      Eigen::MatrixXd pw = Eigen::MatrixXd::Identity(K, K);
      int done = 0;
      for (std::size_t mi = 0; mi < M; ++mi) {
        const int target_m = m_list[mi];
        while (done < target_m) {
          pw = pw * fk.transition;
          ++done;
        }
        powers.push_back(pw);
      }
    }
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
      const std::uint64_t rep_seed = derive_seed(seed, "gap.rep", r);
      const auto trained = detail::train_once(model, bp, bq, h, rep_seed);
      const auto err2 = detail::state_errors(model, trained.fit);
      RngStream rng(rep_seed, "gap.couple");
      for (std::size_t mi = 0; mi < M; ++mi) {
        const auto row = powers[mi].row(trained.q_last_index);
        // maximal coupling of categorical(row) and categorical(pi)
        double overlap = 0.0;
        for (int j = 0; j < K; ++j) overlap += std::min(row(j), pi(j));
        const double u = rng.uniform();
        int j1, j2;
        if (u < overlap) {
          double acc = 0.0;
          j1 = K - 1;
          for (int j = 0; j < K; ++j) {
            acc += std::min(row(j), pi(j));
            if (u < acc) {
              j1 = j;
              break;
            }
          }
          j2 = j1;
        } else {
          const double u1 = rng.uniform() * (1.0 - overlap);
          const double u2 = rng.uniform() * (1.0 - overlap);
          auto residual_draw = [&](bool from_row, double uu) {
            double acc = 0.0;
            for (int j = 0; j < K; ++j) {
              const double res = from_row ? row(j) - std::min(row(j), pi(j))
                                          : pi(j) - std::min(row(j), pi(j));
              acc += res;
              if (uu < acc) return j;
            }
            return K - 1;
          };
          j1 = residual_draw(true, u1);
          j2 = residual_draw(false, u2);
        }
        diffs[r * M + mi] = err2[static_cast<std::size_t>(j1)] -
                            err2[static_cast<std::size_t>(j2)];
      }
    });
  } else {
    const TargetPointSource test_src(model.target);
    parallel_for(static_cast<std::size_t>(reps), [&](std::size_t r) {
      const std::uint64_t rep_seed = derive_seed(seed, "gap.rep", r);
      const auto trained = detail::train_once(model, bp, bq, h, rep_seed);
      RngStream rng(rep_seed, "gap.future");
      std::vector<double> x = trained.q_last_state;
      std::vector<double> xi(static_cast<std::size_t>(d));
      int walked = 0;
      for (std::size_t mi = 0; mi < M; ++mi) {
        while (walked < m_list[mi]) {
          chains::step_continuous(bq.cspec, rng, x.data());
          ++walked;
        }
        const double e1 =
            estimator::nw_predict(trained.fit, x) - model.regression(x);
        double e2;
        if (independence) {
          e2 = e1;  // m-step law equals the invariant law: same draw
        } else {
          RngStream prng(rep_seed, "gap.pi", mi);
          test_src.draw(prng, 1, xi.data());
          e2 = estimator::nw_predict(trained.fit, xi) - model.regression(xi);
        }
        diffs[r * M + mi] = e1 * e1 - e2 * e2;
      }
    });
  }

  std::vector<GapDecayRow> rows(M);
  std::vector<double> col(static_cast<std::size_t>(reps));
  for (std::size_t mi = 0; mi < M; ++mi) {
    for (std::size_t r = 0; r < static_cast<std::size_t>(reps); ++r)
      col[r] = diffs[r * M + mi];
    GapDecayRow& row = rows[mi];
    row.m = m_list[mi];
    row.mean_diff = mean(col);
    row.gap = std::abs(row.mean_diff);
    row.se = std_error(col);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Rate sweep

struct RatePoint {
  long long n = 0, n_p = 0, n_q = 0;
  double h = 0.0;
  double risk = 0.0;
  double se = 0.0;
  double bound = std::numeric_limits<double>::quiet_NaN();
};

struct RateFit {
  std::vector<RatePoint> points;
  double slope = 0.0;
  double slope_stderr = 0.0;
  double target_exponent = 0.0;
};

using BandwidthRule = std::function<double(long long n_p, long long n_q)>;

inline similarity::SupportBox support_box(const chains::KernelSpec& k) {
  const int d = chains::ambient_dim(k);
  similarity::SupportBox box;
  box.lo.assign(static_cast<std::size_t>(d), 0.0);
  box.hi.assign(static_cast<std::size_t>(d), 1.0);
  if (const auto* e = std::get_if<chains::EmbeddedSpec>(&k)) {
    for (int i = e->inner_dim(); i < e->ambient_dim; ++i)
      box.hi[static_cast<std::size_t>(i)] = 0.0;
  } else if (const auto* f = std::get_if<chains::FiniteKernel>(&k)) {
    for (int c = 0; c < f->dim(); ++c) {
      box.lo[static_cast<std::size_t>(c)] = f->states.col(c).minCoeff();
      box.hi[static_cast<std::size_t>(c)] = f->states.col(c).maxCoeff();
    }
  }
  return box;
}

// Runs the empirical risk along a sample-size schedule and fits the log-log
// slope over all points. Aborts when the training support cannot reach the
// target support at the scheduled bandwidths (infinite similarity).
inline RateFit rate_sweep(const ShiftModel& model_template,
                          std::span<const long long> n_list, double frac_p,
                          const BandwidthRule& h_rule, int reps,
                          long long test_n, std::uint64_t seed,
                          double target_exponent = 0.0) {
  if (n_list.size() < 4)
    throw ValidationError("rate sweep: need at least 4 sample sizes");
  if (!(frac_p >= 0.0 && frac_p <= 1.0))
    throw ValidationError("rate sweep: frac_p must lie in [0,1]");
  RateFit fit;
  fit.target_exponent = target_exponent;
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    const long long n = n_list[i];
    ShiftModel model = model_template;
    model.n_p = std::llround(frac_p * static_cast<double>(n));
    model.n_q = n - model.n_p;
    const double h = h_rule(model.n_p, model.n_q);
    if (model.n_q == 0) {
      const auto ex = similarity::explosion_check(
          support_box(model.source), support_box(model.target), h);
      if (ex.explodes)
        throw ExplosionError(
            "rate sweep: target support unreachable from the training "
            "support at h = " + format_g17(h) + " (similarity is infinite)");
    }
    const RiskReport rr = generalization_risk(
        model, h, test_n, reps, derive_seed(seed, "rate.point", i));
    RatePoint pt;
    pt.n = n;
    pt.n_p = model.n_p;
    pt.n_q = model.n_q;
    pt.h = h;
    pt.risk = rr.risk_mean;
    pt.se = rr.risk_se;
    fit.points.push_back(pt);
  }
  std::vector<double> lx, ly;
  for (const auto& p : fit.points) {
    lx.push_back(std::log(static_cast<double>(p.n)));
    ly.push_back(std::log(p.risk));
  }
  const LineFit lf = fit_line(lx, ly);
  fit.slope = lf.slope;
  fit.slope_stderr = lf.slope_stderr;
  return fit;
}

}  // namespace shiftlab::risk
