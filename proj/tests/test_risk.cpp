#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "shiftlab/risk.hpp"
#include "shiftlab/spectral.hpp"
#include "test_support.hpp"

using namespace shiftlab;
using namespace shiftlab::chains;
using namespace shiftlab::risk;
using testsupport::two_state;

namespace {

ShiftModel two_state_model(double beta_L, double sigma) {
  ShiftModel m;
  m.source = two_state(0.3, 0.1);
  m.target = two_state(0.2, 0.2);
  m.n_p = 400;
  m.n_q = 200;
  m.noise.sigma = sigma;
  m.space = MetricSpace{1, Metric::SupNorm, 1.0};
  m.regression = estimator::holder_library(
      "power", 1.0, beta_L, m.space);  // f(x) = L x on the embedded atoms
  return m;
}

ShiftModel uniform_iid_model(double sigma) {
  ShiftModel m;
  const IndependenceSpec unif{DistDescriptor{UniformBox{{0.0}, {1.0}}}};
  m.source = unif;
  m.target = unif;
  m.n_p = 500;
  m.n_q = 0;
  m.noise.sigma = sigma;
  m.space = MetricSpace{1, Metric::SupNorm, 1.0};
  m.regression = estimator::holder_library("sine", 1.0, 1.0, m.space);
  return m;
}

}  // namespace

TEST_CASE("risk vanishes for the noiseless zero function") {
  ShiftModel m = uniform_iid_model(0.0);
  m.regression = estimator::holder_library("zero", 1.0, 1.0, m.space);
  const RiskReport r = generalization_risk(m, 0.1, 200, 4, 31);
  REQUIRE(r.risk_mean == 0.0);
  REQUIRE(r.risk_se == 0.0);
}

TEST_CASE("risk vanishes for a noiseless constant at full coverage") {
  ShiftModel m = uniform_iid_model(0.0);
  m.regression = estimator::holder_library("constant", 1.0, 0.9, m.space);
  const RiskReport r = generalization_risk(m, 1.0, 200, 4, 37);
  REQUIRE(r.risk_mean < 1e-25);
}

TEST_CASE("bound constant: stationary unit-gap case gives 336") {
  ShiftModel m = two_state_model(1.0, 0.5);
  BoundInputs in;
  in.gamma_ps_p = 1.0;
  in.gamma_ps_q = 1.0;
  in.rho = 2.0;
  in.second_moment = 0.25;
  const RiskReport r = theoretical_upper_bound(m, 0.3, in);
  REQUIRE(r.constant_c == Catch::Approx(336.0));
  REQUIRE(r.bound >= r.bias_term);
  REQUIRE(r.bias_term == Catch::Approx(1.0 * std::pow(0.3, 2.0)));
}

TEST_CASE("bound constant doubles when the dominant gap halves") {
  ShiftModel m = two_state_model(1.0, 0.5);
  BoundInputs in;
  in.gamma_ps_p = 1.0;
  in.rho = 2.0;
  in.second_moment = 0.25;
  in.gamma_ps_q = 0.5;
  const double c1 = theoretical_upper_bound(m, 0.3, in).constant_c;
  in.gamma_ps_q = 0.25;
  const double c2 = theoretical_upper_bound(m, 0.3, in).constant_c;
  REQUIRE(c2 == Catch::Approx(2.0 * c1));
}

TEST_CASE("bound preconditions name the failing block") {
  ShiftModel m = two_state_model(1.0, 0.5);
  m.n_p = 2;
  BoundInputs in;
  in.gamma_ps_p = 0.1;  // needs n_P >= 10
  in.gamma_ps_q = 1.0;
  in.rho = 2.0;
  REQUIRE_THROWS_WITH(theoretical_upper_bound(m, 0.3, in),
                      Catch::Matchers::ContainsSubstring("P block"));
  m.n_p = 400;
  m.n_q = 1;
  in.gamma_ps_p = 1.0;
  in.gamma_ps_q = 0.2;
  REQUIRE_THROWS_WITH(theoretical_upper_bound(m, 0.3, in),
                      Catch::Matchers::ContainsSubstring("Q block"));
}

TEST_CASE("empirical risk sits below the bound on the two-state model") {
  ShiftModel m = two_state_model(0.8, 0.4);
  const double h = 0.5;  // below the atom gap: per-state averaging
  const auto ps_p = spectral::pseudo_gap_finite(std::get<FiniteKernel>(m.source), 50);
  const auto ps_q = spectral::pseudo_gap_finite(std::get<FiniteKernel>(m.target), 50);
  const Eigen::VectorXd pi_p = stationary_finite(std::get<FiniteKernel>(m.source));
  const Eigen::VectorXd pi_q = stationary_finite(std::get<FiniteKernel>(m.target));
  std::vector<double> pp(pi_p.data(), pi_p.data() + 2),
      qq(pi_q.data(), pi_q.data() + 2);
  // exact rho of the stationary mixture against the target law
  std::vector<double> mix(2);
  const double n = double(m.n_p + m.n_q);
  for (int i = 0; i < 2; ++i)
    mix[i] = (m.n_p * pp[i] + m.n_q * qq[i]) / n;
  const auto rho = similarity::rho_exact_finite(
      mix, qq, std::get<FiniteKernel>(m.source).states, Metric::SupNorm, h);
  BoundInputs in;
  in.gamma_ps_p = ps_p.value;
  in.gamma_ps_q = ps_q.value;
  in.rho = rho.value;
  in.second_moment = target_second_moment(m, 1);
  RiskReport r = generalization_risk(m, h, 400, 16, 2024);
  r = theoretical_upper_bound(m, h, in, r);
  REQUIRE(r.risk_mean - 3.0 * r.risk_se <= r.bound);
}

TEST_CASE("prediction error matches the risk for independence targets") {
  ShiftModel m = uniform_iid_model(0.5);
  m.n_p = 0;
  m.n_q = 300;
  const double h = 0.05;
  const RiskReport risk = generalization_risk(m, h, 400, 24, 5);
  const PredictionErrorEstimate pe = prediction_error(m, h, 3, 2000, 5);
  const double se = std::sqrt(pe.se * pe.se + risk.risk_se * risk.risk_se);
  REQUIRE(std::abs(pe.value - risk.risk_mean) <= 3.0 * se);
}

TEST_CASE("gap decay table: independence kernels give exactly zero") {
  ShiftModel m = uniform_iid_model(0.5);
  m.n_p = 0;
  m.n_q = 100;
  const std::vector<int> ms{1, 2, 4};
  const auto rows = gap_vs_generalization(m, 0.1, ms, 200, 11);
  for (const auto& row : rows) {
    REQUIRE(row.gap == 0.0);
    REQUIRE(row.se == 0.0);
  }
}

TEST_CASE("gap decay table shrinks with the lag on a mixing finite target") {
  ShiftModel m = two_state_model(1.0, 1.0);
  m.n_p = 0;
  m.n_q = 50;
  const std::vector<int> ms{1, 8};
  const auto rows = gap_vs_generalization(m, 0.5, ms, 60000, 17);
  REQUIRE(rows[0].gap > rows[1].gap);
  REQUIRE(rows[0].gap > 3.0 * rows[0].se);  // resolvable signal at m = 1
}

TEST_CASE("rate sweep aborts when the target cannot be reached") {
  ShiftModel m;
  EmbeddedSpec seg;
  seg.inner = IndependenceSpec{DistDescriptor{UniformBox{{0.0}, {1.0}}}};
  seg.ambient_dim = 2;
  m.source = seg;
  m.target = IndependenceSpec{DistDescriptor{UniformBox{{0.0, 0.0}, {1.0, 1.0}}}};
  m.space = MetricSpace{2, Metric::SupNorm, 1.0};
  m.regression = estimator::holder_library("sine", 1.0, 1.0, m.space);
  m.noise.sigma = 0.1;
  m.n_p = 100;
  m.n_q = 0;
  const std::vector<long long> ns{64, 128, 256, 512};
  REQUIRE_THROWS_AS(
      rate_sweep(m, ns, 1.0,
                 [](long long, long long) { return 0.05; }, 2, 50, 3),
      ExplosionError);
}

TEST_CASE("rate sweep runs end to end on a small schedule") {
  const ShiftModel m = uniform_iid_model(0.3);
  const std::vector<long long> ns{128, 256, 512, 1024};
  const RateFit fit = rate_sweep(
      m, ns, 1.0,
      [](long long np, long long) {
        return std::pow(double(np), -1.0 / 3.0);
      },
      8, 200, 99, -2.0 / 3.0);
  REQUIRE(fit.points.size() == 4);
  REQUIRE(fit.slope < -0.3);
  REQUIRE(fit.slope > -1.1);
  for (const auto& p : fit.points) REQUIRE(p.risk > 0.0);
}
