#include <Eigen/Dense>
#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "shiftlab/numeric.hpp"
#include "shiftlab/spectral.hpp"
#include "test_support.hpp"

using namespace shiftlab;
using namespace shiftlab::chains;
using namespace shiftlab::spectral;
using testsupport::delta;
using testsupport::random_reversible;
using testsupport::two_state;

namespace {

FiniteKernel three_cycle() {
  FiniteKernel k;
  k.transition = Eigen::MatrixXd::Zero(3, 3);
  k.transition(0, 1) = 1.0;
  k.transition(1, 2) = 1.0;
  k.transition(2, 0) = 1.0;
  k.states = Eigen::MatrixXd(3, 1);
  k.states << 0.0, 0.5, 1.0;
  return k;
}

FiniteKernel independence_kernel(const Eigen::VectorXd& pi) {
  const int K = static_cast<int>(pi.size());
  FiniteKernel k;
  k.transition = Eigen::MatrixXd(K, K);
  for (int i = 0; i < K; ++i) k.transition.row(i) = pi.transpose();
  k.states = Eigen::MatrixXd(K, 1);
  for (int i = 0; i < K; ++i) k.states(i, 0) = double(i) / std::max(1, K - 1);
  return k;
}

}  // namespace

TEST_CASE("adjoint of a reversible kernel is itself") {
  const FiniteKernel k = two_state(0.3, 0.1);
  const Eigen::VectorXd pi = stationary_finite(k);
  const FiniteKernel adj = adjoint_finite(k, pi);
  REQUIRE((adj.transition - k.transition).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("adjoint of the 3-cycle is the reverse cycle") {
  FiniteKernel k = three_cycle();
  const Eigen::VectorXd pi = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
  const FiniteKernel adj = adjoint_finite(k, pi);
  REQUIRE((adj.transition - k.transition.transpose()).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("adjoint rows are stochastic and pi stays invariant") {
  RngStream rng(5, "test");
  for (int rep = 0; rep < 10; ++rep) {
    const FiniteKernel k = testsupport::random_dense_kernel(6, rng);
    const Eigen::VectorXd pi = stationary_finite(k);
    const FiniteKernel adj = adjoint_finite(k, pi);
    for (int i = 0; i < 6; ++i)
      REQUIRE(adj.transition.row(i).sum() == Catch::Approx(1.0).margin(1e-12));
    REQUIRE((adj.transition.transpose() * pi - pi).cwiseAbs().maxCoeff() <
            1e-10);
  }
}

TEST_CASE("adjoint rejects a non-invariant law") {
  const FiniteKernel k = two_state(0.3, 0.1);
  Eigen::VectorXd bad(2);
  bad << 0.5, 0.5;
  REQUIRE_THROWS_AS(adjoint_finite(k, bad), ValidationError);
}

TEST_CASE("absolute gap closed forms for two-state chains") {
  // second eigenvalue of the two-state chain is 1 - a - b
  REQUIRE(absolute_gap_finite(two_state(0.5, 0.5)).value ==
          Catch::Approx(1.0).margin(1e-12));
  REQUIRE(absolute_gap_finite(two_state(0.3, 0.1)).value ==
          Catch::Approx(0.4).margin(1e-12));
}

TEST_CASE("independence kernel has gap one") {
  Eigen::VectorXd pi(3);
  pi << 0.2, 0.3, 0.5;
  const FiniteKernel k = independence_kernel(pi);
  REQUIRE(absolute_gap_finite(k).value == Catch::Approx(1.0).margin(1e-12));
  const PseudoGap ps = pseudo_gap_finite(k, 10);
  REQUIRE(ps.value == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(ps.argmax_k == 1);
  REQUIRE(mixing_time_finite(k, pi) == 1);
}

TEST_CASE("periodic kernels report zero gap with a warning") {
  const AbsoluteGap g = absolute_gap_finite(three_cycle());
  REQUIRE(g.value == 0.0);
  REQUIRE(g.periodic_warning);
}

TEST_CASE("symmetric two-state chain: pseudo gap 1 at k = 1") {
  const PseudoGap ps = pseudo_gap_finite(two_state(0.5, 0.5), 10);
  REQUIRE(ps.value == Catch::Approx(1.0).margin(1e-12));
  REQUIRE(ps.argmax_k == 1);
}

TEST_CASE("3-cycle has pseudo gap 0 for every k") {
  const PseudoGap ps = pseudo_gap_finite(three_cycle(), 12);
  REQUIRE(ps.value == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("reversible chain of inequalities") {
  RngStream rng(11, "test");
  for (int rep = 0; rep < 20; ++rep) {
    const int K = 2 + int(rng.uniform_index(6));
    const FiniteKernel k = random_reversible(K, rng);
    const double gap = absolute_gap_finite(k).value;
    const double lambda = 1.0 - gap;
    const PseudoGap ps = pseudo_gap_finite(k, 50);
    REQUIRE(ps.value >= 1.0 - lambda * lambda - 1e-9);
    REQUIRE(1.0 - lambda * lambda >= gap - 1e-9);
    const Eigen::VectorXd pi = stationary_finite(k);
    const int tau = mixing_time_finite(k, pi);
    REQUIRE(ps.value >= 0.5 / tau - 1e-9);
  }
}

TEST_CASE("pseudo gap is nondecreasing in k_max") {
  RngStream rng(13, "test");
  const FiniteKernel k = testsupport::random_dense_kernel(5, rng, 0.05);
  double prev = 0.0;
  for (int kmax : {1, 2, 5, 10, 25, 50}) {
    const double v = pseudo_gap_finite(k, kmax).value;
    REQUIRE(v >= prev - 1e-15);
    prev = v;
  }
}

TEST_CASE("mixing time examples") {
  const FiniteKernel k = two_state(0.3, 0.1);
  const Eigen::VectorXd pi = stationary_finite(k);
  // brute-force oracle: TV at n=2 is 0.27, at n=3 is 0.162
  Eigen::MatrixXd p2 = k.transition * k.transition;
  double tv2 = 0.0, tv3 = 0.0;
  const Eigen::MatrixXd p3 = p2 * k.transition;
  for (int i = 0; i < 2; ++i) {
    tv2 = std::max(tv2, 0.5 * ((p2.row(i).transpose() - pi).cwiseAbs().sum()));
    tv3 = std::max(tv3, 0.5 * ((p3.row(i).transpose() - pi).cwiseAbs().sum()));
  }
  REQUIRE(tv2 > 0.25);
  REQUIRE(tv3 <= 0.25);
  REQUIRE(mixing_time_finite(k, pi) == 3);
  REQUIRE(mixing_time_finite(two_state(0.5, 0.5),
                             stationary_finite(two_state(0.5, 0.5))) == 1);
}

TEST_CASE("squaring the kernel cannot slow mixing") {
  RngStream rng(17, "test");
  for (int rep = 0; rep < 10; ++rep) {
    const FiniteKernel k = testsupport::random_dense_kernel(5, rng, 0.02);
    FiniteKernel k2 = k;
    k2.transition = k.transition * k.transition;
    const Eigen::VectorXd pi = stationary_finite(k);
    REQUIRE(mixing_time_finite(k2, pi) <= mixing_time_finite(k, pi));
  }
}

TEST_CASE("doeblin rate conversion") {
  REQUIRE(doeblin_to_rate(1.0, 1).kappa == 0.0);
  const auto r1 = doeblin_to_rate(0.5, 1);
  REQUIRE(r1.kappa == Catch::Approx(0.5));
  REQUIRE(r1.c == Catch::Approx(4.0));
  const auto r2 = doeblin_to_rate(0.75, 2);
  REQUIRE(r2.kappa == Catch::Approx(0.5));
  REQUIRE(r2.c == Catch::Approx(8.0));
}

TEST_CASE("bernstein tail: limits and monotonicity") {
  const double dn = 1.7;
  double prev = bernstein_tail(0.5, 100, 0.25, 0.75, 1.5, dn, 1e-9);
  REQUIRE(prev == Catch::Approx(dn).margin(1e-6));  // x -> 0+: exp(0) = 1
  for (double x : {1.0, 2.0, 5.0, 10.0, 50.0}) {
    const double v = bernstein_tail(0.5, 100, 0.25, 0.75, 1.5, dn, x);
    REQUIRE(v < prev);
    prev = v;
  }
}

TEST_CASE("bernstein bound dominates empirical lower tails") {
  // centered indicator sums on the stationary 0.3/0.1 chain
  const FiniteKernel k = two_state(0.3, 0.1);
  const Eigen::VectorXd pi = stationary_finite(k);
  const double gamma = pseudo_gap_finite(k, 50).value;
  const double pif = pi(0);
  const double varf = pif * (1.0 - pif);
  const double supdev = std::max(pif, 1.0 - pif);
  const int n = 200, reps = 4000;
  for (double frac : {0.1, 0.2}) {
    const double x = frac * n;
    int hits = 0;
    for (int r = 0; r < reps; ++r) {
      const auto idx = sample_finite_indices(k, pi, n, derive_seed(2024, "bern", r));
      int cnt = 0;
      for (int s : idx) cnt += (s == 0);
      if (cnt - n * pif <= -x) ++hits;
    }
    const double freq = double(hits) / reps;
    const double bound = bernstein_tail(gamma, n, varf, supdev, 1.0, 1.0, x);
    REQUIRE(freq <= bound);
  }
}

TEST_CASE("negative moment bound: closed-form cases") {
  // constant f == 1: E[1/(1+n)] = 1/(1+n) <= 4/n
  const double b = negative_moment_bound(1.0, 100, 1.0, 0.0, 1.0, 1.0);
  REQUIRE(b == Catch::Approx(0.04));
  REQUIRE(1.0 / 101.0 <= b);
  // 1/n scaling: doubling n halves the bound
  const double b2 = negative_moment_bound(1.0, 200, 1.0, 0.0, 1.0, 1.0);
  REQUIRE(b2 == Catch::Approx(b / 2.0));
  REQUIRE_THROWS_AS(negative_moment_bound(1.0, 100, 0.0, 0.5, 1.0, 1.0),
                    ValidationError);
  REQUIRE_THROWS_AS(negative_moment_bound(0.1, 5, 1.0, 0.5, 1.0, 1.0),
                    ValidationError);
}

TEST_CASE("negative moment bound dominates a Monte Carlo estimate") {
  const FiniteKernel k = two_state(0.3, 0.1);
  const Eigen::VectorXd pi = stationary_finite(k);
  const double gamma = pseudo_gap_finite(k, 50).value;
  const double pif = pi(0);
  const int n = 2000, reps = 3000;
  std::vector<double> vals(reps);
  for (int r = 0; r < reps; ++r) {
    const auto idx = sample_finite_indices(k, pi, n, derive_seed(7, "negmom", r));
    long long cnt = 0;
    for (int s : idx) cnt += (s == 0);
    vals[static_cast<std::size_t>(r)] = 1.0 / (1.0 + double(cnt));
  }
  const double est = mean(vals);
  const double se = std_error(vals);
  const double bound =
      negative_moment_bound(gamma, n, pif, std::max(pif, 1.0 - pif), 1.0, 1.0);
  REQUIRE(est - 3.0 * se <= bound);
}

TEST_CASE("spectral report for continuous families") {
  const KernelSpec beta = BetaChainSpec{1.0};
  const SpectralReport r = analyze_continuous(beta);
  REQUIRE_FALSE(r.exact);
  REQUIRE(r.doeblin.has_value());
  REQUIRE(r.doeblin->epsilon == Catch::Approx(2.0 / 3.0));
  REQUIRE(r.doeblin->lag == 1);
  REQUIRE(r.pseudo_gap == Catch::Approx(0.5 / r.mixing_time));
  const KernelSpec ind =
      IndependenceSpec{DistDescriptor{UniformBox{{0.0}, {1.0}}}};
  const SpectralReport ri = analyze_continuous(ind);
  REQUIRE(ri.exact);
  REQUIRE(ri.pseudo_gap == 1.0);
  REQUIRE(ri.mixing_time == 1);
}
