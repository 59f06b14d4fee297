#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <vector>

#include "shiftlab/metric.hpp"
#include "shiftlab/numeric.hpp"
#include "shiftlab/parallel.hpp"
#include "shiftlab/rng.hpp"

using namespace shiftlab;

TEST_CASE("rng streams are reproducible and label-separated") {
  RngStream a(42, "path-P");
  RngStream b(42, "path-P");
  RngStream c(42, "path-Q");
  bool diverged = false;
  for (int i = 0; i < 100; ++i) {
    const double ua = a.uniform();
    REQUIRE(ua == b.uniform());
    if (ua != c.uniform()) diverged = true;
    REQUIRE(ua >= 0.0);
    REQUIRE(ua < 1.0);
  }
  REQUIRE(diverged);
}

TEST_CASE("uniform moments") {
  RngStream r(7, "test");
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    s += u;
    s2 += u * u;
  }
  REQUIRE(std::abs(s / n - 0.5) < 0.005);
  REQUIRE(std::abs(s2 / n - 1.0 / 3.0) < 0.005);
}

TEST_CASE("normal moments") {
  RngStream r(7, "test");
  const int n = 200000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    s += z;
    s2 += z * z;
  }
  REQUIRE(std::abs(s / n) < 0.01);
  REQUIRE(std::abs(s2 / n - 1.0) < 0.02);
}

TEST_CASE("categorical respects cumulative weights") {
  RngStream r(3, "test");
  const std::vector<double> cum{0.2, 0.5, 1.0};
  int counts[3] = {0, 0, 0};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[r.categorical_cum(cum)];
  REQUIRE(std::abs(counts[0] / double(n) - 0.2) < 0.01);
  REQUIRE(std::abs(counts[1] / double(n) - 0.3) < 0.01);
  REQUIRE(std::abs(counts[2] / double(n) - 0.5) < 0.01);
}

TEST_CASE("metric distances") {
  const std::vector<double> a{0.0, 0.0}, b{0.3, 0.4};
  REQUIRE(distance(Metric::SupNorm, a, b) == Catch::Approx(0.4));
  REQUIRE(distance(Metric::Euclidean, a, b) == Catch::Approx(0.5));
  // random triples satisfy the triangle inequality
  RngStream r(11, "test");
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> x{r.uniform(), r.uniform()}, y{r.uniform(), r.uniform()},
        z{r.uniform(), r.uniform()};
    for (Metric m : {Metric::SupNorm, Metric::Euclidean}) {
      REQUIRE(distance(m, x, z) <=
              distance(m, x, y) + distance(m, y, z) + 1e-12);
      REQUIRE(distance(m, x, y) == Catch::Approx(distance(m, y, x)));
    }
  }
}

TEST_CASE("pairwise sum and std error") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = double(i % 7) - 3.0;
  double plain = 0.0;
  for (double x : v) plain += x;
  REQUIRE(pairwise_sum(v) == Catch::Approx(plain));
  REQUIRE(std_error(std::vector<double>{1.0, 1.0, 1.0}) == 0.0);
}

TEST_CASE("line fit recovers exact affine data") {
  std::vector<double> x, y;
  for (int i = 1; i <= 20; ++i) {
    x.push_back(std::log(double(i)));
    y.push_back(3.0 - 2.0 / 3.0 * x.back());
  }
  const LineFit f = fit_line(x, y);
  REQUIRE(std::abs(f.slope + 2.0 / 3.0) < 1e-12);
  REQUIRE(f.slope_stderr < 1e-12);
}

TEST_CASE("ks statistic of uniform sample is small") {
  RngStream r(5, "test");
  std::vector<double> s(10000);
  for (auto& v : s) v = r.uniform();
  const double d = ks_statistic(s, [](double x) { return x; });
  REQUIRE(d < ks_critical_1pct(s.size()));
}

TEST_CASE("format_g17 round-trips and spells infinities") {
  const double x = 0.1234567890123456789;
  REQUIRE(std::stod(format_g17(x)) == x);
  REQUIRE(format_g17(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("parallel_for writes each slot exactly once") {
  std::vector<double> out(1000, 0.0);
  parallel_for(out.size(), [&](std::size_t i) { out[i] = double(i); });
  for (std::size_t i = 0; i < out.size(); ++i) REQUIRE(out[i] == double(i));
}
