#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "stats/stats.hpp"
#include "util/error.hpp"

using namespace mecw;

TEST_CASE("bucket labels are floor(tokens / width) * width") {
  std::vector<stats::Observation> obs{{0, true}, {99, false}, {100, true}, {250, true}, {250, false}, {1999, true}};
  auto b = stats::bucketize(obs, 100);
  REQUIRE(b.size() == 4);
  CHECK(b[0].label == 0);
  CHECK(b[0].n == 2);
  CHECK(b[0].k == 1);
  CHECK(b[1].label == 100);
  CHECK(b[2].label == 200);
  CHECK(b[2].accuracy == 0.5);
  CHECK(b[3].label == 1900);
  CHECK(b[3].upper_edge() == 2000);
  CHECK_THROWS_AS(stats::bucketize(obs, 0), Error);
}

TEST_CASE("clean_buckets drops n <= 2 and keeps n = 3") {
  std::vector<stats::BucketStat> raw{{0, 100, 1, 1, 1.0}, {100, 100, 2, 1, 0.5}, {200, 100, 3, 2, 2.0 / 3}};
  auto r = stats::clean_buckets(raw);
  REQUIRE(r.kept.size() == 1);
  CHECK(r.kept[0].label == 200);
  CHECK(r.removed_labels == std::vector<std::int64_t>{0, 100});
}

TEST_CASE("binomial tail matches direct summation for every n <= 50") {
  for (double p0 : {0.5, 0.3, 0.05, 0.9}) {
    for (int n = 1; n <= 50; ++n) {
      for (int k = 0; k <= n; ++k) {
        double direct = static_cast<double>(oracle::binomial_two_sided_direct(n, k, p0));
        double ours = std::pow(10.0, stats::binomial_log10_p(n, k, p0));
        CAPTURE(n);
        CAPTURE(k);
        CAPTURE(p0);
        REQUIRE(std::fabs(ours - direct) <= 1e-9 * direct);
      }
    }
  }
}

TEST_CASE("binomial log10 p stays finite and monotone far into the tail") {
  double prev = 0.0;
  for (int n = 10; n <= 1000; n += 10) {
    double v = stats::binomial_log10_p(n, n, 0.5);
    CHECK(std::isfinite(v));
    CHECK(v < prev);
    prev = v;
  }
  CHECK(prev < -300);
  // n successes out of n at p0 = 0.5: both tails count, so log10 p = log10(2) - n log10(2).
  CHECK(stats::binomial_log10_p(1000, 1000, 0.5) == doctest::Approx(std::log10(2.0) - 1000 * std::log10(2.0)));
  CHECK(stats::binomial_log10_p(10, 5, 0.5) == 0.0);
}

TEST_CASE("point-biserial on the four-trial example") {
  std::vector<stats::Observation> obs{{100, true}, {200, true}, {300, false}, {400, false}};
  auto r = stats::point_biserial(obs);
  CHECK(r.r_pb == doctest::Approx(-0.894).epsilon(0.001 / 0.894));
  CHECK(r.df == 2);
}

TEST_CASE("point-biserial degenerate inputs") {
  std::vector<stats::Observation> one_class{{1, true}, {2, true}, {3, true}};
  std::vector<stats::Observation> constant{{5, true}, {5, false}, {5, true}};
  std::vector<stats::Observation> two{{1, true}, {2, false}};
  for (const auto* obs : {&one_class, &constant, &two}) {
    try {
      stats::point_biserial(*obs);
      FAIL("expected degenerate_input");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::degenerate_input);
    }
  }
}

TEST_CASE("Student t p-values agree with numerical integration of the density") {
  CHECK(std::pow(10.0, stats::student_t_two_sided_log10_p(2.228, 10)) == doctest::Approx(0.050).epsilon(0.02));
  for (double df : {1.0, 2.0, 5.0, 10.0, 30.0, 120.0})
    for (double t : {0.0, 0.3, 1.0, 2.228, 4.0, -3.0}) {
      double oracle_p = oracle::t_two_sided_integrated(t, df);
      double ours = std::pow(10.0, stats::student_t_two_sided_log10_p(t, df));
      CAPTURE(df);
      CAPTURE(t);
      CHECK(ours == doctest::Approx(oracle_p).epsilon(1e-7));
    }
}

TEST_CASE("Student t log p stays finite and monotone down to -300 and beyond") {
  double prev = 0.0;
  for (double t = 1.0; t <= 1e9; t *= 1.5) {
    double v = stats::student_t_two_sided_log10_p(t, 200);
    REQUIRE(std::isfinite(v));
    REQUIRE(v < prev);
    prev = v;
  }
  CHECK(prev < -300);
}

TEST_CASE("incomplete beta matches the closed forms") {
  // I_x(1, 1) = x and I_x(a, 1) = x^a.
  for (double x : {0.1, 0.5, 0.9}) {
    CHECK(std::exp(stats::log_incomplete_beta(1, 1, x, 1 - x)) == doctest::Approx(x));
    CHECK(std::exp(stats::log_incomplete_beta(3.5, 1, x, 1 - x)) == doctest::Approx(std::pow(x, 3.5)));
  }
}

TEST_CASE("correlation log p decreases as |r| grows at fixed df") {
  const double df = 20;
  double prev = 0.0;
  for (double r = 0.05; r < 0.9999; r += 0.01) {
    double t = r * std::sqrt(df / (1 - r * r));
    double v = stats::student_t_two_sided_log10_p(t, df);
    CHECK(v < prev);
    CHECK(stats::student_t_two_sided_log10_p(-t, df) == v);
    prev = v;
  }
}
