#include <doctest.h>

#include <cmath>

#include "modelio/modelio.hpp"
#include "stats/stats.hpp"
#include "util/error.hpp"
#include "util/rng.hpp"
#include "window/window.hpp"

using namespace mecw;

namespace {

std::vector<stats::BucketStat> series(std::int64_t width, const std::vector<std::pair<std::int64_t, double>>& acc,
                                      std::int64_t n = 100) {
  std::vector<stats::BucketStat> out;
  for (const auto& [label, a] : acc) {
    auto k = static_cast<std::int64_t>(std::llround(a * static_cast<double>(n)));
    out.push_back({label, width, n, k, static_cast<double>(k) / static_cast<double>(n)});
  }
  return out;
}

// Simulated accuracies with binomial noise, one bucket every `width` tokens.
std::vector<stats::BucketStat> noisy(const model::DegradationProfile& p, std::int64_t width, std::int64_t max_tokens,
                                     int n, std::uint64_t seed) {
  rng::Stream stream(seed);
  std::vector<stats::BucketStat> out;
  for (std::int64_t label = 0; label < max_tokens; label += width) {
    std::int64_t k = 0;
    for (int i = 0; i < n; ++i) k += stream.unit() < p.probability(static_cast<double>(label) + width / 2.0);
    out.push_back({label, width, n, k, static_cast<double>(k) / n});
  }
  return out;
}

}  // namespace

TEST_CASE("threshold_sustained: worked example") {
  auto b = series(100, {{0, 0.95}, {100, 0.95}, {200, 0.60}, {300, 0.40}});
  auto e = window::estimate_threshold(b, {});
  REQUIRE(e.mecw_tokens);
  CHECK(*e.mecw_tokens == 200);
  CHECK(e.baseline_accuracy == doctest::Approx(0.95));
  CHECK(e.trace.size() == 4);
  CHECK(e.trace[2].degraded);
}

TEST_CASE("threshold_sustained: a single noisy bucket does not end the window") {
  auto b = series(100, {{0, 0.95}, {100, 0.95}, {200, 0.60}, {300, 0.94}, {400, 0.93}});
  auto e = window::estimate_threshold(b, {});
  CHECK(e.at_or_above_max_tested());
  CHECK(e.mecw_text() == "at_or_above_max_tested");
}

TEST_CASE("threshold_sustained agrees with a brute-force scan") {
  rng::Stream stream(17);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<std::pair<std::int64_t, double>> acc;
    auto len = static_cast<int>(stream.between(2, 12));
    for (int i = 0; i < len; ++i) acc.emplace_back(i * 100, static_cast<double>(stream.between(0, 20)) / 20.0);
    auto b = series(100, acc, 20);
    window::EstimatorConfig cfg;
    cfg.k_sustain = static_cast<int>(stream.between(1, 3));
    auto e = window::estimate_threshold(b, cfg);

    double base = 0;
    int nb = std::min(2, len);
    for (int i = 0; i < nb; ++i) base += b[i].accuracy;
    base /= nb;
    std::optional<std::int64_t> expected;
    for (int start = 0; start + cfg.k_sustain <= len && !expected; ++start) {
      bool all = true;
      for (int j = start; j < start + cfg.k_sustain; ++j) all = all && b[j].accuracy < base - cfg.delta;
      if (all) expected = start == 0 ? b[0].label : b[start - 1].upper_edge();
    }
    REQUIRE(e.mecw_tokens == expected);
  }
}

TEST_CASE("changepoint_bernoulli matches an exhaustive likelihood scan") {
  rng::Stream stream(5);
  auto ll = [](double k, double n) {
    double v = 0;
    if (k > 0) v += k * std::log(k / n);
    if (n - k > 0) v += (n - k) * std::log((n - k) / n);
    return v;
  };
  for (int trial = 0; trial < 300; ++trial) {
    auto len = static_cast<int>(stream.between(2, 10));
    std::vector<stats::BucketStat> b;
    for (int i = 0; i < len; ++i) {
      auto n = stream.between(3, 40);
      auto k = stream.between(0, n);
      b.push_back({i * 100, 100, n, k, static_cast<double>(k) / n});
    }
    auto cp = window::changepoint_bernoulli(b, 5.0);
    double kt = 0, nt = 0;
    for (const auto& x : b) kt += x.k, nt += x.n;
    double best = -1e300;
    std::size_t best_cut = 0;
    for (int cut = 1; cut < len; ++cut) {
      double k1 = 0, n1 = 0;
      for (int i = 0; i < cut; ++i) k1 += b[i].k, n1 += b[i].n;
      double v = ll(k1, n1) + ll(kt - k1, nt - n1);
      if (v > best + 1e-9) best = v, best_cut = cut;
    }
    CHECK(cp.cut_index == best_cut);
    CHECK(cp.gain == doctest::Approx(std::max(0.0, best - ll(kt, nt))).epsilon(1e-9));
  }
}

TEST_CASE("changepoint estimate on a clean step") {
  auto b = series(100, {{0, 0.95}, {100, 0.96}, {200, 0.94}, {300, 0.30}, {400, 0.25}});
  window::EstimatorConfig cfg;
  cfg.method = window::Method::changepoint_bernoulli;
  auto e = window::estimate_mecw(b, cfg);
  REQUIRE(e.mecw_tokens);
  CHECK(*e.mecw_tokens == 300);
  REQUIRE(e.change_point);
  CHECK(e.change_point->reliable);
  auto flat = series(100, {{0, 0.9}, {100, 0.9}, {200, 0.9}});
  CHECK(window::estimate_mecw(flat, cfg).at_or_above_max_tested());
}

TEST_CASE("estimators need at least two buckets") {
  auto one = series(100, {{0, 0.9}});
  for (auto m : {window::Method::threshold_sustained, window::Method::changepoint_bernoulli}) {
    window::EstimatorConfig cfg;
    cfg.method = m;
    try {
      window::estimate_mecw(one, cfg);
      FAIL("expected insufficient_data");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::insufficient_data);
    }
  }
}

TEST_CASE("estimates are invariant under accuracy-preserving subsampling") {
  auto big = series(100, {{0, 0.95}, {100, 0.90}, {200, 0.85}, {300, 0.50}, {400, 0.40}, {500, 0.45}}, 100);
  auto small = series(100, {{0, 0.95}, {100, 0.90}, {200, 0.85}, {300, 0.50}, {400, 0.40}, {500, 0.45}}, 20);
  window::EstimatorConfig cfg;
  CHECK(window::estimate_mecw(big, cfg).mecw_tokens == window::estimate_mecw(small, cfg).mecw_tokens);
  cfg.method = window::Method::changepoint_bernoulli;
  cfg.min_gain = 0.5;
  CHECK(window::estimate_mecw(big, cfg).mecw_tokens == window::estimate_mecw(small, cfg).mecw_tokens);
}

TEST_CASE("estimated window is non-decreasing in the breakpoint") {
  int monotone = 0;
  const int runs = 100;
  for (int seed = 0; seed < runs; ++seed) {
    std::int64_t prev = 0;
    bool ok = true;
    for (std::int64_t t0 : {600, 1000, 1400, 1800}) {
      auto p = model::parse_profile("t0=" + std::to_string(t0) + ",w=100,ph=0.98,pl=0.05");
      auto e = window::estimate_mecw(noisy(p, 100, 3000, 25, seed * 10 + 1), {});
      std::int64_t v = e.mecw_tokens.value_or(1 << 30);
      ok = ok && v >= prev;
      prev = v;
    }
    monotone += ok;
  }
  CHECK(monotone >= 95);
}

TEST_CASE("cascade success") {
  CHECK(window::cascade_success(0.7, 3) == doctest::Approx(0.343).epsilon(1e-15));
  CHECK(window::cascade_success(1.0, 50) == 1.0);
  CHECK(window::cascade_success(0.5, 1) == 0.5);
  CHECK_THROWS_AS(window::cascade_success(1.2, 2), Error);
  CHECK_THROWS_AS(window::cascade_success(0.5, 0), Error);
}

TEST_CASE("ranking: open-ended first, then larger window, then reference accuracy, then id") {
  auto r = window::rank_models("summary", {{"c", 500, 0.9}, {"a", std::nullopt, 0.1}, {"b", 800, 0.2},
                                           {"d", 500, 0.95}, {"e", 500, 0.95}});
  std::vector<std::string> order;
  for (const auto& e : r.entries) order.push_back(e.model_id);
  CHECK(order == std::vector<std::string>{"a", "b", "d", "e", "c"});
}
