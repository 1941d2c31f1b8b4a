#include "stats/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "util/error.hpp"

namespace mecw::stats {

namespace {

constexpr double kLn10 = 2.302585092994045684;

double log_sum_exp(std::span<const double> values) {
  double peak = -std::numeric_limits<double>::infinity();
  for (double v : values) peak = std::max(peak, v);
  if (!std::isfinite(peak)) return peak;
  double sum = 0.0;
  for (double v : values) sum += std::exp(v - peak);
  return peak + std::log(sum);
}

double log_binomial_pmf(std::int64_t n, std::int64_t i, double log_p, double log_q) {
  double dn = static_cast<double>(n), di = static_cast<double>(i);
  return std::lgamma(dn + 1) - std::lgamma(di + 1) - std::lgamma(dn - di + 1) + di * log_p + (dn - di) * log_q;
}

// Continued fraction for the incomplete beta (modified Lentz).
double beta_continued_fraction(double a, double b, double x) {
  constexpr int kMaxIter = 100000;
  constexpr double kEps = 1e-16;
  constexpr double kTiny = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) return h;
  }
  fail(ErrorCode::internal, "incomplete beta continued fraction did not converge");
}

}  // namespace

std::string_view to_string(TestId id) {
  return id == TestId::point_biserial_t ? "point_biserial_t" : "binomial_vs_null";
}

std::vector<BucketStat> bucketize(std::span<const Observation> trials, std::int64_t width) {
  if (width <= 0) fail(ErrorCode::invalid_argument, "bucketize: width must be positive");
  std::map<std::int64_t, BucketStat> by_label;
  for (const auto& t : trials) {
    // Floor division, also for negative counts.
    std::int64_t q = t.tokens / width;
    if (t.tokens % width != 0 && t.tokens < 0) --q;
    std::int64_t label = q * width;
    auto& b = by_label[label];
    b.label = label;
    b.width = width;
    ++b.n;
    if (t.correct) ++b.k;
  }
  std::vector<BucketStat> out;
  out.reserve(by_label.size());
  for (auto& [label, b] : by_label) {
    b.accuracy = static_cast<double>(b.k) / static_cast<double>(b.n);
    out.push_back(b);
  }
  return out;
}

CleanResult clean_buckets(std::span<const BucketStat> buckets) {
  CleanResult out;
  for (const auto& b : buckets) {
    if (b.n < kMinBucketTrials) out.removed_labels.push_back(b.label);
    else out.kept.push_back(b);
  }
  return out;
}

double binomial_log10_p(std::int64_t n, std::int64_t k, double p0) {
  if (!(p0 > 0.0 && p0 < 1.0)) fail(ErrorCode::invalid_argument, "binomial test: p0 must lie in (0, 1)");
  if (n < 1 || k < 0 || k > n) fail(ErrorCode::invalid_argument, "binomial test: need n >= 1 and 0 <= k <= n");
  const double log_p = std::log(p0), log_q = std::log1p(-p0);
  std::vector<double> terms(static_cast<std::size_t>(n + 1));
  for (std::int64_t i = 0; i <= n; ++i) terms[static_cast<std::size_t>(i)] = log_binomial_pmf(n, i, log_p, log_q);
  // Same relative slack as R's binom.test so ties in probability are included.
  const double cutoff = terms[static_cast<std::size_t>(k)] + std::log1p(1e-7);
  std::vector<double> tail;
  for (double v : terms)
    if (v <= cutoff) tail.push_back(v);
  double log_total = log_sum_exp(tail);
  return std::min(0.0, log_total / kLn10);
}

double binomial_log10_p(const BucketStat& bucket, double p0) { return binomial_log10_p(bucket.n, bucket.k, p0); }

void apply_binomial_test(std::span<BucketStat> buckets, double p0) {
  for (auto& b : buckets) {
    b.log10_p = binomial_log10_p(b, p0);
    b.test_id = TestId::binomial_vs_null;
  }
}

double log_incomplete_beta(double a, double b, double x, double one_minus_x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (one_minus_x <= 0.0) return 0.0;
  double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log(one_minus_x);
  if (x < (a + 1.0) / (a + b + 2.0)) return log_front + std::log(beta_continued_fraction(a, b, x)) - std::log(a);
  // Complement branch: the result is close to 1 here, so no underflow risk.
  double complement = std::exp(log_front + std::log(beta_continued_fraction(b, a, one_minus_x)) - std::log(b));
  return std::log1p(-std::min(complement, 1.0));
}

double student_t_two_sided_log10_p(double t, double df) {
  if (!(df > 0)) fail(ErrorCode::invalid_argument, "t test: df must be positive");
  if (std::isinf(t)) return -std::numeric_limits<double>::infinity();
  double t2 = t * t;
  double x = df / (df + t2);
  double one_minus_x = t2 / (df + t2);
  return log_incomplete_beta(df / 2.0, 0.5, x, one_minus_x) / kLn10;
}

CorrelationResult point_biserial(std::span<const Observation> trials) {
  const auto n = static_cast<std::int64_t>(trials.size());
  if (n < 3) fail(ErrorCode::degenerate_input, "point_biserial: need at least 3 trials");
  double mean = 0.0;
  std::int64_t n1 = 0;
  double sum1 = 0.0, sum0 = 0.0;
  for (const auto& t : trials) {
    double v = static_cast<double>(t.tokens);
    mean += v;
    if (t.correct) ++n1, sum1 += v;
    else sum0 += v;
  }
  const std::int64_t n0 = n - n1;
  if (n1 == 0 || n0 == 0) fail(ErrorCode::degenerate_input, "point_biserial: only one outcome class present");
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (const auto& t : trials) {
    double d = static_cast<double>(t.tokens) - mean;
    ss += d * d;
  }
  double sd = std::sqrt(ss / static_cast<double>(n));  // population standard deviation
  if (!(sd > 0.0)) fail(ErrorCode::degenerate_input, "point_biserial: token counts have zero variance");

  double m1 = sum1 / static_cast<double>(n1), m0 = sum0 / static_cast<double>(n0);
  double p = static_cast<double>(n1) / static_cast<double>(n), q = 1.0 - p;
  double r = std::clamp((m1 - m0) / sd * std::sqrt(p * q), -1.0, 1.0);

  CorrelationResult out;
  out.r_pb = r;
  out.df = n - 2;
  // With t = r sqrt(df / (1 - r^2)), the beta argument df / (df + t^2) is 1 - r^2.
  double r2 = r * r;
  out.log10_p = out.df > 0 ? log_incomplete_beta(out.df / 2.0, 0.5, 1.0 - r2, r2) / kLn10 : 0.0;
  return out;
}

}  // namespace mecw::stats
