#pragma once

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace mecw::stats {

// One graded trial reduced to what the statistics need.
struct Observation {
  std::int64_t tokens = 0;
  bool correct = false;
};

enum class TestId { point_biserial_t, binomial_vs_null };
std::string_view to_string(TestId id);

struct BucketStat {
  std::int64_t label = 0;  // lower edge in tokens
  std::int64_t width = 0;
  std::int64_t n = 0;
  std::int64_t k = 0;
  double accuracy = 0.0;
  double log10_p = 0.0;
  TestId test_id = TestId::binomial_vs_null;

  std::int64_t upper_edge() const { return label + width; }
};

struct CorrelationResult {
  double r_pb = 0.0;
  std::int64_t df = 0;
  double log10_p = 0.0;
};

// label = floor(tokens / width) * width; one entry per nonempty bucket,
// ascending. log10_p is left at 0 until a test is applied.
std::vector<BucketStat> bucketize(std::span<const Observation> trials, std::int64_t width);

inline constexpr std::int64_t kMinBucketTrials = 3;

struct CleanResult {
  std::vector<BucketStat> kept;
  std::vector<std::int64_t> removed_labels;
};

// Drops buckets holding fewer than three trials.
CleanResult clean_buckets(std::span<const BucketStat> buckets);

// Two-sided exact binomial test of k successes in n at null p0, as log10 of
// the p-value. Outcomes no more likely than the observed one are summed in
// log space.
double binomial_log10_p(std::int64_t n, std::int64_t k, double p0);
double binomial_log10_p(const BucketStat& bucket, double p0);

// Applies binomial_log10_p to every bucket.
void apply_binomial_test(std::span<BucketStat> buckets, double p0);

// Throws Error(degenerate_input) for fewer than 3 trials, a single outcome
// class, or constant token counts.
CorrelationResult point_biserial(std::span<const Observation> trials);

// log10 of the two-sided Student-t p-value P(|T| >= |t|) with df degrees of
// freedom; stays finite far below the double underflow threshold.
double student_t_two_sided_log10_p(double t, double df);

// Natural log of the regularized incomplete beta I_x(a, b); the complement
// 1 - x is passed separately to keep precision near x = 1.
double log_incomplete_beta(double a, double b, double x, double one_minus_x);

}  // namespace mecw::stats
