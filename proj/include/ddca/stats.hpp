#ifndef DDCA_STATS_HPP
#define DDCA_STATS_HPP

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ddca/segmentation.hpp"

namespace ddca {

// Regularized incomplete beta function I_x(a, b), a, b > 0, x in [0, 1].
// Continued-fraction evaluation, relative tolerance 1e-10 or better.
double regularized_incomplete_beta(double a, double b, double x);

// CDF of Student's t distribution with df > 0 degrees of freedom.
double student_t_cdf(double t, double df);

struct SummaryRow {
    std::string antigen_type;
    std::uint64_t segment_size = 0; // 0 = unsegmented
    double min = 0.0;
    double mean = 0.0;
    double max = 0.0;
    double stdev = 0.0; // sample (n-1); 0 when n = 1
    std::uint64_t n_segments = 0;
};

// Min / mean / max / sample standard deviation over one antigen type's
// per-segment scores. Throws InsufficientDataError on an empty series.
SummaryRow summarize(std::span<const double> series, const std::string& antigen_type,
                     std::uint64_t segment_size);

enum class Direction { greater, less };
enum class TestKind { two_sample_two_sided, one_sample_one_sided };
enum class TwoSampleMethod { welch, pooled };

const char* to_string(Direction d);
Direction direction_from_string(const std::string& name); // throws ConfigError

struct TTestResult {
    TestKind kind = TestKind::two_sample_two_sided;
    double statistic = 0.0;
    double degrees_of_freedom = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool significant = false; // p_value < alpha
    std::optional<Direction> direction; // one-sample only
};

// Two-sided two-sample t-test. Welch by default (unequal variances,
// Welch-Satterthwaite degrees of freedom); the pooled classic variant is
// selectable. Requires at least two samples per side. When both sides
// have zero variance, p is 1 for equal means and 0 otherwise.
TTestResult welch_two_sided(std::span<const double> a, std::span<const double> b,
                            double alpha = 0.05);
TTestResult pooled_two_sided(std::span<const double> a, std::span<const double> b,
                             double alpha = 0.05);
TTestResult two_sample_two_sided(std::span<const double> a, std::span<const double> b,
                                 double alpha, TwoSampleMethod method);

// One-sample one-sided t-test of the series mean against true_mean, in the
// stated direction. Requires at least two samples.
TTestResult one_sample_one_sided(std::span<const double> x, double true_mean,
                                 Direction direction, double alpha = 0.05);

// One segmented run reduced to per-type score series (one value per
// segment in which the type appeared).
struct RunSeries {
    std::uint64_t segment_size = 0;
    std::map<std::string, std::vector<double>> series;
};

RunSeries run_series_from_reports(std::span<const SegmentReport> reports,
                                  std::uint64_t segment_size);

struct TestPlan {
    double alpha = 0.05;
    TwoSampleMethod method = TwoSampleMethod::welch;
    // Mandatory per-type direction for the vs-baseline one-sided tests.
    std::map<std::string, Direction> directions;
};

struct PairwiseCell {
    std::uint64_t size_a = 0;
    std::uint64_t size_b = 0;
    std::optional<TTestResult> result; // empty = insufficient data
};

struct BaselineCell {
    std::uint64_t segment_size = 0;
    std::optional<TTestResult> result;
};

struct TypeComparison {
    std::string antigen_type;
    double baseline_mu = 0.0; // the unsegmented run's score, used as mu0
    std::vector<PairwiseCell> pairwise;     // upper triangle, (i, j) with i < j
    std::vector<BaselineCell> vs_baseline;  // one per segment size
};

struct ComparisonGrid {
    double alpha = 0.05;
    TwoSampleMethod method = TwoSampleMethod::welch;
    std::vector<std::uint64_t> sizes;
    std::vector<TypeComparison> types;
};

// Builds the full comparison grid: for every antigen type seen in the
// segmented runs, two-sided tests between every pair of segment sizes and
// a one-sided test of each size against the unsegmented baseline score.
// Throws ConfigError if the baseline lacks a type under test or the plan
// lacks its direction.
ComparisonGrid compare_runs(std::span<const RunSeries> runs,
                            const std::map<std::string, double>& baseline_scores,
                            const TestPlan& plan);

} // namespace ddca

#endif // DDCA_STATS_HPP
