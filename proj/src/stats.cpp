#include "ddca/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "ddca/errors.hpp"

namespace ddca {

namespace {

constexpr double kBetaEps = 1e-15;
constexpr double kBetaTiny = 1e-300;
constexpr int kBetaMaxIter = 400;

// Continued fraction for the incomplete beta function (modified Lentz).
double beta_cont_fraction(double a, double b, double x) {
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::fabs(d) < kBetaTiny) d = kBetaTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kBetaMaxIter; ++m) {
        const int m2 = 2 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kBetaTiny) d = kBetaTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kBetaTiny) c = kBetaTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::fabs(d) < kBetaTiny) d = kBetaTiny;
        c = 1.0 + aa / c;
        if (std::fabs(c) < kBetaTiny) c = kBetaTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::fabs(del - 1.0) < kBetaEps) break;
    }
    return h;
}

struct Moments {
    double mean = 0.0;
    double variance = 0.0; // sample (n-1); 0 when n = 1
    std::size_t n = 0;
};

Moments moments(std::span<const double> x) {
    Moments m;
    m.n = x.size();
    if (m.n == 0) return m;
    double sum = 0.0;
    for (double v : x) sum += v;
    m.mean = sum / static_cast<double>(m.n);
    if (m.n > 1) {
        double ss = 0.0;
        for (double v : x) {
            const double d = v - m.mean;
            ss += d * d;
        }
        m.variance = ss / static_cast<double>(m.n - 1);
    }
    return m;
}

void require_samples(std::span<const double> x, std::size_t min_n, const char* which) {
    if (x.size() < min_n) {
        throw InsufficientDataError(std::string(which) + " needs at least " +
                                    std::to_string(min_n) + " samples, got " +
                                    std::to_string(x.size()));
    }
}

// Finishes a two-sample result from a computed statistic and df.
TTestResult finish_two_sided(double t, double df, double alpha) {
    TTestResult r;
    r.kind = TestKind::two_sample_two_sided;
    r.statistic = t;
    r.degrees_of_freedom = df;
    r.p_value = 2.0 * student_t_cdf(-std::fabs(t), df);
    if (r.p_value > 1.0) r.p_value = 1.0;
    r.alpha = alpha;
    r.significant = r.p_value < alpha;
    return r;
}

// Degenerate two-sample case: both sides constant.
TTestResult zero_variance_two_sided(double mean_a, double mean_b, double df, double alpha) {
    TTestResult r;
    r.kind = TestKind::two_sample_two_sided;
    r.degrees_of_freedom = df;
    r.alpha = alpha;
    if (mean_a == mean_b) {
        r.statistic = 0.0;
        r.p_value = 1.0;
    } else {
        r.statistic = mean_a > mean_b ? std::numeric_limits<double>::infinity()
                                      : -std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
    }
    r.significant = r.p_value < alpha;
    return r;
}

} // namespace

double regularized_incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0) || !(b > 0.0)) {
        throw DataError("incomplete beta requires a, b > 0");
    }
    if (std::isnan(x) || x < 0.0 || x > 1.0) {
        throw DataError("incomplete beta requires x in [0, 1]");
    }
    if (x == 0.0) return 0.0;
    if (x == 1.0) return 1.0;
    const double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                            a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(ln_front);
    if (x < (a + 1.0) / (a + b + 2.0)) {
        return front * beta_cont_fraction(a, b, x) / a;
    }
    return 1.0 - front * beta_cont_fraction(b, a, 1.0 - x) / b;
}

double student_t_cdf(double t, double df) {
    if (!(df > 0.0)) {
        throw DataError("student_t_cdf requires df > 0");
    }
    if (std::isinf(t)) return t > 0.0 ? 1.0 : 0.0;
    if (t == 0.0) return 0.5;
    const double x = df / (df + t * t);
    const double tail = 0.5 * regularized_incomplete_beta(0.5 * df, 0.5, x); // P(T >= |t|)
    return t > 0.0 ? 1.0 - tail : tail;
}

SummaryRow summarize(std::span<const double> series, const std::string& antigen_type,
                     std::uint64_t segment_size) {
    require_samples(series, 1, "summarize");
    SummaryRow row;
    row.antigen_type = antigen_type;
    row.segment_size = segment_size;
    row.n_segments = series.size();
    row.min = *std::min_element(series.begin(), series.end());
    row.max = *std::max_element(series.begin(), series.end());
    const Moments m = moments(series);
    row.mean = m.mean;
    row.stdev = std::sqrt(m.variance);
    return row;
}

const char* to_string(Direction d) {
    return d == Direction::greater ? "greater" : "less";
}

Direction direction_from_string(const std::string& name) {
    if (name == "greater") return Direction::greater;
    if (name == "less") return Direction::less;
    throw ConfigError("unknown direction '" + name + "' (expected greater or less)");
}

TTestResult welch_two_sided(std::span<const double> a, std::span<const double> b, double alpha) {
    require_samples(a, 2, "welch_two_sided");
    require_samples(b, 2, "welch_two_sided");
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    if (ma.variance == 0.0 && mb.variance == 0.0) {
        return zero_variance_two_sided(ma.mean, mb.mean,
                                       static_cast<double>(ma.n + mb.n - 2), alpha);
    }
    const double ga = ma.variance / static_cast<double>(ma.n);
    const double gb = mb.variance / static_cast<double>(mb.n);
    const double t = (ma.mean - mb.mean) / std::sqrt(ga + gb);
    const double df = (ga + gb) * (ga + gb) /
                      (ga * ga / static_cast<double>(ma.n - 1) +
                       gb * gb / static_cast<double>(mb.n - 1));
    return finish_two_sided(t, df, alpha);
}

TTestResult pooled_two_sided(std::span<const double> a, std::span<const double> b, double alpha) {
    require_samples(a, 2, "pooled_two_sided");
    require_samples(b, 2, "pooled_two_sided");
    const Moments ma = moments(a);
    const Moments mb = moments(b);
    const double df = static_cast<double>(ma.n + mb.n - 2);
    if (ma.variance == 0.0 && mb.variance == 0.0) {
        return zero_variance_two_sided(ma.mean, mb.mean, df, alpha);
    }
    const double sp2 = (static_cast<double>(ma.n - 1) * ma.variance +
                        static_cast<double>(mb.n - 1) * mb.variance) / df;
    const double se = std::sqrt(sp2 * (1.0 / static_cast<double>(ma.n) +
                                       1.0 / static_cast<double>(mb.n)));
    const double t = (ma.mean - mb.mean) / se;
    return finish_two_sided(t, df, alpha);
}

TTestResult two_sample_two_sided(std::span<const double> a, std::span<const double> b,
                                 double alpha, TwoSampleMethod method) {
    return method == TwoSampleMethod::welch ? welch_two_sided(a, b, alpha)
                                            : pooled_two_sided(a, b, alpha);
}

TTestResult one_sample_one_sided(std::span<const double> x, double true_mean,
                                 Direction direction, double alpha) {
    require_samples(x, 2, "one_sample_one_sided");
    const Moments m = moments(x);
    TTestResult r;
    r.kind = TestKind::one_sample_one_sided;
    r.degrees_of_freedom = static_cast<double>(m.n - 1);
    r.alpha = alpha;
    r.direction = direction;
    if (m.variance == 0.0) {
        if (m.mean == true_mean) {
            r.statistic = 0.0;
            r.p_value = 0.5;
        } else {
            r.statistic = m.mean > true_mean ? std::numeric_limits<double>::infinity()
                                             : -std::numeric_limits<double>::infinity();
            const bool in_direction = (direction == Direction::greater) == (m.mean > true_mean);
            r.p_value = in_direction ? 0.0 : 1.0;
        }
    } else {
        r.statistic = (m.mean - true_mean) /
                      std::sqrt(m.variance / static_cast<double>(m.n));
        r.p_value = direction == Direction::greater
                        ? student_t_cdf(-r.statistic, r.degrees_of_freedom)
                        : student_t_cdf(r.statistic, r.degrees_of_freedom);
    }
    r.significant = r.p_value < alpha;
    return r;
}

RunSeries run_series_from_reports(std::span<const SegmentReport> reports,
                                  std::uint64_t segment_size) {
    RunSeries out;
    out.segment_size = segment_size;
    for (const auto& report : reports) {
        for (const auto& [type, score] : report.scores) {
            out.series[type].push_back(score.k_alpha);
        }
    }
    return out;
}

ComparisonGrid compare_runs(std::span<const RunSeries> runs,
                            const std::map<std::string, double>& baseline_scores,
                            const TestPlan& plan) {
    ComparisonGrid grid;
    grid.alpha = plan.alpha;
    grid.method = plan.method;
    for (const auto& run : runs) grid.sizes.push_back(run.segment_size);

    std::set<std::string> type_names;
    for (const auto& run : runs) {
        for (const auto& [type, _] : run.series) type_names.insert(type);
    }

    static const std::vector<double> kEmpty;
    auto series_of = [&](const RunSeries& run, const std::string& type)
        -> const std::vector<double>& {
        auto it = run.series.find(type);
        return it == run.series.end() ? kEmpty : it->second;
    };

    for (const auto& type : type_names) {
        auto base_it = baseline_scores.find(type);
        if (base_it == baseline_scores.end()) {
            throw ConfigError("baseline report lacks antigen type '" + type + "'");
        }
        auto dir_it = plan.directions.find(type);
        if (dir_it == plan.directions.end()) {
            throw ConfigError("test plan lacks a direction for antigen type '" + type + "'");
        }

        TypeComparison cmp;
        cmp.antigen_type = type;
        cmp.baseline_mu = base_it->second;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            for (std::size_t j = i + 1; j < runs.size(); ++j) {
                PairwiseCell cell;
                cell.size_a = runs[i].segment_size;
                cell.size_b = runs[j].segment_size;
                const auto& sa = series_of(runs[i], type);
                const auto& sb = series_of(runs[j], type);
                if (sa.size() >= 2 && sb.size() >= 2) {
                    cell.result = two_sample_two_sided(sa, sb, plan.alpha, plan.method);
                }
                cmp.pairwise.push_back(std::move(cell));
            }
        }
        for (const auto& run : runs) {
            BaselineCell cell;
            cell.segment_size = run.segment_size;
            const auto& s = series_of(run, type);
            if (s.size() >= 2) {
                cell.result = one_sample_one_sided(s, cmp.baseline_mu, dir_it->second, plan.alpha);
            }
            cmp.vs_baseline.push_back(std::move(cell));
        }
        grid.types.push_back(std::move(cmp));
    }
    return grid;
}

} // namespace ddca
