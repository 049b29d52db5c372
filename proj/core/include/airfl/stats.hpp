#ifndef AIRFL_STATS_HPP
#define AIRFL_STATS_HPP

#include <complex>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace airfl {

/// Sum-based accumulator for real samples. Merging is exact-order: partials
/// are always folded in chunk order, so estimates do not depend on how many
/// workers produced them.
struct MeanAccumulator {
    long long count = 0;
    double sum = 0.0;
    double sum_sq = 0.0;

    void add(double x) {
        ++count;
        sum += x;
        sum_sq += x * x;
    }
    void merge(const MeanAccumulator& other) {
        count += other.count;
        sum += other.sum;
        sum_sq += other.sum_sq;
    }
    double mean() const { return count > 0 ? sum / static_cast<double>(count) : 0.0; }
    /// Population variance of the samples.
    double variance() const {
        if (count <= 0) return 0.0;
        const double m = mean();
        const double v = sum_sq / static_cast<double>(count) - m * m;
        return v > 0.0 ? v : 0.0;
    }
    /// Standard error of the sample mean.
    double stderr_mean() const;
};

/// Accumulator for complex samples: tracks the complex mean and the scalar
/// variance E|x - Ex|^2.
struct ComplexMeanAccumulator {
    long long count = 0;
    std::complex<double> sum{0.0, 0.0};
    double sum_sq_mag = 0.0;

    void add(std::complex<double> x) {
        ++count;
        sum += x;
        sum_sq_mag += std::norm(x);
    }
    void merge(const ComplexMeanAccumulator& other) {
        count += other.count;
        sum += other.sum;
        sum_sq_mag += other.sum_sq_mag;
    }
    std::complex<double> mean() const {
        return count > 0 ? sum / static_cast<double>(count) : std::complex<double>{};
    }
    double second_moment() const {
        return count > 0 ? sum_sq_mag / static_cast<double>(count) : 0.0;
    }
    double variance() const {
        const double v = second_moment() - std::norm(mean());
        return v > 0.0 ? v : 0.0;
    }
    /// Standard error of |mean| treating the complex mean as a 2-d estimate.
    double stderr_mean() const;
};

/// One-sample Kolmogorov-Smirnov statistic sup_x |F_emp(x) - cdf(x)|.
/// Sorts a copy of the samples.
double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf);

/// Asymptotic KS critical value at significance `alpha`.
double ks_critical_value(std::size_t n_samples, double alpha);

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = intercept + slope * x.
LinearFit ols_fit(std::span<const double> x, std::span<const double> y);

/// Runs `body(chunk_index, trial_begin, trial_end)` over fixed-size chunks of
/// the trial range [0, n_trials). Chunk boundaries depend only on
/// `chunk_size`, so per-chunk partials (and anything folded from them in
/// chunk order) are identical for any worker count.
void parallel_chunks(std::int64_t n_trials, std::int64_t chunk_size, int n_threads,
                     const std::function<void(std::size_t, std::int64_t,
                                              std::int64_t)>& body);

}  // namespace airfl

#endif  // AIRFL_STATS_HPP
