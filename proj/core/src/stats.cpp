#include "airfl/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <thread>

#include "airfl/errors.hpp"

namespace airfl {

double MeanAccumulator::stderr_mean() const {
    if (count <= 1) return 0.0;
    return std::sqrt(variance() / static_cast<double>(count));
}

double ComplexMeanAccumulator::stderr_mean() const {
    if (count <= 1) return 0.0;
    return std::sqrt(variance() / static_cast<double>(count));
}

double ks_statistic(std::span<const double> samples,
                    const std::function<double(double)>& cdf) {
    if (samples.empty()) throw InputError("KS statistic needs at least one sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d_max = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = cdf(sorted[i]);
        const double hi = (static_cast<double>(i) + 1.0) / n - f;
        const double lo = f - static_cast<double>(i) / n;
        d_max = std::max({d_max, hi, lo});
    }
    return d_max;
}

double ks_critical_value(std::size_t n_samples, double alpha) {
    if (n_samples == 0) throw InputError("KS critical value needs n >= 1");
    const double c = std::sqrt(-0.5 * std::log(alpha / 2.0));
    return c / std::sqrt(static_cast<double>(n_samples));
}

LinearFit ols_fit(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw InputError("OLS fit needs matching x/y with at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0.0) throw InputError("OLS fit: x values are all identical");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

void parallel_chunks(std::int64_t n_trials, std::int64_t chunk_size, int n_threads,
                     const std::function<void(std::size_t, std::int64_t,
                                              std::int64_t)>& body) {
    if (n_trials <= 0) return;
    if (chunk_size <= 0) throw InputError("chunk_size must be positive");
    const std::int64_t n_chunks = (n_trials + chunk_size - 1) / chunk_size;
    auto run_chunk = [&](std::int64_t chunk) {
        const std::int64_t begin = chunk * chunk_size;
        const std::int64_t end = std::min(begin + chunk_size, n_trials);
        body(static_cast<std::size_t>(chunk), begin, end);
    };
    if (n_threads <= 1 || n_chunks == 1) {
        for (std::int64_t chunk = 0; chunk < n_chunks; ++chunk) run_chunk(chunk);
        return;
    }
    std::atomic<std::int64_t> next{0};
    const int workers =
        static_cast<int>(std::min<std::int64_t>(n_threads, n_chunks));
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            while (true) {
                const std::int64_t chunk = next.fetch_add(1);
                if (chunk >= n_chunks) break;
                run_chunk(chunk);
            }
        });
    }
    for (auto& t : pool) t.join();
}

}  // namespace airfl
