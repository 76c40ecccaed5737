#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "dynamics.hpp"

namespace esqpt {

// Histogram + raw samples of S_d over a long time window. Moments always
// come from the raw samples, never from the binned density.
struct EmpiricalDistribution {
    Eigen::VectorXd edges;    // bins+1 uniform edges over [sample_min, sample_max]
    Eigen::VectorXd density;  // per-bin probability density
    std::vector<double> samples;
    long sample_count = 0;
    double sample_min = 0.0, sample_max = 0.0;
    double mean = 0.0, variance = 0.0;
    bool degenerate = false;  // zero-width support (constant series)

    int bins() const { return static_cast<int>(density.size()); }
};

// Piecewise-linear interpolant of the cumulative histogram: F = 0 at the
// lowest edge, 1 at the highest, clamped outside.
struct EmpiricalCdf {
    Eigen::VectorXd xs;  // edges
    Eigen::VectorXd fs;  // cumulative fractions at the edges

    double operator()(double x) const {
        const int n = static_cast<int>(xs.size());
        if (x <= xs[0]) return 0.0;
        if (x >= xs[n - 1]) return 1.0;
        const int j = static_cast<int>(
            std::upper_bound(xs.data(), xs.data() + n, x) - xs.data()) - 1;
        const double t = (x - xs[j]) / (xs[j + 1] - xs[j]);
        return fs[j] + t * (fs[j + 1] - fs[j]);
    }
};

namespace detail {

inline double central_power_mean(const std::vector<double>& xs, double mean, int order) {
    double acc = 0.0;
    for (double x : xs) {
        const double d = x - mean;
        double p = d;
        for (int k = 1; k < order; ++k) p *= d;
        acc += p;
    }
    return acc / static_cast<double>(xs.size());
}

}  // namespace detail

inline EmpiricalDistribution empirical_distribution(const std::vector<double>& samples,
                                                    int bins = 100) {
    if (bins < 2) throw std::invalid_argument("empirical_distribution: need at least 2 bins");
    if (samples.size() < 100)
        throw std::invalid_argument("empirical_distribution: need at least 100 samples, got " +
                                    std::to_string(samples.size()));

    EmpiricalDistribution dist;
    dist.samples = samples;
    dist.sample_count = static_cast<long>(samples.size());
    auto [lo, hi] = std::minmax_element(samples.begin(), samples.end());
    dist.sample_min = *lo;
    dist.sample_max = *hi;

    double acc = 0.0;
    for (double x : samples) acc += x;
    dist.mean = acc / static_cast<double>(samples.size());
    dist.variance = detail::central_power_mean(samples, dist.mean, 2);

    const double span = dist.sample_max - dist.sample_min;
    if (span <= 1e-12 * std::max(1.0, std::abs(dist.sample_max))) {
        dist.degenerate = true;
        return dist;  // no meaningful histogram
    }

    dist.edges.resize(bins + 1);
    for (int i = 0; i <= bins; ++i)
        dist.edges[i] = dist.sample_min + span * i / bins;
    dist.edges[bins] = dist.sample_max;

    Eigen::VectorXd counts = Eigen::VectorXd::Zero(bins);
    for (double x : samples) {
        int b = static_cast<int>((x - dist.sample_min) / span * bins);
        b = std::clamp(b, 0, bins - 1);
        counts[b] += 1.0;
    }
    const double h = span / bins;
    dist.density = counts / (static_cast<double>(samples.size()) * h);
    return dist;
}

inline EmpiricalDistribution empirical_distribution(const EntropyTimeSeries& series,
                                                    int bins = 100) {
    return empirical_distribution(series.values, bins);
}

inline EmpiricalCdf cdf(const EmpiricalDistribution& dist) {
    if (dist.degenerate)
        throw std::invalid_argument("cdf: degenerate (zero-width) distribution");
    const int b = dist.bins();
    EmpiricalCdf f;
    f.xs = dist.edges;
    f.fs.resize(b + 1);
    f.fs[0] = 0.0;
    const double h = (dist.sample_max - dist.sample_min) / b;
    double run = 0.0;
    for (int i = 0; i < b; ++i) {
        run += dist.density[i] * h;
        f.fs[i + 1] = run;
    }
    f.fs[b] = 1.0;  // pin exactly despite rounding in the running sum
    return f;
}

// Central moment of order n in {1, 2, 3, 4}, from the raw samples. Order 2
// retraces the construction-time accumulation, so it equals the variance
// field bit for bit.
inline double central_moment(const EmpiricalDistribution& dist, int n) {
    if (n < 1 || n > 4)
        throw std::invalid_argument("central_moment: order must be in {1,2,3,4}");
    if (n == 1) {
        double acc = 0.0;
        for (double x : dist.samples) acc += x - dist.mean;
        return acc / static_cast<double>(dist.samples.size());
    }
    return detail::central_power_mean(dist.samples, dist.mean, n);
}

inline std::vector<double> standardize(const std::vector<double>& samples) {
    if (samples.size() < 2)
        throw std::invalid_argument("standardize: need at least 2 samples");
    double acc = 0.0;
    for (double x : samples) acc += x;
    const double mean = acc / static_cast<double>(samples.size());
    const double var = detail::central_power_mean(samples, mean, 2);
    if (!(var > 0.0)) throw std::invalid_argument("standardize: zero variance");
    const double sd = std::sqrt(var);
    std::vector<double> out(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) out[i] = (samples[i] - mean) / sd;
    return out;
}

inline std::vector<double> standardize(const EntropyTimeSeries& series) {
    return standardize(series.values);
}

struct PeakOptions {
    int smooth_width = 7;     // moving-average window (zero-extended ends)
    int min_separation = 10;  // bins
    double rel_height = 0.3;  // candidates must exceed this fraction of the peak
};

// Indices of well-separated local maxima of a (smoothed) density profile.
// Candidates at least rel_height of the global smoothed maximum survive;
// candidates closer than min_separation merge, keeping the taller one.
inline std::vector<int> density_peaks(const Eigen::VectorXd& density,
                                      const PeakOptions& opt = {}) {
    const int n = static_cast<int>(density.size());
    if (n < 3) return {};
    const int w = std::max(1, opt.smooth_width);
    const int half = w / 2;
    Eigen::VectorXd sm(n);
    for (int i = 0; i < n; ++i) {
        double acc = 0.0;
        for (int j = i - half; j <= i + half; ++j)
            if (j >= 0 && j < n) acc += density[j];
        sm[i] = acc / w;
    }
    const double thr = opt.rel_height * sm.maxCoeff();
    std::vector<int> peaks;
    for (int i = 1; i + 1 < n; ++i) {
        if (!(sm[i] >= sm[i - 1] && sm[i] >= sm[i + 1] && sm[i] > thr)) continue;
        if (!peaks.empty() && i - peaks.back() < opt.min_separation) {
            if (sm[i] > sm[peaks.back()]) peaks.back() = i;
        } else {
            peaks.push_back(i);
        }
    }
    return peaks;
}

}  // namespace esqpt
